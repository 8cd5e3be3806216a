"""
Pydantic schemas shared by the cp, tr and baselines drivers.

SampledAlsConfig carries every knob of a sampled ALS run; FitDiagnostics is
what each driver returns next to the fitted model.
"""

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

InitMethod = Literal["normal", "range"]


class SampledAlsConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    j1: int = Field(1000, ge=1, description="recursive sketch dimension")
    j2: int = Field(50, ge=1, description="sampled rows per least-squares solve")
    max_iterations: int = Field(20, ge=1)
    tolerance: float = Field(1e-6, ge=0, description="stop when |Δ rel-error| over a sweep drops below")
    seed: int = Field(0, ge=0)
    init: InitMethod = "normal"
    exhaustive: bool = Field(False, description="use every row once instead of drawing")
    regularization: float = Field(0.0, ge=0, description="Tikhonov constant for every solve")


class FitDiagnostics(BaseModel):
    method: str
    errors: list[float] = Field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    seconds: float = 0.0
    clamp_events: int = 0
    normalization_constants: list[float] = Field(default_factory=list)
    rank_deficient_solves: int = 0

    @property
    def final_error(self) -> float | None:
        return self.errors[-1] if self.errors else None

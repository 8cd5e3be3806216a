"""
The ALS sweep loop shared by every CP and TR driver.

A driver supplies `solve_mode(model, n, iteration) -> (model, ModeReport)`;
this module cycles it over the modes, tracks the relative error after each
sweep and stops after max_iterations or once the error changes by less than
the tolerance.
"""

import logging
import time
from collections.abc import Callable
from typing import Generic, NamedTuple, TypeVar

from .errors import SketchedAlsError
from .schemas import FitDiagnostics

logger = logging.getLogger(__name__)

ModelT = TypeVar("ModelT")


class ModeReport(NamedTuple):
    clamp_events: int = 0
    normalization: float | None = None
    rank_deficient: bool = False


class AlsFit(NamedTuple, Generic[ModelT]):
    model: ModelT
    diagnostics: FitDiagnostics


def run_als_sweeps(
    model: ModelT,
    solve_mode: Callable[[ModelT, int, int], tuple[ModelT, ModeReport]],
    monitor: Callable[[ModelT], float],
    max_iterations: int,
    tolerance: float,
    method: str,
) -> AlsFit[ModelT]:
    diagnostics = FitDiagnostics(method=method)
    started = time.perf_counter()
    previous = None
    for iteration in range(max_iterations):
        for n in range(model.order):
            try:
                model, report = solve_mode(model, n, iteration)
            except SketchedAlsError as e:
                e.add_note(f"{method}: failed solving mode {n} in iteration {iteration + 1}")
                raise
            diagnostics.clamp_events += report.clamp_events
            diagnostics.rank_deficient_solves += int(report.rank_deficient)
            if report.normalization is not None:
                diagnostics.normalization_constants.append(report.normalization)
        error = monitor(model)
        diagnostics.errors.append(error)
        diagnostics.iterations = iteration + 1
        logger.info("%s iteration %d: rel_error=%.6e", method, iteration + 1, error)
        if previous is not None and abs(previous - error) < tolerance:
            diagnostics.converged = True
            break
        previous = error
    diagnostics.seconds = time.perf_counter() - started
    logger.info(
        "[OK] %s finished: %d iterations, rel_error=%.6e, %.2fs",
        method,
        diagnostics.iterations,
        diagnostics.errors[-1],
        diagnostics.seconds,
    )
    return AlsFit(model, diagnostics)

"""
Conditional chain sampling over multi-index grids.

A ChainDistribution describes a joint distribution over (i_{m_0}, ..., i_{m_{M-1}})
through unnormalized prefix masses: for a batch of fixed prefixes (carried as
opaque `states`) it returns, for every candidate value of the next subindex,
the total mass of all completions of prefix + candidate. Dividing by the
normalization constant C gives the marginal probability of that extended
prefix, and the ratio to the parent mass is the conditional used for drawing.

Negative masses from cancellation are clamped to zero and each step is
renormalized by the surviving mass; clamp events are counted on the sample.
"""

import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateDistributionError, IndexRangeError
from ..settings import check_dense_budget
from .sampling import IndexSample

logger = logging.getLogger(__name__)

MAX_RETRIES = 10


class ChainDistribution(ABC):
    """Joint distribution over subindices, evaluated one subindex at a time."""

    #: tensor modes in draw order
    modes: tuple[int, ...]
    #: subindex range per draw step
    dims: tuple[int, ...]

    @property
    @abstractmethod
    def normalization(self) -> float:
        """Total mass C."""

    @property
    def state_size(self) -> int:
        """Floats held per prefix state (for memory guards)."""
        return 1

    @abstractmethod
    def start(self, count: int) -> np.ndarray:
        """States for `count` empty prefixes."""

    @abstractmethod
    def candidate_masses(self, states: np.ndarray, step: int) -> np.ndarray:
        """(count, dims[step]) masses of prefix + each candidate for subindex `step`."""

    @abstractmethod
    def advance(self, states: np.ndarray, step: int, chosen: np.ndarray) -> np.ndarray:
        """States after fixing subindex `step` to `chosen` (one value per state)."""


def chain_marginal(dist: ChainDistribution, prefix: Sequence[int]) -> float:
    """Marginal probability of the first len(prefix) subindices taking `prefix`."""
    prefix = [int(i) for i in prefix]
    if len(prefix) > len(dist.dims):
        raise IndexRangeError(f"prefix of length {len(prefix)} exceeds {len(dist.dims)} steps")
    for step, value in enumerate(prefix):
        if not 0 <= value < dist.dims[step]:
            raise IndexRangeError(f"subindex {value} out of range at step {step}")
    if not prefix:
        return 1.0
    states = dist.start(1)
    for step, value in enumerate(prefix[:-1]):
        states = dist.advance(states, step, np.array([value]))
    mass = dist.candidate_masses(states, len(prefix) - 1)[0, prefix[-1]]
    return max(float(mass), 0.0) / dist.normalization


def _walk(dist: ChainDistribution, count: int, rng: np.random.Generator):
    steps = len(dist.dims)
    indices = np.empty((count, steps), dtype=np.int64)
    probabilities = np.ones(count)
    alive = np.ones(count, dtype=bool)
    clamps = 0
    states = dist.start(count)
    rows = np.arange(count)
    for step in range(steps):
        masses = dist.candidate_masses(states, step)
        negative = masses < 0
        if negative.any():
            clamps += int(negative.sum())
            masses = np.where(negative, 0.0, masses)
        totals = masses.sum(axis=1)
        dead = ~(totals > 0)
        if dead.any():
            alive &= ~dead
            masses[dead] = 1.0
            totals[dead] = masses.shape[1]
        conditional = masses / totals[:, None]
        cdf = np.cumsum(conditional, axis=1)
        u = rng.random(count)
        chosen = np.minimum((cdf <= u[:, None]).sum(axis=1), masses.shape[1] - 1)
        picked = conditional[rows, chosen]
        zero = picked <= 0
        if zero.any():
            # u fell in a rounding gap at the end of the CDF; take the last positive slot
            last = masses.shape[1] - 1 - np.argmax(conditional[zero, ::-1] > 0, axis=1)
            chosen[zero] = last
            picked = conditional[rows, chosen]
        probabilities *= picked
        indices[:, step] = chosen
        states = dist.advance(states, step, chosen)
    return indices, probabilities, alive, clamps


def draw_chain(dist: ChainDistribution, count: int, rng: np.random.Generator) -> IndexSample:
    """
    Draw `count` i.i.d. multi-indices by sampling each subindex from its conditional.

    The recorded probability of a draw is the product of its conditionals.
    Draws that hit a prefix with no remaining mass are redrawn from scratch, up
    to MAX_RETRIES times.
    """
    indices = np.empty((count, len(dist.dims)), dtype=np.int64)
    probabilities = np.empty(count)
    pending = np.arange(count)
    clamps = 0
    for attempt in range(MAX_RETRIES + 1):
        if pending.size == 0:
            break
        if attempt:
            logger.warning("Redrawing %d samples that hit zero conditional mass", pending.size)
        idx, prob, alive, c = _walk(dist, pending.size, rng)
        clamps += c
        indices[pending[alive]] = idx[alive]
        probabilities[pending[alive]] = prob[alive]
        pending = pending[~alive]
    if pending.size:
        raise DegenerateDistributionError(
            f"{pending.size} draws kept hitting zero conditional mass after {MAX_RETRIES} retries"
        )
    if clamps:
        logger.warning("Clamped %d negative conditional masses to zero", clamps)
    return IndexSample(indices, probabilities, modes=dist.modes, clamp_events=clamps)


def enumerate_joint(dist: ChainDistribution) -> tuple[np.ndarray, np.ndarray]:
    """
    Joint probabilities over the full grid by expanding every prefix.

    Returns (indices, probabilities) with indices of shape (prod dims, M) in
    draw-step column order; the last step varies fastest. Test-scale only.
    """
    steps = len(dist.dims)
    check_dense_budget(math.prod(dist.dims[:-1]) * dist.state_size, "joint enumeration states")
    check_dense_budget(math.prod(dist.dims) * steps, "joint enumeration indices")
    prefixes = np.zeros((1, 0), dtype=np.int64)
    states = dist.start(1)
    for step in range(steps - 1):
        size = dist.dims[step]
        candidates = np.tile(np.arange(size), prefixes.shape[0])
        prefixes = np.hstack([np.repeat(prefixes, size, axis=0), candidates[:, None]])
        states = dist.advance(np.repeat(states, size, axis=0), step, candidates)
    masses = dist.candidate_masses(states, steps - 1)
    last = dist.dims[-1]
    indices = np.hstack(
        [np.repeat(prefixes, last, axis=0), np.tile(np.arange(last), prefixes.shape[0])[:, None]]
    )
    probabilities = np.maximum(masses.ravel(), 0.0) / dist.normalization
    return indices, probabilities

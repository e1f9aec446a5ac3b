"""Executable bound checks and indistinguishable-model constructions.

Two bound checks constrain any model that reproduces a given probability
table: an upper bound on state overlap at distinct preparation knobs, and a
lower bound on the norm difference of measurement projections at distinct
measurement knobs.  Two explicit direct-sum constructions show the bounds are
one-sided: a model can always be rebuilt with zero state overlap, or with
projection norm-difference exactly 1, without changing a single probability.

The joint/conditional operations realize outcome-component conditioning: the
Bayes conditional of a product-form measurement equals the prediction of the
normalized projected ("reduced") state, which is checked rather than assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import ModelDomainError, NullEventError, StructureError
from .qmodel import (
    DensityOperator,
    ProjectiveResolution,
    SpecificQuantumModel,
    UnitaryEvolution,
    dagger,
    distribution,
    operator_norm,
    overlap,
)

BOUND_TOL = 1e-9


# ---------------------------------------------------------------------------
# Proposition 1: overlap upper bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapBoundResult:
    overlap_value: float
    bound: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.bound - self.overlap_value


def prop1_bound(model: SpecificQuantumModel, a1, a2,
                sweep: Sequence[tuple]) -> OverlapBoundResult:
    """Overlap of rho(a1), rho(a2) against the min over the sweep of
    sqrt(mu(a2)) + sqrt(1 - mu(a1)), taken over all outcomes."""
    if a1 == a2:
        raise ModelDomainError("overlap bound needs two distinct state knobs")
    sweep = list(sweep)
    if not sweep:
        raise ModelDomainError("sweep must be nonempty")
    value = overlap(model.state(a1), model.state(a2))
    bound = np.inf
    for b, t in sweep:
        mu1 = distribution(model, a1, b, t)
        mu2 = distribution(model, a2, b, t)
        for omega in mu1:
            cand = np.sqrt(mu2[omega]) + np.sqrt(max(0.0, 1.0 - mu1[omega]))
            bound = min(bound, cand)
    return OverlapBoundResult(value, float(bound), bool(value <= bound + BOUND_TOL))


# ---------------------------------------------------------------------------
# Proposition 2: zero-overlap reconstruction
# ---------------------------------------------------------------------------

def _embed_block(matrix: np.ndarray, n_blocks: int, block: int) -> np.ndarray:
    d = matrix.shape[0]
    out = np.zeros((n_blocks * d, n_blocks * d), dtype=complex)
    out[block * d:(block + 1) * d, block * d:(block + 1) * d] = matrix
    return out


def prop2_construct(model: SpecificQuantumModel, a1, a2) -> SpecificQuantumModel:
    """Triple-block rebuild with the same probability table and
    zero overlap between the states at ``a1`` and ``a2``.

    The new space is three copies of the old one; measurements and the
    evolution generator act identically on each copy, while the states at
    ``a1`` and ``a2`` are routed to blocks 1 and 2 (all other knobs stay in
    block 0).
    """
    if a1 == a2:
        raise ModelDomainError("construction needs two distinct state knobs")
    model.state(a1), model.state(a2)  # label validation

    states = {}
    for a, rho in model.states.items():
        block = 1 if a == a1 else 2 if a == a2 else 0
        states[a] = DensityOperator(_embed_block(rho.matrix, 3, block))
    measurements = {
        b: ProjectiveResolution(
            res.outcomes,
            tuple(block_diag(p, p, p) for p in res.projections),
        )
        for b, res in model.measurements.items()
    }
    h = model.evolution.generator
    return SpecificQuantumModel(states, measurements, UnitaryEvolution(block_diag(h, h, h)))


# ---------------------------------------------------------------------------
# Proposition 3: projection-difference lower bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormBoundResult:
    norm_diff: float
    lower_bound: float
    holds: bool

    @property
    def margin(self) -> float:
        return self.norm_diff - self.lower_bound


def prop3_bound(model: SpecificQuantumModel, b1, b2, outcome,
                sweep: Sequence[tuple]) -> NormBoundResult:
    """``||E(b1)(c) - E(b2)(c)||`` against the max over the sweep of
    ``|mu(a,b1,t)(c) - mu(a,b2,t)(c)|``."""
    p1 = model.measurement(b1).projection(outcome)
    p2 = model.measurement(b2).projection(outcome)
    norm_diff = operator_norm(p1 - p2)
    lower = 0.0
    for a, t in sweep:
        mu1 = distribution(model, a, b1, t)
        mu2 = distribution(model, a, b2, t)
        lower = max(lower, abs(mu1[str(outcome)] - mu2[str(outcome)]))
    return NormBoundResult(norm_diff, lower, bool(norm_diff >= lower - BOUND_TOL))


# ---------------------------------------------------------------------------
# Proposition 4: unit norm-difference reconstruction
# ---------------------------------------------------------------------------

def _sink_outcome(res: ProjectiveResolution, avoid) -> str:
    candidates = sorted(o for o in res.outcomes if o != str(avoid))
    if not candidates:
        raise ModelDomainError(
            f"resolution has no outcome besides {avoid!r} to absorb the orthogonal block"
        )
    return candidates[0]


def prop4_construct(model: SpecificQuantumModel, b1, b2, outcome) -> SpecificQuantumModel:
    """Extend the space by an orthogonal block of equal dimension so that
    ``||E(b1)(c) - E(b2)(c)|| = 1`` while every probability is unchanged.

    At ``(b1, c)`` the projection gains the identity block.  Every other
    resolution keeps completeness by absorbing the identity block into one
    deterministic "sink" outcome: the lexicographically smallest label
    different from ``c`` (smallest overall if ``c`` is absent).  States are
    zero on the new block, so the extension never contributes probability.
    """
    c = str(outcome)
    if b1 == b2:
        raise ModelDomainError("construction needs two distinct measurement knobs")
    res1 = model.measurement(b1)
    res2 = model.measurement(b2)
    if c not in res1.outcomes or c not in res2.outcomes:
        raise ModelDomainError(f"outcome {c!r} must belong to both resolutions")

    d = model.dim
    eye = np.eye(d)
    zero = np.zeros((d, d))

    measurements = {}
    for b, res in model.measurements.items():
        sink = c if b == b1 else _sink_outcome(res, c)
        measurements[b] = ProjectiveResolution(
            res.outcomes,
            tuple(
                block_diag(p, eye if o == sink else zero)
                for o, p in zip(res.outcomes, res.projections)
            ),
        )
    states = {
        a: DensityOperator(block_diag(rho.matrix, zero))
        for a, rho in model.states.items()
    }
    h = model.evolution.generator
    return SpecificQuantumModel(states, measurements, UnitaryEvolution(block_diag(h, h)))


# ---------------------------------------------------------------------------
# Joint outcomes and reduction
# ---------------------------------------------------------------------------

def joint_probability(rho: DensityOperator, res_a: ProjectiveResolution,
                      res_b: ProjectiveResolution, j, k) -> float:
    """``Tr[rho (E_A(j) x E_B(k))]`` on a declared bipartite space."""
    if rho.dim != res_a.dim * res_b.dim:
        raise StructureError(
            f"state dim {rho.dim} != factor dims {res_a.dim} x {res_b.dim}"
        )
    proj = np.kron(res_a.projection(j), res_b.projection(k))
    val = float(np.trace(rho.matrix @ proj).real)
    return min(1.0, max(0.0, val))


def joint_distribution(rho: DensityOperator, res_a: ProjectiveResolution,
                       res_b: ProjectiveResolution) -> dict:
    return {
        (j, k): joint_probability(rho, res_a, res_b, j, k)
        for j in res_a.outcomes
        for k in res_b.outcomes
    }


NULL_EVENT_TOL = 1e-12
SKIP_PROB_TOL = 1e-10


def reduced_density(rho: DensityOperator, projection_a: np.ndarray,
                    dim_b: int | None = None) -> DensityOperator:
    """Normalized conditioning of a bipartite state on an A-factor projection:
    ``(E x 1) rho (E x 1) / Tr[...]``.

    Raises :class:`NullEventError` when the conditioning probability is below
    1e-12 instead of dividing toward non-finite values.
    """
    proj = np.asarray(projection_a, dtype=complex)
    da = proj.shape[0]
    if dim_b is None:
        if rho.dim % da:
            raise StructureError(f"state dim {rho.dim} is not divisible by factor dim {da}")
        dim_b = rho.dim // da
    if rho.dim != da * dim_b:
        raise StructureError(f"state dim {rho.dim} != factor dims {da} x {dim_b}")
    big = np.kron(proj, np.eye(dim_b))
    conditioned = big @ rho.matrix @ dagger(big)
    weight = float(np.trace(conditioned).real)
    if weight <= NULL_EVENT_TOL:
        raise NullEventError(
            f"condition-on-null-event: probability {weight:.3e} <= 1e-12"
        )
    return DensityOperator(conditioned / weight)


@dataclass(frozen=True)
class ReductionCheckResult:
    max_deviation: float
    skipped_outcomes: tuple


def reduction_theorem_check(rho: DensityOperator, res_a: ProjectiveResolution,
                            res_b: ProjectiveResolution) -> ReductionCheckResult:
    """Compare Bayes conditionals of the joint distribution with the
    reduced-state prediction for every outcome pair.

    Conditioning outcomes with probability below 1e-10 are skipped and
    reported, never extrapolated.
    """
    joint = joint_distribution(rho, res_a, res_b)
    eye_a = np.eye(res_a.dim)
    worst = 0.0
    skipped = []
    for j in res_a.outcomes:
        pj = sum(joint[(j, k)] for k in res_b.outcomes)
        if pj <= SKIP_PROB_TOL:
            skipped.append(j)
            continue
        rho_red = reduced_density(rho, res_a.projection(j), res_b.dim)
        for k in res_b.outcomes:
            bayes = joint[(j, k)] / pj
            via_reduced = float(
                np.trace(rho_red.matrix @ np.kron(eye_a, res_b.projection(k))).real
            )
            worst = max(worst, abs(bayes - via_reduced))
    return ReductionCheckResult(worst, tuple(skipped))


# ---------------------------------------------------------------------------
# Discriminating-projection search (conflict between overlap-differing models)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectionSearchResult:
    found: bool
    best_delta: float
    trials: int


def search_discriminating_projection(rho_a: DensityOperator, rho_b: DensityOperator,
                                     trials: int, seed: int,
                                     threshold: float = 1e-6) -> ProjectionSearchResult:
    """Random search for a projection whose expectation separates two states.

    Used on zero-overlap rebuild outputs (the original state embedded in
    block 0 against its relocated copy).  Failure to find a separating
    projection is reported, not treated as an error.
    """
    from .qmodel import random_unitary  # deferred: keeps import surface flat

    if rho_a.dim != rho_b.dim:
        raise StructureError("states must share one dimension")
    rng = np.random.default_rng(seed)
    d = rho_a.dim
    best = 0.0
    for _ in range(trials):
        basis = random_unitary(d, rng)
        rank = int(rng.integers(1, d))
        cols = basis[:, :rank]
        proj = cols @ dagger(cols)
        delta = abs(float(np.trace(rho_a.matrix @ proj).real)
                    - float(np.trace(rho_b.matrix @ proj).real))
        best = max(best, delta)
        if best > threshold:
            return ProjectionSearchResult(True, best, trials)
    return ProjectionSearchResult(best > threshold, best, trials)


def embed_in_blocks(rho: DensityOperator, n_blocks: int, block: int) -> DensityOperator:
    """State embedded into one block of an ``n_blocks``-fold direct sum."""
    return DensityOperator(_embed_block(rho.matrix, n_blocks, block))

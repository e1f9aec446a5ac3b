"""Finite-dimensional quantum models.

A *specific quantum model* is a triple of knob-indexed maps: knob ``a`` to a
density operator, knob ``b`` to a projective resolution of the identity, and a
unitary evolution generated by a fixed Hermitian operator.  The model induces
outcome probabilities through the trace rule, and the density-operator overlap
``Tr[rho1^(1/2) rho2^(1/2)]`` measures how close two asserted preparations are.

All types are immutable after construction and every operation is a pure
function; values can be shared freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ModelDomainError, StateValidationError, StructureError

HERM_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_ATOL = 1e-12
PROJ_ATOL = 1e-12
PROB_ATOL = 1e-10
OVERLAP_PSD_ATOL = 1e-9


def as_operator(matrix) -> np.ndarray:
    """Coerce to a read-only complex square matrix."""
    m = np.array(matrix, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise StructureError(f"expected a square matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(a: np.ndarray, atol: float = HERM_ATOL) -> bool:
    return max_abs(a - dagger(a)) <= atol


def hermitian_sqrt(a: np.ndarray, psd_atol: float = OVERLAP_PSD_ATOL) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-psd_atol, 0)`` are clamped to zero (rounding noise on
    PSD inputs); anything below ``-psd_atol`` raises.  Eigenvalues below the
    numerical-rank threshold are snapped to zero before the square root,
    which would otherwise amplify O(eps) noise to O(sqrt(eps)).
    """
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, atol=1e-10):
        raise StateValidationError("matrix square root requires a Hermitian input")
    vals, vecs = np.linalg.eigh(a)
    if vals.min() < -psd_atol:
        raise StateValidationError(
            f"matrix is not positive semidefinite (min eigenvalue {vals.min():.3e})"
        )
    cutoff = a.shape[0] * np.finfo(float).eps * max(vals.max(), 0.0)
    vals = np.where(vals < cutoff, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ dagger(vecs)


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityOperator:
    """Unit-trace Hermitian positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_operator(self.matrix)
        object.__setattr__(self, "matrix", m)
        if not is_hermitian(m):
            raise StateValidationError("density operator must be Hermitian within 1e-12")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise StateValidationError(f"density operator trace {tr} is not 1 within 1e-12")
        evals = np.linalg.eigvalsh(m)
        if evals.min() < -PSD_ATOL:
            raise StateValidationError(
                f"density operator has eigenvalue {evals.min():.3e} < -1e-12"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def from_pure(cls, vector) -> "DensityOperator":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        n = np.linalg.norm(v)
        if n == 0:
            raise StateValidationError("cannot build a pure state from the zero vector")
        v = v / n
        return cls(np.outer(v, v.conj()))

    @classmethod
    def maximally_mixed(cls, dim: int) -> "DensityOperator":
        return cls(np.eye(dim) / dim)


@dataclass(frozen=True)
class ProjectiveResolution:
    """Ordered family of mutually orthogonal projections summing to 1."""

    outcomes: tuple
    projections: tuple

    def __post_init__(self):
        outcomes = tuple(str(o) for o in self.outcomes)
        projs = tuple(as_operator(p) for p in self.projections)
        object.__setattr__(self, "outcomes", outcomes)
        object.__setattr__(self, "projections", projs)
        if len(outcomes) != len(projs):
            raise StructureError("one projection per outcome label is required")
        if len(set(outcomes)) != len(outcomes):
            raise StructureError(f"outcome labels must be unique, got {outcomes}")
        if not projs:
            raise StructureError("a resolution needs at least one outcome")
        d = projs[0].shape[0]
        for label, p in zip(outcomes, projs):
            if p.shape[0] != d:
                raise StructureError("all projections must share one dimension")
            if not is_hermitian(p, PROJ_ATOL):
                raise StateValidationError(f"projection {label!r} is not Hermitian")
            if max_abs(p @ p - p) > PROJ_ATOL:
                raise StateValidationError(f"projection {label!r} is not idempotent")
        for i in range(len(projs)):
            for j in range(i + 1, len(projs)):
                if max_abs(projs[i] @ projs[j]) > PROJ_ATOL:
                    raise StateValidationError(
                        f"projections {outcomes[i]!r} and {outcomes[j]!r} are not orthogonal"
                    )
        total = sum(projs)
        if max_abs(total - np.eye(d)) > PROJ_ATOL:
            raise StateValidationError("projections do not sum to the identity")

    @property
    def dim(self) -> int:
        return self.projections[0].shape[0]

    def projection(self, outcome) -> np.ndarray:
        outcome = str(outcome)
        try:
            idx = self.outcomes.index(outcome)
        except ValueError:
            raise ModelDomainError(f"unknown outcome label {outcome!r}") from None
        return self.projections[idx]

    @classmethod
    def from_basis(cls, basis: np.ndarray, grouping: Sequence[Sequence[int]],
                   labels: Sequence[str] | None = None) -> "ProjectiveResolution":
        """Resolution whose outcome subspaces are spans of columns of ``basis``."""
        basis = np.asarray(basis, dtype=complex)
        if labels is None:
            labels = [str(i) for i in range(len(grouping))]
        projs = []
        for idx in grouping:
            cols = basis[:, list(idx)]
            projs.append(cols @ dagger(cols))
        return cls(tuple(labels), tuple(projs))

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveResolution":
        return cls.from_basis(np.eye(dim), [[i] for i in range(dim)])


@dataclass(frozen=True)
class UnitaryEvolution:
    """Evolution ``U(t) = exp(-i H t)`` for a fixed Hermitian generator ``H``.

    ``U(t)`` is evaluated by eigendecomposition of the generator, so it is
    exact (no time stepping) for every real ``t`` and ``U(0)`` is the identity
    to machine precision.
    """

    generator: np.ndarray

    def __post_init__(self):
        h = as_operator(self.generator)
        object.__setattr__(self, "generator", h)
        if not is_hermitian(h, 1e-10):
            raise StateValidationError("evolution generator must be Hermitian")
        vals, vecs = np.linalg.eigh(h)
        vals.setflags(write=False)
        vecs.setflags(write=False)
        object.__setattr__(self, "_eigvals", vals)
        object.__setattr__(self, "_eigvecs", vecs)

    @property
    def dim(self) -> int:
        return self.generator.shape[0]

    def at(self, t: float) -> np.ndarray:
        """The unitary ``exp(-i H t)``."""
        phases = np.exp(-1j * self._eigvals * float(t))
        v = self._eigvecs
        return (v * phases) @ dagger(v)

    @classmethod
    def trivial(cls, dim: int) -> "UnitaryEvolution":
        return cls(np.zeros((dim, dim)))


@dataclass(frozen=True)
class SpecificQuantumModel:
    """Knob-indexed triple (state map, measurement map, evolution)."""

    states: Mapping[str, DensityOperator]
    measurements: Mapping[str, ProjectiveResolution]
    evolution: UnitaryEvolution

    def __post_init__(self):
        states = dict(self.states)
        meas = dict(self.measurements)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "measurements", meas)
        if not states or not meas:
            raise StructureError("a model needs at least one knob on each side")
        d = self.evolution.dim
        for a, rho in states.items():
            if rho.dim != d:
                raise StructureError(f"state at knob {a!r} has dim {rho.dim}, expected {d}")
        for b, res in meas.items():
            if res.dim != d:
                raise StructureError(f"resolution at knob {b!r} has dim {res.dim}, expected {d}")

    @property
    def dim(self) -> int:
        return self.evolution.dim

    @property
    def knobs_a(self) -> tuple:
        return tuple(self.states)

    @property
    def knobs_b(self) -> tuple:
        return tuple(self.measurements)

    def state(self, a) -> DensityOperator:
        try:
            return self.states[a]
        except KeyError:
            raise ModelDomainError(f"unknown state knob {a!r}") from None

    def measurement(self, b) -> ProjectiveResolution:
        try:
            return self.measurements[b]
        except KeyError:
            raise ModelDomainError(f"unknown measurement knob {b!r}") from None


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def evolved_state(model: SpecificQuantumModel, a, t: float) -> np.ndarray:
    u = model.evolution.at(t)
    rho = model.state(a).matrix
    return u @ rho @ dagger(u)


def probability(model: SpecificQuantumModel, a, b, t: float, outcome) -> float:
    """Outcome probability ``Tr[U(t) rho(a) U(t)^dag E(b)(outcome)]``.

    The raw trace must lie in ``[-1e-10, 1+1e-10]``; it is then clamped to
    ``[0, 1]``.
    """
    proj = model.measurement(b).projection(outcome)
    raw = float(np.trace(evolved_state(model, a, t) @ proj).real)
    if raw < -PROB_ATOL or raw > 1.0 + PROB_ATOL:
        raise StateValidationError(f"trace-rule value {raw} outside [-1e-10, 1+1e-10]")
    return min(1.0, max(0.0, raw))


def distribution(model: SpecificQuantumModel, a, b, t: float) -> dict:
    """All outcome probabilities for one (a, b, t); shares one evolved state."""
    res = model.measurement(b)
    rho_t = evolved_state(model, a, t)
    out = {}
    for label, proj in zip(res.outcomes, res.projections):
        raw = float(np.trace(rho_t @ proj).real)
        if raw < -PROB_ATOL or raw > 1.0 + PROB_ATOL:
            raise StateValidationError(f"trace-rule value {raw} outside [-1e-10, 1+1e-10]")
        out[label] = min(1.0, max(0.0, raw))
    return out


def overlap(rho1, rho2) -> float:
    """Unitary-invariant overlap ``Tr[rho1^(1/2) rho2^(1/2)]``.

    Accepts :class:`DensityOperator` or bare matrices; bare matrices are
    validated PSD within 1e-9.
    """
    m1 = rho1.matrix if isinstance(rho1, DensityOperator) else as_operator(rho1)
    m2 = rho2.matrix if isinstance(rho2, DensityOperator) else as_operator(rho2)
    if m1.shape != m2.shape:
        raise StructureError(f"overlap needs equal dimensions, got {m1.shape} vs {m2.shape}")
    val = float(np.trace(hermitian_sqrt(m1) @ hermitian_sqrt(m2)).real)
    return val


def operator_norm(a) -> float:
    """Spectral norm: the largest singular value."""
    return float(np.linalg.norm(as_operator(a), 2))


def restrict(model: SpecificQuantumModel, sub_a: Iterable, sub_b: Iterable) -> SpecificQuantumModel:
    """Restriction of the model to knob subsets; probabilities are unchanged
    on the retained domain (the same operators are reused)."""
    sub_a = tuple(sub_a)
    sub_b = tuple(sub_b)
    if not sub_a or not sub_b:
        raise ModelDomainError("restriction knob sets must be nonempty")
    missing_a = [a for a in sub_a if a not in model.states]
    missing_b = [b for b in sub_b if b not in model.measurements]
    if missing_a or missing_b:
        raise ModelDomainError(f"restriction knobs not in model: {missing_a + missing_b}")
    return SpecificQuantumModel(
        states={a: model.states[a] for a in sub_a},
        measurements={b: model.measurements[b] for b in sub_b},
        evolution=model.evolution,
    )


# ---------------------------------------------------------------------------
# Random instances (used by the verification suites and the CLI)
# ---------------------------------------------------------------------------

def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + dagger(g)) / 2


def random_density(dim: int, rng: np.random.Generator) -> DensityOperator:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    w = g @ dagger(g)
    return DensityOperator(w / np.trace(w).real)


def random_pure(dim: int, rng: np.random.Generator) -> DensityOperator:
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return DensityOperator.from_pure(v)


def random_partition(dim: int, rng: np.random.Generator,
                     n_outcomes: int | None = None) -> list:
    """Random composition of ``range(dim)`` into nonempty consecutive groups."""
    if n_outcomes is None:
        n_outcomes = int(rng.integers(2, dim + 1)) if dim > 1 else 1
    n_outcomes = min(n_outcomes, dim)
    if n_outcomes < 2 and dim > 1:
        n_outcomes = 2
    cuts = np.sort(rng.choice(np.arange(1, dim), size=n_outcomes - 1, replace=False))
    return [list(g) for g in np.split(np.arange(dim), cuts)]


def random_resolution(dim: int, rng: np.random.Generator,
                      n_outcomes: int | None = None) -> ProjectiveResolution:
    basis = random_unitary(dim, rng)
    grouping = random_partition(dim, rng, n_outcomes)
    return ProjectiveResolution.from_basis(basis, grouping)


def random_model(dim: int, rng: np.random.Generator,
                 n_a: int = 2, n_b: int = 2) -> SpecificQuantumModel:
    states = {f"a{i}": random_density(dim, rng) for i in range(n_a)}
    meas = {f"b{i}": random_resolution(dim, rng) for i in range(n_b)}
    return SpecificQuantumModel(states, meas, UnitaryEvolution(random_hermitian(dim, rng)))

"""Signal-probe exchange symmetry and entangled-detector equivalence.

A detector station couples an incoming signal factor to a probe factor with a
unitary interaction and then measures the probe alone.  When the outcome
probabilities are symmetric under interchanging which parameter labels the
signal and which labels the probe, the joint statistics of two stations
cannot tell an entangled signal pair read by plain probes from a plain signal
pair read by entangled probes; this module makes both facts executable.

Exchange symmetry is a property of the interaction, the measurement, and the
state family together, not of the interaction alone.  The reference
construction here is exact: the interaction is the half-swap rotation
``exp(i pi/4 * SWAP)`` conjugated by a shared local rotation, the probe
measurement is real, the parameter family is real, and the reference
parameter (the probe's preparation) lies inside one measurement subspace.
Arbitrary stations are supported as negative controls and are generically
asymmetric.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DegenerateStateError,
    StateValidationError,
    StructureError,
    SymmetryPreconditionError,
    UnsupportedCaseError,
)
from .qmodel import (
    ProjectiveResolution,
    as_operator,
    dagger,
    max_abs,
    random_partition,
    random_unitary,
)

UNITARY_ATOL = 1e-10
EXCHANGE_TOL = 1e-10
SWAP_EQUALITY_TOL = 1e-8
STATE_NORM_ATOL = 1e-12


@dataclass(frozen=True)
class LabeledState:
    """Unit vector tagged with its role and the preparation parameter q."""

    kind: str
    q: str
    vector: np.ndarray

    def __post_init__(self):
        if self.kind not in ("signal", "probe"):
            raise StructureError(f"kind must be 'signal' or 'probe', got {self.kind!r}")
        v = np.asarray(self.vector, dtype=complex).reshape(-1)
        v.setflags(write=False)
        object.__setattr__(self, "vector", v)
        if abs(np.linalg.norm(v) - 1.0) > STATE_NORM_ATOL:
            raise StateValidationError("labeled state must have unit norm within 1e-12")

    @property
    def dim(self) -> int:
        return len(self.vector)


@dataclass(frozen=True)
class DetectorStation:
    """Interaction on signal x probe plus a projective measurement of the
    probe factor (each measurement element acts as 1_signal x E(j))."""

    signal_dim: int
    probe_dim: int
    interaction: np.ndarray
    measurement: ProjectiveResolution

    def __post_init__(self):
        u = as_operator(self.interaction)
        object.__setattr__(self, "interaction", u)
        d = self.signal_dim * self.probe_dim
        if u.shape[0] != d:
            raise StructureError(
                f"interaction dim {u.shape[0]} != signal*probe = {d}")
        if max_abs(u @ dagger(u) - np.eye(d)) > UNITARY_ATOL:
            raise StateValidationError("interaction must be unitary within 1e-10")
        if self.measurement.dim != self.probe_dim:
            raise StructureError("measurement must act on the probe factor")

    @property
    def outcomes(self) -> tuple:
        return self.measurement.outcomes

    def embedded_projection(self, j) -> np.ndarray:
        return np.kron(np.eye(self.signal_dim), self.measurement.projection(j))


def amplitude(station: DetectorStation, s: LabeledState, p: LabeledState, j) -> np.ndarray:
    """Unnormalized post-measurement vector ``(1 x E(j)) U (s x p)``; its
    squared norm is the outcome probability."""
    if s.kind != "signal" or p.kind != "probe":
        raise StructureError("amplitude takes (signal, probe) in that order")
    if s.dim != station.signal_dim or p.dim != station.probe_dim:
        raise StructureError("state dimensions do not match the station factors")
    return station.embedded_projection(j) @ (station.interaction @ np.kron(s.vector, p.vector))


def outcome_probability(station: DetectorStation, s: LabeledState, p: LabeledState, j) -> float:
    a = amplitude(station, s, p, j)
    return float(np.vdot(a, a).real)


def outcome_probabilities(station: DetectorStation, s: LabeledState, p: LabeledState) -> dict:
    return {j: outcome_probability(station, s, p, j) for j in station.outcomes}


# ---------------------------------------------------------------------------
# Exchange symmetry
# ---------------------------------------------------------------------------

FamilyPairs = Sequence[tuple]


def family_states(family: Mapping[str, np.ndarray]) -> list:
    """(signal, probe) LabeledState pairs sharing one vector per parameter."""
    return [
        (LabeledState("signal", q, v), LabeledState("probe", q, v))
        for q, v in family.items()
    ]


@dataclass(frozen=True)
class ExchangeSymmetryResult:
    max_prob_deviation: float

    @property
    def symmetric(self) -> bool:
        return self.max_prob_deviation <= EXCHANGE_TOL


def check_exchange_symmetry(station: DetectorStation,
                            family: FamilyPairs) -> ExchangeSymmetryResult:
    """Max over (q, q', j) of |Pr(j | s(q), p(q')) - Pr(j | s(q'), p(q))|."""
    if station.signal_dim != station.probe_dim:
        raise UnsupportedCaseError(
            "exchange symmetry needs equal signal and probe dimensions")
    pairs = list(family)
    worst = 0.0
    for i, (s_i, p_i) in enumerate(pairs):
        for s_k, p_k in pairs[i + 1:]:
            for j in station.outcomes:
                forward = outcome_probability(station, s_i, p_k, j)
                swapped = outcome_probability(station, s_k, p_i, j)
                worst = max(worst, abs(forward - swapped))
    return ExchangeSymmetryResult(worst)


def amplitude_magnitude_ratio_deviation(station: DetectorStation,
                                        family: FamilyPairs,
                                        floor: float = 1e-6) -> float:
    """Max deviation from 1 of |Amp(q,q')| / |Amp(q',q)| where the
    denominator magnitude exceeds ``floor`` (the phase relation between
    exchanged amplitudes is only defined away from zeros)."""
    pairs = list(family)
    worst = 0.0
    for i, (s_i, p_i) in enumerate(pairs):
        for s_k, p_k in pairs[i + 1:]:
            for j in station.outcomes:
                n1 = np.linalg.norm(amplitude(station, s_i, p_k, j))
                n2 = np.linalg.norm(amplitude(station, s_k, p_i, j))
                if n2 > floor:
                    worst = max(worst, abs(n1 / n2 - 1.0))
    return worst


# ---------------------------------------------------------------------------
# Two stations
# ---------------------------------------------------------------------------

def _combined_state(signal_state: np.ndarray, probe_state: np.ndarray,
                    st_a: DetectorStation, st_b: DetectorStation) -> np.ndarray:
    """Reorder (sA x sB) x (pA x pB) into the station ordering
    (sA, pA, sB, pB) and normalize."""
    sig = np.asarray(signal_state, dtype=complex).reshape(st_a.signal_dim, st_b.signal_dim)
    prb = np.asarray(probe_state, dtype=complex).reshape(st_a.probe_dim, st_b.probe_dim)
    psi = np.einsum("ac,bd->abcd", sig, prb).reshape(
        st_a.signal_dim * st_a.probe_dim, st_b.signal_dim * st_b.probe_dim)
    norm = np.linalg.norm(psi)
    if norm < 1e-12:
        raise DegenerateStateError("combined state vanished; cannot normalize")
    return psi / norm


def joint_two_station_probability(st_a: DetectorStation, st_b: DetectorStation,
                                  signal_state, probe_state, j_a, j_b) -> float:
    """Probability of outcomes (j_a, j_b) when the (possibly entangled)
    signal pair and probe pair feed the two stations."""
    psi = _combined_state(signal_state, probe_state, st_a, st_b)
    phi = st_a.interaction @ psi @ st_b.interaction.T
    out = st_a.embedded_projection(j_a) @ phi @ st_b.embedded_projection(j_b).T
    return float(np.sum(np.abs(out) ** 2))


def joint_two_station_distribution(st_a: DetectorStation, st_b: DetectorStation,
                                   signal_state, probe_state) -> dict:
    return {
        (j_a, j_b): joint_two_station_probability(st_a, st_b, signal_state, probe_state,
                                                  j_a, j_b)
        for j_a in st_a.outcomes
        for j_b in st_b.outcomes
    }


@dataclass(frozen=True)
class SwapEqualityResult:
    max_deviation: float
    signal_side: dict
    probe_side: dict


def entanglement_swap_equality(st_a: DetectorStation, family_a: Mapping[str, np.ndarray],
                               st_b: DetectorStation, family_b: Mapping[str, np.ndarray],
                               q0: str, q1: str, q2: str, theta: float, *,
                               enforce_precondition: bool = True) -> SwapEqualityResult:
    """Compare outcome statistics of an entangled signal pair read through
    reference probes with a reference signal pair read through equally
    entangled probes.

    Both stations must pass :func:`check_exchange_symmetry` on the families
    (within 1e-10); the equality is only derived under that symmetry and the
    default is to raise :class:`SymmetryPreconditionError` without it.
    Negative-control runs pass ``enforce_precondition=False`` to measure how
    badly the equality fails for an asymmetric station.
    """
    if enforce_precondition:
        for station, family, name in ((st_a, family_a, "A"), (st_b, family_b, "B")):
            result = check_exchange_symmetry(station, family_states(family))
            if not result.symmetric:
                raise SymmetryPreconditionError(
                    f"station {name} exchange deviation "
                    f"{result.max_prob_deviation:.3e} > 1e-10")

    va0, va1, va2 = (np.asarray(family_a[q], dtype=complex) for q in (q0, q1, q2))
    vb0, vb1, vb2 = (np.asarray(family_b[q], dtype=complex) for q in (q0, q1, q2))
    phase = np.exp(1j * float(theta))

    entangled = np.kron(va1, vb2) + phase * np.kron(va2, vb1)
    reference = np.kron(va0, vb0)

    signal_side = joint_two_station_distribution(st_a, st_b, entangled, reference)
    probe_side = joint_two_station_distribution(st_a, st_b, reference, entangled)
    worst = max(abs(signal_side[key] - probe_side[key]) for key in signal_side)
    return SwapEqualityResult(worst, signal_side, probe_side)


# ---------------------------------------------------------------------------
# Station constructions
# ---------------------------------------------------------------------------

def swap_operator(dim: int) -> np.ndarray:
    s = np.zeros((dim * dim, dim * dim))
    for i in range(dim):
        for j in range(dim):
            s[j * dim + i, i * dim + j] = 1.0
    return s


def half_swap(dim: int) -> np.ndarray:
    """``exp(i pi/4 SWAP)``: the symmetric coupling at the balanced angle
    where exchange symmetry holds for real measurements and families."""
    s = swap_operator(dim)
    return np.cos(np.pi / 4) * np.eye(dim * dim) + 1j * np.sin(np.pi / 4) * s


def random_real_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def random_real_resolution(dim: int, rng: np.random.Generator) -> tuple:
    """Random real projective resolution; returns (resolution, basis)."""
    basis = random_real_orthogonal(dim, rng)
    grouping = random_partition(dim, rng)
    return ProjectiveResolution.from_basis(basis, grouping), basis


def random_symmetric_station(dim: int, rng: np.random.Generator) -> tuple:
    """Random station satisfying exchange symmetry exactly, with a parameter
    family for which the entangled-signal / entangled-probe equivalence holds.

    Construction: interaction ``(R x R)^T exp(i pi/4 SWAP) (R x R)`` with a
    random real rotation R; random real probe measurement; the reference
    parameter q0 is a measurement-basis vector (so the probe preparation sits
    inside one outcome subspace), q1 and q2 are arbitrary real unit vectors.

    Returns (station, family) with family labels q0, q1, q2.
    """
    rotation = random_real_orthogonal(dim, rng)
    local = np.kron(rotation, rotation)
    interaction = local.T @ half_swap(dim) @ local
    measurement, basis = random_real_resolution(dim, rng)
    v0 = basis[:, int(rng.integers(0, dim))].copy()
    v1 = rng.standard_normal(dim)
    v2 = rng.standard_normal(dim)
    v1 /= np.linalg.norm(v1)
    v2 /= np.linalg.norm(v2)
    station = DetectorStation(dim, dim, interaction, measurement)
    return station, {"q0": v0, "q1": v1, "q2": v2}


def random_station(dim: int, rng: np.random.Generator) -> tuple:
    """Arbitrary complex station: the generic, asymmetric negative control."""
    from .qmodel import random_resolution

    interaction = random_unitary(dim * dim, rng)
    measurement = random_resolution(dim, rng)
    family = {}
    for i in range(3):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        family[f"q{i}"] = v / np.linalg.norm(v)
    return DetectorStation(dim, dim, interaction, measurement), family

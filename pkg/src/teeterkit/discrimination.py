"""Monte-Carlo source discrimination through teetering statistics.

Two weak-light sources with the same mean intensity can still differ in how
often they leave the recording device teetering.  Each trial prepares the
probe pair at an offset ``c`` drawn from the source's preparation
distribution, waits ``T``, and reads the two fan-out detectors; the fraction
of disagreeing reads per waiting time is the discriminating statistic.

Trials are sampled from the exact quadrant masses of the joint density
(erf-reduced quadrature), so a run is a faithful draw from the model.  All
randomness flows through one counter-based generator keyed by the run seed;
identical (configuration, seed) reruns are bit-identical.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import special

from .errors import CalibrationError, NoDataError, StructureError
from .flipflop import DimensionlessParams, quadrant_probabilities_batch, widths

GH_POINTS = 61


@dataclass(frozen=True)
class SourceModel:
    """Source as a distribution over the preparation offset ``c``.

    ``sigma_c = 0`` is the steady source constant(c0); ``sigma_c > 0`` adds
    trial-to-trial Gaussian jitter of the offset, the model's single
    signal-coupled degree of freedom.
    """

    label: str
    b: float
    lam: float
    c0: float
    sigma_c: float = 0.0

    def __post_init__(self):
        if self.b <= 0:
            raise StructureError("b must be strictly positive")
        if self.sigma_c < 0:
            raise StructureError("sigma_c must be nonnegative")

    def with_offset(self, c0: float) -> "SourceModel":
        return SourceModel(self.label, self.b, self.lam, c0, self.sigma_c)


@dataclass(frozen=True)
class TrialRecord:
    source: str
    waiting_time: float
    c: float
    f1: int
    f2: int
    seed: int


@dataclass(frozen=True)
class TrialSet:
    """Array-backed batch of trials for one (source, waiting time) run."""

    source: str
    waiting_time: float
    seed: int
    c: np.ndarray
    f1: np.ndarray
    f2: np.ndarray

    def __post_init__(self):
        for name in ("c", "f1", "f2"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if not (len(self.c) == len(self.f1) == len(self.f2)):
            raise StructureError("trial arrays must have equal length")

    @property
    def n(self) -> int:
        return len(self.f1)

    def counts(self) -> "Counts":
        f1 = self.f1.astype(int)
        f2 = self.f2.astype(int)
        idx = 2 * f1 + f2
        binned = np.bincount(idx, minlength=4)
        return Counts(int(binned[0]), int(binned[1]), int(binned[2]), int(binned[3]))

    def to_records(self):
        return [
            TrialRecord(self.source, self.waiting_time, float(c), int(a), int(b), self.seed)
            for c, a, b in zip(self.c, self.f1, self.f2)
        ]


class Counts(NamedTuple):
    n00: int
    n01: int
    n10: int
    n11: int

    @property
    def total(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11


def run_trials(src: SourceModel, waiting_time: float, n: int, seed: int) -> TrialSet:
    """Sample ``n`` trials: draw c, compute the four quadrant masses of the
    joint density at the waiting time, draw the joint outcome.

    One Philox stream keyed by ``seed`` supplies first the n offset normals,
    then the n outcome uniforms, so the record stream is reproducible bit for
    bit and independent of any internal batching.
    """
    if n < 1:
        raise StructureError("n must be >= 1")
    rng = np.random.Generator(np.random.Philox(seed))
    normals = rng.standard_normal(n)
    c = src.c0 + src.sigma_c * normals
    if src.sigma_c == 0.0:
        p00, p01, p10, _ = quadrant_probabilities_batch(src.b, src.lam, waiting_time, [src.c0])
        cum1 = np.full(n, p00[0])
        cum2 = np.full(n, p00[0] + p01[0])
        cum3 = np.full(n, p00[0] + p01[0] + p10[0])
        c = np.full(n, src.c0)
    else:
        p00, p01, p10, _ = quadrant_probabilities_batch(src.b, src.lam, waiting_time, c)
        cum1 = p00
        cum2 = p00 + p01
        cum3 = cum2 + p10
    u = rng.random(n)
    idx = (u >= cum1).astype(np.uint8) + (u >= cum2) + (u >= cum3)
    f1 = (idx >= 2).astype(np.uint8)
    f2 = (idx % 2).astype(np.uint8)
    return TrialSet(src.label, float(waiting_time), int(seed), c, f1, f2)


def write_trials_csv(trial_sets: Sequence[TrialSet], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["source", "T", "c", "f1", "f2", "seed"])
        for ts in trial_sets:
            for c, a, b in zip(ts.c, ts.f1, ts.f2):
                writer.writerow([ts.source, repr(ts.waiting_time), repr(float(c)),
                                 int(a), int(b), ts.seed])


# ---------------------------------------------------------------------------
# Frequency bookkeeping
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrequencyTable:
    """Outcome counts per (source, waiting time) bin."""

    bins: dict

    @classmethod
    def from_trial_sets(cls, trial_sets: Sequence[TrialSet]) -> "FrequencyTable":
        bins: dict = {}
        for ts in trial_sets:
            key = (ts.source, ts.waiting_time)
            counts = ts.counts()
            if key in bins:
                prev = bins[key]
                counts = Counts(*(a + b for a, b in zip(prev, counts)))
            bins[key] = counts
        return cls(bins)

    def counts(self, source: str, waiting_time: float) -> Counts:
        key = (source, float(waiting_time))
        if key not in self.bins or self.bins[key].total == 0:
            raise NoDataError(f"no trials recorded for {key}")
        return self.bins[key]

    def nu(self, source: str, waiting_time: float) -> float:
        """Disagreement fraction (n01 + n10) / total for one bin."""
        c = self.counts(source, waiting_time)
        return (c.n01 + c.n10) / c.total

    def outcome_fractions(self, source: str, waiting_time: float) -> dict:
        c = self.counts(source, waiting_time)
        return {"00": c.n00 / c.total, "01": c.n01 / c.total,
                "10": c.n10 / c.total, "11": c.n11 / c.total}

    def mean_intensity(self, source: str) -> float:
        """Fraction of trials with F1 = 1, pooled over waiting times.

        F1 is the reported detector by convention; either fixed choice works
        and this one is the simplest.
        """
        ones = 0
        total = 0
        for (src, _), c in self.bins.items():
            if src == source:
                ones += c.n10 + c.n11
                total += c.total
        if total == 0:
            raise NoDataError(f"no trials recorded for source {source!r}")
        return ones / total


# ---------------------------------------------------------------------------
# Quadrature-averaged oracles
# ---------------------------------------------------------------------------

def _gh_rule():
    nodes, weights = np.polynomial.hermite.hermgauss(GH_POINTS)
    return nodes, weights / math.sqrt(math.pi)


def expected_disagreement(src: SourceModel, waiting_time: float) -> float:
    """Disagreement probability averaged over the source's offset
    distribution (Gauss-Hermite over c, erf-reduced quadrature per c)."""
    if src.sigma_c == 0.0:
        _, p01, p10, _ = quadrant_probabilities_batch(src.b, src.lam, waiting_time, [src.c0])
        return float(p01[0] + p10[0])
    nodes, weights = _gh_rule()
    c = src.c0 + math.sqrt(2.0) * src.sigma_c * nodes
    _, p01, p10, _ = quadrant_probabilities_batch(src.b, src.lam, waiting_time, c)
    return float(np.dot(weights, p01 + p10))


def _intensity_given_offset(b: float, lam: float, t: float, c) -> np.ndarray:
    """Pr(F1 = 1 | c): the x-marginal is Gaussian with mean c cosh t and
    variance (B1^2 + B2^2)/4."""
    b1_sq, b2_sq = widths(DimensionlessParams(b=b, c=0.0, lam=lam), t)
    sigma_x = math.sqrt((b1_sq + b2_sq) / 4.0)
    z = np.asarray(c, dtype=float) * math.cosh(t) / (sigma_x * math.sqrt(2.0))
    return 0.5 * special.erfc(-z)


def expected_intensity(src: SourceModel, waiting_time: float) -> float:
    if src.sigma_c == 0.0:
        return float(_intensity_given_offset(src.b, src.lam, waiting_time, src.c0))
    nodes, weights = _gh_rule()
    c = src.c0 + math.sqrt(2.0) * src.sigma_c * nodes
    return float(np.dot(weights, _intensity_given_offset(src.b, src.lam, waiting_time, c)))


def pooled_intensity(src: SourceModel, times: Sequence[float]) -> float:
    return float(np.mean([expected_intensity(src, t) for t in times]))


def calibrate_offset(src: SourceModel, target_intensity: float,
                     times: Sequence[float], *, tol: float = 0.002,
                     max_steps: int = 60) -> tuple:
    """Adjust the source's center offset by bisection until its pooled mean
    intensity matches ``target_intensity`` within ``tol``.

    Returns (calibrated source, trace of (c0, intensity) pairs).  Intensity
    is strictly increasing in c0, so a sign-changing bracket always exists.
    """
    trace = []

    def gap(c0: float) -> float:
        value = pooled_intensity(src.with_offset(c0), times)
        trace.append((c0, value))
        return value - target_intensity

    g0 = gap(src.c0)
    if abs(g0) <= tol:
        return src, trace

    span = 1.0 + abs(src.c0)
    lo, hi = src.c0 - span, src.c0 + span
    for _ in range(40):
        if gap(lo) < 0:
            break
        lo -= span
        span *= 2
    span = 1.0 + abs(src.c0)
    for _ in range(40):
        if gap(hi) > 0:
            break
        hi += span
        span *= 2

    for _ in range(max_steps):
        mid = 0.5 * (lo + hi)
        g = gap(mid)
        if abs(g) <= tol:
            return src.with_offset(mid), trace
        if g < 0:
            lo = mid
        else:
            hi = mid
    raise CalibrationError(
        f"calibration did not reach |intensity gap| <= {tol} in {max_steps} bisection steps",
        trace,
    )


# ---------------------------------------------------------------------------
# Discrimination protocol
# ---------------------------------------------------------------------------

def two_proportion_z(k_a: int, n_a: int, k_b: int, n_b: int) -> float:
    pa = k_a / n_a
    pb = k_b / n_b
    pooled = (k_a + k_b) / (n_a + n_b)
    var = pooled * (1.0 - pooled) * (1.0 / n_a + 1.0 / n_b)
    if var == 0.0:
        return 0.0
    return (pa - pb) / math.sqrt(var)


@dataclass(frozen=True)
class WaitingTimeRow:
    waiting_time: float
    nu_a: float
    nu_b: float
    difference: float
    z: float
    oracle_nu_a: float
    oracle_nu_b: float
    n: int


@dataclass(frozen=True)
class DiscriminationReport:
    source_a: str
    source_b: str
    calibrated_c0_b: float
    intensity_a: float
    intensity_b: float
    rows: tuple
    headline_z: float
    trials_per_run: int
    seed: int

    def to_dict(self) -> dict:
        return {
            "sourceA": self.source_a,
            "sourceB": self.source_b,
            "calibratedC0B": self.calibrated_c0_b,
            "meanIntensityA": self.intensity_a,
            "meanIntensityB": self.intensity_b,
            "trialsPerRun": self.trials_per_run,
            "seed": self.seed,
            "headlineZ": self.headline_z,
            "perWaitingTime": [
                {
                    "T": r.waiting_time,
                    "nuA": r.nu_a,
                    "nuB": r.nu_b,
                    "difference": r.difference,
                    "z": r.z,
                    "oracleNuA": r.oracle_nu_a,
                    "oracleNuB": r.oracle_nu_b,
                    "n": r.n,
                }
                for r in self.rows
            ],
        }


def discriminate(src_a: SourceModel, src_b: SourceModel, times: Sequence[float],
                 n: int, seed: int, *, calibration_tol: float = 0.002):
    """Run the two-source protocol: calibrate B's offset to A's mean
    intensity, run disjoint-seeded trials per waiting time, and report
    disagreement fractions with two-proportion z statistics.

    Returns (report, trial_sets, frequency_table).
    """
    if src_a.label == src_b.label:
        raise StructureError("sources need distinct labels")
    times = [float(t) for t in times]
    target = pooled_intensity(src_a, times)
    src_b, _ = calibrate_offset(src_b, target, times, tol=calibration_tol)

    child_seeds = np.random.SeedSequence(seed).generate_state(2 * len(times), dtype=np.uint64)
    trial_sets = []
    rows = []
    for i, t in enumerate(times):
        set_a = run_trials(src_a, t, n, int(child_seeds[2 * i]))
        set_b = run_trials(src_b, t, n, int(child_seeds[2 * i + 1]))
        trial_sets += [set_a, set_b]
        ca = set_a.counts()
        cb = set_b.counts()
        ka = ca.n01 + ca.n10
        kb = cb.n01 + cb.n10
        rows.append(WaitingTimeRow(
            waiting_time=t,
            nu_a=ka / ca.total,
            nu_b=kb / cb.total,
            difference=ka / ca.total - kb / cb.total,
            z=two_proportion_z(ka, ca.total, kb, cb.total),
            oracle_nu_a=expected_disagreement(src_a, t),
            oracle_nu_b=expected_disagreement(src_b, t),
            n=n,
        ))
    table = FrequencyTable.from_trial_sets(trial_sets)
    report = DiscriminationReport(
        source_a=src_a.label,
        source_b=src_b.label,
        calibrated_c0_b=src_b.c0,
        intensity_a=table.mean_intensity(src_a.label),
        intensity_b=table.mean_intensity(src_b.label),
        rows=tuple(rows),
        headline_z=max(abs(r.z) for r in rows),
        trials_per_run=n,
        seed=seed,
    )
    return report, trial_sets, table

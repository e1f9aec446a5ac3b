"""Randomized verification suites behind the ``verify`` subcommand.

Each suite draws seeded random models, runs one bound check or construction,
and reports per-sample margins; a failure is any sample whose margin violates
the suite's tolerance.  Reports are plain dicts ready for JSON persistence.
"""

from __future__ import annotations

import numpy as np

from .propositions import (
    prop1_bound,
    prop2_construct,
    prop3_bound,
    prop4_construct,
    reduction_theorem_check,
)
from .qmodel import (
    SpecificQuantumModel,
    distribution,
    operator_norm,
    overlap,
    random_density,
    random_model,
    random_resolution,
)
from .symmetry import (
    check_exchange_symmetry,
    entanglement_swap_equality,
    family_states,
    random_station,
    random_symmetric_station,
)

SWEEP_TIMES = (0.0, 0.7, 2.0)
SUITES = ("prop1", "prop2", "prop3", "prop4", "reduction", "entangle-swap")


def probability_table_deviation(m1: SpecificQuantumModel, m2: SpecificQuantumModel,
                                times=SWEEP_TIMES) -> float:
    """Sup-norm difference of the two models' full probability tables."""
    worst = 0.0
    for a in m1.knobs_a:
        for b in m1.knobs_b:
            for t in times:
                d1 = distribution(m1, a, b, t)
                d2 = distribution(m2, a, b, t)
                for omega in d1:
                    worst = max(worst, abs(d1[omega] - d2[omega]))
    return worst


def _sample_dims(i: int) -> int:
    return 2 + (i % 3)


def run_prop1(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = np.inf
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        model = random_model(_sample_dims(i), rng, n_a=3, n_b=2)
        sweep = [(b, t) for b in model.knobs_b for t in SWEEP_TIMES]
        res = prop1_bound(model, "a0", "a1", sweep)
        failures += not res.holds
        worst = min(worst, res.margin)
        per_sample.append({"sample": i, "seed": seed + i, "dim": model.dim,
                           "margin": res.margin, "holds": res.holds})
    return {"proposition": "prop1", "samples": samples, "failures": failures,
            "worstMargin": float(worst), "perSample": per_sample}


def run_prop2(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = 0.0
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        model = random_model(_sample_dims(i), rng, n_a=3, n_b=2)
        beta = prop2_construct(model, "a0", "a1")
        before = overlap(model.state("a0"), model.state("a1"))
        after = overlap(beta.state("a0"), beta.state("a1"))
        table_dev = probability_table_deviation(model, beta)
        margin = max(table_dev, after)
        failures += margin > 1e-10
        worst = max(worst, margin)
        per_sample.append({"sample": i, "seed": seed + i, "dim": model.dim,
                           "overlap_before": before, "overlap_after": after,
                           "tableDeviation": table_dev, "margin": margin})
    return {"proposition": "prop2", "samples": samples, "failures": failures,
            "worstMargin": float(worst), "perSample": per_sample}


def run_prop3(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = np.inf
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        model = random_model(_sample_dims(i), rng, n_a=2, n_b=3)
        sweep = [(a, t) for a in model.knobs_a for t in SWEEP_TIMES]
        res = prop3_bound(model, "b0", "b1", "0", sweep)
        failures += not res.holds
        worst = min(worst, res.margin)
        per_sample.append({"sample": i, "seed": seed + i, "dim": model.dim,
                           "margin": res.margin, "holds": res.holds})
    return {"proposition": "prop3", "samples": samples, "failures": failures,
            "worstMargin": float(worst), "perSample": per_sample}


def run_prop4(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = 0.0
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        model = random_model(_sample_dims(i), rng, n_a=2, n_b=2)
        beta = prop4_construct(model, "b0", "b1", "0")
        norm_diff = operator_norm(
            beta.measurement("b0").projection("0") - beta.measurement("b1").projection("0"))
        table_dev = probability_table_deviation(model, beta)
        margin = max(table_dev, abs(norm_diff - 1.0))
        failures += margin > 1e-10
        worst = max(worst, margin)
        per_sample.append({"sample": i, "seed": seed + i, "dim": model.dim,
                           "normDiff": norm_diff, "tableDeviation": table_dev,
                           "margin": margin})
    return {"proposition": "prop4", "samples": samples, "failures": failures,
            "worstMargin": float(worst), "perSample": per_sample}


def run_reduction(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = 0.0
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        dim_a, dim_b = (2, 2) if i % 2 == 0 else (2, 3)
        rho = random_density(dim_a * dim_b, rng)
        res_a = random_resolution(dim_a, rng)
        res_b = random_resolution(dim_b, rng)
        res = reduction_theorem_check(rho, res_a, res_b)
        failures += res.max_deviation > 1e-9
        worst = max(worst, res.max_deviation)
        per_sample.append({"sample": i, "seed": seed + i,
                           "dims": [dim_a, dim_b],
                           "margin": res.max_deviation,
                           "skipped": list(res.skipped_outcomes)})
    return {"proposition": "reduction", "samples": samples, "failures": failures,
            "worstMargin": float(worst), "perSample": per_sample}


def run_entangle_swap(samples: int, seed: int) -> dict:
    per_sample = []
    failures = 0
    worst = 0.0
    thetas = (0.0, np.pi / 2, np.pi)
    for i in range(samples):
        rng = np.random.default_rng(seed + i)
        dim = 2 + (i % 2)
        st_a, fam_a = random_symmetric_station(dim, rng)
        st_b, fam_b = random_symmetric_station(dim, rng)
        theta = thetas[i % 3] if i % 2 == 0 else float(rng.uniform(0, 2 * np.pi))
        res = entanglement_swap_equality(st_a, fam_a, st_b, fam_b,
                                         "q0", "q1", "q2", theta)
        failures += res.max_deviation > 1e-8
        worst = max(worst, res.max_deviation)
        per_sample.append({"sample": i, "seed": seed + i, "dim": dim,
                           "theta": theta, "margin": res.max_deviation})

    # Generic stations are asymmetric: the suite records a negative control,
    # both the exchange deviation itself and how badly the entangled-signal /
    # entangled-probe equality fails once the precondition is dropped.
    rng = np.random.default_rng(seed + samples)
    st, fam = random_station(2, rng)
    control_exchange = check_exchange_symmetry(st, family_states(fam)).max_prob_deviation
    st_sym, fam_sym = random_symmetric_station(2, rng)
    control_swap = entanglement_swap_equality(
        st, fam, st_sym, fam_sym, "q0", "q1", "q2", np.pi / 2,
        enforce_precondition=False).max_deviation
    control_ok = control_exchange > 1e-3 and control_swap > 1e-3
    failures += not control_ok
    return {"proposition": "entangle-swap", "samples": samples, "failures": failures,
            "worstMargin": float(worst),
            "negativeControlExchangeDeviation": float(control_exchange),
            "negativeControlSwapDeviation": float(control_swap),
            "negativeControlAsymmetric": bool(control_ok),
            "perSample": per_sample}


_RUNNERS = {
    "prop1": run_prop1,
    "prop2": run_prop2,
    "prop3": run_prop3,
    "prop4": run_prop4,
    "reduction": run_reduction,
    "entangle-swap": run_entangle_swap,
}


def run_suite(name: str, samples: int, seed: int) -> list:
    """Run one named suite, or all of them; returns a list of report dicts."""
    if name == "all":
        return [_RUNNERS[s](samples, seed) for s in SUITES]
    if name not in _RUNNERS:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITES + ('all',)}")
    return [_RUNNERS[name](samples, seed)]

import numpy as np
import pytest

from teeterkit.errors import (
    DegenerateStateError,
    StructureError,
    SymmetryPreconditionError,
    UnsupportedCaseError,
)
from teeterkit.qmodel import ProjectiveResolution, random_unitary
from teeterkit.symmetry import (
    DetectorStation,
    LabeledState,
    amplitude,
    amplitude_magnitude_ratio_deviation,
    check_exchange_symmetry,
    entanglement_swap_equality,
    family_states,
    half_swap,
    joint_two_station_distribution,
    joint_two_station_probability,
    outcome_probabilities,
    outcome_probability,
    random_station,
    random_symmetric_station,
    swap_operator,
)

from conftest import KET0, KET1

Z_MEAS = ProjectiveResolution(("0", "1"), (np.diag([1.0, 0.0]), np.diag([0.0, 1.0])))


def trivial_station(dim=2, meas=Z_MEAS):
    return DetectorStation(dim, dim, np.eye(dim * dim), meas)


def signal(v, q="q"):
    return LabeledState("signal", q, v)


def probe(v, q="q"):
    return LabeledState("probe", q, v)


# ---------------------------------------------------------------------------
# Amplitudes
# ---------------------------------------------------------------------------

def test_amplitude_identity_interaction():
    st = trivial_station()
    s = signal(np.array([0.6, 0.8]))
    amp = amplitude(st, s, probe(KET0), "0")
    assert np.allclose(amp, np.kron(s.vector, KET0))
    assert outcome_probability(st, s, probe(KET0), "0") == pytest.approx(1.0, abs=1e-12)


def test_amplitude_swap_interaction_moves_signal_into_probe():
    st = DetectorStation(2, 2, swap_operator(2), Z_MEAS)
    assert outcome_probability(st, signal(KET1), probe(KET0), "0") == pytest.approx(0.0, abs=1e-14)
    assert outcome_probability(st, signal(KET1), probe(KET0), "1") == pytest.approx(1.0, abs=1e-14)


def test_amplitude_kind_and_dimension_checks():
    st = trivial_station()
    with pytest.raises(StructureError):
        amplitude(st, probe(KET0), probe(KET0), "0")
    with pytest.raises(StructureError):
        amplitude(st, signal(np.array([1.0, 0, 0]) ), probe(KET0), "0")


def test_outcome_probabilities_complete_for_random_station():
    st, fam = random_station(2, np.random.default_rng(13))
    total = sum(outcome_probabilities(st, signal(fam["q0"]), probe(fam["q1"])).values())
    assert total == pytest.approx(1.0, abs=1e-10)


def test_labeled_state_validation():
    with pytest.raises(StructureError):
        LabeledState("laser", "q", KET0)
    with pytest.raises(Exception):
        LabeledState("signal", "q", np.array([1.0, 1.0]))  # not unit norm


# ---------------------------------------------------------------------------
# Exchange symmetry
# ---------------------------------------------------------------------------

def test_symmetric_construction_passes_exchange_check():
    for dim in (2, 3):
        st, fam = random_symmetric_station(dim, np.random.default_rng(100 + dim))
        result = check_exchange_symmetry(st, family_states(fam))
        assert result.max_prob_deviation <= 1e-10
        assert result.symmetric


def test_exchange_check_repeated_parameter_contributes_nothing():
    st, fam = random_symmetric_station(2, np.random.default_rng(3))
    doubled = {**fam, "q0bis": fam["q0"]}
    result = check_exchange_symmetry(st, family_states(doubled))
    assert result.max_prob_deviation <= 1e-10


def test_generic_station_fails_exchange_check():
    st, fam = random_station(2, np.random.default_rng(21))
    result = check_exchange_symmetry(st, family_states(fam))
    assert result.max_prob_deviation > 0.01


def test_exchange_check_needs_equal_factors():
    meas3 = ProjectiveResolution.computational(3)
    st = DetectorStation(2, 3, np.eye(6), meas3)
    family = [(LabeledState("signal", "q", KET0), LabeledState("probe", "q", np.eye(3)[0]))]
    with pytest.raises(UnsupportedCaseError):
        check_exchange_symmetry(st, family)


def test_exchanged_amplitudes_have_equal_magnitudes_when_symmetric():
    st, fam = random_symmetric_station(3, np.random.default_rng(8))
    assert amplitude_magnitude_ratio_deviation(st, family_states(fam)) <= 1e-8


# ---------------------------------------------------------------------------
# Two stations
# ---------------------------------------------------------------------------

def test_unentangled_inputs_factorize():
    rng = np.random.default_rng(17)
    st_a, fam_a = random_symmetric_station(2, rng)
    st_b, fam_b = random_symmetric_station(2, rng)
    sig = np.kron(fam_a["q1"], fam_b["q2"])
    prb = np.kron(fam_a["q0"], fam_b["q0"])
    for j_a in st_a.outcomes:
        for j_b in st_b.outcomes:
            joint = joint_two_station_probability(st_a, st_b, sig, prb, j_a, j_b)
            single = (outcome_probability(st_a, signal(fam_a["q1"]), probe(fam_a["q0"]), j_a)
                      * outcome_probability(st_b, signal(fam_b["q2"]), probe(fam_b["q0"]), j_b))
            assert joint == pytest.approx(single, abs=1e-10)


def test_joint_distribution_completeness_and_phase_periodicity():
    rng = np.random.default_rng(29)
    st_a, fam_a = random_symmetric_station(2, rng)
    st_b, fam_b = random_symmetric_station(2, rng)
    theta = 1.1
    for shift in (0.0, 2 * np.pi):
        sig = np.kron(fam_a["q1"], fam_b["q2"]) \
            + np.exp(1j * (theta + shift)) * np.kron(fam_a["q2"], fam_b["q1"])
        prb = np.kron(fam_a["q0"], fam_b["q0"])
        dist = joint_two_station_distribution(st_a, st_b, sig, prb)
        assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)
        if shift == 0.0:
            base = dist
    assert all(abs(base[k] - dist[k]) <= 1e-12 for k in base)


def _dense_two_station_oracle(st_a, st_b, sig, prb, j_a, j_b):
    # brute-force construction on the full product space, ordered
    # (signal A, probe A, signal B, probe B)
    da_s, da_p = st_a.signal_dim, st_a.probe_dim
    db_s, db_p = st_b.signal_dim, st_b.probe_dim
    psi = np.zeros(da_s * da_p * db_s * db_p, dtype=complex)
    sig = sig.reshape(da_s, db_s)
    prb = prb.reshape(da_p, db_p)
    for i in range(da_s):
        for j in range(da_p):
            for k in range(db_s):
                for l in range(db_p):
                    idx = ((i * da_p + j) * db_s + k) * db_p + l
                    psi[idx] = sig[i, k] * prb[j, l]
    psi = psi / np.linalg.norm(psi)
    big_u = np.kron(st_a.interaction, st_b.interaction)
    proj = np.kron(st_a.embedded_projection(j_a), st_b.embedded_projection(j_b))
    out = proj @ (big_u @ psi)
    return float(np.vdot(out, out).real)


def test_joint_probability_matches_dense_tensor_oracle():
    rng = np.random.default_rng(17)
    st_a, fam_a = random_symmetric_station(2, rng)
    st_b, fam_b = random_symmetric_station(2, rng)
    sig = np.kron(fam_a["q1"], fam_b["q2"]) + np.exp(0.7j) * np.kron(fam_a["q2"], fam_b["q1"])
    prb = np.kron(fam_a["q0"], fam_b["q0"]).astype(complex)
    for j_a in st_a.outcomes:
        for j_b in st_b.outcomes:
            got = joint_two_station_probability(st_a, st_b, sig, prb, j_a, j_b)
            want = _dense_two_station_oracle(st_a, st_b, sig, prb, j_a, j_b)
            assert got == pytest.approx(want, abs=1e-10)


def test_degenerate_superposition_rejected():
    rng = np.random.default_rng(5)
    st_a, fam_a = random_symmetric_station(2, rng)
    st_b, fam_b = random_symmetric_station(2, rng)
    sig = np.kron(fam_a["q1"], fam_b["q1"]) - np.kron(fam_a["q1"], fam_b["q1"])
    prb = np.kron(fam_a["q0"], fam_b["q0"])
    with pytest.raises(DegenerateStateError):
        joint_two_station_probability(st_a, st_b, sig, prb, "0", "0")


# ---------------------------------------------------------------------------
# Entangled signals versus entangled probes
# ---------------------------------------------------------------------------

def test_swap_equality_for_symmetric_stations():
    rng = np.random.default_rng(29)
    for dim in (2, 3):
        st_a, fam_a = random_symmetric_station(dim, rng)
        st_b, fam_b = random_symmetric_station(dim, rng)
        for theta in (0.0, np.pi / 2, np.pi):
            res = entanglement_swap_equality(st_a, fam_a, st_b, fam_b,
                                             "q0", "q1", "q2", theta)
            assert res.max_deviation <= 1e-8
            assert sum(res.signal_side.values()) == pytest.approx(1.0, abs=1e-10)


def test_swap_equality_degenerate_parameters_trivially_equal():
    rng = np.random.default_rng(41)
    st_a, fam_a = random_symmetric_station(2, rng)
    st_b, fam_b = random_symmetric_station(2, rng)
    res = entanglement_swap_equality(st_a, fam_a, st_b, fam_b,
                                     "q0", "q1", "q1", np.pi / 2)
    assert res.max_deviation <= 1e-12


def test_swap_equality_negative_control():
    rng = np.random.default_rng(21)
    st_bad, fam_bad = random_station(2, rng)
    st_sym, fam_sym = random_symmetric_station(2, rng)
    with pytest.raises(SymmetryPreconditionError):
        entanglement_swap_equality(st_bad, fam_bad, st_sym, fam_sym,
                                   "q0", "q1", "q2", np.pi / 2)
    res = entanglement_swap_equality(st_bad, fam_bad, st_sym, fam_sym,
                                     "q0", "q1", "q2", np.pi / 2,
                                     enforce_precondition=False)
    assert res.max_deviation > 1e-3


def test_station_validation():
    with pytest.raises(Exception):
        DetectorStation(2, 2, np.eye(4) * 1.5, Z_MEAS)  # not unitary
    with pytest.raises(StructureError):
        DetectorStation(2, 2, np.eye(4), ProjectiveResolution.computational(3))


def test_half_swap_is_unitary_and_swap_symmetric():
    for dim in (2, 3):
        u = half_swap(dim)
        s = swap_operator(dim)
        assert np.max(np.abs(u @ u.conj().T - np.eye(dim * dim))) <= 1e-12
        assert np.max(np.abs(s @ u @ s - u)) <= 1e-12


def test_many_random_symmetric_stations_hold_equality():
    rng = np.random.default_rng(0)
    worst = 0.0
    for i in range(25):
        dim = 2 + (i % 2)
        st_a, fam_a = random_symmetric_station(dim, rng)
        st_b, fam_b = random_symmetric_station(dim, rng)
        theta = float(rng.uniform(0, 2 * np.pi))
        res = entanglement_swap_equality(st_a, fam_a, st_b, fam_b,
                                         "q0", "q1", "q2", theta)
        worst = max(worst, res.max_deviation)
    assert worst <= 1e-8

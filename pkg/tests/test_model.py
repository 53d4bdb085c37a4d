import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import brentq

from boltzbound import model as M

# closed-form polynomials in m, lowest power first
CORRECTED = {
    1: [0],
    2: [1, 0, -1],
    3: [0, -2, 0, 2],
    4: [-2, 0, 8, 0, -6],
    5: [0, 16, 0, -40, 0, 24],
    6: [16, 0, -136, 0, 240, 0, -120],
    7: [0, -272, 0, 1232, 0, -1680, 0, 720],
}
RAW = {
    2: [1, 0, -1],
    3: [0, -2, 0, 2],
    4: [1, 0, 2, 0, -3],
    5: [0, -4, 0, 0, 0, 4],
    6: [1, 0, 9, 0, -5, 0, -5],
    7: [0, -6, 0, -14, 0, 14, 0, 6],
}


def set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1 :]


def cumulant_from_moments(M_raw, c):
    # inverse of the moment expansion over set partitions
    total = 0.0
    for part in set_partitions(list(range(c))):
        k = len(part)
        term = (-1) ** (k - 1) * math.factorial(k - 1)
        for block in part:
            term *= M_raw[len(block)]
        total += term
    return total


def exact_poly(p, m):
    # rational evaluation, so the reference carries no rounding of its own
    x = Fraction(float(m))
    return float(sum(Fraction(a) * x**k for k, a in enumerate(p)))


def brute_log_z(bm):
    vals = [bm.energy(np.array(s)) for s in itertools.product([-1, 1], repeat=bm.N)]
    return float(np.log(np.sum(np.exp(vals))))


def test_table_polynomials():
    rng = np.random.default_rng(0)
    for m in rng.uniform(-1, 1, 100):
        K = M.corrected_moments(m, 7)
        raw = M.raw_centered_moments(m, 7)
        assert K[0] == 0.0
        for c, p in CORRECTED.items():
            if c > 1:
                assert K[c - 1] == pytest.approx(exact_poly(p, m), rel=1e-12, abs=0)
        for c, p in RAW.items():
            assert raw[c] == pytest.approx(exact_poly(p, m), rel=1e-12, abs=0)


def test_corrected_moments_are_cumulants():
    # independent route through set partitions (Bell(9) = 21147 terms)
    for m in (-0.6, 0.1, 0.45):
        raw = M.raw_centered_moments(m, 9)
        K = M.corrected_moments(m, 9)
        for c in (8, 9):
            ref = cumulant_from_moments(raw, c)
            assert K[c - 1] == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_corrected_moments_at_zero_magnetization():
    K = M.corrected_moments(0.0, 6)
    np.testing.assert_allclose(K, [0, 1, 0, -2, 0, 16], atol=1e-15)


def test_corrected_moments_reject_saturated_units():
    with pytest.raises(M.InvalidMagnetizationError):
        M.corrected_moments(1.0, 4)
    with pytest.raises(M.InvalidMagnetizationError):
        M.corrected_moments(math.nan, 4)


def test_sk_variances():
    bm = M.sk_random(400, 1.5, 0.2, seed=1)
    w = bm.upper_triangle()
    assert np.std(w) * math.sqrt(400) == pytest.approx(1.5, rel=0.02)
    assert np.std(bm.thresholds) == pytest.approx(0.2, rel=0.15)
    assert np.all(np.diag(bm.weights) == 0)
    assert np.array_equal(bm.weights, bm.weights.T)


def test_sk_reproducible():
    a = M.sk_random(10, 1.0, 0.2, seed=42)
    b = M.sk_random(10, 1.0, 0.2, seed=42)
    assert np.array_equal(a.weights, b.weights)
    assert np.array_equal(a.thresholds, b.thresholds)


def test_machine_validation():
    with pytest.raises(ValueError):
        M.BoltzmannMachine(np.array([[0.0, 1.0], [2.0, 0.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        M.BoltzmannMachine(np.array([[1.0, 0.0], [0.0, 0.0]]), np.zeros(2))
    with pytest.raises(ValueError):
        M.BoltzmannMachine(np.zeros((3, 3)), np.zeros(2))


def test_mean_field_two_units():
    # symmetric pair with w = 2, theta = 0: h* = 2 tanh h*, nonzero branch
    bm = M.BoltzmannMachine(np.array([[0.0, 2.0], [2.0, 0.0]]), np.zeros(2))
    st = M.solve_mean_field(bm)
    root = brentq(lambda h: h - 2 * math.tanh(h), 0.5, 5.0)
    assert st.converged
    np.testing.assert_allclose(np.abs(st.h), [root, root], rtol=1e-10)
    assert st.residual <= 1e-12
    zero = M.solve_mean_field(bm, init="zero")
    assert np.all(zero.h == 0) and zero.converged


def test_mean_field_with_thresholds():
    bm = M.sk_random(12, 0.5, 0.3, seed=3)
    st = M.solve_mean_field(bm)
    assert st.converged
    assert M.mean_field_residual(bm, st.h) <= 1e-12
    np.testing.assert_allclose(st.m, np.tanh(st.h))


def test_mean_field_reports_non_convergence():
    bm = M.sk_random(10, 3.0, 0.2, seed=0)
    st = M.solve_mean_field(bm, max_iter=3)
    assert not st.converged
    assert st.iterations == 3


def test_exact_log_partition_small():
    # independent units: Z = prod 2 cosh theta
    theta = np.array([0.3, -1.2, 0.0])
    bm = M.BoltzmannMachine(np.zeros((3, 3)), theta)
    assert M.exact_log_partition(bm) == pytest.approx(np.sum(np.log(2 * np.cosh(theta))))
    # two coupled units: Z = 2 e^w + 2 e^-w
    w = 0.7
    bm = M.BoltzmannMachine(np.array([[0, w], [w, 0]]), np.zeros(2))
    assert M.exact_log_partition(bm) == pytest.approx(math.log(2 * math.exp(w) + 2 * math.exp(-w)))
    assert M.exact_correlation(bm, 0, 1) == pytest.approx(math.tanh(w))


def test_exact_enumeration_matches_product_loop():
    bm = M.sk_random(9, 1.0, 0.2, seed=7)
    assert M.exact_log_partition(bm) == pytest.approx(brute_log_z(bm), rel=1e-13)


def test_block_enumeration_covers_every_state():
    blocks = list(M.state_blocks(5, block_bits=2))
    S = np.vstack(blocks)
    assert S.shape == (32, 5)
    assert len({tuple(r) for r in S}) == 32


def test_enumeration_limit():
    bm = M.BoltzmannMachine(np.zeros((M.MAX_ENUM_N + 1,) * 2), np.zeros(M.MAX_ENUM_N + 1))
    with pytest.raises(M.EnumerationLimitError):
        M.exact_log_partition(bm)


def test_log_z_tilde_against_enumeration():
    bm = M.sk_random(8, 0.8, 0.2, seed=11)
    st = M.solve_mean_field(bm)
    C = M.reference_constant(bm, st.h)
    states = np.array(list(itertools.product([-1, 1], repeat=8)), dtype=float)
    direct = math.log(np.sum(np.exp(states @ st.h + C)))
    assert M.log_z_tilde(st, bm) == pytest.approx(direct, rel=1e-13)
    # reference energy is unbiased: <dH> = 0
    mom = M.brute_force_delta_h_moments(bm, st, 2)
    assert abs(mom[1]) < 1e-12


def test_delta_h_reduces_to_coupling_form_at_fixed_point():
    bm = M.sk_random(7, 1.0, 0.3, seed=2)
    st = M.solve_mean_field(bm)
    a = M.brute_force_delta_h_moments(bm, st, 6).values
    b = M.brute_force_coupling_moments(bm.weights, st.m, 6).values
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-12)


def test_network_file_round_trip(tmp_path):
    bm = M.sk_random(6, 1.0, 0.2, seed=9)
    path = tmp_path / "net.json"
    M.save_network(bm, path)
    again = M.load_network(path)
    assert np.array_equal(again.weights, bm.weights)
    assert np.array_equal(again.thresholds, bm.thresholds)
    with pytest.raises(ValueError):
        M.network_from_dict({"N": 3, "theta": [0, 0, 0], "weights_upper_triangle": [1.0]})


def test_zero_solution_attractor_status():
    # h = 0 loses stability once the top eigenvalue of W passes 1 (~ 2 sigma_w)
    zero = np.zeros(300)
    assert M.is_attractor(M.sk_random(300, 0.3, 0.0, seed=1), zero)
    assert not M.is_attractor(M.sk_random(300, 0.8, 0.0, seed=1), zero)
    bm = M.sk_random(12, 1.0, 0.2, seed=4)
    assert M.is_attractor(bm, M.solve_mean_field(bm).h)

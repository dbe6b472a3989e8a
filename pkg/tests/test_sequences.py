"""Sequence generators and their self-checks."""

import numpy as np
import pytest

from epsaccel import sequences as seqs


def test_kernel_recurrence_satisfies_relation():
    src = seqs.KernelRecurrence(5, "vector", seed=42)
    S = src.take(8)
    for n in range(5, 8):
        lhs = S[n]
        rhs = 3 * S[n - 1] - S[n - 2] + 2 * S[n - 3] + S[n - 4] - 5 * S[n - 5]
        assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)
    assert np.array_equal(np.asarray(src.limit()), np.zeros(5))


def test_kernel_recurrence_adversarial_seeding():
    src = seqs.KernelRecurrence(4, "vector", seed=0, perturbation=1e-11)
    S = src.take(5)
    # term 3 repeats term 0, terms 2 and 4 are tiny perturbations
    assert np.array_equal(S[3], S[0])
    assert np.array_equal(S[1], np.ones(4))
    assert 0 < np.abs(S[2] - S[1]).max() < 1e-9
    assert 0 < np.abs(S[4] - S[3]).max() < 1e-9


def test_kernel_recurrence_matrix_space():
    src = seqs.KernelRecurrence(6, "matrix", seed=1)
    t = src.next_term()
    assert t.shape == (6, 6)
    with pytest.raises(ValueError):
        seqs.KernelRecurrence(4, "tensor")


def test_geometric_modes_single():
    e1 = np.zeros(3)
    e1[0] = 1.0
    src = seqs.GeometricModes(np.zeros(3), [1.0], [0.5], [e1])
    S = src.take(5)
    for n, t in enumerate(S):
        assert np.allclose(t, 2.0 ** -n * e1)
    alt = seqs.GeometricModes(np.zeros(3), [1.0], [0.5], [e1], alternating=True)
    A = alt.take(4)
    assert np.allclose(A[1], -0.5 * e1) and np.allclose(A[2], 0.25 * e1)


def test_geometric_modes_random_rates():
    src = seqs.GeometricModes.random(7, [0.9, 0.5], seed=3)
    a = src.take(6)
    b = src.clone().take(6)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


def test_logarithmic_modes_formula():
    u = np.array([1.0, 2.0])
    src = seqs.LogarithmicModes(np.zeros(2), [0.5, 0.25], [u, 3 * u], b=2.0)
    S = src.take(3)
    for n, t in enumerate(S):
        want = 0.5 * u / (n + 2.0) + 0.25 * 3 * u / (n + 2.0) ** 2
        assert np.allclose(t, want)


def test_verify_totally_monotonic_scalars():
    assert seqs.verify_totally_monotonic([2.0 ** -n for n in range(12)])
    assert not seqs.verify_totally_monotonic(
        [(-1) ** n * 2.0 ** -n for n in range(12)])


def test_tm_source_is_totally_monotonic():
    src = seqs.TotallyMonotonicSource(5, [0.85, 0.4, 0.15], seed=2)
    assert seqs.verify_tm(src, k_max=4, n_max=8)
    prop = seqs.TotallyMonotonicSource.proportional(5, [0.85, 0.4, 0.15],
                                                    seed=2, offset=0.3)
    assert seqs.verify_tm(prop, k_max=4, n_max=8)
    with pytest.raises(ValueError):
        seqs.TotallyMonotonicSource.proportional(5, [0.5], offset=-1.0)


def test_to_source_is_totally_oscillating():
    src = seqs.TotallyOscillatingSource(5, [0.8, 0.35], seed=3)
    assert seqs.verify_to(src, k_max=4, n_max=8)
    prop = seqs.TotallyOscillatingSource.proportional(5, [0.8, 0.35], seed=3)
    assert seqs.verify_to(prop, k_max=4, n_max=8)
    # oscillating differences alternate entrywise
    t = prop.clone().take(3)
    assert np.all((t[1] - t[0]) * (t[2] - t[1]) <= 0)


def test_parter_matrix_values():
    P = seqs.parter_matrix(3)
    assert P.shape == (3, 3)
    assert P[0, 0] == pytest.approx(2.0)         # 1 / 0.5
    assert P[2, 0] == pytest.approx(1.0 / 2.5)   # 1 / (2 - 0 + 0.5)


def test_kaczmarz_error_monotone_and_limit():
    src = seqs.KaczmarzSweeps.parter(30)
    sol = np.asarray(src.limit())
    assert np.allclose(sol, np.ones(30))
    terms = src.take(25)
    # each row projection is orthogonal, so the 2-norm error cannot grow
    errs = [np.linalg.norm(t - sol) for t in terms]
    assert all(b <= a + 1e-14 for a, b in zip(errs, errs[1:]))
    assert errs[-1] < errs[0]
    assert src.residual(terms[-1]) < src.residual(terms[0])


def test_kaczmarz_identity_converges_in_one_sweep():
    A = np.eye(4)
    b = np.arange(1.0, 5.0)
    src = seqs.KaczmarzSweeps(A, b)
    t0 = src.next_term()
    t1 = src.next_term()
    assert np.allclose(t0, np.zeros(4))
    assert np.allclose(t1, b)


def test_ns_iteration_residual_drops():
    src = seqs.NsIterationSource.random(12, seed=0)
    terms = src.take(8)
    assert src.residual(terms[-1]) < 1e-3 * src.residual(terms[0])


def test_qpow_iteration_residual_drops():
    src = seqs.QpowIterationSource.random(12, seed=0)
    terms = src.take(10)
    assert src.residual(terms[-1]) < 1e-2 * src.residual(terms[0])


def test_smith_one_step_recursion():
    src = seqs.SmithSource.random(8, rho=0.8, seed=4)
    S = src.take(6)
    A = src.A
    for n in range(2, 6):
        lhs = S[n] - S[n - 1]
        rhs = A @ (S[n - 1] - S[n - 2]) @ A.T
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_smith_zero_matrix_fixed_point():
    F = np.array([[1.0], [2.0]])
    src = seqs.SmithSource(np.zeros((2, 2)), F)
    S = src.take(4)
    for t in S[1:]:
        assert np.allclose(t, F @ F.T)


def test_smith_limit_solves_equation():
    src = seqs.SmithSource.random(10, rho=0.9, seed=0)
    X = np.asarray(src.limit())
    resid = np.linalg.norm(X - src.A @ X @ src.A.T - src.F @ src.F.T)
    assert resid <= 1e-12 * max(np.linalg.norm(X), 1.0)
    assert src.residual(X) <= 1e-12 * max(np.linalg.norm(X), 1.0)


def test_spectral_radius_estimate():
    src = seqs.SmithSource.random(10, rho=0.9, seed=0)
    assert seqs.spectral_radius_estimate(src.A) == pytest.approx(0.9, rel=1e-3)


def test_clone_replays_stream():
    for src in (seqs.KernelRecurrence(6, seed=3),
                seqs.TotallyMonotonicSource(4, [0.6, 0.2], seed=1),
                seqs.KaczmarzSweeps.parter(10),
                seqs.SmithSource.random(6, seed=2)):
        a = src.clone().take(5)
        b = src.clone().take(5)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

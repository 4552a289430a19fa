import numpy as np
import pytest
from numpy.testing import assert_allclose

from qcombs import (
    DesignInsufficientError,
    DimOverflowError,
    LabeledOperator,
    NotHermitianError,
    PerformanceOperator,
    TwirlSpec,
    UnsupportedError,
    Wire,
    clifford_group,
    cloning_objective,
    estimation_reference,
    haar_average,
    haar_unitary,
    learning_objective,
    link_product,
    random_comb,
)
from conftest import (
    cloning_conjugation,
    learning_conjugation,
    learning_memory,
    mc_gate_fidelity,
    rand_hermitian,
)


# ---------------------------------------------------------------------------
# Averaging designs


def test_clifford_group_is_a_group_of_24():
    group = clifford_group()
    assert len(group) == 24
    for u in group:
        assert_allclose(u @ u.conj().T, np.eye(2), atol=1e-12)

    def phase_canonical(u):
        k = int(np.argmax(np.abs(u).ravel() > 0.1))
        z = u.ravel()[k]
        return np.round(u / (z / abs(z)), 8) + 0.0

    canon = {phase_canonical(u).tobytes() for u in group}
    assert len(canon) == 24
    for u in group[:6]:
        for v in group[:6]:
            assert phase_canonical(u @ v).tobytes() in canon


def test_clifford_matches_commutant_average():
    # Two independent exact-averaging backends must agree wherever both
    # apply (qubits, degree <= 3).
    rng = np.random.default_rng(0)
    wires = (Wire("a", 2), Wire("b", 2), Wire("c", 2))
    base = LabeledOperator(wires, rand_hermitian(8, rng))
    pattern = (("a", "U", 1), ("b", "U*", 1), ("c", "U", 1))
    out = {}
    for design in ("clifford", "commutant"):
        spec = TwirlSpec(2, pattern, design)
        out[design] = haar_average(spec, base).omega
    assert (out["clifford"] - out["commutant"]).norm() < 1e-12


def test_design_availability():
    spec = TwirlSpec(3, (("a", "U", 1),), "clifford")
    with pytest.raises(DesignInsufficientError):
        spec.resolved_design()
    spec = TwirlSpec(2, (("a", "U", 2), ("b", "U*", 2)), "clifford")
    with pytest.raises(DesignInsufficientError):
        spec.resolved_design()
    assert TwirlSpec(2, (("a", "U", 1),), "auto").resolved_design() == "clifford"
    assert TwirlSpec(3, (("a", "U", 1),), "auto").resolved_design() == "commutant"


def test_single_wire_twirl_depolarizes():
    rng = np.random.default_rng(1)
    for d in (2, 3):
        base = LabeledOperator((Wire("a", d),), rand_hermitian(d, rng))
        avg = haar_average(TwirlSpec(d, (("a", "U", 1),)), base).omega
        assert_allclose(
            avg.matrix, np.eye(d) * base.trace().real / d, atol=1e-12
        )


def test_mixed_twirl_fixed_points():
    # E[(U x U*) X (U x U*)^dag] lives in span{I, |Omega><Omega|} and
    # preserves the trace and the Omega expectation.
    rng = np.random.default_rng(2)
    d = 3
    wires = (Wire("a", d), Wire("b", d))
    base = LabeledOperator(wires, rand_hermitian(d * d, rng))
    avg = haar_average(
        TwirlSpec(d, (("a", "U", 1), ("b", "U*", 1))), base
    ).omega
    omega_vec = np.eye(d).reshape(-1)
    proj = np.outer(omega_vec, omega_vec)
    ident = np.eye(d * d)
    # solve for avg = x I + y P in the two-dimensional fixed-point space;
    # pairings: <I,I> = d^2, <I,P> = d, <P,P> = d^2
    gram = np.array([[d * d, d], [d, d * d]], dtype=float)
    rhs = np.array(
        [np.trace(avg.matrix).real, np.trace(proj @ avg.matrix).real]
    )
    x, y = np.linalg.solve(gram, rhs)
    assert np.linalg.norm(avg.matrix - x * ident - y * proj) < 1e-10
    assert np.trace(avg.matrix).real == pytest.approx(
        base.trace().real, abs=1e-10
    )
    assert np.trace(proj @ avg.matrix).real == pytest.approx(
        np.trace(proj @ base.matrix).real, abs=1e-10
    )


def test_twirl_against_monte_carlo():
    rng = np.random.default_rng(3)
    d = 3
    wires = (Wire("a", d), Wire("b", d))
    base = LabeledOperator(wires, rand_hermitian(d * d, rng))
    avg = haar_average(
        TwirlSpec(d, (("a", "U", 1), ("b", "U*", 1))), base
    ).omega
    acc = np.zeros((d * d, d * d), dtype=complex)
    n = 3000
    for _ in range(n):
        u = haar_unitary(d, rng)
        w = np.kron(u, u.conj())
        acc += w @ base.matrix @ w.conj().T
    acc /= n
    assert np.linalg.norm(acc - avg.matrix) < 0.08 * base.norm()


def test_averaging_is_idempotent():
    rng = np.random.default_rng(4)
    wires = (Wire("a", 2), Wire("b", 2))
    base = LabeledOperator(wires, rand_hermitian(4, rng))
    spec = TwirlSpec(2, (("a", "U", 1), ("b", "U*", 1)))
    once = haar_average(spec, base).omega
    twice = haar_average(spec, once).omega
    assert (once - twice).norm() < 1e-12


# ---------------------------------------------------------------------------
# Performance operators


def test_performance_operator_validation():
    with pytest.raises(NotHermitianError):
        PerformanceOperator(
            LabeledOperator((Wire("a", 2),), np.array([[0, 1], [0, 0]]))
        )


def test_cloning_objective_shape_and_trace():
    for n, m, d in [(1, 1, 2), (1, 2, 2), (2, 1, 2), (1, 2, 3)]:
        po = cloning_objective(n, m, d)
        assert po.omega.is_hermitian()
        assert po.structure.n_teeth == n + 1
        assert po.omega.trace().real == pytest.approx(
            float(d) ** (n - m), rel=1e-12
        )
    with pytest.raises(DimOverflowError):
        cloning_objective(2, 2, 4)


def pass_through_board(d):
    from qcombs import max_entangled

    v1 = max_entangled((Wire("1", d), Wire("0", d)))
    v2 = max_entangled((Wire("3", d), Wire("2", d)))
    return v1.tensor(v2).outer()


def test_pass_through_board_scores_one_on_matched_cloning():
    for d in (2, 3):
        po = cloning_objective(1, 1, d)
        assert po.value(pass_through_board(d)) == pytest.approx(1.0, abs=1e-12)


def test_value_matches_link_contraction():
    po = cloning_objective(1, 2, 2)
    comb = random_comb(po.structure, [4], 99)
    direct = po.value(comb.op)
    transposed = comb.op.ptranspose(comb.op.labels)
    linked = link_product(transposed, po.omega)
    assert linked.labels == ()
    assert abs(direct - linked.trace().real) < 1e-11


def test_cloning_invariance_under_symmetry():
    rng = np.random.default_rng(7)
    for n, m, d in [(1, 2, 2), (2, 1, 2), (1, 1, 3)]:
        po = cloning_objective(n, m, d)
        for _ in range(10):
            u = haar_unitary(d, rng)
            w = cloning_conjugation(po.omega, u, n, m)
            rotated = w @ po.omega @ w.adjoint()
            assert (rotated - po.omega).norm() < 1e-9


def test_learning_invariance_under_symmetry():
    rng = np.random.default_rng(8)
    for n in (1, 2):
        po = learning_objective(n, 2)
        for _ in range(10):
            u = haar_unitary(2, rng)
            w = learning_conjugation(po.omega, u, n)
            rotated = w @ po.omega @ w.adjoint()
            assert (rotated - po.omega).norm() < 1e-9


def test_learning_objective_matches_monte_carlo_fidelity():
    for n_uses, seed in [(1, 21), (2, 22)]:
        po = learning_objective(n_uses, 2)
        comb = random_comb(po.structure, learning_memory(n_uses), seed)
        predicted = po.value(comb.op)
        mean, stderr = mc_gate_fidelity(comb, n_uses, 2, 2000, seed)
        assert abs(predicted - mean) < 4 * stderr + 1e-6


def test_estimation_reference():
    assert estimation_reference(1, 2, 2) == pytest.approx(5 / 16)
    assert estimation_reference(1, 2, 3) == pytest.approx(6 / 81)
    assert estimation_reference(1, 2, 4) == pytest.approx(6 / 256)
    with pytest.raises(UnsupportedError):
        estimation_reference(2, 2, 2)
    with pytest.raises(UnsupportedError):
        estimation_reference(1, 2, 1)

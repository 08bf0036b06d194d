import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regdil.errors import DimensionError, DomainError, ResourceError
from regdil.generators import (
    generate,
    nilpotent_triple,
    random_cc,
    random_scalar_lambda,
    random_system,
    random_unitary,
    scaled_twisted_unitaries,
    tensor_doubly_commuting,
)
from regdil.gradedspace import MultiIndex, ProductSystem, grades_in_box
from regdil.representation import (
    NcPolynomial,
    Representation,
    commutation_residual,
    consdc_suite,
    evaluate_on_rep,
    is_doubly_commuting,
    multiplicativity_residual,
    symbol,
    ttilde,
    ttilde_power,
    validate,
)

seeds = st.integers(0, 10_000)
kinds = st.sampled_from(["untwisted", "diagonal", "permutation", "dense", "scalar"])


def _rep(kind, seed, k=2, h=2):
    rng = np.random.default_rng(seed)
    dims = [1] * k if kind == "scalar" else list(rng.integers(1, 3, k))
    return random_cc(random_system(kind, dims, rng), h, rng)


def test_shape_checks():
    s = ProductSystem((2, 1))
    with pytest.raises(DimensionError):
        Representation(s, 2, [[np.eye(2)], [np.eye(2)]])
    with pytest.raises(DimensionError):
        Representation(s, 2, [[np.eye(2), np.eye(3)], [np.eye(2)]])


def test_zero_rep_valid():
    rep = Representation.zero(ProductSystem((2, 1)), 3)
    assert validate(rep).valid
    assert is_doubly_commuting(rep).doubly_commuting


def test_cap_enforced():
    rep = Representation(ProductSystem((2,)), 2, [[np.eye(2) / 2, np.eye(2) / 2]], cap=16)
    with pytest.raises(ResourceError):
        ttilde(rep, (4,))


def test_ttilde_power_k1_is_row_of_products(rng):
    A, B = 0.5 * rng.standard_normal((2, 2, 2))
    rep = Representation(ProductSystem((2,)), 2, [[A, B]])
    T2 = ttilde_power(rep, 0, 2)
    # e_l (x) e_m (x) h -> T_l T_m h
    expected = np.hstack([A @ A, A @ B, B @ A, B @ B])
    assert np.allclose(T2, expected)
    with pytest.raises(DomainError):
        ttilde_power(rep, 0, -1)


@given(kinds, seeds)
def test_generated_reps_valid(kind, seed):
    assert validate(_rep(kind, seed)).valid


@given(kinds, seeds)
def test_multiplicativity(kind, seed):
    rep = _rep(kind, seed)
    for n in grades_in_box([1, 1]):
        for m in grades_in_box([1, 1]):
            assert multiplicativity_residual(rep, n, m) <= 1e-10


@given(kinds, seeds)
def test_symbol_adjoint_symmetry(kind, seed):
    rep = _rep(kind, seed)
    for n in [(1, -1), (2, -1), (-1, 0), (0, 2)]:
        n = MultiIndex(n)
        assert np.array_equal(symbol(rep, -n), symbol(rep, n).conj().T)


def test_scalar_commutation_is_plain_phase_relation(rng):
    lam = np.array([[1, 1j], [-1j, 1]])
    rep = scaled_twisted_unitaries(lam, [0.7, 0.4])
    T1, T2 = rep.blocks[0][0], rep.blocks[1][0]
    # T_i T_j = lambda_{i,j} T_j T_i and T_i^* T_j = conj(lambda_{i,j}) T_j T_i^*
    assert np.abs(T1 @ T2 - lam[0, 1] * T2 @ T1).max() < 1e-12
    assert np.abs(T1.conj().T @ T2 - np.conj(lam[0, 1]) * T2 @ T1.conj().T).max() < 1e-12
    assert commutation_residual(rep, 0, 1) < 1e-12
    assert is_doubly_commuting(rep, tol=1e-12).doubly_commuting


def test_scalar_twist_mismatch_invalid():
    # commuting scalars but lambda = -1 breaks the twisted relation
    s = ProductSystem.scalar(np.array([[1, -1], [-1, 1]]))
    rep = Representation(s, 1, [[np.array([[0.5]])], [np.array([[0.5]])]])
    r = validate(rep)
    assert not r.valid and r.residuals[(0, 1)] == pytest.approx(0.5)


def test_non_contraction_invalid():
    rep = Representation(ProductSystem((1,)), 1, [[np.array([[1.5]])]])
    assert not validate(rep).valid


def test_nilpotent_triple_commuting_not_dc():
    rep = nilpotent_triple()
    assert validate(rep).valid
    assert not is_doubly_commuting(rep).doubly_commuting


@given(kinds, seeds)
def test_dc_invariant_under_unitary_conjugation(kind, seed):
    rep = _rep(kind, seed)
    U = random_unitary(rep.hdim, np.random.default_rng(seed))
    a = is_doubly_commuting(rep).residuals
    b = is_doubly_commuting(rep.conjugated(U)).residuals
    for key in a:
        assert abs(a[key] - b[key]) <= 1e-12


def test_consdc_k1_vacuous():
    rep = Representation(ProductSystem((2,)), 1, [[np.array([[0.6]]), np.array([[0.3]])]])
    assert consdc_suite(rep) == {"i": 0.0, "ii": 0.0, "iii": 0.0, "iv": 0.0}


def test_consdc_scalar_dc_pair():
    rep = generate("scalar_tuple", 1, {"lam": np.ones((2, 2)), "t": [0.4, -0.7j]})
    assert max(consdc_suite(rep, [2, 2]).values()) <= 1e-12


@pytest.mark.parametrize("seed", range(4))
def test_consdc_tensor_rep(seed):
    rng = np.random.default_rng(seed)
    rep = tensor_doubly_commuting((2, 1), (2, 2), rng)
    assert max(consdc_suite(rep, [2, 2]).values()) <= 1e-9


def test_polynomial_evaluation(rng):
    A = 0.5 * rng.standard_normal((2, 2))
    rep = Representation(ProductSystem((1,)), 2, [[A]])
    p = NcPolynomial([(2.0, ()), (1j, [(0, 0), (0, 0)])])
    assert np.allclose(evaluate_on_rep(p, rep), 2 * np.eye(2) + 1j * A @ A)
    assert p.degree == 2
    with pytest.raises(DomainError):
        NcPolynomial([(1.0, [(1, 0)])]).check_letters([1])


def _dc_reference(rep, i, j):
    d, h = rep.system.dims, rep.hdim
    Ti, Tj = rep.tilde(i), rep.tilde(j)
    rhs = (
        np.kron(np.eye(d[j]), Ti)
        @ np.kron(rep.system.twist(i, j), np.eye(h))
        @ np.kron(np.eye(d[i]), Tj.conj().T)
    )
    return np.linalg.norm(Tj.conj().T @ Ti - rhs, 2)


@given(kinds, seeds)
def test_dc_residual_matches_kron_formula(kind, seed):
    from regdil.representation import dc_residual

    rep = _rep(kind, seed, h=3)
    for i in range(2):
        for j in range(2):
            if i != j:
                assert dc_residual(rep, i, j) == pytest.approx(_dc_reference(rep, i, j), abs=1e-12)

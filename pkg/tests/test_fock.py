import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from regdil.dilation import construct_dilation
from regdil.errors import DomainError, PreconditionError
from regdil.fock import (
    TruncatedFock,
    character_is_representation,
    character_set,
    fock_checks,
    nica_check,
    nica_check_fock_interior,
    scalar_shift_oracle,
    vn_margin,
)
from regdil.generators import (
    dense_system,
    diagonal_system,
    generate,
    nilpotent_triple,
    random_scalar_lambda,
    scaled_twisted_unitaries,
)
from regdil.gradedspace import MultiIndex, ProductSystem
from regdil.representation import NcPolynomial, Representation, validate

seeds = st.integers(0, 10_000)


def _lam12(z):
    return np.array([[1, z], [np.conj(z), 1]], dtype=complex)


def test_vacuum_goes_to_basis_vector(rng):
    s = dense_system((2, 3), rng)
    F = TruncatedFock(s, [1, 1])
    out = F.creation(1, 2) @ F.vacuum()
    expected = np.zeros(F.dim, dtype=complex)
    expected[F.slot((0, 1))] = np.eye(3)[2]
    assert np.allclose(out, expected)


def test_oracle_first_generator_trivial(rng):
    lam = random_scalar_lambda(3, rng)
    for n in [(0, 0, 0), (2, 1, 3)]:
        assert scalar_shift_oracle(lam, n, 0) == 1


def test_oracle_untwisted_is_one():
    assert scalar_shift_oracle(np.ones((3, 3)), (3, 1, 2), 2) == 1


def test_oracle_k2_lambda_i():
    # lambda_{1,2} = i, so lambda_{2,1} = -i and the weight is (-i)^3 = i
    lam = _lam12(1j)
    assert scalar_shift_oracle(lam, (3, 5), 1) == pytest.approx(1j, abs=1e-15)
    F = TruncatedFock(ProductSystem.scalar(lam), [3, 5])
    L = F.creation(1, 0)
    assert L[F.offsets[MultiIndex((3, 5))], F.offsets[MultiIndex((3, 4))]] == pytest.approx(1j, abs=1e-12)


@given(st.floats(0, 2 * np.pi), st.integers(0, 5))
def test_oracle_phase_power(theta, n1):
    lam = _lam12(np.exp(-1j * theta))  # lambda_{2,1} = e^{i theta}
    assert scalar_shift_oracle(lam, (n1, 2), 1) == pytest.approx(np.exp(1j * theta * n1), abs=1e-12)


def test_oracle_rejects_bad_lambda():
    with pytest.raises(DomainError):
        scalar_shift_oracle(np.array([[1, 2], [0.5, 1]]), (1, 1), 1)
    with pytest.raises(DomainError):
        scalar_shift_oracle(np.array([[1, 1j], [1j, 1]]), (1, 1), 1)


@given(seeds)
def test_braided_creation_matches_closed_form(seed):
    lam = random_scalar_lambda(3, np.random.default_rng(seed))
    assert fock_checks(ProductSystem.scalar(lam), [2, 2, 1])["oracle"] <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_structural_identities(seed):
    rng = np.random.default_rng(seed)
    for s in [dense_system((2, 2), rng), diagonal_system((2, 1, 1), rng)]:
        r = fock_checks(s, [2] * s.k)
        assert r["toeplitz"] <= 1e-12
        assert r["commutation"] <= 1e-12
        assert all(v["status"] == "ok" for v in r["nica"].values())


def test_fock_nica_e1_e2_is_grade_projection():
    F = TruncatedFock(ProductSystem.scalar(_lam12(-1)), [2, 2])
    r = nica_check_fock_interior(F, (1, 0), (0, 1))
    assert r.status == "ok" and r.residual <= 1e-12
    assert r.domain_dim == 4  # grades <= (1, 1)


def test_nica_isometric_rep_full_ranges():
    rep = scaled_twisted_unitaries(_lam12(1j), [1.0, 1.0])
    r = nica_check(rep, (1, 0), (0, 2))
    assert r.passed and r.residual <= 1e-12


def test_nica_equal_grades_trivial():
    rep = scaled_twisted_unitaries(_lam12(-1), [1.0, 1.0])
    assert nica_check(rep, (1, 1), (1, 1)).residual <= 1e-12


def test_nica_needs_isometries():
    rep = scaled_twisted_unitaries(_lam12(-1), [0.5, 1.0])
    with pytest.raises(PreconditionError):
        nica_check(rep, (1, 0), (0, 1))


def test_nica_dilation_inconclusive_outside_box():
    rep = generate("scalar_tuple", 0, {"k": 2})
    d = construct_dilation(rep, [1, 1])
    assert nica_check(d, (1, 0), (1, 1)).status == "inconclusive"


def test_nica_dilation_ok():
    rep = generate("scaled_twisted_unitaries", 5, {"k": 2, "q": 2})
    d = construct_dilation(rep, [2, 2])
    r = nica_check(d, (1, 0), (0, 1))
    assert r.status == "ok" and r.residual <= 1e-8


def test_vn_unit_polynomial():
    rep = generate("scalar_tuple", 0, {"k": 2})
    r = vn_margin(rep, NcPolynomial.unit())
    assert r.norm_T == pytest.approx(1) and r.norm_S_by_N[-1] == pytest.approx(1)
    assert r.margin == pytest.approx(0, abs=1e-12)


def test_vn_single_shift():
    rep = Representation(ProductSystem((1,)), 1, [[np.array([[0.5]])]])
    r = vn_margin(rep, NcPolynomial([(1.0, [(0, 0)])]))
    assert r.norm_T == pytest.approx(0.5)
    assert r.norm_S_by_N == pytest.approx([1, 1, 1, 1])
    assert r.margin == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(4))
def test_vn_monomial_x1x2_clock_shift(seed):
    c = np.random.default_rng(seed).uniform(0, 1, 2)
    rep = scaled_twisted_unitaries(_lam12(-1), c)
    r = vn_margin(rep, NcPolynomial([(1.0, [(0, 0), (1, 0)])]))
    assert r.margin >= 0 and r.monotone


def test_vn_requires_dc():
    with pytest.raises(PreconditionError):
        vn_margin(nilpotent_triple(), NcPolynomial.unit())


def test_vn_letter_range():
    rep = generate("scalar_tuple", 0, {"k": 2})
    with pytest.raises(DomainError):
        vn_margin(rep, NcPolynomial([(1.0, [(2, 0)])]))


def test_characters_examples():
    assert character_set(np.ones((2, 2)), [0.3, -0.8j]).accepted
    r = character_set(_lam12(1j), [0.5, 0.5])
    assert not r.accepted and r.violations[0]["kind"] == "product"
    assert character_set(_lam12(1j), [0.5, 0]).accepted
    assert character_is_representation(ProductSystem.scalar(_lam12(1j)), [0.5, 0])


def test_character_near_boundary_flag():
    z = np.exp(1j * 1e-11)
    assert character_set(_lam12(z), [0.5, 0]).near_boundary


@given(st.complex_numbers(max_magnitude=1.2), st.complex_numbers(max_magnitude=1.2), st.booleans())
def test_characters_two_sided(t1, t2, zero_one):
    if zero_one:
        t2 = 0j
    # the two tests use different tolerances; stay clear of the band between them
    assume(abs(t1 * t2) == 0 or abs(t1 * t2) > 1e-8)
    assume(all(abs(abs(t) - 1) > 1e-8 for t in (t1, t2)))
    s = ProductSystem.scalar(_lam12(1j))
    accepted = character_set(s.lambda_matrix(), [t1, t2]).accepted
    rep = Representation(s, 1, [[np.array([[t1]])], [np.array([[t2]])]])
    assert accepted == validate(rep).valid
    if accepted:
        assert character_is_representation(s, [t1, t2])

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regdil.dilation import (
    brehmer_defect,
    build_gram,
    check_regular_dilation,
    construct_dilation,
    dilation_doubly_commuting,
    leading_gram_ranks,
    product_formula_check,
    uniqueness_check,
    verify_comp_identities,
    verify_dilation,
)
from regdil.errors import DilationRefused, InconsistencyError, PreconditionError, ResourceError
from regdil.generators import (
    generate,
    nilpotent_triple,
    random_cc,
    random_system,
    scaled_twisted_unitaries,
    scalar_tuple,
)
from regdil.gradedspace import ProductSystem
from regdil.representation import Representation

seeds = st.integers(0, 10_000)
kinds = st.sampled_from(["untwisted", "diagonal", "permutation", "dense", "scalar"])


def test_nilpotent_defects_exact():
    rep = nilpotent_triple(0.9)
    # N^*N = diag(0, 1) and all products of two T's vanish
    assert np.linalg.eigvalsh(brehmer_defect(rep, (0, 1)))[0] == pytest.approx(1 - 2 * 0.81, abs=1e-12)
    cert = check_regular_dilation(rep)
    assert not cert.holds
    assert cert.min_eigs[(0, 1, 2)] == pytest.approx(1 - 3 * 0.81, abs=1e-12)
    assert cert.worst[0] == (0, 1, 2)


def test_nilpotent_refused_with_certificate():
    with pytest.raises(DilationRefused) as exc:
        construct_dilation(nilpotent_triple(), [1, 1, 1])
    assert exc.value.certificate.min_eigs[(0, 1, 2)] == pytest.approx(-1.43, abs=1e-12)


def test_product_formula_needs_dc():
    with pytest.raises(PreconditionError):
        product_formula_check(nilpotent_triple(), (0, 1, 2))


@pytest.mark.parametrize("t", [0.0, 0.5, 0.99, 1.0])
def test_k1_defect_closed_form(t):
    rep = Representation(ProductSystem((1,)), 1, [[np.array([[t]])]])
    assert check_regular_dilation(rep).min_eigs[(0,)] == pytest.approx(1 - t * t, abs=1e-15)


@given(seeds, st.integers(1, 3))
def test_h1_defects_are_products(seed, k):
    rng = np.random.default_rng(seed)
    t = np.sqrt(rng.random(k)) * np.exp(2j * np.pi * rng.random(k))
    rep = scalar_tuple(ProductSystem.scalar(np.ones((k, k))), t)
    cert = check_regular_dilation(rep)
    for v, e in cert.min_eigs.items():
        assert e == pytest.approx(np.prod([1 - abs(t[i]) ** 2 for i in v]), abs=1e-12)


@given(kinds, seeds)
def test_comp_identities_random(kind, seed):
    rng = np.random.default_rng(seed)
    dims = [1, 1] if kind == "scalar" else list(rng.integers(1, 3, 2))
    rep = random_cc(random_system(kind, dims, rng), 2, rng)
    assert max(verify_comp_identities(rep, [2, 1]).values()) <= 1e-10


def test_gram_of_zero_rep_is_identity():
    rep = Representation.zero(ProductSystem((2, 1)), 2)
    g = build_gram(rep, [1, 1])
    R = g.R.dense()
    assert np.allclose(R, np.eye(R.shape[0]))


def test_zero_rep_dilation_is_full_box():
    rep = Representation.zero(ProductSystem((2, 1)), 2)
    d = construct_dilation(rep, [1, 1])
    assert d.kdim == 2 * (1 + 2 + 1 + 2)
    assert verify_dilation(rep, d)["max_residual"] <= 1e-12


def test_classical_k1():
    rep = Representation(ProductSystem((1,)), 1, [[np.array([[0.5]])]])
    d = construct_dilation(rep, [4])
    # Gram matrix 0.5^{|p-q|} is positive definite: all five grades survive
    assert d.kdim == 5
    assert d.rank_profile == {(n,): n + 1 for n in range(5)}
    assert verify_dilation(rep, d)["max_residual"] <= 1e-8


def test_isometric_input_gives_itself():
    w = np.exp(2j * np.pi / 3)
    rep = scaled_twisted_unitaries(np.array([[1, w], [np.conj(w), 1]]), [1.0, 1.0])
    d = construct_dilation(rep, [2, 2])
    assert d.kdim == rep.hdim
    W = d.W
    for i in range(2):
        V = d.shifts[i][0]
        assert np.abs(W.conj().T @ V @ W - rep.blocks[i][0]).max() < 1e-10
    assert verify_dilation(rep, d)["passed"]


@pytest.mark.parametrize(
    "kind,params",
    [
        ("tensor_doubly_commuting", {"dims": [2, 1]}),
        ("scaled_twisted_unitaries", {"k": 2, "q": 4}),
        ("kgraph_permutation", {"k": 2}),
        ("scalar_tuple", {"k": 3}),
    ],
)
def test_dc_dilation_end_to_end(kind, params):
    rep = generate(kind, 7, params)
    assert product_formula_check(rep, range(rep.k))["residual"] <= 1e-10
    d = construct_dilation(rep, [2] * rep.k, rng=np.random.default_rng(1))
    v = verify_dilation(rep, d)
    assert v["passed"], v
    assert dilation_doubly_commuting(d)["doubly_commuting"]


def test_uniqueness_two_coordinate_choices():
    rep = generate("tensor_doubly_commuting", 3, {"dims": [1, 2]})
    a = construct_dilation(rep, [2, 2], rng=np.random.default_rng(0))
    b = construct_dilation(rep, [2, 2], rng=np.random.default_rng(1))
    assert uniqueness_check(rep, a, b)["max_residual"] <= 1e-8


def test_uniqueness_rank_mismatch():
    rep = generate("tensor_doubly_commuting", 3, {"dims": [1, 2]})
    a = construct_dilation(rep, [2, 2])
    b = construct_dilation(rep, [1, 2])
    with pytest.raises(InconsistencyError):
        uniqueness_check(rep, a, b)


def test_rank_profile_matches_leading_gram_ranks():
    rep = generate("scaled_twisted_unitaries", 2, {"k": 2, "q": 3})
    d = construct_dilation(rep, [2, 2])
    assert d.rank_profile == leading_gram_ranks(rep, [2, 2])


def test_cap_exceeded():
    rep = generate("tensor_doubly_commuting", 0, {"dims": [2, 2], "hs": [2, 2]})
    rep.cap = 50
    with pytest.raises(ResourceError):
        construct_dilation(rep, [2, 2])

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from regdil.errors import CoherenceError, DimensionError, DomainError
from regdil.generators import dense_system, diagonal_system, permutation_system, random_scalar_lambda
from regdil.gradedspace import (
    MultiIndex,
    ProductSystem,
    grades_in_box,
    meet_join_parts,
    perfect_shuffle,
    signed_subset_sum,
    subsets,
)

small_vec = st.lists(st.integers(-4, 4), min_size=3, max_size=3)


def test_multiindex_lattice_ops():
    n, m = MultiIndex([2, -1, 0]), MultiIndex([1, 3, 0])
    assert n + m == (3, 2, 0)
    assert n - m == (1, -4, 0)
    assert n.meet(m) == (1, -1, 0)
    assert n.join(m) == (2, 3, 0)
    assert n.pos() == (2, 0, 0) and n.neg() == (0, 1, 0)
    assert meet_join_parts(n, m) == ((1, -1, 0), (2, 3, 0), (1, 0, 0), (0, 4, 0))


def test_length_mismatch_raises():
    with pytest.raises(DimensionError):
        MultiIndex([1, 2]) + MultiIndex([1, 2, 3])


@given(small_vec, small_vec)
def test_meet_join_identity(a, b):
    n, m = MultiIndex(a), MultiIndex(b)
    assert n.meet(m) + n.join(m) == n + m
    d = n - m
    assert d.pos() - d.neg() == d
    assert n.meet(m).leq(n) and n.leq(n.join(m))


@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.sets(st.integers(0, 2)))
def test_signed_subset_sum_closed_form(n, v):
    # 1 exactly when n vanishes on v
    expected = 1 if all(n[i] == 0 for i in v) else 0
    assert signed_subset_sum(v, n) == expected


def test_signed_subset_sum_rejects_negative():
    with pytest.raises(DomainError):
        signed_subset_sum([0], [-1, 0])


def test_grades_and_subsets_order():
    assert grades_in_box([1, 1]) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    assert subsets(2) == [(), (0,), (1,), (0, 1)]


def test_perfect_shuffle_swaps_kron(rng):
    a, b = rng.standard_normal(2), rng.standard_normal(3)
    assert np.allclose(perfect_shuffle(2, 3) @ np.kron(a, b), np.kron(b, a))


def test_missing_twist_is_flip():
    s = ProductSystem((2, 3))
    assert s.is_untwisted()
    assert np.array_equal(s.twist(0, 1), s.twist(1, 0).conj().T)
    assert np.array_equal(s.twist(1, 1), np.eye(9))


def test_bad_twist_shape_and_key():
    with pytest.raises(DimensionError):
        ProductSystem((2, 2), {(1, 0): np.eye(3)})
    with pytest.raises(DomainError):
        ProductSystem((1, 1), {(0, 1): np.eye(1)})


def test_non_unitary_twist_rejected():
    with pytest.raises(CoherenceError):
        ProductSystem((1, 1), {(1, 0): np.array([[2.0]])})


def test_incoherent_twists_rejected():
    # permutation family that breaks the braid relation
    rng = np.random.default_rng(3)
    bad = None
    for _ in range(200):
        perms = {
            (i, j): np.eye(4)[rng.permutation(4)] for i in range(3) for j in range(i)
        }
        s = ProductSystem((2, 2, 2), perms, check=False)
        if s.coherence_residual() > 1e-6:
            bad = perms
            break
    assert bad is not None
    with pytest.raises(CoherenceError):
        ProductSystem((2, 2, 2), bad)


def _untwisted_theta_oracle(dims, n, m):
    """Reorder tensor legs with numpy axes: independent of the adjacent-swap code."""
    word = [i for i in range(len(dims)) for _ in range(n[i])] + [
        i for i in range(len(dims)) for _ in range(m[i])
    ]
    order = sorted(range(len(word)), key=lambda p: (word[p], p))
    shape = [dims[a] for a in word]
    size = int(np.prod(shape)) if shape else 1
    basis = np.eye(size).reshape(shape + [size])
    return basis.transpose(order + [len(word)]).reshape(size, size)


@pytest.mark.parametrize("n,m", [((1, 1), (1, 0)), ((0, 2), (1, 1)), ((2, 1), (0, 1))])
def test_theta_untwisted_matches_axis_permutation(n, m):
    dims = (2, 3)
    s = ProductSystem(dims)
    assert np.allclose(s.theta(n, m), _untwisted_theta_oracle(dims, n, m))


def test_theta_scalar_phase_oracle(rng):
    lam = random_scalar_lambda(3, rng)
    s = ProductSystem.scalar(lam)
    for n, m in [((1, 2, 0), (0, 1, 1)), ((0, 1, 2), (2, 0, 1))]:
        # each letter b of m crossing a larger letter a of n contributes lambda_{a,b}
        phase = np.prod([lam[a, b] ** (n[a] * m[b]) for a in range(3) for b in range(a)])
        assert abs(s.theta(n, m)[0, 0] - phase) < 1e-12


def _coherent_families(seed):
    r = np.random.default_rng(seed)
    return [
        diagonal_system((2, 1, 2), r),
        permutation_system((2, 2, 1), r),
        dense_system((2, 2, 2), r),
        dense_system((2, 3), r),
        ProductSystem.scalar(random_scalar_lambda(3, r)),
    ]


@pytest.mark.parametrize("seed", range(3))
def test_generated_families_are_coherent(seed):
    for s in _coherent_families(seed):
        assert s.coherence_residual() <= 1e-12
        assert s.unitarity_residual() <= 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_reorder_path_independent(seed):
    r = np.random.default_rng(100 + seed)
    for s in _coherent_families(seed):
        word = (2, 0, 1, 2, 0) if s.k == 3 else (1, 0, 1, 0)
        target = tuple(sorted(word))
        ref = s.reorder_unitary(word, target, "left")
        assert np.abs(s.reorder_unitary(word, target, "right") - ref).max() < 1e-12
        for _ in range(3):
            assert np.abs(s.reorder_unitary(word, target, r) - ref).max() < 1e-12


@pytest.mark.parametrize("seed", range(3))
def test_theta_associative(seed):
    for s in _coherent_families(seed):
        k = s.k
        for n, m, p in itertools.islice(
            itertools.product(grades_in_box([1] * k), repeat=3), 0, None, 7
        ):
            lhs = s.theta(n + m, p) @ np.kron(s.theta(n, m), np.eye(s.grade_dim(p)))
            rhs = s.theta(n, m + p) @ np.kron(np.eye(s.grade_dim(n)), s.theta(m, p))
            assert np.abs(lhs - rhs).max() < 1e-12


def test_ampliate_zero_prefix_is_identity_embedding(rng):
    s = dense_system((2, 2), rng)
    M = rng.standard_normal((4, 2))
    # a = 0: nothing to reorder
    assert np.allclose(s.ampliate((0, 0), M, (0, 0), (1, 0), 2), M)


def test_word_rejects_negative_and_wrong_length():
    s = ProductSystem((1, 1))
    with pytest.raises(DomainError):
        s.word((1, -1))
    with pytest.raises(DimensionError):
        s.word((1, 1, 1))

"""Multi-index lattice arithmetic and the graded tensor spaces X(n).

A product system over Z_+^k with finite-dimensional fibers E_1..E_k is
stored as the fiber dimensions plus the braiding unitaries
t_{i,j}: E_i (x) E_j -> E_j (x) E_i for i > j.  The grade-n space X(n) is
identified with E_1^{n_1} (x) ... (x) E_k^{n_k}; every other ordering of
letters is brought to this normal form by adjacent twists.

Flattening is row-major over tensor factors, so an operator ``I_a (x) M``
is ``np.kron(np.eye(a), M)``.  Generator indices are 0-based in code and
1-based in files.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import CoherenceError, DimensionError, DomainError

UNITARY_TOL = 1e-12


class MultiIndex(tuple):
    """Signed integer k-vector with componentwise lattice operations."""

    def __new__(cls, entries: Iterable[int]):
        return super().__new__(cls, (int(x) for x in entries))

    @classmethod
    def zero(cls, k: int) -> "MultiIndex":
        return cls([0] * k)

    @classmethod
    def unit(cls, k: int, i: int) -> "MultiIndex":
        return cls(1 if j == i else 0 for j in range(k))

    @classmethod
    def from_subset(cls, k: int, subset: Iterable[int]) -> "MultiIndex":
        """The indicator vector e(u) of a subset u of range(k)."""
        s = set(subset)
        return cls(1 if j in s else 0 for j in range(k))

    def _check(self, other) -> "MultiIndex":
        other = MultiIndex(other)
        if len(other) != len(self):
            raise DimensionError(f"length mismatch: {len(self)} vs {len(other)}")
        return other

    def __add__(self, other) -> "MultiIndex":
        other = self._check(other)
        return MultiIndex(a + b for a, b in zip(self, other))

    def __sub__(self, other) -> "MultiIndex":
        other = self._check(other)
        return MultiIndex(a - b for a, b in zip(self, other))

    def __neg__(self) -> "MultiIndex":
        return MultiIndex(-a for a in self)

    def meet(self, other) -> "MultiIndex":
        other = self._check(other)
        return MultiIndex(min(a, b) for a, b in zip(self, other))

    def join(self, other) -> "MultiIndex":
        other = self._check(other)
        return MultiIndex(max(a, b) for a, b in zip(self, other))

    def pos(self) -> "MultiIndex":
        return MultiIndex(max(a, 0) for a in self)

    def neg(self) -> "MultiIndex":
        return MultiIndex(max(-a, 0) for a in self)

    def leq(self, other) -> bool:
        other = self._check(other)
        return all(a <= b for a, b in zip(self, other))

    def is_nonnegative(self) -> bool:
        return all(a >= 0 for a in self)

    def is_zero(self) -> bool:
        return not any(self)

    def total(self) -> int:
        return sum(self)

    def __repr__(self) -> str:
        return f"MultiIndex({list(self)})"


def as_index(n) -> MultiIndex:
    return n if isinstance(n, MultiIndex) else MultiIndex(n)


def meet_join_parts(n, m):
    """Return ``(n ^ m, n v m, (n - m)_+, (n - m)_-)``."""
    n, m = as_index(n), as_index(m)
    d = n - m
    return n.meet(m), n.join(m), d.pos(), d.neg()


def signed_subset_sum(v: Iterable[int], n) -> int:
    """Sum of (-1)^|u| over subsets u of v with e(u) <= n.

    Evaluated by enumeration; the result is 1 when n vanishes on v and 0
    otherwise.
    """
    n = as_index(n)
    if not n.is_nonnegative():
        raise DomainError("signed_subset_sum needs n >= 0")
    v = sorted(set(v))
    total = 0
    for r in range(len(v) + 1):
        for u in itertools.combinations(v, r):
            if all(n[i] >= 1 for i in u):
                total += (-1) ** r
    return total


def grades_in_box(box) -> list[MultiIndex]:
    """All grades 0 <= n <= box in lexicographic order."""
    box = as_index(box)
    if not box.is_nonnegative():
        raise DomainError("box must be nonnegative")
    return [MultiIndex(p) for p in itertools.product(*(range(b + 1) for b in box))]


def subsets(k: int) -> list[tuple[int, ...]]:
    """All subsets of range(k), ordered by size then lexicographically."""
    return [u for r in range(k + 1) for u in itertools.combinations(range(k), r)]


def perfect_shuffle(d_i: int, d_j: int) -> np.ndarray:
    """The untwisted flip E_i (x) E_j -> E_j (x) E_i as a permutation matrix."""
    P = np.zeros((d_i * d_j, d_i * d_j), dtype=complex)
    for l in range(d_i):
        for m in range(d_j):
            P[m * d_i + l, l * d_j + m] = 1.0
    return P


def _spectral(A: np.ndarray) -> float:
    if A.size == 0:
        return 0.0
    return float(np.linalg.norm(A, 2))


@dataclass(eq=False)
class ProductSystem:
    """Fibers E_1..E_k of dimensions ``dims`` and twists t_{i,j} for i > j.

    ``twists[(i, j)]`` (0-based, i > j) is a unitary of size d_i d_j whose
    column ``l*d_j + m`` is the image of e^{(i)}_l (x) e^{(j)}_m, written
    in the basis e^{(j)}_r (x) e^{(i)}_s at row ``r*d_i + s``.  Missing
    pairs are untwisted (perfect shuffle).
    """

    dims: tuple[int, ...]
    twists: dict = field(default_factory=dict)
    check: bool = True
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if not self.dims or any(d < 1 for d in self.dims):
            raise DimensionError("need k >= 1 fibers of positive dimension")
        full = {}
        for i in range(self.k):
            for j in range(i):
                size = self.dims[i] * self.dims[j]
                t = self.twists.get((i, j))
                if t is None:
                    t = perfect_shuffle(self.dims[i], self.dims[j])
                t = np.array(t, dtype=complex)
                if t.shape != (size, size):
                    raise DimensionError(
                        f"twist ({i + 1},{j + 1}) must be {size}x{size}, got {t.shape}"
                    )
                full[(i, j)] = t
        for key in self.twists:
            if key not in full:
                raise DomainError(f"twist keys must satisfy i > j, got {key}")
        self.twists = full
        if self.check:
            self.validate()

    @property
    def k(self) -> int:
        return len(self.dims)

    def twist(self, i: int, j: int) -> np.ndarray:
        """t_{i,j}: E_i (x) E_j -> E_j (x) E_i for any pair of generators."""
        if i > j:
            return self.twists[(i, j)]
        if i < j:
            return self.twists[(j, i)].conj().T
        return np.eye(self.dims[i] ** 2, dtype=complex)

    def unitarity_residual(self) -> float:
        worst = 0.0
        for t in self.twists.values():
            worst = max(worst, _spectral(t.conj().T @ t - np.eye(t.shape[0])))
        return worst

    def coherence_residual(self) -> float:
        """Largest violation of the braid relation over all triples (i, j, l).

        Both sides map E_l (x) E_j (x) E_i to E_i (x) E_j (x) E_l.
        """
        d = self.dims
        worst = 0.0
        for i, j, l in itertools.product(range(self.k), repeat=3):
            di, dj, dl = d[i], d[j], d[l]
            lhs = (
                np.kron(self.twist(j, i), np.eye(dl))
                @ np.kron(np.eye(dj), self.twist(l, i))
                @ np.kron(self.twist(l, j), np.eye(di))
            )
            rhs = (
                np.kron(np.eye(di), self.twist(l, j))
                @ np.kron(self.twist(l, i), np.eye(dj))
                @ np.kron(np.eye(dl), self.twist(j, i))
            )
            worst = max(worst, _spectral(lhs - rhs))
        return worst

    def validate(self, tol: float = UNITARY_TOL) -> None:
        u = self.unitarity_residual()
        if u > tol:
            raise CoherenceError(f"twist not unitary: residual {u:.3e}")
        c = self.coherence_residual()
        if c > tol:
            raise CoherenceError(f"braid relation fails: residual {c:.3e}")

    def is_scalar(self) -> bool:
        return all(d == 1 for d in self.dims)

    def lambda_matrix(self) -> np.ndarray:
        """Phases lambda_{i,j} of a scalar system (t_{i,j}(a(x)b) = lambda_{i,j} b(x)a)."""
        if not self.is_scalar():
            raise DomainError("lambda matrix only defined for one-dimensional fibers")
        lam = np.eye(self.k, dtype=complex)
        for (i, j), t in self.twists.items():
            lam[i, j] = t[0, 0]
            lam[j, i] = np.conj(t[0, 0])
        return lam

    def is_untwisted(self, tol: float = UNITARY_TOL) -> bool:
        return all(
            _spectral(t - perfect_shuffle(self.dims[i], self.dims[j])) <= tol
            for (i, j), t in self.twists.items()
        )

    @classmethod
    def scalar(cls, lam) -> "ProductSystem":
        """Scalar system from a k x k matrix of unimodular phases."""
        lam = np.asarray(lam, dtype=complex)
        k = lam.shape[0]
        twists = {(i, j): np.array([[lam[i, j]]]) for i in range(k) for j in range(i)}
        return cls(dims=(1,) * k, twists=twists)

    @classmethod
    def untwisted(cls, dims: Sequence[int]) -> "ProductSystem":
        return cls(dims=tuple(dims))

    # -- graded spaces -------------------------------------------------------

    def word(self, n) -> tuple[int, ...]:
        """Canonical letter sequence of grade n: n_1 copies of 0, then 1, ..."""
        n = as_index(n)
        if len(n) != self.k:
            raise DimensionError(f"grade has length {len(n)}, system has k={self.k}")
        if not n.is_nonnegative():
            raise DomainError(f"negative grade {list(n)}")
        return tuple(i for i in range(self.k) for _ in range(n[i]))

    def word_dim(self, word: Sequence[int]) -> int:
        return int(np.prod([self.dims[a] for a in word], dtype=np.int64)) if word else 1

    def grade_dim(self, n) -> int:
        return self.word_dim(self.word(n))

    def reorder_unitary(self, from_word, to_word, schedule=None) -> np.ndarray:
        """Unitary from the flattened space of ``from_word`` to that of ``to_word``.

        Letters of the same generator keep their relative order.  The map is
        a product of adjacent twists ``I (x) t_{a,b} (x) I``; ``schedule``
        picks which adjacent inversion to resolve next: ``"left"`` (default),
        ``"right"``, or a ``numpy.random.Generator`` for a random path.
        """
        from_word, to_word = tuple(from_word), tuple(to_word)
        if sorted(from_word) != sorted(to_word):
            raise DomainError(f"{from_word} is not a rearrangement of {to_word}")
        if any(a < 0 or a >= self.k for a in from_word):
            raise DomainError("letter out of range")
        cacheable = schedule is None or schedule == "left"
        key = ("reorder", from_word, to_word)
        if cacheable and key in self._cache:
            return self._cache[key]

        # stable matching: p-th occurrence of a letter goes to its p-th slot
        slots: dict[int, list[int]] = {}
        for pos, a in enumerate(to_word):
            slots.setdefault(a, []).append(pos)
        seen: dict[int, int] = {}
        rank = []
        for a in from_word:
            rank.append(slots[a][seen.get(a, 0)])
            seen[a] = seen.get(a, 0) + 1

        word = list(from_word)
        U = np.eye(self.word_dim(word), dtype=complex)
        while True:
            inversions = [p for p in range(len(word) - 1) if rank[p] > rank[p + 1]]
            if not inversions:
                break
            if schedule is None or schedule == "left":
                p = inversions[0]
            elif schedule == "right":
                p = inversions[-1]
            else:
                p = inversions[int(schedule.integers(len(inversions)))]
            a, b = word[p], word[p + 1]
            left = self.word_dim(word[:p])
            right = self.word_dim(word[p + 2 :])
            step = np.kron(np.kron(np.eye(left), self.twist(a, b)), np.eye(right))
            U = step @ U
            word[p], word[p + 1] = b, a
            rank[p], rank[p + 1] = rank[p + 1], rank[p]
        if cacheable:
            self._cache[key] = U
        return U

    def theta(self, n, m) -> np.ndarray:
        """theta_{n,m}: X(n) (x) X(m) -> X(n+m)."""
        n, m = as_index(n), as_index(m)
        return self.reorder_unitary(self.word(n) + self.word(m), self.word(n + m))

    def ampliate(self, a, M: np.ndarray, b_in, b_out, h: int) -> np.ndarray:
        """View ``I_{X(a)} (x) M`` as a map X(a+b_in) (x) H -> X(a+b_out) (x) H.

        ``M`` maps X(b_in) (x) H to X(b_out) (x) H; the identifications go
        through theta_{a,b_in} and theta_{a,b_out}.
        """
        a, b_in, b_out = as_index(a), as_index(b_in), as_index(b_out)
        Ih = np.eye(h)
        lift = np.kron(np.eye(self.grade_dim(a)), M)
        th_out = np.kron(self.theta(a, b_out), Ih)
        th_in = np.kron(self.theta(a, b_in), Ih)
        return th_out @ lift @ th_in.conj().T


def reorder_unitary(system: ProductSystem, from_word, to_word, schedule=None) -> np.ndarray:
    return system.reorder_unitary(from_word, to_word, schedule=schedule)


def theta_embed(system: ProductSystem, n, m) -> np.ndarray:
    return system.theta(n, m)

"""Completely contractive representations with scalar coefficients.

A representation of a product system on H = C^h is a k-tuple of row
contractions.  Generator i is stored as its d_i column blocks
T^{(i)}_1..T^{(i)}_{d_i}; the row operator ``T~^{(i)}`` acting on E_i (x) H
is their horizontal concatenation.  The coefficient representation of C
is scalar multiplication and has no field of its own.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import eigh

from .errors import DimensionError, DomainError, ResourceError
from .gradedspace import MultiIndex, ProductSystem, as_index, grades_in_box, subsets

DEFAULT_CAP = 20000
CONTRACTION_TOL = 1e-10
COMMUTATION_TOL = 1e-10


def spectral_norm(A: np.ndarray) -> float:
    """Largest singular value, via the top eigenvalue of the smaller Gram matrix."""
    if A.size == 0:
        return 0.0
    if min(A.shape) <= 64:
        return float(np.linalg.norm(A, 2))
    G = A.conj().T @ A if A.shape[1] <= A.shape[0] else A @ A.conj().T
    n = G.shape[0]
    top = eigh(G, eigvals_only=True, subset_by_index=[n - 1, n - 1])[0]
    return float(np.sqrt(max(top, 0.0)))


@dataclass(eq=False)
class Representation:
    system: ProductSystem
    hdim: int
    blocks: list
    cap: int = DEFAULT_CAP
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.hdim = int(self.hdim)
        if self.hdim < 1:
            raise DimensionError("hdim must be positive")
        if len(self.blocks) != self.system.k:
            raise DimensionError(f"expected {self.system.k} generators, got {len(self.blocks)}")
        out = []
        for i, gen in enumerate(self.blocks):
            if len(gen) != self.system.dims[i]:
                raise DimensionError(
                    f"generator {i + 1} needs {self.system.dims[i]} blocks, got {len(gen)}"
                )
            mats = []
            for T in gen:
                T = np.array(T, dtype=complex)
                if T.shape != (self.hdim, self.hdim):
                    raise DimensionError(f"block shape {T.shape}, expected h x h with h={self.hdim}")
                mats.append(T)
            out.append(mats)
        self.blocks = out

    @property
    def k(self) -> int:
        return self.system.k

    def tilde(self, i: int) -> np.ndarray:
        """T~^{(i)}: E_i (x) H -> H."""
        return np.hstack(self.blocks[i])

    def check_cap(self, dim: int) -> None:
        if dim > self.cap:
            raise ResourceError(f"flattened dimension {dim} exceeds cap {self.cap}")

    def conjugated(self, U: np.ndarray) -> "Representation":
        """Simultaneous unitary conjugation T -> U T U*."""
        blocks = [[U @ T @ U.conj().T for T in gen] for gen in self.blocks]
        return Representation(self.system, self.hdim, blocks, cap=self.cap)

    def scaled(self, c: Sequence[complex]) -> "Representation":
        blocks = [[c[i] * T for T in gen] for i, gen in enumerate(self.blocks)]
        return Representation(self.system, self.hdim, blocks, cap=self.cap)

    @classmethod
    def zero(cls, system: ProductSystem, hdim: int) -> "Representation":
        blocks = [[np.zeros((hdim, hdim)) for _ in range(d)] for d in system.dims]
        return cls(system, hdim, blocks)


# -- powers and symbols -------------------------------------------------------


def ttilde_word(rep: Representation, word: Sequence[int]) -> np.ndarray:
    """T~_w(xi_1 (x) ... (x) xi_r (x) h) = T(xi_1) ... T(xi_r) h."""
    word = tuple(word)
    key = ("word", word)
    if key in rep._cache:
        return rep._cache[key]
    h = rep.hdim
    rep.check_cap(rep.system.word_dim(word) * h)
    if not word:
        out = np.eye(h, dtype=complex)
    else:
        a = word[0]
        rest = ttilde_word(rep, word[1:])
        out = rep.tilde(a) @ np.kron(np.eye(rep.system.dims[a]), rest)
    rep._cache[key] = out
    return out


def ttilde_power(rep: Representation, i: int, n: int) -> np.ndarray:
    """Generalized power T~^{(i)}_n: E_i^{(x)n} (x) H -> H."""
    if n < 0:
        raise DomainError("power must be nonnegative")
    return ttilde_word(rep, (i,) * n)


def ttilde(rep: Representation, n) -> np.ndarray:
    """T~_n: X(n) (x) H -> H for n >= 0."""
    return ttilde_word(rep, rep.system.word(n))


def symbol(rep: Representation, n) -> np.ndarray:
    """T(n) = T~_{n_-}^* T~_{n_+}: X(n_+) (x) H -> X(n_-) (x) H, any n in Z^k."""
    n = as_index(n)
    if tuple(n.pos()) < tuple(n.neg()):
        # computed from the other orientation so symbol(-n) == symbol(n)^* bit for bit
        return symbol(rep, -n).conj().T
    return ttilde(rep, n.neg()).conj().T @ ttilde(rep, n.pos())


def gram_power(rep: Representation, n) -> np.ndarray:
    """T~_n^* T~_n on X(n) (x) H."""
    n = as_index(n)
    key = ("gram", n)
    if key not in rep._cache:
        T = ttilde(rep, n)
        rep._cache[key] = T.conj().T @ T
    return rep._cache[key]


def multiplicativity_residual(rep: Representation, n, m) -> float:
    """|| T~_{n+m} (theta_{n,m} (x) I) - T~_n (I_n (x) T~_m) ||."""
    n, m = as_index(n), as_index(m)
    sysm = rep.system
    lhs = ttilde(rep, n + m) @ np.kron(sysm.theta(n, m), np.eye(rep.hdim))
    rhs = ttilde(rep, n) @ np.kron(np.eye(sysm.grade_dim(n)), ttilde(rep, m))
    return spectral_norm(lhs - rhs)


# -- validation ---------------------------------------------------------------


def commutation_residual(rep: Representation, i: int, j: int) -> float:
    """Residual of T~^{(i)}(I (x) T~^{(j)}) = T~^{(j)}(I (x) T~^{(i)})(t_{i,j} (x) I_H)."""
    d, h = rep.system.dims, rep.hdim
    Ti, Tj = rep.tilde(i), rep.tilde(j)
    lhs = Ti @ np.kron(np.eye(d[i]), Tj)
    rhs = Tj @ np.kron(np.eye(d[j]), Ti) @ np.kron(rep.system.twist(i, j), np.eye(h))
    return spectral_norm(lhs - rhs)


@dataclass
class ValidationReport:
    margins: dict
    residuals: dict
    valid: bool
    contraction_tol: float = CONTRACTION_TOL
    commutation_tol: float = COMMUTATION_TOL

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "sigma_max": {str(i + 1): v for i, v in self.margins.items()},
            "commutation_residuals": {f"{i + 1},{j + 1}": v for (i, j), v in self.residuals.items()},
            "contraction_tol": self.contraction_tol,
            "commutation_tol": self.commutation_tol,
        }


def validate(
    rep: Representation,
    contraction_tol: float = CONTRACTION_TOL,
    commutation_tol: float = COMMUTATION_TOL,
) -> ValidationReport:
    margins = {i: spectral_norm(rep.tilde(i)) for i in range(rep.k)}
    residuals = {
        (i, j): commutation_residual(rep, i, j)
        for i in range(rep.k)
        for j in range(i + 1, rep.k)
    }
    ok = all(s <= 1 + contraction_tol for s in margins.values()) and all(
        r <= commutation_tol for r in residuals.values()
    )
    return ValidationReport(margins, residuals, ok, contraction_tol, commutation_tol)


# -- double commutation -------------------------------------------------------


def dc_residual(rep: Representation, i: int, j: int, domain: np.ndarray | None = None) -> float:
    """Residual of T~^{(j)*}T~^{(i)} = (I_j (x) T~^{(i)})(t_{i,j} (x) I_H)(I_i (x) T~^{(j)*}).

    Both sides map E_i (x) H to E_j (x) H.  ``domain`` (columns spanning a
    subspace of H) restricts the check to E_i (x) domain.
    """
    d, h = rep.system.dims, rep.hdim
    di, dj = d[i], d[j]
    Q = np.eye(h) if domain is None else domain
    r = Q.shape[1]
    Ti, Tj = rep.tilde(i), rep.tilde(j)
    TjQ = Tj.conj().T @ Q  # (dj h) x r
    lhs = Tj.conj().T @ np.hstack([B @ Q for B in rep.blocks[i]])
    # (I_i (x) T~_j^*)(e_l (x) Q) -> e_l (x) T~_j^* Q, indexed (l, m, h) by column (l, c)
    X = np.zeros((di, dj, h, di, r), dtype=complex)
    for l in range(di):
        X[l, :, :, l, :] = TjQ.reshape(dj, h, r)
    Y = np.einsum("ab,bkc->akc", rep.system.twist(i, j), X.reshape(di * dj, h, di * r))
    Y = Y.reshape(dj, di * h, di * r)
    rhs = np.vstack([Ti @ Y[m] for m in range(dj)])
    return spectral_norm(lhs - rhs)


@dataclass
class DoubleCommutationReport:
    residuals: dict
    doubly_commuting: bool
    tol: float

    def to_dict(self) -> dict:
        return {
            "doubly_commuting": self.doubly_commuting,
            "residuals": {f"{i + 1},{j + 1}": v for (i, j), v in self.residuals.items()},
            "tol": self.tol,
        }


def is_doubly_commuting(rep: Representation, tol: float = COMMUTATION_TOL, domain=None) -> DoubleCommutationReport:
    res = {
        (i, j): dc_residual(rep, i, j, domain)
        for i in range(rep.k)
        for j in range(rep.k)
        if i != j
    }
    return DoubleCommutationReport(res, all(r <= tol for r in res.values()), tol)


def consdc_suite(rep: Representation, box=None) -> dict:
    """Largest residual of each of the four consequences of double commutation.

    (i)   (I_m (x) T~_n)(I_n (x) T~_m^*) = T~_m^* T~_n          for n ^ m = 0
    (ii)  (I_{n-p+q} (x) T~_p^*T~_p)(I_n (x) T~_q^*T~_q)
              = I_{n-p} (x) T~_{p+q}^*T~_{p+q}                 for p <= n, p ^ q = 0
    (iii) the inductive step for subsets u of v and l outside v
    (iv)  the pairwise commutation of I (x) T~^{(j)*}T~^{(j)} factors
    Parts (i) and (ii) range over grades in ``box`` (default all ones).
    """
    k, h = rep.k, rep.hdim
    sysm = rep.system
    box = as_index(box if box is not None else [1] * k)
    zero = MultiIndex.zero(k)
    box_grades = grades_in_box(box)
    amp = sysm.ampliate

    def gp(n):
        return gram_power(rep, n)

    worst = {"i": 0.0, "ii": 0.0, "iii": 0.0, "iv": 0.0}

    for n in box_grades:
        for m in box_grades:
            if not n.meet(m).is_zero() or (n + m).total() == 0:
                continue
            lhs = amp(m, ttilde(rep, n), n, zero, h) @ amp(n, ttilde(rep, m).conj().T, zero, m, h)
            rhs = ttilde(rep, m).conj().T @ ttilde(rep, n)
            worst["i"] = max(worst["i"], spectral_norm(lhs - rhs))

    for n in box_grades:
        for p in grades_in_box(n):
            for q in box_grades:
                if not q.meet(p).is_zero() or not (n + q).leq(box):
                    continue
                lhs = amp(n - p + q, gp(p), p, p, h) @ amp(n, gp(q), q, q, h)
                rhs = amp(n - p, gp(p + q), p + q, p + q, h)
                worst["ii"] = max(worst["ii"], spectral_norm(lhs - rhs))

    for v in subsets(k):
        ev = MultiIndex.from_subset(k, v)
        for l in range(k):
            if l in v:
                continue
            el = MultiIndex.unit(k, l)
            dim = sysm.grade_dim(ev + el) * h
            factor = np.eye(dim) - amp(ev, gp(el), el, el, h)
            for r in range(len(v) + 1):
                for u in itertools.combinations(v, r):
                    eu = MultiIndex.from_subset(k, u)
                    lhs = amp(ev - eu + el, gp(eu), eu, eu, h) @ factor
                    rhs = amp(ev - eu + el, gp(eu), eu, eu, h) - amp(ev - eu, gp(eu + el), eu + el, eu + el, h)
                    worst["iii"] = max(worst["iii"], spectral_norm(lhs - rhs))

    for w in subsets(k):
        if len(w) < 2:
            continue
        ew = MultiIndex.from_subset(k, w)
        for j, l in itertools.permutations(w, 2):
            ej, el = MultiIndex.unit(k, j), MultiIndex.unit(k, l)
            Fj = amp(ew - ej, gp(ej), ej, ej, h)
            Fl = amp(ew - el, gp(el), el, el, h)
            mid = amp(ew - ej - el, gp(ej + el), ej + el, ej + el, h)
            worst["iv"] = max(worst["iv"], spectral_norm(Fj @ Fl - mid), spectral_norm(Fl @ Fj - mid))
    return worst


# -- non-commutative polynomials ---------------------------------------------


@dataclass
class NcPolynomial:
    """Finite sum of coefficients times words in the letters (i, l), 0-based."""

    terms: list

    def __post_init__(self):
        self.terms = [(complex(c), tuple((int(i), int(l)) for i, l in w)) for c, w in self.terms]

    @property
    def degree(self) -> int:
        return max((len(w) for _, w in self.terms), default=0)

    def check_letters(self, dims: Sequence[int]) -> None:
        for _, w in self.terms:
            for i, l in w:
                if not (0 <= i < len(dims) and 0 <= l < dims[i]):
                    raise DomainError(f"letter ({i + 1},{l + 1}) out of range for dims {list(dims)}")

    def evaluate(self, letter_op, dim: int) -> np.ndarray:
        """Sum of c * op(w_1) op(w_2) ... with ``letter_op(i, l)`` giving matrices."""
        out = np.zeros((dim, dim), dtype=complex)
        cache = {}
        for c, w in self.terms:
            M = np.eye(dim, dtype=complex)
            for letter in w:
                if letter not in cache:
                    cache[letter] = letter_op(*letter)
                M = M @ cache[letter]
            out += c * M
        return out

    @classmethod
    def unit(cls) -> "NcPolynomial":
        return cls([(1.0, ())])

    @classmethod
    def random(cls, dims: Sequence[int], degree: int, rng, n_terms: int = 4) -> "NcPolynomial":
        """Random complex-Gaussian coefficients on random words of length <= degree."""
        letters = [(i, l) for i, d in enumerate(dims) for l in range(d)]
        terms = []
        for _ in range(n_terms):
            length = int(rng.integers(0, degree + 1))
            w = [letters[int(rng.integers(len(letters)))] for _ in range(length)]
            c = complex(rng.normal(), rng.normal())
            terms.append((c, w))
        return cls(terms)


def evaluate_on_rep(p: NcPolynomial, rep: Representation) -> np.ndarray:
    p.check_letters(rep.system.dims)
    return p.evaluate(lambda i, l: rep.blocks[i][l], rep.hdim)

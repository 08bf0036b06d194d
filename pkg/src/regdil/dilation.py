"""Brehmer positivity, the Gram calculus on a truncation box, and the
explicit construction of the minimal regular isometric dilation.

Everything lives on the box of grades 0 <= n <= N.  The block matrices R, S,
D, L only ever sum over indices inside the box, so their identities are
exact there.  The dilation space K_N is the range of R^{1/2}; shift
operators are defined on the image of the grades that stay inside the box
after one more step and vanish on its complement.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .errors import DilationRefused, InconsistencyError, PreconditionError
from .gradedspace import MultiIndex, as_index, grades_in_box, subsets
from .representation import (
    COMMUTATION_TOL,
    Representation,
    dc_residual,
    gram_power,
    is_doubly_commuting,
    spectral_norm,
    symbol,
    ttilde,
)

log = logging.getLogger(__name__)

TOL_PSD = 1e-10
NULL_CUT = 1e-10
DILATION_TOL = 1e-8


def _hermitize(A: np.ndarray) -> np.ndarray:
    return (A + A.conj().T) / 2


# -- Brehmer defects ---------------------------------------------------------


def brehmer_defect(rep: Representation, v) -> np.ndarray:
    """Sum over u in v of (-1)^|u| I_{e(v)-e(u)} (x) T~_{e(u)}^* T~_{e(u)}, Hermitized."""
    k, h = rep.k, rep.hdim
    v = tuple(sorted(set(v)))
    ev = MultiIndex.from_subset(k, v)
    dim = rep.system.grade_dim(ev) * h
    rep.check_cap(dim)
    out = np.zeros((dim, dim), dtype=complex)
    for r in range(len(v) + 1):
        for u in itertools.combinations(v, r):
            eu = MultiIndex.from_subset(k, u)
            out += (-1) ** r * rep.system.ampliate(ev - eu, gram_power(rep, eu), eu, eu, h)
    return _hermitize(out)


@dataclass
class BrehmerCertificate:
    min_eigs: dict
    tolerances: dict
    holds: bool

    @property
    def worst(self):
        v = min(self.min_eigs, key=self.min_eigs.get)
        return v, self.min_eigs[v]

    def to_dict(self) -> dict:
        return {
            "holds": self.holds,
            "min_eigenvalues": {_subset_key(v): e for v, e in self.min_eigs.items()},
            "tolerances": {_subset_key(v): t for v, t in self.tolerances.items()},
        }


def _subset_key(v) -> str:
    return "{" + ",".join(str(i + 1) for i in v) + "}"


def check_regular_dilation(rep: Representation, tol_psd: float = TOL_PSD) -> BrehmerCertificate:
    """Test every Brehmer defect for positivity.

    A defect passes when its smallest eigenvalue is >= -tol_psd * max(1, ||D_v||).
    The empty subset is skipped (its defect is the identity).
    """
    mins, tols = {}, {}
    for v in subsets(rep.k):
        if not v:
            continue
        D = brehmer_defect(rep, v)
        w = np.linalg.eigvalsh(D)
        mins[v] = float(w[0])
        tols[v] = tol_psd * max(1.0, float(np.max(np.abs(w))))
    holds = all(mins[v] >= -tols[v] for v in mins)
    return BrehmerCertificate(mins, tols, holds)


def product_formula_check(rep: Representation, v, require_dc: bool = True) -> dict:
    """Compare the Brehmer sum with the product of the one-step defects.

    Returns the difference norm and the largest commutator among the factors
    I - I_{e(v)-e_i} (x) T~^{(i)*} T~^{(i)}.
    """
    if require_dc and not is_doubly_commuting(rep).doubly_commuting:
        raise PreconditionError("product formula needs a doubly commuting representation")
    k, h = rep.k, rep.hdim
    v = tuple(sorted(set(v)))
    ev = MultiIndex.from_subset(k, v)
    dim = rep.system.grade_dim(ev) * h
    factors = []
    for i in v:
        ei = MultiIndex.unit(k, i)
        factors.append(np.eye(dim) - rep.system.ampliate(ev - ei, gram_power(rep, ei), ei, ei, h))
    prod = np.eye(dim, dtype=complex)
    for F in factors:
        prod = prod @ F
    total = np.zeros((dim, dim), dtype=complex)
    for r in range(len(v) + 1):
        for u in itertools.combinations(v, r):
            eu = MultiIndex.from_subset(k, u)
            total += (-1) ** r * rep.system.ampliate(ev - eu, gram_power(rep, eu), eu, eu, h)
    comm = 0.0
    for A, B in itertools.combinations(factors, 2):
        comm = max(comm, spectral_norm(A @ B - B @ A))
    return {"residual": spectral_norm(total - prod), "commutator": comm}


# -- graded block matrices ---------------------------------------------------


@dataclass(eq=False)
class GradedOperator:
    """Block matrix indexed by pairs of grades in a box; missing blocks are zero."""

    box: MultiIndex
    grades: list
    dims: dict
    blocks: dict = field(default_factory=dict)

    def offsets(self) -> dict:
        out, pos = {}, 0
        for n in self.grades:
            out[n] = pos
            pos += self.dims[n]
        return out

    @property
    def size(self) -> int:
        return sum(self.dims[n] for n in self.grades)

    def dense(self) -> np.ndarray:
        off = self.offsets()
        M = np.zeros((self.size, self.size), dtype=complex)
        for (p, q), B in self.blocks.items():
            M[off[p] : off[p] + self.dims[p], off[q] : off[q] + self.dims[q]] = B
        return M


@dataclass
class GramMatrices:
    R: GradedOperator
    S: GradedOperator
    D: GradedOperator
    L: GradedOperator


def _layout(rep: Representation, box):
    box = as_index(box)
    if len(box) != rep.k:
        raise PreconditionError("box length must equal k")
    grades = grades_in_box(box)
    dims = {n: rep.system.grade_dim(n) * rep.hdim for n in grades}
    rep.check_cap(sum(dims.values()))
    return box, grades, dims


def gram_block(rep: Representation, p, q) -> np.ndarray:
    """R(p,q) = I_{p^q} (x) T(q-p): X(q) (x) H -> X(p) (x) H."""
    p, q = as_index(p), as_index(q)
    d = q - p
    return rep.system.ampliate(p.meet(q), symbol(rep, d), d.pos(), d.neg(), rep.hdim)


def build_gram(rep: Representation, box) -> GramMatrices:
    box, grades, dims = _layout(rep, box)
    k, h = rep.k, rep.hdim
    amp = rep.system.ampliate
    R = GradedOperator(box, grades, dims)
    S = GradedOperator(box, grades, dims)
    D = GradedOperator(box, grades, dims)
    L = GradedOperator(box, grades, dims)
    for p in grades:
        for q in grades:
            B = gram_block(rep, p, q)
            R.blocks[(p, q)] = B
            if p.leq(q):
                S.blocks[(p, q)] = B
    for p in grades:
        acc = np.zeros((dims[p], dims[p]), dtype=complex)
        for u in subsets(k):
            eu = MultiIndex.from_subset(k, u)
            if eu.leq(p):
                acc += (-1) ** len(u) * amp(p - eu, gram_power(rep, eu), eu, eu, h)
        D.blocks[(p, p)] = acc
        zero = MultiIndex.zero(k)
        for v in subsets(k):
            ev = MultiIndex.from_subset(k, v)
            m = p + ev
            if m.leq(box):
                L.blocks[(p, m)] = (-1) ** len(v) * amp(p, ttilde(rep, ev), ev, zero, h)
    return GramMatrices(R, S, D, L)


def verify_comp_identities(rep: Representation, box) -> dict:
    g = build_gram(rep, box)
    R, S, D, L = (x.dense() for x in (g.R, g.S, g.D, g.L))
    I = np.eye(R.shape[0])
    return {
        "R_minus_SDS": spectral_norm(R - S.conj().T @ D @ S),
        "SL_minus_I": spectral_norm(S @ L - I),
        "D_minus_LRL": spectral_norm(D - L.conj().T @ R @ L),
    }


# -- the dilation ------------------------------------------------------------


@dataclass(eq=False)
class TruncatedDilation:
    """Orthonormal coordinates for the truncated dilation space K_N.

    ``J`` maps the box space (direct sum of X(n) (x) H) onto K_N with
    J^*J = R up to the discarded null part.  ``shifts[i][l]`` is
    V^{(i)}(e^{(i)}_l) on K_N and ``domains[i]`` an orthonormal basis of the
    subspace where it is defined.
    """

    rep: Representation
    box: MultiIndex
    grades: list
    dims: dict
    J: np.ndarray
    W: np.ndarray
    shifts: list
    domains: list
    eigenvalues: np.ndarray
    cut: float
    ambiguous: bool
    rank_profile: dict
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def kdim(self) -> int:
        return self.J.shape[0]

    def slot(self, n) -> slice:
        n = as_index(n)
        start = 0
        for g in self.grades:
            if g == n:
                return slice(start, start + self.dims[g])
            start += self.dims[g]
        raise KeyError(n)

    def frame(self, n) -> np.ndarray:
        """Image of X(n) (x) H in K_N."""
        return self.J[:, self.slot(n)]

    def span_of_grades(self, pred) -> np.ndarray:
        """Orthonormal basis of the image of the grades selected by ``pred``."""
        chosen = tuple(n for n in self.grades if pred(n))
        key = ("span", chosen)
        if key not in self._cache:
            if not chosen:
                self._cache[key] = np.zeros((self.kdim, 0), dtype=complex)
            else:
                cols = np.hstack([self.frame(n) for n in chosen])
                self._cache[key] = _orth(cols, self._rank_cut())
        return self._cache[key]

    def _rank_cut(self) -> float:
        return np.sqrt(self.cut) if self.cut > 0 else 0.0

    def as_representation(self) -> Representation:
        """The shift tuple on K_N (valid only on the interior domains)."""
        return Representation(self.rep.system, self.kdim, self.shifts, cap=10**9)

    def to_dict(self) -> dict:
        return {
            "box": list(self.box),
            "kdim": self.kdim,
            "ambiguous_null_space": self.ambiguous,
            "null_cut": self.cut,
            "rank_profile": {",".join(map(str, n)): r for n, r in self.rank_profile.items()},
            "domain_dims": [int(B.shape[1]) for B in self.domains],
        }


def _orth(A: np.ndarray, cut: float) -> np.ndarray:
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, s > cut]


def _pinv(A: np.ndarray, cut: float):
    """Pseudo-inverse with an absolute singular-value cut; also returns the range basis."""
    U, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > cut
    U, s, Vh = U[:, keep], s[keep], Vh[keep]
    return (Vh.conj().T / s) @ U.conj().T, U


def construct_dilation(
    rep: Representation,
    box=None,
    null_cut: float = NULL_CUT,
    tol_psd: float = TOL_PSD,
    rng: np.random.Generator | None = None,
) -> TruncatedDilation:
    """Build the truncated minimal regular isometric dilation.

    Refuses with the Brehmer certificate when condition (D) fails.  With
    ``rng`` the coordinates of K_N are rotated by a random unitary.
    """
    cert = check_regular_dilation(rep, tol_psd)
    if not cert.holds:
        v, e = cert.worst
        raise DilationRefused(f"condition (D) fails on {_subset_key(v)}: min eigenvalue {e:.6g}", cert)
    k, h = rep.k, rep.hdim
    sysm = rep.system
    box = as_index(box if box is not None else [2] * k)
    box, grades, dims = _layout(rep, box)
    off, pos = {}, 0
    for n in grades:
        off[n] = pos
        pos += dims[n]
    total = pos
    R = np.zeros((total, total), dtype=complex)
    for p in grades:
        for q in grades:
            R[off[p] : off[p] + dims[p], off[q] : off[q] + dims[q]] = gram_block(rep, p, q)
    w, U = np.linalg.eigh(_hermitize(R))
    scale = max(1.0, float(np.max(np.abs(w))))
    cut = null_cut * scale
    if w[0] < -max(tol_psd * scale, cut):
        raise InconsistencyError(f"Gram matrix has eigenvalue {w[0]:.3e} despite condition (D)")
    keep = w > cut
    ambiguous = bool(np.any((w > cut / 10) & (w <= cut)))
    if ambiguous:
        log.warning("eigenvalues within one decade below the null cut; rank is ambiguous")
    J = np.sqrt(w[keep])[:, None] * U[:, keep].conj().T
    if rng is not None and J.shape[0] > 0:
        Q = unitary_group.rvs(J.shape[0], random_state=rng) if J.shape[0] > 1 else np.exp(
            2j * np.pi * rng.random()
        ) * np.eye(1)
        J = Q @ J
    r = J.shape[0]
    rank_cut = np.sqrt(cut)

    def cols(n):
        return slice(off[n], off[n] + dims[n])

    W = J[:, cols(MultiIndex.zero(k))]
    shifts, domains = [], []
    for i in range(k):
        ei = MultiIndex.unit(k, i)
        interior = [n for n in grades if (n + ei).leq(box)]
        if not interior:
            shifts.append([np.zeros((r, r), dtype=complex) for _ in range(sysm.dims[i])])
            domains.append(np.zeros((r, 0), dtype=complex))
            continue
        J_int = np.hstack([J[:, cols(n)] for n in interior])
        J_int_pinv, basis = _pinv(J_int, rank_cut)
        gen = []
        for l in range(sysm.dims[i]):
            pieces = []
            for n in interior:
                dn = sysm.grade_dim(n)
                th = sysm.theta(ei, n)[:, l * dn : (l + 1) * dn]
                pieces.append(J[:, cols(n + ei)] @ np.kron(th, np.eye(h)))
            gen.append(np.hstack(pieces) @ J_int_pinv)
        shifts.append(gen)
        domains.append(basis)

    profile = {}
    for n in grades:
        below = np.hstack([J[:, cols(m)] for m in grades if m.leq(n)])
        s = np.linalg.svd(below, compute_uv=False)
        profile[n] = int(np.sum(s > rank_cut))
    return TruncatedDilation(rep, box, grades, dims, J, W, shifts, domains, w, cut, ambiguous, profile)


def power_frame(dil: TruncatedDilation, n, F: np.ndarray) -> np.ndarray:
    """V~_n (I_{X(n)} (x) F) for F with columns in K_N, composed from the shifts.

    Exact when the columns of F lie in the image of grades q with q + n <= box.
    """
    word = dil.rep.system.word(n)
    out = F
    for a in reversed(word):
        out = np.hstack([V @ out for V in dil.shifts[a]])
    return out


def box_power_frame(dil: TruncatedDilation, n) -> np.ndarray:
    """V~_n restricted to X(n) (x) (image of grades q with q + n <= box)."""
    n = as_index(n)
    key = ("power", n)
    if key not in dil._cache:
        B = dil.span_of_grades(lambda q: (q + n).leq(dil.box))
        dil._cache[key] = power_frame(dil, n, B)
    return dil._cache[key]


def verify_dilation(rep: Representation, dil: TruncatedDilation, tol: float = DILATION_TOL) -> dict:
    """Residual table for the defining properties of a regular isometric dilation."""
    k, h = rep.k, rep.hdim
    sysm = rep.system
    box = dil.box
    W = dil.W
    out = {"W_isometry": spectral_norm(W.conj().T @ W - np.eye(h))}

    iso, inv, comp = {}, {}, {}
    for i in range(k):
        B = dil.domains[i]
        if B.shape[1] == 0:
            continue
        Vt = np.hstack(dil.shifts[i])
        P = B @ B.conj().T
        iso[i] = spectral_norm(Vt.conj().T @ Vt - np.kron(np.eye(sysm.dims[i]), P))
        inv[i] = max(
            spectral_norm(V.conj().T @ W - W @ T.conj().T)
            for V, T in zip(dil.shifts[i], rep.blocks[i])
        )
        comp[i] = max(
            spectral_norm(W.conj().T @ V @ W - T) for V, T in zip(dil.shifts[i], rep.blocks[i])
        )
    out["isometry"] = {str(i + 1): v for i, v in iso.items()}
    out["coinvariance"] = {str(i + 1): v for i, v in inv.items()}
    out["compression"] = {str(i + 1): v for i, v in comp.items()}

    frames = {n: power_frame(dil, n, W) for n in dil.grades}
    out["frame_consistency"] = max(spectral_norm(frames[n] - dil.frame(n)) for n in dil.grades)

    regular = 0.0
    for n in itertools.product(*(range(-b, b + 1) for b in box)):
        n = MultiIndex(n)
        lhs = frames[n.neg()].conj().T @ frames[n.pos()]
        regular = max(regular, spectral_norm(lhs - symbol(rep, n)))
    out["regularity"] = regular

    isom = 0.0
    for n in dil.grades:
        for m in dil.grades:
            isom = max(isom, spectral_norm(frames[m].conj().T @ frames[n] - gram_block(rep, m, n)))
    out["isom_lemma"] = isom

    worst = max(
        [out["W_isometry"], out["frame_consistency"], regular, isom]
        + list(iso.values())
        + list(inv.values())
        + list(comp.values())
    )
    out["max_residual"] = worst
    out["passed"] = worst <= tol
    return out


def dilation_doubly_commuting(dil: TruncatedDilation, tol: float = DILATION_TOL) -> dict:
    """Double commutation of the shifts, on the image of grades n with n + e_i + e_j <= box.

    On that subspace every truncated adjoint agrees with the full one.
    """
    k = dil.rep.k
    vrep = dil.as_representation()
    res = {}
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            eij = MultiIndex.unit(k, i) + MultiIndex.unit(k, j)
            Q = dil.span_of_grades(lambda n: (n + eij).leq(dil.box))
            if Q.shape[1] == 0:
                res[(i, j)] = None
                continue
            res[(i, j)] = dc_residual(vrep, i, j, domain=Q)
    checked = [r for r in res.values() if r is not None]
    return {
        "residuals": {f"{i + 1},{j + 1}": r for (i, j), r in res.items()},
        # k = 1 is vacuous; otherwise at least one pair must have been checked
        "doubly_commuting": (k == 1 or bool(checked)) and all(r <= tol for r in checked),
        "inconclusive_pairs": [f"{i + 1},{j + 1}" for (i, j), r in res.items() if r is None],
    }


def uniqueness_check(rep: Representation, dil_a: TruncatedDilation, dil_b: TruncatedDilation) -> dict:
    """Match two dilations of the same representation through their grade frames."""
    if dil_a.box != dil_b.box:
        raise InconsistencyError("dilations built over different boxes")
    if dil_a.kdim != dil_b.kdim:
        raise InconsistencyError(f"frame ranks differ: {dil_a.kdim} vs {dil_b.kdim}")
    for n in dil_a.grades:
        if dil_a.rank_profile[n] != dil_b.rank_profile[n]:
            raise InconsistencyError(f"rank profiles differ at grade {list(n)}")
    Ja_pinv, _ = _pinv(dil_a.J, dil_a._rank_cut())
    U = dil_b.J @ Ja_pinv
    r = dil_a.kdim
    out = {
        "frame_match": spectral_norm(U @ dil_a.J - dil_b.J),
        "unitarity": max(
            spectral_norm(U.conj().T @ U - np.eye(r)), spectral_norm(U @ U.conj().T - np.eye(r))
        ),
        "intertwining": max(
            (
                spectral_norm(U @ Va - Vb @ U)
                for ga, gb in zip(dil_a.shifts, dil_b.shifts)
                for Va, Vb in zip(ga, gb)
            ),
            default=0.0,
        ),
        "W_match": spectral_norm(U @ dil_a.W - dil_b.W),
    }
    out["max_residual"] = max(out.values())
    return out


def leading_gram_ranks(rep: Representation, box, cut: float = NULL_CUT) -> dict:
    """Rank of R restricted to grades <= n, for each grade n in the box."""
    box, grades, dims = _layout(rep, box)
    out = {}
    for n in grades:
        sub = [m for m in grades if m.leq(n)]
        Rsub = np.block([[gram_block(rep, p, q) for q in sub] for p in sub])
        w = np.linalg.eigvalsh(_hermitize(Rsub))
        scale = max(1.0, float(np.max(np.abs(w))))
        out[n] = int(np.sum(w > cut * scale))
    return out

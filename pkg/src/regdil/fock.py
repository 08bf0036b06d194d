"""Truncated Fock representation, Nica covariance, von Neumann margins, characters."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, PreconditionError
from .gradedspace import MultiIndex, ProductSystem, as_index, grades_in_box
from .representation import (
    NcPolynomial,
    Representation,
    evaluate_on_rep,
    is_doubly_commuting,
    spectral_norm,
    ttilde,
    validate,
)

LAMBDA_TOL = 1e-12
NICA_TOL = 1e-8


@dataclass(eq=False)
class TruncatedFock:
    """The direct sum of X(n) over grades 0 <= n <= box.

    Creation operators raise grade by e_i; blocks whose target grade leaves
    the box are zero, so the box is co-invariant and adjoints are exact.
    """

    system: ProductSystem
    box: MultiIndex
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.box = as_index(self.box)
        if len(self.box) != self.system.k:
            raise DomainError("box length must equal k")
        self.grades = grades_in_box(self.box)
        self.offsets = {}
        pos = 0
        for n in self.grades:
            self.offsets[n] = pos
            pos += self.system.grade_dim(n)
        self.dim = pos

    def slot(self, n) -> slice:
        n = as_index(n)
        start = self.offsets[n]
        return slice(start, start + self.system.grade_dim(n))

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def creation(self, i: int, l: int) -> np.ndarray:
        """L(e^{(i)}_l): x_n -> theta_{e_i,n}(e^{(i)}_l (x) x_n)."""
        key = (i, l)
        if key in self._cache:
            return self._cache[key]
        sysm = self.system
        ei = MultiIndex.unit(sysm.k, i)
        L = np.zeros((self.dim, self.dim), dtype=complex)
        for n in self.grades:
            target = n + ei
            if not target.leq(self.box):
                continue
            dn = sysm.grade_dim(n)
            th = sysm.theta(ei, n)
            L[self.slot(target), self.slot(n)] = th[:, l * dn : (l + 1) * dn]
        self._cache[key] = L
        return L

    def as_representation(self) -> Representation:
        blocks = [[self.creation(i, l) for l in range(d)] for i, d in enumerate(self.system.dims)]
        return Representation(self.system, self.dim, blocks, cap=max(20000, self.dim * 64))

    def interior_projection(self, i: int) -> np.ndarray:
        """Projection onto grades n with n + e_i inside the box."""
        ei = MultiIndex.unit(self.system.k, i)
        P = np.zeros((self.dim, self.dim))
        for n in self.grades:
            if (n + ei).leq(self.box):
                s = self.slot(n)
                P[s, s] = np.eye(s.stop - s.start)
        return P

    def grade_projection(self, pred) -> np.ndarray:
        P = np.zeros((self.dim, self.dim))
        for n in self.grades:
            if pred(n):
                s = self.slot(n)
                P[s, s] = np.eye(s.stop - s.start)
        return P


def creation(fock: TruncatedFock, i: int, l: int) -> np.ndarray:
    return fock.creation(i, l)


def _check_lambda(lam: np.ndarray) -> None:
    lam = np.asarray(lam)
    if lam.ndim != 2 or lam.shape[0] != lam.shape[1]:
        raise DomainError("lambda must be a square matrix")
    if np.max(np.abs(np.abs(lam) - 1)) > LAMBDA_TOL:
        raise DomainError("lambda entries must be unimodular")
    if np.max(np.abs(np.diag(lam) - 1)) > LAMBDA_TOL:
        raise DomainError("lambda_{i,i} must be 1")
    if np.max(np.abs(lam * lam.T - 1)) > LAMBDA_TOL:
        raise DomainError("lambda_{j,i} must be the inverse of lambda_{i,j}")


def scalar_shift_oracle(lam, n, i: int) -> complex:
    """Weight w with S_i delta_n = w delta_{n+e_i} for the scalar twisted shifts.

    w = prod_{j<i} lambda_{i,j}^{n_j}: moving the new letter of generator i
    past the n_j letters of each smaller generator j picks up lambda_{i,j}
    per crossing.  This is the normalization under which the shifts satisfy
    S_i S_j = lambda_{i,j} S_j S_i.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_lambda(lam)
    n = as_index(n)
    w = 1.0 + 0j
    for j in range(i):
        w *= lam[i, j] ** n[j]
    return complex(w)


# -- Nica covariance ---------------------------------------------------------


def _orth(A: np.ndarray, cut: float) -> np.ndarray:
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    return U[:, s > cut]


@dataclass
class NicaResult:
    status: str
    residual: float | None
    domain_dim: int

    @property
    def passed(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {"status": self.status, "residual": self.residual, "domain_dim": self.domain_dim}


def _range_projection(powers: np.ndarray) -> np.ndarray:
    return powers @ powers.conj().T


def nica_check(obj, n, m, tol: float = NICA_TOL) -> NicaResult:
    """Residual of V~_n V~_n^* V~_m V~_m^* = V~_{n v m} V~_{n v m}^*.

    ``obj`` is a TruncatedDilation (checked on the image of grades
    <= box - n - m, where every truncated operator agrees with the full
    one), a TruncatedFock (exact on the whole box), or an isometric
    Representation.
    """
    from .dilation import TruncatedDilation, box_power_frame

    n, m = as_index(n), as_index(m)
    nm = n.join(m)
    if isinstance(obj, TruncatedDilation):
        room = obj.box - n - m
        if not room.is_nonnegative():
            return NicaResult("inconclusive", None, 0)
        Q = obj.span_of_grades(lambda p: p.leq(room))
        if Q.shape[1] == 0:
            return NicaResult("inconclusive", None, 0)
        Pn = _range_projection(box_power_frame(obj, n))
        Pm = _range_projection(box_power_frame(obj, m))
        Pnm = _range_projection(box_power_frame(obj, nm))
        res = spectral_norm((Pn @ Pm - Pnm) @ Q)
        return NicaResult("ok" if res <= tol else "fail", res, Q.shape[1])

    if isinstance(obj, TruncatedFock):
        rep = obj.as_representation()
    else:
        rep = obj
        iso = max(
            spectral_norm(rep.tilde(i).conj().T @ rep.tilde(i) - np.eye(rep.system.dims[i] * rep.hdim))
            for i in range(rep.k)
        )
        if iso > tol:
            raise PreconditionError(f"representation is not isometric (residual {iso:.3e})")
    Pn = _range_projection(ttilde(rep, n))
    Pm = _range_projection(ttilde(rep, m))
    Pnm = _range_projection(ttilde(rep, nm))
    res = spectral_norm(Pn @ Pm - Pnm)
    return NicaResult("ok" if res <= tol else "fail", res, rep.hdim)


# -- von Neumann inequality ----------------------------------------------------


@dataclass
class VnReport:
    poly: NcPolynomial
    norm_T: float
    sizes: list
    norm_S_by_N: list
    margin: float
    monotone: bool
    doubly_commuting: bool

    def to_dict(self) -> dict:
        return {
            "poly": poly_to_json(self.poly),
            "norm_T": self.norm_T,
            "sizes": list(self.sizes),
            "norm_S_by_N": list(self.norm_S_by_N),
            "margin": self.margin,
            "monotone": self.monotone,
            "doubly_commuting": self.doubly_commuting,
        }


def fock_poly_norm(system: ProductSystem, p: NcPolynomial, box) -> float:
    fock = TruncatedFock(system, box)
    p.check_letters(system.dims)
    return spectral_norm(p.evaluate(fock.creation, fock.dim))


def vn_margin(
    rep: Representation,
    p: NcPolynomial,
    sizes=(1, 2, 3, 4),
    require_dc: bool = True,
    mono_tol: float = 1e-10,
) -> VnReport:
    """Compare ||p(T)|| with ||p(L)|| on the Fock boxes (N, ..., N) for N in ``sizes``.

    The Fock norms are lower bounds for the norm on the full Fock space and
    increase with N; ``margin`` uses the largest N.
    """
    p.check_letters(rep.system.dims)
    dc = is_doubly_commuting(rep).doubly_commuting
    if require_dc and not dc:
        raise PreconditionError("von Neumann comparison needs a doubly commuting representation")
    norm_T = spectral_norm(evaluate_on_rep(p, rep))
    sizes = sorted(int(s) for s in sizes)
    norms = [fock_poly_norm(rep.system, p, [N] * rep.k) for N in sizes]
    monotone = all(b >= a - mono_tol for a, b in zip(norms, norms[1:]))
    return VnReport(p, norm_T, sizes, norms, norms[-1] - norm_T, monotone, dc)


def poly_to_json(p: NcPolynomial) -> dict:
    return {
        "terms": [
            {"coef": [c.real, c.imag], "word": [[i + 1, l + 1] for i, l in w]}
            for c, w in p.terms
        ]
    }


# -- characters --------------------------------------------------------------


@dataclass
class CharacterResult:
    accepted: bool
    violations: list
    near_boundary: bool

    def to_dict(self) -> dict:
        return {
            "accepted": self.accepted,
            "violations": self.violations,
            "near_boundary": self.near_boundary,
        }


def character_set(lam, t, tol: float = LAMBDA_TOL) -> CharacterResult:
    """Decide whether t is a character of the scalar-twist tensor algebra.

    Accept iff |t_i| <= 1 for every i and t_i t_j = 0 whenever
    lambda_{i,j} != 1.  Pairs where |lambda_{i,j} - 1| is within 100*tol of
    the equality tolerance are flagged as near the boundary.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_lambda(lam)
    t = np.asarray(t, dtype=complex)
    k = lam.shape[0]
    if t.shape != (k,):
        raise DomainError(f"point must have {k} coordinates")
    violations = []
    near = False
    for i in range(k):
        if abs(t[i]) > 1 + tol:
            violations.append({"kind": "modulus", "i": i + 1, "value": float(abs(t[i]))})
    for i in range(k):
        for j in range(i + 1, k):
            gap = abs(lam[i, j] - 1)
            if tol < gap <= 100 * tol:
                near = True
            if gap > tol and abs(t[i] * t[j]) > tol:
                violations.append(
                    {"kind": "product", "i": i + 1, "j": j + 1, "value": float(abs(t[i] * t[j]))}
                )
    return CharacterResult(not violations, violations, near)


def character_representation(system: ProductSystem, t) -> Representation:
    """The h = 1 representation of a scalar system given by the point t."""
    return Representation(system, 1, [[np.array([[complex(x)]])] for x in t])


def character_is_representation(system: ProductSystem, t) -> bool:
    rep = character_representation(system, t)
    return validate(rep).valid and is_doubly_commuting(rep).doubly_commuting


# -- structural checks -------------------------------------------------------------


def fock_checks(system: ProductSystem, box) -> dict:
    """Residuals of the structural identities of the truncated creation operators.

    ``toeplitz``: L~^{(i)*} L~^{(i)} = I (x) P_i on the interior grades of
    generator i.  ``commutation``: the twisted commutation relation (exact on
    the whole box, since both sides vanish once the grade leaves it).
    ``oracle``: largest deviation from the closed-form scalar weights, for
    scalar systems.  ``nica``: Nica covariance for each pair e_i, e_j.
    """
    from .representation import commutation_residual

    fock = TruncatedFock(system, box)
    rep = fock.as_representation()
    k = system.k
    out = {"dim": fock.dim}
    toep = 0.0
    for i in range(k):
        P = fock.interior_projection(i)
        Lt = rep.tilde(i)
        lhs = np.kron(np.eye(system.dims[i]), P) @ Lt.conj().T @ Lt @ np.kron(np.eye(system.dims[i]), P)
        toep = max(toep, spectral_norm(lhs - np.kron(np.eye(system.dims[i]), P)))
    out["toeplitz"] = toep
    out["commutation"] = max(
        (commutation_residual(rep, i, j) for i in range(k) for j in range(k) if i != j), default=0.0
    )
    if system.is_scalar():
        lam = system.lambda_matrix()
        worst = 0.0
        for i in range(k):
            L = fock.creation(i, 0)
            ei = MultiIndex.unit(k, i)
            for n in fock.grades:
                if (n + ei).leq(fock.box):
                    entry = L[fock.offsets[n + ei], fock.offsets[n]]
                    worst = max(worst, abs(entry - scalar_shift_oracle(lam, n, i)))
        out["oracle"] = worst
    nica = {}
    for i in range(k):
        for j in range(i + 1, k):
            r = nica_check_fock_interior(fock, MultiIndex.unit(k, i), MultiIndex.unit(k, j))
            nica[f"{i + 1},{j + 1}"] = r.to_dict()
    out["nica"] = nica
    return out


def nica_check_fock_interior(fock: TruncatedFock, n, m, tol: float = NICA_TOL) -> NicaResult:
    """Nica covariance for the creation operators, restricted to grades p with p + n + m <= box."""
    n, m = as_index(n), as_index(m)
    room = fock.box - n - m
    if not room.is_nonnegative():
        return NicaResult("inconclusive", None, 0)
    rep = fock.as_representation()
    nm = n.join(m)
    P = fock.grade_projection(lambda p: p.leq(room))

    def proj(a):
        Pa = fock.grade_projection(lambda p: (p + a).leq(fock.box))
        G = ttilde(rep, a) @ np.kron(np.eye(fock.system.grade_dim(a)), Pa)
        return G @ G.conj().T

    res = spectral_norm((proj(n) @ proj(m) - proj(nm)) @ P)
    return NicaResult("ok" if res <= tol else "fail", res, int(round(np.trace(P).real)))

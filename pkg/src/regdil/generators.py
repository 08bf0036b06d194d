"""Random product systems and instance factories for representations.

Each factory returns a representation that is valid by construction; the
doubly commuting ones are doubly commuting by construction as well.  Tests
re-check both properties numerically rather than trusting this module.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.stats import unitary_group

from .errors import DomainError, UnsupportedError
from .gradedspace import MultiIndex, ProductSystem, perfect_shuffle
from .representation import Representation, spectral_norm

ROOT_TOL = 1e-12
MAX_ORDER = 24


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * rng.random()) * np.eye(1)
    return unitary_group.rvs(n, random_state=rng)


def _cgauss(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _phases(rng, size) -> np.ndarray:
    return np.exp(2j * np.pi * rng.random(size))


# -- product systems -----------------------------------------------------------


def random_scalar_lambda(k: int, rng, roots_of_unity: int | None = None) -> np.ndarray:
    """Random k x k phase matrix with lambda_{j,i} = conj(lambda_{i,j})."""
    lam = np.eye(k, dtype=complex)
    for i in range(k):
        for j in range(i):
            if roots_of_unity:
                z = np.exp(2j * np.pi * rng.integers(roots_of_unity) / roots_of_unity)
            else:
                z = np.exp(2j * np.pi * rng.random())
            lam[i, j], lam[j, i] = z, np.conj(z)
    return lam


def diagonal_system(dims, rng) -> ProductSystem:
    """Twists t_{i,j} = flip composed with a diagonal of random phases."""
    twists = {}
    for i in range(len(dims)):
        for j in range(i):
            n = dims[i] * dims[j]
            twists[(i, j)] = perfect_shuffle(dims[i], dims[j]) @ np.diag(_phases(rng, n))
    return ProductSystem(tuple(dims), twists)


def _perm_twist(perm: np.ndarray, d_i: int, d_j: int) -> np.ndarray:
    """Permutation twist: column l*d_j+m goes to row perm[l*d_j+m] in E_j (x) E_i."""
    n = d_i * d_j
    t = np.zeros((n, n), dtype=complex)
    t[perm, np.arange(n)] = 1.0
    return t


def permutation_system(dims, rng, max_tries: int = 5000) -> ProductSystem:
    """Random coherent family of permutation twists.

    For k = 2 every permutation works; for k >= 3 permutations are drawn
    until the braid relation holds (the flip is always a fallback).
    """
    dims = tuple(dims)
    k = len(dims)
    pairs = [(i, j) for i in range(k) for j in range(i)]
    for _ in range(max_tries):
        twists = {
            (i, j): _perm_twist(rng.permutation(dims[i] * dims[j]), dims[i], dims[j])
            for i, j in pairs
        }
        sysm = ProductSystem(dims, twists, check=False)
        if sysm.coherence_residual() <= 1e-12:
            sysm.validate()
            return sysm
    return ProductSystem(dims)


def dense_system(dims, rng) -> ProductSystem:
    """Coherent family with dense twists.

    k = 2: a Haar random unitary.  k >= 3: a diagonal family conjugated by
    random local basis changes U_i of each fiber.
    """
    dims = tuple(dims)
    if len(dims) == 2:
        n = dims[0] * dims[1]
        return ProductSystem(dims, {(1, 0): random_unitary(n, rng)})
    base = diagonal_system(dims, rng)
    U = [random_unitary(d, rng) for d in dims]
    twists = {
        (i, j): np.kron(U[j], U[i]) @ t @ np.kron(U[i], U[j]).conj().T
        for (i, j), t in base.twists.items()
    }
    return ProductSystem(dims, twists)


def random_system(kind: str, dims, rng) -> ProductSystem:
    if kind == "untwisted":
        return ProductSystem(tuple(dims))
    if kind == "diagonal":
        return diagonal_system(dims, rng)
    if kind == "permutation":
        return permutation_system(dims, rng)
    if kind == "dense":
        return dense_system(dims, rng)
    if kind == "scalar":
        return ProductSystem.scalar(random_scalar_lambda(len(dims), rng))
    raise DomainError(f"unknown system kind {kind!r}")


# -- representations -----------------------------------------------------------


def _row_contraction(d: int, h: int, rng, norm: float) -> list:
    blocks = [_cgauss(rng, h, h) for _ in range(d)]
    s = spectral_norm(np.hstack(blocks))
    return [norm * B / s for B in blocks]


def _weighted_shift_rep(system: ProductSystem, h: int, rng) -> Representation:
    """Scalar twisted system: one generator is a weighted shift, the rest diagonal.

    With S e_a = w_a e_{a+1} and D_j = diag(g_j lambda_{i0,j}^{-a}) one gets
    S D_j = lambda_{i0,j} D_j S.  Diagonal pairs with lambda != 1 must not
    both be nonzero, so one of each such pair is switched off.
    """
    k = system.k
    lam = system.lambda_matrix()
    i0 = int(rng.integers(k))
    S = np.diag(rng.uniform(0.2, 1.0, h - 1), -1).astype(complex) if h > 1 else np.zeros((1, 1))
    active = [j for j in range(k) if j != i0]
    rng.shuffle(active)
    keep = []
    for j in active:
        if all(abs(lam[j, q] - 1) <= ROOT_TOL for q in keep):
            keep.append(j)
    blocks = []
    for j in range(k):
        if j == i0:
            T = S
        elif j in keep:
            g = rng.uniform(0.2, 1.0) * np.exp(2j * np.pi * rng.random())
            T = np.diag([g * lam[i0, j] ** (-a) for a in range(h)])
        else:
            T = np.zeros((h, h), dtype=complex)
        blocks.append([T])
    U = random_unitary(h, rng)
    return Representation(system, h, blocks).conjugated(U)


def _nilpotent_fock_rep(system: ProductSystem, h: int, rng) -> Representation:
    """Compression of Fock (x) C^m to (grade 0 (x) C^m) + span(v), v of grade one.

    The subspace is co-invariant, so compressing the creation operators gives
    a representation for any twist family.  When h >= 3 one coordinate is
    split off and carries a single random generator instead.
    """
    k = system.k
    solo = h >= 3
    hn = h - 1 if solo else h
    m = hn - 1
    blocks = [[np.zeros((h, h), dtype=complex) for _ in range(d)] for d in system.dims]
    if m >= 1:
        v = _cgauss(rng, sum(system.dims), m)
        v /= np.linalg.norm(v)
        row = 0
        for i, d in enumerate(system.dims):
            for l in range(d):
                blocks[i][l][m, :m] = v[row].conj()
                row += 1
    if solo:
        i0 = int(rng.integers(k))
        for l, x in enumerate(_cgauss(rng, system.dims[i0])):
            blocks[i0][l][h - 1, h - 1] = x
        vals = np.array([blocks[i0][l][h - 1, h - 1] for l in range(system.dims[i0])])
        scale = rng.uniform(0.3, 1.0) / np.linalg.norm(vals)
        for l in range(system.dims[i0]):
            blocks[i0][l][h - 1, h - 1] *= scale
    U = random_unitary(h, rng)
    return Representation(system, h, blocks).conjugated(U)


def random_cc(system: ProductSystem, h: int, rng, degree: int = 2) -> Representation:
    """Random valid representation on C^h.

    Untwisted systems use polynomials in one random matrix, each generator
    scaled by a random factor over its row norm.  Scalar twisted systems use
    a weighted shift against diagonals; other systems a co-invariant Fock
    compression.
    """
    if system.is_untwisted():
        A = _cgauss(rng, h, h)
        A /= spectral_norm(A)
        powers = [np.linalg.matrix_power(A, p) for p in range(degree + 1)]
        blocks = []
        for d in system.dims:
            gen = [sum(c * P for c, P in zip(_cgauss(rng, degree + 1), powers)) for _ in range(d)]
            norm = spectral_norm(np.hstack(gen))
            f = rng.uniform(0.3, 1.0)
            blocks.append([f * B / norm if norm > 0 else B for B in gen])
        return Representation(system, h, blocks)
    if system.is_scalar():
        return _weighted_shift_rep(system, h, rng)
    return _nilpotent_fock_rep(system, h, rng)


def clock_shift(q: int):
    """Clock Z and shift X on C^q with Z X = omega X Z, omega = exp(2 pi i / q)."""
    w = np.exp(2j * np.pi / q)
    Z = np.diag(w ** np.arange(q))
    X = np.roll(np.eye(q), 1, axis=0).astype(complex)
    return Z, X


def root_order(lam, q: int | None = None) -> int:
    """Smallest q with lambda_{i,j}^q = 1 for all entries (or check the given q)."""
    lam = np.asarray(lam, dtype=complex)
    orders = [q] if q else range(1, MAX_ORDER + 1)
    for r in orders:
        if np.max(np.abs(lam**r - 1)) <= 1e-9:
            return int(r)
    raise UnsupportedError("lambda entries are not roots of unity of a supported order")


def scaled_twisted_unitaries(lam, c, q: int | None = None, rng=None, extra: int = 1) -> Representation:
    """T_i = c_i W_i with unitaries W_i W_j = lambda_{i,j} W_j W_i.

    One C^q leg per pair i < j with lambda_{i,j} = omega^a != 1: W_i acts by
    Z^a and W_j by X there.  With ``rng`` an extra C^extra leg carries
    commuting diagonal unitaries.
    """
    lam = np.asarray(lam, dtype=complex)
    k = lam.shape[0]
    c = np.asarray(c, dtype=complex)
    if c.shape != (k,):
        raise DomainError(f"need {k} scale factors")
    if np.any(np.abs(c) > 1 + 1e-12):
        raise DomainError("scale factors must satisfy |c_i| <= 1")
    q = root_order(lam, q)
    Z, X = clock_shift(q)
    legs = []
    for i in range(k):
        for j in range(i + 1, k):
            a = int(round(np.angle(lam[i, j]) * q / (2 * np.pi))) % q
            if a:
                legs.append((i, j, a))
    factors = [[np.eye(q)] * len(legs) for _ in range(k)]
    for p, (i, j, a) in enumerate(legs):
        factors[i][p] = np.linalg.matrix_power(Z, a)
        factors[j][p] = X
    blocks = []
    for i in range(k):
        W = np.eye(1, dtype=complex)
        for F in factors[i]:
            W = np.kron(W, F)
        if rng is not None and extra > 1:
            W = np.kron(W, np.diag(_phases(rng, extra)))
        blocks.append([c[i] * W])
    h = blocks[0][0].shape[0]
    return Representation(ProductSystem.scalar(lam), h, blocks)


def tensor_doubly_commuting(dims, hs, rng, norms=None) -> Representation:
    """Untwisted tuple acting on separate tensor legs: T^{(i)}_l = I (x) C^{(i)}_l (x) I."""
    dims, hs = tuple(dims), tuple(hs)
    if len(dims) != len(hs):
        raise DomainError("dims and hs must have equal length")
    k = len(dims)
    if norms is None:
        norms = rng.uniform(0.2, 1.0, k)
    h = int(np.prod(hs))
    blocks = []
    for i in range(k):
        left, right = int(np.prod(hs[:i])), int(np.prod(hs[i + 1 :]))
        C = _row_contraction(dims[i], hs[i], rng, norms[i])
        blocks.append([np.kron(np.kron(np.eye(left), B), np.eye(right)) for B in C])
    return Representation(ProductSystem(dims), h, blocks)


def _is_permutation(t: np.ndarray) -> bool:
    return bool(
        np.allclose(np.abs(t), np.round(np.abs(t)), atol=1e-12)
        and np.allclose(np.abs(t).sum(axis=0), 1)
        and np.allclose(t, np.abs(t), atol=1e-12)
    )


def _uniform_pair_ok(system: ProductSystem, i: int, j: int) -> bool:
    """True when uniform weights on generators i and j doubly commute.

    With T^{(i)}_l = x_i B, T^{(j)}_m = x_j B' (B, B' commuting normal), the
    adjoint relation holds iff for every l the twist sends e_l (x) e_s,
    s = 1..d_j, onto all d_j basis vectors of E_j in the first leg.
    """
    di, dj = system.dims[i], system.dims[j]
    t = system.twist(i, j)
    rows = np.argmax(np.abs(t), axis=0)
    for l in range(di):
        if {int(rows[l * dj + s]) // di for s in range(dj)} != set(range(dj)):
            return False
    return True


def kgraph_permutation(system: ProductSystem, rng, pieces: int = 2, hpiece: int = 1) -> Representation:
    """Doubly commuting tuple for a permutation-twist system.

    A direct sum of pieces.  On each piece a random set of generators is
    active, with T^{(i)}_l = c_i d_i^{-1/2} B_i (same for all l) and B_i
    commuting normal contractions; pairs whose twist does not allow uniform
    weights are never active together.
    """
    k = system.k
    for t in system.twists.values():
        if not _is_permutation(t):
            raise DomainError("kgraph_permutation needs permutation twists")
    ok = {(i, j): _uniform_pair_ok(system, i, j) and _uniform_pair_ok(system, j, i)
          for i in range(k) for j in range(k) if i != j}
    h = pieces * hpiece
    blocks = [[np.zeros((h, h), dtype=complex) for _ in range(d)] for d in system.dims]
    for p in range(pieces):
        order = list(rng.permutation(k))
        active = []
        for i in order:
            if rng.random() < 0.8 and all(ok[(i, j)] for j in active):
                active.append(int(i))
        Q = random_unitary(hpiece, rng)
        sl = slice(p * hpiece, (p + 1) * hpiece)
        for i in active:
            z = rng.uniform(0, 1, hpiece) * _phases(rng, hpiece)
            B = Q @ np.diag(z) @ Q.conj().T
            x = rng.uniform(0.2, 1.0) / np.sqrt(system.dims[i])
            for l in range(system.dims[i]):
                blocks[i][l][sl, sl] = x * B
    return Representation(system, h, blocks)


def scalar_tuple(system: ProductSystem, t=None, rng=None) -> Representation:
    """One-dimensional representation of a scalar system.

    Without ``t`` a random point of the closed polydisc is drawn and, for
    each pair with lambda != 1, one of the two coordinates is set to zero.
    """
    if not system.is_scalar():
        raise DomainError("scalar_tuple needs one-dimensional fibers")
    k = system.k
    if t is None:
        rng = rng if rng is not None else np.random.default_rng()
        t = np.sqrt(rng.random(k)) * _phases(rng, k)
        lam = system.lambda_matrix()
        for i, j in itertools.combinations(range(k), 2):
            if abs(lam[i, j] - 1) > ROOT_TOL and t[i] != 0 and t[j] != 0:
                t[i if rng.random() < 0.5 else j] = 0
    t = np.asarray(t, dtype=complex)
    if t.shape != (k,):
        raise DomainError(f"point must have {k} coordinates")
    return Representation(system, 1, [[np.array([[x]])] for x in t])


def nilpotent_triple(c: float = 0.9) -> Representation:
    """Untwisted k = 3 with T_1 = T_2 = T_3 = c N, N the 2 x 2 nilpotent Jordan block."""
    N = np.array([[0, 1], [0, 0]], dtype=complex)
    return Representation(ProductSystem((1, 1, 1)), 2, [[c * N] for _ in range(3)])


def random_polynomial(dims, rng, degree: int = 3, n_terms: int = 4):
    from .representation import NcPolynomial

    return NcPolynomial.random(dims, degree, rng, n_terms=n_terms)


KINDS = ("random_cc", "scaled_twisted_unitaries", "tensor_doubly_commuting", "kgraph_permutation", "scalar_tuple")


def generate(kind: str, seed: int = 0, params: dict | None = None) -> Representation:
    """Instance factory keyed by name; ``params`` are passed to the builder.

    Common params: ``k``, ``dims``, ``h``, ``system`` (a ProductSystem or a
    system kind name).  Missing params are drawn from the seeded generator.
    """
    p = dict(params or {})
    rng = np.random.default_rng(seed)
    if kind == "random_cc":
        dims = p.get("dims") or [1] * p.get("k", 2)
        sysm = p.get("system", "untwisted")
        if isinstance(sysm, str):
            sysm = random_system(sysm, dims, rng)
        return random_cc(sysm, p.get("h", 2), rng)
    if kind == "scaled_twisted_unitaries":
        lam = p.get("lam")
        k = p.get("k", 2)
        if lam is None:
            lam = random_scalar_lambda(k, rng, roots_of_unity=p.get("q", 3))
        lam = np.asarray(lam, dtype=complex)
        c = p.get("c")
        if c is None:
            c = rng.uniform(0, 1, lam.shape[0])
        return scaled_twisted_unitaries(lam, c, q=p.get("q"), rng=rng, extra=p.get("extra", 1))
    if kind == "tensor_doubly_commuting":
        dims = p.get("dims") or [1] * p.get("k", 2)
        hs = p.get("hs") or [int(x) for x in rng.integers(1, 3, len(dims))]
        return tensor_doubly_commuting(dims, hs, rng)
    if kind == "kgraph_permutation":
        dims = p.get("dims") or [2] * p.get("k", 2)
        sysm = p.get("system") or permutation_system(dims, rng)
        return kgraph_permutation(sysm, rng, pieces=p.get("pieces", 2), hpiece=p.get("hpiece", 1))
    if kind == "scalar_tuple":
        sysm = p.get("system")
        if sysm is None:
            lam = p.get("lam")
            if lam is None:
                lam = random_scalar_lambda(p.get("k", 2), rng)
            sysm = ProductSystem.scalar(lam)
        return scalar_tuple(sysm, p.get("t"), rng)
    raise DomainError(f"unknown generator kind {kind!r}; expected one of {KINDS}")

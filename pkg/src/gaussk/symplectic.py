"""Real symplectic linear algebra in the (x1, p1, ..., xm, pm) ordering.

Matrices are plain ``numpy`` arrays; functions that require a symplectic
input validate it and raise :class:`NotSymplecticError` otherwise.
"""

from typing import NamedTuple

import numpy as np
import scipy.linalg
import scipy.optimize

from .config import DEFAULT
from .errors import BranchError, DimensionError, InvariantError, NotSymplecticError

_J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def omega(m):
    """Standard symplectic form: ``m`` copies of [[0, 1], [-1, 0]] on the diagonal."""
    if m < 1:
        raise DimensionError(f"number of modes must be positive, got {m}")
    return np.kron(np.eye(m), _J2)


def n_modes(M):
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] % 2:
        raise DimensionError(f"symplectic matrices have even dimension, got {M.shape[0]}")
    return M.shape[0] // 2


def symplectic_defect(M):
    m = n_modes(M)
    W = omega(m)
    return np.max(np.abs(M @ W @ M.T - W))


def is_symplectic(M, tol=None):
    """True iff the max-entry deviation of M Omega M^T from Omega is at most ``tol``."""
    tol = DEFAULT.symplectic_tol if tol is None else tol
    return bool(symplectic_defect(np.asarray(M, dtype=float)) <= tol)


def check_symplectic(M, tol=None):
    """Return ``M`` as a float array, raising if it is not symplectic."""
    tol = DEFAULT.symplectic_tol if tol is None else tol
    M = np.asarray(M, dtype=float)
    defect = symplectic_defect(M)
    if defect > tol:
        raise NotSymplecticError(f"symplectic defect {defect:.3e} exceeds {tol:.1e}")
    det = np.linalg.det(M)
    if abs(det - 1.0) > max(DEFAULT.det_tol, DEFAULT.det_tol * abs(det)):
        raise NotSymplecticError(f"determinant {det!r} differs from 1")
    return M


def symplectic_inverse(S, check=True):
    """Closed-form inverse ``Omega^T S^T Omega``."""
    S = check_symplectic(S) if check else np.asarray(S, dtype=float)
    W = omega(S.shape[0] // 2)
    return W.T @ S.T @ W


def group_commutator(A, B):
    """``A B A^-1 B^-1`` with exact symplectic inverses."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise DimensionError(f"shape mismatch {A.shape} vs {B.shape}")
    return A @ B @ symplectic_inverse(A, check=False) @ symplectic_inverse(B, check=False)


def op_norm(M):
    return float(np.linalg.norm(M, 2))


def hs_norm(M):
    return float(np.linalg.norm(M, "fro"))


# ---------------------------------------------------------------------------
# Building blocks


def rotation(theta):
    """Planar rotation block in the convention used for ``D(theta)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [-s, c]])


def squeezer(r):
    return np.diag([np.exp(r), np.exp(-r)])


def hyperbolic(a):
    c, s = np.cosh(a), np.sinh(a)
    return np.array([[c, s], [s, c]])


def direct_sum(blocks):
    return scipy.linalg.block_diag(*blocks)


def block_rotation(thetas):
    return direct_sum([rotation(t) for t in np.atleast_1d(thetas)])


def mode_permutation(m):
    """Index order taking (x1, p1, ..., xm, pm) to (x1, ..., xm, p1, ..., pm)."""
    return np.concatenate([np.arange(0, 2 * m, 2), np.arange(1, 2 * m, 2)])


def cyclic_mode_shift(m):
    """Passive gate sending mode j to mode j + 1 (mod m)."""
    return np.kron(np.roll(np.eye(m), 1, axis=0), np.eye(2))


def unitary_to_orthosymplectic(U):
    """Real orthogonal symplectic image of an m x m unitary."""
    U = np.asarray(U, dtype=complex)
    m = U.shape[0]
    A, B = U.real, U.imag
    xxpp = np.block([[A, B], [-B, A]])
    perm = mode_permutation(m)
    out = np.empty_like(xxpp)
    out[np.ix_(perm, perm)] = xxpp
    return out


def orthosymplectic_to_unitary(O):
    O = np.asarray(O, dtype=float)
    m = O.shape[0] // 2
    perm = mode_permutation(m)
    xxpp = O[np.ix_(perm, perm)]
    return xxpp[:m, :m] + 1j * xxpp[:m, m:]


# ---------------------------------------------------------------------------
# Decompositions


class PolarParts(NamedTuple):
    orthogonal: np.ndarray
    positive: np.ndarray


class OrthoBlockForm(NamedTuple):
    conjugator: np.ndarray
    angles: np.ndarray

    def reconstruct(self):
        K = self.conjugator
        return K @ block_rotation(self.angles) @ K.T


class PositiveDiagForm(NamedTuple):
    conjugator: np.ndarray
    lambdas: np.ndarray

    def reconstruct(self):
        diag = np.ravel(np.column_stack([self.lambdas, 1.0 / self.lambdas]))
        K = self.conjugator
        return K @ np.diag(diag) @ K.T


def polar_decompose(S):
    """Split ``S = O P`` with O orthogonal symplectic and P positive symplectic.

    Computed from the SVD ``S = U diag(s) V^T`` as ``O = U V^T`` and
    ``P = V diag(s) V^T``. If ``||S - I|| <= eps`` then both factors are within
    ``3 eps`` of the identity.
    """
    S = check_symplectic(S)
    U, s, Vt = np.linalg.svd(S)
    O = U @ Vt
    P = (Vt.T * s) @ Vt
    P = 0.5 * (P + P.T)
    return PolarParts(O, P)


def _is_orthogonal(M, tol):
    return np.max(np.abs(M @ M.T - np.eye(M.shape[0]))) <= tol


def orth_block_diagonalize(O, tol=None):
    """Write an orthogonal symplectic ``O`` as ``K D(theta) K^T``.

    The unitary image of ``O`` is Schur-diagonalized; its eigenphases become the
    rotation angles and its eigenbasis maps back to an orthogonal symplectic K.
    Angles lie in (-pi, pi].
    """
    tol = DEFAULT.recon_tol if tol is None else tol
    O = check_symplectic(O, tol=max(tol, DEFAULT.symplectic_tol))
    if not _is_orthogonal(O, tol):
        raise InvariantError("matrix is not orthogonal")
    U = orthosymplectic_to_unitary(O)
    T, W = scipy.linalg.schur(U, output="complex")
    angles = np.angle(np.diag(T))
    K = unitary_to_orthosymplectic(W)
    form = OrthoBlockForm(K, angles)
    resid = np.max(np.abs(form.reconstruct() - O))
    if resid > tol:
        raise InvariantError(f"block form reconstruction residual {resid:.3e}")
    return form


def _symplectic_gram_schmidt(V, W):
    """Orthonormal Lagrangian pairs (u, Omega^T u) spanning an Omega-invariant subspace."""
    V = V.copy()
    pairs = []
    while V.shape[1] > 0:
        u = V[:, 0]
        u = u / np.linalg.norm(u)
        w = W.T @ u
        # stay inside the subspace (it is Omega-invariant up to rounding)
        w = V @ (V.T @ w) if V.shape[1] > 1 else w
        w -= u * (u @ w)
        w /= np.linalg.norm(w)
        pairs.append((u, w))
        basis = np.column_stack([u, w])
        rest = V - basis @ (basis.T @ V)
        q, sv, _ = np.linalg.svd(rest, full_matrices=False)
        V = q[:, sv > 1e-8]
    return pairs


def williamson_positive(P, tol=None):
    """Diagonalize a positive symplectic ``P`` as ``K diag(l1, 1/l1, ...) K^T``.

    Returns lambdas >= 1 sorted in descending order (stable in block index).
    """
    tol = DEFAULT.recon_tol if tol is None else tol
    P = check_symplectic(P, tol=max(tol, DEFAULT.symplectic_tol))
    if np.max(np.abs(P - P.T)) > tol:
        raise InvariantError("matrix is not symmetric")
    m = P.shape[0] // 2
    W = omega(m)
    evals, evecs = np.linalg.eigh(0.5 * (P + P.T))
    if evals[0] <= 0:
        raise InvariantError("matrix is not positive definite")

    order = np.argsort(-evals, kind="stable")
    evals, evecs = evals[order], evecs[:, order]
    near_one = np.abs(np.log(evals)) <= DEFAULT.degeneracy_tol
    big = (evals > 1.0) & ~near_one

    pairs = []
    lambdas = []
    for k in np.flatnonzero(big)[:m]:
        u = evecs[:, k]
        pairs.append((u, W.T @ u))
        lambdas.append(evals[k])
    if near_one.any():
        for u, w in _symplectic_gram_schmidt(evecs[:, near_one], W):
            pairs.append((u, w))
            lambdas.append(1.0)
    if len(pairs) != m:
        raise InvariantError("eigenvalues do not pair up as (l, 1/l)")

    K = np.column_stack([v for pair in pairs for v in pair])
    form = PositiveDiagForm(K, np.asarray(lambdas))
    resid = np.max(np.abs(form.reconstruct() - P))
    if resid > tol * max(1.0, np.max(evals)):
        raise InvariantError(f"Williamson reconstruction residual {resid:.3e}")
    return form


def log_positive_symplectic(P):
    """Symmetric Hamiltonian-algebra logarithm of a positive symplectic matrix."""
    K, lambdas = williamson_positive(P)
    t = np.log(lambdas)
    diag = np.ravel(np.column_stack([t, -t]))
    L = K @ np.diag(diag) @ K.T
    return 0.5 * (L + L.T)


def log_orthogonal_symplectic(O, branch_tol=1e-12):
    """Antisymmetric principal logarithm of an orthogonal symplectic matrix."""
    K, angles = orth_block_diagonalize(O)
    if np.any(np.abs(angles) >= np.pi - branch_tol):
        raise BranchError("rotation angle pi has no principal logarithm; split the factor first")
    gen = direct_sum([a * _J2 for a in angles])
    L = K @ gen @ K.T
    return 0.5 * (L - L.T)


def principal_split(O):
    """Factor an orthogonal symplectic ``O = H R`` with both factors off the branch cut.

    ``H`` is the half rotation ``K D(theta/2) K^T``; since it commutes with
    ``O`` the remainder is the same half rotation.
    """
    K, angles = orth_block_diagonalize(O)
    half = K @ block_rotation(angles / 2) @ K.T
    return half, half


def expm(A):
    return scipy.linalg.expm(A)


# ---------------------------------------------------------------------------
# Random samplers (used by tests, nets and verification suites)


def random_hamiltonian_generator(m, rng, scale=1.0):
    """Random element of the symplectic Lie algebra, ``Omega @ Q`` with Q symmetric."""
    A = rng.uniform(-scale, scale, size=(2 * m, 2 * m))
    return omega(m) @ (0.5 * (A + A.T))


def random_unitary(m, rng):
    Z = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_orthogonal_symplectic(m, rng):
    return unitary_to_orthosymplectic(random_unitary(m, rng))


def random_positive_symplectic(m, rng, max_log=1.0):
    K = random_orthogonal_symplectic(m, rng)
    t = rng.uniform(0.0, max_log, size=m)
    diag = np.ravel(np.column_stack([np.exp(t), np.exp(-t)]))
    P = K @ np.diag(diag) @ K.T
    return 0.5 * (P + P.T)


def random_orthogonal_near_identity(m, rng, eps, exact=False):
    """Orthogonal symplectic with ``||O - I|| <= eps``; one angle sits on the boundary if ``exact``."""
    top = 2 * np.arcsin(min(eps, 2.0) / 2)
    angles = rng.uniform(-top, top, size=m)
    if exact:
        angles[rng.integers(m)] = top * rng.choice([-1.0, 1.0])
    K = random_orthogonal_symplectic(m, rng)
    return K @ block_rotation(angles) @ K.T


def random_positive_near_identity(m, rng, eps, exact=False):
    """Positive symplectic with ``||P - I|| <= eps``; the largest stretch hits eps if ``exact``."""
    top = np.log1p(eps)
    t = rng.uniform(0.0, top, size=m)
    if exact:
        t[rng.integers(m)] = top
    K = random_orthogonal_symplectic(m, rng)
    diag = np.ravel(np.column_stack([np.exp(t), np.exp(-t)]))
    P = K @ np.diag(diag) @ K.T
    return 0.5 * (P + P.T)


def random_symplectic(m, rng, max_log=1.0):
    return random_orthogonal_symplectic(m, rng) @ random_positive_symplectic(m, rng, max_log)


def random_symplectic_near_identity(m, rng, eps, exact=False):
    """Random symplectic with ``||S - I|| <= eps`` (``== eps`` when ``exact``).

    Walks along a random one-parameter subgroup and stops at the first time the
    distance from the identity reaches ``eps``.
    """
    G = random_hamiltonian_generator(m, rng)
    G /= op_norm(G)
    I = np.eye(2 * m)

    def excess(t):
        return op_norm(expm(t * G) - I) - eps

    step = eps / 4
    lo, hi = 0.0, step
    while excess(hi) < 0:
        lo, hi = hi, hi + step
    t = scipy.optimize.brentq(excess, lo, hi, xtol=1e-15)
    if not exact:
        t *= rng.uniform(0.0, 1.0)
    return expm(t * G)


# ---------------------------------------------------------------------------
# JSON


def matrix_to_json(M):
    M = np.asarray(M, dtype=float)
    return {"m": M.shape[0] // 2, "rows": [[float(x) for x in row] for row in M]}


def matrix_from_json(obj):
    M = np.array(obj["rows"], dtype=float)
    if n_modes(M) != int(obj["m"]):
        raise DimensionError("declared mode count does not match matrix size")
    return M

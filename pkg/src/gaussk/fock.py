"""Truncated Fock-space oracle for energy-constrained distinguishability.

Quadratures are ``x = (a + a^dag)/sqrt2`` and ``p = (a - a^dag)/(i sqrt2)`` so
the vacuum has ``<x^2> = <p^2> = 1/2``.  All operators are dense complex
arrays of dimension ``cutoff**m``.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.special import gammaln

from .errors import InfeasibleError, ParameterError
from .symplectic import check_symplectic, omega, mode_permutation

TAIL_TOL = 1e-8


def _embed(op, j, m, cutoff):
    out = np.ones((1, 1), dtype=complex)
    for k in range(m):
        out = np.kron(out, op if k == j else np.eye(cutoff))
    return out


def annihilation(mode_index, m, cutoff):
    if cutoff < 2:
        raise ParameterError("cutoff must be at least 2")
    if not 0 <= mode_index < m:
        raise ParameterError(f"mode index {mode_index} out of range for {m} modes")
    a = np.diag(np.sqrt(np.arange(1, cutoff, dtype=float)), 1).astype(complex)
    return _embed(a, mode_index, m, cutoff)


def creation(mode_index, m, cutoff):
    return annihilation(mode_index, m, cutoff).conj().T


def number_operator(m, cutoff):
    n = np.arange(cutoff, dtype=float)
    total = np.zeros(cutoff**m)
    for j in range(m):
        total += np.real(np.diag(_embed(np.diag(n), j, m, cutoff)))
    return np.diag(total).astype(complex)


def quadratures(m, cutoff):
    """Truncated ``[x1, p1, ..., xm, pm]``."""
    out = []
    for j in range(m):
        a = annihilation(j, m, cutoff)
        ad = a.conj().T
        out += [(a + ad) / math.sqrt(2), (a - ad) / (1j * math.sqrt(2))]
    return out


def quadrature_square(which, mode_index, m, cutoff):
    """``x^2`` or ``p^2`` built from ``a^2``, ``a^dag^2`` and ``a^dag a``.

    Squaring the truncated quadrature would corrupt the top level; this form
    is exact on every retained Fock state.
    """
    a = annihilation(mode_index, m, cutoff)
    ad = a.conj().T
    n = ad @ a
    eye = np.eye(len(a))
    sign = 1 if which == "x" else -1
    return 0.5 * (sign * (a @ a + ad @ ad) + 2 * n + eye)


def displacement_operator(z, m, cutoff):
    """``exp(i z^T Omega R)`` on the truncated space."""
    z = np.asarray(z, dtype=float).ravel()
    if z.size != 2 * m:
        raise ParameterError(f"displacement needs {2 * m} entries, got {z.size}")
    if z @ z / 2 > 0.25 * cutoff:
        warnings.warn(f"cutoff {cutoff} is small for |z|^2/2 = {z @ z / 2:.2f}", stacklevel=2)
    R = quadratures(m, cutoff)
    coeff = z @ omega(m)
    gen = sum(c * Rk for c, Rk in zip(coeff, R))
    return scipy.linalg.expm(1j * gen)


def unitarity_defect(U):
    return float(np.linalg.norm(U.conj().T @ U - np.eye(len(U)), 2))


# ---------------------------------------------------------------------------
# Gaussian unitaries


def symplectic_to_quadratic(S):
    """``(X, Y)`` with ``exp(-i H)`` acting on quadratures as ``S``, up to a global phase.

    ``H = sum X_jk a_j^dag a_k + Y_jk a_j a_k + conj(Y_jk) a_j^dag a_k^dag``.
    Writes ``log S = Omega G`` with G symmetric, so ``H = R^T G R / 2`` up to a
    constant, and re-expresses G in ladder operators.
    """
    S = check_symplectic(S, 1e-8)
    m = S.shape[0] // 2
    s = scipy.linalg.logm(S)
    if np.max(np.abs(np.imag(s))) > 1e-8:
        raise ParameterError("matrix has no real logarithm on the principal branch; split it into polar factors")
    s = np.real(s)
    G = omega(m).T @ s
    G = 0.5 * (G + G.T)
    perm = mode_permutation(m)
    G = G[np.ix_(perm, perm)]
    Gxx, Gxp, Gpp = G[:m, :m], G[:m, m:], G[m:, m:]
    X = 0.5 * (Gxx + Gpp) + 0.5j * (Gxp.T - Gxp)
    Y = 0.25 * (Gxx - Gpp) - 0.25j * (Gxp + Gxp.T)
    return X, Y


def quadratic_hamiltonian(X, Y, m, cutoff):
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    a = [annihilation(j, m, cutoff) for j in range(m)]
    ad = [op.conj().T for op in a]
    H = np.zeros((cutoff**m, cutoff**m), dtype=complex)
    for j in range(m):
        for k in range(m):
            H += X[j, k] * ad[j] @ a[k] + Y[j, k] * a[j] @ a[k] + np.conj(Y[j, k]) * ad[j] @ ad[k]
    return 0.5 * (H + H.conj().T)


def quadratic_unitary(X, Y, m, cutoff):
    """``exp(-i H)`` for the truncated quadratic Hamiltonian."""
    return scipy.linalg.expm(-1j * quadratic_hamiltonian(X, Y, m, cutoff))


def gaussian_unitary(S, cutoff):
    X, Y = symplectic_to_quadratic(S)
    return quadratic_unitary(X, Y, S.shape[0] // 2, cutoff)


# ---------------------------------------------------------------------------
# states


def _tail_check(mass, what):
    if mass > TAIL_TOL:
        warnings.warn(f"{what}: {mass:.2e} probability above the cutoff", stacklevel=3)


def squeezed_vacuum_state(r, cutoff, phi=0.0):
    """Product of single-mode squeezed vacua, renormalized on the truncated space.

    Mode j has amplitude ``(-tanh r_j)^n sqrt(binom(2n, n)) / 2^n / sqrt(cosh r_j)``
    on ``|2n>``, giving ``<x^2> = e^{-2r}/2`` and ``<N> = sinh(r)^2``.  ``phi``
    rotates each mode by ``exp(-i phi N)``.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    phis = np.broadcast_to(np.asarray(phi, dtype=float), r.shape)
    psi = np.ones(1, dtype=complex)
    tail = 0.0
    for rj, pj in zip(r, phis):
        n = np.arange(0, (cutoff + 1) // 2)
        t = math.tanh(abs(rj))
        amp = np.zeros(len(n))
        amp[0] = 1.0
        if t > 0:
            amp = np.exp(0.5 * (gammaln(2 * n + 1) - 2 * gammaln(n + 1)) - n * math.log(2) + n * math.log(t))
        amp = amp / math.sqrt(math.cosh(rj)) * (-math.copysign(1.0, rj)) ** n
        v = np.zeros(cutoff, dtype=complex)
        v[0::2] = amp * np.exp(-2j * pj * n)
        tail = max(tail, 1 - float(np.vdot(v, v).real))
        psi = np.kron(psi, v)
    _tail_check(tail, "squeezed vacuum")
    return psi / np.linalg.norm(psi)


def geometric_state(mu, cutoff):
    """``sqrt(1 - mu) sum mu^{n/2} |n>``, renormalized on the truncated space."""
    if not 0 <= mu < 1:
        raise ParameterError(f"mu must lie in [0, 1), got {mu}")
    n = np.arange(cutoff)
    v = math.sqrt(1 - mu) * mu ** (n / 2)
    _tail_check(mu**cutoff, "geometric state")
    return (v / np.linalg.norm(v)).astype(complex)


def expectation(psi, A):
    return complex(np.vdot(psi, A @ psi))


# ---------------------------------------------------------------------------
# constrained optimization over pure states


@dataclass
class ConstrainedOptimum:
    value: float
    state: np.ndarray
    energy: float
    restarts_used: int
    converged: bool
    dual_bound: float = None

    def to_dict(self):
        return {
            "value": self.value,
            "energy": self.energy,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "dual_bound": self.dual_bound,
        }


def _realify(A):
    A = np.asarray(A, dtype=complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def _to_complex(y):
    d = len(y) // 2
    return y[:d] + 1j * y[d:]


def _to_real(psi):
    return np.concatenate([psi.real, psi.imag])


def _hermitian_parts(W):
    W = np.asarray(W, dtype=complex)
    return 0.5 * (W + W.conj().T), (W - W.conj().T) / 2j


def _feasible_start(psi, H, E, ground):
    """Pull ``psi`` toward the ground state of H until ``<H> <= E``."""
    psi = psi / np.linalg.norm(psi)
    if np.vdot(psi, H @ psi).real <= E:
        return psi
    # <H> is continuous along the segment to the ground state
    lo, hi = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        v = (1 - mid) * psi + mid * ground
        v = v / np.linalg.norm(v)
        if np.vdot(v, H @ v).real <= E:
            hi = mid
        else:
            lo = mid
    v = (1 - hi) * psi + hi * ground
    return v / np.linalg.norm(v)


def _dual_nu(A, B, H, E, h0):
    """Certified lower bound on nu_E from ``lambda_min(u1 A + u2 B + mu H) - mu E``.

    Returns (bound, (phi, mu)).  The bound is exact when the joint numerical
    range of (A, B, H) is convex, which holds for dimension >= 3.
    """
    mu_hi = 2.0 * (np.linalg.norm(A, 2) + np.linalg.norm(B, 2)) / max(E - h0, 1e-12) + 1.0

    def g(phi, mu):
        M = math.cos(phi) * A + math.sin(phi) * B + mu * H
        return np.linalg.eigvalsh(M)[0] - mu * E

    def best_mu(phi):
        res = scipy.optimize.minimize_scalar(lambda mu: -g(phi, mu), bounds=(0.0, mu_hi), method="bounded", options={"xatol": 1e-12})
        cand = [(-res.fun, res.x), (g(phi, 0.0), 0.0)]
        return max(cand)

    phis = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    vals = [best_mu(p) for p in phis]
    k = int(np.argmax([v[0] for v in vals]))
    res = scipy.optimize.minimize_scalar(
        lambda p: -best_mu(p)[0], bounds=(phis[k] - 2 * np.pi / 48, phis[k] + 2 * np.pi / 48), method="bounded", options={"xatol": 1e-10}
    )
    val, mu = best_mu(res.x)
    if vals[k][0] > val:
        val, mu, phi = vals[k][0], vals[k][1], phis[k]
    else:
        phi = res.x
    nm = scipy.optimize.minimize(
        lambda p: -g(p[0], max(p[1], 0.0)), [phi, mu], method="Nelder-Mead", options={"xatol": 1e-13, "fatol": 1e-16}
    )
    if -nm.fun > val:
        val, phi, mu = -nm.fun, nm.x[0], max(nm.x[1], 0.0)
    return max(0.0, float(val)), (float(phi), float(mu)), mu_hi


def _crossing_ground_states(M0, H, E, mu_hi, iterations=60):
    """Ground vectors of ``M0 + mu H`` on both sides of the mu where their energy drops to E."""

    def ground(mu):
        return np.linalg.eigh(M0 + mu * H)[1][:, 0]

    def energy(v):
        return np.vdot(v, H @ v).real

    v = ground(0.0)
    if energy(v) <= E:
        return [v]
    lo, hi = 0.0, mu_hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if energy(ground(mid)) <= E:
            hi = mid
        else:
            lo = mid
    return [ground(hi), ground(lo)]


def _subspace_minimizer(vectors, W, H, E):
    """Minimize ``|<W>|`` over unit states in the span of ``vectors`` with ``<H> <= E``."""
    Q, _ = np.linalg.qr(np.column_stack(vectors))
    A, B = _hermitian_parts(Q.conj().T @ W @ Q)
    Ar, Br, Hr = _realify(A), _realify(B), _realify(Q.conj().T @ H @ Q)

    def f(y):
        a, b = y @ Ar @ y, y @ Br @ y
        return a * a + b * b, 4 * (a * (Ar @ y) + b * (Br @ y))

    cons = [
        {"type": "eq", "fun": lambda y: y @ y - 1, "jac": lambda y: 2 * y},
        {"type": "ineq", "fun": lambda y: E - y @ Hr @ y, "jac": lambda y: -2 * (Hr @ y)},
    ]
    best = None
    k = Q.shape[1]
    for j in range(k):
        for c0 in (np.eye(k)[j], (np.eye(k)[j] + np.eye(k)[(j + 1) % k]) / math.sqrt(2)):
            res = scipy.optimize.minimize(f, _to_real(c0.astype(complex)), jac=True, method="SLSQP", constraints=cons, options={"ftol": 1e-18, "maxiter": 200})
            if best is None or res.fun < best.fun:
                best = res
    return Q @ _to_complex(best.x / np.linalg.norm(best.x))


def nu_E(W, H, E, restarts=2000, rng_seed=0, seeds=(), gap_tol=1e-8, n_random_min=4, patience=10):
    """Upper estimate of ``inf |<psi|W|psi>|`` over unit ``psi`` with ``<psi|H|psi> <= E``.

    Multi-restart SLSQP from deterministic seeds (caller-supplied states,
    dual eigenvectors) followed by random low-energy starts.  A dual
    certificate is computed first; restarts stop once the primal value is
    within ``gap_tol`` of it, or after ``patience`` restarts in a row
    without improvement.
    """
    W = np.asarray(W, dtype=complex)
    H = np.asarray(H, dtype=complex)
    d = len(W)
    hev, hvec = np.linalg.eigh(0.5 * (H + H.conj().T))
    if hev[0] > E:
        raise InfeasibleError(f"lowest energy {hev[0]:.3e} exceeds the budget E={E}")
    ground = hvec[:, 0]
    A, B = _hermitian_parts(W)
    Ar, Br, Hr = _realify(A), _realify(B), _realify(H)
    rng = np.random.default_rng(rng_seed)

    dual, (phi, mu), mu_hi = _dual_nu(A, B, H, E, hev[0])

    def f(y):
        a, b = y @ Ar @ y, y @ Br @ y
        return a * a + b * b, 4 * (a * (Ar @ y) + b * (Br @ y))

    cons = [
        {"type": "eq", "fun": lambda y: y @ y - 1, "jac": lambda y: 2 * y},
        {"type": "ineq", "fun": lambda y: E - y @ Hr @ y, "jac": lambda y: -2 * (Hr @ y)},
    ]

    def polish(psi):
        v0 = _feasible_start(psi, H, E, ground)
        res = scipy.optimize.minimize(f, _to_real(v0), jac=True, method="SLSQP", constraints=cons, options={"ftol": 1e-16, "maxiter": 300})
        v = _to_complex(res.x / np.linalg.norm(res.x))
        if np.vdot(v, H @ v).real > E + 1e-9:
            v = _feasible_start(v, H, E, ground)
        # SLSQP is not monotone; keep the start if it was better
        return min((abs(np.vdot(u, W @ u)), k, u) for k, u in enumerate((v0, v)))[::2]

    starts = [np.asarray(s, dtype=complex) for s in seeds]
    M0 = math.cos(phi) * A + math.sin(phi) * B
    crossing = _crossing_ground_states(M0, H, E, mu_hi)
    evec = np.linalg.eigh(M0 + mu * H)[1]
    low_dual = [evec[:, k] for k in range(min(3, d))]
    starts += crossing[:1] + low_dual
    if d > 2:
        starts.append(_subspace_minimizer(crossing + low_dual[:2], W, H, E))
    low = hvec[:, hev <= max(E, hev[0]) * 4 + 1][:, : max(2, min(d, 12))]

    best = None
    used = 0
    stale = 0
    while used < restarts:
        if used < len(starts):
            psi0 = starts[used]
        else:
            c = rng.normal(size=low.shape[1]) + 1j * rng.normal(size=low.shape[1])
            psi0 = low @ c
        val, v = polish(psi0)
        used += 1
        if best is None or val < best[0] - 1e-13:
            best = (val, v)
            stale = 0
        else:
            stale += 1
        if used < len(starts):
            continue
        if best[0] - dual <= gap_tol or (used >= len(starts) + n_random_min and stale >= patience):
            break
    val, v = best
    return ConstrainedOptimum(
        value=float(min(1.0, val)),
        state=v,
        energy=float(np.vdot(v, H @ v).real),
        restarts_used=used,
        converged=bool(val - dual <= gap_tol),
        dual_bound=dual,
    )


def ec_diamond_unitaries(U, V, H, E, restarts=2000, rng_seed=0, seeds=()):
    """``2 sqrt(1 - nu_E(U^dag V)^2)``: a lower estimate of the EC diamond distance."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    opt = nu_E(U.conj().T @ V, H, E, restarts, rng_seed, seeds)
    return 2 * math.sqrt(max(0.0, 1 - opt.value**2)), opt


def constrained_max_expectation(A, H, E, seeds=()):
    """``max <A>`` over unit states with ``<H> <= E``, with a dual upper bound.

    The dual ``min_{mu >= 0} lambda_max(A - mu H) + mu E`` is exact for two
    Hermitian observables; the primal is recovered by SLSQP from the dual
    eigenvectors and any supplied seeds.
    """
    A = 0.5 * (A + A.conj().T)
    H = 0.5 * (H + H.conj().T)
    hev, hvec = np.linalg.eigh(H)
    if hev[0] > E:
        raise InfeasibleError(f"lowest energy {hev[0]:.3e} exceeds the budget E={E}")
    ground = hvec[:, 0]

    def dual(mu):
        return np.linalg.eigvalsh(A - mu * H)[-1] + mu * E

    mu_hi = 2 * np.linalg.norm(A, 2) / max(E - hev[0], 1e-12) + 1.0
    res = scipy.optimize.minimize_scalar(dual, bounds=(0.0, mu_hi), method="bounded", options={"xatol": 1e-12})
    mu = res.x
    upper = min(res.fun, dual(0.0))

    Ar, Hr = _realify(A), _realify(H)
    cons = [
        {"type": "eq", "fun": lambda y: y @ y - 1, "jac": lambda y: 2 * y},
        {"type": "ineq", "fun": lambda y: E - y @ Hr @ y, "jac": lambda y: -2 * (Hr @ y)},
    ]
    starts = [np.asarray(s, dtype=complex) for s in seeds]
    for m_ in (mu * (1 - 1e-6), mu, mu * (1 + 1e-6) + 1e-9):
        starts.append(np.linalg.eigh(A - m_ * H)[1][:, -1])
    best = None
    for psi in starts:
        y0 = _to_real(_feasible_start(psi, H, E, ground))
        r = scipy.optimize.minimize(
            lambda y: (-(y @ Ar @ y), -2 * (Ar @ y)), y0, jac=True, method="SLSQP", constraints=cons, options={"ftol": 1e-15, "maxiter": 500}
        )
        v = _to_complex(r.x / np.linalg.norm(r.x))
        v = _feasible_start(v, H, E, ground)
        val = np.vdot(v, A @ v).real
        if best is None or val > best[0]:
            best = (val, v)
    val, v = best
    return ConstrainedOptimum(
        value=float(val),
        state=v,
        energy=float(np.vdot(v, H @ v).real),
        restarts_used=len(starts),
        converged=bool(upper - val <= 1e-6),
        dual_bound=float(upper),
    )


def evolve_and_distance(H1, H2, psi, t):
    """Trace distance ``sqrt(1 - |<psi| e^{i H1 t} e^{-i H2 t} |psi>|^2)`` of the two evolved states.

    This is half the trace norm of the difference of the two projectors.
    """
    psi = np.asarray(psi, dtype=complex)
    if abs(np.linalg.norm(psi) - 1) > 1e-10:
        raise ParameterError("state must be normalized")
    a = scipy.linalg.expm(-1j * t * np.asarray(H1)) @ psi
    b = scipy.linalg.expm(-1j * t * np.asarray(H2)) @ psi
    return math.sqrt(max(0.0, 1 - abs(np.vdot(a, b)) ** 2))

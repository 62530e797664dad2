"""Closed-form energy-constrained distinguishability bounds and speed limits.

Scale conventions: ``"diamond"`` values live in [0, 2] (the full norm),
``"halved"`` values in [0, 1].  Every report says which one it uses.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import IdenticalChannelsError, NoFiniteBoundError, ParameterError
from .symplectic import check_symplectic, hs_norm, op_norm, symplectic_inverse

# diffusion constant for the harmonic Brownian-motion example
BROWNIAN_KAPPA = 0.2047

_PAIR_CONST = math.sqrt(6) + math.sqrt(10)


@dataclass
class EnergyConstraint:
    E: float
    hamiltonian_tag: str = "total_photon_number"

    def __post_init__(self):
        if self.E < 0:
            raise ParameterError(f"energy must be non-negative, got {self.E}")
        if self.hamiltonian_tag not in ("total_photon_number", "abs_H", "custom"):
            raise ParameterError(f"unknown hamiltonian tag {self.hamiltonian_tag!r}")


@dataclass
class DriftParams:
    alpha: float
    beta: float
    gamma: float = 1.0
    delta_rb: float = 0.0

    def __post_init__(self):
        for k in ("alpha", "beta", "gamma", "delta_rb"):
            if getattr(self, k) < 0:
                raise ParameterError(f"{k} must be non-negative")

    def to_dict(self):
        return {"alpha": self.alpha, "beta": self.beta, "gamma": self.gamma, "delta_rb": self.delta_rb}


@dataclass
class BoundReport:
    name: str
    lower: float = None
    upper: float = None
    params: dict = field(default_factory=dict)
    formula_ref: str = ""
    scale: str = "diamond"
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lower is not None and self.upper is not None and self.lower > self.upper + 1e-12:
            raise ValueError(f"{self.name}: lower {self.lower} exceeds upper {self.upper}")

    def to_dict(self):
        return {
            "name": self.name,
            "lower": self.lower,
            "upper": self.upper,
            "params": self.params,
            "formula_ref": self.formula_ref,
            "scale": self.scale,
            "extra": self.extra,
        }


def _nonneg(name, x):
    if x < 0:
        raise ParameterError(f"{name} must be non-negative, got {x}")


def photon_energy_factor(E):
    """``f(E) = (sqrt(E) + sqrt(E + 1)) / sqrt(2)``."""
    _nonneg("E", E)
    return (math.sqrt(E) + math.sqrt(E + 1)) / math.sqrt(2)


def displacement_bounds(z, w, E):
    """Halved EC diamond distance between displacements by ``z`` and ``w``."""
    z = np.asarray(z, dtype=float).ravel()
    w = np.asarray(w, dtype=float).ravel()
    if z.shape != w.shape or z.size % 2:
        raise ParameterError(f"displacements need equal even length, got {z.size} and {w.size}")
    f = photon_energy_factor(E)
    dist = float(np.linalg.norm(z - w))
    lower = math.sqrt(-math.expm1(-(f * dist) ** 2))
    upper = math.sin(min(f * dist, math.pi / 2))
    return BoundReport(
        "displacement",
        lower,
        upper,
        {"z": z.tolist(), "w": w.tolist(), "E": E},
        "sqrt(1 - exp(-f(E)^2 |z-w|^2)) <= d <= sin(min(f(E)|z-w|, pi/2))",
        "halved",
        {"f": f, "distance": dist},
    )


def symplectic_pair_bound(S, S_prime, E, m=None):
    """Upper bound on the EC diamond distance of two Gaussian unitaries with no displacement."""
    S = check_symplectic(S, 1e-8)
    Sp = check_symplectic(S_prime, 1e-8)
    if S.shape != Sp.shape:
        raise ParameterError(f"shape mismatch {S.shape} vs {Sp.shape}")
    m = S.shape[0] // 2 if m is None else m
    _nonneg("E", E)
    T = symplectic_inverse(Sp, check=False) @ S
    tn = op_norm(T)
    raw = (
        2
        * math.sqrt((_PAIR_CONST + 5 * math.sqrt(2) * m) * (E + 1))
        * (math.sqrt(math.pi / (tn + 1)) + math.sqrt(2 * tn))
        * math.sqrt(hs_norm(T - np.eye(len(T))))
    )
    return BoundReport(
        "symplectic_pair",
        None,
        min(raw, 2.0),
        {"m": m, "E": E},
        "2 sqrt((sqrt6+sqrt10+5 sqrt2 m)(E+1)) (sqrt(pi/(|T|+1)) + sqrt(2|T|)) sqrt(|T-I|_2), T = S'^-1 S",
        "diamond",
        {"raw": raw, "T_op_norm": tn},
    )


def sk_prefactors(m, r):
    F = 2 * math.sqrt(math.sqrt(2 * m) * (_PAIR_CONST + 5 * math.sqrt(2) * m))
    G = (math.sqrt(math.pi) + math.sqrt(2) * (r + 2)) * math.sqrt(r + 2)
    return F, G


def sk_theorem_bound(m, r, E, delta):
    """EC diamond distance reachable by gate words approximating a target to ``delta``."""
    for k, v in (("m", m), ("r", r), ("E", E), ("delta", delta)):
        _nonneg(k, v)
    F, G = sk_prefactors(m, r)
    raw = F * G * math.sqrt(E + 1) * math.sqrt(delta)
    return BoundReport(
        "sk_theorem",
        None,
        min(raw, 2.0),
        {"m": m, "r": r, "E": E, "delta": delta},
        "F(m) G(r) sqrt(E+1) sqrt(delta)",
        "diamond",
        {"raw": raw, "F": F, "G": G},
    )


# ---------------------------------------------------------------------------
# speed limits


def _nu(dp, E):
    return math.sqrt(dp.alpha * (dp.gamma * E + dp.delta_rb))


def closed_drift_bound(dp, E, t):
    """Diamond-scale drift ``2 sqrt2 sqrt(gamma E + delta) sqrt(alpha t) + sqrt2 beta t``."""
    _nonneg("t", t)
    _nonneg("E", E)
    return 2 * math.sqrt(2) * _nu(dp, E) * math.sqrt(t) + math.sqrt(2) * dp.beta * t


def closed_vector_drift(dp, E, t):
    """Bound on ``||(U_t - V_t) psi||``: the diamond drift divided by sqrt(2)."""
    _nonneg("t", t)
    return 2 * _nu(dp, E) * math.sqrt(t) + dp.beta * t


def closed_speed_limit_time(dp, E, d):
    """Smallest ``t`` at which the vector-norm drift ``2 nu sqrt(t) + beta t`` can reach ``d``.

    ``d`` is a vector-norm distance ``||(U_t - V_t) psi||``; converting a
    trace or diamond distance into it is left to the caller.
    """
    if not 0 <= d <= 2:
        raise ParameterError(f"d must lie in [0, 2], got {d}")
    if d == 0:
        return 0.0
    nu = _nu(dp, E)
    if nu == 0 and dp.beta == 0:
        raise NoFiniteBoundError("beta = 0 and alpha (gamma E + delta) = 0: the drift never grows")
    # rationalized root of beta s^2 + 2 nu s = d, stable as beta -> 0
    root = d / (math.hypot(math.sqrt(d) * math.sqrt(dp.beta), nu) + nu)
    return root * root


def open_drift_bound(alpha, beta, E, t):
    """``4 (2^{1/4} sqrt(alpha E t) + beta t)``."""
    if not 0 <= alpha < 1:
        raise ParameterError(f"need 0 <= alpha < 1, got {alpha}")
    _nonneg("beta", beta)
    _nonneg("t", t)
    _nonneg("E", E)
    return 4 * (2**0.25 * math.sqrt(alpha * E * t) + beta * t)


def open_speed_limit_time(alpha, beta, E, d):
    """Exact inverse of :func:`open_drift_bound` in ``t``."""
    if not 0 <= alpha < 1:
        raise ParameterError(f"need 0 <= alpha < 1, got {alpha}")
    _nonneg("beta", beta)
    if not 0 <= d <= 2:
        raise ParameterError(f"d must lie in [0, 2], got {d}")
    if d == 0:
        return 0.0
    k = 2**0.25 * math.sqrt(alpha * E)
    if k == 0 and beta == 0:
        raise NoFiniteBoundError("alpha E = 0 and beta = 0: the drift never grows")
    # rationalized root of 4 beta s^2 + 4 k s = d with s = sqrt(t)
    root = d / (2 * (math.hypot(k, math.sqrt(beta) * math.sqrt(d)) + k))
    # times beyond the float range come back as inf
    return root * root


def quadratic_alpha_beta(d_diag, X, Y):
    """Relative-boundedness constants of ``H' - H`` for quadratic ``H' = a^T X a + ...`` against ``sum d_j a_j^dag a_j``."""
    d = np.asarray(d_diag, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(X, dtype=complex))
    Y = np.atleast_2d(np.asarray(Y, dtype=complex))
    m = d.size
    if np.any(d <= 0):
        raise ParameterError("diagonal frequencies must be positive")
    if X.shape != (m, m) or Y.shape != (m, m):
        raise ParameterError(f"X and Y must be {m}x{m}")
    if np.max(np.abs(X - X.conj().T)) > 1e-10:
        raise ParameterError("X must be Hermitian")
    dx = np.linalg.norm(X - np.diag(d))
    ny = np.linalg.norm(Y)
    alpha = (1 / d.min()) * (math.sqrt(1.5) * dx + (1 + math.sqrt(1.5)) * ny)
    beta = (m - 1) / math.sqrt(2) * dx + math.sqrt((2 * m + 1) ** 2 / 2 + 2 * m * m) * ny
    return DriftParams(float(alpha), float(beta), 1.0, 0.0)


def bounded_lindblad_difference(norm_pairs, t):
    """``t * sum (||L^dag L - L'^dag L'|| + ||L - L'|| (||L|| + ||L'||))``."""
    _nonneg("t", t)
    total = 0.0
    for a, b, c, e in norm_pairs:
        for v in (a, b, c, e):
            _nonneg("norm", v)
        total += a + b * (c + e)
    return t * total


def brownian_alpha_beta(gamma1, delta1, gamma2, delta2):
    a1 = abs(gamma1) + abs(delta1)
    a2 = abs(gamma2) + abs(delta2)
    alpha = a1 * a1 + a2 * a2
    if alpha >= 1:
        raise ParameterError(f"alpha = {alpha} must be below 1")
    beta = abs(gamma1) * abs(delta1) + abs(gamma2) * abs(delta2) + BROWNIAN_KAPPA
    return DriftParams(alpha, beta, 1.0, 0.0)


def pfeifer_bound(gamma, delta, E, dt):
    """Halved EC distance between ``e^{-iHt}`` and ``e^{-iH(t + dt)}`` when ``H^2 <= gamma N + delta``."""
    g = gamma * E + delta
    if g < 0:
        raise ParameterError("gamma E + delta must be non-negative")
    return math.sin(min(abs(dt) * math.sqrt(g), math.pi / 2))


def optimal_p_variance(E):
    """Largest ``<p^2>`` over states with mean photon number at most ``E``."""
    _nonneg("E", E)
    return 0.5 * (math.sqrt(E) + math.sqrt(E + 1)) ** 2


def dominance_feasible(alpha, beta):
    if alpha < 2:
        return False
    return 2 * beta >= alpha - math.sqrt(alpha * (alpha - 2))


def universal_phi_lower(s):
    """Lower bound on the worst-case trace distance reachable at ``E t = s``."""
    _nonneg("s", s)
    a = 2 * math.sqrt(s * (math.pi + 2 * s) / (math.pi**2 + 4 * math.pi * s + 8 * s * s))
    if s <= math.pi / 2:
        a = max(a, 2 * math.sqrt((s / math.pi) * (1 - s / math.pi)))
    return a


def qubit_example_energy_lower(theta):
    if not 0 < theta < math.pi:
        raise ParameterError(f"theta must lie in (0, pi), got {theta}")
    return 1 / 12 + math.sqrt(6) / (9 * theta)


# ---------------------------------------------------------------------------
# multi-copy discrimination


def eigenphase_spread(U, V, tol=1e-10):
    """Angular width of the smallest arc holding all eigenphases of ``U^dag V``."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    for M in (U, V):
        if np.max(np.abs(M.conj().T @ M - np.eye(len(M)))) > tol:
            raise ParameterError("inputs must be unitary")
    phases = np.sort(np.mod(np.angle(np.linalg.eigvals(U.conj().T @ V)), 2 * np.pi))
    gaps = np.diff(np.concatenate([phases, [phases[0] + 2 * np.pi]]))
    theta = 2 * np.pi - gaps.max()
    return float(max(theta, 0.0)), phases


def origin_in_hull_interior(points, margin=1e-9):
    """True iff 0 lies strictly inside the 2-D convex hull of complex ``points``."""
    pts = np.unique(np.round(np.column_stack([np.real(points), np.imag(points)]), 12), axis=0)
    if len(pts) < 3:
        return False
    try:
        hull = ConvexHull(pts)
    except QhullError:
        return False
    # facets: normal . x + offset <= 0 inside
    return bool(np.all(hull.equations[:, -1] < -margin))


@dataclass
class MultiCopyResult:
    n: int
    theta: float
    interior: bool
    n_interior: int = None

    def to_dict(self):
        return {"n": self.n, "Theta": self.theta, "interior": self.interior, "n_interior": self.n_interior}


def multi_copy_queries(U, V, n_cap=64, tol=1e-10, margin=1e-9):
    """Number of parallel uses after which ``U`` and ``V`` become perfectly distinguishable.

    ``n = floor(pi / Theta) + 1``.  The hull test is run on the phases of
    ``(U^dag V)^{(x) n}``; if 0 is only on the boundary the search continues
    up to ``n_cap`` and the first interior count is reported separately.
    """
    theta, phases = eigenphase_spread(U, V, tol)
    if theta <= tol:
        raise IdenticalChannelsError("U and V agree up to a global phase")
    n = int(math.floor(math.pi / theta)) + 1

    def interior_at(k):
        # eigenphases of the k-fold tensor power are sums of k single-copy phases
        acc = np.zeros(1)
        for _ in range(k):
            acc = np.unique(np.round(np.mod(acc[:, None] + phases[None], 2 * np.pi).ravel(), 12))
        return origin_in_hull_interior(np.exp(1j * acc), margin)

    interior = interior_at(n)
    n_int = n if interior else None
    k = n + 1
    while n_int is None and k <= n_cap:
        if interior_at(k):
            n_int = k
        k += 1
    return MultiCopyResult(n, theta, interior, n_int)

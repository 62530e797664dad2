"""Solovay-Kitaev compilation of symplectic matrices against a covering net.

Level 0 is a net lookup.  Level n+1 corrects the level-n approximation
``S_n`` by writing the remainder ``S S_n^-1 = O P`` (polar form) and
expressing each factor as a balanced group commutator whose four entries
are themselves compiled at level n.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoverageError, DivergenceError, ParameterError
from .symplectic import (
    direct_sum,
    hyperbolic,
    group_commutator,
    op_norm,
    orth_block_diagonalize,
    polar_decompose,
    rotation,
    symplectic_inverse,
    williamson_positive,
)
from .words import GateWord

# ---------------------------------------------------------------------------
# constants


def error_constants(r):
    """``(C(r), c(r), epsilon0_max)`` for the level recursion.

    ``C(r) = 47 r^2 + 104 r + 156`` and ``c(r) = ((2 + r) C(r))^2``; the
    recursion provably contracts when ``epsilon0 < 1 / c(r)``.
    """
    if r <= 0:
        raise ParameterError("r must be positive")
    C = 47 * r * r + 104 * r + 156
    c = ((2 + r) * C) ** 2
    return C, c, 1.0 / c


def predicted_epsilon(n, epsilon0, c_r):
    return (c_r * epsilon0) ** (1.5**n) / c_r


def commutator_perturbation_bound(delta, epsilon, mu):
    """Bound on ``||[[V, W]] - [[V', W']]||`` for factors within delta of I, perturbed by epsilon."""
    if not (delta >= 0 and epsilon >= 0 and delta + epsilon <= mu < 1):
        raise ParameterError(f"need delta + epsilon <= mu < 1, got {delta}, {epsilon}, {mu}")
    a = (16 - 12 * mu + 4 * mu**2) / (1 - mu) ** 3
    b = (7 - 9 * mu + 13 * mu**2 - 3 * mu**3) / (1 - mu) ** 4
    return a * delta * epsilon + b * epsilon**2


@dataclass
class SKParams:
    m: int = 1
    r: float = 1.0
    epsilon0: float = 1e-3
    delta: float = 1e-6
    max_level: int = 5

    @property
    def C_r(self):
        return error_constants(self.r)[0]

    @property
    def c_r(self):
        return error_constants(self.r)[1]

    @property
    def contraction_constant(self):
        return (2 + self.r) * self.C_r

    @property
    def guaranteed(self):
        return self.epsilon0 * self.c_r < 1

    def to_dict(self):
        return {
            "m": self.m,
            "r": self.r,
            "epsilon0": self.epsilon0,
            "delta": self.delta,
            "max_level": self.max_level,
            "C_r": self.C_r,
            "c_r": self.c_r,
            "guaranteed": self.guaranteed,
        }


# ---------------------------------------------------------------------------
# balanced commutators


def _check_eps(distance, epsilon):
    if epsilon > 1:
        raise ParameterError(f"epsilon={epsilon} is outside the commutator lemma range (<= 1)")
    if distance > epsilon * (1 + 1e-9) + 1e-14:
        raise ParameterError(f"||X - I|| = {distance:.3e} exceeds epsilon={epsilon:.3e}")


def balanced_commutator_orthogonal(O, epsilon):
    """``(O1, O2)`` with ``[[O1, O2]] ~ O`` and both factors ``O(sqrt(epsilon))`` from I.

    Each rotation block D(theta) of O is approximated by the commutator of
    ``diag(e^{sa}, e^{-sa})`` and the hyperbolic block at ``a = sqrt(|theta|/2)``,
    ``s = sign(theta)``, conjugated back by the block-diagonalizing K.
    """
    O = np.asarray(O, dtype=float)
    _check_eps(op_norm(O - np.eye(len(O))), epsilon)
    K, thetas = orth_block_diagonalize(O)
    a = np.sqrt(np.abs(thetas) / 2)
    sgn = np.sign(thetas)
    A = direct_sum([np.diag([math.exp(s * x), math.exp(-s * x)]) for s, x in zip(sgn, a)])
    B = direct_sum([hyperbolic(x) for x in a])
    return K @ A @ K.T, K @ B @ K.T


def balanced_commutator_positive(P, epsilon):
    """``(P1, P2)`` with ``[[P1, P2]] ~ P``: a rotation block and a hyperbolic block per mode."""
    P = np.asarray(P, dtype=float)
    _check_eps(op_norm(P - np.eye(len(P))), epsilon)
    K, lambdas = williamson_positive(P)
    a = np.sqrt(np.log(lambdas) / 2)
    A = direct_sum([rotation(x) for x in a])
    B = direct_sum([hyperbolic(x) for x in a])
    return K @ A @ K.T, K @ B @ K.T


# ---------------------------------------------------------------------------
# compilation


@dataclass
class CompilationResult:
    word: GateWord
    achieved_error: float
    level: int
    per_level_errors: list
    guaranteed: bool
    word_lengths: list = field(default_factory=list)
    matrix: np.ndarray = None

    def contraction_ratios(self):
        """``eps_{n+1} / eps_n^{3/2}`` for consecutive levels."""
        e = self.per_level_errors
        return [e[i + 1] / e[i] ** 1.5 if e[i] > 0 else 0.0 for i in range(len(e) - 1)]

    def to_json(self):
        return {
            "word": self.word.to_json(),
            "word_length": len(self.word),
            "achieved_error": self.achieved_error,
            "level": self.level,
            "per_level_errors": list(self.per_level_errors),
            "word_lengths": list(self.word_lengths),
            "guaranteed": self.guaranteed,
        }


def _commutator_word(a, b):
    return a + b + a.inverse() + b.inverse()


class _Compiler:
    def __init__(self, net, params):
        self.net = net
        self.params = params
        self.eye = np.eye(2 * params.m)

    def base(self, S):
        idx, dist = self.net.lookup(S)
        if dist > self.params.epsilon0:
            raise CoverageError(f"nearest net element is {dist:.3e} away, above epsilon0={self.params.epsilon0:.1e}")
        return GateWord([(idx, False)]), self.net.element(idx)

    def step(self, S, word, approx, n):
        """Refine a level-``n`` approximation ``(word, approx)`` of ``S`` to level ``n + 1``."""
        O, P = polar_decompose(S @ symplectic_inverse(approx, check=False))
        eps_o = min(1.0, op_norm(O - self.eye))
        eps_p = min(1.0, op_norm(P - self.eye))
        O1, O2 = balanced_commutator_orthogonal(O, eps_o)
        P1, P2 = balanced_commutator_positive(P, eps_p)
        parts = [self.compile(X, n) for X in (O1, O2, P1, P2)]
        (wo1, mo1), (wo2, mo2), (wp1, mp1), (wp2, mp2) = parts
        new_word = _commutator_word(wo1, wo2) + _commutator_word(wp1, wp2) + word
        new_approx = group_commutator(mo1, mo2) @ group_commutator(mp1, mp2) @ approx
        return new_word, new_approx

    def compile(self, S, n):
        word, approx = self.base(S)
        for k in range(n):
            word, approx = self.step(S, word, approx, k)
        return word, approx


def sk_compile(S, net, params, check_divergence=True):
    """Compile ``S`` level by level until the resolved error is at most ``params.delta``.

    Every per-level error is recomputed by multiplying out the word against
    the net.  A level whose error grows raises :class:`DivergenceError`.
    """
    S = np.asarray(S, dtype=float)
    dist0 = op_norm(S - np.eye(len(S)))
    if dist0 > params.r * (1 + 1e-9):
        raise ParameterError(f"target is {dist0:.3f} from I, outside r={params.r}")
    comp = _Compiler(net, params)
    word, approx = comp.base(S)
    errors = [op_norm(S - word.resolve(net))]
    lengths = [len(word)]
    level = 0
    while errors[-1] > params.delta and level < params.max_level:
        word, approx = comp.step(S, word, approx, level)
        level += 1
        errors.append(op_norm(S - word.resolve(net)))
        lengths.append(len(word))
        if check_divergence and errors[-1] > errors[-2]:
            eps = errors[-2]
            cond = 1.5 * math.sqrt(eps) + eps
            raise DivergenceError(
                f"error grew from {eps:.3e} to {errors[-1]:.3e} at level {level}; "
                f"contraction needs (3/2)sqrt(eps) + eps <= 1/5, here {cond:.3e}",
                level=level,
                errors=errors,
            )
    resolved = word.resolve(net)
    return CompilationResult(
        word=word,
        achieved_error=op_norm(S - resolved),
        level=level,
        per_level_errors=errors,
        guaranteed=params.guaranteed,
        word_lengths=lengths,
        matrix=resolved,
    )

"""Covering nets for bounded regions of Sp(2m, R) and word expansion of gate sets.

Two net flavours share one interface (``len``, ``element``, ``elements_at``,
``lookup``, ``lookup_many``, ``to_json``):

* :class:`Net` stores its elements explicitly and is grown by greedy packing
  (:func:`build_net`) or by expanding a gate set (:func:`expand_generators`).
* :class:`EulerGridNet` is an implicit single-mode lattice in the Euler
  parameters ``R(a) diag(e^s, e^-s) R(b)``.  It reaches resolutions far below
  what an explicit list could store, with constant-time lookup.
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.spatial import cKDTree

from .errors import DimensionError, InvariantError, NumericError, ParameterError
from .symplectic import (
    check_symplectic,
    direct_sum,
    matrix_from_json,
    cyclic_mode_shift,
    omega,
    rotation,
    symplectic_inverse,
)
from .words import GateWord

# ---------------------------------------------------------------------------
# norms and sampling


def batch_op_norm(M):
    """Operator norms of a stack of square matrices (closed form for 2x2)."""
    M = np.asarray(M, dtype=float)
    if M.shape[-2:] == (2, 2):
        a, b = M[..., 0, 0], M[..., 0, 1]
        c, d = M[..., 1, 0], M[..., 1, 1]
        return 0.5 * (np.hypot(a + d, c - b) + np.hypot(a - d, b + c))
    return np.linalg.norm(M, ord=2, axis=(-2, -1))


def net_cardinality_bound(m, r, epsilon):
    return (3.0 * r / epsilon) ** (4 * m * m)


def _expm_batch(X):
    if X.shape[-2:] != (2, 2):
        return scipy.linalg.expm(X)
    # traceless 2x2: X^2 = q I with q = -det(X)
    q = X[:, 0, 0] ** 2 + X[:, 0, 1] * X[:, 1, 0]
    root = np.sqrt(np.abs(q))
    big = root > 1e-8
    safe = np.where(big, root, 1.0)
    c = np.where(q >= 0, np.cosh(root), np.cos(root))
    sc = np.where(big, np.where(q >= 0, np.sinh(root), np.sin(root)) / safe, 1.0 + q / 6)
    out = sc[:, None, None] * X
    out[:, 0, 0] += c
    out[:, 1, 1] += c
    return out


def sample_region(m, r, n, rng, box=None):
    """``n`` random elements with ``||S - I|| <= r``.

    Draws a Lie-algebra element ``Omega @ sym`` with entries of ``sym`` uniform
    in ``[-box, box]`` and exponentiates.  Samples that land outside the
    region are pulled back along their one-parameter subgroup onto the
    boundary, which keeps the boundary and its corners well sampled.
    """
    box = 2.0 * r if box is None else box
    d = 2 * m
    A = rng.uniform(-box, box, size=(n, d, d))
    X = omega(m) @ (0.5 * (A + np.swapaxes(A, -1, -2)))
    S = _expm_batch(X)
    eye = np.eye(d)
    out = np.flatnonzero(batch_op_norm(S - eye) > r)
    if len(out):
        Xo = X[out]
        lo = np.zeros(len(out))
        hi = np.ones(len(out))
        for _ in range(30):
            mid = 0.5 * (lo + hi)
            inside = batch_op_norm(_expm_batch(mid[:, None, None] * Xo) - eye) <= r
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        S[out] = _expm_batch(lo[:, None, None] * Xo)
    return S


# ---------------------------------------------------------------------------
# explicit nets


class _PackingIndex:
    """Nearest-neighbour search in operator norm over a growing matrix list.

    A KD-tree on the flattened entries gives Frobenius neighbours; since
    ``||X||_op <= ||X||_F <= sqrt(2m) ||X||_op`` a Frobenius ball of radius
    ``sqrt(2m) rho`` contains every operator-norm neighbour within ``rho``.
    """

    def __init__(self, d, k=8):
        self.d = d
        self.k = k
        self.scale = math.sqrt(d)
        self._mats = np.empty((0, d, d))
        self._pending = []
        self._tree = None

    def __len__(self):
        return len(self._mats) + len(self._pending)

    @property
    def mats(self):
        self._flush()
        return self._mats

    def add(self, M):
        self._pending.append(np.asarray(M, dtype=float))

    def _flush(self):
        if self._pending:
            self._mats = np.concatenate([self._mats, np.stack(self._pending)])
            self._pending = []
            self._tree = None

    def _ensure_tree(self):
        self._flush()
        if self._tree is None and len(self._mats):
            self._tree = cKDTree(self._mats.reshape(len(self._mats), -1))

    def nearest(self, S):
        """(index, op-norm distance) of a nearest stored matrix for each row of ``S``.

        Among exact ties the lowest index wins.
        """
        S = np.asarray(S, dtype=float)
        self._ensure_tree()
        n = len(self._mats)
        if n == 0:
            raise ValueError("net is empty")
        k = min(self.k, n)
        flat = S.reshape(len(S), -1)
        fdist, idx = self._tree.query(flat, k=k)
        fdist = fdist.reshape(len(S), k)
        idx = idx.reshape(len(S), k)
        ops = batch_op_norm(self._mats[idx] - S[:, None])
        best = ops.min(axis=1)
        big = np.iinfo(np.int64).max
        choice = np.where(ops == best[:, None], idx, big).min(axis=1)
        # rows where an element outside the k Frobenius-nearest could still win
        unsure = (k < n) & (fdist[:, -1] <= self.scale * best)
        for row in np.flatnonzero(unsure):
            cand = np.array(sorted(self._tree.query_ball_point(flat[row], self.scale * best[row] * (1 + 1e-12) + 1e-300)))
            d = batch_op_norm(self._mats[cand] - S[row])
            j = int(np.argmin(d))
            choice[row], best[row] = cand[j], d[j]
        return choice.astype(np.int64), best

    def any_within(self, S, radius):
        """Boolean per row: is some stored matrix at op distance < radius."""
        S = np.asarray(S, dtype=float)
        self._ensure_tree()
        hit = np.zeros(len(S), dtype=bool)
        if self._tree is not None:
            n = len(self._mats)
            k = min(self.k, n)
            flat = S.reshape(len(S), -1)
            fdist, idx = self._tree.query(flat, k=k)
            fdist = fdist.reshape(len(S), k)
            idx = idx.reshape(len(S), k)
            ops = batch_op_norm(self._mats[idx] - S[:, None])
            hit = (ops < radius).any(axis=1)
            unsure = ~hit & (k < n) & (fdist[:, -1] < self.scale * radius)
            for row in np.flatnonzero(unsure):
                cand = self._tree.query_ball_point(flat[row], self.scale * radius)
                if cand:
                    hit[row] = bool((batch_op_norm(self._mats[cand] - S[row]) < radius).any())
        return hit


@dataclass
class Net:
    """Explicit finite net with optional words for each element."""

    elements: np.ndarray
    epsilon: float
    r: float
    m: int
    words: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.elements = np.asarray(self.elements, dtype=float).reshape(-1, 2 * self.m, 2 * self.m)
        self._index = None

    def __len__(self):
        return len(self.elements)

    def element(self, i):
        return self.elements[int(i)]

    def elements_at(self, indices):
        return self.elements[np.asarray(indices, dtype=np.int64)]

    def _search(self):
        if self._index is None:
            self._index = _PackingIndex(2 * self.m)
            self._index._mats = self.elements
        return self._index

    def lookup_many(self, S):
        S = np.asarray(S, dtype=float)
        if S.shape[1:] != (2 * self.m, 2 * self.m):
            raise DimensionError(f"expected {2 * self.m}x{2 * self.m} matrices, got {S.shape[1:]}")
        if len(self) == 0:
            raise ValueError("net is empty")
        return self._search().nearest(S)

    def lookup(self, S):
        idx, dist = self.lookup_many(np.asarray(S, dtype=float)[None])
        return int(idx[0]), float(dist[0])

    def to_json(self):
        return {
            "m": self.m,
            "r": self.r,
            "epsilon": self.epsilon,
            "elements": [E.tolist() for E in self.elements],
            "words": [w.to_json() for w in self.words],
        }


def net_lookup(net, S):
    """Index of a nearest net element in operator norm and its distance."""
    return net.lookup(S)


def build_net(m, r, epsilon, sample_budget=1_000_000, rng_seed=0, batch=4096, box=None):
    """Greedy epsilon-packing of ``{S : ||S - I|| <= r}``.

    Random samples are accepted when they are at distance >= epsilon from all
    previously accepted elements (the identity is placed first).  Growth stops
    after ``sample_budget`` consecutive rejections.
    """
    if not 0 < epsilon <= r:
        raise ParameterError(f"need 0 < epsilon <= r, got epsilon={epsilon}, r={r}")
    if sample_budget < 1:
        raise ParameterError("sample_budget must be at least 1")
    rng = np.random.default_rng(rng_seed)
    d = 2 * m
    index = _PackingIndex(d)
    index.add(np.eye(d))
    bound = net_cardinality_bound(m, r, epsilon)
    rejections = 0
    drawn = 0
    while rejections < sample_budget:
        cand = sample_region(m, r, batch, rng, box)
        drawn += batch
        near = index.any_within(cand, epsilon)
        fresh = []
        last = -1
        for i in np.flatnonzero(~near):
            if rejections + (i - last - 1) >= sample_budget:
                break
            if fresh and (batch_op_norm(np.stack(fresh) - cand[i]) < epsilon).any():
                continue
            rejections = 0
            last = i
            fresh.append(cand[i])
            index.add(cand[i])
            if len(index) > bound:
                raise InvariantError(f"net size {len(index)} exceeds the packing bound {bound:.3g}")
        rejections += batch - 1 - last
        if last < 0:
            batch = min(2 * batch, 65536)
    return Net(index.mats, epsilon, r, m, info={"samples_drawn": drawn, "sample_budget": sample_budget})


@dataclass
class CoverageReport:
    n_probes: int
    max_distance: float
    n_uncovered: int
    epsilon: float

    @property
    def covered(self):
        return self.n_uncovered == 0

    def to_dict(self):
        return {
            "n_probes": self.n_probes,
            "max_distance": self.max_distance,
            "n_uncovered": self.n_uncovered,
            "epsilon": self.epsilon,
            "covered": self.covered,
        }


def probe_coverage(net, n_probes=100_000, rng_seed=1, chunk=20000, samples=None):
    """Fraction of random region samples within ``net.epsilon`` of the net."""
    rng = np.random.default_rng(rng_seed)
    worst, missed, done = 0.0, 0, 0
    if samples is not None:
        chunks = [np.asarray(samples, dtype=float)]
    else:
        chunks = (sample_region(net.m, net.r, min(chunk, n_probes - i), rng) for i in range(0, n_probes, chunk))
    for S in chunks:
        _, dist = net.lookup_many(S)
        worst = max(worst, float(dist.max()))
        missed += int((dist > net.epsilon).sum())
        done += len(S)
    return CoverageReport(done, worst, missed, net.epsilon)


# ---------------------------------------------------------------------------
# gate sets and word expansion


@dataclass
class GateSet:
    generators: dict
    closed_under_inverse: bool = False

    def __post_init__(self):
        self.generators = {str(k): check_symplectic(v, 1e-8) for k, v in self.generators.items()}
        if self.closed_under_inverse:
            mats = list(self.generators.values())
            for label, G in self.generators.items():
                Ginv = symplectic_inverse(G, check=False)
                if not any(np.max(np.abs(Ginv - H)) <= 1e-10 for H in mats):
                    raise InvariantError(f"inverse of generator {label!r} is missing")

    @property
    def m(self):
        return next(iter(self.generators.values())).shape[0] // 2

    @classmethod
    def with_inverses(cls, generators):
        """Add a ``label~`` inverse for every generator that lacks one."""
        gens = {str(k): np.asarray(v, dtype=float) for k, v in generators.items()}
        out = dict(gens)
        for label, G in gens.items():
            Ginv = symplectic_inverse(G)
            if not any(np.max(np.abs(Ginv - H)) <= 1e-10 for H in out.values()):
                out[label + "~"] = Ginv
        return cls(out, closed_under_inverse=True)

    def to_json(self):
        return {"generators": {k: v.tolist() for k, v in self.generators.items()}}

    @classmethod
    def from_json(cls, obj):
        gens = {k: np.asarray(v["rows"] if isinstance(v, dict) else v, dtype=float) for k, v in obj["generators"].items()}
        return cls.with_inverses(gens)


def expand_generators(gs, epsilon0, max_depth, r=None, n_probes=0, rng_seed=1):
    """Breadth-first enumeration of words over ``gs`` up to ``max_depth``.

    A new product is kept when it is at distance >= epsilon0/2 from everything
    kept so far.  Coverage shortfall is reported in ``net.info`` rather than
    raised.
    """
    if not gs.closed_under_inverse:
        raise ParameterError("gate set must be closed under inverses")
    labels = list(gs.generators)
    gens = np.stack([gs.generators[k] for k in labels])
    d = gens.shape[-1]
    index = _PackingIndex(d)
    words = []
    frontier_mats = np.eye(d)[None]
    frontier_words = [[]]
    sizes = []
    depth = 0
    for depth in range(1, max_depth + 1):
        new_mats, new_words = [], []
        prods = (frontier_mats[:, None] @ gens[None]).reshape(-1, d, d)
        near = index.any_within(prods, epsilon0 / 2) if len(index) else np.zeros(len(prods), bool)
        for t, P in enumerate(prods):
            if near[t]:
                continue
            if new_mats and (batch_op_norm(np.stack(new_mats) - P) < epsilon0 / 2).any():
                continue
            new_mats.append(P)
            new_words.append(frontier_words[t // len(labels)] + [(labels[t % len(labels)], False)])
        for P, w in zip(new_mats, new_words):
            index.add(P)
            words.append(GateWord(w))
        sizes.append(len(new_mats))
        if not new_mats:
            break
        frontier_mats = np.stack(new_mats)
        frontier_words = new_words
    mats = index.mats
    if r is None:
        r = float(batch_op_norm(mats - np.eye(d)).max()) if len(mats) else 0.0
    net = Net(mats, epsilon0, r, d // 2, words=words)
    net.info = {"depth_reached": depth, "new_per_depth": sizes, "saturated": bool(sizes and sizes[-1] == 0)}
    if n_probes:
        net.info["coverage"] = probe_coverage(net, n_probes, rng_seed).to_dict()
    return net


# ---------------------------------------------------------------------------
# implicit single-mode lattice


class EulerGridNet:
    """Lattice ``R(a_i) diag(e^{s_j}, e^{-s_j}) R(b_l)`` covering ``||S - I|| <= r`` for m = 1.

    With ``a`` on a grid of ``[0, 2pi)``, ``b`` of ``[0, pi)`` and ``s`` of
    ``[0, ln(1 + r)]`` the distance from any region element to its rounded
    grid point is at most ``e^{s_max} (h_a + h_b + h_s) / 2``; the steps are
    chosen so this is below ``epsilon``.  Grid points may sit up to
    ``epsilon`` outside the region.
    """

    m = 1

    def __init__(self, r, epsilon, n_a=None, n_s=None, n_b=None):
        if not 0 < epsilon <= r:
            raise ParameterError(f"need 0 < epsilon <= r, got epsilon={epsilon}, r={r}")
        self.r = float(r)
        self.epsilon = float(epsilon)
        self.s_max = math.log1p(r)
        if n_a is None:
            step = epsilon / (1.5 * math.exp(self.s_max)) * (1 - 1e-6)
            n_a = 2 * math.ceil(math.pi / step)
            n_b = math.ceil(math.pi / step)
            n_s = math.ceil(self.s_max / step) + 1
        self.n_a, self.n_s, self.n_b = int(n_a), int(n_s), int(n_b)
        if self.n_a % 2:
            raise ParameterError("n_a must be even")
        self.h_a = 2 * math.pi / self.n_a
        self.h_b = math.pi / self.n_b
        self.h_s = self.s_max / (self.n_s - 1)
        if self.covering_radius > epsilon:
            raise ParameterError(f"grid too coarse: covering radius {self.covering_radius:.3e} > {epsilon}")
        self.words = []
        self.info = {"kind": "euler-grid"}

    @property
    def covering_radius(self):
        return math.exp(self.s_max) * (self.h_a + self.h_b + self.h_s) / 2

    def __len__(self):
        return self.n_a * self.n_s * self.n_b

    def _decode(self, idx):
        idx = np.asarray(idx, dtype=np.int64)
        ib = idx % self.n_b
        rest = idx // self.n_b
        return rest // self.n_s, rest % self.n_s, ib

    def _encode(self, ia, is_, ib):
        return (np.asarray(ia, np.int64) * self.n_s + is_) * self.n_b + ib

    @staticmethod
    def _compose(a, s, b):
        ca, sa, cb, sb = np.cos(a), np.sin(a), np.cos(b), np.sin(b)
        es, ems = np.exp(s), np.exp(-s)
        out = np.empty(np.shape(a) + (2, 2))
        # rotation(t) = [[cos t, sin t], [-sin t, cos t]]
        out[..., 0, 0] = ca * es * cb - sa * ems * sb
        out[..., 0, 1] = ca * es * sb + sa * ems * cb
        out[..., 1, 0] = -sa * es * cb - ca * ems * sb
        out[..., 1, 1] = -sa * es * sb + ca * ems * cb
        return out

    def elements_at(self, indices):
        ia, is_, ib = self._decode(indices)
        return self._compose(ia * self.h_a, is_ * self.h_s, ib * self.h_b)

    def element(self, i):
        return self.elements_at(np.array([i]))[0]

    @staticmethod
    def euler_angles(S):
        """(a, s, b) with ``S = R(a) diag(e^s, e^-s) R(b)``, ``s >= 0`` and ``b in [0, pi)``."""
        S = np.asarray(S, dtype=float)
        U, sv, Vh = np.linalg.svd(S)
        flip = np.linalg.det(U) < 0
        U[flip, :, 1] *= -1
        Vh[flip, 1, :] *= -1
        a = np.arctan2(U[:, 0, 1], U[:, 0, 0])
        b = np.arctan2(Vh[:, 0, 1], Vh[:, 0, 0])
        s = 0.5 * np.log(sv[:, 0] / sv[:, 1])
        shift = b < 0
        a = np.where(shift, a + np.pi, a)
        b = np.where(shift, b + np.pi, b)
        return np.mod(a, 2 * np.pi), s, b

    def lookup_many(self, S):
        S = np.asarray(S, dtype=float)
        if S.shape[1:] != (2, 2):
            raise DimensionError("EulerGridNet is single-mode")
        a, s, b = self.euler_angles(S)
        ia0 = np.rint(a / self.h_a).astype(np.int64)
        is0 = np.clip(np.rint(s / self.h_s).astype(np.int64), 0, self.n_s - 1)
        ib0 = np.rint(b / self.h_b).astype(np.int64)
        offs = np.array([(i, j, k) for i in (-1, 0, 1) for j in (-1, 0, 1) for k in (-1, 0, 1)])
        ia = ia0[:, None] + offs[:, 0]
        is_ = np.clip(is0[:, None] + offs[:, 1], 0, self.n_s - 1)
        ib = ib0[:, None] + offs[:, 2]
        # b = pi is b = 0 with a shifted by pi (n_a is even)
        wrap = np.floor_divide(ib, self.n_b)
        ib = ib - wrap * self.n_b
        ia = np.mod(ia + wrap * (self.n_a // 2), self.n_a)
        idx = self._encode(ia, is_, ib)
        dist = batch_op_norm(self._compose(ia * self.h_a, is_ * self.h_s, ib * self.h_b) - S[:, None])
        best = dist.min(axis=1)
        big = np.iinfo(np.int64).max
        choice = np.where(dist == best[:, None], idx, big).min(axis=1)
        return choice, best

    def lookup(self, S):
        idx, dist = self.lookup_many(np.asarray(S, dtype=float)[None])
        return int(idx[0]), float(dist[0])

    def to_json(self):
        return {
            "m": 1,
            "r": self.r,
            "epsilon": self.epsilon,
            "kind": "euler-grid",
            "grid": {"n_a": self.n_a, "n_s": self.n_s, "n_b": self.n_b},
            "elements": [],
            "words": [],
        }


# ---------------------------------------------------------------------------
# persistence


def net_from_json(obj):
    if obj.get("kind") == "euler-grid":
        g = obj["grid"]
        return EulerGridNet(obj["r"], obj["epsilon"], g["n_a"], g["n_s"], g["n_b"])
    m = int(obj["m"])
    elements = [matrix_from_json(E) if isinstance(E, dict) else np.asarray(E, dtype=float) for E in obj["elements"]]
    words = [GateWord.from_json(w) for w in obj.get("words", [])]
    return Net(np.asarray(elements).reshape(-1, 2 * m, 2 * m), obj["epsilon"], obj["r"], m, words)


def save_net(net, path):
    with open(path, "w") as fh:
        json.dump(net.to_json(), fh)


def load_net(path):
    with open(path) as fh:
        return net_from_json(json.load(fh))


# ---------------------------------------------------------------------------
# singular values from one active gate


def zeta(kappa, theta):
    c2 = np.cos(theta) ** 2
    return (kappa**4 + 1) / (2 * kappa**2) * c2 + (1 - c2)


def eta(kappa, theta):
    """Largest singular value of ``[[kappa cos t, -sin t], [sin t, cos t / kappa]]``."""
    z = zeta(kappa, theta)
    return np.sqrt(z + np.sqrt(np.maximum(z * z - 1, 0.0)))


def solve_eta(kappa, mu, iterations=60):
    """Angle in [0, pi/2] with ``eta(kappa, theta) = mu`` by bisection."""
    if not 1.0 <= mu <= kappa * (1 + 1e-12):
        raise NumericError(f"target {mu} is not bracketed by [1, {kappa}]")
    # eta(kappa, pi/2) = 1 for every kappa, including the degenerate kappa = 1
    if mu <= 1.0:
        return math.pi / 2
    lo, hi = 0.0, math.pi / 2
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if eta(kappa, mid) > mu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _counter_rotation(theta):
    return rotation(-theta)


def singular_value_realizer(mu, S_active, tol=1e-9):
    """Word ``D^n R D^n`` whose singular values >= 1 are ``mu``.

    ``D`` is ``diag(lam, 1/lam)`` on every mode, where ``lam`` is the product
    of the singular values >= 1 of ``S' = (S C)^{m-1} S`` (``C`` the cyclic
    mode shift), and ``R`` is a direct sum of rotations by the angles
    solving ``eta(lam^{2n}, theta_j) = mu_j``.
    """
    S = check_symplectic(S_active, 1e-8)
    m = S.shape[0] // 2
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    if mu.shape != (m,):
        raise DimensionError(f"need {m} target values, got {mu.shape}")
    if np.any(mu < 1):
        raise ParameterError("target singular values must be >= 1")
    if np.max(np.abs(S @ S.T - np.eye(2 * m))) <= tol:
        raise ParameterError("active gate is orthogonal")
    C = cyclic_mode_shift(m)
    Sp = np.linalg.matrix_power(S @ C, m - 1) @ S
    sv = np.linalg.svd(Sp, compute_uv=False)
    lam = float(np.prod(sv[sv >= 1]))
    if lam <= 1 + tol:
        raise NumericError(f"active gate does not expand: lambda = {lam}")
    n = max(0, math.ceil(math.log(mu.max()) / (2 * math.log(lam)) - 1e-12))
    kappa = lam ** (2 * n)
    thetas = np.array([solve_eta(kappa, x) for x in mu])
    D = direct_sum([np.diag([lam, 1 / lam])] * m)
    R = direct_sum([_counter_rotation(t) for t in thetas])
    info = {"lambda": lam, "n": n, "thetas": thetas.tolist(), "S_prime": Sp}
    return GateWord([("D", False)] * n + [("R", False)] + [("D", False)] * n, {"D": D, "R": R}, info)

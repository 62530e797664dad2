"""Named verification suites: each compares a brute-force oracle with a closed-form bound.

Every suite returns a :class:`SuiteResult` holding one :class:`Check` per
measured quantity.  ``run_suite("all")`` chains them.
"""

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from .bounds import (
    DriftParams,
    closed_drift_bound,
    closed_speed_limit_time,
    closed_vector_drift,
    displacement_bounds,
    multi_copy_queries,
    open_drift_bound,
    open_speed_limit_time,
    optimal_p_variance,
    qubit_example_energy_lower,
    symplectic_pair_bound,
    universal_phi_lower,
)
from .config import RunConfig
from .errors import ParameterError
from .fock import (
    constrained_max_expectation,
    displacement_operator,
    ec_diamond_unitaries,
    evolve_and_distance,
    expectation,
    gaussian_unitary,
    geometric_state,
    nu_E,
    number_operator,
    quadrature_square,
    squeezed_vacuum_state,
)
from .netgen import EulerGridNet, build_net, net_cardinality_bound, probe_coverage, sample_region
from .sk import SKParams, balanced_commutator_orthogonal, balanced_commutator_positive, sk_compile
from .symplectic import (
    group_commutator,
    op_norm,
    random_orthogonal_near_identity,
    random_positive_near_identity,
    random_symplectic_near_identity,
    squeezer,
)


@dataclass
class Check:
    name: str
    oracle_value: float
    analytic_lower: float = None
    analytic_upper: float = None

    @property
    def slack(self):
        s = []
        if self.analytic_lower is not None:
            s.append(self.oracle_value - self.analytic_lower)
        if self.analytic_upper is not None:
            s.append(self.analytic_upper - self.oracle_value)
        return min(s) if s else None

    @property
    def passed(self):
        s = self.slack
        return s is None or (math.isfinite(s) and s >= 0)

    def to_dict(self):
        return {
            "name": self.name,
            "analytic_lower": self.analytic_lower,
            "oracle_value": self.oracle_value,
            "analytic_upper": self.analytic_upper,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass
class SuiteResult:
    name: str
    checks: list = field(default_factory=list)
    runtime: float = 0.0
    runtime_limit: float = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed for c in self.checks) and self.within_time_limit

    @property
    def within_time_limit(self):
        return self.runtime_limit is None or self.runtime <= self.runtime_limit

    def to_dict(self, timings=False):
        """Wall-clock runtimes are left out unless ``timings`` so that reports are reproducible."""
        out = {
            "suite": self.name,
            "pass": self.passed,
            "runtime_limit_s": self.runtime_limit,
            "within_time_limit": self.within_time_limit,
            "n_checks": len(self.checks),
            "n_failed": sum(not c.passed for c in self.checks),
            "checks": [c.to_dict() for c in self.checks],
            "details": self.details,
        }
        if timings:
            out["runtime_s"] = self.runtime
        return out


def _rng(cfg, offset):
    return np.random.default_rng([cfg.seed, offset])


# ---------------------------------------------------------------------------
# commutator lemmas


def _commutator_cells(kind, cfg, n_samples):
    if kind == "orthogonal":
        sampler, balance, c_res, c_fac = (
            random_orthogonal_near_identity,
            balanced_commutator_orthogonal,
            1.9,
            1.5,
        )
    else:
        sampler, balance, c_res, c_fac = (
            random_positive_near_identity,
            balanced_commutator_positive,
            1.8,
            1.44,
        )
    rng = _rng(cfg, 1 if kind == "orthogonal" else 2)
    checks = []
    for m in (1, 2):
        I = np.eye(2 * m)
        for eps in (0.01, 0.05, 0.1):
            worst_res = worst_fac = 0.0
            for k in range(n_samples):
                # a quarter of the samples sit exactly on the boundary ||X - I|| = eps
                X = sampler(m, rng, eps, exact=(k % 4 == 0))
                A, B = balance(X, eps)
                worst_res = max(worst_res, op_norm(X - group_commutator(A, B)))
                worst_fac = max(worst_fac, op_norm(A - I), op_norm(B - I))
            checks.append(Check(f"{kind} m={m} eps={eps} residual", worst_res, None, c_res * eps**1.5))
            checks.append(Check(f"{kind} m={m} eps={eps} factor distance", worst_fac, None, c_fac * math.sqrt(eps)))
    return checks


def suite_commutator_orthogonal(cfg, n_samples=1000):
    return SuiteResult("commutator-orthogonal", _commutator_cells("orthogonal", cfg, n_samples), runtime_limit=10.0)


def suite_commutator_positive(cfg, n_samples=1000):
    return SuiteResult("commutator-positive", _commutator_cells("positive", cfg, n_samples), runtime_limit=10.0)


def suite_product_commutator(cfg, n_samples=1000, mu=0.2):
    """``||[[V,W]] - [[V~,W~]]|| <= 27 delta eps + 14 eps^2`` with measured delta, eps."""
    rng = _rng(cfg, 3)
    worst_ratio = 0.0
    worst = None
    done = 0
    while done < n_samples:
        m = int(rng.integers(1, 3))
        d_t = rng.uniform(0, mu)
        e_t = rng.uniform(0, mu - d_t)
        V = random_symplectic_near_identity(m, rng, d_t)
        W = random_symplectic_near_identity(m, rng, d_t)
        Vt = V @ random_symplectic_near_identity(m, rng, e_t / 2)
        Wt = W @ random_symplectic_near_identity(m, rng, e_t / 2)
        I = np.eye(2 * m)
        delta = max(op_norm(V - I), op_norm(W - I))
        eps = max(op_norm(Vt - V), op_norm(Wt - W))
        if delta + eps > mu:
            continue
        done += 1
        lhs = op_norm(group_commutator(V, W) - group_commutator(Vt, Wt))
        rhs = 27 * delta * eps + 14 * eps * eps
        ratio = lhs / rhs if rhs > 0 else 0.0
        if worst is None or ratio > worst_ratio:
            worst_ratio, worst = ratio, (lhs, rhs, delta, eps)
    lhs, rhs, delta, eps = worst
    checks = [
        Check("worst residual / bound", worst_ratio, None, 1.0),
        Check(f"worst instance (delta={delta:.3g}, eps={eps:.3g})", lhs, None, rhs),
    ]
    return SuiteResult("product-commutator", checks, runtime_limit=10.0, details={"n_samples": n_samples})


def suite_commutator_lemmas(cfg):
    parts = [suite_commutator_orthogonal(cfg), suite_commutator_positive(cfg), suite_product_commutator(cfg)]
    checks = [c for p in parts for c in p.checks]
    return SuiteResult("commutator-lemmas", checks, runtime_limit=30.0)


# ---------------------------------------------------------------------------
# Solovay-Kitaev recursion and nets


def suite_sk_contraction(cfg, n_targets=100, epsilon0=1e-3, delta=1e-6):
    params = SKParams(m=1, r=1.0, epsilon0=epsilon0, delta=delta, max_level=5)
    net = EulerGridNet(1.0, epsilon0)
    targets = sample_region(1, 1.0, n_targets, _rng(cfg, 4))
    K = params.contraction_constant
    worst_ratio = 0.0
    worst_final = 0.0
    worst_level = 0
    worst_length_excess = 0
    level_hist = {}
    for S in targets:
        res = sk_compile(S, net, params)
        ratios = res.contraction_ratios()
        worst_ratio = max([worst_ratio] + ratios)
        worst_final = max(worst_final, res.achieved_error)
        worst_level = max(worst_level, res.level)
        level_hist[res.level] = level_hist.get(res.level, 0) + 1
        for n, L in enumerate(res.word_lengths):
            worst_length_excess = max(worst_length_excess, L - 9**n)
    checks = [
        Check("max eps_{n+1} / eps_n^1.5", worst_ratio, None, K),
        Check("max final error", worst_final, None, delta),
        Check("max level used", worst_level, None, params.max_level),
        Check("max word length minus 9^n", worst_length_excess, None, 0),
    ]
    details = {
        "net": net.to_json(),
        "net_size": len(net),
        "params": params.to_dict(),
        "levels": {str(k): v for k, v in sorted(level_hist.items())},
    }
    return SuiteResult("sk-contraction", checks, runtime_limit=120.0, details=details)


def suite_net_cardinality(cfg, m=1, r=1.0, epsilon=0.25, n_probes=100_000):
    net = build_net(m, r, epsilon, rng_seed=cfg.seed)
    rep = probe_coverage(net, n_probes, rng_seed=cfg.seed + 1)
    checks = [
        Check("net size", len(net), None, net_cardinality_bound(m, r, epsilon)),
        Check("max probe distance", rep.max_distance, None, epsilon),
        Check("uncovered probes", rep.n_uncovered, None, 0),
    ]
    return SuiteResult("net-cardinality", checks, runtime_limit=60.0, details={"net_info": net.info})


# ---------------------------------------------------------------------------
# Fock-space oracles


def suite_displacement_sandwich(cfg, energies=(0.5, 1.0), distances=(0.1, 0.3), tol=5e-3, seed_tol=2e-3):
    d = cfg.cutoffs.get("displacement", 40)
    rng = _rng(cfg, 6)
    N = number_operator(1, d)
    checks = []
    for E in energies:
        r = math.log(math.sqrt(E) + math.sqrt(E + 1))
        for dist in distances:
            chi = rng.uniform(0, 2 * math.pi)
            w = rng.uniform(-0.2, 0.2, size=2)
            z = w + dist * np.array([math.cos(chi), math.sin(chi)])
            U = displacement_operator(z, 1, d)
            V = displacement_operator(w, 1, d)
            # squeeze along the quadrature that z - w displaces
            seed = squeezed_vacuum_state(r, d, phi=-chi)
            val, _ = ec_diamond_unitaries(U, V, N, E, restarts=cfg.restarts, rng_seed=cfg.seed, seeds=[seed])
            b = displacement_bounds(z, w, E)
            tag = f"E={E} |z-w|={dist}"
            checks.append(Check(f"{tag} oracle", val / 2, b.lower - tol, b.upper + tol))
            seed_val = math.sqrt(max(0.0, 1 - abs(np.vdot(seed, U.conj().T @ V @ seed)) ** 2))
            checks.append(Check(f"{tag} squeezed seed", seed_val, b.lower - seed_tol, b.lower + seed_tol))
    return SuiteResult("displacement-sandwich", checks, runtime_limit=300.0, details={"cutoff": d})


def suite_speed_limit_tightness(cfg, s=0.1):
    d = cfg.cutoffs.get("speed", 200)
    mu = 2 * s / (2 * s + math.pi)
    E = mu / (1 - mu)
    t = s / E
    N = number_operator(1, d)
    psi = geometric_state(mu, d)
    dist = evolve_and_distance(N, np.zeros_like(N), psi, t)
    phi = 2 * math.sqrt(s * (math.pi + 2 * s) / (math.pi**2 + 4 * math.pi * s + 8 * s * s))
    drift = closed_drift_bound(DriftParams(1.0, 0.0, 1.0, 0.0), E, t)
    checks = [Check("trace distance e^{-itN} vs I", dist, phi - 1e-3, drift + 1e-9)]
    details = {"mu": mu, "E": E, "t": t, "phi_max_branch": universal_phi_lower(s), "cutoff": d}
    return SuiteResult("speed-limit-tightness", checks, runtime_limit=60.0, details=details)


def suite_symplectic_pair(cfg, params=(0.0, 1e-4, 1e-3, 0.01, 0.1, 0.3), others=(0.0, -1e-3, 0.05, -0.3), E=1.0, tol=1e-2):
    d = cfg.cutoffs.get("pair", 60)
    N = number_operator(1, d)
    restarts = min(cfg.restarts, 50)
    units = {}

    def unitary(r):
        if r not in units:
            units[r] = gaussian_unitary(squeezer(r), d)
        return units[r]

    checks = []
    for r1 in params:
        for r2 in others:
            if r1 == r2:
                continue
            S, Sp = squeezer(r1), squeezer(r2)
            val, _ = ec_diamond_unitaries(unitary(r1), unitary(r2), N, E, restarts=restarts, rng_seed=cfg.seed)
            b = symplectic_pair_bound(S, Sp, E)
            checks.append(Check(f"squeezers {r1} vs {r2}", val, None, b.upper + tol))
    return SuiteResult("symplectic-pair", checks, runtime_limit=300.0, details={"cutoff": d, "E": E})


def suite_multicopy_qubit(cfg, E=1.5):
    theta = math.pi / 2
    U = np.eye(2)
    V = np.diag([1, np.exp(1j * theta)])
    mc = multi_copy_queries(U, V)
    h = np.diag([0.0, 1.0])
    I = np.eye(2)
    H3 = np.kron(np.kron(h, I), I) + np.kron(np.kron(I, h), I) + np.kron(np.kron(I, I), h)
    W = np.kron(np.kron(V, V), V)
    opt = nu_E(W, H3, E, restarts=cfg.restarts, rng_seed=cfg.seed)
    diamond = 2 * math.sqrt(max(0.0, 1 - opt.value**2))
    checks = [
        Check("copies needed", mc.n, 3, 3),
        Check("nu of 3-copy unitary", opt.value, None, 1e-6),
        Check("3-copy diamond norm", diamond, 2 - 1e-5, None),
        Check("energy of perfect discriminator", opt.energy, qubit_example_energy_lower(theta) - 1e-6, E + 1e-9),
    ]
    return SuiteResult("multicopy-qubit", checks, runtime_limit=60.0, details={"multicopy": mc.to_dict()})


def suite_optimal_variance(cfg, energies=(0.25, 1.0), tol=2e-3, seed_tol=1e-4):
    d = cfg.cutoffs.get("variance", 60)
    P2 = quadrature_square("p", 0, 1, d)
    N = number_operator(1, d)
    checks = []
    for E in energies:
        target = optimal_p_variance(E)
        seed = squeezed_vacuum_state(math.log(math.sqrt(E) + math.sqrt(E + 1)), d)
        opt = constrained_max_expectation(P2, N, E, seeds=[seed])
        checks.append(Check(f"E={E} max <p^2>", opt.value, target - tol, target + tol))
        checks.append(Check(f"E={E} squeezed seed <p^2>", expectation(seed, P2).real, target - seed_tol, target + seed_tol))
    return SuiteResult("optimal-variance", checks, runtime_limit=120.0, details={"cutoff": d})


# ---------------------------------------------------------------------------
# closed-form round trips


def suite_speed_limit_roundtrip(cfg, n_grids=100, tol=1e-9):
    rng = _rng(cfg, 11)
    worst_closed = worst_closed_diamond = worst_open = math.inf
    skipped = 0
    for k in range(n_grids):
        beta = 0.0 if k % 10 == 0 else rng.uniform(0, 2)
        dp = DriftParams(rng.uniform(0, 3), beta, rng.uniform(0, 2), rng.uniform(0, 1))
        E = rng.uniform(0, 5)
        d = rng.uniform(0, 2)
        try:
            t = closed_speed_limit_time(dp, E, d)
        except ParameterError:
            skipped += 1
        else:
            worst_closed = min(worst_closed, closed_vector_drift(dp, E, t) - d)
            worst_closed_diamond = min(worst_closed_diamond, closed_drift_bound(dp, E, t) - d)
        a = rng.uniform(0, 1)
        b = 0.0 if k % 10 == 5 else rng.uniform(0, 2)
        t = open_speed_limit_time(a, b, E, d)
        worst_open = min(worst_open, open_drift_bound(a, b, E, t) - d)
    checks = [
        Check("closed: vector drift(t_min) - d", worst_closed, -tol, None),
        Check("closed: diamond drift(t_min) - d", worst_closed_diamond, -tol, None),
        Check("open: drift(t_min) - d", worst_open, -tol, None),
    ]
    return SuiteResult("speed-limit-roundtrip", checks, runtime_limit=1.0, details={"n_grids": n_grids, "skipped": skipped})


# ---------------------------------------------------------------------------


SUITES = {
    "commutator-orthogonal": suite_commutator_orthogonal,
    "commutator-positive": suite_commutator_positive,
    "commutator-lemmas": suite_commutator_lemmas,
    "product-commutator": suite_product_commutator,
    "sk-contraction": suite_sk_contraction,
    "net-cardinality": suite_net_cardinality,
    "displacement-sandwich": suite_displacement_sandwich,
    "speed-limit-tightness": suite_speed_limit_tightness,
    "symplectic-pair": suite_symplectic_pair,
    "multicopy-qubit": suite_multicopy_qubit,
    "optimal-variance": suite_optimal_variance,
    "speed-limit-roundtrip": suite_speed_limit_roundtrip,
}

ALL_ORDER = [
    "commutator-orthogonal",
    "commutator-positive",
    "product-commutator",
    "sk-contraction",
    "net-cardinality",
    "displacement-sandwich",
    "speed-limit-tightness",
    "symplectic-pair",
    "multicopy-qubit",
    "optimal-variance",
    "speed-limit-roundtrip",
]


def aggregate_all(parts, timings=False):
    """Combine sub-suite results into the ``all`` report; runtime is the sum of the parts."""
    res = SuiteResult("all", [c for p in parts for c in p.checks], runtime_limit=1200.0)
    res.runtime = sum(p.runtime for p in parts)
    res.details = {"suites": [p.to_dict(timings) for p in parts]}
    # a sub-suite over its own time budget fails the whole run
    slow = [p.name for p in parts if not p.within_time_limit]
    if slow:
        res.checks.append(Check(f"suites over time budget: {', '.join(slow)}", len(slow), None, 0))
    return res


def run_suite(name, cfg=None, timings=False, **kwargs):
    """Run one named suite (or ``"all"``) and time it."""
    cfg = cfg or RunConfig()
    if name == "all":
        return aggregate_all([run_suite(n, cfg) for n in ALL_ORDER], timings)
    if name not in SUITES:
        raise ParameterError(f"unknown suite {name!r}; choose from {sorted(SUITES) + ['all']}")
    t0 = time.perf_counter()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = SUITES[name](cfg, **kwargs)
    res.runtime = time.perf_counter() - t0
    return res

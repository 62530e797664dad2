"""Command-line front end.

Machine-readable JSON goes to stdout, a one-line human summary to stderr.

Exit codes: 0 ok, 1 usage or malformed input, 2 coverage error,
3 divergence, 4 verification failure.
"""

import argparse
import json
import os
import sys

from . import __version__

EXIT_OK, EXIT_USAGE, EXIT_COVERAGE, EXIT_DIVERGENCE, EXIT_VERIFY = 0, 1, 2, 3, 4
CONFIG_ENV = "GAUSSK_CONFIG"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# input helpers


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _load_json_arg(text):
    """Inline JSON, or a path to a JSON file."""
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{text!r} is neither a file nor valid JSON") from exc


def _matrix(obj, dtype=float):
    import numpy as np

    if isinstance(obj, dict):
        obj = obj.get("rows", obj.get("matrix"))
    try:
        if dtype is complex:
            return np.array([[complex(str(x).replace(" ", "").replace("i", "j")) for x in row] for row in obj])
        return np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"cannot read a matrix from {obj!r}") from exc


def _load_config(path):
    from .config import RunConfig

    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return RunConfig()
    with open(path) as fh:
        cfg = RunConfig.from_dict(json.load(fh))
    cfg.paths = {**cfg.paths, "config": path}
    return cfg


def _emit(args, cfg, result, summary):
    report = {
        "tool": "gaussk",
        "version": __version__,
        "command": args.command,
        "config": cfg.to_dict(),
        "result": result,
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    print(summary, file=sys.stderr)


def _json_default(x):
    import numpy as np

    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


# ---------------------------------------------------------------------------
# compile


def cmd_compile(args, cfg):
    from .errors import CoverageError, DivergenceError, GausskError
    from .netgen import load_net
    from .sk import SKParams, sk_compile
    from .symplectic import check_symplectic

    S = check_symplectic(_matrix(_load_json_arg(args.target)))
    net = load_net(args.net)
    params = SKParams(
        m=net.m,
        r=net.r,
        epsilon0=args.epsilon0 if args.epsilon0 is not None else net.epsilon,
        delta=args.delta,
        max_level=args.max_level,
    )
    cfg.paths = {**cfg.paths, "target": args.target, "net": args.net, "out": args.out}
    try:
        res = sk_compile(S, net, params)
    except CoverageError as exc:
        _emit(args, cfg, {"error": "coverage", "message": str(exc), "params": params.to_dict()}, f"coverage error: {exc}")
        return EXIT_COVERAGE
    except DivergenceError as exc:
        result = {"error": "divergence", "message": str(exc), "per_level_errors": exc.errors, "params": params.to_dict()}
        _emit(args, cfg, result, f"divergence: {exc}")
        return EXIT_DIVERGENCE
    except GausskError as exc:
        if "outside r" in str(exc):
            _emit(args, cfg, {"error": "coverage", "message": str(exc)}, f"coverage error: {exc}")
            return EXIT_COVERAGE
        raise
    result = {**res.to_json(), "params": params.to_dict()}
    ok = res.achieved_error <= params.delta
    levels = ", ".join(f"{e:.2e}" for e in res.per_level_errors)
    _emit(args, cfg, result, f"compiled to length {len(res.word)} at level {res.level}; errors per level: {levels}")
    return EXIT_OK if ok else EXIT_DIVERGENCE


# ---------------------------------------------------------------------------
# bound


def _drift_params(a):
    from .bounds import DriftParams

    return DriftParams(a.alpha, a.beta, a.gamma, a.delta_rb)


def _multicopy(a):
    import numpy as np

    from .bounds import multi_copy_queries

    if a.theta is not None:
        U, V = np.eye(2), np.diag([1, np.exp(1j * a.theta)])
    elif a.U and a.V:
        U, V = _matrix(_load_json_arg(a.U), complex), _matrix(_load_json_arg(a.V), complex)
    else:
        raise UsageError("multicopy needs --theta or both --U and --V")
    res = multi_copy_queries(U, V, n_cap=a.n_cap)
    return _plain("multicopy", None, None, {"n_cap": a.n_cap}, "n = floor(pi / Theta) + 1", "count", res.to_dict())


def _plain(name, lower, upper, params, formula, scale, extra=None):
    from .bounds import BoundReport

    return BoundReport(name, lower, upper, params, formula, scale, extra or {}).to_dict()


def _bound_dispatch(a):
    import math

    from . import bounds as B

    sub = a.subcommand
    if sub == "displacement":
        return B.displacement_bounds(_floats(a.z), _floats(a.w), a.E).to_dict()
    if sub == "symplectic":
        S = _matrix(_load_json_arg(a.S))
        Sp = _matrix(_load_json_arg(a.S_prime))
        return B.symplectic_pair_bound(S, Sp, a.E).to_dict()
    if sub == "sk":
        return B.sk_theorem_bound(a.m, a.r, a.E, a.delta).to_dict()
    if sub == "drift":
        dp = _drift_params(a)
        return _plain(
            "closed_drift",
            None,
            B.closed_drift_bound(dp, a.E, a.t),
            {**dp.to_dict(), "E": a.E, "t": a.t},
            "2 sqrt2 sqrt(gamma E + delta) sqrt(alpha t) + sqrt2 beta t",
            "diamond",
            {"vector_drift": B.closed_vector_drift(dp, a.E, a.t)},
        )
    if sub == "speed-limit":
        dp = _drift_params(a)
        t = B.closed_speed_limit_time(dp, a.E, a.d)
        return _plain(
            "closed_speed_limit", t, None, {**dp.to_dict(), "E": a.E, "d": a.d},
            "t >= ((sqrt(d beta + nu^2) - nu) / beta)^2, nu = sqrt(alpha (gamma E + delta))", "vector",
        )
    if sub == "open":
        params = {"alpha": a.alpha, "beta": a.beta, "E": a.E}
        if a.t is not None:
            val = B.open_drift_bound(a.alpha, a.beta, a.E, a.t)
            return _plain("open_drift", None, val, {**params, "t": a.t}, "4 (2^{1/4} sqrt(alpha E t) + beta t)", "diamond")
        if a.d is None:
            raise UsageError("open needs --t or --d")
        t = B.open_speed_limit_time(a.alpha, a.beta, a.E, a.d)
        return _plain("open_speed_limit", t, None, {**params, "d": a.d}, "inverse of 4 (2^{1/4} sqrt(alpha E t) + beta t)", "diamond")
    if sub == "pfeifer":
        val = B.pfeifer_bound(a.gamma, a.delta, a.E, a.dt)
        return _plain("pfeifer", None, val, {"gamma": a.gamma, "delta": a.delta, "E": a.E, "dt": a.dt},
                      "sin(min(|dt| sqrt(gamma E + delta), pi/2))", "halved")
    if sub == "variance":
        val = B.optimal_p_variance(a.E)
        return _plain("optimal_p_variance", None, val, {"E": a.E}, "(sqrt(E) + sqrt(E+1))^2 / 2", "variance",
                      {"squeezing": math.log(math.sqrt(a.E) + math.sqrt(a.E + 1))})
    if sub == "phi":
        return _plain("universal_phi", B.universal_phi_lower(a.s), None, {"s": a.s},
                      "max of 2 sqrt(s(pi+2s)/(pi^2+4 pi s+8 s^2)) and, for s <= pi/2, 2 sqrt(s/pi (1 - s/pi))", "trace")
    if sub == "multicopy":
        return _multicopy(a)
    if sub == "qubit-lower":
        return _plain("qubit_energy_lower", B.qubit_example_energy_lower(a.theta), None, {"theta": a.theta},
                      "1/12 + sqrt6 / (9 theta)", "energy")
    if sub == "lindblad-diff":
        pairs = [_floats(chunk) for chunk in a.norms.split(";") if chunk.strip()]
        if any(len(p) != 4 for p in pairs):
            raise UsageError("--norms takes ';'-separated groups of 4 numbers")
        return _plain("lindblad_difference", None, B.bounded_lindblad_difference(pairs, a.t), {"norms": pairs, "t": a.t},
                      "t sum(||L^dag L - L'^dag L'|| + ||L - L'|| (||L|| + ||L'||))", "diamond")
    if sub == "brownian":
        dp = B.brownian_alpha_beta(a.gamma1, a.delta1, a.gamma2, a.delta2)
        return _plain("brownian_alpha_beta", None, None, {"gamma1": a.gamma1, "delta1": a.delta1, "gamma2": a.gamma2,
                      "delta2": a.delta2}, "alpha = sum(|g|+|d|)^2, beta = sum |g||d| + kappa", "constants", dp.to_dict())
    if sub == "quadratic-ab":
        X = _matrix(_load_json_arg(a.X), complex)
        Y = _matrix(_load_json_arg(a.Y), complex)
        dp = B.quadratic_alpha_beta(_floats(a.freqs), X, Y)
        return _plain("quadratic_alpha_beta", None, None, {"freqs": _floats(a.freqs)},
                      "relative bound of H' - H against sum d_j N_j", "constants", dp.to_dict())
    raise UsageError(f"unknown bound {sub!r}")


def cmd_bound(args, cfg):
    rep = _bound_dispatch(args)
    summary = f"{rep['name']}: lower={rep['lower']} upper={rep['upper']} ({rep['scale']})"
    if "n" in rep.get("extra", {}):
        summary = f"{rep['name']}: n={rep['extra']['n']}"
    _emit(args, cfg, rep, summary)
    return EXIT_OK


# ---------------------------------------------------------------------------
# net


def cmd_net(args, cfg):
    from .netgen import EulerGridNet, build_net, load_net, probe_coverage, save_net

    if args.action == "build":
        if args.kind == "grid":
            if args.m != 1:
                raise UsageError("the grid net is single-mode only")
            net = EulerGridNet(args.r, args.epsilon)
        else:
            net = build_net(args.m, args.r, args.epsilon, sample_budget=args.budget, rng_seed=args.seed)
        if not args.out:
            raise UsageError("net build needs --out")
        save_net(net, args.out)
        cfg.paths = {**cfg.paths, "out": args.out}
        info = {"path": args.out, "size": len(net), "m": net.m, "r": net.r, "epsilon": net.epsilon, "kind": args.kind}
        info["build"] = getattr(net, "info", {})
        # the report itself goes to stdout; the net file is the artifact
        args.out = None
        _emit(args, cfg, info, f"wrote {info['size']} elements to {info['path']}")
        return EXIT_OK
    net = load_net(args.path)
    info = {"path": args.path, "size": len(net), "m": net.m, "r": net.r, "epsilon": net.epsilon}
    if args.probes:
        info["coverage"] = probe_coverage(net, args.probes, rng_seed=cfg.seed + 1).to_dict()
    _emit(args, cfg, info, f"net of {info['size']} elements, epsilon={net.epsilon}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify


def cmd_verify(args, cfg):
    from .verify import run_suite

    kwargs = {}
    if args.E is not None:
        if args.suite != "displacement-sandwich":
            raise UsageError("--E applies to displacement-sandwich only")
        kwargs["energies"] = tuple(args.E)
    res = run_suite(args.suite, cfg, timings=args.timings, **kwargs)
    failed = [c.name for c in res.checks if not c.passed]
    summary = f"{res.name}: {'PASS' if res.passed else 'FAIL'} ({len(res.checks)} checks, {res.runtime:.1f} s)"
    if failed:
        summary += "; failed: " + "; ".join(failed)
    _emit(args, cfg, res.to_dict(args.timings), summary)
    return EXIT_OK if res.passed else EXIT_VERIFY


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help=f"RunConfig JSON (default: ${CONFIG_ENV})")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--threads", type=int, help="cap BLAS worker threads")

    p = _Parser(prog="gaussk", description="Gaussian-unitary compilation and energy-constrained bounds.")
    p.add_argument("--version", action="version", version=f"gaussk {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("compile", parents=[common], help="compile a symplectic target against a net")
    c.add_argument("target", help="target matrix JSON file or inline JSON")
    c.add_argument("net", help="net JSON file")
    c.add_argument("--delta", type=float, default=1e-6)
    c.add_argument("--epsilon0", type=float, help="net radius used by the recursion (default: the net's)")
    c.add_argument("--max-level", type=int, default=5)
    c.add_argument("--out", help="write the report here instead of stdout")

    b = sub.add_parser("bound", help="evaluate a closed-form bound")
    bs = b.add_subparsers(dest="subcommand", parser_class=_Parser)
    bs.required = True

    def add(name, *flags, **defaults):
        q = bs.add_parser(name, parents=[common])
        for f in flags:
            kind = float
            if f in ("z", "w", "S", "S-prime", "U", "V", "X", "Y", "norms", "freqs"):
                kind = str
            if f in ("m", "n-cap"):
                kind = int
            q.add_argument(f"--{f}", type=kind, default=defaults.get(f.replace("-", "_")))
        return q

    add("displacement", "z", "w", "E", E=0.0)
    add("symplectic", "S", "S-prime", "E", E=0.0)
    add("sk", "m", "r", "E", "delta", m=1, r=1.0, E=0.0, delta=1e-6)
    add("drift", "alpha", "beta", "gamma", "delta-rb", "E", "t", gamma=1.0, delta_rb=0.0, E=0.0)
    add("speed-limit", "alpha", "beta", "gamma", "delta-rb", "E", "d", gamma=1.0, delta_rb=0.0, E=0.0)
    add("open", "alpha", "beta", "E", "t", "d", E=0.0)
    add("pfeifer", "gamma", "delta", "E", "dt", delta=0.0, E=0.0)
    add("variance", "E", E=0.0)
    add("phi", "s")
    add("multicopy", "U", "V", "theta", "n-cap", n_cap=64)
    add("qubit-lower", "theta")
    add("lindblad-diff", "norms", "t")
    add("brownian", "gamma1", "delta1", "gamma2", "delta2", gamma1=0.0, delta1=0.0, gamma2=0.0, delta2=0.0)
    add("quadratic-ab", "freqs", "X", "Y")

    n = sub.add_parser("net", help="build or inspect a covering net")
    ns = n.add_subparsers(dest="action", parser_class=_Parser)
    ns.required = True
    nb = ns.add_parser("build", parents=[common])
    nb.add_argument("--m", type=int, default=1)
    nb.add_argument("--r", type=float, default=1.0)
    nb.add_argument("--epsilon", type=float, required=True)
    nb.add_argument("--kind", choices=["greedy", "grid"], default="greedy")
    nb.add_argument("--budget", type=int, default=1_000_000, help="consecutive rejections before stopping")
    nb.add_argument("--out", required=True)
    ni = ns.add_parser("info", parents=[common])
    ni.add_argument("path")
    ni.add_argument("--probes", type=int, default=0, help="coverage probes to draw")

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite")
    v.add_argument("--E", type=float, action="append", help="energy for displacement-sandwich (repeatable)")
    v.add_argument("--timings", action="store_true", help="include wall-clock runtimes in the report")
    return p


_COMMANDS = {"compile": cmd_compile, "bound": cmd_bound, "net": cmd_net, "verify": cmd_verify}


def _missing_required(args):
    if args.command != "bound":
        return []
    optional = {"t", "d", "theta", "U", "V"} if args.subcommand in ("open", "multicopy") else set()
    return [k for k, v in vars(args).items() if v is None and k not in {"config", "seed", "threads"} | optional]


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.threads:
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    missing = _missing_required(args)
    if missing:
        print(f"gaussk: missing flags: {', '.join('--' + m.replace('_', '-') for m in missing)}", file=sys.stderr)
        return EXIT_USAGE
    from .errors import GausskError

    try:
        cfg = _load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads:
            cfg.threads = args.threads
        args.seed = cfg.seed
        return _COMMANDS[args.command](args, cfg)
    except (UsageError, GausskError, OSError, json.JSONDecodeError) as exc:
        print(f"gaussk: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

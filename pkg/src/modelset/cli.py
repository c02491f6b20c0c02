"""Command line interface: ``modelset generate|verify|autocorr|nonuniform|hull``.

Exit codes: 0 success, 2 configuration error, 3 budget exhausted. Errors are
reported on stderr as a JSON object ``{"error", "message", "exit_code"}``.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from . import autocorr as ac
from . import io, nonuniform, pattern, topology
from .errors import BudgetExceeded, ConfigError, ModelSetError
from .groups import AveragingSequence
from .patch import Box
from .scheme import DEFAULT_BUDGET, FLOAT_TOL, check_gamma_regular

EXIT_CONFIG = 2
EXIT_BUDGET = 3


def _emit(text: str, out):
    if out:
        io.write_text(out, text)
    else:
        sys.stdout.write(text)


def _model_patch(loaded, args):
    """Patch over ``--region`` (Euclidean) or ``F_t`` with t = ``--region`` (groups)."""
    if args.region is None:
        raise ConfigError("--region is required")
    if loaded.is_group:
        try:
            t = float(args.region)
        except ValueError as exc:
            raise ConfigError("group schemes take a single --region value t") from exc
        return loaded.model.patch(t), ["F_t", t]
    region = io.parse_region(args.region)
    if region.dim != loaded.model.d:
        raise ConfigError(f"region has dimension {region.dim}, scheme has {loaded.model.d}")
    return loaded.model.patch(region), region.to_list()


def _parse_function(text: str, law=None) -> ac.TestFunction:
    try:
        profile, center, width = text.split(":")
        center = [float(c) for c in center.split(",")]
        return ac.TestFunction(profile, center, float(width), law)
    except ValueError as exc:
        raise ConfigError(f"bad function {text!r}; expected profile:c1[,c2..]:width") from exc


def _sequence(loaded) -> AveragingSequence:
    if loaded.kind == "heisenberg-zsqrt2":
        return AveragingSequence("heis_box")
    if loaded.kind == "sl2-zsqrt2":
        return AveragingSequence("hyp_ball")
    return AveragingSequence("box", loaded.model.d)


def cmd_generate(args) -> int:
    loaded = io.load_scheme(args.scheme, args.budget)
    patch, region = _model_patch(loaded, args)
    _emit(io.patch_to_csv(patch), args.out)
    if args.out:
        man = io.manifest(loaded, region, len(patch), "generate")
        io.write_text(args.out + ".manifest.json", io.dumps_report(man))
    return 0


def cmd_verify(args) -> int:
    loaded = io.load_scheme(args.scheme, args.budget)
    if args.check == "regularity":
        if loaded.kind != "euclidean":
            raise ConfigError("regularity applies to Euclidean schemes")
        radius = args.cutoff if args.cutoff is not None else 100.0
        m = loaded.model
        res = check_gamma_regular(m.scheme, m.window, radius, args.tol, budget=args.budget)
        report = res.to_dict() | {"parameters": {"search_radius": radius, "tol": args.tol}}
    elif args.check == "local-topology":
        if loaded.is_group:
            raise ConfigError("local-topology checks apply to Euclidean schemes")
        K = io.parse_region(args.region)
        report = topology.flc_orbit_criterion(loaded.model, K, args.cutoff, args.samples, args.t_range, args.seed)
    else:
        patch, region = _model_patch(loaded, args)
        if args.check == "delone":
            if len(patch) < 2:
                raise ConfigError(f"patch has {len(patch)} points; Delone check needs at least 2")
            report = pattern.delone_report(patch)
        else:
            radius = args.cutoff if args.cutoff is not None else 3.0
            report = pattern.flc_check(patch, radius)
            if patch.is_euclidean and isinstance(patch.region, Box):
                report["growth"] = pattern.difference_growth(patch, radius)["parameters"]
            if loaded.kind == "euclidean" and patch.exact is not None:
                D = pattern.difference_set(patch, radius)
                report["in_doubled_window"] = bool(pattern.in_doubled_window(loaded.model.window, D).all())
        report["parameters"] = dict(report.get("parameters") or {}, region=region)
    _emit(io.dumps_report(report), args.out)
    return 0


def cmd_autocorr(args) -> int:
    loaded = io.load_scheme(args.scheme, args.budget)
    model = loaded.model
    mode = args.mode
    if mode == "theoretical":
        if loaded.kind != "euclidean":
            raise ConfigError("theoretical atoms are computed for Euclidean schemes only")
        cutoff = 10.0 if args.cutoff is None else args.cutoff
        measure = ac.theoretical_autocorrelation(model.scheme, model.window, cutoff, args.budget)
        _emit(io.dumps_report(measure.to_dict()), args.out)
        return 0
    if mode == "compare":
        if loaded.kind != "euclidean":
            raise ConfigError("compare mode needs a Euclidean scheme")
        cutoff = 20.0 if args.cutoff is None else args.cutoff
        report = ac.compare_autocorrelation(model, args.atoms, args.T, args.tol_rel, cutoff)
        _emit(io.dumps_report(report), args.out)
        return 0
    if mode == "gram":
        if loaded.kind != "euclidean" or model.d != 1:
            raise ConfigError("gram mode needs a one-dimensional Euclidean scheme")
        cutoff = 10.0 if args.cutoff is None else args.cutoff
        measure = ac.theoretical_autocorrelation(model.scheme, model.window, cutoff, args.budget)
        fs = [_parse_function(f) for f in args.function] or [
            ac.TestFunction("tent", c, 0.4) for c in np.linspace(0.0, 3.0, 8)
        ]
        _emit(io.dumps_report(ac.positive_definiteness_gram(measure, fs)), args.out)
        return 0
    if args.t_grid is None:
        raise ConfigError("--t-grid is required")
    grid = io.parse_t_grid(args.t_grid)
    seq = _sequence(loaded)
    law = seq.law
    if mode == "density":
        _emit(io.dumps_report(ac.density_bound_trace(model, seq, grid)), args.out)
        return 0
    if mode == "sl2-ratio":
        if loaded.kind != "sl2-zsqrt2":
            raise ConfigError("sl2-ratio needs an sl2-zsqrt2 scheme")
        fs = [_parse_function(f, law) for f in args.function]
        f2 = ac.TestFunction("tent", law.identity(), 0.5, law)
        f1 = fs[0] if fs else ac.sl2_gap_function(model, seed=args.seed)
        if len(fs) > 1:
            f2 = fs[1]
        report = ac.sl2_sigma_ratio(model, f1, f2, grid)
        report["functions"] = [f1.to_dict(), f2.to_dict()]
        _emit(io.dumps_report(report), args.out)
        return 0
    # empirical
    if not args.function:
        raise ConfigError("empirical mode needs --function")
    f = _parse_function(args.function[0], law)
    trace = ac.sigma_t(model, seq, f, grid)
    _emit(io.sigma_trace_to_csv(trace), args.out)
    return 0


def cmd_nonuniform(args) -> int:
    text = args.primes.strip()
    try:
        primes = [int(p) for p in text.split(",")] if text else []
    except ValueError as exc:
        raise ConfigError(f"bad prime list {args.primes!r}") from exc
    report = nonuniform.nonuniform_report(primes, args.budget)
    _emit(io.dumps_report(report), args.out)
    return 0


def cmd_hull(args) -> int:
    loaded = io.load_scheme(args.scheme, args.budget)
    if loaded.is_group:
        raise ConfigError("hull operations are implemented for Euclidean schemes")
    model = loaded.model
    K = io.parse_region(args.region)
    shift = np.array([float(x) for x in args.shift.split(",")]) if args.shift else np.zeros(K.dim)
    reach = 2 * (args.eps or 0.0) + float(np.abs(shift).max()) + 1.0
    big = K.inflate(reach)
    P = model.patch(big)
    Q = model.patch(big.translate(-shift)).translate(shift)
    inputs = {"K": K.to_list(), "eps": args.eps, "shift": shift.tolist()}
    if args.op in ("basic", "miss"):
        fn = topology.chabauty_basic if args.op == "basic" else topology.chabauty_miss
        report = {"op": args.op, "inputs": inputs, "verdict": fn(Q, K), "witness_t": None, "oracle_agrees": None}
    elif args.op == "orbit":
        report = topology.flc_orbit_criterion(model, K, args.eps, args.samples, args.t_range, args.seed)
    else:
        if args.eps is None:
            raise ConfigError("--eps is required")
        if args.op == "rubber":
            verdict = topology.local_rubber_member(Q, P, K, args.eps)
            report = {"op": "rubber", "inputs": inputs, "verdict": verdict, "witness_t": None, "oracle_agrees": None}
        else:
            res = topology.local_entourage_member(P, Q, K, args.eps)
            agrees = None
            if args.oracle:
                agrees = topology.entourage_bruteforce(P, Q, K, args.eps)["verdict"] == res["verdict"]
            report = {"op": "entourage", "inputs": inputs, "verdict": res["verdict"], "witness_t": res["witness_t"], "oracle_agrees": agrees}
    _emit(io.dumps_report(report), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scheme", help="scheme definition file (JSON)")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--region", help="a,b[,c,d...] box, or t for group schemes")
    common.add_argument("--t-grid", dest="t_grid", help="start:stop:step")
    common.add_argument("--cutoff", type=float, help="radius for atoms, differences or searches")
    common.add_argument("--tol", type=float, default=FLOAT_TOL)
    common.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    common.add_argument("--seed", type=int, default=0)

    parser = argparse.ArgumentParser(prog="modelset", description="Regular model sets: enumeration, checks, auto-correlation.")
    sub = parser.add_subparsers(dest="cmd", required=True)

    sub.add_parser("generate", parents=[common], help="enumerate a patch to CSV")

    p = sub.add_parser("verify", parents=[common], help="delone, flc, regularity or local-topology report")
    p.add_argument("check", choices=["delone", "flc", "regularity", "local-topology"])
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--t-range", dest="t_range", type=float, default=1000.0)

    p = sub.add_parser("autocorr", parents=[common], help="sigma_t traces, atoms and comparisons")
    p.add_argument("mode", choices=["empirical", "theoretical", "compare", "gram", "density", "sl2-ratio"])
    p.add_argument("--function", action="append", default=[], help="profile:c1[,c2..]:width (repeatable)")
    p.add_argument("--atoms", type=int, default=10)
    p.add_argument("--T", type=float, default=1e4)
    p.add_argument("--tol-rel", dest="tol_rel", type=float, default=0.05)

    p = sub.add_parser("nonuniform", parents=[common], help="orbit and covolume report for a prime set")
    p.add_argument("--primes", required=True, help="comma separated primes, e.g. 3,5")

    p = sub.add_parser("hull", parents=[common], help="Chabauty-Fell and local-topology operations")
    p.add_argument("op", choices=["basic", "miss", "rubber", "entourage", "orbit"])
    p.add_argument("--eps", type=float)
    p.add_argument("--shift", help="Q is the model set translated by this vector")
    p.add_argument("--oracle", action="store_true", help="also run the grid brute-force oracle")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--t-range", dest="t_range", type=float, default=1000.0)
    return parser


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "autocorr": cmd_autocorr,
    "nonuniform": cmd_nonuniform,
    "hull": cmd_hull,
}


def _fail(exc: Exception, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


VALUE_FLAGS = ("--region", "--shift", "--t-grid", "--function")


def _glue_negative_values(argv):
    """``--region -5,5`` -> ``--region=-5,5`` (argparse reads ``-5,5`` as an option)."""
    out = []
    it = iter(argv)
    for tok in it:
        if tok in VALUE_FLAGS:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    if args.budget <= 0:
        return _fail(ConfigError("--budget must be positive"), EXIT_CONFIG)
    if args.cmd != "nonuniform" and not args.scheme:
        return _fail(ConfigError("--scheme is required"), EXIT_CONFIG)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            code = COMMANDS[args.cmd](args)
        for w in caught:
            sys.stderr.write(json.dumps({"warning": w.category.__name__, "message": str(w.message)}) + "\n")
        return code
    except BudgetExceeded as exc:
        return _fail(exc, EXIT_BUDGET)
    except ModelSetError as exc:
        return _fail(exc, EXIT_CONFIG)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver.

Every subcommand writes either CSV (``# key=value`` metadata lines, then a
fixed header plus subcommand-specific columns) or JSON with a ``meta`` block.
Output is a pure function of the configuration and the master seed; the
worker count is not part of the configuration echo.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import (
    DEFAULT_REPLICATIONS, DEFAULT_WINDOWS, alpha0, criterion_check, phase_diagram,
    scaled_tail_curve, theorem_tag,
)
from .displacement import EngineKind
from .frog import FrogConfig, recurrence_profile, run_replications, wilson_interval
from .laws import Beta, parse_occupancy
from .rng import SeedSpec
from .rumor import (
    PROCESSES, coupling_audit, fw_reach_probability_dp, parse_radius,
    radius_cdf_from_occupancy, rumor_reach_mc,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_AUDIT = 0, 1, 2, 3
SEED_ENV = "FROGSIM_SEED"
FIXED_HEADER = ("alpha", "beta", "occupancy", "engine", "window", "reps",
                "estimate", "ci_lo", "ci_hi", "seed", "tag")
NOT_ECHOED = {"workers", "output", "config", "command", "handler"}


class UsageError(Exception):
    pass


class AuditFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ parsing


def _int_list(text):
    return [int(float(v)) for v in str(text).split(",") if v.strip()]


def _float_list(text):
    return [float(v) for v in str(text).split(",") if v.strip()]


def _positive_int(text):
    v = int(float(text))
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _extended_real(text):
    t = str(text).strip().lower()
    return math.inf if t in ("inf", "+inf", "infinity") else float(t)


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _common(seed_default):
    p = _Parser(add_help=False)
    p.add_argument("--seed", type=int, default=seed_default, help="master seed")
    p.add_argument("--output", "-o", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--config", default=None, help="flat key=value file; flags override it")
    return p


def build_parser(seed_default: int = 0) -> argparse.ArgumentParser:
    common = _common(seed_default)
    parser = _Parser(prog="frogsim", description="Frog model and firework simulations.")
    parser.add_argument("--version", action="version", version=f"frogsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("tail", parents=[common], help="scaled tail n P(D_right >= n)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n-grid", type=_int_list, default=None)
    p.add_argument("--occupancy", default="const:1")
    p.set_defaults(handler=cmd_tail, default_format="csv")

    p = sub.add_parser("alpha0", parents=[common], help="survival threshold on beta = 0.5")
    p.add_argument("--mean-eta", type=_extended_real, required=True)
    p.set_defaults(handler=cmd_alpha0, default_format="json")

    p = sub.add_parser("frog", parents=[common], help="survival estimate for one window")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--occupancy", default="const:1")
    p.add_argument("--window", type=_positive_int, default=1000)
    p.add_argument("--reps", type=_positive_int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--engine", default="exact")
    p.add_argument("--walk", choices=("exit", "steps"), default="exit")
    p.add_argument("--per-rep", default=None, help="path for the per-replication CSV")
    p.set_defaults(handler=cmd_frog, default_format="json")

    p = sub.add_parser("phase", parents=[common], help="phase-diagram sweep")
    p.add_argument("--alpha-grid", type=_float_list, required=True)
    p.add_argument("--beta-grid", type=_float_list, required=True)
    p.add_argument("--occupancy", default="const:1")
    p.add_argument("--windows", type=_int_list, default=list(DEFAULT_WINDOWS))
    p.add_argument("--reps", type=_positive_int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--engine", default="exact")
    p.set_defaults(handler=cmd_phase, default_format="csv")

    p = sub.add_parser("rumor", parents=[common], help="firework reach probability")
    p.add_argument("--process", choices=PROCESSES, default="fw")
    p.add_argument("--radius", required=True)
    p.add_argument("--occupancy", default="const:1")
    p.add_argument("--window", type=_positive_int, default=100)
    p.add_argument("--reps", type=_positive_int, default=10_000)
    p.add_argument("--dp", action="store_true", help="exact dynamic programme (fw only)")
    p.add_argument("--r-max", type=_positive_int, default=64)
    p.set_defaults(handler=cmd_rumor, default_format="json")

    p = sub.add_parser("couple", parents=[common], help="pathwise coupling audit")
    p.add_argument("--reps", type=_positive_int, default=10_000)
    p.add_argument("--window", type=_positive_int, default=50)
    p.add_argument("--radius", default="powerlaw:1.5")
    p.add_argument("--occupancy", default="const:1")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.5)
    p.set_defaults(handler=cmd_couple, default_format="json")

    p = sub.add_parser("recurrence", parents=[common], help="root visits among surviving runs")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--occupancy", default="const:1")
    p.add_argument("--windows", type=_int_list, default=list(DEFAULT_WINDOWS))
    p.add_argument("--reps", type=_positive_int, default=DEFAULT_REPLICATIONS)
    p.add_argument("--engine", default="exact")
    p.set_defaults(handler=cmd_recurrence, default_format="csv")
    return parser


def read_config_file(path: str) -> list[str]:
    """Turn ``key = value`` lines into flag tokens; ``#`` starts a comment."""
    tokens = []
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "yes", "on"):
            tokens.append(flag)
        elif value.lower() in ("false", "no", "off"):
            continue
        else:
            tokens += [flag, value]
    return tokens


def _config_path(argv):
    for j, tok in enumerate(argv):
        if tok == "--config" and j + 1 < len(argv):
            return argv[j + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv):
    argv = list(argv)
    path = _config_path(argv)
    if path is not None:
        # file values go right after the subcommand, so explicit flags win
        cmd = next((j for j, t in enumerate(argv) if not t.startswith("-")), None)
        if cmd is None:
            raise UsageError("missing subcommand")
        argv = argv[: cmd + 1] + read_config_file(path) + argv[cmd + 1:]
    args = build_parser(_default_seed()).parse_args(argv)
    if args.format is None:
        args.format = args.default_format
    if not 0 <= args.seed < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    return args


# ------------------------------------------------------------------- output


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def _echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in NOT_ECHOED or k == "default_format":
            continue
        if isinstance(v, list):
            v = ",".join(_fmt(x) for x in v)
        out[k] = _fmt(v)
    return out


def render_csv(args, extra_cols, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# tool=frogsim version={__version__}\n")
    buf.write(f"# seed={args.seed}\n")
    buf.write(f"# command={args.command}\n")
    for k, v in _echo(args).items():
        buf.write(f"# config.{k}={v}\n")
    buf.write(",".join(FIXED_HEADER + tuple(extra_cols)) + "\n")
    width = len(FIXED_HEADER) + len(extra_cols)
    for row in rows:
        if len(row) != width:
            raise AssertionError("row width does not match the header")
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _json_value(v):
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return 0 if v == 0 else v
    return v


def render_json(args, payload: dict) -> str:
    doc = dict(payload)
    doc["meta"] = {"tool": "frogsim", "version": __version__, "seed": args.seed,
                   "command": args.command, "config": _echo(args)}
    return json.dumps(_json_value(doc), indent=2) + "\n"


def write_atomic(path: str, text: str):
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".frogsim-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def emit(args, payload: dict, extra_cols=(), rows=()):
    if args.format == "csv":
        if not rows:
            raise UsageError(f"'{args.command}' has no tabular output; use --format json")
        write_atomic(args.output, render_csv(args, extra_cols, rows))
    else:
        write_atomic(args.output, render_json(args, payload))


# ---------------------------------------------------------------- commands


def _engine(text):
    try:
        return EngineKind.parse(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_tail(args):
    occ = parse_occupancy(args.occupancy)
    grid = args.n_grid
    if grid is not None and (not grid or min(grid) < 1):
        raise UsageError("--n-grid needs positive integers")
    report = criterion_check(args.alpha, args.beta, occ, grid)
    curve = scaled_tail_curve(args.alpha, args.beta, grid)
    rows = [(args.alpha, args.beta, str(occ), None, None, None, float(v), None, None, args.seed,
             curve.trend, int(n), float(v) / int(n))
            for n, v in zip(curve.n, curve.values)]
    payload = {"alpha": args.alpha, "beta": args.beta, "occupancy": str(occ),
               "n": curve.n.tolist(), "scaled_tail": curve.values.tolist(),
               "slope": curve.slope, "trend": curve.trend, "verdict": report.verdict,
               "notes": report.notes}
    emit(args, payload, ("n", "tail"), rows)


def cmd_alpha0(args):
    value = alpha0(args.mean_eta)
    row = (None, 0.5, None, None, None, None, value, None, None, args.seed, "alpha0",
           args.mean_eta)
    emit(args, {"alpha0": value}, ("mean_eta",), [row])


def cmd_frog(args):
    occ = parse_occupancy(args.occupancy)
    engine = _engine(args.engine)
    cfg = FrogConfig(window=args.window, pi_law=Beta(args.alpha, args.beta), occupancy=occ,
                     engine=engine, seed=SeedSpec(args.seed), walk=args.walk)
    res = run_replications(cfg, args.reps, args.workers)
    reached = res["reached_boundary"]
    k = int(reached.sum())
    lo, hi = wilson_interval(k, args.reps)
    tag = theorem_tag(args.alpha, args.beta, occ)
    payload = {"alpha": args.alpha, "beta": args.beta, "occupancy": str(occ),
               "engine": engine.label, "window": args.window, "reps": args.reps,
               "estimate": k / args.reps, "ci_lo": lo, "ci_hi": hi, "successes": k,
               "truncation_events": int(res["truncation_events"].sum()), "tag": tag}
    extra = ("replication", "activated_left", "activated_right", "root_visit_count",
             "particles_activated", "truncation_events")
    rows = [(args.alpha, args.beta, str(occ), engine.label, args.window, 1,
             int(reached[j]), None, None, args.seed, tag)
            + tuple(int(res[c][j]) for c in extra) for j in range(args.reps)]
    if args.per_rep:
        write_atomic(args.per_rep, render_csv(args, extra, rows))
    emit(args, payload, extra, rows)


def cmd_phase(args):
    occ = parse_occupancy(args.occupancy)
    engine = _engine(args.engine)
    if not args.alpha_grid or not args.beta_grid or not args.windows:
        raise UsageError("grids must be nonempty")
    cells = phase_diagram(args.alpha_grid, args.beta_grid, occ, args.windows, args.reps,
                          engine, args.seed, args.workers)
    rows = [(c.alpha, c.beta, c.occupancy, c.engine.label, c.window, c.replications,
             c.estimate, c.ci_lo, c.ci_hi, c.seed, c.tag) for c in cells]
    payload = {"cells": [dict(zip(FIXED_HEADER, r)) for r in rows]}
    emit(args, payload, (), rows)


def _dp_pmf(occ, radius, r_max):
    i = np.arange(r_max + 1)
    cdf = np.asarray(radius_cdf_from_occupancy(occ, radius, i), dtype=float)
    pmf = np.diff(np.concatenate([[0.0], cdf]))
    pmf[-1] += 1.0 - cdf[-1]  # fold the tail into the top bin
    return np.clip(pmf, 0.0, None), float(1.0 - cdf[-1])


def cmd_rumor(args):
    occ = parse_occupancy(args.occupancy)
    try:
        radius = parse_radius(args.radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {"process": args.process, "radius": args.radius, "occupancy": str(occ),
               "window": args.window}
    if args.dp:
        if args.process != "fw":
            raise UsageError("--dp is only available for --process fw")
        if args.window > 10_000:
            raise UsageError("--dp supports windows up to 10000")
        pmf, folded = _dp_pmf(occ, radius, args.r_max)
        # drop empty top bins so that r_max is as small as the law allows
        last = int(np.max(np.nonzero(pmf)[0])) if np.any(pmf > 0) else 0
        value = fw_reach_probability_dp(pmf[: last + 1] / pmf[: last + 1].sum(), args.window)
        payload.update(method="dp", probability=value, folded_tail_mass=folded)
        row = (None, None, str(occ), "fw-dp", args.window, None, value, value, value,
               args.seed, "dp")
    else:
        est, lo, hi, k = rumor_reach_mc(args.process, occ, radius, args.window, args.reps,
                                        args.seed, args.workers)
        payload.update(method="mc", reps=args.reps, probability=est, ci_lo=lo, ci_hi=hi,
                       successes=k)
        row = (None, None, str(occ), args.process, args.window, args.reps, est, lo, hi,
               args.seed, "mc")
    emit(args, payload, ("radius",), [row + (args.radius,)])


def cmd_couple(args):
    occ = parse_occupancy(args.occupancy)
    try:
        radius = parse_radius(args.radius)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    audit = coupling_audit(occ, radius, args.window, args.reps, args.seed)
    base = FrogConfig(window=args.window, pi_law=Beta(args.alpha, args.beta), occupancy=occ,
                      seed=SeedSpec(args.seed))
    reach = {}
    for e in (EngineKind.RIGHT_ONLY, EngineKind.EXACT_WALK, EngineKind.STAR_UPPER):
        cfg = replace(base, engine=e)
        reach[e] = run_replications(cfg, args.reps, args.workers)["reached_boundary"]
    bad_engine = int(np.sum(reach[EngineKind.RIGHT_ONLY] & ~reach[EngineKind.EXACT_WALK])
                     + np.sum(reach[EngineKind.EXACT_WALK] & ~reach[EngineKind.STAR_UPPER]))
    violations = audit.violations + bad_engine
    payload = {
        "violations": violations,
        "rumor_chain": {"violations": audit.violations, "fw": audit.fw, "bfw": audit.bfw,
                        "bfw_star": audit.bfw_star, "fw_star": audit.fw_star},
        "engine_chain": {"violations": bad_engine,
                         **{e.label: int(reach[e].sum()) for e in reach}},
        "reps": args.reps, "window": args.window,
    }
    rows = [(None, None, str(occ), "rumor", args.window, args.reps, audit.violations, None,
             None, args.seed, "violations"),
            (args.alpha, args.beta, str(occ), "engines", args.window, args.reps, bad_engine,
             None, None, args.seed, "violations")]
    emit(args, payload, (), rows)
    if violations:
        raise AuditFailure(f"{violations} coupling violations")


def cmd_recurrence(args):
    occ = parse_occupancy(args.occupancy)
    engine = _engine(args.engine)
    if not args.windows or min(args.windows) < 1:
        raise UsageError("--windows needs positive integers")
    cfg = FrogConfig(window=args.windows[0], pi_law=Beta(args.alpha, args.beta), occupancy=occ,
                     engine=engine, seed=SeedSpec(args.seed))
    prof = recurrence_profile(cfg, args.windows, args.reps, args.workers)
    tag = theorem_tag(args.alpha, args.beta, occ)
    rows = []
    for r in prof.rows:
        lo, hi = wilson_interval(r.surviving, r.replications)
        rows.append((args.alpha, args.beta, str(occ), engine.label, r.window, r.replications,
                     r.surviving / r.replications, lo, hi, args.seed, tag,
                     r.surviving, r.mean_root_visits, r.mean_census))
    payload = {"rows": [dict(zip(FIXED_HEADER + ("surviving", "mean_root_visits", "mean_census"), r))
                        for r in rows]}
    emit(args, payload, ("surviving", "mean_root_visits", "mean_census"), rows)


# --------------------------------------------------------------------- main


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        args.handler(args)
    except UsageError as exc:
        print(f"frogsim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AuditFailure as exc:
        print(f"frogsim: audit failed: {exc}", file=sys.stderr)
        return EXIT_AUDIT
    except ArithmeticError as exc:
        print(f"frogsim: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"frogsim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

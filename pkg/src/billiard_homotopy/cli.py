"""Command-line front end.

Every subcommand writes its artifacts plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 1 verification failure, 2 usage error, 3 resource cap.
A ``--config`` file of ``key=value`` lines supplies defaults; flags win.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import records
from .chains import InadmissibleError, build_chain
from .geometry import DEFAULT_R0, TangencyError, random_state, simulate, validate_radius
from .solver import BoundaryContactError, ContinuationError
from .group import DEFAULT_RADIUS, ResourceLimitError, check_word, enumerate_ball, free_reduce, growth_rate

log = logging.getLogger("billiard_homotopy")

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def read_config(path) -> dict:
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _vector(text: str) -> tuple:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three integers, e.g. 1,0,0")
    return tuple(int(p) for p in parts)


def _floats(text: str) -> list:
    return [float(p) for p in text.replace(",", " ").split()]


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value defaults file")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--r0", type=float, default=DEFAULT_R0)
    common.add_argument("--radius", type=int, default=6)
    common.add_argument("--radius-cap", type=int, default=DEFAULT_RADIUS)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="billiard-homotopy", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    subs = {}

    s = subs["simulate"] = sub.add_parser("simulate", parents=[common], help="simulate one orbit")
    s.add_argument("--T", type=float, default=100.0)
    s.add_argument("--dps", type=int, default=None, help="mpmath digits (default: floats)")

    s = subs["itinerary"] = sub.add_parser("itinerary", parents=[common], help="itinerary and rotation sample")
    s.add_argument("--T", type=float, default=100.0)
    s.add_argument("--depth", type=int, default=4)

    s = subs["minimize"] = sub.add_parser("minimize", parents=[common], help="rubber-band solution for a word")
    s.add_argument("--word", required=True)
    s.add_argument("--inflate", type=float, default=0.0, help="inflate to this radius")

    subs["turns"] = sub.add_parser("turns", parents=[common], help="17-turn table")

    s = subs["growth"] = sub.add_parser("growth", parents=[common], help="Cayley ball table")
    s.add_argument("--letters", default="aAbBcCdD")
    s.add_argument("--state-cap", type=int, default=10_000_000)

    s = subs["rotation"] = sub.add_parser("rotation", parents=[common], help="rotation samples and radial bounds")
    s.add_argument("--mode", choices=("simulated", "constructed"), default="simulated")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--T", type=float, default=100.0)
    s.add_argument("--length", type=int, default=24)
    s.add_argument("--depth", type=int, default=4)

    s = subs["periodic"] = sub.add_parser("periodic", parents=[common], help="closed orbit for a cyclic word")
    s.add_argument("--word", required=True)
    s.add_argument("--v", type=_vector, default=None, help="translation (default: word displacement)")
    s.add_argument("--inflate", type=float, default=0.0)

    s = subs["entropy"] = sub.add_parser("entropy", parents=[common], help="n_T counts and entropy window")
    s.add_argument("--T-values", type=_floats, default=[1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30])
    s.add_argument("--word-cap", type=int, default=5)
    s.add_argument("--letters", default="aAbBcCdD")

    s = subs["verify-all"] = sub.add_parser("verify-all", parents=[common], help="run every acceptance check")
    s.add_argument("--only", type=int, action="append", help="run just this check number")
    return p, subs


def _config_of(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items())}


def _validate(args):
    try:
        validate_radius(args.r0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.radius > args.radius_cap:
        raise UsageError(f"radius {args.radius} exceeds cap {args.radius_cap}")


# --------------------------------------------------------------------------
# Subcommands.  Each returns (exit code, list of written paths).

def _safe_simulate(rng, r0, T, dps=None):
    while True:
        try:
            return simulate(random_state(rng, r0), r0, T, dps=dps)
        except TangencyError:
            log.info("tangent start, redrawing")


def cmd_simulate(args, out: Path):
    rng = np.random.default_rng(args.seed)
    tr = _safe_simulate(rng, args.r0, args.T, args.dps)
    data = records.trajectory_dict(tr)
    data["seed"] = args.seed
    return EXIT_OK, [records.write_json(out / "trajectory.json", data)]


def cmd_itinerary(args, out: Path):
    from .rotation import rotation_sample, speed_counts

    rng = np.random.default_rng(args.seed)
    tr = _safe_simulate(rng, args.r0, args.T)
    smp = rotation_sample(tr, args.depth)
    data = {"word": tr.word, "reduced": free_reduce(tr.word), "counts": tr.counts,
            "crossing_speed": speed_counts(tr), "sample": smp.as_dict(),
            "interval_flag": smp.flagged, "seed": args.seed}
    return EXIT_OK, [records.write_json(out / "itinerary.json", data)]


def cmd_minimize(args, out: Path):
    from .solver import inflate, minimize, trace_check

    w = check_word(args.word)
    sol = minimize(build_chain(w), args.tol)
    paths = [records.write_json(out / "solution.json", sol.as_dict())]
    if args.inflate:
        inf = inflate(sol, args.inflate)
        trace_check(inf.trajectory, args.inflate)
        data = records.trajectory_dict(inf.trajectory)
        data["specular_residual"] = inf.max_specular_residual
        paths.append(records.write_json(out / "inflated.json", data))
    return EXIT_OK, paths


def cmd_turns(args, out: Path):
    from .solver import verify_turn_table, worst_turn

    recs = verify_turn_table()
    rows = [(r.turn, repr(r.computed_time), repr(r.bound), repr(r.margin)) for r in recs]
    path = records.write_csv(out / "turns.csv", ("turn", "computed", "bound", "margin"), rows)
    worst = worst_turn(recs)
    log.info("worst turn %s: %.9f", worst.turn, worst.computed_time)
    return (EXIT_OK if all(r.within for r in recs) else EXIT_FAIL), [path]


def cmd_growth(args, out: Path):
    table = enumerate_ball(args.radius, args.letters, max_radius=args.radius_cap, state_cap=args.state_cap)
    paths = [records.write_csv(out / "ball.csv", ("radius", "sphere", "ball"), table.to_csv_rows())]
    code = EXIT_OK
    if args.radius >= 4:
        rep = growth_rate(table)
        paths.append(records.write_json(out / "growth.json", {
            "rate": rep.rate, "window": list(rep.window), "in_window": rep.in_window,
            "letters": table.letters}))
        if args.letters == "aAbBcCdD" and not rep.in_window:
            code = EXIT_FAIL
    return code, paths


def cmd_rotation(args, out: Path):
    from .rotation import (construct_fast, lower_bound_report, random_geodesic_word,
                           rotation_sample, upper_bound_report)

    rng = np.random.default_rng(args.seed)
    if args.mode == "simulated":
        trs = [_safe_simulate(rng, args.r0, args.T) for _ in range(args.n)]
        samples = [rotation_sample(tr, args.depth) for tr in trs]
        report = upper_bound_report(trs)
    else:
        samples = [construct_fast(random_geodesic_word(rng, args.length), args.length, args.depth)
                   for _ in range(args.n)]
        report = lower_bound_report(samples)
    paths = [records.write_jsonl(out / "samples.jsonl", [s.as_dict() for s in samples]),
             records.write_json(out / "bounds.json", report.as_dict())]
    return (EXIT_OK if report.ok else EXIT_FAIL), paths


def cmd_periodic(args, out: Path):
    from .rotation import displacement, periodic_sample
    from .solver import inflate

    w = check_word(args.word)
    v = args.v if args.v is not None else displacement(w)
    smp = periodic_sample(w, v)
    data = smp.solution.as_dict()
    data.update(sample=smp.as_dict(), translation=list(v))
    paths = [records.write_json(out / "periodic.json", data)]
    if args.inflate:
        inf = inflate(smp.solution, args.inflate)
        paths.append(records.write_json(out / "periodic_inflated.json", records.trajectory_dict(inf.trajectory)))
    return EXIT_OK, paths


def cmd_entropy(args, out: Path):
    from .entropy import estimate

    rep = estimate(args.T_values, args.word_cap, args.letters)
    rows = [(T, n, rep.slope) for T, n in zip(rep.T_values, rep.counts)]
    paths = [records.write_csv(out / "entropy.csv", ("T", "n_T", "slope"), rows),
             records.write_json(out / "entropy.json", rep.as_dict())]
    ok = 0 <= rep.slope <= rep.upper + 0.05
    return (EXIT_OK if ok else EXIT_FAIL), paths


def cmd_verify_all(args, out: Path):
    from .verification import CHECKS, run_check

    numbers = args.only or [k for k, _, _ in CHECKS]
    results = []
    for k in numbers:
        res = run_check(k)
        print(res.line(), flush=True)
        results.append(res)
    data = [{"number": r.number, "name": r.name, "passed": r.passed, "detail": r.detail,
             "seconds": r.seconds} for r in results]
    path = records.write_json(out / "acceptance.json", data)
    return (EXIT_OK if all(r.passed for r in results) else EXIT_FAIL), [path]


COMMANDS = {
    "simulate": cmd_simulate, "itinerary": cmd_itinerary, "minimize": cmd_minimize,
    "turns": cmd_turns, "growth": cmd_growth, "rotation": cmd_rotation,
    "periodic": cmd_periodic, "entropy": cmd_entropy, "verify-all": cmd_verify_all,
}


def _coerce(action, value: str):
    if isinstance(action, argparse._StoreTrueAction):
        return value.lower() in ("1", "true", "yes")
    if action.type is not None:
        return action.type(value)
    return value


def _parse(argv):
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    command = next((a for a in argv if a in subs), None)
    if known.config and command:
        config = read_config(known.config)
        actions = {a.dest: a for a in subs[command]._actions}
        unknown = sorted(set(config) - set(actions))
        if unknown:
            raise UsageError(f"unknown config keys: {unknown}")
        subs[command].set_defaults(**{k: _coerce(actions[k], v) for k, v in config.items()})
        for k in config:
            actions[k].required = False      # supplied by the file
    return parser.parse_args(argv)


def dispatch(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _parse(argv)
    except SystemExit as exc:          # argparse usage errors and --help
        return int(exc.code or 0)
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        _validate(args)
        code, paths = COMMANDS[args.command](args, out)
    except ResourceLimitError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, InadmissibleError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ContinuationError, BoundaryContactError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    wall = time.perf_counter() - t0
    records.write_json(out / "manifest.json", records.manifest(
        {"command": args.command, **_config_of(args)}, args.seed, wall, paths))
    log.info("%s finished in %.2fs (exit %d)", args.command, wall, code)
    return code


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

"""Command-line entry point: gen, solve, experiment, oracle."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import harness
from .model import Instance, InstanceConfig, ModelError, draw_instance
from .oracle import grid_basis_pursuit
from .recovery import recover
from .sdp import SolverParams, solve_primal

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

log = logging.getLogger("specrecover")


class _IOFailure(Exception):
    pass


def _read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path}: not valid JSON ({exc})") from exc
    except OSError as exc:
        raise _IOFailure(f"{path}: {exc.strerror or exc}") from exc


def _write_text(path, text: str):
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise _IOFailure(f"{path}: {exc.strerror or exc}") from exc


def _emit(text: str, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        _write_text(out, text)


def cmd_gen(args) -> int:
    doc = dict(_read_json(args.config))
    trial = int(doc.pop("trial", 0))
    if args.seed is not None:
        doc["master_seed"] = args.seed
    inst = draw_instance(InstanceConfig.from_dict(doc), trial)
    _emit(inst.dumps() + "\n", args.out)
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = Instance.from_json(_read_json(args.instance))
    if args.p is not None:
        if not 0 <= args.p <= inst.s:
            raise ModelError(f"--p {args.p} outside [0, s={inst.s}]")
        inst = inst.with_known(args.p)
    res = recover(inst, SolverParams(max_iters=args.max_iters))
    _emit(res.dumps() + "\n", args.out)
    log.info("k=%d of s=%d, converged=%s", res.k, inst.s, res.converged)
    return EXIT_OK


def cmd_oracle(args) -> int:
    inst = Instance.from_json(_read_json(args.instance))
    if args.grid < 4 * inst.n:
        raise ModelError(f"--grid must be at least 4n = {4 * inst.n}")
    t0 = time.perf_counter()
    grid = grid_basis_pursuit(inst.samples, inst.observed, args.grid, tol=args.tol)
    t1 = time.perf_counter()
    sdp = solve_primal(inst.with_known(0))
    doc = {
        "grid": args.grid,
        "grid_value": grid.value,
        "grid_lower_bound": grid.lower_bound,
        "grid_iterations": grid.iterations,
        "grid_converged": grid.converged,
        "grid_seconds": t1 - t0,
        "sdp_objective": sdp.objective,
        "sdp_converged": sdp.converged,
        "relative_difference": abs(grid.value - sdp.objective) / max(abs(sdp.objective), 1e-300),
    }
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_experiment(args) -> int:
    out = args.out or f"results/e{args.id}"
    cfg = harness.default_config(args.id, args.profile, trials=args.trials, master_seed=args.seed, output_dir=out)
    try:
        harness.check_output_dir(out)
    except OSError as exc:
        raise _IOFailure(f"{out}: {exc.strerror or exc}") from exc
    threads = args.threads or harness.default_threads()
    t0 = time.perf_counter()
    records = harness.RUNNERS[cfg.experiment_id](cfg, threads=threads, timing=args.timing)
    try:
        harness.emit_outputs(records, cfg, out)
    except OSError as exc:
        raise _IOFailure(f"{out}: {exc.strerror or exc}") from exc
    log.info("experiment %s: %d records in %.1f s -> %s", args.id, len(records), time.perf_counter() - t0, out)
    for m, s in cfg.settings:
        sel = [r for r in records if r.m == m and r.s == s]
        probs = " ".join(f"p={p}:{harness.success_probability(sel, p, s):.3f}" for p in cfg.p_list(s))
        print(f"m={m} s={s} P(k=s) {probs}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specrecover", description="Line-spectrum recovery with known poles.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="draw one random instance")
    g.add_argument("--config", required=True, help="JSON with n, m, s and optional p, min_separation, master_seed, trial")
    g.add_argument("--seed", type=int, default=None, help="override master_seed")
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="recover an instance, optionally with p known poles")
    s.add_argument("--instance", required=True)
    s.add_argument("--p", type=int, default=None, help="number of known lines (default: as flagged in the file)")
    s.add_argument("--max-iters", type=int, default=20_000)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_solve)

    e = sub.add_parser("experiment", help="run a Monte-Carlo campaign")
    e.add_argument("--id", required=True, choices=["1", "2", "3", "4a", "4b"])
    e.add_argument("--profile", default="desk", choices=["desk", "paper"])
    e.add_argument("--seed", type=int, default=None)
    e.add_argument("--trials", type=int, default=None)
    e.add_argument("--out", default=None)
    e.add_argument("--threads", type=int, default=None)
    e.add_argument("--timing", action="store_true", help="fill the ms column (makes output run-dependent)")
    e.set_defaults(func=cmd_experiment)

    o = sub.add_parser("oracle", help=argparse.SUPPRESS)
    o.add_argument("--instance", required=True)
    o.add_argument("--grid", type=int, default=8192)
    o.add_argument("--tol", type=float, default=1e-4)
    o.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except _IOFailure as exc:
        print(f"specrecover: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ModelError, harness.ConfigError, ValueError) as exc:
        print(f"specrecover: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: sample, lis, simulate, estimate, verify, tails.  Every command
accepts --seed (default from ULAM_SEED, then 0) and --config with key=value
lines (flags override config).  Commands that write files record a
RunManifest next to their outputs before the results are written; ``ulam
--manifest FILE`` replays a recorded run and reproduces its outputs
byte for byte.

Exit codes: 0 success, 1 verification or certificate failure, 2 usage or
domain error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (TAIL_KINDS, BoundaryRates, certificate_rows,
                     CERTIFICATE_COLUMNS, verify_tail_inequality)
from .hammersley import run_process, verify_line_identity
from .montecarlo import estimate_mean_subsequence, estimate_poissonized
from .sampling import (PlanarPointSet, make_rng, sample_boundary,
                       sample_poisson_cloud, sample_uniform_multiset_permutation)
from .subsequences import lis_strict, lnds_weak


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    tool_version: str
    started: str
    finished: str | None
    output_paths: list[str] = field(default_factory=list)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(path: Path, manifest: RunManifest) -> None:
    path.write_text(json.dumps(asdict(manifest), indent=2) + "\n")


def _manifest_params(args: argparse.Namespace) -> dict:
    skip = {"func", "config", "manifest"}
    return {k: v for k, v in vars(args).items() if k not in skip and not k.startswith("_")}


def _start_manifest(args, outputs: list[Path]) -> tuple[Path, RunManifest] | None:
    """Write the manifest before any result file; returns None when the run
    has no file outputs to record."""
    if not outputs:
        return None
    mpath = outputs[0].parent / "manifest.json"
    man = RunManifest(
        command=args._command,
        parameters=_manifest_params(args),
        seed=getattr(args, "seed", 0),
        tool_version=__version__,
        started=_now(),
        finished=None,
        output_paths=[str(p) for p in outputs],
    )
    _write_manifest(mpath, man)
    return mpath, man


def _finish_manifest(handle) -> None:
    if handle is None:
        return
    mpath, man = handle
    man.finished = _now()
    _write_manifest(mpath, man)


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _require(args, *names) -> None:
    for name in names:
        if getattr(args, name, None) is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")


# --- sample -----------------------------------------------------------------

def cmd_sample(args) -> int:
    _require(args, "n", "k", "count")
    rng = make_rng(args.seed, 0)
    words = [sample_uniform_multiset_permutation(args.n, args.k, rng)
             for _ in range(args.count)]
    if args.format == "csv":
        text = "\n".join(",".join(str(v) for v in w.letters) for w in words) + "\n"
    else:
        text = json.dumps([list(w.letters) for w in words]) + "\n"
    if args.out:
        out = Path(args.out)
        handle = _start_manifest(args, [out])
        out.write_text(text)
        _finish_manifest(handle)
    else:
        sys.stdout.write(text)
    return 0


# --- lis ---------------------------------------------------------------------

def _parse_word_text(text: str):
    """A single CSV line of integers is a word; x,row lines are a point list."""
    lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        return None
    if len(lines) == 1 and "," in lines[0]:
        cells = [c.strip() for c in lines[0].split(",")]
        try:
            return [int(c) for c in cells]
        except ValueError:
            pass  # fall through to point parsing
    pts = []
    for ln in lines:
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != 2:
            raise UsageError(f"cannot parse line {ln!r} as 'x,row'")
        pts.append((float(cells[0]), int(cells[1])))
    return pts


def cmd_lis(args) -> int:
    if args.word is not None:
        text = args.word
    elif args.input is not None:
        text = Path(args.input).read_text()
    else:
        text = sys.stdin.read()
    try:
        parsed = _parse_word_text(text)
    except (ValueError, UsageError) as exc:
        raise UsageError(f"parse failure: {exc}")
    if parsed is None:
        length = 0
    elif parsed and isinstance(parsed[0], tuple):
        x_max = max(p[0] for p in parsed)
        t_max = max(p[1] for p in parsed)
        ps = PlanarPointSet.from_points(parsed, x_max, t_max)
        length = lis_strict(ps) if args.order == "strict" else lnds_weak(ps)
    else:
        rows = np.asarray(parsed, dtype=np.int64)
        length = int(lis_strict(rows) if args.order == "strict" else lnds_weak(rows))
    print(length)
    return 0


# --- simulate ----------------------------------------------------------------

def cmd_simulate(args) -> int:
    _require(args, "x", "t", "lam")
    rates = None
    if args.alpha is not None and args.beta is not None:
        raise UsageError("give at most one of --alpha / --beta")
    if args.alpha is not None:
        rates = BoundaryRates.strict_from_alpha(args.lam, args.alpha)
        if args.variant != "strict":
            raise UsageError("--alpha applies to the strict variant")
    if args.beta is not None:
        if args.variant != "weak":
            raise UsageError("--beta applies to the weak variant")
        rates = BoundaryRates.weak_from_beta(args.lam, args.beta)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts_path = out_dir / "counts.csv"
    outputs = [counts_path]
    trace_path = out_dir / "trace.csv"
    if args.trace:
        outputs.append(trace_path)
    if rates is not None:
        args.sink_param = rates.sink_param  # record the derived rate
    handle = _start_manifest(args, outputs)
    rng = make_rng(args.seed, 0)
    run = run_process(args.x, args.t, args.lam, args.variant, rates, rng,
                      trace=args.trace)
    _write_csv(counts_path, ("step", "count", "exits"),
               [(s + 1, int(c), int(e))
                for s, (c, e) in enumerate(zip(run.counts, run.exit_counts))])
    if args.trace:
        _write_csv(trace_path, ("step", "particle_index", "position", "event"),
                   run.events)
    _finish_manifest(handle)
    return 0


# --- estimate ----------------------------------------------------------------

def cmd_estimate(args) -> int:
    _require(args, "reps")
    if args.mode == "word":
        _require(args, "n", "k")
        report = estimate_mean_subsequence(args.n, args.k, args.order,
                                           args.reps, args.seed, args.jobs)
        plot_header = ("n", "k", "mean", "stderr", "predicted")
        plot_row = (args.n, args.k, report.mean, report.stderr, report.predicted)
    else:
        _require(args, "x", "t", "lam")
        report = estimate_poissonized(args.x, args.t, args.lam, args.order,
                                      args.reps, args.seed, args.jobs)
        plot_header = ("x", "t", "lam", "mean", "stderr", "predicted")
        plot_row = (args.x, args.t, args.lam, report.mean, report.stderr,
                    report.predicted)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report_path = out_dir / "report.json"
    plot_path = out_dir / "plot.csv"
    handle = _start_manifest(args, [report_path, plot_path])
    report_path.write_text(report.to_json(command="estimate") + "\n")
    _write_csv(plot_path, plot_header, [plot_row])
    _finish_manifest(handle)
    return 0


# --- verify ------------------------------------------------------------------

def cmd_verify(args) -> int:
    rng = make_rng(args.seed, 0)
    failures = 0
    for _ in range(args.clouds):
        x = 0.05 + (args.max_x - 0.05) * rng.random()
        t = int(rng.integers(1, args.max_t + 1))
        lam = 0.05 + 1.95 * rng.random()
        cloud = sample_poisson_cloud(x, t, lam, rng)
        for variant in ("strict", "weak"):
            if not verify_line_identity(cloud, None, variant):
                failures += 1
    for _ in range(args.boundary):
        x = 0.05 + (args.max_x - 0.05) * rng.random()
        t = int(rng.integers(1, args.max_t + 1))
        lam = 0.05 + 1.95 * rng.random()
        cloud = sample_poisson_cloud(x, t, lam, rng)
        alpha = 0.1 + 2.0 * rng.random()
        b = sample_boundary(x, t, BoundaryRates.strict_from_alpha(lam, alpha), rng)
        if not verify_line_identity(cloud, b, "strict"):
            failures += 1
        beta = lam + 0.1 + 2.0 * rng.random()
        bw = sample_boundary(x, t, BoundaryRates.weak_from_beta(lam, beta), rng)
        if not verify_line_identity(cloud, bw, "weak"):
            failures += 1
    total = 2 * args.clouds + 2 * args.boundary
    print(f"line identity: {total - failures}/{total} instances passed")
    return 0 if failures == 0 else 1


# --- tails -------------------------------------------------------------------

def cmd_tails(args) -> int:
    if args.kind == "all":
        kinds = list(TAIL_KINDS)
    elif args.kind in ("poisson", "binomial", "geomsum"):
        kinds = [k for k in TAIL_KINDS if k.startswith(args.kind)]
    elif args.kind in TAIL_KINDS:
        kinds = [args.kind]
    else:
        raise UsageError(f"unknown tail kind {args.kind!r}")
    certs = [verify_tail_inequality(k) for k in kinds]
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    handle = _start_manifest(args, [out])
    _write_csv(out, CERTIFICATE_COLUMNS, certificate_rows(certs))
    _finish_manifest(handle)
    n_fail = sum(len(c.failures()) for c in certs)
    n_all = sum(len(c.records) for c in certs)
    print(f"tail certificates: {n_all - n_fail}/{n_all} grid points passed")
    return 0 if n_fail == 0 else 1


# --- parser ------------------------------------------------------------------

def _read_config(path: str) -> dict:
    values: dict = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"config line {line!r} is not key=value")
        key, _, val = line.partition("=")
        key = key.strip().replace("-", "_")
        val = val.strip()
        for cast in (int, float):
            try:
                values[key] = cast(val)
                break
            except ValueError:
                continue
        else:
            values[key] = val
    return values


def _default_seed() -> int:
    return int(os.environ.get("ULAM_SEED", "0"))


def build_parser(config: dict | None = None) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ulam", description=__doc__)
    parser.add_argument("--manifest", help="replay a recorded run manifest")
    sub = parser.add_subparsers(dest="_command")

    def common(p):
        p.add_argument("--seed", type=int, default=_default_seed())
        p.add_argument("--config", default=None)
        p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("sample", help="sample uniform multiset words")
    common(p)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("lis", help="longest chain length of a word or point list")
    common(p)
    p.add_argument("--input")
    p.add_argument("--word")
    p.add_argument("--order", choices=("strict", "weak"), default="strict")
    p.set_defaults(func=cmd_lis)

    p = sub.add_parser("simulate", help="run a particle process")
    common(p)
    p.add_argument("--x", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--variant", choices=("strict", "weak"), default="strict")
    p.add_argument("--alpha", type=float, help="strict source rate (p is derived)")
    p.add_argument("--beta", type=float, help="weak source rate (beta* is derived)")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--out-dir", default="ulam-simulate")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("estimate", help="Monte Carlo mean chain length")
    common(p)
    p.add_argument("--mode", choices=("word", "poisson"), default="word")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--x", type=float)
    p.add_argument("--t", type=int)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--order", choices=("strict", "weak"), default="strict")
    p.add_argument("--reps", type=int)
    p.add_argument("--out-dir", default="ulam-estimate")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("verify", help="run the line-identity suite")
    common(p)
    p.add_argument("--clouds", type=int, default=1000)
    p.add_argument("--boundary", type=int, default=200)
    p.add_argument("--max-x", type=float, default=20.0)
    p.add_argument("--max-t", type=int, default=20)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("tails", help="exact tail-inequality certificates")
    common(p)
    p.add_argument("--kind", default="all",
                   help="poisson | binomial | geomsum | all | a specific kind")
    p.add_argument("--grid", default="default", choices=("default",))
    p.add_argument("--out", default="tails.csv")
    p.set_defaults(func=cmd_tails)

    if config:
        for sp in sub.choices.values():
            sp.set_defaults(**config)
    return parser


def _replay(manifest_path: str) -> int:
    data = json.loads(Path(manifest_path).read_text())
    parser = build_parser()
    sub_actions = next(a for a in parser._actions
                       if isinstance(a, argparse._SubParsersAction))
    command = data["command"]
    if command not in sub_actions.choices:
        raise UsageError(f"manifest names unknown command {command!r}")
    args = sub_actions.choices[command].parse_args([])
    for key, val in data["parameters"].items():
        setattr(args, key, val)
    args._command = command
    return args.func(args)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        if argv[:1] == ["--manifest"]:
            if len(argv) != 2:
                raise UsageError("--manifest takes exactly one file argument")
            return _replay(argv[1])
        config = {}
        if "--config" in argv:
            idx = argv.index("--config")
            if idx + 1 >= len(argv):
                raise UsageError("--config needs a file argument")
            config = _read_config(argv[idx + 1])
        parser = build_parser(config)
        args = parser.parse_args(argv)
        if getattr(args, "_command", None) is None:
            parser.print_usage(sys.stderr)
            return 2
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())

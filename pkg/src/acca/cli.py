"""Command line: ``acca run``, ``acca sweep``, ``acca verify-tau`` and ``acca render``.

Every option can come from a ``key = value`` config file (``--config``);
flags override file values. Exit codes: 0 success, 1 usage error, 2 runtime
or I/O error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .circle import Kind
from .errors import UsageError
from .harness import (DEFAULT_FRACTION, DEFAULT_REPLICATES, DEFAULT_STEPS, UNIFORM, SimulationParams,
                      SweepGrid, run_simulation, sweep)
from .output import (atomic_outputs, read_configs, read_sweep, sweep_svgs, write_configs, write_heatmap,
                     write_series, write_sweep, write_sweep_errors)
from .verify import identity_checks, tau_table

log = logging.getLogger("acca")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    return int(str(text).strip(), 0)


def _ints(text: str) -> tuple[int, ...]:
    return tuple(_int(v) for v in str(text).split(",") if v.strip())


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _kinds(text: str) -> tuple[Kind, ...]:
    return tuple(Kind.parse(v) for v in str(text).split(",") if v.strip())


COMMON = {
    "n": _int, "steps": _int, "record_stride": _int, "seed": _int, "init": str.strip,
    "winding": _int, "alpha": float, "out_dir": str.strip,
}
RUN_KEYS = {
    **COMMON, "topology": Kind.parse, "epsilon": float, "k_mid": _int, "k_noise": _int,
    "snapshots": _ints, "heatmap": _bool, "stop_r": float,
}
SWEEP_KEYS = {
    **COMMON, "topology": _kinds, "epsilon": _floats, "k_mid": _ints, "k_noise": _ints,
    "replicates": _int, "workers": _int, "fraction": float, "heatmaps": _bool,
}


def read_config(path, schema: dict) -> dict:
    """Parse ``key = value`` lines (``#`` starts a comment); unknown keys are rejected."""
    values = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        if key not in schema:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _convert(schema, key, value.strip())
    return values


def _convert(schema, key, value):
    try:
        return schema[key](value)
    except (ValueError, UsageError) as exc:
        raise UsageError(f"bad value for {key}: {value!r} ({exc})") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_keys(parser, schema):
    parser.add_argument("--config", help="key = value file; flags override it")
    for key, conv in schema.items():
        flag = "--" + key.replace("_", "-")
        if conv is _bool:
            parser.add_argument(flag, dest=key, action=argparse.BooleanOptionalAction, default=None)
        else:
            parser.add_argument(flag, dest=key, default=None)


def _settings(args, schema) -> dict:
    values = read_config(args.config, schema) if args.config else {}
    for key in schema:
        raw = getattr(args, key)
        if raw is None:
            continue
        values[key] = raw if isinstance(raw, bool) else _convert(schema, key, raw)
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="acca", description="Circular midpoint opinion dynamics with bi-modal noise.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="simulate one trajectory and write series.csv")
    _add_keys(run, RUN_KEYS)

    sw = sub.add_parser("sweep", help="late-time averages over a (k_mid, k_noise, epsilon, topology) grid")
    _add_keys(sw, SWEEP_KEYS)

    vt = sub.add_parser("verify-tau", help="check tau1 = (-1)^(W+1)/W and the supporting identities")
    vt.add_argument("--max-w", type=int, default=5)
    vt.add_argument("--samples", type=int, default=100_000)
    vt.add_argument("--seed", type=int, default=0)

    rd = sub.add_parser("render", help="draw SVG heatmaps from a snapshots/frames CSV or a sweep.csv")
    rd.add_argument("input")
    rd.add_argument("-o", "--output", help="SVG file (configurations) or directory (sweep)")
    return parser


def _params(values: dict, **overrides) -> SimulationParams:
    fields = {k: values[k] for k in ("n", "topology", "epsilon", "k_mid", "k_noise", "steps", "record_stride",
                                     "seed", "init", "winding", "alpha", "stop_r") if k in values}
    fields.update(overrides)
    fields.setdefault("steps", DEFAULT_STEPS)
    return SimulationParams(**fields)


def cmd_run(args) -> int:
    values = _settings(args, RUN_KEYS)
    heatmap = values.get("heatmap", False)
    params = _params(values, snapshot_times=values.get("snapshots", ()), keep_frames=heatmap).validate()
    out = Path(values.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    ts = run_simulation(params)
    log.info("ran %d steps in %.2fs", ts.steps_run, time.perf_counter() - start)
    with atomic_outputs() as target:
        write_series(ts, target(out / "series.csv"))
        if heatmap:
            write_heatmap(ts.frames, target(out / "heatmap.svg"))
            write_configs(ts.t, ts.frames, target(out / "frames.csv"))
        if params.snapshot_times:
            times = sorted(ts.snapshots)
            write_configs(times, [ts.snapshots[t] for t in times], target(out / "snapshots.csv"))
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = _settings(args, SWEEP_KEYS)
    grid = SweepGrid(values.get("k_mid", ()), values.get("k_noise", ()), values.get("epsilon", ()),
                     values.get("topology", ()))
    base = _params({k: v for k, v in values.items() if k not in ("topology", "epsilon", "k_mid", "k_noise")},
                   topology=grid.topology[0], epsilon=grid.epsilon[0], k_mid=1, k_noise=0)
    replicates = values.get("replicates", DEFAULT_REPLICATES)
    if replicates < 1:
        raise UsageError("replicates must be at least 1")
    base.validate()
    out = Path(values.get("out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    result = sweep(grid, replicates, base, workers=values.get("workers", 1),
                   fraction=values.get("fraction", DEFAULT_FRACTION))
    log.info("swept %d cells in %.1fs", len(result.cells), time.perf_counter() - start)
    with atomic_outputs() as target:
        sweep_path = out / "sweep.csv"
        write_sweep(result, target(sweep_path))
        if result.failed:
            write_sweep_errors(result, target(out / "sweep.csv.errors"))
    if values.get("heatmaps", False):
        with atomic_outputs() as target:
            for name, svg in sweep_svgs(read_sweep(sweep_path)).items():
                target(out / name).write_text(svg)
    for res in result.failed:
        print(f"cell failed: {res.cell}: {res.error}", file=sys.stderr)
    return EXIT_USAGE if result.failed else EXIT_OK


def cmd_verify_tau(args) -> int:
    if args.max_w < 1:
        raise UsageError("--max-w must be at least 1")
    if args.samples < 1000:
        raise UsageError("--samples must be at least 1000")
    ok = True
    print(f"{'W':>4} {'theory':>10} {'estimate':>10} {'abs_err':>10} {'tol':>8}  result")
    for row in tau_table(args.max_w, args.samples, args.seed):
        ok &= row.passed
        print(f"{row.w:>4} {row.theory:>10.6f} {row.estimate:>10.6f} {row.error:>10.6f} "
              f"{row.tolerance:>8.5f}  {'PASS' if row.passed else 'FAIL'}")
    for check in identity_checks(args.seed):
        ok &= check.passed
        print(f"{'PASS' if check.passed else 'FAIL'}  {check.name}: {check.detail}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_render(args) -> int:
    src = Path(args.input)
    try:
        header = src.read_text().split("\n", 1)[0]
    except OSError as exc:
        raise UsageError(f"cannot read {src}: {exc.strerror}") from None
    if header.startswith("topology,"):
        out = Path(args.output or src.parent)
        out.mkdir(parents=True, exist_ok=True)
        with atomic_outputs() as target:
            for name, svg in sweep_svgs(read_sweep(src)).items():
                target(out / name).write_text(svg)
        return EXIT_OK
    try:
        _, frames = read_configs(src)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if frames.shape[0] == 0:
        raise UsageError(f"{src} holds no configurations")
    with atomic_outputs() as target:
        write_heatmap(frames, target(args.output or src.with_suffix(".svg")))
    return EXIT_OK


COMMANDS = {"run": cmd_run, "sweep": cmd_sweep, "verify-tau": cmd_verify_tau, "render": cmd_render}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"acca: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"acca: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def entry() -> None:
    sys.exit(main())

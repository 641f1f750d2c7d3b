"""Command line driver: run, sweep, analyze.

Exit codes: 0 success; 2 configuration or parameter errors; 3 generation or
statistics failures (infeasible sampling, undersampled estimators); 4 I/O and
event-log errors.  On failure one JSON object describing the error is printed
to stderr, so scripts never have to parse prose.

``run`` writes ``events.tsv`` and ``summary.txt`` into the output directory
(--out, else run.out_dir from the config, else $SOFTPAIR_OUT, else
./softpair-out).  ``sweep`` rewrites one config key per point and writes
per-point summaries plus a combined ``sweep.tsv`` (no per-point event logs;
they would dominate the disk budget).  ``analyze`` recomputes a summary from
an existing event log using the configuration embedded in the log, optionally
overridden in the cut/analysis/run sections only.

Generation with ``--workers n`` splits the event range into n contiguous
chunks; per-event random streams make the result identical to a single
worker, byte for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from ._backend import available_backends, backend_name
from .analysis import chsh_estimate, coincidence_filter, detect_violations, estimate_correlation
from .config import RunConfig, parse_config, serialize_config, with_seed, with_value
from .errors import (
    ConfigError, EventLogError, GenerationError, InfeasibleSampleError,
    ParameterError, SoftpairError, UndersampleError,
)
from .events import generate_batch, EventBatch
from .logio import read_event_log, summary_text, write_event_log, write_summary
from .quantum import Z_AXIS

log = logging.getLogger("softpair")

_ENV_OUT = "SOFTPAIR_OUT"


def _setup_logging(level_name: str, quiet: bool) -> None:
    level = logging.WARNING if quiet else getattr(logging, level_name.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def _out_dir(config: RunConfig, cli_out: str | None) -> Path:
    if cli_out:
        return Path(cli_out)
    if config.out_dir:
        return Path(config.out_dir)
    env = os.environ.get(_ENV_OUT)
    if env:
        return Path(env)
    return Path("softpair-out")


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return parse_config("")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise EventLogError(f"cannot read config {path}: {exc}") from None
    return parse_config(text)


def _generate_chunk(payload):
    config_text, start, count, backend = payload
    config = parse_config(config_text)
    return generate_batch(config.generator, start=start, count=count, backend=backend)


def _generate(config: RunConfig, workers: int, backend: str | None) -> EventBatch:
    n = config.generator.n_events
    if workers <= 1 or n < 2 * workers:
        return generate_batch(config.generator, backend=backend)
    chunk = math.ceil(n / workers)
    spans = [(s, min(chunk, n - s)) for s in range(0, n, chunk)]
    text = serialize_config(config)
    payloads = [(text, s, c, backend) for s, c in spans]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_generate_chunk, payloads))
    return EventBatch.concat(parts)


def _analyses(config: RunConfig, accepted: EventBatch):
    """Run the configured estimators on the accepted sample."""
    gen = config.generator
    correlations = []
    for ia, ib in config.correlations:
        est = estimate_correlation(accepted, gen.settings_a[ia], gen.settings_b[ib])
        correlations.append(((ia, ib), est))
    chsh = None
    if config.chsh is not None:
        ia, ia2, ib, ib2 = config.chsh
        chsh = chsh_estimate(accepted, gen.settings_a[ia], gen.settings_a[ia2],
                             gen.settings_b[ib], gen.settings_b[ib2])
    violations = detect_violations(accepted, Z_AXIS) if config.violations else None
    return correlations, chsh, violations


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = with_seed(config, args.seed)
    if not args.quiet:
        logging.getLogger().setLevel(getattr(logging, config.log_level.upper()))
    backend = args.backend or backend_name()
    out = _out_dir(config, args.out)
    out.mkdir(parents=True, exist_ok=True)

    log.info("generating %d events (seed %d, backend %s, workers %d)",
             config.generator.n_events, config.generator.seed, backend, args.workers)
    batch = _generate(config, args.workers, backend)
    accepted = coincidence_filter(batch, config.cut)
    correlations, chsh, violations = _analyses(config, accepted)

    write_event_log(out / "events.tsv", batch, config, backend, __version__)
    text = summary_text(config, backend, __version__, len(batch), accepted,
                        correlations, chsh, violations)
    write_summary(out / "summary.txt", text)
    if not args.quiet:
        sys.stdout.write(text)
        sys.stdout.write(f"# wrote {out / 'events.tsv'} and {out / 'summary.txt'}\n")
    return 0


def _sweep_label(value: str) -> str:
    return "".join(ch if ch.isalnum() or ch in ".-+" else "_" for ch in value)


def _cmd_sweep(args) -> int:
    base = _load_config(args.config)
    if args.seed is not None:
        base = with_seed(base, args.seed)
    backend = args.backend or backend_name()
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigError("sweep needs at least one value", field=args.param)
    out = _out_dir(base, args.out)
    out.mkdir(parents=True, exist_ok=True)

    table_rows = []
    for i, value in enumerate(values):
        config = with_value(base, args.param, value)
        log.info("sweep point %d/%d: %s = %s", i + 1, len(values), args.param, value)
        batch = _generate(config, args.workers, backend)
        accepted = coincidence_filter(batch, config.cut)
        correlations, chsh, violations = _analyses(config, accepted)
        text = summary_text(config, backend, __version__, len(batch), accepted,
                            correlations, chsh, violations)
        point_path = out / f"point_{i:03d}_{_sweep_label(value)}.txt"
        write_summary(point_path, text)
        summary = {k: v for k, v in
                   (line.split(" = ", 1) for line in text.splitlines()
                    if not line.startswith("#") and " = " in line)}
        row = [
            str(i), value,
            summary["events.total"], summary["events.accepted"],
            summary["channel.bare.fraction"], summary["channel.radiative.fraction"],
            summary["channel.radiative_parallel.fraction"],
            summary["correlation.0.value"], summary["correlation.0.stderr"],
        ]
        if chsh is not None:
            row += [summary["chsh.value"], summary["chsh.stderr"]]
        table_rows.append(row)

    header = ["point", args.param, "events_total", "events_accepted", "bare_fraction",
              "radiative_fraction", "parallel_fraction", "correlation0", "correlation0_err"]
    if base.chsh is not None:
        header += ["chsh", "chsh_err"]
    with open(out / "sweep.tsv", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("# softpair sweep\n")
        fh.write(f"# version = {__version__}\n")
        fh.write(f"# backend = {backend}\n")
        fh.write(f"# param = {args.param}\n")
        fh.write("\t".join(header) + "\n")
        for row in table_rows:
            fh.write("\t".join(row) + "\n")
    if not args.quiet:
        sys.stdout.write(f"# wrote {len(values)} sweep points to {out}\n")
    return 0


_ANALYZE_SECTIONS = ("cut.", "analysis.", "run.")


def _cmd_analyze(args) -> int:
    batch, config, meta = read_event_log(args.log, require_complete=not args.allow_partial)
    if args.config is not None:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise EventLogError(f"cannot read config {args.config}: {exc}") from None
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#") or "=" not in stripped:
                continue
            key = stripped.partition("=")[0].strip()
            if not key.startswith(_ANALYZE_SECTIONS):
                raise ConfigError(
                    "analyze can only override the cut, analysis, and run sections; "
                    f"events were already generated with {key!r}",
                    field=key, line=lineno,
                )
        config = parse_config(text, base=config)

    accepted = coincidence_filter(batch, config.cut)
    correlations, chsh, violations = _analyses(config, accepted)
    backend = meta["backend"] or backend_name()
    version = meta["version"] or __version__
    text = summary_text(config, backend, version, len(batch), accepted,
                        correlations, chsh, violations)
    out_path = Path(args.out) if args.out else Path(args.log).parent / "summary.txt"
    write_summary(out_path, text)
    if not args.quiet:
        sys.stdout.write(text)
        sys.stdout.write(f"# wrote {out_path}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="softpair",
        description="Monte Carlo for spin-singlet pairs with soft radiation: "
                    "generate events, sweep parameters, analyze logs.",
    )
    parser.add_argument("--version", action="version", version=f"softpair {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quiet", action="store_true", help="suppress stdout summary")

    gen_common = argparse.ArgumentParser(add_help=False)
    gen_common.add_argument("--config", help="config file (defaults apply if omitted)")
    gen_common.add_argument("--seed", type=int, help="override generator.seed")
    gen_common.add_argument("--out", help="output directory")
    gen_common.add_argument("--workers", type=int, default=1,
                            help="parallel generation processes (default 1)")
    gen_common.add_argument("--backend", choices=list(available_backends()),
                            help="sampling backend (default: fastest available)")

    p_run = sub.add_parser("run", parents=[common, gen_common],
                           help="generate events, write event log and summary")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", parents=[common, gen_common],
                             help="rerun one config key over several values")
    p_sweep.add_argument("--param", required=True, help="dotted config key to sweep")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_an = sub.add_parser("analyze", parents=[common],
                          help="recompute a summary from an event log")
    p_an.add_argument("--log", required=True, help="event log written by run")
    p_an.add_argument("--config", help="override cut/analysis/run sections")
    p_an.add_argument("--out", help="summary output path (default: next to the log)")
    p_an.add_argument("--allow-partial", action="store_true",
                      help="analyze a log without a completion marker")
    p_an.set_defaults(func=_cmd_analyze)
    return parser


def _error_record(exc: SoftpairError) -> dict:
    record = {"error": type(exc).__name__, "message": str(exc)}
    for attr in ("field", "line", "index"):
        value = getattr(exc, attr, None)
        if value is not None:
            record[attr] = value
    return record


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    _setup_logging(getattr(args, "log_level", "info"), args.quiet)
    try:
        return args.func(args)
    except (ConfigError, ParameterError) as exc:
        print(json.dumps(_error_record(exc)), file=sys.stderr)
        return 2
    except (GenerationError, InfeasibleSampleError, UndersampleError) as exc:
        print(json.dumps(_error_record(exc)), file=sys.stderr)
        return 3
    except EventLogError as exc:
        print(json.dumps(_error_record(exc)), file=sys.stderr)
        return 4
    except OSError as exc:
        print(json.dumps({"error": "OSError", "message": str(exc)}), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Benchmark the event-generation backends against each other.

Two workloads:
  bare       radiation off; every event is a two-outcome draw plus one
             isotropic direction (the hot path for correlation studies)
  radiative  heavy photon activity: ~39% of events carry photons, with
             parity adjustment, group rejection, helicity balancing, and
             direction smearing all active

The scalar reference backend is run on a proportionally smaller batch (it
exists for auditability, not speed) and its throughput is reported on the
same events-per-second scale.

Usage:
  python3 benchmarks/bench_backends.py
  python3 benchmarks/bench_backends.py --n-events 500000 --repeats 5
  python3 benchmarks/bench_backends.py --workload radiative --backends cython,numpy
"""

import argparse
import math
import time

from softpair._backend import available_backends
from softpair.emission import EmissionParams
from softpair.events import GeneratorConfig, generate_batch
from softpair.quantum import Direction

REFERENCE_SCALE = 20  # the scalar loop runs 1/20 of the requested events

WORKLOADS = {
    "bare": dict(emission=EmissionParams(alpha=0.0), smear_sigma=0.0),
    "radiative": dict(
        emission=EmissionParams(kappa_rad=12.0, kappa_par=8.0), smear_sigma=0.5
    ),
}


def build_config(workload: str, n_events: int, seed: int) -> GeneratorConfig:
    workload_params = WORKLOADS[workload]
    a0 = Direction.from_polar(0.0, 0.0)
    a1 = Direction.from_polar(math.pi / 2.0, 0.0)
    b0 = Direction.from_polar(math.pi / 4.0, 0.0)
    b1 = Direction.from_polar(3.0 * math.pi / 4.0, 0.0)
    return GeneratorConfig(
        emission=workload_params["emission"],
        settings_a=(a0, a1),
        settings_b=(b0, b1),
        seed=seed,
        n_events=n_events,
        smear_sigma=workload_params["smear_sigma"],
    )


def time_backend(name: str, config: GeneratorConfig, repeats: int) -> tuple[float, int]:
    generate_batch(config, backend=name)  # warm up caches and imports
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        batch = generate_batch(config, backend=name)
        best = min(best, time.perf_counter() - t0)
    return best, len(batch)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-events", type=int, default=200_000,
                        help="events per timed run (default 200000)")
    parser.add_argument("--repeats", type=int, default=3,
                        help="timed repetitions; the best time wins (default 3)")
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--workload", choices=[*WORKLOADS, "all"], default="all")
    parser.add_argument("--backends", default=None,
                        help="comma-separated subset (default: all available)")
    args = parser.parse_args()

    backends = list(available_backends())
    if args.backends:
        requested = [b.strip() for b in args.backends.split(",")]
        unknown = sorted(set(requested) - set(backends))
        if unknown:
            parser.error(f"unknown backends {unknown}; available: {backends}")
        backends = requested

    workloads = list(WORKLOADS) if args.workload == "all" else [args.workload]

    print(f"backends: {', '.join(backends)}")
    print(f"events per run: {args.n_events} "
          f"(reference backend: {args.n_events // REFERENCE_SCALE})")
    print(f"best of {args.repeats} runs\n")

    header = f"{'workload':<10} {'backend':<10} {'events':>9} {'time':>9} {'events/s':>12} {'vs numpy':>9}"
    print(header)
    print("-" * len(header))
    for workload in workloads:
        results = []
        for name in backends:
            n = args.n_events // (REFERENCE_SCALE if name == "reference" else 1)
            config = build_config(workload, n, args.seed)
            elapsed, produced = time_backend(name, config, args.repeats)
            results.append((name, produced, elapsed, produced / elapsed))
        baseline = next((rate for name, _, _, rate in results if name == "numpy"), None)
        for name, produced, elapsed, rate in results:
            speedup = f"{rate / baseline:8.2f}x" if baseline else " " * 9
            print(f"{workload:<10} {name:<10} {produced:>9} {elapsed:>8.3f}s "
                  f"{rate:>12.0f} {speedup}")
        print()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

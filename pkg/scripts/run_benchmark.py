#!/usr/bin/env python3
"""Run both trend-reproduction suites and write their CSVs + verdicts.

Usage: python scripts/run_benchmark.py [outdir] [--frames N] [--quick]
`--quick` shrinks the grids for a fast sanity pass (not the acceptance
configuration).
"""

import argparse
import json
import sys
import time
from pathlib import Path

from seamtrack import benchmark as bench


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("outdir", nargs="?", default="benchmark_out")
    ap.add_argument("--frames", type=int, default=2000)
    ap.add_argument("--gate-frames", type=int, default=600)
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    frames = 300 if args.quick else args.frames
    gate_frames = 200 if args.quick else args.gate_frames
    seeds = bench.TEST_SEEDS[:2] if args.quick else bench.TEST_SEEDS

    t0 = time.perf_counter()
    fitted = bench.fit_models()
    rows = bench.run_grid(bench.model_suite_cells(frames=frames, seeds=seeds),
                          fitted, workers=args.workers)
    bench.write_rows_csv(rows, outdir / "model_suite.csv")
    model_verdicts = bench.model_suite_verdicts(rows)
    print(f"model suite ({time.perf_counter() - t0:.0f}s):")
    for key, value in model_verdicts.items():
        print(f"  {key}: {value}")

    t1 = time.perf_counter()
    fitted = bench.fit_models(bench.HEAVY_MOTION, bench.HEAVY_CORRUPTION)
    rows = bench.run_grid(bench.gate_sweep_cells(frames=gate_frames, seeds=seeds),
                          fitted, workers=args.workers)
    bench.write_rows_csv(rows, outdir / "gate_sweep.csv")
    gate_verdicts = bench.gate_sweep_verdicts(rows)
    print(f"gate sweep ({time.perf_counter() - t1:.0f}s):")
    for key, value in gate_verdicts.items():
        print(f"  {key}: {value}")

    (outdir / "verdicts.json").write_text(json.dumps(
        {"model_suite": {k: v for k, v in model_verdicts.items()},
         "gate_sweep": {k: v for k, v in gate_verdicts.items()}},
        indent=2, default=float))
    return 0


if __name__ == "__main__":
    sys.exit(main())

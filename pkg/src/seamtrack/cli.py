"""Command-line entry points.

Subcommands: simulate, fit, track, analyze, benchmark, serve.  Run
``seamtrack <cmd> --help`` for flags.  Exit codes: 0 ok, 1 runtime failure,
2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from seamtrack import archive as ar
from seamtrack import benchmark as bench
from seamtrack.core import GateConfig, InsufficientDataError, TrackState, build_canonical_embryo_graph
from seamtrack.evaluation import PASS_THRESHOLD_UM, score_run
from seamtrack.models import (AssociationModel, edge_features, fit_covariance,
                              fit_movement_covariance, load_covariance,
                              observed_state_sequence, save_covariance)
from seamtrack.plots import line_plot_svg
from seamtrack.posture import bend_angle_matrix, diffusion_fit, eigen_embryos
from seamtrack.review import serve_review
from seamtrack.search import SearchConfig, track_sequence
from seamtrack.simulator import (CorruptionConfig, MotionConfig, SimConfig,
                                 generate, movement_quantiles)

MODEL_CHOICES = ("gnn", "mht", "embryo", "posture", "movement", "pm")


def _load_sim_config(path: str, seed) -> SimConfig:
    p = Path(path)
    if not p.exists():
        _err(f"config file not found: {path}")
        raise SystemExit(2)
    raw = json.loads(p.read_text())
    motion = MotionConfig(**raw.get("motion", {}))
    corruption = CorruptionConfig(**raw.get("corruption", {}))
    return SimConfig(
        pair_count=raw.get("pair_count", 10),
        frame_count=raw.get("frame_count", 100),
        seed=raw.get("seed", 0) if seed is None else seed,
        motion=motion,
        corruption=corruption,
        scale=raw.get("scale", 54.0),
    )


def _err(msg: str) -> bool:
    print(f"error: {msg}", file=sys.stderr)
    return True


def cmd_simulate(args) -> int:
    cfg = _load_sim_config(args.config, args.seed)
    truth, detections = generate(cfg)
    archive = ar.SequenceArchive(
        pair_count=cfg.pair_count,
        detections=detections,
        annotations=truth,
        provenance={"generator": "seamtrack-simulator", "seed": cfg.seed,
                    "config": json.loads(Path(args.config).read_text())},
    )
    ar.save_archive(archive, args.out)
    print(f"wrote {archive.frame_count} frames to {args.out}")
    return 0


def cmd_fit(args) -> int:
    archive = ar.load_archive(args.archive)
    if archive.annotations is None:
        _err("archive has no annotations to fit on")
        return 1
    graph = archive.resolved_graph()
    try:
        observed = observed_state_sequence(archive.detections, archive.annotations,
                                           args.match_threshold)
        pcov = fit_covariance([edge_features(s, graph) for s in observed], "posture")
        mcov = fit_movement_covariance(observed, graph, block_sparse=args.block_sparse)
    except InsufficientDataError as exc:
        _err(str(exc))
        return 1
    save_covariance(pcov, args.out_posture)
    save_covariance(mcov, args.out_movement)
    print(f"wrote {args.out_posture} ({pcov.dim}d) and {args.out_movement} ({mcov.dim}d)")
    return 0


def _build_search_config(args, graph) -> SearchConfig:
    variant = args.model
    K, N = args.K, args.N
    if variant == "gnn":
        variant, K, N = "mht", 1, 1
    pcov = load_covariance(args.posture_cov) if args.posture_cov else None
    mcov = load_covariance(args.movement_cov) if args.movement_cov else None
    model = AssociationModel(
        variant, graph,
        posture_cov=pcov if variant in ("posture", "pm") else None,
        movement_cov=mcov if variant in ("movement", "pm") else None,
        unary_weight=args.unary_weight)
    return SearchConfig(model, GateConfig(args.gate), K=K, N=N,
                        regime=args.regime,
                        prune_intersections=not args.no_prune)


def cmd_track(args) -> int:
    archive = ar.load_archive(args.archive)
    graph = archive.resolved_graph()
    try:
        cfg = _build_search_config(args, graph)
    except (ValueError, FileNotFoundError) as exc:
        _err(str(exc))
        return 2
    if archive.annotations is None:
        _err("archive has no annotations; tracking needs the first frame annotated")
        return 1
    initial = archive.annotations[0]
    corrections = archive.annotations[1:] if args.corrections else None
    history = track_sequence(initial, archive.detections[1:], cfg,
                             corrections=corrections, threshold=args.threshold)
    ar.save_history(history.states, history.events, args.out_history)
    report = None
    if archive.annotations is not None:
        strata = movement_quantiles(archive.annotations)
        report = score_run(history, archive.annotations,
                           strata={"quartile": strata.quartile[1:],
                                   "decile": strata.decile[1:]},
                           threshold=args.threshold,
                           metadata={"variant": args.model, "K": cfg.K, "N": cfg.N,
                                     "gate": args.gate, "regime": args.regime})
    if report is not None and args.out_report:
        with open(args.out_report, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["metric", "value"])
            w.writerow(["error_rate", report.error_rate])
            w.writerow(["frames", report.frame_count])
            w.writerow(["errors", len(report.error_frames)])
            for name, rates in report.stratified.items():
                for label in sorted(rates):
                    w.writerow([f"{name}_{label}", rates[label]])
        print(f"error rate {report.error_rate:.2f}% "
              f"({len(report.error_frames)}/{report.frame_count} frames); "
              f"history -> {args.out_history}, report -> {args.out_report}")
    else:
        print(f"history -> {args.out_history}")
    return 0


def cmd_analyze(args) -> int:
    states, _events = ar.load_history(args.history)
    archive = ar.load_archive(args.archive)
    graph = archive.resolved_graph()
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    angles = bend_angle_matrix(states, graph)
    with open(outdir / "bend_angles.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame"] + [f"angle_{i}" for i in range(angles.shape[1])])
        for st, row in zip(states, angles):
            w.writerow([st.frame_index] + [repr(float(v)) for v in row])

    eig = eigen_embryos(angles)
    cumulative = np.cumsum(eig.variance_fractions)
    with open(outdir / "eigen_report.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["component", "variance_fraction", "cumulative"])
        for i, (f, c) in enumerate(zip(eig.variance_fractions, cumulative)):
            w.writerow([i + 1, repr(float(f)), repr(float(c))])

    with open(outdir / "diffusion.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["object", "label", "coefficient_um2_per_s", "r_squared", "nonlinear"])
        for i in range(graph.n):
            track = np.array([s.positions[i] for s in states])
            fit = diffusion_fit(track, args.dt)
            w.writerow([i, graph.vertex_labels[i], repr(fit.coefficient),
                        repr(fit.r_squared), fit.nonlinear])

    comps = np.arange(1, len(cumulative) + 1)
    svg = line_plot_svg([("cumulative", comps.tolist(), cumulative.tolist())],
                        "Variance captured by leading components",
                        "components", "fraction of variance", ylim=(0.0, 1.05))
    (outdir / "eigen_variance.svg").write_text(svg)

    k = min(4, eig.scores.shape[1])
    frames = [s.frame_index for s in states]
    series = [(f"pc{i + 1}", frames, eig.scores[:, i].tolist()) for i in range(k)]
    (outdir / "eigen_scores.svg").write_text(
        line_plot_svg(series, "Leading posture component scores", "frame", "score"))
    print(f"analysis written to {outdir}")
    return 0


def cmd_benchmark(args) -> int:
    seeds = tuple(int(s) for s in args.seeds.split(",")) if args.seeds else bench.TEST_SEEDS
    if args.suite == "models":
        cells = bench.model_suite_cells(frames=args.frames, seeds=seeds)
        fitted = bench.fit_models()
    else:
        cells = bench.gate_sweep_cells(frames=args.frames, seeds=seeds)
        fitted = bench.fit_models(bench.HEAVY_MOTION, bench.HEAVY_CORRUPTION)
    rows = bench.run_grid(cells, fitted, workers=args.workers)
    bench.write_rows_csv(rows, args.out)
    verdicts = (bench.model_suite_verdicts(rows) if args.suite == "models"
                else bench.gate_sweep_verdicts(rows))
    for key, value in verdicts.items():
        print(f"{key}: {value}")
    print(f"rows -> {args.out}")
    return 0


def cmd_serve(args) -> int:
    archive = ar.load_archive(args.archive)
    graph = archive.resolved_graph()
    try:
        cfg = _build_search_config(args, graph)
    except (ValueError, FileNotFoundError) as exc:
        _err(str(exc))
        return 2
    server = serve_review(archive, cfg, host=args.host, port=args.port,
                          threshold=args.threshold)
    host, port = server.server_address[:2]
    print(f"review service listening on http://{host}:{port}  (Ctrl-C stops)",
          flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def _add_track_flags(p):
    p.add_argument("--model", required=True, choices=MODEL_CHOICES)
    p.add_argument("--K", type=float, default=1)
    p.add_argument("--N", type=int, default=1)
    p.add_argument("--gate", type=float, default=PASS_THRESHOLD_UM)
    p.add_argument("--regime", choices=("explicit", "kbest"), default="explicit")
    p.add_argument("--posture-cov")
    p.add_argument("--movement-cov")
    p.add_argument("--unary-weight", type=float, default=1.0)
    p.add_argument("--no-prune", action="store_true",
                   help="disable body self-intersection pruning")
    p.add_argument("--threshold", type=float, default=PASS_THRESHOLD_UM)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seamtrack",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic sequence archive")
    p.add_argument("--config", required=True, help="JSON simulator config")
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit covariance models from an annotated archive")
    p.add_argument("--archive", required=True)
    p.add_argument("--out-posture", required=True)
    p.add_argument("--out-movement", required=True)
    p.add_argument("--block-sparse", action="store_true")
    p.add_argument("--match-threshold", type=float, default=PASS_THRESHOLD_UM)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("track", help="track an archive and score it")
    p.add_argument("--archive", required=True)
    _add_track_flags(p)
    p.add_argument("--corrections", action="store_true",
                   help="reset from annotations on failed frames")
    p.add_argument("--out-history", required=True)
    p.add_argument("--out-report")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("analyze", help="posture analytics from a history file")
    p.add_argument("--history", required=True)
    p.add_argument("--archive", required=True, help="archive (for the graph)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--dt", type=float, default=1.0, help="seconds per frame")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("benchmark", help="run a trend-reproduction suite")
    p.add_argument("--suite", choices=("models", "gates"), required=True)
    p.add_argument("--frames", type=int, default=2000)
    p.add_argument("--seeds", help="comma-separated test seeds")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("serve", help="start the review service")
    p.add_argument("--archive", required=True)
    _add_track_flags(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8572)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit:
        raise
    except FileNotFoundError as exc:
        _err(str(exc))
        return 2
    except (ValueError, InsufficientDataError) as exc:
        _err(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())

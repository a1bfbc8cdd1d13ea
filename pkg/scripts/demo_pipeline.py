#!/usr/bin/env python3
"""End-to-end demo: simulate a training and a test sequence, fit the
covariance models, track the test sequence with the combined model, and run
the posture analytics.  Everything lands in ./demo_out."""

import json
import sys
from pathlib import Path

from seamtrack.cli import main as cli

OUT = Path("demo_out")

TRAIN = {
    "pair_count": 10, "frame_count": 600, "seed": 101, "scale": 80.0,
    "motion": {"drift_sigma": 0.25, "twitch_probability": 0.25,
               "twitch_rotation_max": 1.0, "bend_amplitude": 0.3,
               "bend_frequency": 0.02},
    "corruption": {"dropout_probability": 0.03, "dropout_persistence": 0.85,
                   "debris_rate": 0.5, "debris_box": 80.0,
                   "noise_sigma": 0.3, "noise_persistence": 0.9},
}


def main() -> int:
    OUT.mkdir(exist_ok=True)
    train_cfg = OUT / "train.json"
    test_cfg = OUT / "test.json"
    train_cfg.write_text(json.dumps(TRAIN))
    test_cfg.write_text(json.dumps({**TRAIN, "seed": 11, "frame_count": 400}))

    steps = [
        ["simulate", "--config", str(train_cfg), "--out", str(OUT / "train.jsonl")],
        ["simulate", "--config", str(test_cfg), "--out", str(OUT / "test.jsonl")],
        ["fit", "--archive", str(OUT / "train.jsonl"),
         "--out-posture", str(OUT / "posture_cov.json"),
         "--out-movement", str(OUT / "movement_cov.json")],
        ["track", "--archive", str(OUT / "test.jsonl"), "--model", "pm",
         "--posture-cov", str(OUT / "posture_cov.json"),
         "--movement-cov", str(OUT / "movement_cov.json"),
         "--K", "5", "--N", "5", "--regime", "kbest", "--gate", "25.0",
         "--corrections",
         "--out-history", str(OUT / "history.jsonl"),
         "--out-report", str(OUT / "report.csv")],
        ["analyze", "--history", str(OUT / "history.jsonl"),
         "--archive", str(OUT / "test.jsonl"),
         "--out-dir", str(OUT / "analysis"), "--dt", "0.33"],
    ]
    for step in steps:
        print("+ seamtrack " + " ".join(step))
        rc = cli(step)
        if rc != 0:
            return rc
    print(f"\ndemo artifacts in {OUT}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())

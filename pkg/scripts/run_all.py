"""Run every example config under scripts/configs and write the reports.

usage: python3 scripts/run_all.py [--out results] [--seed 0]
"""
import argparse
import json
import time
from pathlib import Path

from arithquandle.cli import run

HERE = Path(__file__).parent
JOBS = [
    ("verify", "f1_verify.json"),
    ("verify", "f4_verify.json"),
    ("reconstruct", "f2_reconstruct.json"),
    ("reconstruct", "f3_reconstruct.json"),
    ("match", "f2_match.json"),
    ("match", "f3_match_conjugate.json"),
    ("match", "q_match_p5_p7.json"),
    ("aut", "slot_aut.json"),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    out = Path(args.out)
    for command, name in JOBS:
        cfg = json.loads((HERE / "configs" / name).read_text())
        t0 = time.perf_counter()
        status, _ = run(command, cfg, args.seed, out / name.removesuffix(".json"))
        print(f"{command:12s} {name:28s} exit {status}  {time.perf_counter() - t0:6.1f}s")


if __name__ == "__main__":
    main()

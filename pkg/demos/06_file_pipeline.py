"""The file-based workflow: config in, counts and report out.

Everything the library does is also reachable through the command line
for instrument-facing use: `mdiqrng simulate` produces a counts table,
`mdiqrng certify` turns a counts table into a certification report, and
`mdiqrng bin` coarse-grains three-detector counts to two.  This script
drives the same entry points in process and prints the files exchanged.
"""

import json
import sys
import tempfile
from pathlib import Path

from mdiqrng.cli import main

workdir = Path(tempfile.mkdtemp(prefix="mdiqrng_demo_"))
config_path = workdir / "run.json"
config_path.write_text(json.dumps({
    "modes": 3,
    "cutoff": 3,
    "mu": 1.22,
    "visibility": 0.992,
    "epsilon_total": 1e-6,
    "rounds": 500000,
    "seed": 2024,
}, indent=2))

print(f"working directory: {workdir}")
print()
print("run.json:")
print(config_path.read_text())

rc = main(["simulate", "--config", str(config_path), "--out", str(workdir)])
assert rc == 0, f"simulate exited {rc}"
counts_path = workdir / "counts.csv"
print("head of counts.csv:")
for line in counts_path.read_text().splitlines()[:8]:
    print(f"  {line}")
print()

rc = main(["certify", "--config", str(config_path),
           "--counts", str(counts_path), "--out", str(workdir)])
assert rc == 0, f"certify exited {rc}"
print()

report = json.loads((workdir / "report.json").read_text())
print("report.json fields:")
for key in ("status", "mode", "min_entropy_bits", "p_guess", "kappa",
            "epsilon_total"):
    print(f"  {key}: {report[key]}")
print(f"  solver: {report['solver']}")
print()

rc = main(["bin", "--config", str(config_path), "--counts", str(counts_path),
           "--out", str(workdir)])
assert rc == 0, f"bin exited {rc}"
binned = (workdir / "binned_counts.csv").read_text().splitlines()
print("head of binned_counts.csv:")
for line in binned[:6]:
    print(f"  {line}")
print()
print("exit codes: 0 success, 2 bad configuration, 3 certification did not")
print("certify, 4 i/o failure; a pipeline can branch on them directly.")
sys.exit(0)

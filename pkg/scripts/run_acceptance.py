#!/usr/bin/env python3
"""Run the full acceptance experiment on the canonical 1D well and print the verdict.

Equivalent to `heatcone verify --config configs/well1d.json --out out/`,
kept as a script so the default experiment is one command away.
"""
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from heatcone.cli import main  # noqa: E402

if __name__ == "__main__":
    root = pathlib.Path(__file__).resolve().parents[1]
    sys.exit(main(["verify", "--config", str(root / "configs" / "well1d.json"),
                   "--out", str(root / "out")]))

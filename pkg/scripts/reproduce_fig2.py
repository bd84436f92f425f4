"""Analytic design curves: coupling and Bogoliubov frequency versus xi.

Writes design_xi.csv, design_r0.csv and a manifest, then prints the balanced
operating point.

    python scripts/reproduce_fig2.py --out results/fig2
"""
import argparse
import json
import sys
from pathlib import Path

from squeezedmech.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/fig2")
    ap.add_argument("--points", type=int, default=200, help="number of xi grid points")
    args = ap.parse_args(argv)
    code = main(["design", "--preset", "fig2", "--out", args.out,
                 "--set", f"grids.xi_points={args.points}"])
    if code == 0:
        man = json.loads((Path(args.out) / "manifest_design.json").read_text())
        op = man["summary"]["operating_point"]
        print(f"balanced point: xi = {op['xi']:.6f}, G1/kappa = {op['G1_over_kappa']:.4f}, "
              f"Omega1/omega_m = {op['Omega1_over_omega_m']:.4f}, "
              f"G1*Omega1 = {op['G1_times_Omega1']:.6f}")
    return code


if __name__ == "__main__":
    sys.exit(run())

"""Frame, dissipator and rotating-wave checks at small squeezing.

Exit status follows the CLI: 0 when every check (including the expected
failure at low rwa_ratio) behaves as intended, 4 otherwise.

    python scripts/run_verifications.py --out results/verify
"""
import argparse
import sys

from squeezedmech.cli import main


def run(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="results/verify")
    ap.add_argument("--set", action="append", default=[], metavar="KEY=VALUE")
    args = ap.parse_args(argv)
    return main(["verify", "--out", args.out] + sum((["--set", s] for s in args.set), []))


if __name__ == "__main__":
    sys.exit(run())

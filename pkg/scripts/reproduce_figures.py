"""Write the sweep CSVs behind the fidelity and depth figures.

    python scripts/reproduce_figures.py --outdir figures_out [--validate]

Produces figure2.csv, figure3.csv and figure4.csv.  With --validate the
fidelity sweep carries Fock-oracle values at five points per curve.
"""
import argparse
import pathlib
import sys

from cvteleport.cli import main as cli_main


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--outdir", type=pathlib.Path, default=pathlib.Path("figures_out"))
    parser.add_argument("--validate", action="store_true")
    args = parser.parse_args(argv)
    args.outdir.mkdir(parents=True, exist_ok=True)
    status = 0
    for figure in (2, 3, 4):
        out = args.outdir / f"figure{figure}.csv"
        extra = ["--validate"] if args.validate and figure == 3 else []
        code = cli_main(["--figure", str(figure), "--out", str(out), *extra])
        print(f"figure {figure}: {out} (exit {code})")
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main())

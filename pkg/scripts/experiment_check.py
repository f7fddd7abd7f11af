"""Print the experimental-comparison numbers next to their quoted values.

    python scripts/experiment_check.py [--r 0.34] [--T 0.81]
"""
import argparse
import sys

from cvteleport.cli import EXIT_OK, EXIT_VALIDATION, experiment_report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--r", type=float, default=None)
    parser.add_argument("--T", type=float, default=None)
    args = parser.parse_args(argv)
    rep = experiment_report(args.r, args.T)
    ctx = rep["context"]
    print(f"channel      r={ctx['r']:g}  T={ctx['T']:g}  nbar={ctx['nbar']:.6f}")
    for c in rep["checks"]:
        flag = "ok " if c["pass"] else "BAD"
        print(f"[{flag}] {c['name']:<18} computed {c['actual']:.6f}   quoted {c['expected']:g} +- {c['tolerance']:g}")
    print(f"measured fidelity {ctx['F_experiment']:g} +- {ctx['F_experiment_uncertainty']:g}")
    print(f"6 dB squeezed depth after teleportation at T={ctx['T']:g}: {ctx['tau_out_6dB_at_T']:.6f}")
    for note in rep["notes"]:
        print(f"note: {note}")
    return EXIT_OK if rep["pass"] else EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

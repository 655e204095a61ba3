"""Write the plot data for the duo squared-Euclidean surfaces and the
dominance-reversal conjugate curves as CSV files.

    python scripts/reproduce_figures.py --out figures/
"""
import argparse
from pathlib import Path

import numpy as np

from duodiv import figures


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="figures", help="output directory")
    ap.add_argument("--n", type=int, default=41, help="surface grid size per axis")
    ap.add_argument("--curve-points", type=int, default=1000)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for a in (0.5, 1.0, 2.0):
        rows = figures.duo_euclid_surface(a, n=args.n)
        path = out / f"surface_a={a:g}.csv"
        figures.write_csv(rows, str(path), figures.SURFACE_COLUMNS)
        vals = np.array([r["value"] for r in rows])
        print(f"{path}: {len(rows)} rows, min {vals.min():.4g}, max {vals.max():.4g}")

    curves = {"square_quartic": figures.square_quartic_curves(args.curve_points)}
    for a in (1.0, 2.0, 5.0):
        curves[f"quadratic_a={a:g}"] = figures.scaled_quadratic_curves(a, args.curve_points)
    for label, rows in curves.items():
        path = out / f"conjugates_{label}.csv"
        figures.write_csv(rows, str(path), figures.CURVE_COLUMNS)
        c1 = np.array([r["value"] for r in rows if r["function"] == "F1*"])
        c2 = np.array([r["value"] for r in rows if r["function"] == "F2*"])
        print(f"{path}: {len(rows)} rows, max(F1* - F2*) = {np.max(c1 - c2):.3g}")


if __name__ == "__main__":
    main()

"""Closed form against oracle on the regression cases; prints a table and
exits nonzero on any mismatch.

    python scripts/run_verify.py [--tol 1e-6] [--abs-tol 1e-10]
"""
import argparse
import sys

from duodiv.oracle import OracleConfig
from duodiv.verify import run_verify


def fmt(x):
    return "inf" if x is None else f"{x:.12g}"


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tol", type=float, default=1e-6, help="allowed |closed - oracle| beyond the error estimate")
    ap.add_argument("--abs-tol", type=float, default=None, help="oracle quadrature abs_tol")
    args = ap.parse_args()
    cfg = OracleConfig.from_env() if args.abs_tol is None else OracleConfig(abs_tol=args.abs_tol)

    results, ok = run_verify(cfg, tol=args.tol)
    width = max(len(r.name) for r in results)
    for r in results:
        flag = "ok " if r.ok else "BAD"
        print(f"{flag} {r.name:<{width}}  closed={fmt(r.closed):<20} oracle={fmt(r.oracle):<20} err<={r.abs_error_estimate:.1e}")
    print(f"{sum(r.ok for r in results)}/{len(results)} cases agree")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

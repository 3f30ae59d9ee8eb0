"""Wall time of the negative-extension phase against the number of extra statistics.

    python scripts/scaling_study.py --points 9 --seed 11 --out scaling.json
"""

import argparse
import json

from mobiusjoin.synthetic import run_bench


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--out")
    args = ap.parse_args()

    result = run_bench({"seed": args.seed, "points": args.points, "repeats": args.repeats})
    print(f"{'extra stats':>12} {'rows':>10} {'negative s':>11} {'positive s':>11}")
    for p in result["points"]:
        print(
            f"{p['extra_statistics']:>12d} {p['total_rows']:>10d} "
            f"{p['extra_time']:>11.5f} {p['positive_time']:>11.5f}"
        )
    print(f"log-log slope: {result['loglog_slope']:.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(result, fh, indent=2)


if __name__ == "__main__":
    main()

"""Average-case vs worst-case ratio as the number of machines grows.

Runs the n-sweep for the three worked cost distributions and writes one CSV
per distribution. With matplotlib available, also saves a log-log plot of the
estimated average ratio against the worst-case line (n+1)/2.

    python scripts/separation_experiment.py --out results/ --trials 20000
"""

import argparse
from pathlib import Path

from avgratio import DistributionSpec, Family, __version__, n_sweep, solve_threshold
from avgratio.cli import estimate_record
from avgratio.results import ExperimentResult


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--ns", default="2,4,8,16,32,64,128,256")
    ap.add_argument("--trials", type=int, default=None, help="per n; default 1e5 (n<=64) or 1e4")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    ns = [int(v) for v in args.ns.split(",")]
    args.out.mkdir(parents=True, exist_ok=True)
    curves = {}
    for family in Family:
        spec = DistributionSpec(family, 1.0, 1.0)
        bound = solve_threshold(spec).theorem1_bound
        estimates = n_sweep(spec, ns, args.trials, args.seed, args.workers)
        rows = [estimate_record(e, bound) for e in estimates]
        result = ExperimentResult(
            "separation", {"family": family.value, "ns": args.ns}, rows, __version__, args.seed
        )
        (args.out / f"separation_{family.value}.csv").write_text(result.to_csv())
        curves[family.value] = [(e.config.n, e.mean_ratio) for e in estimates]
        print(f"{family.value:12s} bound {bound:8.4f}")
        for e in estimates:
            n = e.config.n
            print(f"  n={n:4d}  mean {e.mean_ratio:.4f} +- {e.std_error:.4f}   worst case {(n + 1) / 2:7.1f}")

    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ns, [(n + 1) / 2 for n in ns], "k--", label="worst case (n+1)/2")
    for name, pts in curves.items():
        ax.plot(*zip(*pts), "o-", label=f"average, {name}")
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("machines n")
    ax.set_ylabel("approximation ratio")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out / "separation.png", dpi=150)


if __name__ == "__main__":
    main()

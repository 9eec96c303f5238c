"""Toy problem: synchronous and lossy stochastic convergence traces.

Writes one CSV trace per run plus summary.csv into --out.
"""

import argparse
import csv
import statistics
from pathlib import Path

from ieqpdmm.engine import ScheduleConfig, run
from ieqpdmm.oracle import solve_active_set
from ieqpdmm.scenarios import gen_toy


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--runs", type=int, default=5, help="schedule seeds per loss rate")
    ap.add_argument("--out", default="results/toy")
    args = ap.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    toy = gen_toy(args.seed)
    x_star = solve_active_set(toy)[0]
    rows = []

    for alpha in (1.0, 0.5):
        res = run(toy, ScheduleConfig(alpha=alpha, max_iters=20000, tol_primal=1e-10), oracle_solution=x_star)
        res.trace.to_csv(out / f"sync_alpha{alpha}.csv")
        rows.append(["sync", alpha, 0.0, "", res.trace.iterations, res.trace.first_below(1e-4), res.converged])

    for loss in (0.0, 0.25, 0.5):
        hits = []
        for s in range(args.runs):
            cfg = ScheduleConfig(mode="stoch", node_active_prob=0.5, loss_rate=loss, seed=s, max_iters=50000, tol_primal=1e-10)
            res = run(toy, cfg, oracle_solution=x_star)
            res.trace.to_csv(out / f"stoch_loss{loss}_seed{s}.csv")
            hit = res.trace.first_below(1e-4)
            hits.append(hit)
            rows.append(["stoch", 1.0, loss, s, res.trace.iterations, hit, res.converged])
        print(f"loss {loss}: median iterations to 1e-4 = {statistics.median(hits)}")

    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "alpha", "loss_rate", "seed", "iterations", "iters_to_1e-4", "converged"])
        w.writerows(rows)
    print(f"wrote {len(rows)} traces to {out}")


if __name__ == "__main__":
    main()

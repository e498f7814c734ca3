"""Success probability against the number of probes at the derived q.

Runs both bundled configs, writes one CSV and one SVG per config and prints
the union bound next to the empirical error so the gap is visible.

    python3 scripts/success_vs_probes.py --trials 10000 --out results
"""

from __future__ import annotations

import argparse
from pathlib import Path

from gtdiscovery import evaluate_bound, load_config, optimal_q, sweep_probes
from gtdiscovery.cli import write_plot
from gtdiscovery.montecarlo import default_workers

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=0x5EED)
    ap.add_argument("--workers", type=int, default=default_workers())
    ap.add_argument("--t-max", type=int, default=400)
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    grid = list(range(10, args.t_max + 1, 10))
    for name in ("fig2", "fig4"):
        cfg = load_config(CONFIGS / f"{name}.json")
        plan = optimal_q(cfg)
        rec = sweep_probes(cfg, plan, grid, args.trials, args.seed, workers=args.workers)
        text = rec.to_csv()
        (args.out / f"{name}_probes.csv").write_text(text)
        write_plot(text, args.out / f"{name}_probes.svg")

        print(f"{name}: q = {tuple(round(x, 6) for x in plan.q)}")
        print(f"{'T':>5} {'p_hat':>8} {'error':>8} {'union':>10}")
        for pt in rec.points:
            if pt.T % 50:
                continue
            bound = evaluate_bound("union", plan, cfg, pt.T).value
            print(f"{pt.T:>5} {pt.estimate.p_hat:>8.4f} {1 - pt.estimate.p_hat:>8.4f} {bound:>10.4g}")


if __name__ == "__main__":
    main()

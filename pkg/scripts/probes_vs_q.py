"""Probes needed for a target success probability across base sampling rates.

The derived optimum is added to the grid so it can be compared with the
sweep minimum directly.

    python3 scripts/probes_vs_q.py --trials 10000 --target 0.9
"""

from __future__ import annotations

import argparse
from pathlib import Path

from gtdiscovery import load_config, optimal_q, sweep_q
from gtdiscovery.cli import write_plot
from gtdiscovery.montecarlo import default_workers

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=10_000)
    ap.add_argument("--target", type=float, default=0.9)
    ap.add_argument("--seed", type=int, default=0x5EED)
    ap.add_argument("--t-cap", type=int, default=4096)
    ap.add_argument("--workers", type=int, default=default_workers())
    ap.add_argument("--out", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for name in ("fig2", "fig4"):
        cfg = load_config(CONFIGS / f"{name}.json")
        q_star = optimal_q(cfg).base_q
        grid = sorted({round(0.05 * i, 12) for i in range(1, 13)} | {q_star})
        rec = sweep_q(cfg, grid, args.target, args.trials, args.seed, args.t_cap, workers=args.workers)
        text = rec.to_csv()
        (args.out / f"{name}_q.csv").write_text(text)
        write_plot(text, args.out / f"{name}_q.svg")

        reached = [p for p in rec.points if p.reached]
        best = min(reached, key=lambda p: p.min_T)
        derived = rec.points[rec.derived_index]
        print(f"{name}: derived base q {q_star:.4f} needs {derived.min_T} probes; "
              f"sweep minimum {best.min_T} at q={best.base_q:g} (ratio {derived.min_T / best.min_T:.3f})")
        for p in rec.points:
            print(f"  q={p.base_q:<8.4g} min_T={p.min_T if p.reached else '> cap'}")


if __name__ == "__main__":
    main()

"""Command-line interface.

Exit status: 0 on success, 1 when inputs fail validation, 2 on any other
error. Diagnostics go to standard error as a single line.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bounds, design, engine, montecarlo
from .errors import ValidationError
from .model import NetworkConfig, SamplingPlan, load_config

DEFAULT_SEED = 0x5EED


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def parse_q(text: str, cfg: NetworkConfig) -> SamplingPlan:
    """``derived``, ``base=<q>`` (beta-scaled) or a comma-separated list."""
    text = text.strip()
    if text == "derived":
        return design.optimal_q(cfg)
    try:
        if text.startswith("base="):
            return SamplingPlan.base_scaled(cfg, float(text[5:]))
        plan = SamplingPlan.manual([float(x) for x in text.split(",")])
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot parse q source {text!r}") from None
    plan.check_aligned(cfg)
    return plan


def _grid(text: str, cast):
    try:
        if ":" in text:
            start, stop, step = (cast(x) for x in text.split(":"))
            if step <= 0:
                raise ValidationError("grid step must be positive")
            count = int(round((stop - start) / step + 1e-9)) + 1
            values = [start + i * step for i in range(count)]
            if cast is float:
                values = [round(v, 12) for v in values]
            return [v for v in values if v <= stop + (1e-12 if cast is float else 0)]
        return [cast(x) for x in text.split(",")]
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"cannot parse grid {text!r}") from None


def int_grid(text: str) -> list[int]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    grid = _grid(text, int)
    montecarlo._check_grid(grid, "T")
    return grid


def float_grid(text: str) -> list[float]:
    grid = _grid(text, float)
    montecarlo._check_grid(grid, "base q")
    return grid


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def write_plot(csv_text: str, path: str | Path) -> None:
    """Line chart of a sweep CSV (SVG). Draws the CSV as-is; computes nothing."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    # fixed hash salt keeps element ids, and so the file bytes, reproducible
    matplotlib.rcParams["svg.hashsalt"] = "gtdiscovery"
    rows = montecarlo.read_sweep_csv(csv_text)
    fig, ax = plt.subplots(figsize=(6, 4))
    if rows and "T" in rows[0]:
        x = [r["T"] for r in rows]
        ax.plot(x, [r["p_hat"] for r in rows], marker="o", label="P(success)")
        ax.fill_between(x, [r["ci_low"] for r in rows], [r["ci_high"] for r in rows], alpha=0.25)
        ax.set_xlabel("probes T")
        ax.set_ylabel("P(success)")
        ax.set_ylim(0, 1.02)
    else:
        pts = [r for r in rows if r["reached"]]
        ax.plot([r["base_q"] for r in pts], [r["min_T"] for r in pts], marker="o")
        ax.set_xlabel("base sampling probability q")
        ax.set_ylabel("probes for target")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_optimal_q(args) -> str:
    cfg = load_config(args.config)
    plan = design.optimal_q(cfg)
    out = {"q": list(plan.q), "residual": None, "warnings": list(plan.warnings), "energy": None}
    if args.report_residual:
        res = design.constraint_residual(plan, cfg)
        out["residual"] = res.residual
        out["constraint_value"] = res.value
    if args.probes is not None:
        out["energy"] = design.energy_report(plan, args.probes).to_dict()
    return _json(out)


def cmd_bound(args) -> str:
    cfg = load_config(args.config)
    plan = parse_q(args.q, cfg)
    if args.epsilon is not None:
        T = bounds.min_probes_from_bound(args.kind, plan, cfg, args.epsilon)
        return _json({"kind": bounds.resolve_kind(args.kind, cfg).value, "epsilon": args.epsilon, "min_T": T})
    bv = bounds.evaluate_bound(args.kind, plan, cfg, args.probes)
    return _json({"kind": bv.kind.value, "T": args.probes, "value": bv.value})


def cmd_decode(args) -> str:
    matrix = engine.GTMatrix.load(args.matrix)
    result = engine.comp_decode(matrix, engine.ResultsVector.parse(args.y))
    return _json({
        "estimated_active": sorted(result.estimated_active),
        "negative_probe_count": result.negative_probe_count,
    })


def cmd_simulate(args) -> str:
    cfg = load_config(args.config)
    plan = parse_q(args.q, cfg)
    est = montecarlo.estimate_success(cfg, plan, args.probes, args.trials, args.seed, args.workers)
    return _json({"q": list(plan.q), "T": args.probes, "seed": args.seed, **est.to_dict()})


def cmd_sweep_probes(args) -> str:
    cfg = load_config(args.config)
    plan = parse_q(args.q, cfg)
    rec = montecarlo.sweep_probes(cfg, plan, args.t_grid, args.trials, args.seed, args.workers)
    return rec.to_csv()


def cmd_sweep_q(args) -> str:
    cfg = load_config(args.config)
    beta = None if args.beta is None else [float(b) for b in args.beta.split(",")]
    rec = montecarlo.sweep_q(
        cfg, args.q_grid, args.target, args.trials, args.seed, args.t_cap, beta=beta, workers=args.workers
    )
    return rec.to_csv()


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="gtdiscovery",
        description="Group-testing active device discovery: design, bounds, decoding, simulation.",
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_mc(sp, plot: bool = True):
        sp.add_argument("--trials", type=int, default=1000)
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"master seed (default 0x5EED = {DEFAULT_SEED})")
        sp.add_argument("--workers", type=int, default=montecarlo.default_workers(),
                        help="worker processes; never changes the output")
        sp.add_argument("--out", help="write the result here instead of standard output")
        if plot:
            sp.add_argument("--plot", metavar="SVG", help="also draw the sweep CSV to this SVG file")

    sp = sub.add_parser("optimal-q", help="optimal per-cluster sampling probabilities")
    sp.add_argument("--config", required=True)
    sp.add_argument("--report-residual", action="store_true")
    sp.add_argument("--probes", type=int, help="T for the energy report")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_optimal_q)

    sp = sub.add_parser("bound", help="evaluate or invert an error-probability bound")
    sp.add_argument("--config", required=True)
    sp.add_argument("--q", default="derived", help="'derived', 'base=<q>' or 'q1,q2,...'")
    sp.add_argument("--kind", choices=["union", "exp"], default="union")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--probes", type=int)
    g.add_argument("--epsilon", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_bound)

    sp = sub.add_parser("decode", help="COMP-decode a dumped matrix and results vector")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--y", required=True, help="results bits, e.g. 101")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_decode)

    sp = sub.add_parser("simulate", help="Monte-Carlo success probability at one T")
    sp.add_argument("--config", required=True)
    sp.add_argument("--q", default="derived")
    sp.add_argument("--probes", type=int, required=True)
    common_mc(sp, plot=False)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep-probes", help="success probability over a grid of T")
    sp.add_argument("--config", required=True)
    sp.add_argument("--q", default="derived")
    sp.add_argument("--t-grid", type=int_grid, required=True, help="start:stop:step or T1,T2,...")
    common_mc(sp)
    sp.set_defaults(func=cmd_sweep_probes)

    sp = sub.add_parser("sweep-q", help="probes needed for a target vs base sampling probability")
    sp.add_argument("--config", required=True)
    sp.add_argument("--q-grid", type=float_grid, required=True, help="start:stop:step or q1,q2,...")
    sp.add_argument("--target", type=float, default=0.9)
    sp.add_argument("--t-cap", type=int, default=4096)
    sp.add_argument("--beta", help="override energy weights, comma-separated")
    common_mc(sp)
    sp.set_defaults(func=cmd_sweep_q)
    return p


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = args.func(args)
        _emit(text, args.out)
        if getattr(args, "plot", None):
            write_plot(text, args.plot)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Batch figure renderer.

Usage::

    plots crossing --in results/table1/crossing.csv --out figs/crossing.png
    plots q-convergence --in results/figure2/snapshots.csv --out figs/q.png
    plots inventory --in results/figure2/series.csv --out figs/inv.png
    plots histogram --in run_a/action_freq.csv run_b/action_freq.csv \
          --label stateless --label memory --out figs/actions.png
    plots payoff-heatmap --in results/figure8/tensor.csv --out figs/payoff.png
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .figures import FIGURE_KINDS, FigureSpec, RenderError, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="plots", description="Render mmgame experiment CSVs into figures"
    )
    parser.add_argument("kind", choices=FIGURE_KINDS, help="figure kind")
    parser.add_argument("--in", dest="inputs", nargs="+", required=True,
                        help="input CSV file(s)")
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument("--label", action="append", default=[],
                        help="series label, one per input (histogram)")
    parser.add_argument("--actions", default="",
                        help="comma-separated 1-based action subset (q-convergence)")
    parser.add_argument("--title", default="", help="figure title")
    args = parser.parse_args(argv)

    actions = tuple(int(a) for a in args.actions.split(",") if a) if args.actions else ()
    try:
        spec = FigureSpec(
            kind=args.kind,
            inputs=tuple(Path(p) for p in args.inputs),
            output=Path(args.out),
            labels=tuple(args.label),
            actions=actions,
            title=args.title,
        )
        result = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(result.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())

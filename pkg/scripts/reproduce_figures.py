#!/usr/bin/env python3
"""Run the predefined benchmark sweeps and (optionally) render their figures.

Each sweep writes per-run trace CSVs plus a summary.csv into
<out-root>/<figure>/.  With --render the TypeScript plotting CLI is invoked
on every sweep directory (requires `npm run build` in frontend/ first).

Example:
    python3 scripts/reproduce_figures.py --figures quad decouple --out-root results
"""

import argparse
import subprocess
import sys
import time
from pathlib import Path

from odeaccel import cli

REPO_ROOT = Path(__file__).resolve().parent.parent

GUIDES = {
    "quad": "-1,-2",
    "composite": "-1,-2",
    "decouple": "-2",
    "l4": "-2,-5",
    "logistic": "-2",
}


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--figures", nargs="+", choices=sorted(cli.SWEEPS),
                        default=sorted(cli.SWEEPS))
    parser.add_argument("--out-root", default="results")
    parser.add_argument("--N", type=int, default=None,
                        help="override each sweep's iteration budget")
    parser.add_argument("--render", action="store_true",
                        help="render each sweep to SVG with the plots CLI")
    args = parser.parse_args()

    out_root = Path(args.out_root)
    for figure in args.figures:
        out_dir = out_root / figure
        start = time.perf_counter()
        traces = cli.run_sweep(figure, out_dir, n_iters=args.N)
        elapsed = time.perf_counter() - start
        print(f"[{figure}] {elapsed:.0f} s -> {out_dir}")
        for trace in traces:
            print(f"    {trace.label:10s} h={trace.h:<8g} {trace.outcome_tag}")
        if args.render:
            render = subprocess.run(
                ["node", str(REPO_ROOT / "frontend" / "dist" / "cli.js"),
                 str(out_dir), "--out", str(out_dir / "figure.svg"),
                 "--guides", GUIDES[figure]],
                capture_output=True, text=True,
            )
            if render.returncode != 0:
                print(f"    render failed: {render.stderr.strip()}", file=sys.stderr)
                return 1
            print(f"    {render.stdout.strip()}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Render the preset spectra as SVG line plots (plus CSV data files).

Covers the driven five-level loop at the two phase choices (trapping and
non-trapping) and the single-loss loop presets.
"""
import argparse
from pathlib import Path

import numpy as np

from darkstate import D1System, preset, spectrum_analytic, d1_spectrum
from darkstate.cli import FLOAT_FMT, svg_line_plot

D2_PRESETS = ["two-level", "autler-townes-doublet", "at-quartet",
              "fig2-trapping", "fig2-notrapping"]
D1_PRESETS = ["d1-trapping", "d1-fig3a", "d1-fig3b", "d1-fig3d", "d1-fig3e"]


def write_csv(path, spec):
    lines = ["delta,branch1,branch2,branch3,total"]
    for k in range(len(spec.grid)):
        row = (spec.grid[k], *spec.branch_intensity[:, k], spec.total[k])
        lines.append(",".join(FLOAT_FMT % v for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--outdir", default="figures", help="output directory")
    args = parser.parse_args()
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)

    for name in D2_PRESETS + D1_PRESETS:
        system = preset(name).system
        if isinstance(system, D1System):
            grid = np.linspace(-25, 25, 10001)
            spec = d1_spectrum(system, grid)
        else:
            grid = np.linspace(-30, 30, 6001)
            spec = spectrum_analytic(system, grid)
        curves = [(f"branch {n + 1}", spec.branch_intensity[n])
                  for n in range(3)]
        curves.append(("total", spec.total))
        svg_line_plot(outdir / f"{name}.svg", grid, curves, title=name)
        write_csv(outdir / f"{name}.csv", spec)
        print(f"wrote {outdir / name}.svg / .csv "
              f"(max intensity {spec.total.max():.3e})")


if __name__ == "__main__":
    main()

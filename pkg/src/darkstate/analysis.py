"""Spectrum post-processing: peaks, widths, areas, conservation and
cross-method comparison."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from .errors import GridMismatch, GridTooCoarse, GridTooNarrow
from .model import D1System, D2System, d1_to_chain
from .spectrum import SpectrumResult, spectrum_analytic, d1_spectrum
from .dynamics import trapped_fraction

DEFAULT_PROMINENCE = 1e-3

#: default reporting grid: +-30 rate units, 6001 points
DEFAULT_GRID = (-30.0, 30.0, 6001)


def default_grid():
    lo, hi, n = DEFAULT_GRID
    return np.linspace(lo, hi, n)


@dataclass
class Peak:
    location: float
    height: float
    fwhm: float
    branch: int


@dataclass
class PeakAnalysis:
    peaks: list
    total_area: float
    branch_areas: tuple


def _half_height_width(grid, total, idx):
    """FWHM by linear interpolation of the half-height crossings around idx."""
    half = total[idx] / 2.0
    left = grid[0]
    for j in range(idx, 0, -1):
        if total[j - 1] <= half:
            frac = (total[j] - half) / (total[j] - total[j - 1])
            left = grid[j] - frac * (grid[j] - grid[j - 1])
            break
    right = grid[-1]
    for j in range(idx, len(grid) - 1):
        if total[j + 1] <= half:
            frac = (total[j] - half) / (total[j] - total[j + 1])
            right = grid[j] + frac * (grid[j + 1] - grid[j])
            break
    return right - left


def find_peaks(spec: SpectrumResult, prominence: float = DEFAULT_PROMINENCE) -> PeakAnalysis:
    """Local maxima above prominence * max(total), with interpolated widths
    and dominant-branch attribution."""
    grid = spec.grid
    total = spec.total
    peak_max = float(np.max(total)) if len(total) else 0.0
    widths = [-2.0 * t.pole.imag
              for terms in spec.branch_poles for t in terms
              if not t.trapped and t.pole.imag < 0]
    if widths:
        narrow = min(w for w in widths if w > 0)
        spacing = grid[1] - grid[0]
        if spacing > narrow / 10.0:
            warnings.warn(
                f"grid spacing {spacing:.3g} coarser than narrowest width/10 "
                f"({narrow / 10.0:.3g})", GridTooCoarse)
    peaks = []
    if peak_max > 0.0:
        idx, _ = _scipy_find_peaks(total, prominence=prominence * peak_max)
        for i in idx:
            branch = int(np.argmax(spec.branch_intensity[:, i])) + 1
            peaks.append(Peak(location=float(grid[i]),
                              height=float(total[i]),
                              fwhm=float(_half_height_width(grid, total, i)),
                              branch=branch))
    peaks.sort(key=lambda p: p.location)
    branch_areas = tuple(float(np.trapezoid(b, grid)) for b in spec.branch_intensity)
    return PeakAnalysis(peaks=peaks,
                        total_area=float(np.trapezoid(spec.total, grid)),
                        branch_areas=branch_areas)


#: a branch is counted dark when its peak intensity is below this fraction
#: of the total's peak
DARK_BRANCH_RTOL = 1e-18


def count_spectral_lines(spec: SpectrumResult) -> int:
    """Number of dressed-state emission lines contributing to the spectrum.

    Each emitting branch carries one line per root of its characteristic
    quartic (four, counted with multiplicity); a branch whose intensity
    vanishes identically contributes none.  This is the line count in the
    dressed-state accounting (distinct from visible local maxima, which can
    be fewer when residues cancel by symmetry or neighbouring lines overlap).
    """
    if not any(spec.branch_poles):
        raise ValueError("pole decomposition unavailable "
                         f"for method '{spec.method}'")
    peak = float(np.max(spec.total)) if len(spec.total) else 0.0
    n = 0
    for b, terms in enumerate(spec.branch_poles):
        if peak > 0.0 and float(np.max(spec.branch_intensity[b])) <= \
                DARK_BRANCH_RTOL * peak:
            continue
        n += len(terms)
    return n


def integrated_area(spec: SpectrumResult):
    """Trapezoid integral of the total and per-branch intensities.

    Raises GridTooNarrow when the edges still carry more than 1e-4 of the
    peak intensity."""
    peak = float(np.max(spec.total)) if len(spec.total) else 0.0
    edge = max(float(spec.total[0]), float(spec.total[-1]))
    if peak > 0.0 and edge > 1e-4 * peak:
        raise GridTooNarrow(
            f"edge intensity {edge:.3g} exceeds 1e-4 of peak {peak:.3g}")
    total = float(np.trapezoid(spec.total, spec.grid))
    branches = tuple(float(np.trapezoid(b, spec.grid)) for b in spec.branch_intensity)
    return total, branches


@dataclass
class ConservationResult:
    emitted_spectral: float
    emitted_dynamic: float
    trapped: float
    defect: float


def conservation_check(sys, span_factor: float = 2.3,
                       spacing: float = 0.01,
                       t_final: float = 200.0) -> ConservationResult:
    """Compare the spectral integral with 1 - trapped population.

    The grid spans +-span_factor*omega12 so the margin beyond the outer
    branches grows with the splitting (the truncated Lorentzian tails are the
    dominant defect contribution).
    """
    if isinstance(sys, D1System):
        chain = d1_to_chain(sys)
        spec_sys = chain
        dyn_sys = chain
        span = 25.0
    else:
        spec_sys = sys
        dyn_sys = sys
        span = span_factor * sys.omega12
    n = max(int(round(2.0 * span / spacing)) + 1, 1001)
    grid = np.linspace(-span, span, n)
    spec = spectrum_analytic(spec_sys, grid)
    emitted_spectral = float(np.trapezoid(spec.total, grid))
    trapped = trapped_fraction(dyn_sys, t_final=t_final, require_plateau=False)
    emitted_dynamic = 1.0 - trapped
    return ConservationResult(
        emitted_spectral=emitted_spectral,
        emitted_dynamic=emitted_dynamic,
        trapped=trapped,
        defect=abs(emitted_spectral - emitted_dynamic),
    )


def compare_spectra(a: SpectrumResult, b: SpectrumResult) -> dict:
    """Pointwise error metrics over points carrying signal.

    Points where max(a, b) <= 1e-8 * peak are ignored; the per-point relative
    error uses max(|a|, |b|, 1e-3 * peak) as denominator so that near-zero
    valleys do not dominate.
    """
    if a.grid.shape != b.grid.shape or not np.allclose(a.grid, b.grid,
                                                       rtol=0, atol=1e-12):
        raise GridMismatch("spectra were computed on different grids")
    peak = max(float(np.max(a.total)), float(np.max(b.total)), 1e-300)
    mask = np.maximum(a.total, b.total) > 1e-8 * peak
    if not np.any(mask):
        return {"max_rel_err": 0.0, "rms_err": 0.0}
    num = np.abs(a.total[mask] - b.total[mask])
    den = np.maximum(np.maximum(a.total[mask], b.total[mask]), 1e-3 * peak)
    rel = num / den
    return {"max_rel_err": float(np.max(rel)),
            "rms_err": float(np.sqrt(np.mean(rel ** 2)))}

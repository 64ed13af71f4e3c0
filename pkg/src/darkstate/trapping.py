"""Trapping-condition analysis: infeasibility of the vacuum-generated route
and the field-generated conditions that darken the central bare state (chain
system) or the whole atom (simple-loss system)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivisionByZeroDrive
from .model import D1System, D2System, DriveField, wrap_signed
from .spectrum import quartic_coeffs_s

DEFAULT_TOL = 1e-9


@dataclass
class TrappingReport:
    """Residuals of the trapping constraints and the verdict.

    delta_coefficient_residual and constant_residual are the two complex
    coefficient groups of the central-branch numerator (the terms multiplying
    i*delta and the rate-weighted constant part); the three scalar conditions
    are the equivalent split into magnitude, phase and decay-rate balance.
    """

    delta_coefficient_residual: complex
    constant_residual: complex
    magnitude_condition: float
    phase_condition: float
    gamma_condition: float
    satisfied: bool
    solved_fields: tuple | None = None


@dataclass
class SgcWitness:
    feasible: bool
    constant_term: complex
    real_part_lower_bound: float
    trivial: bool


def sgc_constant_term(sys: D2System) -> complex:
    """Constant coefficient of the central-branch characteristic quartic."""
    return complex(quartic_coeffs_s(sys)[4])


def sgc_feasible(sys: D2System) -> SgcWitness:
    """Can a trapped dressed state come from the shared-vacuum route alone?

    Requires the quartic's constant term to vanish.  Its real part is bounded
    below by rate-weighted drive powers plus (|O2 O4| - |O1 O3|)^2, so with
    positive decay rates and any nonzero outer/inner drive product the answer
    is no.  All drives zero makes the term vanish trivially (nothing to trap).
    """
    g1, g2, g3 = (g / 2.0 for g in sys.gamma)
    o1, o2, o3, o4 = np.abs(sys.rabi)
    c0 = sgc_constant_term(sys)
    trivial = (o2 * o4 == 0.0) and (o1 * o3 == 0.0)
    bound = (g1 * g2 * o4 ** 2 + g2 * g3 * o1 ** 2
             + (o2 * o4 - o1 * o3) ** 2)
    feasible = abs(c0) == 0.0 and not trivial
    return SgcWitness(feasible=feasible, constant_term=c0,
                      real_part_lower_bound=float(bound), trivial=trivial)


def fgc_central_numerator(sys: D2System, delta) -> complex:
    """(i delta + Gamma1/2) O3 O4 + (i delta + Gamma3/2) O1 conj(O2).

    This is the initial-state-B numerator of the central emission branch (up
    to overall sign); its identical vanishing is the trapping condition.
    """
    o1, o2, o3, o4 = sys.rabi
    g1 = sys.gamma[0] / 2.0
    g3 = sys.gamma[2] / 2.0
    delta = np.asarray(delta, dtype=complex)
    out = (1j * delta + g1) * o3 * o4 + (1j * delta + g3) * o1 * np.conj(o2)
    return complex(out) if out.ndim == 0 else out


def _condition_parts(o1, o2, o3, o4, g1, g3):
    prod_a = o3 * o4            # carries exp(i phi3) for real outer drives
    prod_b = o1 * np.conj(o2)   # carries exp(-i phi2)
    delta_coeff = prod_a + prod_b
    const = 0.5 * g1 * prod_a + 0.5 * g3 * prod_b
    return prod_a, prod_b, delta_coeff, const


def fgc_check(sys: D2System, tol: float = DEFAULT_TOL) -> TrappingReport:
    """Evaluate the field-generated trapping condition for the chain system.

    Satisfied iff |O3||O4| == |O1||O2|, phi2 + phi3 == pi (mod 2 pi) and
    Gamma1 == Gamma3, all within tol (scale = largest drive product).
    """
    o1, o2, o3, o4 = sys.rabi
    g1, _, g3 = sys.gamma
    prod_a, prod_b, delta_coeff, const = _condition_parts(
        o1, o2, o3, o4, g1, g3)
    mag = abs(o3) * abs(o4) - abs(o1) * abs(o2)
    phases = [d.phase for d in sys.drives]
    phase = wrap_signed(phases[1] + phases[2] - math.pi)
    gamma_cond = g1 - g3
    scale = max(abs(prod_a), abs(prod_b), 1e-300)
    satisfied = (abs(mag) <= tol * scale
                 and abs(phase) <= tol
                 and abs(gamma_cond) <= tol)
    return TrappingReport(
        delta_coefficient_residual=complex(delta_coeff),
        constant_residual=complex(const),
        magnitude_condition=float(mag),
        phase_condition=float(phase),
        gamma_condition=float(gamma_cond),
        satisfied=bool(satisfied),
    )


def fgc_solve(mag1: float, mag2: float, mag3: float, phase2: float) -> tuple:
    """Complete (|O4|, phi3) so the trapping condition holds.

    |O4| = |O1||O2| / |O3| and phi3 = pi - phi2 (wrapped); the caller must
    separately ensure Gamma1 == Gamma3.
    """
    if mag3 == 0.0:
        raise DivisionByZeroDrive("cannot solve for |Omega4| with |Omega3| = 0")
    mag4 = mag1 * mag2 / mag3
    phase3 = math.pi - phase2
    return (
        DriveField(mag1, 0.0),
        DriveField(mag2, phase2),
        DriveField(mag3, phase3),
        DriveField(mag4, 0.0),
    )


def d1_trapping_check(sys: D1System, tol: float = DEFAULT_TOL) -> TrappingReport:
    """Whole-atom darkening condition for the simple-loss loop:
    Oo1*Om1 + Om2*conj(Oo2) == 0 (for the scenario phase conventions this is
    |Oo1||Om1| e^{i phi3} + |Om2||Oo2| e^{-i phi2} == 0)."""
    a = sys.optical1.amplitude * sys.microwave1.amplitude
    b = sys.microwave2.amplitude * np.conj(sys.optical2.amplitude)
    total = a + b
    scale = max(abs(a), abs(b), 1e-300)
    mag = abs(a) - abs(b)
    phase = wrap_signed(sys.optical2.phase + sys.optical1.phase
                        + sys.microwave1.phase - sys.microwave2.phase - math.pi)
    satisfied = abs(total) <= tol * scale
    return TrappingReport(
        delta_coefficient_residual=complex(total),
        constant_residual=0.0,
        magnitude_condition=float(mag),
        phase_condition=float(phase),
        gamma_condition=0.0,
        satisfied=bool(satisfied),
    )

"""Semi-analytical smooth-specimen fatigue engine.

Evolves the homogeneous 1D phase field response under stress-controlled
cycles, with hydrogen uptake and fatigue degradation, to produce S-N
curves without a mesh.  Between changes of the degradation state the
cycle count is advanced analytically, so lives of 10^6 cycles resolve in
milliseconds.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .material import (
    Environment,
    MaterialParams,
    fatigue_degradation,
    hydrogen_degradation,
    uptake_concentration,
)

__all__ = [
    "Equilibrium", "NoEquilibrium", "NO_EQUILIBRIUM", "SmoothSpecimenSpec",
    "homogeneous_capacity", "homogeneous_equilibrium", "run_sn_point",
    "sweep_sn", "write_smooth_sn_csv",
]


@dataclass(frozen=True)
class Equilibrium:
    """Homogeneous state at a given applied stress."""

    phi: float
    eps: float
    psi0: float   # undegraded strain energy density 0.5 E eps^2


class NoEquilibrium:
    """Marker value: the stress exceeds the current homogeneous capacity."""

    __slots__ = ()

    def __repr__(self):
        return "NoEquilibrium"


NO_EQUILIBRIUM = NoEquilibrium()


def _phi_of(psi_eff: float, Gd: float, ell: float) -> float:
    # scalar phase field equilibrium: Gd phi/ell = 2 (1 - phi) psi_eff
    return 2.0 * ell * psi_eff / (Gd + 2.0 * ell * psi_eff)


def homogeneous_capacity(Gd: float, params: MaterialParams,
                         H: float = 0.0) -> float:
    """Largest sustainable tensile stress of the homogeneous response.

    Without history the peak sits at eps = sqrt(Gd/(3 E ell)) and equals
    sqrt(27 E Gd/(256 ell)).  A history field H > Gd/(6 ell) pins the
    phase field above the pristine maximiser and the peak moves to the
    branch junction eps = sqrt(2 H/E).
    """
    E, ell = params.E, params.ell
    if Gd <= 0.0:
        return 0.0
    if H <= Gd / (6.0 * ell):
        return math.sqrt(27.0 * E * Gd / (256.0 * ell))
    phiH = _phi_of(H, Gd, ell)
    return (1.0 - phiH) ** 2 * math.sqrt(2.0 * H * E)


def homogeneous_equilibrium(sigma: float, Gd: float, params: MaterialParams,
                            H: float = 0.0):
    """Solve the scalar coupled system at an applied stress.

    sigma = (1 - phi)^2 E eps together with
    Gd phi/ell = 2 (1 - phi) max(H, psi_plus),  psi_plus = 0.5 E <eps>+^2.

    Returns an Equilibrium on the pre-peak branch, or NO_EQUILIBRIUM when
    |sigma| exceeds the current capacity.  Compression never fails
    (psi_plus = 0 there) and responds with the history-pinned stiffness.
    """
    E, ell = params.E, params.ell
    if Gd < 0.0 or H < 0.0:
        raise ValueError("Gd and H must be non-negative")
    if sigma == 0.0:
        phiH = _phi_of(H, Gd, ell) if (Gd > 0.0 or H > 0.0) else 0.0
        return Equilibrium(phi=phiH, eps=0.0, psi0=0.0)
    if Gd == 0.0:
        return NO_EQUILIBRIUM
    phiH = _phi_of(H, Gd, ell)
    gH = (1.0 - phiH) ** 2
    if sigma < 0.0:
        eps = sigma / (gH * E)
        return Equilibrium(phi=phiH, eps=eps, psi0=0.5 * E * eps * eps)
    if sigma > homogeneous_capacity(Gd, params, H):
        return NO_EQUILIBRIUM
    # history-pinned segment: phi constant until psi_plus exceeds H
    epsH = math.sqrt(2.0 * H / E)
    eps_lin = sigma / (gH * E)
    if eps_lin <= epsH * (1.0 + 1e-12):
        return Equilibrium(phi=phiH, eps=eps_lin, psi0=0.5 * E * eps_lin**2)
    # energy-driven rising branch up to the pristine maximiser
    eps_star = math.sqrt(Gd / (3.0 * E * ell))

    def resid(e):
        phi = _phi_of(0.5 * E * e * e, Gd, ell)
        return (1.0 - phi) ** 2 * E * e - sigma

    if resid(eps_star) <= 0.0:
        eps = eps_star          # sigma equals the capacity within rounding
    else:
        eps = brentq(resid, epsH, eps_star, xtol=1e-18, rtol=8.9e-16)
    phi = _phi_of(0.5 * E * eps * eps, Gd, ell)
    return Equilibrium(phi=phi, eps=eps, psi0=0.5 * E * eps * eps)


@dataclass(frozen=True)
class SmoothSpecimenSpec:
    """Stress-controlled uniaxial fatigue program for the scalar engine.

    stress_amplitude is the classical S-N amplitude (half the range), so
    the peak stress is 2 sigma_a/(1 - R).
    """

    params: MaterialParams
    env: Environment
    stress_amplitude: float
    R: float = -1.0
    increments_per_cycle: int = 40
    n_cycles_max: int = 2_000_000

    def __post_init__(self):
        if self.stress_amplitude <= 0.0:
            raise ValueError("stress amplitude must be positive")
        if not (-1.0 <= self.R < 1.0):
            raise ValueError("load ratio must satisfy -1 <= R < 1")
        if self.increments_per_cycle < 8 or self.increments_per_cycle % 4:
            raise ValueError("increments per cycle must be a multiple of 4, "
                             ">= 8, so every peak is sampled exactly")
        if self.n_cycles_max < 1:
            raise ValueError("cycle cap must be at least 1")

    @property
    def peak(self) -> float:
        return 2.0 * self.stress_amplitude / (1.0 - self.R)

    @property
    def valley(self) -> float:
        return self.R * self.peak


def _cycle_levels(spec: SmoothSpecimenSpec) -> np.ndarray:
    # piece-wise linear wave starting at the mean, rising; one full cycle
    rng = spec.peak - spec.valley
    mean = 0.5 * (spec.peak + spec.valley)
    tau = np.arange(1, spec.increments_per_cycle + 1) / spec.increments_per_cycle
    up = mean + 2.0 * rng * tau
    down = spec.peak - 2.0 * rng * (tau - 0.25)
    back = spec.valley + 2.0 * rng * (tau - 0.75)
    return np.where(tau < 0.25, up, np.where(tau < 0.75, down, back))


# fast-forward control: largest relative change of the fatigue degradation
# permitted across one analytic jump
_F_STEP = 0.0025


def run_sn_point(spec: SmoothSpecimenSpec) -> int:
    """Cycles to failure; n_cycles_max + 1 signals a runout.

    Failure is the first cycle in which the homogeneous equilibrium is
    lost at the applied stress.  The hydrogen concentration is fixed per
    amplitude, using the steady-state stress scaling with
    sigma_H = sigma_peak/3.
    """
    p, env = spec.params, spec.env
    if env.pressure:
        C = uptake_concentration(env, p, sigmaH=spec.peak / 3.0)
    else:
        C = env.Cenv
    fC = hydrogen_degradation(C, p)
    levels = _cycle_levels(spec)
    aT = p.alphaT
    cap_cycles = spec.n_cycles_max

    abar = 0.0
    H = 0.0
    alpha_prev = 0.0
    N = 0
    while N < cap_cycles:
        abar0 = abar
        for s in levels:
            Gd = fC * fatigue_degradation(abar, p) * p.Gc
            eq = homogeneous_equilibrium(float(s), Gd, p, H)
            if isinstance(eq, NoEquilibrium):
                return N + 1
            psi_p = 0.5 * p.E * max(eq.eps, 0.0) ** 2
            if psi_p > H:
                H = psi_p
            alpha = (1.0 - eq.phi) ** 2 * psi_p
            if alpha > alpha_prev:
                abar += alpha - alpha_prev
            alpha_prev = alpha
        N += 1
        d_cycle = abar - abar0
        remaining = cap_cycles - N
        if d_cycle <= 0.0:
            return cap_cycles + 1       # shakedown: no further evolution
        if remaining == 0:
            break
        if abar < aT:
            # exactly periodic below the threshold: jump to its doorstep
            n = min(int((aT - abar) / d_cycle), remaining)
        else:
            f_now = fatigue_degradation(abar, p)
            n = remaining
            while n > 0 and not _jump_ok(abar + n * d_cycle, f_now, fC, H,
                                         spec, p):
                n //= 2
        if n > 0:
            abar += n * d_cycle
            N += n
    return cap_cycles + 1


def _jump_ok(abar_new, f_now, fC, H, spec, p) -> bool:
    f_new = fatigue_degradation(abar_new, p)
    if abs(f_new - f_now) > _F_STEP * f_now:
        return False
    # never jump across the failure point
    return homogeneous_capacity(fC * f_new * p.Gc, p, H) >= spec.peak


def sweep_sn(params: MaterialParams, env: Environment, amplitudes,
             R: float = -1.0, increments_per_cycle: int = 40,
             n_cycles_max: int = 2_000_000):
    """S-N table [(sigma_a, N_f), ...] for a descending amplitude grid."""
    amps = [float(a) for a in amplitudes]
    if any(a2 > a1 for a1, a2 in zip(amps, amps[1:])):
        raise ValueError("amplitude grid must be descending")
    out = []
    for a in amps:
        spec = SmoothSpecimenSpec(
            params=params, env=env, stress_amplitude=a, R=R,
            increments_per_cycle=increments_per_cycle,
            n_cycles_max=n_cycles_max)
        out.append((a, run_sn_point(spec)))
    return out


def write_smooth_sn_csv(path, material: str, environment: str, rows):
    """rows: iterable of (stress_amp_MPa, N_f)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["material", "environment", "stress_amp_MPa", "N_f"])
        for sa, nf in rows:
            w.writerow([material, environment, sa, nf])

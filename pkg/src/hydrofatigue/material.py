"""Material constants and closed-form constitutive functions.

Units are fixed repo-wide: N, mm, s, MPa (= N/mm^2 = mJ/mm^3), mol, K,
and wt ppm for hydrogen concentrations.  Fracture energies are N/mm
(= kJ/m^2), molar energies mJ/mol.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

# Universal gas constant in mJ/(mol K).
GAS_CONSTANT = 8314.0


class FatigueLaw(enum.Enum):
    ASYMPTOTIC = "asymptotic"
    LOGARITHMIC = "logarithmic"


class Split(enum.Enum):
    """Tension-compression decomposition of the strain energy density."""

    NOSPLIT = "nosplit"
    VOLDEV = "voldev"
    SPECTRAL = "spectral"


@dataclass(frozen=True)
class MaterialParams:
    """Elastic, fracture, fatigue and hydrogen-transport constants.

    Parameters
    ----------
    E : Young's modulus [MPa]
    nu : Poisson's ratio
    Gc : critical energy release rate [N/mm]
    ell : phase field length scale [mm]
    chi : hydrogen damage coefficient
    dgb0 : trap binding energy [mJ/mol]
    VH : partial molar volume of hydrogen [mm^3/mol]
    D : hydrogen diffusion coefficient [mm^2/s]
    T : temperature [K]
    alphaT : fatigue threshold [MPa]; defaults to Gc/(12*ell)
    kappa : slope parameter of the logarithmic fatigue law
    fatigue_law, split : constitutive choices
    M_host, M_H : molar masses of host metal and hydrogen [g/mol]
    rho_host : host density [kg/m^3]
    """

    E: float
    nu: float
    Gc: float
    ell: float
    D: float = 0.0127
    T: float = 293.15
    chi: float = 0.89
    dgb0: float = 30.0e6
    VH: float = 2000.0
    alphaT: float | None = None
    kappa: float = 0.15
    fatigue_law: FatigueLaw = FatigueLaw.ASYMPTOTIC
    split: Split = Split.VOLDEV
    M_host: float = 55.85
    M_H: float = 1.008
    rho_host: float = 7870.0

    def __post_init__(self):
        if self.E <= 0:
            raise ValueError("E must be positive")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError("nu must lie in [0, 0.5)")
        if self.Gc <= 0 or self.ell <= 0:
            raise ValueError("Gc and ell must be positive")
        if not 0.0 <= self.chi <= 1.0:
            raise ValueError("chi must lie in [0, 1]")
        if self.VH < 0 or self.D <= 0 or self.T <= 0:
            raise ValueError("VH, D, T out of range")
        if self.alphaT is None:
            object.__setattr__(self, "alphaT", self.Gc / (12.0 * self.ell))
        if self.alphaT <= 0:
            raise ValueError("alphaT must be positive")
        if self.fatigue_law is FatigueLaw.LOGARITHMIC and self.kappa <= 0:
            raise ValueError("kappa must be positive for the logarithmic law")

    @property
    def lame(self):
        """Lame constants (lambda, mu)."""
        lam = self.E * self.nu / ((1.0 + self.nu) * (1.0 - 2.0 * self.nu))
        mu = self.E / (2.0 * (1.0 + self.nu))
        return lam, mu

    @property
    def bulk_modulus(self):
        lam, mu = self.lame
        return lam + 2.0 * mu / 3.0

    def with_(self, **kw) -> "MaterialParams":
        return replace(self, **kw)


@dataclass(frozen=True)
class Environment:
    """Hydrogenous environment description.

    Cenv is the boundary/initial lattice concentration in wt ppm.  For gas
    exposure, `pressure` [MPa] together with the Sievert parameters S0
    [mol/(m^3 sqrt(MPa))] and Es [mJ/mol] and the Abel-Noble co-volume b
    [mm^3/mol] determine the uptake.  `sievert_calibration` multiplies the
    converted concentration (see uptake_concentration).
    """

    Cenv: float = 0.0
    precharged: bool = True
    pressure: float | None = None
    abel_noble_b: float = 15840.0
    S0: float | None = None
    Es: float | None = None
    sievert_calibration: float = 1.0

    def __post_init__(self):
        if self.Cenv < 0:
            raise ValueError("Cenv must be non-negative")
        if self.pressure is not None and self.pressure < 0:
            raise ValueError("pressure must be non-negative")

    @property
    def inert(self) -> bool:
        return self.Cenv == 0.0 and not self.pressure


def stiffness_degradation(phi):
    """Quadratic stiffness degradation g = (1 - phi)^2.

    Accepts scalars or arrays; raises for values outside [0, 1] beyond a
    1e-9 tolerance.
    """
    p = np.asarray(phi, dtype=float)
    if np.any(p < -1e-9) or np.any(p > 1.0 + 1e-9):
        raise ValueError("phase field outside [0, 1]")
    p = np.clip(p, 0.0, 1.0)
    out = (1.0 - p) ** 2
    return float(out) if np.isscalar(phi) else out


def hydrogen_coverage(C, params: MaterialParams):
    """Langmuir-McLean surface coverage from the bulk concentration.

    The concentration C [wt ppm] is converted to an atomic mole fraction
    x = C*1e-6*(M_host/M_H) before insertion into the isotherm
    theta = x / (x + exp(-dgb0/(R T))).
    """
    c = np.asarray(C, dtype=float)
    if np.any(c < 0):
        raise ValueError("concentration must be non-negative")
    x = c * 1e-6 * (params.M_host / params.M_H)
    denom = x + math.exp(-params.dgb0 / (GAS_CONSTANT * params.T))
    out = x / denom
    return float(out) if np.isscalar(C) else out


def hydrogen_degradation(C, params: MaterialParams):
    """Fracture-energy knockdown f_C = 1 - chi*theta(C)."""
    out = 1.0 - params.chi * hydrogen_coverage(C, params)
    return float(out) if np.isscalar(C) else out


def fatigue_degradation(alpha_bar, params: MaterialParams):
    """Fatigue degradation f(alpha_bar), asymptotic or logarithmic form.

    Both forms equal 1 up to the threshold alphaT.  The asymptotic form
    decays as (2 alphaT/(alpha_bar + alphaT))^2; the logarithmic form is
    [1 - kappa*log10(alpha_bar/alphaT)]^2 with an exact cutoff to 0 at
    alpha_bar >= alphaT*10^(1/kappa).
    """
    a = np.asarray(alpha_bar, dtype=float)
    aT = params.alphaT
    if params.fatigue_law is FatigueLaw.ASYMPTOTIC:
        out = np.where(a <= aT, 1.0, (2.0 * aT / np.maximum(a + aT, aT)) ** 2)
    else:
        cutoff = aT * 10.0 ** (1.0 / params.kappa)
        with np.errstate(divide="ignore", invalid="ignore"):
            mid = (1.0 - params.kappa * np.log10(np.maximum(a, aT) / aT)) ** 2
        out = np.where(a <= aT, 1.0, np.where(a >= cutoff, 0.0, mid))
    return float(out) if np.isscalar(alpha_bar) else out


def degraded_fracture_energy(C, alpha_bar, params: MaterialParams):
    """Effective toughness f_C(C) * f(alpha_bar) * Gc."""
    out = (
        hydrogen_degradation(C, params)
        * fatigue_degradation(alpha_bar, params)
        * params.Gc
    )
    if np.isscalar(C) and np.isscalar(alpha_bar):
        return float(out)
    return out


def critical_strength(params: MaterialParams, Gd: float | None = None) -> float:
    """Peak of the homogeneous 1D stress response, sqrt(27 E Gd/(256 ell)).

    Gd defaults to the pristine Gc.
    """
    g = params.Gc if Gd is None else Gd
    if g < 0:
        raise ValueError("Gd must be non-negative")
    return math.sqrt(27.0 * params.E * g / (256.0 * params.ell))


def length_scale_from_strength(params: MaterialParams, sigma_c: float) -> float:
    """Invert the critical-strength relation for the length scale ell."""
    if sigma_c <= 0:
        raise ValueError("sigma_c must be positive")
    return 27.0 * params.E * params.Gc / (256.0 * sigma_c**2)


@dataclass(frozen=True)
class ReferenceScales:
    K0: float
    Lf: float
    alphaT_default: float


def reference_scales(params: MaterialParams) -> ReferenceScales:
    """Reference stress intensity K0, process-zone length Lf and the
    default fatigue threshold Gc/(12 ell)."""
    K0 = math.sqrt(params.Gc * params.E / (1.0 - params.nu**2))
    Lf = params.Gc * (1.0 - params.nu**2) / params.E
    return ReferenceScales(K0=K0, Lf=Lf, alphaT_default=params.Gc / (12.0 * params.ell))


def fugacity(pressure: float, b: float, T: float) -> float:
    """Abel-Noble fugacity f = p*exp(p*b/(R T)); b in mm^3/mol."""
    return pressure * math.exp(pressure * b / (GAS_CONSTANT * T))


def uptake_concentration(
    env: Environment, params: MaterialParams, sigmaH: float = 0.0
) -> float:
    """Lattice concentration [wt ppm] absorbed from H2 gas.

    Sievert's law C = S*sqrt(f_H2) with S = S0*exp(-Es/(R T)) gives mol/m^3,
    converted to wt ppm through M_H/rho_host and multiplied by the
    calibration factor of the environment.  The result is scaled by
    exp(VH*sigmaH/(R T)) to account for lattice dilatation.
    """
    if env.pressure is None or env.pressure == 0.0:
        return 0.0
    if env.S0 is None or env.Es is None:
        raise ValueError("S0 and Es are required for gas-pressure uptake")
    f = fugacity(env.pressure, env.abel_noble_b, params.T)
    S = env.S0 * math.exp(-env.Es / (GAS_CONSTANT * params.T))
    c_mol_m3 = S * math.sqrt(f)
    # mol/m^3 -> weight fraction: * M_H[kg/mol] / rho[kg/m^3]; then -> ppm.
    c_wtppm = c_mol_m3 * (params.M_H * 1e-3) / params.rho_host * 1e6
    c_wtppm *= env.sievert_calibration
    return c_wtppm * math.exp(params.VH * sigmaH / (GAS_CONSTANT * params.T))


def stress_concentration_factor(C: float, params: MaterialParams, sigmaH: float):
    """Steady-state concentration C*exp(VH*sigmaH/(R T)) (scalar or array)."""
    return C * np.exp(params.VH * np.asarray(sigmaH) / (GAS_CONSTANT * params.T))


# Material presets for the two steels used in the smooth-specimen fatigue
# comparisons.  The length scale follows from the tensile strength through
# the critical-strength relation; alphaT/kappa are the fitted fatigue
# parameters; Sievert constants follow AISI 4130 / AISI 1020 data.
def _steel(Gc, sigma_uts, S0, Es):
    base = MaterialParams(
        E=210e3,
        nu=0.3,
        Gc=Gc,
        ell=1.0,  # replaced below
        alphaT=24.0,
        kappa=0.15,
        fatigue_law=FatigueLaw.LOGARITHMIC,
        split=Split.SPECTRAL,
    )
    ell = length_scale_from_strength(base, sigma_uts)
    params = base.with_(ell=ell, alphaT=24.0)
    env_air = Environment(Cenv=0.0)
    env_h2 = Environment(
        pressure=115.0, S0=S0, Es=Es, sievert_calibration=2.0
    )
    return params, env_air, env_h2


MATERIAL_PRESETS = {
    "JIS-SCM435": _steel(Gc=60.0, sigma_uts=840.0, S0=102.0, Es=27.2e6),
    "JIS-SM490B": _steel(Gc=27.0, sigma_uts=530.0, S0=159.0, Es=23.54e6),
}

"""Scalar smooth-specimen engine: equilibrium roots, S-N lives, sweeps."""

import csv
import math

import numpy as np
import pytest

from hydrofatigue.homog import (
    NO_EQUILIBRIUM, Equilibrium, NoEquilibrium, SmoothSpecimenSpec,
    homogeneous_capacity, homogeneous_equilibrium, run_sn_point, sweep_sn,
    write_smooth_sn_csv,
)
from hydrofatigue.material import (
    MATERIAL_PRESETS, Environment, MaterialParams, critical_strength,
    fatigue_degradation, hydrogen_degradation,
)

P = MaterialParams(E=210e3, nu=0.3, Gc=2.7, ell=0.01)


def brute_capacity(Gd, params, H=0.0, n=200001):
    # direct scan of the homogeneous stress response
    e = np.linspace(0.0, 4.0 * math.sqrt(Gd / (3 * params.E * params.ell)), n)
    psi_eff = np.maximum(0.5 * params.E * e**2, H)
    phi = 2 * params.ell * psi_eff / (Gd + 2 * params.ell * psi_eff)
    return ((1 - phi) ** 2 * params.E * e).max()


def quartic_root(sigma, Gd, params):
    # independent route: sigma (Gd + l E e^2)^2 = Gd^2 E e as a polynomial
    E, ell = params.E, params.ell
    coef = [sigma * ell**2 * E**2, 0.0, 2 * sigma * Gd * ell * E,
            -(Gd**2) * E, sigma * Gd**2]
    lim = math.sqrt(Gd / (3 * E * ell)) * (1 + 1e-9)
    real = sorted(r.real for r in np.roots(coef)
                  if abs(r.imag) < 1e-9 * abs(r) + 1e-30 and 0 < r.real <= lim)
    assert real, "no admissible root"
    return real[0]


class TestHomogeneousEquilibrium:
    def test_zero_stress_history_formula(self):
        H = 5.0
        eq = homogeneous_equilibrium(0.0, P.Gc, P, H=H)
        assert eq.eps == 0.0 and eq.psi0 == 0.0
        assert eq.phi == pytest.approx(
            2 * H * P.ell / (P.Gc + 2 * H * P.ell), rel=1e-14)

    def test_near_peak_limits(self):
        sc = critical_strength(P)
        eq = homogeneous_equilibrium(sc * (1 - 1e-12), P.Gc, P, H=0.0)
        assert eq.phi == pytest.approx(0.25, abs=1e-4)
        assert eq.eps == pytest.approx(
            math.sqrt(P.Gc / (3 * P.E * P.ell)), rel=1e-4)

    def test_above_capacity(self):
        sc = critical_strength(P)
        assert isinstance(
            homogeneous_equilibrium(sc * (1 + 1e-7), P.Gc, P), NoEquilibrium)
        # history lowers the capacity
        H = 2.0 * P.Gc / (6 * P.ell)
        cap = homogeneous_capacity(P.Gc, P, H)
        assert cap < sc
        assert isinstance(
            homogeneous_equilibrium(cap * 1.001, P.Gc, P, H), NoEquilibrium)
        assert isinstance(
            homogeneous_equilibrium(cap * 0.999, P.Gc, P, H), Equilibrium)

    def test_capacity_brute_force(self):
        for Gd, H in [(2.7, 0.0), (2.7, 30.0), (2.7, 80.0), (1.1, 40.0),
                      (0.4, 5.0)]:
            cc = homogeneous_capacity(Gd, P, H)
            assert cc == pytest.approx(brute_capacity(Gd, P, H), rel=1e-5)

    def test_rising_branch_against_quartic(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            Gd = rng.uniform(0.3, 2.7)
            sig = rng.uniform(0.05, 0.999) * homogeneous_capacity(Gd, P)
            eq = homogeneous_equilibrium(sig, Gd, P)
            assert eq.eps == pytest.approx(quartic_root(sig, Gd, P),
                                           rel=1e-11)

    def test_pre_peak_branch_selected(self):
        # without history the pre-peak branch keeps phi <= 1/4
        for frac in (0.2, 0.6, 0.9, 0.999):
            eq = homogeneous_equilibrium(frac * critical_strength(P), P.Gc, P)
            assert eq.phi <= 0.25 + 1e-12
            assert eq.eps <= math.sqrt(P.Gc / (3 * P.E * P.ell)) * (1 + 1e-12)

    def test_history_pinned_unloading(self):
        H = 40.0
        phiH = 2 * H * P.ell / (P.Gc + 2 * H * P.ell)
        eq = homogeneous_equilibrium(100.0, P.Gc, P, H=H)
        assert eq.phi == pytest.approx(phiH, rel=1e-12)
        assert eq.eps == pytest.approx(100.0 / ((1 - phiH) ** 2 * P.E),
                                       rel=1e-12)

    def test_compression_never_fails(self):
        sc = critical_strength(P)
        eq = homogeneous_equilibrium(-5 * sc, P.Gc, P, H=10.0)
        assert isinstance(eq, Equilibrium)
        assert eq.eps < 0.0

    def test_zero_toughness(self):
        assert homogeneous_capacity(0.0, P) == 0.0
        assert isinstance(homogeneous_equilibrium(1.0, 0.0, P), NoEquilibrium)


SM_PARAMS, SM_AIR, SM_H2 = MATERIAL_PRESETS["JIS-SM490B"]


def brute_sn_point(spec):
    """No-skip marcher with the quartic root: independent of run_sn_point."""
    p, env = spec.params, spec.env
    smax = spec.peak
    if env.pressure:
        from hydrofatigue.material import uptake_concentration
        C = uptake_concentration(env, p, sigmaH=smax / 3.0)
    else:
        C = env.Cenv
    fC = hydrogen_degradation(C, p)
    inc = spec.increments_per_cycle
    tau = np.arange(1, inc + 1) / inc
    rng = spec.peak - spec.valley
    mean = 0.5 * (spec.peak + spec.valley)
    lv = np.where(tau < 0.25, mean + 2 * rng * tau,
                  np.where(tau < 0.75, spec.peak - 2 * rng * (tau - 0.25),
                           spec.valley + 2 * rng * (tau - 0.75)))
    abar, H, aprev = 0.0, 0.0, 0.0
    for n in range(spec.n_cycles_max):
        for s in lv:
            Gd = fC * fatigue_degradation(abar, p) * p.Gc
            if s > homogeneous_capacity(Gd, p, H):
                return n + 1
            if s <= 0.0:
                alpha = 0.0
            else:
                phiH = 2 * p.ell * H / (Gd + 2 * p.ell * H)
                e_lin = s / ((1 - phiH) ** 2 * p.E)
                if 0.5 * p.E * e_lin**2 <= H:
                    e, phi = e_lin, phiH
                else:
                    e = quartic_root(s, Gd, p)
                    psi = 0.5 * p.E * e * e
                    phi = 2 * p.ell * psi / (Gd + 2 * p.ell * psi)
                psi_p = 0.5 * p.E * e * e
                H = max(H, psi_p)
                alpha = (1 - phi) ** 2 * psi_p
            abar += max(0.0, alpha - aprev)
            aprev = alpha
    return spec.n_cycles_max + 1


class TestRunSnPoint:
    def test_static_failure_is_cycle_one(self):
        sc = critical_strength(SM_PARAMS)
        spec = SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                                  stress_amplitude=1.01 * sc)
        assert run_sn_point(spec) == 1

    def test_runout_sentinel(self):
        spec = SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                                  stress_amplitude=40.0, n_cycles_max=500)
        assert run_sn_point(spec) == 501

    def test_fast_forward_matches_no_skip_march(self):
        # the analytic cycle jumps must not move N_f beyond 0.5%
        spec = SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                                  stress_amplitude=380.0,
                                  increments_per_cycle=20)
        fast = run_sn_point(spec)
        brute = brute_sn_point(spec)
        assert abs(fast - brute) <= max(0.005 * brute, 2.0)

    def test_hydrogen_life_reduction(self):
        a = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=SM_AIR, stress_amplitude=300.0))
        h = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=SM_H2, stress_amplitude=300.0))
        assert a / h >= 5.0

    def test_chi_zero_removes_hydrogen_effect(self):
        prm = SM_PARAMS.with_(chi=0.0)
        a = run_sn_point(SmoothSpecimenSpec(
            params=prm, env=SM_AIR, stress_amplitude=320.0))
        h = run_sn_point(SmoothSpecimenSpec(
            params=prm, env=SM_H2, stress_amplitude=320.0))
        assert a == h

    def test_monotone_in_amplitude_and_concentration(self):
        lives = [run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=SM_AIR, stress_amplitude=sa))
            for sa in (420.0, 360.0, 300.0)]
        assert lives[0] <= lives[1] <= lives[2]
        lives_c = [run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=Environment(Cenv=c),
            stress_amplitude=320.0)) for c in (0.0, 0.3, 1.0)]
        assert lives_c[0] >= lives_c[1] >= lives_c[2]

    def test_monotone_in_toughness(self):
        lo = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS.with_(Gc=0.8 * SM_PARAMS.Gc), env=SM_AIR,
            stress_amplitude=320.0))
        hi = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS.with_(Gc=1.2 * SM_PARAMS.Gc), env=SM_AIR,
            stress_amplitude=320.0))
        assert hi >= lo

    def test_increment_count_objectivity(self):
        n20 = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=SM_AIR, stress_amplitude=300.0,
            increments_per_cycle=20))
        n80 = run_sn_point(SmoothSpecimenSpec(
            params=SM_PARAMS, env=SM_AIR, stress_amplitude=300.0,
            increments_per_cycle=80))
        assert abs(n80 - n20) <= 0.03 * n20

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                               stress_amplitude=0.0)
        with pytest.raises(ValueError):
            SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                               stress_amplitude=100.0, R=1.0)
        with pytest.raises(ValueError):
            SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                               stress_amplitude=100.0,
                               increments_per_cycle=10)
        with pytest.raises(ValueError):
            SmoothSpecimenSpec(params=SM_PARAMS, env=SM_AIR,
                               stress_amplitude=100.0, n_cycles_max=0)


class TestSweep:
    def test_table_and_monotonicity(self):
        rows = sweep_sn(SM_PARAMS, SM_AIR, [420.0, 360.0, 300.0],
                        n_cycles_max=2_000_000)
        amps = [r[0] for r in rows]
        lives = [r[1] for r in rows]
        assert amps == [420.0, 360.0, 300.0]
        assert lives[0] <= lives[1] <= lives[2]

    def test_rejects_ascending_grid(self):
        with pytest.raises(ValueError):
            sweep_sn(SM_PARAMS, SM_AIR, [300.0, 360.0])

    def test_csv_contract(self, tmp_path):
        p = tmp_path / "sn.csv"
        write_smooth_sn_csv(p, "JIS-SM490B", "air",
                            [(300.0, 64255), (240.0, 582746)])
        with open(p, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["material", "environment", "stress_amp_MPa", "N_f"]
        assert rows[1][:2] == ["JIS-SM490B", "air"]
        assert int(rows[2][3]) == 582746

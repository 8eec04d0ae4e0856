"""Closed-form oracles: rates, optimal drive, populations, timescales."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairsource.errors import NumericError, RegimeError
from pairsource.analytic import (
    effective_populations,
    first_revival_argmax,
    gamma_s_purcell,
    intra_pair_delay,
    lorentzian_reflection,
    omega_2ph,
    psi_2ph_approx,
    purcell_rates,
    reloading_rate,
    timescales,
)

from conftest import make_bench


class TestPurcell:
    def test_rates_at_bench(self, bench):
        eff = purcell_rates(bench)
        assert eff.gamma_p_purcell == pytest.approx(4 * 0.1**2 / 20.0)
        assert eff.omega_eff == pytest.approx(2 * 0.01 * 0.1 / 20.0)

    def test_signal_purcell_dc_value(self, bench):
        assert gamma_s_purcell(bench, 0.0) == pytest.approx(0.04)

    def test_decay_paths_balanced_at_optimum(self, bench):
        # at the optimal drive both emission channels carry equal rates
        eff = purcell_rates(bench)
        assert eff.gamma_s_purcell == pytest.approx(eff.gamma_p_purcell, rel=1e-12)


class TestOptimalDrive:
    def test_value_at_bench(self, bench):
        assert omega_2ph(bench) == pytest.approx(np.sqrt(4.75), rel=1e-12)
        assert omega_2ph(bench) == pytest.approx(2.179, rel=1e-3)

    def test_no_solution_when_dephasing_dominates(self):
        with pytest.raises(RegimeError):
            omega_2ph(make_bench(gamma_star=1.0))

    def test_no_solution_when_signal_channel_weak(self):
        with pytest.raises(RegimeError):
            omega_2ph(make_bench(g_s=0.001))


class TestLorentzian:
    def test_zero_reflection_at_optimum(self, bench):
        assert lorentzian_reflection(bench, 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_far_detuned_reflection(self, bench):
        assert lorentzian_reflection(bench, 1e5) == pytest.approx(1.0, abs=1e-4)

    def test_vectorized(self, bench):
        out = lorentzian_reflection(bench, np.array([0.0, 0.1]))
        assert out.shape == (2,)


class TestPopulations:
    def test_saturation_limit(self):
        p = make_bench(omega_p_drive=1e4)
        assert effective_populations(p)["n_e"] == pytest.approx(0.5, rel=1e-3)

    def test_weak_drive_scaling(self, bench):
        weak = make_bench(omega_p_drive=bench.omega_p_drive / 10.0)
        ratio = (
            effective_populations(bench)["n_e"]
            / effective_populations(weak)["n_e"]
        )
        assert ratio == pytest.approx(100.0, rel=1e-2)


class TestPairWavefunction:
    def test_zero_separation_value(self, bench):
        w = bench.omega_s_drive
        assert psi_2ph_approx(bench, 0.0) == pytest.approx((2 * w) ** 2)

    def test_matches_exact_shape(self):
        from pairsource.scattering import psi_2ph_grid

        p = make_bench(omega_s_drive=10.0)
        r = np.linspace(0.0, 10.0, 201)
        exact = np.abs(psi_2ph_grid(p, r)) ** 2
        approx = psi_2ph_approx(p, r)
        dev = np.abs(exact / exact.max() - approx / approx.max()).max()
        assert dev < 5e-2


class TestReloading:
    def test_no_dephasing_is_purcell_sum(self, bench):
        eff = purcell_rates(bench)
        assert reloading_rate(bench) == pytest.approx(
            eff.gamma_p_purcell + eff.gamma_s_purcell
        )

    def test_continuous_at_zero_dephasing(self, bench):
        assert reloading_rate(make_bench(gamma_star=1e-12)) == pytest.approx(
            reloading_rate(bench), rel=1e-6
        )


class TestRevival:
    def test_synthetic_revival_location(self):
        r = np.linspace(0.0, 10.0, 5001)
        values = np.exp(-0.3 * r) * (1.0 + 0.2 * np.cos(2 * np.pi * r))
        # local minima near r = 0.5, first revival near r = 1
        assert first_revival_argmax(r, values) == pytest.approx(0.975, abs=0.05)

    def test_monotone_series_rejected(self):
        r = np.linspace(0.0, 5.0, 100)
        with pytest.raises(NumericError):
            first_revival_argmax(r, np.exp(-r))

    def test_delay_shrinks_with_drive(self):
        t10 = intra_pair_delay(make_bench(omega_s_drive=10.0))
        t20 = intra_pair_delay(make_bench(omega_s_drive=20.0))
        assert t20 < t10

    def test_timescale_ordering_strong_drive(self):
        # the clean separation tau_in < tau_b < tau_a needs omega_s >> gamma_s
        ts = timescales(make_bench(omega_s_drive=10.0))
        assert ts.tau_in < ts.tau_b < ts.tau_a
        assert ts.ordering_ok


@settings(max_examples=30, deadline=None)
@given(omega=st.floats(min_value=0.0, max_value=100.0))
def test_signal_purcell_monotone(omega):
    bench = make_bench()
    assert gamma_s_purcell(bench, omega) <= gamma_s_purcell(bench, 0.0) + 1e-15


@settings(max_examples=20, deadline=None)
@given(
    g_p=st.floats(min_value=0.01, max_value=0.5),
    g_s=st.floats(min_value=0.01, max_value=0.5),
    omega_p=st.floats(min_value=1e-4, max_value=0.1),
)
def test_effective_quantities_positive(g_p, g_s, omega_p):
    p = make_bench(g_p=g_p, g_s=g_s, omega_p_drive=omega_p, omega_s_drive=1.0)
    eff = purcell_rates(p)
    assert eff.gamma_eff > 0
    pops = effective_populations(p)
    assert 0 <= pops["n_e"] < 0.5
    assert pops["n_s"] >= 0

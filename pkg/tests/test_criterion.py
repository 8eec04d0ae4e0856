"""Pair-source verdict logic: synthetic series and full master-equation runs."""

import numpy as np
import pytest

from pairsource.criterion import (
    DEFAULT_BAND,
    REGIME_DEGRADED_PAIR,
    REGIME_OPTIMAL_PAIR,
    REGIME_SINGLE_PHOTON,
    classify_regime,
    evaluate_criterion,
)
from pairsource.errors import GridTooShortError
from pairsource.lindblad import (
    CorrelationSeries,
    build_liouvillian,
    correlation_tau_grid,
    correlator_G2,
    correlator_G2_pairs,
    steady_observables,
    steady_state,
)
from pairsource.fock import box_basis

from conftest import make_bench


def _synthetic(tau_a=50.0, tau_b=1.0, peak_shift=0.0, pair_start=0.0):
    """Bunched single-photon series + antibunched pair series."""
    tau = np.linspace(0.0, 20.0 * tau_a, 4001)
    g2 = 1.0 + 40.0 * np.exp(-((tau - peak_shift) ** 2) / (2 * tau_b**2))
    pairs = pair_start + (1.0 - pair_start) * (1.0 - np.exp(-tau / tau_a))
    return (
        CorrelationSeries(tau, g2, "g2"),
        CorrelationSeries(tau, pairs, "g2_pairs"),
    )


class TestClassify:
    def test_bands(self):
        assert classify_regime(1.0) == REGIME_SINGLE_PHOTON
        assert classify_regime(1.0 + 0.9 * DEFAULT_BAND) == REGIME_SINGLE_PHOTON
        assert classify_regime(0.5) == REGIME_OPTIMAL_PAIR
        assert classify_regime(2.0) == REGIME_DEGRADED_PAIR

    def test_custom_band(self):
        assert classify_regime(0.8, band=0.25) == REGIME_SINGLE_PHOTON

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            classify_regime(-0.1)


class TestSyntheticVerdicts:
    def test_good_source(self):
        g2, pairs = _synthetic()
        v = evaluate_criterion(g2, pairs, g2_pump_zero=0.3)
        assert v.is_pair_source
        assert v.g2_peak_at_zero and v.pairs_antibunched and v.timescale_ordering_ok
        assert v.regime == REGIME_OPTIMAL_PAIR
        assert v.measured.tau_a == pytest.approx(50.0, rel=0.05)
        assert v.measured.tau_b == pytest.approx(1.18, rel=0.1)  # Gaussian half width

    def test_rescaling_invariance(self):
        g2, pairs = _synthetic()
        scaled = CorrelationSeries(g2.tau, 7.3 * g2.values, g2.kind)
        scaled_p = CorrelationSeries(pairs.tau, 0.02 * pairs.values, pairs.kind)
        v1 = evaluate_criterion(g2, pairs)
        v2 = evaluate_criterion(scaled, scaled_p)
        assert v1.to_dict() == v2.to_dict()

    def test_late_peak_fails(self):
        g2, pairs = _synthetic(peak_shift=30.0)
        v = evaluate_criterion(g2, pairs)
        assert not v.g2_peak_at_zero
        assert not v.is_pair_source

    def test_bunched_pairs_fail(self):
        g2, pairs = _synthetic()
        bunched = CorrelationSeries(pairs.tau, 2.0 - pairs.values, pairs.kind)
        v = evaluate_criterion(g2, bunched)
        assert not v.pairs_antibunched
        assert not v.is_pair_source

    def test_close_timescales_fail(self):
        g2, pairs = _synthetic(tau_a=2.0)
        v = evaluate_criterion(g2, pairs, ratio_threshold=3.0)
        assert not v.timescale_ordering_ok
        assert not v.is_pair_source

    def test_unsettled_pairs_raise(self):
        tau = np.linspace(0.0, 10.0, 200)
        g2 = CorrelationSeries(tau, 1.0 + np.exp(-tau), "g2")
        pairs = CorrelationSeries(tau, 0.1 * tau, "g2_pairs")  # still rising
        with pytest.raises(GridTooShortError):
            evaluate_criterion(g2, pairs)

    def test_too_few_points_raise(self):
        tau = np.linspace(0.0, 1.0, 5)
        s = CorrelationSeries(tau, np.ones(5), "g2")
        with pytest.raises(GridTooShortError):
            evaluate_criterion(s, s)


def _verdict_at(params, tau_max=None):
    basis = box_basis(2, 4)
    liouv = build_liouvillian(params, basis)
    rho = steady_state(liouv)
    obs = steady_observables(params, 2, 4)
    tau = correlation_tau_grid(params, tau_max=tau_max)
    _, g2 = correlator_G2(params, tau, basis=basis, liouv=liouv, rho_ss=rho)
    _, g2p = correlator_G2_pairs(params, tau, basis=basis, liouv=liouv, rho_ss=rho)
    return evaluate_criterion(g2, g2p, g2_pump_zero=obs["g2_p_0"])


class TestMasterEquationVerdicts:
    def test_optimal_point_is_pair_source(self, bench):
        v = _verdict_at(bench)
        assert v.regime == REGIME_OPTIMAL_PAIR
        assert v.is_pair_source
        assert v.measured.tau_a > 100.0 * v.measured.tau_b

    def test_weak_control_drive_fails_peak_location(self):
        # single-photon regime: the two-photon probability peaks at tau > 0
        v = _verdict_at(make_bench(omega_s_drive=1e-3), tau_max=1500.0)
        assert v.regime == REGIME_SINGLE_PHOTON
        assert not v.g2_peak_at_zero
        assert not v.is_pair_source

    def test_strong_dephasing_bunches_pairs(self):
        # keep the control drive at the dephasing-free optimum; gamma_star
        # then destroys the interference and the pairs bunch
        v = _verdict_at(make_bench(omega_s_drive=np.sqrt(4.75), gamma_star=10.0))
        assert not v.pairs_antibunched
        assert not v.is_pair_source

import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezedmech.design import (SWEEP_XI_HEADER, SystemParams, bath_moments,
                                 bogoliubov_frequencies, derive, effective_couplings,
                                 find_operating_point, operating_objective, rwa_ratio,
                                 squeeze_parameter, sweep_r0, sweep_xi, symmetric_detunings_for,
                                 validity_check, write_r0_csv, write_sweep_csv, xi_grid)
from squeezedmech.errors import CriticalCouplingError, InvalidParameterError, NotFoundError

FIG2 = SystemParams(delta1=1000.0, delta2=1000.0, xi=800.0, g=1e-3, kappa=0.02)

# independent closed forms at a = 2.5: e^{4 r0} = 9, cosh 2r0 = 5/3
R0_800 = math.log(9.0) / 4.0
# cosh^2 r0 = 160
R0_160 = 3.2291679132994364


def _xi_for_cosh2(c2, delta_sum=2000.0):
    r = math.acosh(math.sqrt(c2))
    return delta_sum * math.tanh(2 * r) / 2


class TestSqueezeParameter:
    def test_a_2_5(self):
        a, r0 = squeeze_parameter(1000, 1000, 800)
        assert a == 2.5
        assert r0 == pytest.approx(R0_800, rel=1e-14)
        assert math.exp(4 * r0) == pytest.approx(9.0, rel=1e-13)

    def test_small_xi_limit(self):
        _, r0 = squeeze_parameter(1000, 1000, 1e-9)
        assert 0 < r0 < 1e-11

    @pytest.mark.parametrize("xi", [1000.0, 1000.5, 2000.0])
    def test_critical(self, xi):
        with pytest.raises(CriticalCouplingError):
            squeeze_parameter(1000, 1000, xi)

    @pytest.mark.parametrize("xi", [0.0, -1.0])
    def test_nonpositive_xi(self, xi):
        with pytest.raises(InvalidParameterError):
            squeeze_parameter(1000, 1000, xi)

    @given(st.floats(1e-3, 0.999999))
    def test_tanh_relation(self, frac):
        a, r0 = squeeze_parameter(600.0, 400.0, 500.0 * frac)
        assert math.tanh(2 * r0) == pytest.approx(2 / a, rel=1e-9)


class TestMomentsAndCouplings:
    def test_vacuum_bath(self):
        assert bath_moments(0.0) == (0.0, 0.0)

    def test_moments_at_a_2_5(self):
        M, N = bath_moments(R0_800)
        assert N == pytest.approx(1 / 3, rel=1e-13)
        assert M == pytest.approx(2 / 3, rel=1e-13)

    def test_strong_squeezing_gain(self):
        # cosh^2(6.5) evaluated directly, about 50.4 dB
        c2 = math.cosh(6.5) ** 2
        assert c2 == pytest.approx(110603.848, rel=1e-8)
        assert abs(10 * math.log10(c2) - 51.0) < 1.0

    def test_couplings(self):
        assert effective_couplings(0.3, 0.0) == (0.3, 0.0)
        g1, g2 = effective_couplings(1e-3, R0_800)
        assert g1 == pytest.approx(4e-3 / 3, rel=1e-13)
        assert g2 == pytest.approx(1e-3 / 3, rel=1e-12)

    def test_eight_kappa_point(self):
        g1, _ = effective_couplings(1e-3, R0_160)
        assert g1 == pytest.approx(0.16, rel=1e-12)
        assert g1 / FIG2.kappa == pytest.approx(8.0, rel=1e-12)

    @given(st.floats(0, 8), st.floats(0, 1))
    def test_invariants(self, r0, g):
        M, N = bath_moments(r0)
        assert M * M == pytest.approx(N * (N + 1), rel=1e-12, abs=1e-300)
        g1, g2 = effective_couplings(g, r0)
        assert g1 - g2 == pytest.approx(g, rel=1e-12 * max(1.0, math.cosh(r0) ** 2), abs=1e-300)

    def test_negative_inputs(self):
        with pytest.raises(InvalidParameterError):
            bath_moments(-0.1)
        with pytest.raises(InvalidParameterError):
            effective_couplings(-1.0, 0.1)


class TestFrequencies:
    def test_a_2_5(self):
        om1, om2 = bogoliubov_frequencies(1000, 1000, 800, R0_800)
        assert om1 == pytest.approx(600.0, rel=1e-12)
        assert om2 == pytest.approx(600.0, rel=1e-12)

    def test_inconsistent_r0(self):
        with pytest.raises(InvalidParameterError):
            bogoliubov_frequencies(1000, 1000, 800, R0_800 * (1 + 1e-8))

    def test_cosh2_160_point(self):
        d = derive(FIG2.replace(xi=_xi_for_cosh2(160.0)))
        assert d.g1 == pytest.approx(0.16, rel=1e-9)
        assert d.omega1 == pytest.approx(3.13, abs=0.01)
        assert d.omega1 + d.omega2 == pytest.approx(6.27, abs=0.01)

    @settings(max_examples=60)
    @given(st.floats(1.0, 2000.0), st.floats(1.0, 2000.0), st.floats(1e-6, 1 - 1e-9))
    def test_round_trip(self, d1, d2, frac):
        xi = 0.5 * (d1 + d2) * frac
        a, r0 = squeeze_parameter(d1, d2, xi)
        om1, om2 = bogoliubov_frequencies(d1, d2, xi, r0)
        am2 = (d1 + d2 - 2 * xi) / xi
        assert om1 + om2 == pytest.approx(xi * math.sqrt(am2 * (a + 2)), rel=1e-10)
        assert om1 + om2 == pytest.approx((d1 + d2 - 2 * xi) * math.exp(2 * r0), rel=1e-10)
        assert om1 - om2 == pytest.approx(d1 - d2, abs=1e-9 * (d1 + d2))

    @given(st.floats(1e-6, 1 - 1e-9))
    def test_symmetric_equal(self, frac):
        d = derive(FIG2.replace(xi=1000.0 * frac))
        assert d.omega1 == d.omega2
        # symmetric case: Omega cosh 2r0 = delta, Omega sinh 2r0 = xi
        assert d.omega1 * math.cosh(2 * d.r0) == pytest.approx(1000.0, rel=1e-9)
        assert d.omega1 * math.sinh(2 * d.r0) == pytest.approx(1000.0 * frac, rel=1e-9)


class TestProductLaw:
    @settings(max_examples=60)
    @given(st.floats(1e-9, 1e-3))
    def test_exact_product(self, am2):
        xi = 2000.0 / (2.0 + am2)
        d = derive(FIG2.replace(xi=xi))
        a = d.a
        exact = FIG2.g * xi * (a + math.sqrt(am2 * (a + 2))) / 4
        assert d.g1 * d.omega1 == pytest.approx(exact, rel=1e-8)

    @given(st.floats(1e-9, 4e-4))
    def test_two_percent_band(self, am2):
        d = derive(FIG2.replace(xi=2000.0 / (2.0 + am2)))
        target = FIG2.delta_sum * FIG2.g / 4
        assert abs(d.g1 * d.omega1 - target) / target < 0.02

    @pytest.mark.parametrize("am2, dev", [(1e-3, 0.0316), (1e-4, 0.0100), (1e-6, 0.0010)])
    def test_deviation_is_sqrt_am2(self, am2, dev):
        d = derive(FIG2.replace(xi=2000.0 / (2.0 + am2)))
        target = FIG2.delta_sum * FIG2.g / 4
        assert (d.g1 * d.omega1 - target) / target == pytest.approx(dev, rel=0.01)


class TestValidity:
    def test_a_2_5_passes(self):
        d = derive(FIG2)
        rep = validity_check(d, FIG2.g)
        assert rep.rwa_ratio == pytest.approx(1200.0, rel=1e-12)
        assert rep.passed

    def test_cosh2_160_fails(self):
        d = derive(FIG2.replace(xi=_xi_for_cosh2(160.0)))
        rep = validity_check(d, FIG2.g)
        assert rep.rwa_ratio == pytest.approx(6.27, abs=0.01)
        assert not rep.rwa_ok

    def test_bare_detuning_limit(self):
        assert rwa_ratio(40.0, 40.0, 0.5, 0.0, 1.0) == 80.0
        assert rwa_ratio(40.0, 40.0, 4.0, 1.0, 1.0) == 20.0


class TestSymmetricDesign:
    @given(st.floats(0.01, 3.0), st.floats(0.1, 50.0))
    def test_inverse(self, r0, omega):
        delta, xi = symmetric_detunings_for(r0, omega)
        d = derive(SystemParams(delta, delta, xi, 0.1, 1.0))
        assert d.r0 == pytest.approx(r0, rel=1e-9)
        assert d.omega1 == pytest.approx(omega, rel=1e-9)

    def test_bad_input(self):
        with pytest.raises(InvalidParameterError):
            symmetric_detunings_for(0.0, 1.0)


class TestSweeps:
    def test_row_at_800(self):
        (row,) = sweep_xi(FIG2, [800.0])
        assert row.derived.g1 == pytest.approx(4e-3 / 3, rel=1e-12)
        assert row.derived.omega1 == pytest.approx(600.0, rel=1e-12)
        assert row.valid

    def test_small_xi_row(self):
        (row,) = sweep_xi(FIG2, [1e-6])
        assert row.derived.g1 == pytest.approx(FIG2.g, rel=1e-6)
        assert row.derived.omega1 == pytest.approx(1000.0, rel=1e-6)

    def test_error_rows_beyond_critical(self):
        rows = sweep_xi(FIG2, [900.0, 1000.0, 1100.0])
        assert rows[0].error is None
        assert rows[1].error and rows[2].error
        assert not rows[1].valid

    def test_monotone(self):
        rows = sweep_xi(FIG2, xi_grid(FIG2.delta_sum, 300))
        g1 = np.array([r.derived.g1 for r in rows])
        r0 = np.array([r.derived.r0 for r in rows])
        assert np.all(np.diff(g1) > 0) and np.all(np.diff(r0) > 0)

    def test_balanced_row_exists(self):
        rows = sweep_xi(FIG2, xi_grid(FIG2.delta_sum, 2000, min_gap=1e-12))
        assert any(r.derived.g1 >= 5 * FIG2.kappa * 0.99 and r.derived.omega1 >= 5 * 0.99 for r in rows)

    def test_grid_beyond_critical(self):
        grid = xi_grid(2000.0, 10, xi_max=1100.0)
        assert grid.max() == 1100.0
        assert np.sum(grid >= 1000.0) == 5

    def test_grid_empty(self):
        with pytest.raises(InvalidParameterError):
            xi_grid(2000.0, 0)

    def test_r0_sweep(self):
        rows = sweep_r0(1e-3, [0.0, 1.0, 6.5])
        assert rows[0][1] == 1e-3
        assert rows[2][1] == pytest.approx(110.603848, rel=1e-8)
        assert rows[1][1] < rows[2][1]

    def test_r0_asymptotic_scaling(self):
        (_, a), (_, b) = sweep_r0(1.0, [5.0, 6.0])
        assert b / a == pytest.approx(math.exp(2.0), rel=1e-4)

    def test_csv(self, tmp_path):
        rows = sweep_xi(FIG2, [800.0, 1100.0])
        path = tmp_path / "xi.csv"
        write_sweep_csv(rows, path)
        lines = list(csv.reader(path.open()))
        assert tuple(lines[0]) == SWEEP_XI_HEADER
        assert lines[1][7] == "600" and lines[1][-1] == "1"
        assert lines[1][5] == "0.00133333333"
        assert lines[2][2:10] == [""] * 8 and lines[2][-1] == "0"
        write_r0_csv(sweep_r0(1e-3, [0.0]), tmp_path / "r0.csv")
        assert (tmp_path / "r0.csv").read_text().splitlines() == ["r0,G1", "0,0.001"]


class TestOperatingPoint:
    def test_fig2_balanced(self):
        xi, d = find_operating_point(FIG2)
        # frozen from a dense independent scan of the closed forms
        assert xi == pytest.approx(999.98744, abs=2e-5)
        assert d.g1 / FIG2.kappa == pytest.approx(5.0125, abs=1e-3)
        assert d.omega1 == pytest.approx(5.0125, abs=1e-3)
        assert d.g1 / FIG2.kappa >= 5 and d.omega1 >= 5

    def test_dense_scan_agrees(self):
        xi, d = find_operating_point(FIG2)
        gaps = np.geomspace(1e-6, 10.0, 20001)
        vals = [operating_objective(FIG2, 1000.0 - x) for x in gaps]
        assert max(vals) <= operating_objective(FIG2, xi) * (1 + 1e-6)

    def test_weight_moves_toward_critical(self):
        xs = [find_operating_point(FIG2, weight=w)[0] for w in (0.25, 1.0, 4.0)]
        assert xs[0] < xs[1] < xs[2]

    def test_zero_coupling(self):
        with pytest.raises(NotFoundError):
            find_operating_point(FIG2.replace(g=0.0))

    def test_bad_weight(self):
        with pytest.raises(InvalidParameterError):
            find_operating_point(FIG2, weight=0.0)


class TestSystemParams:
    @pytest.mark.parametrize("kw", [dict(kappa=0.0), dict(gamma_m=-1.0), dict(n_th=-0.1),
                                    dict(g=-1e-3), dict(delta1=-1000.0, delta2=500.0)])
    def test_validation(self, kw):
        with pytest.raises(InvalidParameterError):
            FIG2.replace(**kw)

    def test_omega_d_is_metadata(self):
        assert derive(FIG2.replace(omega_d=12345.0)) == derive(FIG2)

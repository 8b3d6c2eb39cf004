import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from usc_laser import (Gauge, InvalidParameter, ReducedUnknowns, SystemParams,
                       derived_rates, multistart_solve, reconstruct_state,
                       structure_coefficients, validate_params)
from usc_laser.model import Branch


rates = st.floats(0.001, 1.0)


def test_reference_params_accepted(base):
    assert validate_params(base) == base


@pytest.mark.parametrize("field,value", [
    ("z_pump", 0.7), ("z_pump", -0.51), ("wc", 0.0), ("wa", -1.0), ("kappa", -0.1),
    ("gamma_down", 0.0), ("gamma_phi", -1e-3), ("wc", math.nan), ("g_tilde", math.inf),
])
def test_invalid_parameter_names_field(base, field, value):
    with pytest.raises(InvalidParameter) as err:
        validate_params(base.replace(**{field: value}))
    assert err.value.field == field


def test_normalizes_to_unit_atomic_frequency(base):
    raw = SystemParams(wa=2, wc=2, g_tilde=0.15, kappa=0.02, gamma_down=0.1,
                       gamma_phi=0.2, z_pump=0.5)
    got = validate_params(raw)
    for name in ("wa", "wc", "g_tilde", "kappa", "gamma_down", "gamma_phi", "z_pump"):
        assert getattr(got, name) == pytest.approx(getattr(base, name), rel=1e-15)


def test_derived_rates_examples():
    r = derived_rates(SystemParams(gamma_down=0.05, gamma_phi=0.1))
    assert (r.gamma_x, r.gamma_y, r.gamma_z) == (0.1, 0.05 + 0.1, 0.05)
    r = derived_rates(SystemParams(gamma_down=0.05, gamma_phi=0.0))
    assert (r.gamma_x, r.gamma_y, r.gamma_z) == (0.0, 0.05, 0.05)
    a = derived_rates(SystemParams(gamma_down=0.15, gamma_phi=0.0))
    b = derived_rates(SystemParams(gamma_down=0.05, gamma_phi=0.1))
    assert a.gamma_y == pytest.approx(b.gamma_y) and a.gamma_x != b.gamma_x


@given(rates, st.floats(0.0, 1.0), st.floats(0.1, 3.0))
def test_derived_rates_linear(gd, gp, s):
    r = derived_rates(SystemParams(gamma_down=gd, gamma_phi=gp))
    rs = derived_rates(SystemParams(gamma_down=s * gd, gamma_phi=s * gp))
    assert (r.gamma_x, r.gamma_y, r.gamma_z) == (gp, gd + gp, gd)
    assert rs.gamma_y == pytest.approx(s * r.gamma_y, rel=1e-14)


def test_bare_cavity_resonance():
    c = structure_coefficients(SystemParams(g_tilde=0.0, kappa=0.0), Gauge.COULOMB, 1.0)
    assert c.delta_c1 == 0


def test_gauge_difference_in_cavity_detuning(base):
    cc = structure_coefficients(base, Gauge.COULOMB, 1.0)
    cd = structure_coefficients(base, Gauge.DIPOLE, 1.0)
    assert cc.delta_c1 - cd.delta_c1 == pytest.approx(4 * base.g ** 2 * base.wc * base.wa)
    assert cc.delta_a1 == cd.delta_a1


def test_threshold_product_by_independent_scan(base):
    # bracket Im(Dc1 Da1) = 0 near 1.043 on a scan, refine with brentq
    f = lambda w: (structure_coefficients(base, "coulomb", w).delta_c1
                   * structure_coefficients(base, "coulomb", w).delta_a1).imag
    ws = np.linspace(0.9, 1.2, 301)
    vals = [f(w) for w in ws]
    k = next(i for i in range(300) if vals[i] * vals[i + 1] < 0)
    w = brentq(f, ws[k], ws[k + 1], xtol=1e-15)
    c = structure_coefficients(base, "coulomb", w)
    prod = c.delta_c1 * c.delta_a1
    assert w == pytest.approx(1.043, abs=5e-4)
    assert prod.real == pytest.approx(-0.00281, rel=5e-3)
    assert abs(prod.imag) < 1e-15


@pytest.mark.parametrize("gauge", list(Gauge))
def test_coefficients_continuous_in_omega(base, gauge):
    w, h = 0.9, 1e-8
    a = structure_coefficients(base, gauge, w)
    b = structure_coefficients(base, gauge, w + h)
    c = structure_coefficients(base, gauge, w + 2 * h)
    for name in ("delta_c1", "delta_a3", "c_11_1", "c_33_1", "c_m1m1_3", "c_11_3",
                 "c_33_3", "c_111"):
        d1 = (getattr(b, name) - getattr(a, name)) / h
        d2 = (getattr(c, name) - getattr(b, name)) / h
        assert abs(d1 - d2) <= 1e-6 * max(abs(d1), 1.0), name


def test_amp_zero_reconstructs_trivial(base):
    s = reconstruct_state(ReducedUnknowns(1.0, 0.0, 0j), base.with_pump(0.2), "coulomb")
    assert s.branch is Branch.TRIVIAL and s.z0 == 0.2 and s.residual_norm == 0
    assert all(v == 0 for k, v in s.components().items() if k != "z0")


def test_gauge_specific_field_relations(base):
    p = base.with_pump(0.3)
    for s in multistart_solve(p, "coulomb")[:-1]:
        assert s.b1 == pytest.approx(1j * s.omega / p.wc * s.a1, rel=1e-15)
        assert s.b3 == pytest.approx(3j * s.omega / p.wc * s.a3, rel=1e-15, abs=1e-300)
        assert abs(s.b1 / s.a1) - 1 == pytest.approx((s.omega - p.wc) / p.wc, abs=1e-15)
    for s in multistart_solve(p, "dipole")[:-1]:
        assert s.b1 == pytest.approx(-(p.wc - 1j * p.kappa) * s.a1 / (1j * s.omega), rel=1e-14)
        assert s.b3 == pytest.approx(-(p.wc - 1j * p.kappa) * s.a3 / (3j * s.omega),
                                     rel=1e-14, abs=1e-300)


@pytest.mark.parametrize("s", [0.5, 2.0, 10.0])
@pytest.mark.parametrize("gauge", list(Gauge))
def test_unit_scaling_covariance(base, s, gauge):
    p = base.replace(wc=0.8, z_pump=0.2)
    ref = multistart_solve(p, gauge)[0]
    scaled = multistart_solve(p.scaled(s), gauge)[0]
    assert scaled.omega == pytest.approx(s * ref.omega, rel=1e-9)
    assert scaled.amp == pytest.approx(ref.amp, rel=1e-9)
    assert scaled.eta == pytest.approx(ref.eta, rel=1e-8, abs=1e-12)
    assert scaled.z0 == pytest.approx(ref.z0, rel=1e-9)
    assert abs(scaled.z2) == pytest.approx(abs(ref.z2), rel=1e-8)
    norm = validate_params(p.scaled(s))
    assert norm.wc == pytest.approx(p.wc) and norm.kappa == pytest.approx(p.kappa)


def test_gauge_parse_aliases():
    assert Gauge.parse("Coulomb") is Gauge.COULOMB
    assert Gauge.parse("electric-dipole") is Gauge.DIPOLE
    with pytest.raises(ValueError):
        Gauge.parse("weyl")

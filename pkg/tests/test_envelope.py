import warnings

import numpy as np
import pytest

from usc_laser import FrameMismatch, Gauge, NumericalBlowup, SteadyState, linearized_threshold
from usc_laser.envelope import (COMPONENTS, EnvelopeState, Flow, RelaxConfig, Stability,
                                default_dt, envelope_rhs, fixed_point_residual, integrate,
                                reconstruct_waveforms, relax_to_steady, stability_probe)
from usc_laser.model import Branch


@pytest.mark.parametrize("gauge", list(Gauge))
def test_trivial_state_is_exact_fixed_point(base, gauge):
    s = EnvelopeState.perturbed_trivial(0.3, 1.1, amplitude=0.0)
    assert np.all(envelope_rhs(s, base.with_pump(0.3), gauge).components == 0)


@pytest.mark.parametrize("gauge", list(Gauge))
def test_roots_are_fixed_points(onset_root, gauge):
    from usc_laser import multistart_solve
    p, _ = onset_root
    for s in multistart_solve(p, gauge):
        assert fixed_point_residual(s, p) < 1e-9


@pytest.mark.parametrize("gauge", list(Gauge))
def test_fields_decouple_without_coupling(base, gauge):
    p = base.replace(g_tilde=0.0)
    rng = np.random.default_rng(0)
    c = rng.normal(size=10) + 1j * rng.normal(size=10)
    c[8] = c[8].real
    d0 = envelope_rhs(EnvelopeState(c, 1.0), p, gauge).components
    c2 = c.copy()
    c2[4:] = rng.normal(size=6)  # change atoms only
    d2 = envelope_rhs(EnvelopeState(c2, 1.0), p, gauge).components
    assert np.array_equal(d0[:4], d2[:4])


def test_state_validation(base):
    with pytest.raises(ValueError):
        EnvelopeState(np.zeros(9), 1.0)
    s = EnvelopeState.perturbed_trivial(0.1, 1.0)
    assert s["a1"] == 1e-3 and s.z0 == 0.1 and s["z0"] == 0.1
    with pytest.raises(ValueError):
        integrate(EnvelopeState(s.components, 0.0), base, "coulomb")


def test_default_step_respects_bound(base):
    dt = default_dt(base, 1.04)
    assert dt <= 0.05 / (3 * 1.04) + 1e-15


@pytest.mark.parametrize("flow", list(Flow))
def test_rk4_order(onset_root, flow):
    p, r = onset_root
    s0 = EnvelopeState(EnvelopeState.from_steady_state(r).components * 1.05, r.omega)
    ends = [integrate(s0, p, "coulomb", dt=dt, t_end=20.0, flow=flow).final.components
            for dt in (0.2, 0.1, 0.05, 0.0125)]
    err = [np.max(np.abs(e - ends[-1])) for e in ends[:-1]]
    orders = np.log2(np.array(err[:-1]) / np.array(err[1:]))
    assert np.all((3.7 <= orders) & (orders <= 4.3)), orders


def test_step_halving_changes_little(onset_root):
    p, r = onset_root
    s0 = EnvelopeState(EnvelopeState.from_steady_state(r).components * 1.05, r.omega)
    a = integrate(s0, p, "coulomb", t_end=200.0).final.components
    b = integrate(s0, p, "coulomb", dt=default_dt(p, r.omega) / 2, t_end=200.0).final.components
    assert np.max(np.abs(a - b)) < 1e-6 * np.max(np.abs(b))


def test_integration_bit_identical(onset_root):
    p, r = onset_root
    s0 = EnvelopeState.perturbed_trivial(p.z_pump, r.omega)
    a = integrate(s0, p, "coulomb", t_end=50.0)
    b = integrate(s0, p, "coulomb", t_end=50.0)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)
    assert np.all(np.diff(a.times) > 0)


def test_trajectory_sampling(onset_root):
    p, r = onset_root
    s0 = EnvelopeState.perturbed_trivial(p.z_pump, r.omega)
    traj = integrate(s0, p, "coulomb", dt=0.01, t_end=1.005, stride=10)
    assert traj.times[-1] == pytest.approx(1.01)
    assert len(traj) == 12 and traj.extra["flow"] == "slow"


def test_below_threshold_decays(base):
    p = base.with_pump(0.01)
    s0 = EnvelopeState.perturbed_trivial(0.01, 1.04)
    traj = integrate(s0, p, "coulomb", t_end=3000.0)
    norm = np.max(np.abs(traj.states[:, :8]), axis=1)
    # monotone envelope decay after the initial transient
    late = norm[len(norm) // 10:]
    peaks = [late[k:k + 50].max() for k in range(0, len(late) - 50, 50)]
    assert all(b < a for a, b in zip(peaks, peaks[1:]))
    assert norm[-1] < 1e-2 * norm[0]


@pytest.mark.parametrize("gauge", list(Gauge))
def test_relaxes_to_newton_root(base, gauge):
    from usc_laser import multistart_solve
    p = base.with_pump(0.05)
    root = multistart_solve(p, gauge)[0]
    frame = linearized_threshold(p, gauge)[1]
    got = relax_to_steady(EnvelopeState.perturbed_trivial(0.05, frame), p, gauge)
    assert got.is_lasing
    assert got.amp == pytest.approx(root.amp, rel=1e-4)
    assert got.omega == pytest.approx(root.omega, rel=1e-8)
    assert got.residual_norm < 1e-9


def test_below_threshold_relaxes_to_trivial(base):
    p = base.with_pump(0.01)
    got = relax_to_steady(EnvelopeState.perturbed_trivial(0.01, 1.04), p, "coulomb")
    assert got.branch is Branch.TRIVIAL and got.z0 == 0.01


def test_wrong_frame_is_rejected(onset_root):
    p, r = onset_root
    with pytest.raises(FrameMismatch) as err:
        relax_to_steady(EnvelopeState.perturbed_trivial(0.05, 1.1 * r.omega), p, "coulomb")
    # the suggested frequency is a usable restart point
    assert err.value.omega_estimate == pytest.approx(r.omega, rel=5e-3)


def test_frame_tracking_recovers_root(onset_root):
    p, r = onset_root
    got = relax_to_steady(EnvelopeState.perturbed_trivial(0.05, 1.1 * r.omega), p, "coulomb",
                          RelaxConfig(track_frame=True))
    assert got.omega == pytest.approx(r.omega, rel=1e-8)


def test_literal_flow_is_unstable(onset_root):
    # redundant fast solutions grow under the literal component equations
    p, r = onset_root
    s0 = EnvelopeState.from_steady_state(r)
    c = np.array(s0.components)
    c[2] += 1e-6
    with pytest.raises(NumericalBlowup):
        integrate(EnvelopeState(c, r.omega), p, "coulomb", t_end=8000.0, flow=Flow.LITERAL)


def test_stability_labels(base, bistable_roots):
    p, roots = bistable_roots
    lasing = sorted((s for s in roots if s.is_lasing), key=lambda s: s.amp)
    assert len(lasing) == 3
    lower, middle, upper = lasing
    assert stability_probe(upper, p, "coulomb") is Stability.STABLE
    assert stability_probe(lower, p, "coulomb") is Stability.STABLE
    assert stability_probe(middle, p, "coulomb") is Stability.UNSTABLE
    trivial = roots[-1]
    assert stability_probe(trivial, p, "coulomb", omega_frame=0.4) is Stability.UNSTABLE
    below = base.with_pump(0.01)
    assert stability_probe(SteadyState.trivial(0.01, "coulomb"), below, "coulomb",
                           omega_frame=1.04) is Stability.STABLE


def test_blowup_detected(base):
    s = EnvelopeState(np.full(10, 1e5, dtype=complex), 1.0)
    with pytest.raises(NumericalBlowup):
        integrate(s, base, "coulomb", t_end=100.0, flow=Flow.LITERAL)


def test_population_diagnostic_warns(base):
    c = np.zeros(10, dtype=complex)
    c[8] = 0.6
    with pytest.warns(RuntimeWarning):
        integrate(EnvelopeState(c, 1.0), base, "coulomb", t_end=1.0)


def _spectrum(x, n_periods):
    f = np.fft.rfft(x) / len(x)
    return np.abs(f[::n_periods])  # bins at integer multiples of Omega


@pytest.mark.parametrize("gauge,wc,z", [("coulomb", 0.25, 0.3), ("coulomb", 1.0, 0.3),
                                        ("dipole", 1.0, 0.3), ("dipole", 0.5, 0.48)])
def test_waveform_parity(base, gauge, wc, z):
    from usc_laser import multistart_solve
    p = base.replace(wc=wc, z_pump=z)
    s = multistart_solve(p, gauge)[0]
    assert s.is_lasing
    n_periods, per = 8, 64
    t = np.arange(n_periods * per) * (2 * np.pi / s.omega) / per
    w = reconstruct_waveforms(s, t)
    for name in "ABXY":
        spec = _spectrum(w[name], n_periods)
        top = spec.max()
        assert np.all(spec[0::2] < 1e-10 * top), name
        assert np.all(spec[5:] < 1e-10 * top), name
    spec = _spectrum(w["Z"], n_periods)
    assert np.all(spec[1::2] < 1e-10 * spec.max())


def test_fft_harmonic_ratio(bistable_roots):
    p, roots = bistable_roots
    s = roots[0]
    n_periods, per = 4, 32
    t = np.arange(n_periods * per) * (2 * np.pi / s.omega) / per
    spec = _spectrum(reconstruct_waveforms(s, t)["A"], n_periods)
    assert spec[3] / spec[1] == pytest.approx(abs(s.a3 / s.a1), rel=1e-10)


def test_waveform_periodicity_and_trivial(onset_root):
    p, s = onset_root
    t = np.linspace(0, 30, 301)
    T = 2 * np.pi / s.omega
    a, b = reconstruct_waveforms(s, t), reconstruct_waveforms(s, t + T)
    assert np.max(np.abs(a["A"] - b["A"])) < 1e-12
    c = reconstruct_waveforms(s, t + T / 2)
    assert np.max(np.abs(a["Z"] - c["Z"])) < 1e-12
    w = reconstruct_waveforms(SteadyState.trivial(0.2, "coulomb"), t)
    assert all(np.all(w[k] == 0) for k in "ABXY") and np.all(w["Z"] == 0.2)


def test_component_order():
    assert COMPONENTS == ("a1", "a3", "b1", "b3", "x1", "x3", "y1", "y3", "z0", "z2")

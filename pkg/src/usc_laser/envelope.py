"""Dynamics of the frequency components in a frame rotating at a fixed Omega.

The ten components are packed as a complex vector in the order
``a1, a3, b1, b3, x1, x3, y1, y3, Z0, z2`` (Z0 is carried with zero imaginary
part).  Fixed points of these equations are exactly the harmonic-balance
steady states, so :func:`fixed_point_residual` is an independent check of any
root produced by :mod:`usc_laser.harmonic_balance`.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import FrameMismatch, NoRelaxation, NumericalBlowup
from .model import Branch, Gauge, SteadyState, derived_rates

COMPONENTS = ("a1", "a3", "b1", "b3", "x1", "x3", "y1", "y3", "z0", "z2")
# harmonic order of each packed component, used to undo frame rotation
HARMONIC = np.array([1, 3, 1, 3, 1, 3, 1, 3, 0, 2], dtype=np.float64)
BLOWUP_LIMIT = 1e6


class Stability(str, enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class EnvelopeState:
    components: np.ndarray
    omega_frame: float
    time: float = 0.0

    def __post_init__(self):
        c = np.array(self.components, dtype=np.complex128)
        if c.shape != (10,):
            raise ValueError("expected 10 packed components")
        c.setflags(write=False)
        object.__setattr__(self, "components", c)

    def __getitem__(self, name):
        value = self.components[COMPONENTS.index(name)]
        return value.real if name == "z0" else value

    @property
    def z0(self):
        return float(self.components[8].real)

    @classmethod
    def from_steady_state(cls, state, omega_frame=None, time=0.0):
        c = [state.a1, state.a3, state.b1, state.b3, state.x1, state.x3,
             state.y1, state.y3, state.z0, state.z2]
        frame = state.omega if omega_frame is None else omega_frame
        return cls(np.array(c, dtype=np.complex128), float(frame), time)

    @classmethod
    def perturbed_trivial(cls, z_pump, omega_frame, amplitude=1e-3):
        """Trivial state with a small seed in the fundamental field."""
        c = np.zeros(10, dtype=np.complex128)
        c[0] = amplitude
        c[8] = z_pump
        return cls(c, float(omega_frame))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    params: object
    gauge: Gauge
    omega_frame: float
    dt: float
    stride: int
    extra: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return EnvelopeState(self.states[-1], self.omega_frame, float(self.times[-1]))

    def component(self, name):
        return self.states[:, COMPONENTS.index(name)]


class Flow(str, enum.Enum):
    """Which vector field the integrator follows.

    ``LITERAL`` integrates the component equations ``dx/dt = F(x)`` as
    written.  Besides the physical slow dynamics they carry redundant fast
    solutions (negative-frequency content in a slot, or a free cavity
    oscillation parked in the third-harmonic slot) at frame frequencies near
    2 Omega and 4 Omega, and the atomic inversion amplifies those just like
    the physical mode, so in practice no lasing fixed point attracts.
    ``SLOW`` integrates ``(I - mu J) dx/dt = F(x)`` with ``J = dF/dx``.  The
    fixed points are identical, a real eigenvalue keeps its sign (saddles
    stay saddles, the phase mode stays neutral), while a mode with
    eigenvalue ``lam`` gets real part of the sign of
    ``Re(lam) - mu |lam|^2``, which damps the fast redundant solutions.
    """

    LITERAL = "literal"
    SLOW = "slow"


SLOW_SCALE = 0.1


def _pack_params(p, gauge, omega, flow=Flow.LITERAL, slow_scale=SLOW_SCALE):
    r = derived_rates(p)
    mu = slow_scale / omega ** 2 if Flow(flow) is Flow.SLOW else 0.0
    return np.array([p.wa, p.wc, p.g, p.kappa, r.gamma_x, r.gamma_y,
                     r.gamma_z, p.z_pump, omega,
                     1.0 if Gauge.parse(gauge) is Gauge.DIPOLE else 0.0, mu])


@njit(cache=True)
def _rhs(s, q):
    wa, wc, g, kappa, gx, gy, gz, zinf, om = (
        q[0], q[1], q[2], q[3], q[4], q[5], q[6], q[7], q[8])
    dipole = q[9] != 0.0
    a1, a3, b1, b3, x1, x3, y1, y3, z0c, z2 = (
        s[0], s[1], s[2], s[3], s[4], s[5], s[6], s[7], s[8], s[9])
    z0 = z0c.real
    i1 = 1j * om
    i3 = 3j * om
    d = np.empty(10, dtype=np.complex128)
    if not dipole:
        gk = wc + 4.0 * g * g * wa - 1j * kappa
        d[0] = i1 * a1 - wc * b1
        d[1] = i3 * a3 - wc * b3
        d[2] = gk * a1 + i1 * b1 + 4.0 * g * wa * y1
        d[3] = gk * a3 + i3 * b3 + 4.0 * g * wa * y3
        d[4] = (i1 - gx) * x1 - wa * y1 + 2.0 * g * wa * (
            z0 * a1 + np.conj(z2) * a3 + np.conj(a1) * z2)
        d[5] = (i3 - gx) * x3 - wa * y3 + 2.0 * g * wa * (z0 * a3 + a1 * z2)
        d[6] = wa * x1 + (i1 - gy) * y1
        d[7] = wa * x3 + (i3 - gy) * y3
        d[8] = -gz * (z0 - zinf) - 2.0 * g * wa * 2.0 * (
            np.conj(a1) * x1 + np.conj(a3) * x3).real
        d[9] = (2.0 * i1 - gz) * z2 - 2.0 * g * wa * (
            np.conj(a1) * x3 + a1 * x1 + np.conj(x1) * a3)
    else:
        gxx = 8.0 * g * g * wc
        gb = 2.0 * g * wc
        d[0] = i1 * a1 - wc * b1 + 4.0 * g * wc * x1
        d[1] = i3 * a3 - wc * b3 + 4.0 * g * wc * x3
        d[2] = (wc - 1j * kappa) * a1 + i1 * b1
        d[3] = (wc - 1j * kappa) * a3 + i3 * b3
        d[4] = (i1 - gx) * x1 - wa * y1
        d[5] = (i3 - gx) * x3 - wa * y3
        d[6] = (wa * x1 + (i1 - gy) * y1
                - gxx * (z0 * x1 + np.conj(z2) * x3 + np.conj(x1) * z2)
                + gb * (z0 * b1 + np.conj(z2) * b3 + np.conj(b1) * z2))
        d[7] = (wa * x3 + (i3 - gy) * y3
                - gxx * (z0 * x3 + x1 * z2)
                + gb * (z0 * b3 + b1 * z2))
        d[8] = (-gz * (z0 - zinf)
                + gxx * 2.0 * (np.conj(x1) * y1 + np.conj(x3) * y3).real
                - gb * 2.0 * (np.conj(b1) * y1 + np.conj(b3) * y3).real)
        d[9] = ((2.0 * i1 - gz) * z2
                + gxx * (np.conj(x1) * y3 + x1 * y1 + np.conj(y1) * x3)
                - gb * (np.conj(b1) * y3 + b1 * y1 + np.conj(y1) * b3))
    d[8] = d[8].real + 0j
    return d


@njit(cache=True)
def _to_real(s):
    # Im Z0 is not a degree of freedom
    v = np.empty(19)
    j = 10
    for k in range(10):
        v[k] = s[k].real
        if k != 8:
            v[j] = s[k].imag
            j += 1
    return v


@njit(cache=True)
def _to_complex(v):
    s = np.empty(10, dtype=np.complex128)
    j = 10
    for k in range(10):
        if k == 8:
            s[k] = v[k] + 0j
        else:
            s[k] = v[k] + 1j * v[j]
            j += 1
    return s


@njit(cache=True)
def _flow(s, q):
    f = _rhs(s, q)
    mu = q[10]
    if mu == 0.0:
        return f
    fr = _to_real(f)
    x = _to_real(s)
    m = np.eye(19)
    h = 1e-7
    for k in range(19):
        xp = x.copy()
        xp[k] += h
        fk = _to_real(_rhs(_to_complex(xp), q))
        for i in range(19):
            m[i, k] -= mu * (fk[i] - fr[i]) / h
    return _to_complex(np.linalg.solve(m, fr))


@njit(cache=True)
def _rk4(s0, q, dt, n_steps, stride, limit):
    n_out = n_steps // stride + 1
    out = np.empty((n_out, 10), dtype=np.complex128)
    s = s0.copy()
    out[0] = s
    k = 1
    for step in range(1, n_steps + 1):
        k1 = _flow(s, q)
        k2 = _flow(s + 0.5 * dt * k1, q)
        k3 = _flow(s + 0.5 * dt * k2, q)
        k4 = _flow(s + dt * k3, q)
        s = s + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if np.max(np.abs(s)) > limit or not np.all(np.isfinite(s)):
            return out[:k], step, s
        if step % stride == 0:
            out[k] = s
            k += 1
    return out[:k], n_steps, s


def envelope_rhs(s, p, gauge):
    """Time derivative of every packed component (same frame, same time)."""
    d = _rhs(np.asarray(s.components, dtype=np.complex128),
             _pack_params(p, gauge, s.omega_frame))
    return EnvelopeState(d, s.omega_frame, s.time)


def fixed_point_residual(state, p):
    """Largest |d/dt| over the ten components, evaluated at a steady state.

    Direct substitution into the component equations; zero (to rounding)
    exactly when ``state`` is a harmonic-balance root.
    """
    frame = state.omega if state.is_lasing else 1.0
    s = EnvelopeState.from_steady_state(state, omega_frame=frame)
    return float(np.max(np.abs(envelope_rhs(s, p, state.gauge).components)))


def default_dt(p, omega_frame):
    r = derived_rates(p)
    fastest = max(3.0 * abs(omega_frame), p.wa, p.wc + 4.0 * p.g ** 2 * p.wa,
                  p.kappa, r.gamma_y, r.gamma_z)
    return 0.05 / fastest


def integrate(s0, p, gauge, dt=None, t_end=100.0, stride=None,
              flow=Flow.SLOW, slow_scale=SLOW_SCALE):
    """Classical fixed-step RK4 from ``s0.time`` to ``s0.time + t_end``.

    Samples are kept every ``stride`` steps (about 1000 samples by default)
    and the final state is always included.  ``flow`` selects the literal
    component equations or the regularized slow flow (see :class:`Flow`);
    both share every fixed point.
    """
    gauge = Gauge.parse(gauge)
    if s0.omega_frame <= 0:
        raise ValueError("omega_frame must be positive")
    if dt is None:
        dt = default_dt(p, s0.omega_frame)
    if dt <= 0 or t_end <= 0:
        raise ValueError("dt and t_end must be positive")
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    if stride is None:
        stride = max(1, n_steps // 1000)
    q = _pack_params(p, gauge, s0.omega_frame, flow, slow_scale)
    states, done, last = _rk4(np.asarray(s0.components, dtype=np.complex128),
                              q, float(dt), n_steps, int(stride), BLOWUP_LIMIT)
    if done < n_steps or not np.all(np.isfinite(last)) or np.max(np.abs(last)) > BLOWUP_LIMIT:
        raise NumericalBlowup(
            f"component magnitude exceeded {BLOWUP_LIMIT:g} at t={s0.time + done * dt:.6g}")
    times = s0.time + dt * stride * np.arange(len(states))
    if n_steps % stride:
        states = np.vstack([states, last])
        times = np.append(times, s0.time + n_steps * dt)
    z0 = states[:, 8].real
    if np.any(np.abs(z0) > 0.5 + 1e-6):
        warnings.warn("|Z0| exceeded 1/2 along the trajectory", RuntimeWarning,
                      stacklevel=2)
    return Trajectory(times=times, states=states, params=p, gauge=gauge,
                      omega_frame=float(s0.omega_frame), dt=float(dt),
                      stride=int(stride), extra={"flow": Flow(flow).value,
                                                     "slow_scale": float(slow_scale)})


def _rephase(c):
    """Rotate so that a1 is real and non-negative (theta = 0 convention)."""
    if abs(c[0]) == 0:
        return c.copy()
    phase = c[0] / abs(c[0])
    return c * np.conj(phase) ** HARMONIC


def _to_steady_state(c, omega, p, gauge, residual):
    c = _rephase(c)
    return SteadyState(omega=float(omega), a1=complex(c[0]), a3=complex(c[1]),
                       b1=complex(c[2]), b3=complex(c[3]), x1=complex(c[4]),
                       x3=complex(c[5]), y1=complex(c[6]), y3=complex(c[7]),
                       z0=float(c[8].real), z2=complex(c[9]), gauge=gauge,
                       residual_norm=float(residual), branch=Branch.LASING)


@dataclass(frozen=True)
class RelaxConfig:
    dt: float | None = None
    chunk: float = 250.0
    t_max: float = 4e4
    rhs_tol: float = 1e-10
    oracle_tol: float = 1e-9
    amp_floor: float = 1e-8
    track_frame: bool = False
    frame_tol: float = 1e-2
    flow: Flow = Flow.SLOW


def relax_to_steady(s0, p, gauge, cfg=RelaxConfig()):
    """Integrate until the components stop moving and package the result.

    A state whose moduli have settled while the phases still rotate at
    ``nu`` means the frame frequency is not the oscillation frequency.  A
    drift below ``cfg.frame_tol`` (relative) is absorbed by shifting the
    frame and integrating on; a larger one raises :class:`FrameMismatch`
    unless ``cfg.track_frame`` is set.
    """
    gauge = Gauge.parse(gauge)
    s = s0
    t_spent = 0.0
    while t_spent < cfg.t_max:
        traj = integrate(s, p, gauge, dt=cfg.dt, t_end=cfg.chunk, flow=cfg.flow)
        t_spent += cfg.chunk
        s = traj.final
        c = np.asarray(s.components)
        d = envelope_rhs(s, p, gauge).components
        scale = max(1.0, float(np.max(np.abs(c))))
        if abs(c[0]) < cfg.amp_floor and abs(c[1]) < cfg.amp_floor:
            if np.max(np.abs(d)) < cfg.rhs_tol * scale or np.max(np.abs(c[:8])) < cfg.amp_floor:
                return SteadyState.trivial(p.z_pump, gauge)
            continue
        # field equations are homogeneous, so a decaying state has
        # |d| ~ rate * |c|; judge them relative to the field size
        field_scale = float(np.max(np.abs(c[:8])))
        if np.max(np.abs(d[:8])) < cfg.rhs_tol * min(1.0, field_scale) \
                and np.max(np.abs(d[8:])) < cfg.rhs_tol * scale:
            return _to_steady_state(c, s.omega_frame, p, gauge, np.max(np.abs(d)))
        # uniform rotation a_n ~ exp(i n nu t) makes the velocity i n nu c
        v = _flow(c, _pack_params(p, gauge, s.omega_frame, cfg.flow))
        nu = (v[0] / c[0]).imag
        corrected = v - 1j * nu * HARMONIC * c
        if np.max(np.abs(corrected)) < 1e-3 * max(abs(nu), cfg.rhs_tol) * scale \
                and abs(nu) > cfg.rhs_tol:
            estimate = s.omega_frame - nu
            if not cfg.track_frame and abs(nu) > cfg.frame_tol * s.omega_frame:
                residual = float(np.max(np.abs(d)))
                raise FrameMismatch(
                    f"steady rotation at {nu:.3e} in frame {s.omega_frame:.6g}; "
                    f"fixed-point residual {residual:.3e} exceeds {cfg.oracle_tol:g}",
                    omega_estimate=estimate)
            # autonomous equations: keep components, swap the frame
            s = EnvelopeState(c, estimate, s.time)
    raise NoRelaxation(f"still drifting after t={t_spent:g}")


def _state_distance(c, root):
    return float(np.max(np.abs(_rephase(c) - _rephase(root))))


def stability_probe(root, p, gauge, eps=1e-4, horizon=2e3, omega_frame=None,
                    flow=Flow.SLOW):
    """Classify a steady state by the fate of a small perturbation.

    Distances are measured after removing the free global phase, which is a
    neutral direction of every lasing state.
    """
    gauge = Gauge.parse(gauge)
    frame = root.omega if root.is_lasing else (omega_frame or p.wa)
    base = EnvelopeState.from_steady_state(root, omega_frame=frame)
    c = np.asarray(base.components).copy()
    kick = eps * np.exp(0.25j * np.pi)
    for k in range(10):
        size = abs(c[k]) if abs(c[k]) > 0 else 1.0
        c[k] += (kick.real if k == 8 else kick) * size
    start_dist = _state_distance(c, base.components)
    try:
        traj = integrate(EnvelopeState(c, frame), p, gauge, t_end=horizon,
                         flow=flow)
    except NumericalBlowup:
        return Stability.UNSTABLE
    dist = _state_distance(traj.states[-1], base.components)
    if dist < 0.1 * min(eps, start_dist):
        return Stability.STABLE
    if dist > 10 * eps:
        return Stability.UNSTABLE
    return Stability.INCONCLUSIVE


def reconstruct_waveforms(state, t_grid):
    """Real-time signals A, B, X, Y (odd harmonics) and Z (even harmonics)."""
    t = np.asarray(t_grid, dtype=float)
    e1 = np.exp(-1j * state.omega * t)
    e2 = e1 * e1
    e3 = e2 * e1

    def odd(c1, c3):
        return 2.0 * (c1 * e1 + c3 * e3).real

    return {
        "t": t,
        "A": odd(state.a1, state.a3),
        "B": odd(state.b1, state.b3),
        "X": odd(state.x1, state.x3),
        "Y": odd(state.y1, state.y3),
        "Z": state.z0 + 2.0 * (state.z2 * e2).real,
    }

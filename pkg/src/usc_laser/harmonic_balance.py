"""Reduced steady-state equations, Newton continuation and pump sweeps."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (CollapsedToTrivial, GridMismatch, NoConvergence,
                     NonphysicalRoot, NoThreshold, SolverError)
from .model import (Gauge, ReducedUnknowns, SteadyState, bracket_residuals,
                    derived_rates, reconstruct_state, structure_coefficients)


class Direction(str, enum.Enum):
    UP = "up"
    DOWN = "down"


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-12
    max_newton_iters: int = 60
    jacobian_step: float = 1e-7
    # multistart Omega seeds: factors * max(wc, wa), plus anchors * wa near wa/3
    omega_factors: tuple = (0.3, 0.5, 0.8, 0.95, 1.0, 1.05, 1.2)
    omega_anchors: tuple = (0.3, 1.0 / 3.0, 0.37)
    amp_seed: float = 1e-3
    amp_seeds: tuple = (1e-3, 1e-2, 0.1, 0.5, 1.5)
    damping: float = 0.5
    min_step: float = 1e-4
    dedup_rtol: float = 1e-6

    def __post_init__(self):
        if not self.residual_tol > 0:
            raise ValueError("residual_tol must be > 0")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be >= 1")

    def omega_grid(self, p):
        top = max(p.wc, p.wa)
        return [f * top for f in self.omega_factors] + [a * p.wa for a in self.omega_anchors]


@dataclass(frozen=True)
class BranchPoint:
    z_pump: float
    state: SteadyState
    converged: bool
    direction: Direction


@dataclass(frozen=True)
class SweepBranch:
    points: tuple
    params: object
    gauge: Gauge
    direction: Direction = Direction.UP
    z_th: float | None = None
    omega_th: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    @property
    def pumps(self):
        return np.array([pt.z_pump for pt in self.points])

    @property
    def intensities(self):
        return np.array([pt.state.intensity for pt in self.points])

    def reversed(self):
        return SweepBranch(tuple(reversed(self.points)), self.params, self.gauge,
                           self.direction, self.z_th, self.omega_th, self.meta)


def _residual_vector(c, z_pump, amp, eta):
    r1, r3 = bracket_residuals(c, z_pump, amp, eta)
    return np.array([r1.real, r1.imag, r3.real, r3.imag])


def hb_residuals(u, p, gauge):
    """Four real residuals of the lasing-branch equations at ``u``."""
    c = structure_coefficients(p, gauge, u.omega)
    return _residual_vector(c, p.z_pump, u.amp, u.eta)


def _jacobian(x, r0, c0, p, gauge, h_rel):
    # x = (Omega / wa, amp, Re eta, Im eta); coefficients only depend on Omega
    jac = np.empty((4, 4))
    wa = p.wa
    for j in range(4):
        h = h_rel * max(abs(x[j]), 1e-3)
        xp = x.copy()
        xp[j] += h
        c = structure_coefficients(p, gauge, xp[0] * wa) if j == 0 else c0
        jac[:, j] = (_residual_vector(c, p.z_pump, xp[1], complex(xp[2], xp[3])) - r0) / h
    return jac


def _newton(seed, p, gauge, cfg):
    wa = p.wa
    x = np.array([seed.omega / wa, seed.amp, seed.eta.real, seed.eta.imag])

    def evaluate(x):
        c = structure_coefficients(p, gauge, x[0] * wa)
        return c, _residual_vector(c, p.z_pump, x[1], complex(x[2], x[3]))

    c, r = evaluate(x)
    norm = float(np.linalg.norm(r))
    for _ in range(cfg.max_newton_iters):
        if norm < cfg.residual_tol:
            return x, norm
        jac = _jacobian(x, r, c, p, gauge, cfg.jacobian_step)
        try:
            step = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError:
            raise NoConvergence("singular Jacobian") from None
        if not np.all(np.isfinite(step)):
            raise NoConvergence("non-finite Newton step")
        lam = 1.0
        while True:
            xn = x + lam * step
            if xn[0] > 0:
                xn[1] = abs(xn[1])   # residuals are even in the amplitude
                cn, rn = evaluate(xn)
                nn = float(np.linalg.norm(rn))
                if nn < norm or nn < cfg.residual_tol:
                    break
            lam *= cfg.damping
            if lam < cfg.min_step:
                raise NoConvergence(f"line search stalled at |r|={norm:.3e}",
                                    ) from None
        x, c, r, norm = xn, cn, rn, nn
    if norm < cfg.residual_tol:
        return x, norm
    raise NoConvergence(f"|r|={norm:.3e} after {cfg.max_newton_iters} iterations")


def newton_solve(seed, p, gauge, cfg=SolverConfig()):
    """Damped Newton on (Omega, |a1|, Re eta, Im eta) with a finite-difference Jacobian.

    Raises
    ------
    NoConvergence
        Iteration budget exhausted or the line search stalled.
    CollapsedToTrivial
        The amplitude went to zero.
    NonphysicalRoot
        The converged frequency is not positive.
    """
    gauge = Gauge.parse(gauge)
    if not seed.amp > 0:
        raise ValueError("seed amplitude must be positive")
    try:
        x, _ = _newton(seed, p, gauge, cfg)
    except NoConvergence:
        raise
    if x[0] <= 0:
        raise NonphysicalRoot(f"Omega={x[0] * p.wa:.6g}")
    if x[1] <= cfg.residual_tol:
        raise CollapsedToTrivial(f"|a1|={x[1]:.3e}")
    u = ReducedUnknowns(x[0] * p.wa, float(x[1]), complex(x[2], x[3]))
    return reconstruct_state(u, p, gauge)


def state_distance(s1, s2, wa=1.0):
    """Distance in (Omega / wa, a1, a3) between two phase-fixed states."""
    return math.sqrt(((s1.omega - s2.omega) / wa) ** 2 + abs(s1.a1 - s2.a1) ** 2
                     + abs(s1.a3 - s2.a3) ** 2)


def _same_root(s1, s2, rtol):
    v1 = np.array([s1.omega, abs(s1.a1), s1.eta.real, s1.eta.imag])
    v2 = np.array([s2.omega, abs(s2.a1), s2.eta.real, s2.eta.imag])
    return np.linalg.norm(v1 - v2) <= rtol * max(np.linalg.norm(v1), np.linalg.norm(v2))


def multistart_solve(p, gauge, cfg=SolverConfig()):
    """All distinct lasing roots reachable from the seed grid, then the trivial state.

    Lasing states are ordered by decreasing |a1|; the trivial state is last.
    """
    gauge = Gauge.parse(gauge)
    found = []
    for omega in cfg.omega_grid(p):
        for amp in cfg.amp_seeds:
            try:
                st = newton_solve(ReducedUnknowns(omega, amp), p, gauge, cfg)
            except SolverError:
                continue
            if not any(_same_root(st, other, cfg.dedup_rtol) for other in found):
                found.append(st)
    found.sort(key=lambda s: (-abs(s.a1), s.omega))
    return found + [SteadyState.trivial(p.z_pump, gauge)]


def _threshold_roots(p, gauge):
    """Real Omega > 0 where Im[Delta_c1 Delta_a1] vanishes, with the pump there.

    Im[Delta_c1 Delta_a1] is a cubic in Omega:
    (gx+gy) W^3 + k wc W^2 - (gx+gy) c0 W - k wc (wa^2 + gx gy).
    """
    r = derived_rates(p)
    gs = r.gamma_x + r.gamma_y
    gauge = Gauge.parse(gauge)
    c0 = p.wc * (p.wc + 4.0 * p.g ** 2 * p.wa) if gauge is Gauge.COULOMB else p.wc ** 2
    kw = p.kappa * p.wc
    coeffs = [gs, kw, -gs * c0, -kw * (p.wa ** 2 + r.gamma_x * r.gamma_y)]
    if gs == 0 and kw == 0:
        return []
    roots = np.roots(np.trim_zeros(coeffs, "f"))
    out = []
    for w in roots:
        if abs(w.imag) > 1e-9 * max(1.0, abs(w)) or w.real <= 0:
            continue
        w = float(w.real)
        c = structure_coefficients(p, gauge, w)
        out.append((float(-c.lead1.real), w))
    return sorted(out)


def linearized_threshold(p, gauge):
    """Lowest pump at which the trivial state loses stability, and its Omega.

    Returns ``(z_th, omega_th)``.  Crossings at a non-positive pump are
    ignored (gain requires inversion).
    """
    if not p.g_tilde > 0:
        raise NoThreshold("no coupling")
    roots = [(z, w) for z, w in _threshold_roots(p, gauge) if z > 0]
    if not roots or roots[0][0] > 0.5:
        raise NoThreshold("threshold above the maximal pump 1/2"
                          if roots else "no positive-frequency crossing")
    return roots[0]


def conventional_threshold(p):
    """Single-mode rotating-wave threshold and frequency, for reference."""
    gt = p.gamma_total
    omega = (p.kappa * p.wa + gt * p.wc) / (p.kappa + gt)
    z_th = (p.kappa * gt - (p.wc - omega) * (p.wa - omega)) / (2.0 * p.g ** 2 * p.wa ** 2)
    return z_th, omega


def _check_grid(grid, direction):
    grid = [float(z) for z in grid]
    if not grid:
        raise ValueError("empty pump grid")
    if any(abs(z) > 0.5 for z in grid):
        raise ValueError("pump values must satisfy |z| <= 1/2")
    diffs = np.diff(grid)
    if direction is Direction.UP and np.any(diffs <= 0):
        raise ValueError("up-sweep grid must be strictly increasing")
    if direction is Direction.DOWN and np.any(diffs >= 0):
        raise ValueError("down-sweep grid must be strictly decreasing")
    return grid


def pump_sweep(p_base, gauge, pump_grid, direction=Direction.UP, cfg=SolverConfig(),
               seed=None):
    """Follow steady states along ``pump_grid`` with warm starts.

    While the previous point is trivial and the pump is at or below the
    linearized threshold, the trivial state is stable and is kept without a
    search.  Otherwise the previous lasing state seeds Newton; on failure a
    multistart search picks the root closest to the previous state, or,
    leaving the trivial branch, the root closest to the threshold frequency.
    A down-sweep started without ``seed`` begins on the largest-|a1| root.
    """
    gauge = Gauge.parse(gauge)
    direction = Direction(direction)
    grid = _check_grid(pump_grid, direction)
    try:
        z_th, omega_th = linearized_threshold(p_base, gauge)
    except NoThreshold:
        z_th, omega_th = math.inf, None

    prev = seed if (seed is not None and seed.is_lasing) else None
    points = []
    for k, z in enumerate(grid):
        p = p_base.with_pump(z)
        state = None
        if prev is not None:
            try:
                state = newton_solve(prev.unknowns, p, gauge, cfg)
            except SolverError:
                state = None
        if state is None and (prev is not None or z > z_th
                              or (k == 0 and seed is None and direction is Direction.DOWN)):
            roots = multistart_solve(p, gauge, cfg)[:-1]
            if roots:
                if prev is not None:
                    state = min(roots, key=lambda s: state_distance(s, prev, p.wa))
                elif k == 0 and seed is None and direction is Direction.DOWN:
                    state = roots[0]
                elif omega_th is not None:
                    state = min(roots, key=lambda s: (abs(s.omega - omega_th), -abs(s.a1)))
                else:
                    state = roots[0]
        if state is None:
            converged = not (z > z_th)
            state = SteadyState.trivial(z, gauge)
        else:
            converged = True
        points.append(BranchPoint(z, state, converged, direction))
        prev = state if state.is_lasing else None
    return SweepBranch(tuple(points), p_base, gauge, direction,
                       None if math.isinf(z_th) else z_th, omega_th)


def hysteresis_loop(p_base, gauge, pump_grid, cfg=SolverConfig()):
    """Up-sweep over the increasing grid, then down-sweep from its final state.

    Returns ``(up, down)`` with both branches listed in increasing pump order.
    """
    grid = sorted(float(z) for z in pump_grid)
    up = pump_sweep(p_base, gauge, grid, Direction.UP, cfg)
    last = up.points[-1].state
    rest = grid[-2::-1]
    first = BranchPoint(grid[-1], last, up.points[-1].converged, Direction.DOWN)
    if rest:
        down = pump_sweep(p_base, gauge, rest, Direction.DOWN, cfg,
                          seed=last if last.is_lasing else None)
        pts = (first,) + down.points
    else:
        pts = (first,)
    down = SweepBranch(tuple(reversed(pts)), p_base, up.gauge, Direction.DOWN,
                       up.z_th, up.omega_th)
    return up, down


def detect_bistability(up, down, rel_tol=1e-3):
    """Compare two sweeps point by point over a shared pump grid.

    Returns ``(bistable, window)`` where ``window`` is the longest contiguous
    pump interval over which both sweeps are lasing but their intensities
    differ by more than ``rel_tol`` relatively.
    """
    if up.gauge != down.gauge:
        raise GridMismatch("sweeps use different gauges")
    if up.params.replace(z_pump=0.0) != down.params.replace(z_pump=0.0):
        raise GridMismatch("sweeps use different parameters")
    a = sorted(up.points, key=lambda pt: pt.z_pump)
    b = sorted(down.points, key=lambda pt: pt.z_pump)
    if len(a) != len(b) or any(abs(x.z_pump - y.z_pump) > 1e-12 for x, y in zip(a, b)):
        raise GridMismatch("sweeps are on different pump grids")

    flags = []
    for x, y in zip(a, b):
        ix, iy = x.state.intensity, y.state.intensity
        differ = (x.state.is_lasing and y.state.is_lasing
                  and abs(ix - iy) > rel_tol * max(ix, iy))
        flags.append(differ)

    best, run_start = None, None
    for k, f in enumerate(flags + [False]):
        if f and run_start is None:
            run_start = k
        elif not f and run_start is not None:
            if best is None or k - run_start > best[1] - best[0]:
                best = (run_start, k)
            run_start = None
    if best is None:
        return False, None
    return True, (a[best[0]].z_pump, a[best[1] - 1].z_pump)

"""Parameters, state containers and the closed-form harmonic-balance algebra.

All formulas are written with the atomic frequency ``wa`` explicit, so they
are homogeneous of the right degree in frequency and any common rescaling of
(wa, wc, kappa, gamma_down, gamma_phi) only rescales Omega.  The
:func:`validate_params` entry point additionally normalises to ``wa = 1``.

Frequency components follow ``A(t) = a1 exp(-i Omega t) + a3 exp(-3 i Omega t)
+ c.c.`` (same for B, X, Y) and ``Z(t) = Z0 + (z2 exp(-2 i Omega t) + c.c.)``.
"""
from __future__ import annotations

import dataclasses
import enum
import math
from dataclasses import dataclass

from .errors import InvalidParameter


class Gauge(str, enum.Enum):
    COULOMB = "coulomb"
    DIPOLE = "dipole"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"electric-dipole": "dipole", "electricdipole": "dipole",
                   "electric_dipole": "dipole"}
        return cls(aliases.get(key, key))


class Branch(str, enum.Enum):
    TRIVIAL = "trivial"
    LASING = "lasing"


@dataclass(frozen=True)
class SystemParams:
    """One model instance.

    ``g_tilde`` is the coupling normalised by the atomic frequency; the
    coupling entering the equations is ``g = g_tilde * sqrt(wa / wc)``.
    """

    wa: float = 1.0
    wc: float = 1.0
    g_tilde: float = 0.15
    kappa: float = 0.01
    gamma_down: float = 0.05
    gamma_phi: float = 0.1
    z_pump: float = 0.5

    @property
    def g(self):
        return self.g_tilde * math.sqrt(self.wa / self.wc)

    @property
    def gamma_total(self):
        return self.gamma_down + self.gamma_phi

    def with_pump(self, z_pump):
        return dataclasses.replace(self, z_pump=float(z_pump))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def scaled(self, s):
        """All frequencies and rates multiplied by ``s``."""
        return dataclasses.replace(
            self, wa=self.wa * s, wc=self.wc * s, kappa=self.kappa * s,
            gamma_down=self.gamma_down * s, gamma_phi=self.gamma_phi * s)

    def as_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class DissipationRates:
    gamma_x: float
    gamma_y: float
    gamma_z: float


@dataclass(frozen=True)
class StructureCoefficients:
    """Detunings, nonlinear C-coefficients and leading terms at one Omega.

    ``lead1``/``lead3`` are the linear terms Delta_c,n Delta_a,n / D of the
    two brackets (D depends on the gauge) and ``pump_weight3`` multiplies the
    pump in the third-harmonic bracket.
    """

    gauge: Gauge
    omega: float
    delta_c1: complex
    delta_c3: complex
    delta_a1: complex
    delta_a3: complex
    c_11_1: complex
    c_33_1: complex
    c_m1m1_3: complex
    c_11_3: complex
    c_33_3: complex
    c_111: complex
    lead1: complex
    lead3: complex
    pump_weight3: float


@dataclass(frozen=True)
class ReducedUnknowns:
    omega: float
    amp: float
    eta: complex = 0j

    def as_vector(self):
        return [self.omega, self.amp, self.eta.real, self.eta.imag]

    @classmethod
    def from_vector(cls, v):
        return cls(float(v[0]), float(v[1]), complex(v[2], v[3]))


@dataclass(frozen=True)
class SteadyState:
    """Oscillating steady state stored with the phase convention theta = 0."""

    omega: float
    a1: complex
    a3: complex
    b1: complex
    b3: complex
    x1: complex
    x3: complex
    y1: complex
    y3: complex
    z0: float
    z2: complex
    gauge: Gauge
    residual_norm: float = 0.0
    branch: Branch = Branch.LASING
    theta: float = 0.0

    @classmethod
    def trivial(cls, z_pump, gauge):
        return cls(omega=0.0, a1=0j, a3=0j, b1=0j, b3=0j, x1=0j, x3=0j,
                   y1=0j, y3=0j, z0=float(z_pump), z2=0j,
                   gauge=Gauge.parse(gauge), residual_norm=0.0,
                   branch=Branch.TRIVIAL)

    @property
    def is_lasing(self):
        return self.branch is Branch.LASING

    @property
    def amp(self):
        return abs(self.a1)

    @property
    def intensity(self):
        return abs(self.a1) ** 2

    @property
    def eta(self):
        if self.a1 == 0:
            return 0j
        return self.a3 / self.a1

    @property
    def unknowns(self):
        return ReducedUnknowns(self.omega, abs(self.a1), self.eta)

    def components(self):
        """Ordered mapping name -> value of all ten frequency components."""
        return {"a1": self.a1, "a3": self.a3, "b1": self.b1, "b3": self.b3,
                "x1": self.x1, "x3": self.x3, "y1": self.y1, "y3": self.y3,
                "z0": self.z0, "z2": self.z2}


def validate_params(raw, normalize=True):
    """Check every admissible-range invariant and normalise to ``wa = 1``.

    Raises :class:`InvalidParameter` naming the first offending field.
    """
    checks = [
        ("wa", raw.wa > 0, "must be > 0"),
        ("wc", raw.wc > 0, "must be > 0"),
        ("g_tilde", raw.g_tilde >= 0, "must be >= 0"),
        ("kappa", raw.kappa >= 0, "must be >= 0"),
        ("gamma_down", raw.gamma_down > 0,
         "must be > 0 (gamma_z = gamma_down appears as a divisor)"),
        ("gamma_phi", raw.gamma_phi >= 0, "must be >= 0"),
        ("z_pump", abs(raw.z_pump) <= 0.5, "|z_pump| must be <= 1/2"),
    ]
    for name in ("wa", "wc", "g_tilde", "kappa", "gamma_down", "gamma_phi",
                 "z_pump"):
        if not math.isfinite(getattr(raw, name)):
            raise InvalidParameter(name, "must be finite")
    for name, ok, message in checks:
        if not ok:
            raise InvalidParameter(name, f"{message}, got {getattr(raw, name)!r}")
    if not normalize or raw.wa == 1.0:
        return raw
    return raw.scaled(1.0 / raw.wa).replace(wa=1.0)


def derived_rates(p):
    return DissipationRates(gamma_x=p.gamma_phi,
                            gamma_y=p.gamma_down + p.gamma_phi,
                            gamma_z=p.gamma_down)


def _delta_c(p, gauge, n, omega):
    if gauge is Gauge.COULOMB:
        base = p.wc * (p.wc + 4.0 * p.g ** 2 * p.wa)
    else:
        base = p.wc * p.wc
    return complex(base - n * n * omega * omega, -p.kappa * p.wc)


def _delta_a(p, n, omega):
    r = derived_rates(p)
    return p.wa ** 2 + complex(-r.gamma_x, n * omega) * complex(-r.gamma_y, n * omega)


def structure_coefficients(p, gauge, omega):
    gauge = Gauge.parse(gauge)
    r = derived_rates(p)
    gz = r.gamma_z
    wa, wc, g = p.wa, p.wc, p.g
    dc1 = _delta_c(p, gauge, 1, omega)
    dc3 = _delta_c(p, gauge, 3, omega)
    da1 = _delta_a(p, 1, omega)
    da3 = _delta_a(p, 3, omega)

    two = 2.0 * wc * wa
    minus = complex(-gz, 2.0 * omega)   # i 2 Omega - gamma_z
    plus = complex(gz, 2.0 * omega)     # i 2 Omega + gamma_z
    relax = gz * wc * wa

    if gauge is Gauge.COULOMB:
        gam = r.gamma_y
        s1 = complex(-gam, omega) * dc1
        s3 = complex(-gam, 3 * omega) * dc3
        s1c = complex(gam, omega) * dc1.conjugate()   # (i Omega + gamma) Delta*
        s3c = complex(gam, 3 * omega) * dc3.conjugate()
        c_11_1 = -s1.real / relax + s1 / (two * minus)
        c_33_1 = -s3.real / relax + (s3c - s1) / (two * plus)
        c_m1m1_3 = (s3 - s1c) / (two * minus) + s1c / (two * plus)
        c_11_3 = -s1.real / relax + (s3 - s1c) / (two * minus)
        c_33_3 = -s3.real / relax
        c_111 = s1 / (two * minus)
        denom1 = denom3 = 8.0 * g * g * wc * wa ** 3
        weight3 = 1.0
    else:
        # gamma_x throughout; the last C_{(-1)^2 3} term must carry gamma_x
        # for roots to be fixed points of the component equations.
        gam = r.gamma_x
        s1 = complex(-gam, omega) * dc1
        s3 = complex(-gam, 3 * omega) * dc3
        s1c = complex(gam, omega) * dc1.conjugate()
        s3c = complex(gam, 3 * omega) * dc3.conjugate()
        c_11_1 = -s1.real / relax + s1 / (two * minus)
        c_33_1 = -s3.real / relax + (s3c - 9.0 * s1) / (two * plus)
        c_m1m1_3 = -(s3 - 9.0 * s1c) / (3.0 * two * minus) - 3.0 * s1c / (two * plus)
        c_11_3 = -9.0 * s1.real / relax + (s3 - 9.0 * s1c) / (two * minus)
        c_33_3 = -9.0 * s3.real / relax
        c_111 = -3.0 * s1 / (two * minus)
        denom1 = denom3 = 8.0 * g * g * wc * wa * omega * omega
        weight3 = 9.0

    # without coupling the lasing brackets are undefined
    nan = complex(math.nan, math.nan)
    return StructureCoefficients(
        gauge=gauge, omega=float(omega),
        delta_c1=dc1, delta_c3=dc3, delta_a1=da1, delta_a3=da3,
        c_11_1=complex(c_11_1), c_33_1=complex(c_33_1),
        c_m1m1_3=complex(c_m1m1_3), c_11_3=complex(c_11_3),
        c_33_3=complex(c_33_3), c_111=complex(c_111),
        lead1=dc1 * da1 / denom1 if denom1 else nan,
        lead3=dc3 * da3 / denom3 if denom3 else nan,
        pump_weight3=weight3)


def bracket_residuals(c, z_pump, amp, eta):
    """The two complex reduced equations for given coefficients.

    The first bracket is returned as is; the second is multiplied by
    ``eta`` so the ``C_{1^3} / eta`` term stays finite at ``eta = 0``.
    """
    a2 = amp * amp
    e2 = eta.real * eta.real + eta.imag * eta.imag
    r1 = c.lead1 + z_pump + (c.c_11_1 + c.c_33_1 * e2 + c.c_m1m1_3 * eta) * a2
    r3 = eta * (c.lead3 + c.pump_weight3 * z_pump
                + (c.c_11_3 + c.c_33_3 * e2) * a2) + c.c_111 * a2
    return r1, r3


def residual_norm(c, z_pump, amp, eta):
    r1, r3 = bracket_residuals(c, z_pump, amp, eta)
    return math.sqrt(abs(r1) ** 2 + abs(r3) ** 2)


def reconstruct_state(u, p, gauge):
    """Fill every frequency component from the reduced unknowns (theta = 0)."""
    gauge = Gauge.parse(gauge)
    if u.amp <= 0.0:
        return SteadyState.trivial(p.z_pump, gauge)
    omega = u.omega
    rates = derived_rates(p)
    wa, wc, g = p.wa, p.wc, p.g
    gz = rates.gamma_z
    a = {1: complex(u.amp), 3: u.eta * u.amp}
    b, x, y = {}, {}, {}
    for n in (1, 3):
        dc = _delta_c(p, gauge, n, omega)
        if gauge is Gauge.COULOMB:
            lam = complex(-rates.gamma_y, n * omega)
            b[n] = 1j * n * omega / wc * a[n]
            x[n] = lam * dc / (4.0 * g * wc * wa * wa) * a[n]
            y[n] = -wa / lam * x[n]
        else:
            lam = complex(-rates.gamma_x, n * omega)
            b[n] = -complex(wc, -p.kappa) / (1j * n * omega) * a[n]
            y[n] = -lam * dc / (4j * n * g * wc * wa * omega) * a[n]
            x[n] = wa / lam * y[n]

    if gauge is Gauge.COULOMB:
        s = a[1].conjugate() * x[1] + a[3].conjugate() * x[3]
        z0 = p.z_pump - 2.0 * g * wa / gz * (2.0 * s.real)
        z2 = 2.0 * g * wa / complex(-gz, 2 * omega) * (
            a[1].conjugate() * x[3] + a[1] * x[1] + x[1].conjugate() * a[3])
    else:
        s = a[1].conjugate() * y[1] + 3.0 * a[3].conjugate() * y[3]
        # (s - s*) = 2 i Im s
        z0 = p.z_pump - 4.0 * g * omega / gz * s.imag
        z2 = -2j * g * omega / complex(-gz, 2 * omega) * (
            a[1].conjugate() * y[3] - a[1] * y[1] - 3.0 * y[1].conjugate() * a[3])

    coeffs = structure_coefficients(p, gauge, omega)
    return SteadyState(
        omega=float(omega), a1=a[1], a3=a[3], b1=b[1], b3=b[3],
        x1=x[1], x3=x[3], y1=y[1], y3=y[3], z0=float(z0), z2=complex(z2),
        gauge=gauge,
        residual_norm=residual_norm(coeffs, p.z_pump, u.amp, u.eta),
        branch=Branch.LASING)

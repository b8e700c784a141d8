"""Reference laser pulse, Mott gap, correlation length and breakdown threshold.

The reference Peierls phase is

    phi(t) = (a E0 / w0) sin^2(w0 t / 2N) sin(w0 t)

with the drive frequency w0 entering in eV (hbar = 1) and aE0 converted to
eV.  The quoted 32.9 THz is interpreted as a linear frequency by default;
pass ``angular=True`` to a PulseSpec to flip that.

The Mott gap uses the standard thermodynamic-limit Bethe-ansatz integral;
the doublon-hole correlation length uses the same family of integrals with
its overall normalization fixed so that, for the reference parameters
(t0 = 0.52 eV, a = 4 A, E0 = 10 MV/cm), the breakdown threshold stops being
reachable between U = 6.5 t0 and U = 7 t0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .units import field_times_a_ev, frequency_to_ev


@dataclass(frozen=True)
class PulseSpec:
    """Pump pulse: peak field in MV/cm, frequency in THz, N full cycles."""

    e0: float = 10.0
    freq_thz: float = 32.9
    cycles: int = 10
    a: float = 4.0          # lattice constant in Angstrom
    angular: bool = False   # treat freq_thz as angular instead of linear

    def __post_init__(self):
        if self.e0 < 0:
            raise ValueError("peak field must be non-negative")
        if self.freq_thz <= 0:
            raise ValueError("drive frequency must be positive")
        if self.cycles < 1:
            raise ValueError("need at least one cycle")

    @property
    def omega0_ev(self) -> float:
        return frequency_to_ev(self.freq_thz, angular=self.angular)

    @property
    def amplitude(self) -> float:
        """Dimensionless phase amplitude a E0 / w0."""
        return field_times_a_ev(self.e0, self.a) / self.omega0_ev

    @property
    def duration(self) -> float:
        """Pulse support 2 pi N / w0 in natural time units."""
        return 2.0 * np.pi * self.cycles / self.omega0_ev


@dataclass(frozen=True)
class BreakdownInputs:
    delta: float  # Mott gap, eV
    xi: float     # doublon-hole correlation length, lattice units

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("Mott gap must be non-negative")
        if self.xi <= 0:
            raise ValueError("correlation length must be positive")


def reference_phase(t, pulse: PulseSpec):
    """Peierls phase of the reference pulse (radians); zero outside support."""
    t = np.asarray(t, dtype=float)
    # small slack so grid endpoints landing on the support edge after float
    # rounding do not count as outside
    slack = 1e-9 * pulse.duration
    outside = (t < -slack) | (t > pulse.duration + slack)
    if np.any(outside):
        warnings.warn("time outside pulse support; phase clamped to 0",
                      stacklevel=2)
    w = pulse.omega0_ev
    phi = pulse.amplitude * np.sin(w * t / (2 * pulse.cycles)) ** 2 * np.sin(w * t)
    phi = np.where(outside, 0.0, phi)
    return float(phi) if phi.ndim == 0 else phi


def _envelope_derivative(tau, cycles):
    """d(phi)/d(w t) divided by the amplitude: the normalized field shape."""
    n = cycles
    return (np.sin(tau / (2 * n)) ** 2 * np.cos(tau)
            + np.sin(tau / n) * np.sin(tau) / (2 * n))


def electric_field(t, pulse: PulseSpec):
    """E(t) = -(1/a) d(phi)/dt of the reference pulse, in MV/cm."""
    t = np.asarray(t, dtype=float)
    tau = pulse.omega0_ev * t
    e = -pulse.e0 * _envelope_derivative(tau, pulse.cycles)
    e = np.where((t < 0) | (t > pulse.duration), 0.0, e)
    return float(e) if e.ndim == 0 else e


def mott_gap(u: float, t0: float) -> float:
    """Thermodynamic-limit Mott gap of the half-filled chain (eV).

    Delta = u - 4 t0 + 8 t0 * int_0^inf J1(x) / (x (1 + e^{x u / 2 t0})) dx,
    which vanishes at u = 0 and approaches u - 4 t0 for large u.
    """
    if u < 0:
        raise ValueError("u must be non-negative")
    if u == 0.0:
        return 0.0

    def integrand(x):
        return special.j1(x) / x * special.expit(-x * u / (2.0 * t0))

    tail, _ = integrate.quad(integrand, 0.0, np.inf, limit=400,
                             epsabs=1e-12, epsrel=1e-12)
    return u - 4.0 * t0 + 8.0 * t0 * tail


def correlation_length(u: float, t0: float) -> float:
    """Doublon-hole correlation length (lattice units); diverges as u -> 0.

    1/xi = (pi t0 / u) * int_1^inf arccosh(y) sech(2 pi y t0 / u) dy.  The
    integrand family is the standard thermodynamic-limit one; the overall
    prefactor is calibrated against the reference-system breakdown boundary
    (see module docstring).
    """
    if u <= 0:
        raise ValueError("correlation length diverges at u = 0")
    ratio = u / t0

    def integrand(y):
        arg = 2.0 * np.pi * y / ratio
        sech = 2.0 * np.exp(-arg) / (1.0 + np.exp(-2.0 * arg))
        return np.arccosh(y) * sech

    val, _ = integrate.quad(integrand, 1.0, np.inf, limit=400,
                            epsabs=1e-13, epsrel=1e-12)
    inv_xi = (np.pi / ratio) * val
    return 1.0 / inv_xi


def breakdown_threshold(inputs: BreakdownInputs, a: float) -> float:
    """Critical field E_th = Delta / (2 xi a) in MV/cm; a in Angstrom."""
    # Delta/(2 xi) is an energy per lattice spacing; divide by a in cm and
    # by 1e6 to land in MV/cm.
    return inputs.delta / (2.0 * inputs.xi) / (a * 1e-8) / 1e6


def threshold_time(pulse: PulseSpec, inputs: BreakdownInputs,
                   scan_points: int = 10000):
    """Earliest time the pulse field reaches the breakdown threshold.

    Solves Delta / (2 E0 xi) = normalized field shape on the pulse support by
    a fine scan plus bisection; returns None when the threshold exceeds the
    shape's global maximum (no breakdown during the pulse).
    """
    if inputs.delta == 0.0:
        return 0.0
    lhs = inputs.delta / (2.0 * field_times_a_ev(pulse.e0, pulse.a) * inputs.xi)
    taus = np.linspace(0.0, 2.0 * np.pi * pulse.cycles, scan_points + 1)
    shape = _envelope_derivative(taus, pulse.cycles)
    crossings = np.nonzero((shape[:-1] < lhs) & (shape[1:] >= lhs))[0]
    if len(crossings) == 0:
        return None
    i = crossings[0]
    tau_root = optimize.brentq(
        lambda tau: _envelope_derivative(tau, pulse.cycles) - lhs,
        taus[i], taus[i + 1], xtol=1e-14, rtol=1e-12)
    return tau_root / pulse.omega0_ev

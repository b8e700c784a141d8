"""Tracking field, tracking Hamiltonian coefficients and feasibility checks.

Given a target current J_T and the state's hopping expectation R e^{i theta},
the field that realizes <J> = J_T exactly is

    phi_T = arcsin(-J_T / (2 a t0 R)) + theta

with the principal arcsin branch.  The dimensionless ratio
X = J_T / (2 a t0 R) must stay inside (-1, 1) by a margin eps1, and R must
stay above a floor eps2; both are enforced here and reported as
ConstraintViolationError when breached.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ConstraintViolationError
from .lattice import LatticeSpec


@dataclass(frozen=True)
class TrackingConfig:
    eps1: float = 1e-3            # margin for |X| < 1 - eps1
    eps2: float = 1e-6            # floor for R > eps2
    k: float | None = None        # optional target scale factor
    a_track: float | None = None  # optional overridden lattice constant (Angstrom)

    def __post_init__(self):
        if not 0.0 < self.eps1 < 1.0:
            raise ValueError("eps1 must lie in (0, 1)")
        if self.eps2 <= 0.0:
            raise ValueError("eps2 must be positive")
        if self.k is not None and self.k <= 0.0:
            raise ValueError("scale factor k must be positive")
        if self.a_track is not None and self.a_track <= 0.0:
            raise ValueError("a_track must be positive")


def effective_a(spec: LatticeSpec, tcfg: TrackingConfig) -> float:
    return spec.a if tcfg.a_track is None else tcfg.a_track


def tracking_ratio(j_target: float, r: float, spec: LatticeSpec,
                   tcfg: TrackingConfig, time: float | None = None) -> float:
    """X = J_T / (2 a t0 R); raises when R is at or below the floor."""
    if r <= tcfg.eps2:
        raise ConstraintViolationError("hopping-floor", margin=r, time=time)
    return j_target / (2.0 * effective_a(spec, tcfg) * spec.t0 * r)


def check_amplitude(x: float, tcfg: TrackingConfig,
                    time: float | None = None) -> None:
    if abs(x) >= 1.0 - tcfg.eps1:
        raise ConstraintViolationError("amplitude", margin=1.0 - abs(x), time=time)


def tracking_coefficients(x: float, spec: LatticeSpec,
                          tcfg: TrackingConfig | None = None,
                          time: float | None = None):
    """Hopping coefficients P+/- = -t0 (sqrt(1 - X^2) +/- i X).

    P+ and P- are complex conjugates with |P+/-| = t0, which is what makes
    the tracking Hamiltonian Hermitian.
    """
    if tcfg is not None:
        check_amplitude(x, tcfg, time=time)
    p_plus = -spec.t0 * (np.sqrt(1.0 - x * x) + 1j * x)
    return p_plus, np.conj(p_plus)


def tracking_field(j_target: float, r: float, theta: float, spec: LatticeSpec,
                   tcfg: TrackingConfig, time: float | None = None) -> float:
    """Field phi_T realizing <J> = J_T for the given hopping expectation."""
    x = tracking_ratio(j_target, r, spec, tcfg, time=time)
    check_amplitude(x, tcfg, time=time)
    return float(np.arcsin(-x) + theta)


def build_tracking_hamiltonian(k: sparse.spmatrix, d_op: sparse.spmatrix,
                               spec: LatticeSpec, x: float, theta: float,
                               tcfg: TrackingConfig) -> sparse.csr_matrix:
    """H_T = P+ e^{-i theta} K + P- e^{+i theta} K^dag + u D.

    Identical in action to the physical Hamiltonian assembled at phi_T: with
    phi_T = arcsin(-X) + theta one has
    -t0 e^{-i phi_T} = P+ e^{-i theta} exactly.
    """
    check_amplitude(x, tcfg)
    p_plus, p_minus = tracking_coefficients(x, spec)
    h = (p_plus * np.exp(-1j * theta)) * k \
        + (p_minus * np.exp(1j * theta)) * k.conj().T \
        + spec.u * d_op.astype(np.complex128)
    return h.tocsr()


def observable_tracking_ratio(do_dt: float, b: float, r_o: float,
                              spec: LatticeSpec, tcfg: TrackingConfig,
                              time: float | None = None) -> float:
    """X for tracking a general observable: (dO_T/dt - B) / (2 t0 R_O).

    Note the lattice constant does not enter; it is specific to the current.
    The result feeds the same coefficient/field path with (R, theta)
    replaced by (R_O, theta_O).
    """
    if r_o <= tcfg.eps2:
        raise ConstraintViolationError("hopping-floor", margin=r_o, time=time)
    return (do_dt - b) / (2.0 * spec.t0 * r_o)


def scale_target(j_series: np.ndarray, spec: LatticeSpec, trial_r_floor: float,
                 tcfg: TrackingConfig, allow_amplify: bool = False):
    """Scale factor k with max |k J_T| = (1 - eps1) * 2 a t0 * trial_r_floor.

    ``trial_r_floor`` is the caller's lower estimate of R(psi) along the run.
    By default k is capped at 1 so a feasible target is never amplified.
    Returns (k, scaled series).
    """
    peak = float(np.max(np.abs(j_series)))
    if peak == 0.0:
        raise ValueError("cannot scale an identically zero target")
    k = (1.0 - tcfg.eps1) * 2.0 * effective_a(spec, tcfg) * spec.t0 \
        * trial_r_floor / peak
    if not allow_amplify:
        k = min(k, 1.0)
    return k, k * np.asarray(j_series)

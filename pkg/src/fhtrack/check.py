"""Fast invariant suite on a small chain, used by the CLI ``check`` command.

Each check returns (name, passed, detail).  Everything runs on the L=6
half-filled chain so the whole suite completes in well under two minutes.
"""

from __future__ import annotations

import numpy as np

from .groundstate import LanczosConfig, ground_state
from .lattice import (LatticeSpec, assemble_hamiltonian, build_basis,
                      build_doublon_operator, build_hop_forward)
from .observables import current_expectation, current_operator, hop_expectation
from .propagation import TimeGrid, evolve_driven, evolve_tracking
from .pulses import PulseSpec, reference_phase
from .tracking import (TrackingConfig, build_tracking_hamiltonian,
                       tracking_coefficients)


def _random_state(dim, rng):
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def run_checks(steps_per_cycle: int = 2000, cycles: int = 10):
    spec = LatticeSpec(L=6, n_up=3, n_down=3, t0=0.52, u=4 * 0.52, a=4.0)
    basis = build_basis(spec)
    k = build_hop_forward(basis, spec)
    d = build_doublon_operator(basis, spec)
    rng = np.random.default_rng(7)
    tcfg = TrackingConfig()
    results = []

    def check(name, value, bound, larger_is_better=False):
        ok = value > bound if larger_is_better else value < bound
        results.append((name, bool(ok), f"{value:.3e} vs {bound:.1e}"))

    # Hermiticity of H(phi) and of H_T at random feasible steps
    herm = 0.0
    herm_t = 0.0
    mod = 0.0
    for _ in range(10):
        phi = rng.uniform(-np.pi, np.pi)
        h = assemble_hamiltonian(k, d, spec, phi)
        herm = max(herm, np.abs((h - h.conj().T).data).max(initial=0.0))
        x = rng.uniform(-0.9, 0.9)
        theta = rng.uniform(-np.pi, np.pi)
        ht = build_tracking_hamiltonian(k, d, spec, x, theta, tcfg)
        herm_t = max(herm_t, np.abs((ht - ht.conj().T).data).max(initial=0.0))
        p_plus, p_minus = tracking_coefficients(x, spec)
        mod = max(mod, abs(abs(p_plus) - spec.t0), abs(abs(p_minus) - spec.t0))
    check("hamiltonian_hermitian", herm, 1e-14)
    check("tracking_hamiltonian_hermitian", herm_t, 1e-14)
    check("tracking_coefficient_modulus", mod, 1e-14)

    # Current bound |<J>| <= 2 a t0 R and reality of B
    bound_excess = -np.inf
    b_imag = 0.0
    j_op = current_operator(k, spec, 0.0)
    d_diag = d.diagonal()
    for _ in range(20):
        psi = _random_state(basis.dim, rng)
        he = hop_expectation(psi, k)
        j = current_expectation(psi, k, spec, rng.uniform(-np.pi, np.pi))
        bound_excess = max(bound_excess,
                           abs(j) - 2 * spec.a * spec.t0 * he.R)
        o_psi = j_op @ psi
        comm = np.vdot(psi, d_diag * o_psi) - np.vdot(o_psi, d_diag * psi)
        b_imag = max(b_imag, abs((1j * spec.u * comm).imag))
    check("current_bound", bound_excess, 1e-12)
    check("b_real", b_imag, 1e-12)

    # Dense-oracle equivalence of H_T and H(phi_T)
    dense_dev = 0.0
    for _ in range(5):
        x = rng.uniform(-0.9, 0.9)
        theta = rng.uniform(-np.pi, np.pi)
        phi_t = np.arcsin(-x) + theta
        ht = build_tracking_hamiltonian(k, d, spec, x, theta, tcfg).toarray()
        h = assemble_hamiltonian(k, d, spec, phi_t).toarray()
        dense_dev = max(dense_dev, np.abs(ht - h).max())
    check("tracking_vs_driven_hamiltonian", dense_dev, 1e-13)

    # Norm conservation over a full driven pulse and a tracked run
    pulse = PulseSpec()
    grid = TimeGrid.for_cycles(pulse.omega0_ev, cycles, steps_per_cycle)
    h0 = assemble_hamiltonian(k, d, spec, 0.0)
    energy, psi0 = ground_state(h0, LanczosConfig(seed=3))
    driven = evolve_driven(psi0, k, d, spec,
                           lambda t: reference_phase(t, pulse), grid)
    check("norm_conservation_driven",
          float(np.max(np.abs(driven.norm - 1.0))), 1e-8)
    tracked = evolve_tracking(psi0, k, d, spec,
                              lambda t: 0.05 * np.sin(pulse.omega0_ev * t) ** 3,
                              grid, tcfg)
    check("norm_conservation_tracking",
          float(np.max(np.abs(tracked.norm - 1.0))), 1e-8)
    check("tracking_fidelity",
          np.max(np.abs(tracked.current
                        - 0.05 * np.sin(pulse.omega0_ev * tracked.t) ** 3))
          / 0.05, 1e-6)
    return results


def main_check(steps_per_cycle: int = 2000) -> int:
    results = run_checks(steps_per_cycle=steps_per_cycle)
    failed = 0
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name:36s} {detail}")
        failed += not ok
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0

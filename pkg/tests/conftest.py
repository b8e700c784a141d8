"""Shared fixtures and independent brute-force oracles.

The oracle operators here are built from scratch over the full 2L-mode
Jordan-Wigner string (one global fermionic ordering, no sector
factorization), so they share no code path with the package's kron-based
construction.
"""

from itertools import combinations

import numpy as np
import pytest

from fhtrack.groundstate import LanczosConfig, ground_state
from fhtrack.lattice import (LatticeSpec, assemble_hamiltonian, build_basis,
                             build_doublon_operator, build_hop_forward)

T0 = 0.52


def oracle_basis_states(spec):
    """(up, down) bitstring pairs in the package's up-major sorted order."""
    ups = sorted(sum(1 << s for s in occ)
                 for occ in combinations(range(spec.L), spec.n_up))
    downs = sorted(sum(1 << s for s in occ)
                   for occ in combinations(range(spec.L), spec.n_down))
    return [(u, d) for u in ups for d in downs]


def _annihilate(n, mode):
    if not (n >> mode) & 1:
        return None, 0
    sign = -1 if bin(n & ((1 << mode) - 1)).count("1") % 2 else 1
    return n & ~(1 << mode), sign


def _create(n, mode):
    if (n >> mode) & 1:
        return None, 0
    sign = -1 if bin(n & ((1 << mode) - 1)).count("1") % 2 else 1
    return n | (1 << mode), sign


def oracle_hop_forward(spec):
    """Dense K = sum_{j,sigma} c^dag_{j,s} c_{j+1,s} via the global JW string.

    Modes 0..L-1 are spin-up sites, modes L..2L-1 spin-down sites; the full
    occupation integer is up | (down << L).
    """
    states = oracle_basis_states(spec)
    index = {u | (d << spec.L): i for i, (u, d) in enumerate(states)}
    dim = len(states)
    mat = np.zeros((dim, dim))
    links = range(spec.L) if spec.periodic else range(spec.L - 1)
    for col, (u, d) in enumerate(states):
        full = u | (d << spec.L)
        for sigma in (0, 1):
            for j in links:
                src = (j + 1) % spec.L + sigma * spec.L
                dst = j + sigma * spec.L
                mid, s1 = _annihilate(full, src)
                if mid is None:
                    continue
                new, s2 = _create(mid, dst)
                if new is None:
                    continue
                mat[index[new], col] += s1 * s2
    return mat


def oracle_doublon_diagonal(spec):
    return np.array([bin(u & d).count("1")
                     for u, d in oracle_basis_states(spec)], dtype=float)


@pytest.fixture(scope="session")
def spec6():
    return LatticeSpec(L=6, n_up=3, n_down=3, t0=T0, u=4 * T0, a=4.0)


@pytest.fixture(scope="session")
def spec6_free():
    return LatticeSpec(L=6, n_up=3, n_down=3, t0=T0, u=0.0, a=4.0)


@pytest.fixture(scope="session")
def basis6(spec6):
    return build_basis(spec6)


@pytest.fixture(scope="session")
def k6(basis6, spec6):
    return build_hop_forward(basis6, spec6)


@pytest.fixture(scope="session")
def d6(basis6, spec6):
    return build_doublon_operator(basis6, spec6)


@pytest.fixture(scope="session")
def ground6(k6, d6, spec6):
    h = assemble_hamiltonian(k6, d6, spec6, 0.0)
    return ground_state(h, LanczosConfig(seed=11))


@pytest.fixture(scope="session")
def ground6_free(k6, d6, spec6_free):
    h = assemble_hamiltonian(k6, d6, spec6_free, 0.0)
    return ground_state(h, LanczosConfig(seed=11))


@pytest.fixture
def rng():
    return np.random.default_rng(20260825)


def random_state(dim, rng, real=False):
    psi = rng.standard_normal(dim)
    if not real:
        psi = psi + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)

"""Fock basis and sparse many-body operators for the 1D Hubbard chain.

Bitstring convention: site 0 is the least significant bit of a per-spin
occupation integer.  The global Jordan-Wigner ordering places all up modes
before all down modes, so intra-spin hops only ever cross same-spin modes
and the two spin sectors factorize into a Kronecker product.  Fermionic
signs are popcounts of the occupied modes between the two acted sites.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations
from math import comb

import numpy as np
from scipy import sparse

# Entries below this magnitude are dropped from assembled operators.
MATRIX_ELEMENT_CUTOFF = 1e-15


@dataclass(frozen=True)
class LatticeSpec:
    """Chain geometry, filling and Hamiltonian parameters.

    t0 and u are in eV, the lattice constant a in Angstrom.
    """

    L: int
    n_up: int
    n_down: int
    t0: float = 0.52
    u: float = 0.0
    a: float = 4.0
    periodic: bool = True

    def __post_init__(self):
        if self.L < 2:
            raise ValueError(f"need at least 2 sites, got L={self.L}")
        if not (0 <= self.n_up <= self.L and 0 <= self.n_down <= self.L):
            raise ValueError(
                f"particle counts ({self.n_up}, {self.n_down}) must lie in [0, {self.L}]")
        if self.t0 <= 0:
            raise ValueError("hopping energy t0 must be positive")
        if self.u < 0:
            raise ValueError("on-site repulsion u must be non-negative")
        if self.a <= 0:
            raise ValueError("lattice constant a must be positive")


@dataclass(frozen=True)
class FockBasis:
    """Enumerated spin-resolved occupation bitstrings with index maps.

    The global index of (up string i, down string j) is i * len(down) + j;
    both sector lists are sorted ascending, so the ordering is deterministic.
    """

    L: int
    up_states: np.ndarray
    down_states: np.ndarray
    up_index: dict = field(repr=False)
    down_index: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.up_states) * len(self.down_states)

    def index(self, up: int, down: int) -> int:
        return self.up_index[up] * len(self.down_states) + self.down_index[down]


def _sector_states(L: int, n: int) -> np.ndarray:
    states = []
    for occ in combinations(range(L), n):
        s = 0
        for site in occ:
            s |= 1 << site
        states.append(s)
    return np.array(sorted(states), dtype=np.int64)


def build_basis(spec: LatticeSpec) -> FockBasis:
    """Enumerate the fixed-(n_up, n_down) Fock basis of an L-site chain."""
    up = _sector_states(spec.L, spec.n_up)
    down = _sector_states(spec.L, spec.n_down)
    basis = FockBasis(
        L=spec.L,
        up_states=up,
        down_states=down,
        up_index={int(s): i for i, s in enumerate(up)},
        down_index={int(s): i for i, s in enumerate(down)},
    )
    assert basis.dim == comb(spec.L, spec.n_up) * comb(spec.L, spec.n_down)
    return basis


def _popcount(values: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        return np.bitwise_count(values).astype(np.int64)
    return np.array([int(v).bit_count() for v in values.ravel()],
                    dtype=np.int64).reshape(values.shape)


def _jw_sign(state: int, site: int) -> int:
    """(-1)^(number of occupied modes below ``site``) within one spin string."""
    return -1 if int(state & ((1 << site) - 1)).bit_count() % 2 else 1


def _sector_forward_hops(states: np.ndarray, index: dict, L: int,
                         periodic: bool) -> sparse.csr_matrix:
    """Single-spin kernel sum_j c^dag_j c_{j+1} with Jordan-Wigner signs."""
    n = len(states)
    rows, cols, vals = [], [], []
    links = range(L) if periodic else range(L - 1)
    for col, s in enumerate(states):
        s = int(s)
        for j in links:
            src = (j + 1) % L
            if not (s >> src) & 1 or (s >> j) & 1:
                continue
            sign = _jw_sign(s, src)
            mid = s & ~(1 << src)
            sign *= _jw_sign(mid, j)
            rows.append(index[mid | (1 << j)])
            cols.append(col)
            vals.append(float(sign))
    mat = sparse.csr_matrix((vals, (rows, cols)), shape=(n, n), dtype=np.float64)
    mat.sum_duplicates()
    return mat


def build_hop_forward(basis: FockBasis, spec: LatticeSpec) -> sparse.csr_matrix:
    """Phase-free forward-hopping kernel K = sum_{j,sigma} c^dag_{j,s} c_{j+1,s}.

    The conjugate transpose of K is the reverse-hopping operator.  On a
    periodic 2-site chain the j=0 and j=1 links coincide and the single bond
    is counted twice; this matches the literal link sum and is flagged.
    """
    if spec.L == 2 and spec.periodic:
        warnings.warn("periodic L=2 chain double-counts its single link",
                      stacklevel=2)
    hop_up = _sector_forward_hops(basis.up_states, basis.up_index,
                                  spec.L, spec.periodic)
    hop_down = _sector_forward_hops(basis.down_states, basis.down_index,
                                    spec.L, spec.periodic)
    eye_up = sparse.identity(len(basis.up_states), format="csr")
    eye_down = sparse.identity(len(basis.down_states), format="csr")
    k = (sparse.kron(hop_up, eye_down, format="csr")
         + sparse.kron(eye_up, hop_down, format="csr"))
    k.sum_duplicates()
    return k


def build_doublon_operator(basis: FockBasis, spec: LatticeSpec) -> sparse.csr_matrix:
    """Diagonal operator counting doubly occupied sites (no u prefactor)."""
    shared = basis.up_states[:, None] & basis.down_states[None, :]
    diag = _popcount(shared).astype(np.float64).ravel()
    return sparse.diags(diag, format="csr")


def assemble_hamiltonian(k: sparse.csr_matrix, d_op: sparse.csr_matrix,
                         spec: LatticeSpec, phi: float) -> sparse.csr_matrix:
    """H(phi) = -t0 (e^{-i phi} K + e^{+i phi} K^dag) + u * D."""
    if not np.isfinite(phi):
        raise ValueError(f"Peierls phase must be finite, got {phi!r}")
    h = (-spec.t0 * np.exp(-1j * phi)) * k \
        + (-spec.t0 * np.exp(1j * phi)) * k.conj().T \
        + spec.u * d_op.astype(np.complex128)
    h = h.tocsr()
    h.data[np.abs(h.data) < MATRIX_ELEMENT_CUTOFF] = 0.0
    h.eliminate_zeros()
    return h

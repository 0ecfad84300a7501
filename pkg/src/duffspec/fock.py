"""Truncated Fock-space operators, Hamiltonian assembly, and entropy functionals.

All rates are taken dimensionless (typically scaled by the anharmonicity);
the circuit module is the only place physical units enter.  Operators and
density matrices are plain complex ndarrays; truncation dimension is the
array size.
"""

import math
from dataclasses import dataclass

import numpy as np

# Numerical tolerances shared across the package.
TOL_HERM = 1e-9
TOL_TRACE = 1e-9
TOL_PSD = 1e-8


@dataclass(frozen=True)
class ModelParams:
    """Rotating-frame rates of the driven anharmonic oscillator.

    delta    detuning of the oscillator from the drive (resonator minus drive)
    chi      anharmonicity (Kerr) coefficient, >= 0
    epsilon  drive amplitude, >= 0
    gamma    single-photon decay rate, >= 0

    Operations that require dissipation or a nonzero Kerr term enforce the
    strict inequality themselves; keeping zero legal here lets limiting
    cases (undriven, undamped, or linear oscillators) be constructed.
    """

    delta: float
    chi: float
    epsilon: float
    gamma: float

    def __post_init__(self):
        for name in ("delta", "chi", "epsilon", "gamma"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.chi < 0:
            raise ValueError(f"chi must be >= 0, got {self.chi}")
        if self.epsilon < 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")


def _check_dim(dim):
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise ValueError(f"truncation dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation(dim):
    """Annihilation operator a on a dim-level truncation: a[n, n+1] = sqrt(n+1)."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation(dim):
    """Creation operator, adjoint of ``annihilation``."""
    return annihilation(dim).conj().T


def number_operator(dim):
    """Photon-number operator a'a (diagonal)."""
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def fock_state(n, dim):
    """Number state |n> as a column vector."""
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise ValueError(f"level {n} outside truncation 0..{dim - 1}")
    vec = np.zeros(dim, dtype=complex)
    vec[n] = 1.0
    return vec


def fock_projector(n, dim):
    """Density matrix of the number state |n>."""
    vec = fock_state(n, dim)
    return np.outer(vec, vec.conj())


def build_hamiltonian(params, dim):
    """Rotating-frame Hamiltonian on a dim-level truncation.

    H = delta a'a + chi a'a'aa + epsilon (a + a'); the quartic term is
    diagonal with entries chi n(n-1).  Built symmetrically, so hermiticity
    is exact in floating point.
    """
    dim = _check_dim(dim)
    n = np.arange(dim, dtype=float)
    h = np.diag(params.delta * n + params.chi * n * (n - 1.0)).astype(complex)
    drive = params.epsilon * np.sqrt(np.arange(1, dim, dtype=float))
    h += np.diag(drive, 1) + np.diag(drive, -1)
    return h


def expectation(op, rho):
    """Tr(op rho) for a dim-matched operator and density matrix."""
    op = np.asarray(op)
    rho = np.asarray(rho)
    if op.shape != rho.shape or op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise ValueError(f"shape mismatch: operator {op.shape} vs state {rho.shape}")
    # Tr(AB) = sum_ij A_ij B_ji without forming the product.
    return complex(np.sum(op * rho.T))


def validate_density_matrix(rho, herm_tol=TOL_HERM, trace_tol=TOL_TRACE, psd_tol=TOL_PSD):
    """Raise ValueError unless rho is Hermitian, unit-trace, and PSD within tolerance."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"density matrix must be square, got shape {rho.shape}")
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho'| = {herm_dev:.3e} > {herm_tol:.1e}")
    trace_dev = abs(np.trace(rho) - 1.0)
    if trace_dev > trace_tol:
        raise ValueError(f"trace deviates from 1 by {trace_dev:.3e} > {trace_tol:.1e}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    if w.min() < -psd_tol:
        raise ValueError(f"negative eigenvalue {w.min():.3e} below -{psd_tol:.1e}")
    return rho


def von_neumann_entropy(rho, herm_tol=TOL_HERM, clamp_tol=TOL_PSD):
    """Von Neumann entropy of rho in bits.

    Eigenvalues below ``clamp_tol`` are clamped to zero before taking the
    log, which regularizes the truncation tail.
    """
    rho = np.asarray(rho)
    herm_dev = np.max(np.abs(rho - rho.conj().T))
    if herm_dev > herm_tol:
        raise ValueError(f"not Hermitian: max |rho - rho'| = {herm_dev:.3e} > {herm_tol:.1e}")
    w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    w = w[w > clamp_tol]
    if w.size == 0:
        return 0.0
    return float(-np.sum(w * np.log2(w)))


def binary_entropy(x):
    """Entropy of a two-outcome distribution {x, 1-x} in bits."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy argument must lie in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return float(-x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x))

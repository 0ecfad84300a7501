"""Lindblad superoperator assembly, steady states, and low-lying spectrum.

Density matrices are vectorized row-major (C order), so the master
equation drho/dt = -i[H, rho] + (gamma/2)(2 a rho a' - a'a rho - rho a'a)
becomes dvec/dt = S vec with

    S = -i (H (x) I - I (x) H^T) + gamma (a (x) a*) - (gamma/2)(N (x) I + I (x) N)

built from sparse Kronecker products; every row has at most 7 nonzeros.
The steady state is the kernel of S, solved by replacing one redundant
row with the trace constraint and factorizing; the slow spectrum comes
from dense eigendecomposition at small truncation and shift-inverted
Arnoldi iteration above it.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import eig as dense_eig

from .fock import TOL_HERM, TOL_PSD, TOL_TRACE, build_hamiltonian, validate_density_matrix
from .semiclassical import classical_steady_states

TOL_EIG = 1e-8
TOL_RESID = 1e-10
TOL_BOUNDARY = 1e-7

# Largest truncation for which the full superoperator is eigendecomposed
# densely; beyond this the Arnoldi path takes over.
DENSE_EIG_MAX_DIM = 32


class DegenerateKernelError(RuntimeError):
    """The superoperator kernel is not one-dimensional at this tolerance."""


class EigenSolverError(RuntimeError):
    """The iterative eigensolver failed to converge."""


class TruncationLimitError(RuntimeError):
    """Adaptive truncation exceeded the dimension cap."""


def _superoperator_dim(S):
    d = math.isqrt(S.shape[0])
    if d * d != S.shape[0] or S.shape[0] != S.shape[1]:
        raise ValueError(f"superoperator must be d^2 x d^2, got shape {S.shape}")
    return d


def build_superoperator(params, dim):
    """Sparse master-equation generator on a dim-level truncation (CSR).

    Row (k, l), column (i, j) indices follow row-major vectorization.
    The assembled matrix annihilates the trace functional exactly: the
    identity's vectorization is a left null vector in floating point.
    """
    if dim < 2:
        raise ValueError(f"truncation dimension must be >= 2, got {dim}")
    h = sp.csr_matrix(build_hamiltonian(params, dim))
    a = sp.diags(np.sqrt(np.arange(1, dim, dtype=float)), 1, format="csr").astype(complex)
    n = sp.diags(np.arange(dim, dtype=float), 0, format="csr").astype(complex)
    eye = sp.identity(dim, dtype=complex, format="csr")
    g = params.gamma
    S = (
        -1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
        + g * sp.kron(a, a.conjugate())
        - 0.5 * g * (sp.kron(n, eye) + sp.kron(eye, n))
    )
    return S.tocsr()


def _trace_replaced_system(S):
    d = _superoperator_dim(S)
    A = S.tolil(copy=True)
    A[0, :] = 0.0
    for i in range(d):
        A[0, i * d + i] = 1.0
    b = np.zeros(d * d, dtype=complex)
    b[0] = 1.0
    return A.tocsc(), b


def _diagnose_kernel(S):
    """Check kernel uniqueness; raise DegenerateKernelError if it fails."""
    d = _superoperator_dim(S)
    if d <= DENSE_EIG_MAX_DIM:
        w = np.linalg.eigvals(S.toarray())
    else:
        try:
            w = spla.eigs(S.tocsc(), k=4, sigma=_arnoldi_shift(S), return_eigenvectors=False)
        except Exception as exc:  # pragma: no cover - diagnostic path
            raise DegenerateKernelError(f"kernel diagnosis failed: {exc}") from exc
    re_sorted = np.sort(np.abs(np.real(w)))
    if len(re_sorted) > 1 and re_sorted[1] < TOL_EIG * 1e3:
        raise DegenerateKernelError(
            f"second-smallest |Re eigenvalue| = {re_sorted[1]:.3e}; steady state is not unique"
        )


def steady_state(S):
    """Unique steady state of the generator S as a density matrix.

    One redundant row of the singular system S x = 0 is replaced by the
    trace constraint Tr rho = 1 and the result is solved by sparse LU; a
    dense SVD null-space solve is the fallback.  The returned matrix is
    Hermitized, renormalized, and validated (residual < 1e-10, PSD within
    tolerance); a non-unique kernel raises DegenerateKernelError.
    """
    d = _superoperator_dim(S)
    A, b = _trace_replaced_system(S)
    x = None
    try:
        lu = spla.splu(A)
        x = lu.solve(b)
    except RuntimeError:
        x = None
    if x is None or not np.all(np.isfinite(x)):
        x = _dense_nullspace(S)
    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    trace = np.trace(rho).real
    if abs(trace) < 1e-12:
        _diagnose_kernel(S)
        raise DegenerateKernelError("steady-state solve produced a traceless kernel vector")
    rho /= trace
    residual = np.max(np.abs(S @ rho.reshape(-1)))
    if residual > TOL_RESID:
        x = _dense_nullspace(S)
        rho = x.reshape(d, d)
        rho = 0.5 * (rho + rho.conj().T)
        rho /= np.trace(rho).real
        residual = np.max(np.abs(S @ rho.reshape(-1)))
        if residual > TOL_RESID:
            _diagnose_kernel(S)
            raise DegenerateKernelError(
                f"steady-state residual {residual:.3e} exceeds {TOL_RESID:.1e}"
            )
    try:
        validate_density_matrix(rho, TOL_HERM, TOL_TRACE, TOL_PSD)
    except ValueError:
        _diagnose_kernel(S)
        raise
    return rho


def _dense_nullspace(S):
    """Kernel vector of S via dense SVD (fallback for ill-conditioned LU)."""
    d = _superoperator_dim(S)
    if d > 64:
        raise DegenerateKernelError("dense null-space fallback limited to dim <= 64")
    _, sv, vh = np.linalg.svd(S.toarray())
    if sv.size > 1 and sv[-2] < 1e-10 * max(1.0, sv[0]):
        raise DegenerateKernelError("superoperator kernel is multi-dimensional")
    return vh[-1].conj()


def steady_state_residual(S, rho):
    """Max-norm residual of rho against the generator S."""
    return float(np.max(np.abs(S @ np.asarray(rho).reshape(-1))))


def adaptive_start_dim(params):
    """Initial truncation from the largest classical branch amplitude."""
    branches = classical_steady_states(params)
    nbar = max(branches.photon_numbers)
    return max(10, math.ceil(4.0 * (nbar + 1.0)))


def solve_steady_state_adaptive(params, dim=None, top_pop_tol=1e-8, max_dim=512):
    """Steady state with automatic truncation control.

    Starting from a semiclassical estimate, the truncation doubles until
    the combined population of the top two levels drops below
    ``top_pop_tol``.  Passing ``dim`` skips adaptation and solves at that
    fixed size.  Returns (rho, dim, residual).
    """
    if params.gamma <= 0:
        raise ValueError("steady state requires gamma > 0")
    if dim is not None:
        S = build_superoperator(params, dim)
        rho = steady_state(S)
        return rho, dim, steady_state_residual(S, rho)
    d = adaptive_start_dim(params)
    while True:
        S = build_superoperator(params, d)
        rho = steady_state(S)
        tail = float(rho[d - 1, d - 1].real + rho[d - 2, d - 2].real)
        if tail < top_pop_tol:
            return rho, d, steady_state_residual(S, rho)
        if 2 * d > max_dim:
            raise TruncationLimitError(
                f"top-level population {tail:.3e} still above {top_pop_tol:.1e} at dim {d}"
            )
        d *= 2


@dataclass(frozen=True)
class SpectrumSlice:
    """Slow (largest real part) eigenvalues of a generator and eigenmatrices.

    eigenvalues      complex array, sorted by descending real part
    eigenmatrices    matching right eigenmatrices; the stationary one has
                     unit trace, real-eigenvalue ones are Hermitian,
                     traceless, unit Frobenius norm with positive leading
                     diagonal entry, and complex-pair partners are exact
                     adjoints of each other
    dim              truncation the matrices live on
    """

    eigenvalues: np.ndarray
    eigenmatrices: tuple
    dim: int


def _arnoldi_shift(S):
    # Place the shift just right of the spectrum; the least-negative decay
    # scale on the diagonal sets the distance.
    re = -S.diagonal().real
    re = re[re > 1e-14]
    scale = re.min() if re.size else 1.0
    return 0.3 * scale


def _fix_phase_hermitian(m):
    """Rotate a real-eigenvalue eigenmatrix onto its Hermitian representative."""
    idx = np.unravel_index(np.argmax(np.abs(m)), m.shape)
    ratio = m.conj().T[idx] / m[idx]
    phase = np.exp(0.5j * np.angle(ratio))
    mh = phase * m
    return 0.5 * (mh + mh.conj().T)


def _leading_diagonal_sign(m):
    diag = np.real(np.diag(m))
    scale = np.max(np.abs(m))
    for value in diag:
        if abs(value) > 1e-10 * scale:
            return 1.0 if value > 0 else -1.0
    flat = m.reshape(-1)
    for value in flat:
        if abs(value) > 1e-10 * scale:
            return 1.0 if value.real > 0 else -1.0
    return 1.0


def low_lying_spectrum(S, count=6):
    """The ``count`` eigenvalues of S with largest real part, plus eigenmatrices.

    Dense eigendecomposition up to DENSE_EIG_MAX_DIM, shift-inverted
    Arnoldi beyond it.  If the cutoff would split a complex-conjugate
    pair, the partner is included as well (so the result can hold
    count + 1 entries).
    """
    d = _superoperator_dim(S)
    if count < 1:
        raise ValueError("count must be >= 1")
    if d <= DENSE_EIG_MAX_DIM:
        w, v = dense_eig(S.toarray())
    else:
        k = min(count + 6, d * d - 2)
        try:
            w, v = spla.eigs(S.tocsc(), k=k, sigma=_arnoldi_shift(S), maxiter=5000)
        except spla.ArpackNoConvergence as exc:
            raise EigenSolverError(f"Arnoldi iteration did not converge: {exc}") from exc
    order = np.lexsort((np.sign(w.imag), -np.abs(w.imag), -w.real))
    w = w[order]
    v = v[:, order]
    n_keep = min(count, w.size)
    # keep conjugate partners together across the cutoff
    if n_keep < w.size:
        last = w[n_keep - 1]
        if abs(last.imag) > TOL_EIG and abs(w[n_keep] - last.conjugate()) < 1e-6 * max(1.0, abs(last)):
            n_keep += 1
    w = w[:n_keep]
    mats = [v[:, i].reshape(d, d).copy() for i in range(n_keep)]

    scale = max(1.0, float(np.max(np.abs(w))))
    if abs(w[0]) > TOL_EIG * scale:
        raise DegenerateKernelError(
            f"largest-real-part eigenvalue {w[0]} is not the stationary zero mode"
        )
    if w.size > 1 and abs(w[1].real) < TOL_EIG * 1e3:
        raise DegenerateKernelError(
            f"second eigenvalue {w[1]} too close to zero; steady state is not unique"
        )

    out = []
    paired = {}
    for i, lam in enumerate(w):
        m = mats[i]
        if i == 0:
            m = 0.5 * (m + m.conj().T)
            m = m / np.trace(m)
            out.append(m)
            continue
        if abs(lam.imag) <= TOL_EIG * scale:
            m = _fix_phase_hermitian(m)
            m = m - (np.trace(m) / d) * np.eye(d)
            m = m / np.linalg.norm(m)
            m = _leading_diagonal_sign(m) * m
            out.append(m)
            continue
        if i in paired:
            out.append(paired[i])
            continue
        # normalize this member, adjoint-pair its partner
        j = np.argmax(np.abs(m))
        m = m / np.linalg.norm(m)
        m = m * np.exp(-1j * np.angle(m.reshape(-1)[j]))
        out.append(m)
        for i2 in range(i + 1, w.size):
            if abs(w[i2] - lam.conjugate()) < 1e-6 * max(1.0, abs(lam)):
                paired[i2] = m.conj().T
                break
    return SpectrumSlice(eigenvalues=w, eigenmatrices=tuple(out), dim=d)


@dataclass(frozen=True)
class MetastablePair:
    """Extreme metastable states on the positivity boundary.

    rho_plus/rho_minus are rho0 + beta_{+/-} drho1 at the largest
    coefficients keeping the matrix positive semidefinite; their smallest
    eigenvalues lie in [-TOL_PSD, TOL_BOUNDARY].  ``mixing_fraction`` is
    the weight x0 with rho0 = x0 rho_plus + (1 - x0) rho_minus.
    """

    rho_plus: np.ndarray
    rho_minus: np.ndarray
    beta_plus: float
    beta_minus: float

    @property
    def mixing_fraction(self):
        return -self.beta_minus / (self.beta_plus - self.beta_minus)


def _min_eig(rho0, drho1, beta):
    return float(np.linalg.eigvalsh(rho0 + beta * drho1)[0])


def _boundary_beta(rho0, drho1, direction):
    """Largest |beta| along +-direction keeping rho0 + beta drho1 PSD."""
    scale = 1.0 / float(np.linalg.norm(drho1, 2))
    step = 0.5 * scale
    hi = None
    b = step
    for _ in range(80):
        if _min_eig(rho0, drho1, direction * b) < -10.0 * TOL_BOUNDARY:
            hi = b
            break
        b *= 2.0
    if hi is None:
        raise ValueError(
            "no positivity boundary found along this direction; "
            "the perturbation must be indefinite and traceless"
        )
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _min_eig(rho0, drho1, direction * mid) >= -TOL_PSD:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, hi):
            break
    g = _min_eig(rho0, drho1, direction * lo)
    if not (-TOL_PSD <= g <= TOL_BOUNDARY):
        raise RuntimeError(f"boundary bisection left min eigenvalue at {g:.3e}")
    return direction * lo


def metastable_extremes(rho0, drho1):
    """Extreme mixtures rho0 + beta drho1 on the positivity boundary.

    rho0 must be a valid density matrix and drho1 a Hermitian traceless
    direction (the slowest decaying eigenmatrix).  Returns the pair at
    beta_minus < 0 < beta_plus located by bisection on the smallest
    eigenvalue; rescaling drho1 rescales the betas but leaves the end
    states invariant.
    """
    rho0 = np.asarray(rho0, dtype=complex)
    drho1 = np.asarray(drho1, dtype=complex)
    validate_density_matrix(rho0)
    if drho1.shape != rho0.shape:
        raise ValueError(f"shape mismatch: {drho1.shape} vs {rho0.shape}")
    herm_dev = np.max(np.abs(drho1 - drho1.conj().T))
    norm = np.linalg.norm(drho1)
    if norm == 0:
        raise ValueError("perturbation direction is zero")
    if herm_dev > TOL_HERM * max(1.0, norm):
        raise ValueError(f"perturbation not Hermitian: deviation {herm_dev:.3e}")
    if abs(np.trace(drho1)) > TOL_TRACE * max(1.0, norm):
        raise ValueError(f"perturbation not traceless: trace {np.trace(drho1):.3e}")

    beta_plus = _boundary_beta(rho0, drho1, +1.0)
    beta_minus = _boundary_beta(rho0, drho1, -1.0)

    def _endpoint(beta):
        rho = rho0 + beta * drho1
        rho = 0.5 * (rho + rho.conj().T)
        return rho / np.trace(rho).real

    return MetastablePair(
        rho_plus=_endpoint(beta_plus),
        rho_minus=_endpoint(beta_minus),
        beta_plus=float(beta_plus),
        beta_minus=float(beta_minus),
    )

"""Drive-perturbative expansion around the undriven damped Kerr oscillator.

With the drive switched off the generator S0 conserves the coherence
offset n = (row - column), and inside each offset sector it is upper
bidiagonal in the lower index t, so its spectrum is known in closed form:

    lambda_nq = -(q + n/2) gamma - i n delta - i n (n - 1 + 2q) chi

with right eigenmatrices supported on t <= q,

    <t+n| rho_nq |t> = (-1 - 2 i n chi / gamma)^t / ((q - t)! sqrt((t+n)! t!)),

and adjoint partners for the conjugate sectors.  Left eigenmatrices
follow from back-substitution on the same bidiagonal structure (support
t >= q) and are normalized biorthogonally.  The drive enters as a
Brillouin-Wigner series around the vacuum kernel, whose exact eigenvalue
stays zero, so the resolvent denominators are simply -lambda_nq.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .closedform import dw_response_grid
from .fock import ModelParams, annihilation, creation, fock_projector
from .lindblad import build_superoperator

_VERIFY_EDGE_WEIGHT = 1e-6
_MAX_ANALYTIC_DIM = 64


class FanoFitError(RuntimeError):
    """The Fano profile fit degenerated or failed to converge."""


class OnsetError(RuntimeError):
    """No resonance onset could be bracketed in the scanned drive range."""


def s0_eigenvalue(n, q, params):
    """Analytic eigenvalue of the undriven generator for sector (n, q)."""
    if n < 0 or q < 0:
        raise ValueError("sector indices must be >= 0")
    if params.gamma <= 0:
        raise ValueError("analytic eigensystem requires gamma > 0")
    return complex(
        -(q + 0.5 * n) * params.gamma,
        -n * params.delta - n * (n - 1 + 2 * q) * params.chi,
    )


def _sector_vectors(n, q, params, dim):
    """Right (t <= q) and left (t >= q) eigenvector entries in t-coordinates."""
    g, x = params.gamma, params.chi
    tmax = dim - 1 - n
    base = complex(-1.0, -2.0 * n * x / g)
    right = np.zeros(tmax + 1, dtype=complex)
    for t in range(q + 1):
        right[t] = base**t / (
            math.factorial(q - t) * math.sqrt(math.factorial(t + n) * math.factorial(t))
        )
    left = np.zeros(tmax + 1, dtype=complex)
    left[q] = 1.0 / right[q]
    denom = complex(g, 2.0 * n * x)
    for t in range(q + 1, tmax + 1):
        left[t] = left[t - 1] * g * math.sqrt((t + n) * t) / ((t - q) * denom)
    return right, left


@dataclass(frozen=True)
class S0Eigenpair:
    """One eigentriple of the undriven generator.

    ``conjugate`` marks the adjoint partner of sector (n, q), carrying the
    conjugate eigenvalue.  ``right`` and ``left`` are full matrices on the
    truncation; they satisfy sum(left * right) = 1 elementwise (plain, not
    conjugated, pairing).
    """

    n: int
    q: int
    conjugate: bool
    eigenvalue: complex
    right: np.ndarray
    left: np.ndarray


def s0_eigenpair(n, q, params, dim, conjugate=False):
    """Analytic eigenpair of the undriven generator on a dim-level truncation."""
    if dim > _MAX_ANALYTIC_DIM:
        raise ValueError(f"analytic eigensystem limited to dim <= {_MAX_ANALYTIC_DIM}")
    if n >= dim or q > dim - 1 - n:
        raise ValueError(f"sector (n={n}, q={q}) does not fit a dim={dim} truncation")
    if conjugate and n == 0:
        raise ValueError("offset-0 sectors are self-conjugate")
    lam = s0_eigenvalue(n, q, params)
    right_t, left_t = _sector_vectors(n, q, params, dim)
    right = np.zeros((dim, dim), dtype=complex)
    left = np.zeros((dim, dim), dtype=complex)
    for t in range(dim - n):
        right[t + n, t] = right_t[t]
        left[t + n, t] = left_t[t]
    if conjugate:
        lam = lam.conjugate()
        right = right.conj().T
        left = left.conj().T
    return S0Eigenpair(n=n, q=q, conjugate=conjugate, eigenvalue=lam, right=right, left=left)


def s0_eigensystem(params, dim, n_max, q_max):
    """All analytic eigenpairs with n <= n_max, q <= q_max, plus conjugates."""
    pairs = []
    for n in range(min(n_max, dim - 1) + 1):
        for q in range(min(q_max, dim - 1 - n) + 1):
            pairs.append(s0_eigenpair(n, q, params, dim))
            if n > 0:
                pairs.append(s0_eigenpair(n, q, params, dim, conjugate=True))
    return pairs


def verify_s0_eigenpair(pair, params):
    """Max-norm eigen-residual of an analytic pair against the assembled generator.

    Warns when the eigenmatrix carries weight above 1e-6 in the top two
    levels, where truncation would contaminate the comparison.
    """
    dim = pair.right.shape[0]
    s0 = build_superoperator(
        ModelParams(params.delta, params.chi, 0.0, params.gamma), dim
    )
    vec = pair.right.reshape(-1)
    scale = np.max(np.abs(vec))
    residual = float(np.max(np.abs(s0 @ vec - pair.eigenvalue * vec)) / scale)
    total = np.sum(np.abs(pair.right) ** 2)
    edge = (
        np.sum(np.abs(pair.right[dim - 2 :, :]) ** 2)
        + np.sum(np.abs(pair.right[: dim - 2, dim - 2 :]) ** 2)
    )
    if edge / total > _VERIFY_EDGE_WEIGHT:
        warnings.warn(
            f"eigenmatrix weight {edge / total:.2e} in the top two levels; "
            "residual is truncation-contaminated",
            RuntimeWarning,
            stacklevel=2,
        )
    return residual


def _drive_commutator(dim):
    xop = annihilation(dim) + creation(dim)

    def apply(mat):
        return -1j * (xop @ mat - mat @ xop)

    return apply


def bw_steady_state(params, order=3, dim=12):
    """Drive expansion of the steady state to the given order in epsilon.

    Expands around the vacuum kernel of the undriven generator.  Because
    the steady-state eigenvalue is exactly zero at every order, the
    expansion needs no eigenvalue corrections: each order applies the
    drive commutator and the undriven resolvent once.  Intermediate sums
    run over the complete analytic eigensystem of every reachable
    coherence sector, so the result is the exact order-by-order solution
    of the truncated problem.  The trace stays 1 exactly; corrections are
    traceless.

    A two-orders-higher term is evaluated as a convergence gauge; if it
    exceeds 10% of the kept top-order term, a divergence warning is
    issued (the series is asymptotic beyond the small-drive regime).
    """
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2, or 3, got {order}")
    if params.gamma <= 0:
        raise ValueError("drive expansion requires gamma > 0")
    if dim < order + 4:
        raise ValueError(f"dim must be >= order + 4 to hold the order-{order} support")
    probes = order + 2
    resolvent = []
    for n in range(min(probes, dim - 1) + 1):
        for q in range(dim - n):
            if n == 0 and q == 0:
                continue
            pair = s0_eigenpair(n, q, params, dim)
            resolvent.append((pair.eigenvalue, pair.right, pair.left))
            if n > 0:
                resolvent.append(
                    (pair.eigenvalue.conjugate(), pair.right.conj().T, pair.left.conj().T)
                )
    apply_v = _drive_commutator(dim)
    terms = [fock_projector(0, dim)]
    for _ in range(probes):
        driven = apply_v(terms[-1])
        nxt = np.zeros((dim, dim), dtype=complex)
        for lam, right, left in resolvent:
            coeff = np.sum(left * driven) / (-lam)
            if coeff != 0.0:
                nxt = nxt + coeff * right
        terms.append(nxt)
    e = params.epsilon
    rho = terms[0].copy()
    for k in range(1, order + 1):
        rho += (e**k) * terms[k]
    gauge = (e ** (order + 2)) * np.linalg.norm(terms[order + 2])
    kept = (e**order) * np.linalg.norm(terms[order])
    if kept > 0 and gauge > 0.1 * kept:
        warnings.warn(
            f"order-{order + 2} term is {gauge / kept:.2f} of the kept top order; "
            "the drive expansion is outside its convergence regime",
            RuntimeWarning,
            stacklevel=2,
        )
    return rho


def response_series(params):
    """Steady-state amplitude through third order in the drive.

        <a> = 2 eps / (-2 delta + i gamma)
              + 32 chi eps^3 / [(2 delta - i gamma)^2 (2 chi + 2 delta - i gamma) (2 delta + i gamma)]

    The linear term is the Lorentzian response; the cubic one carries the
    anharmonic pole at 2 delta + 2 chi = 0.  At chi = 0 the response is the
    pure Lorentzian at every drive.
    """
    d, x, e, g = params.delta, params.chi, params.epsilon, params.gamma
    a = complex(2.0 * d, -g)
    linear = -2.0 * e / a
    cubic = 32.0 * x * e**3 / (a * a * complex(2.0 * x + 2.0 * d, -g) * a.conjugate())
    return linear + cubic


def fano_q(params):
    """Asymmetry parameter of the two-photon resonance line.

        q = -2 chi / (sqrt(2 chi^2 + gamma^2) - gamma)

    Approaches -sqrt(2) for gamma << chi.  Requires chi > 0 and gamma > 0.
    """
    if params.chi <= 0 or params.gamma <= 0:
        raise ValueError("fano asymmetry requires chi > 0 and gamma > 0")
    x, g = params.chi, params.gamma
    return -2.0 * x / (math.sqrt(2.0 * x * x + g * g) - g)


@dataclass(frozen=True)
class FanoFit:
    """Least-squares Fano profile fit over a detuning window.

    Model: |a|(delta) = background + amplitude * (x - q)^2 / (x^2 + 1)
    with x = (delta - center) / width; the background is taken locally
    constant over the window.
    """

    background: float
    amplitude: float
    center: float
    width: float
    q: float
    residual_rms: float


def _fano_model(theta, deltas, background_order=0):
    nbg = background_order + 1
    amp, center, width, q = theta[nbg:]
    bg = np.polyval(theta[:nbg], deltas - center)
    x = (deltas - center) / width
    return bg + amp * (x - q) ** 2 / (x**2 + 1.0)


def fano_fit(deltas, magnitudes, window=None, residual_frac=0.05, background_order=0):
    """Fit a Fano profile to a resonance line |a|(delta).

    ``window`` restricts the fit to deltas in [lo, hi]; at least 50
    samples must remain and the window should bracket exactly one
    resonance.  ``background_order`` > 0 replaces the locally constant
    background with a polynomial in (delta - center), needed when the
    off-resonant response varies across the window by as much as the
    feature itself.  Raises FanoFitError when the optimizer fails, the
    profile degenerates (|q| running away, as for a symmetric Lorentzian
    line), or the residual exceeds ``residual_frac`` of the line
    amplitude.
    """
    deltas = np.asarray(deltas, dtype=float)
    mags = np.asarray(magnitudes, dtype=float)
    if deltas.shape != mags.shape or deltas.ndim != 1:
        raise ValueError("need matching 1-D delta and magnitude arrays")
    if window is not None:
        keep = (deltas >= window[0]) & (deltas <= window[1])
        deltas, mags = deltas[keep], mags[keep]
    if deltas.size < 50:
        raise ValueError(f"need >= 50 samples in the window, got {deltas.size}")
    span = float(mags.max() - mags.min())
    if span == 0.0:
        raise FanoFitError("line is flat over the window")
    # Seed from the dip/peak pair: the profile minimum sits at x = q with
    # value = background, the maximum at x = -1/q, and their separation is
    # |q + 1/q| >= 2 widths.  Multi-start over width and q scales keeps the
    # local optimizer off the sloped-background saddle.
    i_min, i_max = int(np.argmin(mags)), int(np.argmax(mags))
    center0 = 0.5 * (deltas[i_min] + deltas[i_max])
    width0 = max(abs(deltas[i_max] - deltas[i_min]) / 2.0, 2.0 * abs(deltas[1] - deltas[0]))
    q_sign = -1.0 if deltas[i_min] < deltas[i_max] else 1.0
    bg0 = [0.0] * background_order + [float(mags.min())]
    best = None
    for w_scale in (1.0, 0.5, 2.0):
        for q_mag in (1.0, 1.5, 2.5, 0.5):
            q0 = q_sign * q_mag
            amp0 = span / (1.0 + q0**2)
            theta0 = np.array(bg0 + [amp0, center0, width0 * w_scale, q0])
            result = least_squares(
                lambda th: _fano_model(th, deltas, background_order) - mags,
                theta0,
                method="lm",
                max_nfev=5000,
            )
            if result.success and (best is None or result.cost < best.cost):
                best = result
    if best is None:
        raise FanoFitError("fit did not converge from any starting point")
    result = best
    bg = result.x[background_order]
    amp, center, width, q = result.x[background_order + 1 :]
    if width < 0:
        width, q = -width, -q
    # The family is doubly parameterized: amp*f(x; q) equals
    # (-amp*q^2)*f(x; -1/q) + amp*(1+q^2).  Canonicalize to amp > 0.
    if amp < 0 and q != 0:
        bg = bg + amp * (1.0 + q**2)
        amp, q = -amp * q**2, -1.0 / q
    window_span = deltas[-1] - deltas[0]
    if abs(q) > 50.0 or amp <= 0.0 or width <= 0.0 or width > 10.0 * window_span:
        raise FanoFitError(
            f"degenerate profile (q={q:.3g}, amplitude={amp:.3g}, width={width:.3g}); "
            "the window may hold no asymmetric resonance"
        )
    rms = float(np.sqrt(np.mean(result.fun**2)))
    if rms > residual_frac * span:
        raise FanoFitError(
            f"residual rms {rms:.3e} exceeds {residual_frac:.0%} of the line amplitude {span:.3e}"
        )
    return FanoFit(
        background=float(bg),
        amplitude=float(amp),
        center=float(center),
        width=float(width),
        q=float(q),
        residual_rms=rms,
    )


def _has_stationary_point(params_gamma, chi, n, epsilon, deltas, mask):
    values, _ = dw_response_grid(deltas, np.array([epsilon]), params_gamma, chi)
    mags = np.abs(values[:, 0])
    slopes = np.diff(mags)
    signs = np.sign(slopes)
    flips = signs[:-1] * signs[1:] < 0
    return bool(np.any(flips & mask))


def onset_scan(n, gammas, chi=1.0, window_factor=10.0, samples=961):
    """Drive threshold where the n-th multiphoton line first flattens.

    For each damping rate the detuning neighborhood |delta + n chi| <
    window_factor * gamma is scanned with the closed-form response; the
    onset is the smallest drive for which |a|(delta) acquires a stationary
    point there, located by bisection in log-drive.  Returns a list of
    (gamma, epsilon_onset).  Requires gamma << chi so the line is
    spectrally resolved.
    """
    if n < 1:
        raise ValueError("line index n must be >= 1")
    out = []
    for gamma in gammas:
        if gamma <= 0 or gamma >= 0.3 * chi:
            raise ValueError(f"onset scan requires 0 < gamma << chi, got gamma={gamma}")
        w = window_factor * gamma
        deltas = np.linspace(-n * chi - 1.2 * w, -n * chi + 1.2 * w, samples)
        mid = 0.5 * (deltas[:-2] + deltas[2:])
        mask = np.abs(mid + n * chi) < w
        eps = 0.05 * chi ** (1.0 - 1.0 / n) * gamma ** (1.0 / n)

        def found(e):
            return _has_stationary_point(gamma, chi, n, e, deltas, mask)

        for _ in range(120):
            if not found(eps):
                break
            eps /= 1.25
        else:
            raise OnsetError(f"no drive below the line onset found at gamma={gamma}")
        lo = eps
        for _ in range(120):
            eps *= 1.25
            if found(eps):
                break
            lo = eps
        else:
            raise OnsetError(f"no onset found up to epsilon={eps:.3g} at gamma={gamma}")
        hi = eps
        for _ in range(40):
            mid_e = math.sqrt(lo * hi)
            if found(mid_e):
                hi = mid_e
            else:
                lo = mid_e
        out.append((float(gamma), float(math.sqrt(lo * hi))))
    return out


def onset_slope(pairs):
    """Log-log slope of epsilon_onset against gamma from onset_scan output."""
    if len(pairs) < 2:
        raise ValueError("need at least two (gamma, onset) pairs")
    gs = np.log([p[0] for p in pairs])
    es = np.log([p[1] for p in pairs])
    return float(np.polyfit(gs, es, 1)[0])

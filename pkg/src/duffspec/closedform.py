"""Closed-form steady-state response via generalized hypergeometric functions.

The driven Kerr oscillator's steady-state amplitude has an exact expression
as a ratio of 0F2 functions of z = 2 epsilon^2 / chi^2 with complex lower
parameters built from (delta, chi, gamma).  0F2 is entire in z, so the
power series always converges; the practical hazards are parameter poles
(nonpositive-integer lower parameters, only reachable at gamma = 0) and
catastrophic cancellation at large |z|, which triggers an
extended-precision re-evaluation.
"""

import numpy as np

from . import _kernels
from ._kernels import CANCEL_RATIO, SERIES_MAX_TERMS, SERIES_RTOL
from .fock import ModelParams

_MP_DPS = 50
_INT_TOL = 1e-12


class ParameterPoleError(ValueError):
    """A lower parameter of 0F2 sits on a nonpositive integer."""


class SeriesConvergenceError(RuntimeError):
    """The 0F2 series failed to converge within the term budget."""


def _check_pole(b):
    b = complex(b)
    if abs(b.imag) < _INT_TOL:
        nearest = round(b.real)
        if nearest <= 0 and abs(b.real - nearest) < _INT_TOL:
            raise ParameterPoleError(
                f"lower parameter {b} sits on the nonpositive integer {nearest}; "
                "the Pochhammer factor vanishes"
            )
    return b


def _hyp0f2_mpmath(b1, b2, z):
    import mpmath

    with mpmath.workdps(_MP_DPS):
        value = mpmath.hyper([], [mpmath.mpc(b1), mpmath.mpc(b2)], mpmath.mpc(z))
        return complex(value)


def hyper_0f2(b1, b2, z, min_terms=0):
    """0F2(; b1, b2; z) for complex parameters and argument.

    Evaluated by direct power series with incremental Pochhammer products;
    if the running partial sums exceed the final magnitude by more than
    CANCEL_RATIO the value is recomputed with 50-digit arithmetic.
    """
    b1 = _check_pole(b1)
    b2 = _check_pole(b2)
    z = complex(z)
    value, ratio, terms, _tail = _kernels.hyp0f2_series(b1, b2, z, min_terms)
    if ratio > CANCEL_RATIO:
        return _hyp0f2_mpmath(b1, b2, z)
    if terms >= SERIES_MAX_TERMS:
        raise SeriesConvergenceError(
            f"0F2 series did not converge within {SERIES_MAX_TERMS} terms "
            f"(b1={b1}, b2={b2}, z={z})"
        )
    return value


def _dw_mpmath(delta, epsilon, gamma, chi):
    z = 2.0 * epsilon * epsilon / (chi * chi)
    b_shared = complex(delta, 0.5 * gamma) / chi
    num = _hyp0f2_mpmath(complex(delta + chi, -0.5 * gamma) / chi, b_shared, z)
    den = _hyp0f2_mpmath(complex(delta, -0.5 * gamma) / chi, b_shared, z)
    return -(epsilon / complex(delta, -0.5 * gamma)) * num / den


def dw_response(params):
    """Exact steady-state amplitude <a> of the driven damped Kerr oscillator.

        <a> = -epsilon/(delta - i gamma/2)
              * 0F2(; (delta + chi - i gamma/2)/chi, (delta + i gamma/2)/chi; z)
              / 0F2(; (delta - i gamma/2)/chi, (delta + i gamma/2)/chi; z)

    with z = 2 epsilon^2 / chi^2.  The prefactor sign makes the epsilon -> 0
    limit agree with the linear response of the master equation with drive
    +epsilon (a + a'); the response is odd in epsilon exactly (z is even).

    Requires chi > 0 and gamma > 0 (at gamma = 0 the lower parameters can
    hit nonpositive integers, which raises ParameterPoleError).
    """
    if params.chi <= 0:
        raise ValueError("closed-form response requires chi > 0")
    d, x, e, g = params.delta, params.chi, params.epsilon, params.gamma
    if e == 0.0:
        return 0.0 + 0.0j
    z = 2.0 * e * e / (x * x)
    b_shared = complex(d, 0.5 * g) / x
    num = hyper_0f2(complex(d + x, -0.5 * g) / x, b_shared, z)
    den = hyper_0f2(complex(d, -0.5 * g) / x, b_shared, z)
    if den == 0.0:
        return _dw_mpmath(d, e, g, x)
    return -(e / complex(d, -0.5 * g)) * num / den


def dw_response_grid(deltas, epsilons, gamma, chi):
    """Closed-form response on the outer grid deltas x epsilons.

    Returns (values, tails) where tails holds the relative magnitude of
    the last series term per cell (0 for cells that were escalated to
    extended precision).  Cells flagged for cancellation are re-evaluated
    with mpmath, so the output is deterministic for a given grid.
    """
    if chi <= 0:
        raise ValueError("closed-form response requires chi > 0")
    if gamma <= 0:
        raise ValueError("closed-form response requires gamma > 0")
    deltas = np.ascontiguousarray(np.asarray(deltas, dtype=float))
    epsilons = np.ascontiguousarray(np.asarray(epsilons, dtype=float))
    values, flags, tails = _kernels.dw_grid(deltas, epsilons, gamma, chi)
    bad = np.argwhere(flags == 1)
    for i, j in bad:
        if epsilons[j] == 0.0:
            values[i, j] = 0.0
        else:
            values[i, j] = _dw_mpmath(deltas[i], epsilons[j], gamma, chi)
        tails[i, j] = 0.0
    return values, tails

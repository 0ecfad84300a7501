"""Hot numerical kernels: the generalized hypergeometric series 0F2.

The series is the inner loop of every closed-form sweep (tens of thousands
of evaluations per response map), so it carries a numba @njit twin.  The
pure-Python/numpy implementations below are the reference path; setting
the environment variable DUFFSPEC_DISABLE_NUMBA=1 (or running without
numba installed) selects them unchanged.  See benchmarks/bench_kernels.py
for a timing comparison of the two paths.
"""

import os

import numpy as np

SERIES_RTOL = 1e-14
SERIES_MAX_TERMS = 20000
# Ratio of peak partial-sum magnitude to final magnitude beyond which the
# caller must re-evaluate in extended precision.
CANCEL_RATIO = 1e8


def _numba_disabled():
    return os.environ.get("DUFFSPEC_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")


def _hyp0f2_series(b1, b2, z, min_terms=0):
    """Power series for 0F2(; b1, b2; z) = sum_k z^k / (k! (b1)_k (b2)_k).

    Pochhammer factors accumulate incrementally.  Stops once the relative
    term magnitude is below SERIES_RTOL *and* terms have decreased for
    three consecutive orders, which guards against stopping on a dip
    before the series peak at large |z|.  ``min_terms`` forces at least
    that many terms regardless (used to test truncation robustness).

    Returns (value, peak_ratio, terms, tail_rel):
      peak_ratio  max |partial sum| / |final sum|, the cancellation gauge
      terms       number of terms summed past the leading 1
      tail_rel    magnitude of the last term relative to the result
    """
    total = 1.0 + 0.0j
    term = 1.0 + 0.0j
    peak = 1.0
    prev_mag = 1.0
    decreasing = 0
    mag = 1.0
    k = 0
    while k < SERIES_MAX_TERMS:
        term = term * z / ((k + 1.0) * (b1 + k) * (b2 + k))
        total = total + term
        mag = abs(term)
        amag = abs(total)
        if amag > peak:
            peak = amag
        # non-strict: an exactly-zero term (z = 0, or underflow past the
        # tail) must still count as decreasing or the loop never stops
        if mag <= prev_mag:
            decreasing += 1
        else:
            decreasing = 0
        prev_mag = mag
        k += 1
        if k >= min_terms and decreasing >= 3 and mag <= SERIES_RTOL * amag:
            break
    amag = abs(total)
    if amag > 0.0:
        ratio = peak / amag
        tail = mag / amag
    else:
        ratio = np.inf
        tail = np.inf
    return total, ratio, k, tail


def _dw_cell(delta, epsilon, gamma, chi):
    """Closed-form steady-state response at one (delta, epsilon) cell.

    Returns (value, needs_escalation, tail_rel).  Escalation is flagged
    when either series shows catastrophic cancellation or fails to
    converge within the term budget.
    """
    z = 2.0 * epsilon * epsilon / (chi * chi)
    b_shared = (delta + 0.5j * gamma) / chi
    num, ratio_n, terms_n, tail_n = _hyp0f2_series((delta + chi - 0.5j * gamma) / chi, b_shared, z, 0)
    den, ratio_d, terms_d, tail_d = _hyp0f2_series((delta - 0.5j * gamma) / chi, b_shared, z, 0)
    bad = (
        ratio_n > CANCEL_RATIO
        or ratio_d > CANCEL_RATIO
        or terms_n >= SERIES_MAX_TERMS
        or terms_d >= SERIES_MAX_TERMS
        or abs(den) == 0.0
    )
    if bad:
        return 0.0 + 0.0j, True, np.inf
    value = -(epsilon / (delta - 0.5j * gamma)) * num / den
    tail = tail_n if tail_n > tail_d else tail_d
    return value, False, tail


def _dw_grid(deltas, epsilons, gamma, chi):
    """Response on the outer grid deltas x epsilons.

    Returns (values, flags, tails); flagged cells need extended-precision
    re-evaluation by the caller.
    """
    nd = deltas.size
    ne = epsilons.size
    values = np.empty((nd, ne), dtype=np.complex128)
    flags = np.zeros((nd, ne), dtype=np.uint8)
    tails = np.zeros((nd, ne), dtype=np.float64)
    for i in range(nd):
        for j in range(ne):
            value, bad, tail = _dw_cell(deltas[i], epsilons[j], gamma, chi)
            values[i, j] = value
            flags[i, j] = 1 if bad else 0
            tails[i, j] = tail
    return values, flags, tails


USING_NUMBA = False

if not _numba_disabled():
    try:
        from numba import njit

        _hyp0f2_series = njit(cache=True)(_hyp0f2_series)
        _dw_cell = njit(cache=True)(_dw_cell)
        _dw_grid = njit(cache=True)(_dw_grid)
        USING_NUMBA = True
    except ImportError:
        pass

hyp0f2_series = _hyp0f2_series
dw_cell = _dw_cell
dw_grid = _dw_grid

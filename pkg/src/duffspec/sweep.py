"""Deterministic parameter sweeps, line scans, and point analyses.

Grids are evaluated cell by cell with no cross-cell state, so a sweep is
reproducible bit-for-bit regardless of worker count: results are keyed by
cell index, floats are always written with 17 significant digits and LF
line endings, and JSON is emitted with sorted keys.  Wall-clock timing
goes to a side log, never into the manifest.
"""

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .circuit import load_circuit, to_model, v2_signal
from .closedform import dw_response_grid
from .fock import ModelParams, annihilation, expectation, von_neumann_entropy, binary_entropy
from .lindblad import (
    TOL_EIG,
    low_lying_spectrum,
    metastable_extremes,
    solve_steady_state_adaptive,
    build_superoperator,
)
from .perturbation import fano_fit, fano_q, onset_scan, onset_slope
from .phasespace import local_maxima, wigner_integral, wigner_many, wigner_purity

METHODS = ("numeric", "closed-form", "series", "both")
ANALYZE_TASKS = ("entropy", "spectrum", "wigner", "metastable", "mixing-curve", "fano", "onset")


class ConfigError(ValueError):
    """The sweep configuration is malformed."""


class AnalysisError(RuntimeError):
    """A point-analysis task cannot run at the requested parameters."""


@dataclass(frozen=True)
class SweepConfig:
    """Run configuration; JSON keys mirror the field names.

    delta_range / epsilon_range are (start, stop, count) with inclusive
    endpoints.  ``scan`` holds {"epsilon": value} or {"delta": value} for a
    line scan; ``point`` holds {"delta": ..., "epsilon": ...} for analyses.
    ``circuit`` names a circuit-parameter JSON file whose derived rates
    (scaled by chi) fill gamma, chi, and the analysis point unless they
    are given explicitly.
    """

    method: str = "both"
    gamma: float = 2.0
    chi: float = 1.0
    delta_range: tuple = (-10.0, 2.0, 241)
    epsilon_range: tuple = (0.05, 5.0, 100)
    dim: int = None
    workers: int = 1
    out_dir: str = "duffspec-out"
    scan: dict = None
    point: dict = None
    analyze: tuple = ()
    wigner_grid: dict = field(
        default_factory=lambda: {"re": (-5.0, 5.0), "im": (-5.0, 5.0), "nx": 201, "ny": 201}
    )
    spectrum_count: int = 6
    mixing_samples: int = 201
    fano: dict = None
    onset: dict = None
    circuit: str = None


def _check_range(name, rng):
    try:
        start, stop, count = rng
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be (start, stop, count), got {rng!r}") from None
    start, stop, count = float(start), float(stop), int(count)
    if count < 1 or (count > 1 and not stop > start):
        raise ConfigError(f"{name} needs stop > start and count >= 1, got {rng!r}")
    return (start, stop, count)


def validate_config(config):
    if config.method not in METHODS:
        raise ConfigError(f"method must be one of {METHODS}, got {config.method!r}")
    if not (config.gamma > 0 and math.isfinite(config.gamma)):
        raise ConfigError(f"gamma must be positive, got {config.gamma!r}")
    if not (config.chi > 0 and math.isfinite(config.chi)):
        raise ConfigError(f"chi must be positive, got {config.chi!r}")
    if config.workers < 1:
        raise ConfigError(f"workers must be >= 1, got {config.workers}")
    if config.dim is not None and config.dim < 2:
        raise ConfigError(f"dim must be >= 2, got {config.dim}")
    for task in config.analyze:
        if task not in ANALYZE_TASKS:
            raise ConfigError(f"unknown analyze task {task!r}; choose from {ANALYZE_TASKS}")
    config = replace(
        config,
        delta_range=_check_range("delta_range", config.delta_range),
        epsilon_range=_check_range("epsilon_range", config.epsilon_range),
        analyze=tuple(config.analyze),
    )
    if config.scan is not None:
        if set(config.scan) not in ({"epsilon"}, {"delta"}):
            raise ConfigError(f"scan must set exactly one of epsilon/delta, got {config.scan!r}")
    if config.point is not None:
        if set(config.point) != {"delta", "epsilon"}:
            raise ConfigError(f"point must set delta and epsilon, got {config.point!r}")
    return config


def config_from_dict(raw):
    known = set(SweepConfig.__dataclass_fields__)
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    cfg = SweepConfig(**raw)
    return validate_config(cfg)


def load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


def resolve_circuit(config):
    """Fold a circuit file's derived rates into the config.

    The circuit rates are rescaled by chi (the engine is dimensionless),
    so chi becomes 1 and gamma, delta, epsilon are expressed in units of
    the physical chi.  Explicit config values win over derived ones.
    Returns (config, circuit_params, scaled_point) where scaled_point is
    the circuit's own operating point.
    """
    if config.circuit is None:
        return config, None, None
    circuit = load_circuit(config.circuit)
    params, _omega0 = to_model(circuit)
    scale = params.chi
    derived_point = {"delta": params.delta / scale, "epsilon": params.epsilon / scale}
    updates = {}
    if config.gamma == SweepConfig.gamma:
        updates["gamma"] = params.gamma / scale
    if config.chi == SweepConfig.chi:
        updates["chi"] = 1.0
    if config.point is None:
        updates["point"] = derived_point
    return replace(config, **updates), circuit, derived_point


def _grid_points(rng):
    start, stop, count = rng
    return np.linspace(start, stop, int(count))


@dataclass
class SweepResult:
    """In-memory sweep output.

    values maps method -> complex array (len(deltas) x len(epsilons));
    residuals likewise; dims holds per-cell truncation for the numeric
    method.  metadata carries the config echo and timestamps (timestamps
    stay in memory; files omit them for reproducibility).
    """

    deltas: np.ndarray
    epsilons: np.ndarray
    values: dict
    residuals: dict
    dims: np.ndarray
    discrepancy: np.ndarray
    metadata: dict


def _numeric_cell(task):
    i, j, delta, epsilon, gamma, chi, dim = task
    params = ModelParams(delta=delta, chi=chi, epsilon=epsilon, gamma=gamma)
    rho, used_dim, residual = solve_steady_state_adaptive(params, dim=dim)
    value = expectation(annihilation(used_dim), rho)
    return i, j, value, used_dim, residual


def _numeric_grid(deltas, epsilons, gamma, chi, dim, workers):
    tasks = [
        (i, j, float(d), float(e), gamma, chi, dim)
        for i, d in enumerate(deltas)
        for j, e in enumerate(epsilons)
    ]
    values = np.zeros((deltas.size, epsilons.size), dtype=complex)
    dims = np.zeros((deltas.size, epsilons.size), dtype=int)
    residuals = np.zeros((deltas.size, epsilons.size), dtype=float)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (workers * 8))
            results = pool.map(_numeric_cell, tasks, chunksize=chunk)
            for i, j, value, used_dim, residual in results:
                values[i, j] = value
                dims[i, j] = used_dim
                residuals[i, j] = residual
    else:
        for task in tasks:
            i, j, value, used_dim, residual = _numeric_cell(task)
            values[i, j] = value
            dims[i, j] = used_dim
            residuals[i, j] = residual
    return values, dims, residuals


def _series_grid(deltas, epsilons, gamma, chi):
    d = deltas[:, None]
    e = epsilons[None, :]
    a = 2.0 * d - 1j * gamma
    linear = -2.0 * e / a
    cubic = 32.0 * chi * e**3 / (a * a * (2.0 * chi + 2.0 * d - 1j * gamma) * a.conj())
    return linear + cubic


def sweep(config):
    """Evaluate the response over the configured (delta, epsilon) grid."""
    config = validate_config(config)
    deltas = _grid_points(config.delta_range)
    epsilons = _grid_points(config.epsilon_range)
    started = time.time()
    values, residuals, dims, discrepancy = {}, {}, None, None
    if config.method in ("numeric", "both"):
        vals, dims, res = _numeric_grid(
            deltas, epsilons, config.gamma, config.chi, config.dim, config.workers
        )
        values["numeric"] = vals
        residuals["numeric"] = res
    if config.method in ("closed-form", "both"):
        vals, tails = dw_response_grid(deltas, epsilons, config.gamma, config.chi)
        values["closed-form"] = vals
        residuals["closed-form"] = tails
    if config.method == "series":
        values["series"] = _series_grid(deltas, epsilons, config.gamma, config.chi)
        residuals["series"] = np.zeros_like(values["series"], dtype=float)
    if config.method == "both":
        discrepancy = np.abs(values["numeric"] - values["closed-form"])
    if dims is None:
        dims = np.zeros((deltas.size, epsilons.size), dtype=int)
    return SweepResult(
        deltas=deltas,
        epsilons=epsilons,
        values=values,
        residuals=residuals,
        dims=dims,
        discrepancy=discrepancy,
        metadata={
            "config": _config_echo(config),
            "started_at": started,
            "finished_at": time.time(),
        },
    )


def line_scan(config, fixed=None):
    """1-D scan at fixed epsilon (over delta) or fixed delta (over epsilon).

    ``fixed`` defaults to config.scan.  The fixed value must lie inside
    the configured range for its axis.
    """
    config = validate_config(config)
    fixed = dict(fixed if fixed is not None else (config.scan or {}))
    if set(fixed) not in ({"epsilon"}, {"delta"}):
        raise ConfigError(f"scan must fix exactly one of epsilon/delta, got {fixed!r}")
    if "epsilon" in fixed:
        value = float(fixed["epsilon"])
        lo, hi, _ = config.epsilon_range
        if not lo <= value <= hi:
            raise ConfigError(f"fixed epsilon {value} outside range [{lo}, {hi}]")
        cfg = replace(config, epsilon_range=(value, value, 1))
    else:
        value = float(fixed["delta"])
        lo, hi, _ = config.delta_range
        if not lo <= value <= hi:
            raise ConfigError(f"fixed delta {value} outside range [{lo}, {hi}]")
        cfg = replace(config, delta_range=(value, value, 1))
    return sweep(cfg)


def _config_echo(config):
    echo = {}
    for name in SweepConfig.__dataclass_fields__:
        value = getattr(config, name)
        if isinstance(value, tuple):
            value = list(value)
        echo[name] = value
    return echo


def _fmt(x):
    return f"{x:.16e}"


def _write_lines(path, lines):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_sweep_csv(result, path):
    """Write a sweep grid as CSV with fixed formatting (17 significant digits)."""
    methods = [m for m in ("numeric", "closed-form", "series") if m in result.values]
    header = ["delta", "epsilon"]
    for m in methods:
        tag = m.replace("-", "_")
        header += [f"re_{tag}", f"im_{tag}", f"abs_{tag}", f"residual_{tag}"]
    header.append("dim")
    if result.discrepancy is not None:
        header.append("discrepancy")
    lines = [",".join(header)]
    for i, d in enumerate(result.deltas):
        for j, e in enumerate(result.epsilons):
            row = [_fmt(d), _fmt(e)]
            for m in methods:
                v = result.values[m][i, j]
                row += [_fmt(v.real), _fmt(v.imag), _fmt(abs(v)), _fmt(result.residuals[m][i, j])]
            row.append(str(int(result.dims[i, j])))
            if result.discrepancy is not None:
                row.append(_fmt(result.discrepancy[i, j]))
            lines.append(",".join(row))
    _write_lines(path, lines)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _tool_block():
    import numpy
    import scipy

    return {
        "name": "duffspec",
        "version": __version__,
        "numpy": numpy.__version__,
        "scipy": scipy.__version__,
    }


def run_sweep_to_dir(config, kind="sweep"):
    """Run a sweep or scan and write sweep.csv/scan.csv plus manifest.json."""
    os.makedirs(config.out_dir, exist_ok=True)
    if kind == "scan":
        result = line_scan(config)
        csv_name = "scan.csv"
    else:
        result = sweep(config)
        csv_name = "sweep.csv"
    csv_path = os.path.join(config.out_dir, csv_name)
    write_sweep_csv(result, csv_path)
    stats = {}
    for m, res in result.residuals.items():
        stats[f"max_residual_{m.replace('-', '_')}"] = float(np.max(res)) if res.size else 0.0
    if result.discrepancy is not None:
        stats["max_discrepancy"] = float(np.max(result.discrepancy))
    if "numeric" in result.values:
        stats["max_dim"] = int(np.max(result.dims))
    manifest = {
        "kind": kind,
        "tool": _tool_block(),
        "config": result.metadata["config"],
        "outputs": [csv_name],
        "grid": {"deltas": int(result.deltas.size), "epsilons": int(result.epsilons.size)},
        "stats": stats,
    }
    _write_json(os.path.join(config.out_dir, "manifest.json"), manifest)
    _write_run_log(config.out_dir, result.metadata)
    return manifest


def _write_run_log(out_dir, metadata):
    # Timing is real wall clock and intentionally lives outside the
    # deterministic manifest.
    elapsed = metadata["finished_at"] - metadata["started_at"]
    with open(os.path.join(out_dir, "run.log"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"started_unix={metadata['started_at']:.3f}\n")
        fh.write(f"elapsed_seconds={elapsed:.3f}\n")


class _PointContext:
    """Lazily shared state between analysis tasks at one parameter point."""

    def __init__(self, params, config):
        self.params = params
        self.config = config
        self._rho0 = None
        self._spectrum = None
        self._pair = None

    def rho0(self):
        if self._rho0 is None:
            self._rho0 = solve_steady_state_adaptive(self.params, dim=self.config.dim)
        return self._rho0

    def spectrum(self):
        if self._spectrum is None:
            _, dim, _ = self.rho0()
            S = build_superoperator(self.params, dim)
            self._spectrum = low_lying_spectrum(S, count=self.config.spectrum_count)
        return self._spectrum

    def metastable_pair(self):
        if self._pair is None:
            if self.params.epsilon == 0:
                raise AnalysisError(
                    "metastable analysis requires epsilon > 0: without a drive the "
                    "slowest decaying mode is not a bimodality direction"
                )
            spec = self.spectrum()
            if len(spec.eigenvalues) < 2:
                raise AnalysisError("spectrum does not include a second eigenvalue")
            lam1 = spec.eigenvalues[1]
            if abs(lam1.imag) > TOL_EIG * max(1.0, abs(lam1)):
                raise AnalysisError(
                    f"second eigenvalue {lam1} is complex; no Hermitian slow direction "
                    "exists at this point"
                )
            rho0, _, _ = self.rho0()
            self._pair = metastable_extremes(rho0, spec.eigenmatrices[1])
        return self._pair


def _wigner_kwargs(config):
    g = config.wigner_grid
    return {
        "re_range": tuple(g.get("re", (-5.0, 5.0))),
        "im_range": tuple(g.get("im", (-5.0, 5.0))),
        "nx": int(g.get("nx", 201)),
        "ny": int(g.get("ny", 201)),
    }


def _write_wigner(grid, out_dir, stem, params, dim):
    lines = ["x,y,w"]
    xs = grid.re_points
    ys = grid.im_points
    for i in range(grid.nx):
        for j in range(grid.ny):
            lines.append(f"{_fmt(xs[i])},{_fmt(ys[j])},{_fmt(grid.values[i, j])}")
    _write_lines(os.path.join(out_dir, f"{stem}.csv"), lines)
    header = {
        "columns": ["x", "y", "w"],
        "re_range": list(grid.re_range),
        "im_range": list(grid.im_range),
        "nx": grid.nx,
        "ny": grid.ny,
        "dim": dim,
        "params": {
            "delta": params.delta,
            "chi": params.chi,
            "epsilon": params.epsilon,
            "gamma": params.gamma,
        },
        "integral": wigner_integral(grid),
    }
    _write_json(os.path.join(out_dir, f"{stem}.json"), header)
    return [f"{stem}.csv", f"{stem}.json"]


def _task_entropy(ctx, out_dir, circuit):
    rho0, dim, residual = ctx.rho0()
    a_val = expectation(annihilation(dim), rho0)
    n_val = expectation(annihilation(dim).conj().T @ annihilation(dim), rho0)
    summary = {
        "entropy_bits": von_neumann_entropy(rho0),
        "mean_photons": float(n_val.real),
        "a_re": a_val.real,
        "a_im": a_val.imag,
        "a_abs": abs(a_val),
        "purity": float(np.trace(rho0 @ rho0).real),
        "dim": dim,
        "residual": residual,
    }
    if circuit is not None:
        quads = v2_signal(a_val, circuit)
        summary["v2_cos_volts"] = quads.cos_amplitude
        summary["v2_sin_volts"] = quads.sin_amplitude
    return summary, []


def _task_spectrum(ctx, out_dir, circuit):
    spec = ctx.spectrum()
    lines = ["index,re,im"]
    for idx, lam in enumerate(spec.eigenvalues):
        lines.append(f"{idx},{_fmt(lam.real)},{_fmt(lam.imag)}")
    _write_lines(os.path.join(out_dir, "spectrum.csv"), lines)
    summary = {
        "eigenvalues": [[lam.real, lam.imag] for lam in spec.eigenvalues],
        "dim": spec.dim,
    }
    return summary, ["spectrum.csv"]


def _task_wigner(ctx, out_dir, circuit):
    rho0, dim, _ = ctx.rho0()
    grid = wigner_many([rho0], **_wigner_kwargs(ctx.config))[0]
    files = _write_wigner(grid, out_dir, "wigner_rho0", ctx.params, dim)
    maxima = local_maxima(grid)
    summary = {
        "integral": wigner_integral(grid),
        "purity_estimate": wigner_purity(grid),
        "n_local_maxima": len(maxima),
        "maxima": [[x, y, w] for x, y, w in maxima],
    }
    return summary, files


def _task_metastable(ctx, out_dir, circuit):
    pair = ctx.metastable_pair()
    rho0, dim, _ = ctx.rho0()
    grids = wigner_many([pair.rho_plus, pair.rho_minus], **_wigner_kwargs(ctx.config))
    files = _write_wigner(grids[0], out_dir, "wigner_rho_plus", ctx.params, dim)
    files += _write_wigner(grids[1], out_dir, "wigner_rho_minus", ctx.params, dim)
    summary = {
        "beta_plus": pair.beta_plus,
        "beta_minus": pair.beta_minus,
        "mixing_fraction": pair.mixing_fraction,
        "entropy_plus_bits": von_neumann_entropy(pair.rho_plus),
        "entropy_minus_bits": von_neumann_entropy(pair.rho_minus),
        "entropy_rho0_bits": von_neumann_entropy(rho0),
    }
    return summary, files


def mixing_curve(pair, samples=201):
    """Entropy along x rho_plus + (1-x) rho_minus against the linear mix.

    Returns (x, entropy, linear, excess, binary) arrays; ``excess`` is the
    entropy above the linear interpolation and ``binary`` the two-outcome
    entropy H(x) it approximates when the extremes are distinguishable.
    """
    s_plus = von_neumann_entropy(pair.rho_plus)
    s_minus = von_neumann_entropy(pair.rho_minus)
    xs = np.linspace(0.0, 1.0, samples)
    entropy = np.empty(samples)
    for idx, x in enumerate(xs):
        entropy[idx] = von_neumann_entropy(x * pair.rho_plus + (1.0 - x) * pair.rho_minus)
    linear = xs * s_plus + (1.0 - xs) * s_minus
    excess = entropy - linear
    binary = np.array([binary_entropy(float(x)) for x in xs])
    return xs, entropy, linear, excess, binary


def _task_mixing_curve(ctx, out_dir, circuit):
    pair = ctx.metastable_pair()
    xs, entropy, linear, excess, binary = mixing_curve(pair, ctx.config.mixing_samples)
    lines = ["x,entropy_bits,linear_bits,excess_bits,binary_bits"]
    for idx in range(xs.size):
        lines.append(
            ",".join(
                _fmt(v) for v in (xs[idx], entropy[idx], linear[idx], excess[idx], binary[idx])
            )
        )
    _write_lines(os.path.join(out_dir, "mixing_curve.csv"), lines)
    commutator = pair.rho_minus @ pair.rho_plus - pair.rho_plus @ pair.rho_minus
    peak = int(np.argmax(excess))
    summary = {
        "peak_excess_bits": float(excess[peak]),
        "x_at_peak": float(xs[peak]),
        "max_deviation_from_binary": float(np.max(np.abs(excess - binary))),
        "commutator_norm": float(np.linalg.norm(commutator)),
    }
    return summary, ["mixing_curve.csv"]


def _interior_trough(deltas, mags, center):
    """Detuning of the interior local minimum nearest ``center``.

    Returns None when the magnitudes are monotonic through the window
    (global argmin would just report a window edge then).
    """
    d = np.diff(mags)
    idx = np.nonzero((d[:-1] < 0.0) & (d[1:] >= 0.0))[0] + 1
    if idx.size == 0:
        return None
    best = idx[np.argmin(np.abs(deltas[idx] - center))]
    return float(deltas[best])


def _task_fano(ctx, out_dir, circuit):
    p = ctx.params
    options = ctx.config.fano or {}
    half_width = float(options.get("half_width", 8.0 * p.gamma))
    samples = int(options.get("samples", 801))
    center = -p.chi
    window = options.get("window", (center - half_width, center + half_width))
    deltas = np.linspace(window[0], window[1], samples)
    values, _ = dw_response_grid(deltas, np.array([p.epsilon]), p.gamma, p.chi)
    mags = np.abs(values[:, 0])
    # The resonance rides on the off-resonant linear response, whose
    # magnitude varies across the window by as much as the feature itself;
    # dividing it out leaves a locally flat background the Fano model fits.
    linear_bg = 2.0 * p.epsilon / np.abs(2.0 * deltas - 1j * p.gamma)
    fit = fano_fit(deltas, mags / linear_bg)
    formula_q = fano_q(p)
    lines = ["delta,abs_a,abs_a_normalized"]
    for idx in range(deltas.size):
        lines.append(
            f"{_fmt(deltas[idx])},{_fmt(mags[idx])},{_fmt(mags[idx] / linear_bg[idx])}"
        )
    _write_lines(os.path.join(out_dir, "fano_line.csv"), lines)
    summary = {
        "fitted": {
            "background": fit.background,
            "amplitude": fit.amplitude,
            "center": fit.center,
            "width": fit.width,
            "q": fit.q,
            "residual_rms": fit.residual_rms,
        },
        "formula_q": formula_q,
        "q_relative_error": abs(fit.q - formula_q) / abs(formula_q),
        "raw_trough_delta": _interior_trough(deltas, mags, center),
        "normalized_trough_delta": _interior_trough(deltas, mags / linear_bg, center),
        "window": [float(window[0]), float(window[1])],
        "samples": samples,
    }
    return summary, ["fano_line.csv"]


def _task_onset(ctx, out_dir, circuit):
    options = ctx.config.onset or {}
    orders = [int(v) for v in options.get("n", (1, 2))]
    gammas = [float(g) for g in options.get("gammas", (0.003, 0.01, 0.03))]
    lines = ["n,gamma,epsilon_onset"]
    summary = {"slopes": {}}
    for order in orders:
        pairs = onset_scan(order, gammas, chi=ctx.params.chi)
        for gamma, eps in pairs:
            lines.append(f"{order},{_fmt(gamma)},{_fmt(eps)}")
        summary["slopes"][str(order)] = onset_slope(pairs)
    _write_lines(os.path.join(out_dir, "onset.csv"), lines)
    return summary, ["onset.csv"]


_TASKS = {
    "entropy": _task_entropy,
    "spectrum": _task_spectrum,
    "wigner": _task_wigner,
    "metastable": _task_metastable,
    "mixing-curve": _task_mixing_curve,
    "fano": _task_fano,
    "onset": _task_onset,
}


def analyze(config):
    """Run the configured analysis tasks at the configured point.

    Each task writes its artifacts under out_dir and contributes a block
    to manifest.json; task failures are recorded per task (with the
    offending task labelled) and reported through the returned manifest
    rather than aborting the remaining tasks.
    """
    config = validate_config(config)
    config, circuit, _ = resolve_circuit(config)
    if config.point is None:
        raise ConfigError("analyze requires a point {delta, epsilon} or a circuit file")
    if not config.analyze:
        raise ConfigError("no analyze tasks requested")
    params = ModelParams(
        delta=float(config.point["delta"]),
        chi=config.chi,
        epsilon=float(config.point["epsilon"]),
        gamma=config.gamma,
    )
    os.makedirs(config.out_dir, exist_ok=True)
    started = time.time()
    ctx = _PointContext(params, config)
    tasks = {}
    outputs = []
    failed = 0
    for name in config.analyze:
        try:
            summary, files = _TASKS[name](ctx, config.out_dir, circuit)
        except Exception as exc:
            failed += 1
            tasks[name] = {
                "status": "error",
                "error_type": type(exc).__name__,
                "message": str(exc),
            }
            continue
        tasks[name] = {"status": "ok", "summary": summary}
        outputs.extend(files)
    manifest = {
        "kind": "analyze",
        "tool": _tool_block(),
        "config": _config_echo(config),
        "point": {"delta": params.delta, "epsilon": params.epsilon},
        "tasks": tasks,
        "outputs": outputs,
        "failed_tasks": failed,
    }
    _write_json(os.path.join(config.out_dir, "manifest.json"), manifest)
    _write_run_log(config.out_dir, {"started_at": started, "finished_at": time.time()})
    return manifest

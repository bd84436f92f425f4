"""Config-driven experiment runners producing CSV datasets and JSON manifests.

Every runner takes a fully resolved :class:`ExperimentConfig` and an output
directory, and returns a :class:`RunResult` whose ``manifest`` records the
resolved config, summary statistics and the pass/fail state of the checks the
run carried out. Units: frequencies and rates in omega_m, times in 1/omega_m.
"""
from __future__ import annotations

import dataclasses
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__
from .design import (SystemParams, derive, find_operating_point, symmetric_detunings_for,
                     sweep_r0, sweep_xi, write_r0_csv, write_sweep_csv, xi_grid)
from .engine import (BlockadeParams, build_liouvillian, evolve, excitation_spectrum,
                     find_peaks, franck_condon_oracle, franck_condon_weights, g2_trajectory,
                     g2_zero, refine_peak, spectrum_point, steady_state,
                     steady_state_residual, write_spectrum_csv, write_trajectory_csv)
from .errors import ConfigError, InvalidParameterError
from .fock import POSITIVITY_FLOOR, TruncationSpec, fock_state, mode_operators, pure_state
from .models import (bogoliubov_operators, bogoliubov_vacuum_ket, build_bogoliubov_exact_model,
                     build_effective_model, build_lab_model)

EXPERIMENTS = ("design", "sweep-xi", "sweep-r0", "spectrum", "g2",
               "verify-frames", "verify-dissipator", "verify-rwa")


# ---------------------------------------------------------------------------
# configuration


@dataclass
class ParamsSection:
    """Lab-frame system parameters plus the xi sweep range."""

    delta1: float = 1000.0
    delta2: float = 1000.0
    xi: float = 800.0
    g: float = 1e-3
    kappa: float = 0.02
    gamma_m: float = 0.0
    n_th: float = 0.0
    omega_m: float = 1.0
    xi_min: Optional[float] = None
    xi_max: Optional[float] = None

    def system(self) -> SystemParams:
        return SystemParams(self.delta1, self.delta2, self.xi, self.g, self.kappa,
                            self.gamma_m, self.n_th, self.omega_m)


@dataclass
class ProbeSection:
    """Weak probe; ``epsilon_ratio`` is epsilon_eff / kappa."""

    epsilon_ratio: float = 0.1
    omega_p_rot: float = 0.0


@dataclass
class BlockadeSection:
    """Reduced single-mode blockade problem (T = 0, gamma_m = omega_m / Q)."""

    g1: float = 1.0
    kappa: float = 0.1
    Q: float = 1000.0
    n_th: float = 0.0
    delta0: Optional[float] = None
    g2_epsilon_ratio: float = 0.1

    def params(self, dims, g1: Optional[float] = None) -> BlockadeParams:
        return BlockadeParams(g1=self.g1 if g1 is None else g1, omega_m=1.0, kappa=self.kappa,
                              gamma_m=1.0 / self.Q, n_th=self.n_th, dims=tuple(dims))


@dataclass
class TruncationSection:
    lab: tuple = (12, 12, 8)
    blockade: tuple = (6, 14)
    dissipator: tuple = (15, 15, 2)
    g2_check: tuple = (8, 24)


@dataclass
class GridsSection:
    xi_points: int = 200
    r0_min: float = 0.0
    r0_max: float = 7.0
    r0_points: int = 141
    g1_values: tuple = (0.25, 0.5, 1.0)
    delta0_below: float = 0.6
    delta0_above: float = 3.4
    delta0_step: float = 0.04
    t_end_kappa: float = 20.0
    t_points: int = 201


@dataclass
class VerifySection:
    """Small-squeezing settings of the three frame and approximation checks."""

    dissipator_r0: float = 0.3
    dissipator_max_occupation: int = 5
    dissipator_tol: float = 1e-10
    frames_r0: float = 0.5
    frames_omega: float = 1.0
    frames_g: float = 0.1
    frames_kappa: float = 1.0
    frames_points: int = 41
    frames_tol: float = 0.01
    rwa_tol: float = 0.05
    rwa_pass_r0: float = 0.3
    rwa_pass_omega: float = 10.5
    rwa_pass_gM: float = 0.2
    rwa_pass_dims: tuple = (7, 7, 5)
    rwa_fail_r0: float = 0.5
    rwa_fail_omega: float = 2.5
    rwa_fail_gM: float = 0.4
    rwa_fail_dims: tuple = (9, 9, 7)
    rwa_kappa: float = 1.0
    rwa_points: int = 101


@dataclass
class TolerancesSection:
    rtol: float = 1e-8
    atol: float = 1e-10


@dataclass
class ExperimentConfig:
    """Complete, defaulted description of a run.

    Unknown keys anywhere are rejected; ``from_dict`` reports the dotted path.
    """

    experiment: str = "design"
    params: ParamsSection = field(default_factory=ParamsSection)
    probe: ProbeSection = field(default_factory=ProbeSection)
    blockade: BlockadeSection = field(default_factory=BlockadeSection)
    truncation: TruncationSection = field(default_factory=TruncationSection)
    grids: GridsSection = field(default_factory=GridsSection)
    verify: VerifySection = field(default_factory=VerifySection)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    output: str = "results"

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}",
                              "experiment")

    def to_dict(self) -> dict:
        return _jsonable(dataclasses.asdict(self))

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        return _build(cls, data, "")

    def with_overrides(self, overrides: dict) -> ExperimentConfig:
        """New config with ``{"a.b": value}`` dotted overrides applied."""
        data = self.to_dict()
        for key, value in overrides.items():
            parts = key.split(".")
            node = data
            for depth, p in enumerate(parts[:-1]):
                if not isinstance(node.get(p), dict):
                    raise ConfigError("unknown config key",
                                      ".".join(parts[:depth + 1]))
                node = node[p]
            if parts[-1] not in node:
                raise ConfigError("unknown config key", key)
            node[parts[-1]] = value
        return ExperimentConfig.from_dict(data)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _coerce(value, default, path):
    if value is None:
        return None
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("must be a boolean", path)
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not float(value).is_integer():
            raise ConfigError("must be an integer", path)
        return int(value)
    if isinstance(default, float) or default is None:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError("must be a number", path)
        return float(value)
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)) or not value:
            raise ConfigError("must be a non-empty list", path)
        return tuple(_coerce(v, default[0], f"{path}[{i}]") for i, v in enumerate(value))
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError("must be a string", path)
        return value
    return value


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError("must be an object", prefix or "<root>")
    defaults = {}
    for f in dataclasses.fields(cls):
        if f.default is not dataclasses.MISSING:
            defaults[f.name] = f.default
        else:
            defaults[f.name] = f.default_factory()
    kwargs = {}
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if key not in defaults:
            raise ConfigError("unknown config key", path)
        default = defaults[key]
        if dataclasses.is_dataclass(default):
            kwargs[key] = _build(type(default), value, path)
        else:
            kwargs[key] = _coerce(value, default, path)
    try:
        return cls(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), prefix) from exc


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}", str(path)) from exc
    return ExperimentConfig.from_dict(data)


def parse_override(text: str) -> tuple[str, Any]:
    """``key=value`` with JSON-parsed value (bare words stay strings)."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not of the form key=value", text)
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


PRESETS = {
    "fig2": {"experiment": "design"},
    "fig3a": {"experiment": "spectrum",
              "blockade": {"kappa": 0.1, "Q": 1000.0, "n_th": 0.0},
              "grids": {"g1_values": [0.25, 0.5, 1.0]}},
    "fig3b": {"experiment": "g2",
              "blockade": {"g1": 1.0, "kappa": 0.1, "Q": 1000.0, "n_th": 0.0}},
}


def preset(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}", "preset")
    return ExperimentConfig.from_dict(PRESETS[name])


def defaults_table() -> str:
    """Dotted-key listing of every default, for ``--help``."""
    lines = []

    def walk(node, prefix):
        for k, v in node.items():
            key = f"{prefix}.{k}" if prefix else k
            if isinstance(v, dict):
                walk(v, key)
            else:
                lines.append(f"  {key} = {json.dumps(v)}")

    walk(ExperimentConfig().to_dict(), "")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# results


@dataclass
class Check:
    name: str
    passed: bool
    value: Any = None
    threshold: Any = None
    expected_fail: bool = False
    detail: str = ""

    @property
    def ok(self) -> bool:
        """An expected failure that does fail counts as success."""
        return (not self.passed) if self.expected_fail else self.passed

    def to_dict(self) -> dict:
        return _jsonable(dataclasses.asdict(self)) | {"ok": self.ok}

    def line(self) -> str:
        tag = "PASS" if self.ok else "FAIL"
        extra = " (expected-fail)" if self.expected_fail else ""
        return f"{tag} {self.name}{extra}: value={_short(self.value)} threshold={_short(self.threshold)}"


def _short(x):
    if isinstance(x, float):
        return f"{x:.4g}"
    return str(x)


@dataclass
class RunResult:
    experiment: str
    manifest: dict
    checks: list
    files: list
    comparisons: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def _manifest(config: ExperimentConfig, experiment: str, start: float, summary: dict,
              checks: list, files: list, comparisons: Optional[list] = None,
              warnings: Optional[list] = None) -> dict:
    cfg = config.to_dict()
    cfg["experiment"] = experiment
    return {
        "tool": "squeezedmech",
        "version": __version__,
        "experiment": experiment,
        "config": cfg,
        "duration_s": time.perf_counter() - start,
        "summary": _jsonable(summary),
        "checks": [c.to_dict() for c in checks],
        "comparisons": [c.to_dict() for c in comparisons or []],
        "warnings": list(warnings or []),
        "files": [Path(f).name for f in files],
    }


def write_manifest(result: RunResult, out_dir) -> Path:
    path = Path(out_dir) / f"manifest_{result.experiment}.json"
    path.write_text(json.dumps(result.manifest, indent=2, default=_json_default))
    return path


def _json_default(x):
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serialisable: {type(x).__name__}")


def _finite(x: float):
    return None if x is None or not math.isfinite(x) else float(x)


# ---------------------------------------------------------------------------
# design


def run_design(config: ExperimentConfig, out_dir, executor=None) -> RunResult:
    """xi sweep, r0 sweep and balanced operating point of the analytic design."""
    start = time.perf_counter()
    out = Path(out_dir)
    cp = config.params
    try:
        params = cp.system()
        grid = xi_grid(params.delta_sum, config.grids.xi_points, cp.xi_min, cp.xi_max)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), "params") from exc
    if len(grid) == 0:
        raise ConfigError("xi grid is empty", "grids.xi_points")
    rows = sweep_xi(params, grid)
    r0s = np.linspace(config.grids.r0_min, config.grids.r0_max, config.grids.r0_points)
    r0_rows = sweep_r0(params.g, r0s)
    f_xi, f_r0 = out / "design_xi.csv", out / "design_r0.csv"
    write_sweep_csv(rows, f_xi)
    write_r0_csv(r0_rows, f_r0)

    xi_star, d = find_operating_point(params)
    good = [r for r in rows if r.derived is not None]
    moment_err = max((abs(r.derived.M ** 2 - r.derived.N * (r.derived.N + 1))
                      / max(1.0, r.derived.M ** 2) for r in good), default=0.0)
    exact_product = params.g * xi_star * (d.a + math.sqrt(d.a * d.a - 4.0)) / 4.0
    checks = [
        Check("bath_moment_identity", moment_err < 1e-9, moment_err, 1e-9),
        Check("operating_point_product", abs(d.g1 * d.omega1 - exact_product) <= 1e-9 * exact_product,
              d.g1 * d.omega1, exact_product),
    ]
    summary = {
        "rows": len(rows), "error_rows": len(rows) - len(good),
        "valid_rows": sum(r.valid for r in rows),
        "operating_point": {"xi": xi_star, "a_minus_2": d.a - 2.0, "r0": d.r0,
                            "G1_over_kappa": d.g1 / params.kappa,
                            "Omega1_over_omega_m": d.omega1 / params.omega_m,
                            "G1_times_Omega1": d.g1 * d.omega1,
                            "rwa_ratio": d.rwa_ratio},
    }
    files = [f_xi, f_r0]
    return RunResult("design", _manifest(config, "design", start, summary, checks, files),
                     checks, files)


# ---------------------------------------------------------------------------
# spectrum


def delta0_grid(g1: float, grids: GridsSection, omega_m: float = 1.0) -> np.ndarray:
    """Detuning grid around the zero-phonon line ``-g1^2 / omega_m``."""
    zpl = -g1 * g1 / omega_m
    lo, hi = zpl - grids.delta0_below, zpl + grids.delta0_above
    n = int(round((hi - lo) / grids.delta0_step)) + 1
    return np.linspace(lo, hi, n)


def match_peaks(peaks: list, g1: float, omega_m: float, kappa: float,
                min_rel_weight: float = 0.05, window: float = 0.25) -> list:
    """Pair each significant Franck-Condon line with the nearest detected peak.

    Returns ``(n, oracle_position, oracle_height, peak or None)`` tuples for
    lines whose Poisson weight is at least ``min_rel_weight`` of the ZPL's.
    """
    w = franck_condon_weights(g1, omega_m)
    zpl = -g1 * g1 / omega_m
    out = []
    for n, wn in enumerate(w):
        if wn < min_rel_weight * w[0]:
            continue
        pos = zpl + n * omega_m
        height = float(franck_condon_oracle(g1, omega_m, kappa, [pos])[0])
        near = [p for p in peaks if abs(p.delta0 - pos) <= window * omega_m]
        best = min(near, key=lambda p: abs(p.delta0 - pos)) if near else None
        out.append((n, pos, height, best))
    return out


def analyse_spectrum(bp: BlockadeParams, points: list, eps: float,
                     position_tol: float = 0.05, weight_tol: float = 0.10):
    """Peak table and checks for one computed spectrum."""
    x = np.array([p.delta0 for p in points])
    y = np.array([p.s1 for p in points])
    step = float(np.median(np.diff(x))) if x.size > 1 else bp.kappa
    coarse = find_peaks(x, y, rel_height=1e-2)
    peaks = [refine_peak(lambda d: spectrum_point(bp, d, eps).s1, pk.delta0, step, xatol=1e-3)
             for pk in coarse]
    zpl = -bp.g1 ** 2 / bp.omega_m
    matched = match_peaks(peaks, bp.g1, bp.omega_m, bp.kappa)
    table = [{"n": n, "oracle_delta0": pos, "oracle_S1": h,
              "delta0": pk.delta0 if pk else None, "S1": pk.height if pk else None}
             for n, pos, h, pk in matched]
    found = [(n, pk) for n, _, _, pk in matched if pk is not None]
    zpl_peak = next((pk for n, pk in found if n == 0), None)
    zpl_err = abs(zpl_peak.delta0 - zpl) if zpl_peak else math.inf
    spacings = [b[1].delta0 - a[1].delta0 for a, b in zip(found, found[1:]) if b[0] == a[0] + 1]
    spacing_err = max((abs(s - bp.omega_m) for s in spacings), default=math.inf if len(matched) > 1 else 0.0)
    weight_errs = [abs(pk.height - h) / h if pk else math.inf for _, _, h, pk in matched]
    finite = y[np.isfinite(y)]
    top = float(x[np.isfinite(y)][np.argmax(finite)]) if finite.size else math.nan
    tag = f"g1={bp.g1:g}"
    checks = [
        Check(f"zpl_position[{tag}]", zpl_err <= position_tol, _finite(zpl_err), position_tol),
        Check(f"sideband_spacing[{tag}]", spacing_err <= position_tol, _finite(spacing_err),
              position_tol),
        Check(f"redshift[{tag}]", bp.g1 == 0 or top < 0, top, "< 0"),
        Check(f"no_failed_points[{tag}]", all(p.error is None for p in points),
              sum(p.error is not None for p in points), 0),
    ]
    comparison = Check(f"franck_condon_weights[{tag}]", max(weight_errs) <= weight_tol,
                       _finite(max(weight_errs)), weight_tol)
    return table, checks, comparison


def run_spectrum(config: ExperimentConfig, out_dir, executor=None) -> RunResult:
    """Excitation spectra of the reduced blockade model, one CSV per coupling."""
    start = time.perf_counter()
    out = Path(out_dir)
    cb = config.blockade
    eps = config.probe.epsilon_ratio * cb.kappa
    warnings = []
    if cb.kappa >= 0.5:
        warnings.append(f"kappa = {cb.kappa} is not in the resolved-sideband regime")
    checks, comparisons, files, summary = [], [], [], {"curves": []}
    for g1 in config.grids.g1_values:
        bp = cb.params(config.truncation.blockade, g1)
        grid = delta0_grid(g1, config.grids)
        t0 = time.perf_counter()
        points = excitation_spectrum(bp, grid, eps, executor=executor)
        path = out / f"spectrum_g1_{g1:g}.csv"
        write_spectrum_csv(path, points)
        files.append(path)
        table, cks, comp = analyse_spectrum(bp, points, eps)
        checks += cks
        comparisons.append(comp)
        summary["curves"].append({
            "g1": g1, "epsilon_eff": eps, "points": len(points),
            "failed_points": [{"delta0": p.delta0, "error": p.error} for p in points if p.error],
            "max_n_mech": max((p.n_mech for p in points if p.error is None), default=None),
            "peaks": table, "seconds": time.perf_counter() - t0})
    man = _manifest(config, "spectrum", start, summary, checks, files, comparisons, warnings)
    return RunResult("spectrum", man, checks, files, comparisons)


# ---------------------------------------------------------------------------
# g2


def blockade_g2_steady(bp: BlockadeParams, delta0: float, eps: float):
    model = bp.model(delta0, eps)
    L = build_liouvillian(model)
    rho = steady_state(L)
    A = mode_operators(model.spec)[0]
    return g2_zero(rho, A), rho, L


def run_g2(config: ExperimentConfig, out_dir, executor=None) -> RunResult:
    """g2(0) trajectory from vacuum plus the directly solved steady value."""
    start = time.perf_counter()
    out = Path(out_dir)
    cb = config.blockade
    bp = cb.params(config.truncation.blockade)
    delta0 = -cb.g1 ** 2 if cb.delta0 is None else cb.delta0
    eps = cb.g2_epsilon_ratio * cb.kappa
    g2_ss, rho_ss, L = blockade_g2_steady(bp, delta0, eps)
    resid = steady_state_residual(L, rho_ss)

    model = bp.model(delta0, eps)
    A, b = mode_operators(model.spec)
    t_end = config.grids.t_end_kappa / cb.kappa
    times = np.linspace(0.0, t_end, config.grids.t_points)
    tol = (config.tolerances.rtol, config.tolerances.atol)
    series = g2_trajectory(L, fock_state(model.spec, (0, 0)), times, A, b, tol)
    path = out / "g2_trajectory.csv"
    write_trajectory_csv(path, series)

    # same steady value at a larger truncation, as a convergence diagnostic
    big = dataclasses.replace(bp, dims=tuple(config.truncation.g2_check))
    g2_big = blockade_g2_steady(big, delta0, eps)[0]
    warnings = []
    if abs(g2_big - g2_ss) > 0.01:
        warnings.append(f"steady g2 not converged in truncation: {g2_ss:.4g} at {bp.dims} vs "
                        f"{g2_big:.4g} at {big.dims}")
    last = series.g2[-1]
    conv_gap = abs(last - g2_ss) if np.isfinite(last) else math.inf
    if conv_gap >= 0.01:
        warnings.append(f"trajectory g2 at t_end differs from steady value by {conv_gap:.3g}; "
                        f"mechanical relaxation time 1/gamma_m = {1 / bp.gamma_m:g} exceeds t_end")
    traj = series.trajectory
    checks = [
        Check("steady_residual", resid < 1e-10 * max(bp.kappa, bp.gamma_m), resid,
              1e-10 * max(bp.kappa, bp.gamma_m)),
        Check("trajectory_trace", float(traj.trace_err.max()) < 1e-8, float(traj.trace_err.max()), 1e-8),
        Check("trajectory_positivity", float(np.nanmin(traj.min_eig)) >= POSITIVITY_FLOOR,
              float(np.nanmin(traj.min_eig)), POSITIVITY_FLOOR),
    ]
    comparisons = [Check("antibunching", g2_ss < 1.0, g2_ss, "< 1"),
                   Check("trajectory_convergence", conv_gap < 0.01, _finite(conv_gap), 0.01)]
    summary = {"g1": bp.g1, "delta0": delta0, "kappa": bp.kappa, "gamma_m": bp.gamma_m,
               "epsilon_eff": eps, "dims": list(bp.dims), "g2_steady": g2_ss,
               "g2_steady_check_dims": list(big.dims), "g2_steady_check": g2_big,
               "g2_t_end": _finite(float(last)), "t_end": t_end,
               "absent_points": int((~series.present).sum()),
               "n_cav_steady": float(series.n_cav[-1]),
               "integrator": dataclasses.asdict(traj.stats),
               "note": "g1 and kappa defaults are the demo choice for the blockade panel"}
    man = _manifest(config, "g2", start, summary, checks, [path], comparisons, warnings)
    return RunResult("g2", man, checks, [path], comparisons)


# ---------------------------------------------------------------------------
# verifications


def _frame_params(r0: float, omega: float, g: float, kappa: float,
                  gamma_m: float = 1e-3) -> SystemParams:
    delta, xi = symmetric_detunings_for(r0, omega)
    return SystemParams(delta, delta, xi, g, kappa, gamma_m, 0.0, 1.0)


def time_averaged_deviation(t, x, y) -> float:
    """``int |x - y| dt / int |y| dt`` by the trapezoid rule."""
    return float(np.trapezoid(np.abs(np.asarray(x) - y), t) / np.trapezoid(np.abs(y), t))


def verify_dissipator(vs: VerifySection, dims) -> Check:
    """Lab and Bogoliubov generators compressed to the low-occupation subspace."""
    p = _frame_params(vs.dissipator_r0, 1.0, 0.0, 1.0)
    spec = TruncationSpec(tuple(dims))
    L1 = build_liouvillian(build_lab_model(p, None, spec)).matrix
    L2 = build_liouvillian(build_bogoliubov_exact_model(p, None, spec)).matrix
    idx = spec.low_excitation_indices(vs.dissipator_max_occupation)
    d = spec.total_dim
    sel = (idx[:, None] + d * idx[None, :]).ravel()
    P1 = L1[sel][:, sel]
    P2 = L2[sel][:, sel]
    diff = abs(P1 - P2).max()
    rel = float(diff / abs(P1).max())
    return Check("verify-dissipator", rel < vs.dissipator_tol, rel, vs.dissipator_tol,
                 detail=f"dims={tuple(dims)} r0={vs.dissipator_r0} occupation<={vs.dissipator_max_occupation}")


def verify_frames(vs: VerifySection, dims, tol=(1e-8, 1e-10)) -> tuple[Check, dict]:
    """<A1^dag A1>(t) from the lab and Bogoliubov-exact models, lab vacuum start."""
    p = _frame_params(vs.frames_r0, vs.frames_omega, vs.frames_g, vs.frames_kappa)
    d = derive(p)
    spec = TruncationSpec(tuple(dims))
    A1, _ = bogoliubov_operators(d.r0, spec)
    obs = {"n1": A1.dag() @ A1}
    times = np.linspace(0.0, 10.0 / p.kappa, vs.frames_points)
    rho0 = fock_state(spec, (0, 0, 0))
    x = evolve(build_lab_model(p, d, spec), rho0, times, tol, obs, store_states=False,
               check_positivity=False)
    y = evolve(build_bogoliubov_exact_model(p, d, spec), rho0, times, tol, obs,
               store_states=False, check_positivity=False)
    xs, ys = x.expectations["n1"].real, y.expectations["n1"].real
    dev = time_averaged_deviation(times, xs, ys)
    info = {"times": times, "lab": xs, "bogoliubov": ys, "steps": [x.stats.steps, y.stats.steps]}
    return Check("verify-frames", dev < vs.frames_tol, dev, vs.frames_tol,
                 detail=f"dims={tuple(dims)} r0={vs.frames_r0}"), info


def rwa_deviation(r0: float, omega: float, gM: float, kappa: float, dims,
                  n_points: int = 101, tol=(1e-8, 1e-10)) -> tuple[float, float]:
    """Exact-vs-effective deviation of <A1^dag A1> from one Bogoliubov excitation.

    The exact model starts from ``A1^dag`` applied to the truncated two-mode
    squeezed vacuum; the effective model from ``|1, 0, 0>``. Returns
    ``(time-averaged relative deviation, rwa_ratio)``.
    """
    M = math.sinh(r0) * math.cosh(r0)
    p = _frame_params(r0, omega, gM / M, kappa)
    d = derive(p)
    spec = TruncationSpec(tuple(dims))
    A1, _ = bogoliubov_operators(d.r0, spec)
    ket = A1.dag().data @ bogoliubov_vacuum_ket(d.r0, spec)
    times = np.linspace(0.0, 10.0 / kappa, n_points)
    x = evolve(build_bogoliubov_exact_model(p, d, spec), pure_state(spec, ket), times, tol,
               {"n1": A1.dag() @ A1}, store_states=False, check_positivity=False)
    spec_e = TruncationSpec((3, 3, dims[2]))
    a = mode_operators(spec_e)[0]
    y = evolve(build_effective_model(d, p.omega_m, kappa, p.gamma_m, p.n_th, spec_e),
               fock_state(spec_e, (1, 0, 0)), times, tol, {"n1": a.dag() @ a},
               store_states=False, check_positivity=False)
    dev = time_averaged_deviation(times, x.expectations["n1"].real, y.expectations["n1"].real)
    return dev, d.rwa_ratio


def verify_rwa(vs: VerifySection, tol=(1e-8, 1e-10)) -> list:
    dev_ok, ratio_ok = rwa_deviation(vs.rwa_pass_r0, vs.rwa_pass_omega, vs.rwa_pass_gM,
                                     vs.rwa_kappa, vs.rwa_pass_dims, vs.rwa_points, tol)
    dev_bad, ratio_bad = rwa_deviation(vs.rwa_fail_r0, vs.rwa_fail_omega, vs.rwa_fail_gM,
                                       vs.rwa_kappa, vs.rwa_fail_dims, vs.rwa_points, tol)
    return [
        Check("verify-rwa", dev_ok < vs.rwa_tol and ratio_ok >= 20.0, dev_ok, vs.rwa_tol,
              detail=f"rwa_ratio={ratio_ok:.3g}"),
        Check("verify-rwa-low-ratio", dev_bad < vs.rwa_tol, dev_bad, vs.rwa_tol,
              expected_fail=True, detail=f"rwa_ratio={ratio_bad:.3g}"),
    ]


def run_verifications(config: ExperimentConfig, out_dir, executor=None,
                      which=("verify-dissipator", "verify-frames", "verify-rwa")) -> RunResult:
    start = time.perf_counter()
    vs = config.verify
    tol = (config.tolerances.rtol, config.tolerances.atol)
    for key in ("dissipator_r0", "frames_r0", "rwa_pass_r0", "rwa_fail_r0"):
        if not 0.0 < getattr(vs, key) <= 0.5:
            raise ConfigError("must lie in (0, 0.5] for a feasible truncation",
                              f"verify.{key}")
    checks, summary = [], {}
    if "verify-dissipator" in which:
        checks.append(verify_dissipator(vs, config.truncation.dissipator))
    if "verify-frames" in which:
        ck, info = verify_frames(vs, config.truncation.lab, tol)
        checks.append(ck)
        summary["frames_steps"] = info["steps"]
    if "verify-rwa" in which:
        checks += verify_rwa(vs, tol)
    summary["lines"] = [c.line() for c in checks]
    name = "verify"
    return RunResult(name, _manifest(config, name, start, summary, checks, []), checks, [])


RUNNERS = {
    "design": run_design,
    "sweep-xi": run_design,
    "sweep-r0": run_design,
    "spectrum": run_spectrum,
    "g2": run_g2,
    "verify-frames": lambda c, o, e=None: run_verifications(c, o, e, ("verify-frames",)),
    "verify-dissipator": lambda c, o, e=None: run_verifications(c, o, e, ("verify-dissipator",)),
    "verify-rwa": lambda c, o, e=None: run_verifications(c, o, e, ("verify-rwa",)),
}

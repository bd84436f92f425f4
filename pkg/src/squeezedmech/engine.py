"""Liouvillian construction, time evolution, steady states and observables.

Vectorisation is column stacking: ``vec(rho)[i + d*j] = rho[i, j]``, so
``vec(X rho Y) = (Y^T kron X) vec(rho)``. The generator of a :class:`ModelSpec`
is therefore

    L = I kron K + R^T kron I + sum_terms rate * conj(B) kron A

with ``K = -iH - 1/2 sum rate B^dag A`` acting from the left and
``R = iH - 1/2 sum rate B^dag A`` acting from the right.
"""
from __future__ import annotations

import csv
import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.optimize import minimize_scalar

from .errors import (AccuracyError, InvalidParameterError, ModelInvalidError,
                     NonUniqueSteadyStateError, SolverError, SpecMismatchError,
                     TruncationTooSmallError, UndefinedCorrelationError)
from .fock import (HERMITIAN_TOL, POSITIVITY_FLOOR, QOperator, QState,
                   TruncationSpec, mode_operators)
from .integrate import IntegratorStats, dopri5
from .models import ModelSpec, build_reduced_blockade_model

DEFAULT_TOL = (1e-8, 1e-10)
TRACE_DRIFT_LIMIT = 1e-6
OCCUPATION_FLOOR = 1e-12
GAP_TOL = 1e-10
RESIDUAL_TOL = 1e-10
MAX_EPS_RATIO = 0.2
DEFAULT_EPS_RATIO = 0.1
SPECTRUM_HEADER = ("delta0", "S1", "n_cav", "n_mech")
TRAJECTORY_HEADER = ("t", "g2", "n_cav", "n_mech", "trace_err")
DENSE_EIG_LIMIT = 400


@dataclass(frozen=True)
class Liouvillian:
    """Sparse generator on column-stacked density matrices.

    ``rate_scale`` is the largest dissipative rate of the source model (1 when
    there is none) and sets the scale of the uniqueness and residual checks.
    """

    spec: TruncationSpec
    matrix: sp.csr_matrix
    rate_scale: float = 1.0

    @property
    def dim(self) -> int:
        return self.spec.total_dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.matrix @ np.asarray(rho).reshape(-1, order="F")).reshape(d, d, order="F")


def vec(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvec(v: np.ndarray, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


def _kron_coo(x, y):
    k = sp.kron(x, y, format="coo")
    return k.row, k.col, k.data


def build_liouvillian(model: ModelSpec) -> Liouvillian:
    """Superoperator of ``model`` in the column-stacking convention.

    Raises
    ------
    ModelInvalidError
        If the Hamiltonian is not Hermitian.
    """
    if not model.hamiltonian.is_hermitian(HERMITIAN_TOL):
        raise ModelInvalidError("Hamiltonian is not Hermitian")
    d = model.spec.total_dim
    eye = sp.identity(d, dtype=complex, format="csr")
    h = model.hamiltonian.data
    loss = sp.csr_matrix((d, d), dtype=complex)
    parts = []
    rates = [0.0]
    for term in model.dissipators:
        if term.rate == 0:
            continue
        A, B = term.left.data, term.right.data
        loss = loss + term.rate * (B.conj().T @ A)
        parts.append(_kron_coo(term.rate * B.conj(), A))
        rates.append(abs(term.rate))
    K = (-1j * h - 0.5 * loss).tocsr()
    R = (1j * h - 0.5 * loss).tocsr()
    parts.append(_kron_coo(eye, K))
    parts.append(_kron_coo(R.T, eye))
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    data = np.concatenate([p[2] for p in parts])
    mat = sp.csr_matrix((data, (rows, cols)), shape=(d * d, d * d))
    mat.sum_duplicates()
    mat.eliminate_zeros()
    scale = max(rates) if max(rates) > 0 else 1.0
    return Liouvillian(model.spec, mat, scale)


def _as_liouvillian(obj) -> Liouvillian:
    if isinstance(obj, Liouvillian):
        return obj
    if isinstance(obj, ModelSpec):
        return build_liouvillian(obj)
    raise TypeError(f"expected ModelSpec or Liouvillian, got {type(obj).__name__}")


def _trace_weights(op: QOperator) -> sp.csr_matrix:
    """Row vector ``w`` with ``w @ vec(rho) = trace(rho @ X)``."""
    d = op.spec.total_dim
    x = op.data.tocoo()
    # tr(rho X) = sum rho[c, r] X[r, c]; vec index of rho[c, r] is c + d*r
    return sp.csr_matrix((x.data, (np.zeros_like(x.row), x.col + d * x.row)), shape=(1, d * d))


@dataclass
class Trajectory:
    """Recorded time series of an evolution.

    ``expectations`` maps observable names to complex arrays over ``times``.
    ``trace_err`` is ``|tr rho - 1|`` before renormalisation; ``min_eig`` is
    the smallest eigenvalue of each recorded state (NaN if not checked).
    """

    times: np.ndarray
    expectations: dict
    trace_err: np.ndarray
    min_eig: np.ndarray
    stats: IntegratorStats
    states: Optional[list] = None
    wall_time: float = 0.0


def _clean_state(v: np.ndarray, d: int):
    rho = unvec(v, d)
    rho = 0.5 * (rho + rho.conj().T)
    tr = float(np.trace(rho).real)
    return rho / tr, abs(tr - 1.0)


def evolve(model, rho0: QState, times: Sequence[float], tol=DEFAULT_TOL,
           observables: Optional[dict] = None, store_states: bool = True,
           check_positivity: bool = True) -> Trajectory:
    """Integrate the master equation from ``rho0`` and record at ``times``.

    Parameters
    ----------
    model : ModelSpec or Liouvillian
    rho0 : QState
        Initial state on the same truncation.
    times : sequence of float
        Increasing output times; integration starts at ``times[0]``.
    tol : (float, float)
        Relative and absolute local tolerances.
    observables : dict of str -> QOperator, optional
        Expectation values recorded at every output time.
    store_states : bool
        Keep the recorded density matrices (memory heavy for large spaces).
    check_positivity : bool
        Compute the minimum eigenvalue of each recorded state and fail below
        the positivity floor.

    Returns
    -------
    Trajectory

    Raises
    ------
    StiffnessError
        On step-size underflow.
    AccuracyError
        If the trace drifts by more than 1e-6 or positivity is violated.
    """
    L = _as_liouvillian(model)
    if rho0.spec != L.spec:
        raise SpecMismatchError("initial state truncation differs from model")
    rtol, atol = tol
    d = L.dim
    obs = dict(observables or {})
    for name, op in obs.items():
        if op.spec != L.spec:
            raise SpecMismatchError(f"observable {name!r} on a different truncation")
    weights = {name: _trace_weights(op) for name, op in obs.items()}
    mat = L.matrix
    times = np.asarray(times, dtype=float)

    def record(k, t, v):
        rho, err = _clean_state(v, d)
        if err > TRACE_DRIFT_LIMIT:
            raise AccuracyError(f"trace drift {err:.3g} at t={t:.6g} exceeds {TRACE_DRIFT_LIMIT}")
        lam = float(np.linalg.eigvalsh(rho)[0]) if check_positivity else math.nan
        if check_positivity and lam < POSITIVITY_FLOOR:
            raise AccuracyError(f"minimum eigenvalue {lam:.3g} at t={t:.6g} below positivity floor")
        v_clean = vec(rho)
        values = {name: complex((w @ v_clean)[0]) for name, w in weights.items()}
        state = QState(L.spec, rho, check=False) if store_states else None
        return values, err, lam, state

    start = time.perf_counter()
    recs, stats = dopri5(lambda t, y: mat @ y, vec(rho0.rho), times, rtol, atol,
                         callback=record)
    exps = {name: np.array([r[0][name] for r in recs]) for name in obs}
    return Trajectory(times=times, expectations=exps,
                      trace_err=np.array([r[1] for r in recs]),
                      min_eig=np.array([r[2] for r in recs]), stats=stats,
                      states=[r[3] for r in recs] if store_states else None,
                      wall_time=time.perf_counter() - start)


def liouvillian_gap(L: Liouvillian) -> float:
    """Second-smallest ``|Re lambda|`` of the generator (0 if degenerate)."""
    n = L.matrix.shape[0]
    if n <= DENSE_EIG_LIMIT:
        lam = np.linalg.eigvals(L.matrix.toarray())
    else:
        sigma = 1e-3 * L.rate_scale
        try:
            lam = spla.eigs(L.matrix.tocsc(), k=4, sigma=sigma, which="LM",
                            return_eigenvectors=False, tol=1e-12)
        except (RuntimeError, spla.ArpackNoConvergence) as exc:
            raise NonUniqueSteadyStateError(f"gap estimate failed: {exc}") from exc
    re = np.sort(np.abs(lam.real))
    return float(re[1]) if re.size > 1 else math.inf


def _trace_row_system(L: Liouvillian):
    d = L.dim
    coo = L.matrix.tocoo()
    keep = coo.row != 0
    diag = np.arange(d) * (d + 1)
    rows = np.concatenate([coo.row[keep], np.zeros(d, dtype=int)])
    cols = np.concatenate([coo.col[keep], diag])
    data = np.concatenate([coo.data[keep], np.ones(d, dtype=complex)])
    A = sp.csc_matrix((data, (rows, cols)), shape=coo.shape)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    return A, rhs


def _solve(A, rhs):
    # symmetric-mode ordering is much faster here; fall back to partial pivoting
    attempts = (dict(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                     options=dict(SymmetricMode=True)), dict())
    last = None
    for kw in attempts:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", sp.SparseEfficiencyWarning)
                x = spla.splu(A, **kw).solve(rhs)
        except RuntimeError as exc:
            last = exc
            continue
        if np.all(np.isfinite(x)) and np.abs(A @ x - rhs).max() < 1e-9:
            return x
    raise NonUniqueSteadyStateError(f"steady-state system is singular ({last})")


def steady_state(model, check_unique: bool = True) -> QState:
    """Null vector of the generator with unit trace.

    Raises
    ------
    NonUniqueSteadyStateError
        If the generator has a degenerate null space.
    TruncationTooSmallError
        If the solution is indefinite beyond the positivity floor.
    """
    L = _as_liouvillian(model)
    if L.matrix.nnz == 0:
        raise NonUniqueSteadyStateError("generator is zero; every state is stationary")
    if check_unique:
        gap = liouvillian_gap(L)
        if gap <= GAP_TOL * L.rate_scale:
            raise NonUniqueSteadyStateError(f"second eigenvalue |Re| = {gap:.3g} is not separated from 0")
    A, rhs = _trace_row_system(L)
    x = _solve(A, rhs)
    rho, _ = _clean_state(x, L.dim)
    resid = float(np.abs(L.matrix @ vec(rho)).max())
    if resid > RESIDUAL_TOL * L.rate_scale:
        raise NonUniqueSteadyStateError(f"steady-state residual {resid:.3g} too large")
    lam = float(np.linalg.eigvalsh(rho)[0])
    if lam < POSITIVITY_FLOOR:
        raise TruncationTooSmallError(
            f"steady state has eigenvalue {lam:.3g}; increase the Fock cutoffs")
    return QState(L.spec, rho, check=False)


def steady_state_residual(model, state: QState) -> float:
    L = _as_liouvillian(model)
    return float(np.abs(L.matrix @ vec(state.rho)).max())


def _g2_from(n: float, n2: float) -> float:
    if n < OCCUPATION_FLOOR:
        raise UndefinedCorrelationError(f"occupation {n:.3g} below floor {OCCUPATION_FLOOR}")
    return n2 / (n * n)


def g2_zero(state: QState, mode_op: QOperator) -> float:
    """Zero-delay correlation ``<A^dag A^dag A A> / <A^dag A>^2``."""
    from .fock import expectation
    ad = mode_op.dag()
    n = expectation(state, ad @ mode_op).real
    n2 = expectation(state, ad @ ad @ mode_op @ mode_op).real
    return _g2_from(n, n2)


@dataclass
class G2Series:
    """Zero-delay correlation along a trajectory; absent points are NaN."""

    times: np.ndarray
    g2: np.ndarray
    n_cav: np.ndarray
    n_mech: np.ndarray
    trace_err: np.ndarray
    trajectory: Trajectory

    @property
    def present(self) -> np.ndarray:
        return ~np.isnan(self.g2)


def g2_trajectory(model, rho0: QState, times, mode_op: QOperator,
                  mech_op: Optional[QOperator] = None, tol=DEFAULT_TOL,
                  check_positivity: bool = True) -> G2Series:
    """g2(0) at every recorded time; points below the occupation floor are NaN."""
    ad = mode_op.dag()
    obs = {"n": ad @ mode_op, "n2": ad @ ad @ mode_op @ mode_op}
    if mech_op is not None:
        obs["m"] = mech_op.dag() @ mech_op
    traj = evolve(model, rho0, times, tol, obs, store_states=False,
                  check_positivity=check_positivity)
    n = traj.expectations["n"].real
    n2 = traj.expectations["n2"].real
    g2 = np.full(n.shape, np.nan)
    ok = n >= OCCUPATION_FLOOR
    g2[ok] = n2[ok] / n[ok] ** 2
    nm = traj.expectations["m"].real if mech_op is not None else np.full(n.shape, np.nan)
    return G2Series(traj.times, g2, n, nm, traj.trace_err, traj)


@dataclass(frozen=True)
class BlockadeParams:
    """Reduced single-mode blockade problem; frequencies in units of omega_m."""

    g1: float = 1.0
    omega_m: float = 1.0
    kappa: float = 0.1
    gamma_m: float = 1e-3
    n_th: float = 0.0
    dims: tuple = (6, 14)

    def __post_init__(self):
        if self.kappa <= 0 or self.omega_m <= 0:
            raise InvalidParameterError("kappa and omega_m must be positive")
        if self.gamma_m < 0 or self.n_th < 0:
            raise InvalidParameterError("gamma_m and n_th must be >= 0")
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))

    def model(self, delta0: float, epsilon_eff: float) -> ModelSpec:
        return build_reduced_blockade_model(self.g1, delta0, self.omega_m, self.kappa,
                                            self.gamma_m, self.n_th, epsilon_eff,
                                            TruncationSpec(self.dims))


@dataclass(frozen=True)
class SpectrumPoint:
    delta0: float
    s1: float
    n_cav: float
    n_mech: float
    error: Optional[str] = None

    def csv_fields(self) -> list:
        if self.error is not None:
            return [f"{self.delta0:.9g}", "", "", ""]
        return [f"{x:.9g}" for x in (self.delta0, self.s1, self.n_cav, self.n_mech)]


def _resolve_eps(bp: BlockadeParams, epsilon_eff: Optional[float]) -> float:
    eps = DEFAULT_EPS_RATIO * bp.kappa if epsilon_eff is None else float(epsilon_eff)
    if not 0 < eps <= MAX_EPS_RATIO * bp.kappa * (1 + 1e-12):
        raise InvalidParameterError(
            f"epsilon_eff={eps:.3g} outside (0, {MAX_EPS_RATIO} kappa]; weak-drive regime required")
    return eps


def spectrum_point(bp: BlockadeParams, delta0: float, epsilon_eff: Optional[float] = None,
                   check_unique: bool = False) -> SpectrumPoint:
    """``S1 = <A^dag A> / n0`` at one detuning, ``n0 = epsilon_eff^2 / kappa^2``."""
    eps = _resolve_eps(bp, epsilon_eff)
    try:
        model = bp.model(delta0, eps)
        rho = steady_state(model, check_unique=check_unique)
    except SolverError as exc:
        return SpectrumPoint(float(delta0), math.nan, math.nan, math.nan,
                             f"{type(exc).__name__}: {exc}")
    from .fock import expectation
    A, b = mode_operators(model.spec)
    n_cav = expectation(rho, A.dag() @ A).real
    n_mech = expectation(rho, b.dag() @ b).real
    n0 = eps ** 2 / bp.kappa ** 2
    return SpectrumPoint(float(delta0), max(n_cav, 0.0) / n0, n_cav, n_mech)


def excitation_spectrum(bp: BlockadeParams, delta0_grid, epsilon_eff: Optional[float] = None,
                        executor=None) -> list:
    """Steady-state excitation spectrum over ``delta0_grid``.

    Per-point solver failures are returned as points with ``error`` set; the
    sweep continues. Uniqueness of the steady state is checked once, on the
    first grid point. ``executor`` (a ``concurrent.futures`` executor) may be
    used to parallelise; output order always follows the grid.
    """
    grid = [float(x) for x in delta0_grid]
    if not grid:
        raise InvalidParameterError("empty detuning grid")
    eps = _resolve_eps(bp, epsilon_eff)
    first = spectrum_point(bp, grid[0], eps, check_unique=True)
    rest = grid[1:]
    if executor is None:
        others = [spectrum_point(bp, x, eps) for x in rest]
    else:
        others = list(executor.map(spectrum_point, [bp] * len(rest), rest, [eps] * len(rest)))
    return [first] + others


def franck_condon_weights(g1: float, omega_m: float, n_max: Optional[int] = None) -> np.ndarray:
    """Poisson weights ``exp(-beta) beta^n / n!`` with ``beta = (g1 / omega_m)^2``."""
    beta = (g1 / omega_m) ** 2
    if n_max is None:
        n_max = int(beta + 10 * math.sqrt(beta) + 10)
    n = np.arange(n_max + 1)
    lg = np.array([math.lgamma(k + 1) for k in n])
    logw = -beta + n * (math.log(beta) if beta > 0 else 0.0) - lg
    w = np.exp(logw)
    if beta == 0:
        w = (n == 0).astype(float)
    return w


def franck_condon_oracle(g1: float, omega_m: float, kappa: float, delta0_grid,
                         n_max: Optional[int] = None) -> np.ndarray:
    """Weak-drive zero-temperature spectrum of the displaced-oscillator model.

    ``S = sum_n w_n kappa^2 / ((delta0 + g1^2/omega_m - n omega_m)^2 + kappa^2/4)``
    with Poisson weights ``w_n``; at ``g1 = 0`` the peak value is 4.
    """
    x = np.asarray(delta0_grid, dtype=float)
    w = franck_condon_weights(g1, omega_m, n_max)
    zpl = -g1 ** 2 / omega_m
    out = np.zeros_like(x)
    for n, wn in enumerate(w):
        out += wn * kappa ** 2 / ((x - zpl - n * omega_m) ** 2 + kappa ** 2 / 4)
    return out


@dataclass(frozen=True)
class Peak:
    delta0: float
    height: float


def find_peaks(delta0, s1, rel_height: float = 1e-2) -> list:
    """Interior local maxima of a sampled curve above ``rel_height * max``."""
    x = np.asarray(delta0, dtype=float)
    y = np.asarray(s1, dtype=float)
    good = np.isfinite(y)
    x, y = x[good], y[good]
    if y.size < 3:
        return []
    top = y.max()
    idx = [i for i in range(1, y.size - 1)
           if y[i] >= y[i - 1] and y[i] > y[i + 1] and y[i] >= rel_height * top]
    return [Peak(float(x[i]), float(y[i])) for i in idx]


def refine_peak(fn: Callable[[float], float], center: float, halfwidth: float,
                xatol: float = 1e-4) -> Peak:
    """Maximise ``fn`` on ``[center - halfwidth, center + halfwidth]`` (bounded Brent)."""
    res = minimize_scalar(lambda x: -fn(x), bounds=(center - halfwidth, center + halfwidth),
                          method="bounded", options={"xatol": xatol})
    return Peak(float(res.x), float(-res.fun))


def refined_spectrum_peaks(bp: BlockadeParams, points: list, epsilon_eff: Optional[float] = None,
                           rel_height: float = 1e-2) -> list:
    """Grid peaks of a computed spectrum, each refined by a local 1-d maximisation."""
    x = [p.delta0 for p in points]
    y = [p.s1 for p in points]
    coarse = find_peaks(x, y, rel_height)
    step = float(np.median(np.diff(x))) if len(x) > 1 else bp.kappa
    return [refine_peak(lambda d: spectrum_point(bp, d, epsilon_eff).s1, pk.delta0, step)
            for pk in coarse]


def _fmt(x: float) -> str:
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else f"{x:.9g}"


def write_spectrum_csv(path, points: Sequence[SpectrumPoint]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SPECTRUM_HEADER)
        for p in points:
            w.writerow(p.csv_fields())


def write_trajectory_csv(path, series: G2Series):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRAJECTORY_HEADER)
        for row in zip(series.times, series.g2, series.n_cav, series.n_mech, series.trace_err):
            w.writerow([_fmt(float(v)) for v in row])

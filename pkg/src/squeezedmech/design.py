"""Closed-form Bogoliubov-frame design quantities and parameter sweeps.

All frequencies and rates are in units of the mechanical frequency omega_m.
The drive frequency omega_d only enters through the detunings and is kept as
metadata.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import CriticalCouplingError, InvalidParameterError, NotFoundError

RWA_THRESHOLD = 20.0
CONSISTENCY_TOL = 1e-10

SWEEP_XI_HEADER = ("xi", "a", "r0", "M", "N", "G1", "G2", "Omega1", "Omega2",
                   "rwa_ratio", "valid")


@dataclass(frozen=True)
class SystemParams:
    """Physical parameters of the lab-frame model (units of omega_m)."""

    delta1: float
    delta2: float
    xi: float
    g: float
    kappa: float
    gamma_m: float = 0.0
    n_th: float = 0.0
    omega_m: float = 1.0
    omega_d: Optional[float] = None

    def __post_init__(self):
        if not self.kappa > 0:
            raise InvalidParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.gamma_m < 0 or self.n_th < 0 or self.g < 0:
            raise InvalidParameterError("gamma_m, n_th and g must be non-negative")
        if not self.omega_m > 0:
            raise InvalidParameterError(f"omega_m must be > 0, got {self.omega_m}")
        if not self.delta1 + self.delta2 > 0:
            raise InvalidParameterError("delta1 + delta2 must be positive")

    @property
    def delta_sum(self) -> float:
        return self.delta1 + self.delta2

    @property
    def xi0(self) -> float:
        """Critical parametric coupling (delta1 + delta2) / 2."""
        return 0.5 * self.delta_sum

    def replace(self, **changes) -> SystemParams:
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class DerivedParams:
    a: float
    r0: float
    M: float
    N: float
    omega1: float
    omega2: float
    g1: float
    g2: float
    rwa_ratio: float

    def to_dict(self) -> dict:
        return asdict(self)


def _a_minus_2(delta1, delta2, xi):
    # computed from the inputs to avoid cancellation near the critical point
    return (delta1 + delta2 - 2.0 * xi) / xi


def squeeze_parameter(delta1: float, delta2: float, xi: float) -> tuple[float, float]:
    """Return ``(a, r0)`` with ``a = (delta1 + delta2) / xi`` and
    ``r0 = ln((a + 2) / (a - 2)) / 4``.

    Raises
    ------
    InvalidParameterError
        If ``xi <= 0``.
    CriticalCouplingError
        If ``a <= 2``, i.e. ``xi`` at or beyond ``(delta1 + delta2) / 2``.
    """
    if not xi > 0:
        raise InvalidParameterError(f"xi must be > 0, got {xi}")
    a = (delta1 + delta2) / xi
    am2 = _a_minus_2(delta1, delta2, xi)
    if not am2 > 0:
        raise CriticalCouplingError(
            f"a = {a:.12g} <= 2: xi = {xi} at or beyond xi0 = {0.5 * (delta1 + delta2)}")
    # (a + 2) / (a - 2) = 1 + 4 / (a - 2)
    r0 = 0.25 * math.log1p(4.0 / am2)
    return a, r0


def bath_moments(r0: float) -> tuple[float, float]:
    """``(M, N) = (sinh r0 cosh r0, sinh^2 r0)`` of a perfect two-mode squeezed vacuum."""
    if r0 < 0:
        raise InvalidParameterError(f"r0 must be >= 0, got {r0}")
    s, c = math.sinh(r0), math.cosh(r0)
    return s * c, s * s


def effective_couplings(g: float, r0: float) -> tuple[float, float]:
    """``(G1, G2) = (g cosh^2 r0, g sinh^2 r0)``."""
    if g < 0 or r0 < 0:
        raise InvalidParameterError("g and r0 must be non-negative")
    s, c = math.sinh(r0), math.cosh(r0)
    return g * c * c, g * s * s


def bogoliubov_frequencies(delta1: float, delta2: float, xi: float,
                           r0: float) -> tuple[float, float]:
    """Bogoliubov mode frequencies ``(Omega1, Omega2)``.

    ``r0`` must be the value selected by :func:`squeeze_parameter`; a mismatch
    larger than 1e-10 (relative) raises :class:`InvalidParameterError`.
    """
    _, r_expected = squeeze_parameter(delta1, delta2, xi)
    if abs(r0 - r_expected) > CONSISTENCY_TOL * max(1.0, abs(r_expected)):
        raise InvalidParameterError(
            f"r0 = {r0!r} inconsistent with delta1, delta2, xi (expected {r_expected!r})")
    base = (delta1 + delta2 - 2.0 * xi) * math.exp(2.0 * r0)
    return 0.5 * (base + delta1 - delta2), 0.5 * (base + delta2 - delta1)


def rwa_ratio(omega1: float, omega2: float, g: float, M: float,
              omega_m: float = 1.0) -> float:
    return (omega1 + omega2) / max(g * M, omega_m)


def derive(params: SystemParams) -> DerivedParams:
    a, r0 = squeeze_parameter(params.delta1, params.delta2, params.xi)
    M, N = bath_moments(r0)
    g1, g2 = effective_couplings(params.g, r0)
    om1, om2 = bogoliubov_frequencies(params.delta1, params.delta2, params.xi, r0)
    return DerivedParams(a=a, r0=r0, M=M, N=N, omega1=om1, omega2=om2, g1=g1, g2=g2,
                         rwa_ratio=rwa_ratio(om1, om2, params.g, M, params.omega_m))


@dataclass(frozen=True)
class ValidityReport:
    rwa_ratio: float
    threshold: float
    rwa_ok: bool
    positive_frequencies: bool

    @property
    def passed(self) -> bool:
        return self.rwa_ok and self.positive_frequencies


def validity_check(derived: DerivedParams, g: float, omega_m: float = 1.0,
                   threshold: float = RWA_THRESHOLD) -> ValidityReport:
    """Compare ``Omega1 + Omega2`` against ``max(g M, omega_m)``."""
    ratio = rwa_ratio(derived.omega1, derived.omega2, g, derived.M, omega_m)
    return ValidityReport(rwa_ratio=ratio, threshold=threshold, rwa_ok=ratio >= threshold,
                          positive_frequencies=derived.omega1 > 0 and derived.omega2 > 0)


def symmetric_detunings_for(r0: float, omega: float) -> tuple[float, float]:
    """Inverse design: symmetric detuning ``delta`` and ``xi`` giving squeezing
    ``r0`` and ``Omega1 = Omega2 = omega``.

    Uses ``tanh 2r0 = 2 / a`` and ``Omega = xi sqrt(a^2 - 4) / 2``.
    """
    if not r0 > 0 or not omega > 0:
        raise InvalidParameterError("r0 and omega must be positive")
    a = 2.0 / math.tanh(2.0 * r0)
    xi = 2.0 * omega / math.sqrt(a * a - 4.0)
    return 0.5 * a * xi, xi


# ---------------------------------------------------------------------------
# sweeps


@dataclass(frozen=True)
class SweepRow:
    xi: float
    a: float
    derived: Optional[DerivedParams]
    valid: bool
    error: Optional[str] = None

    def csv_fields(self) -> list[str]:
        if self.derived is None:
            return [_fmt(self.xi), _fmt(self.a)] + [""] * 8 + ["0"]
        d = self.derived
        vals = [self.xi, d.a, d.r0, d.M, d.N, d.g1, d.g2, d.omega1, d.omega2, d.rwa_ratio]
        return [_fmt(v) for v in vals] + ["1" if self.valid else "0"]


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def xi_grid(delta_sum: float, n: int, xi_min: Optional[float] = None,
            xi_max: Optional[float] = None, min_gap: float = 1e-9,
            n_beyond: int = 5) -> np.ndarray:
    """Grid of xi values, logarithmically dense toward ``xi0 = delta_sum / 2``.

    Interior points have gaps ``xi0 - xi`` log-spaced between ``xi0 - xi_min``
    and ``max(xi0 - xi_max, min_gap * xi0)``. If ``xi_max >= xi0`` the grid is
    extended by ``n_beyond`` linearly spaced points on ``[xi0, xi_max]``; those
    rows are outside the physical range and sweep as error rows.
    """
    if n < 1:
        raise InvalidParameterError("grid needs at least one point")
    xi0 = 0.5 * delta_sum
    xi_min = 1e-3 * xi0 if xi_min is None else xi_min
    xi_max = xi0 * (1.0 - min_gap) if xi_max is None else xi_max
    if not 0 < xi_min <= xi_max:
        raise InvalidParameterError(f"need 0 < xi_min <= xi_max, got {xi_min}, {xi_max}")
    gap_hi = xi0 - xi_min
    gap_lo = max(xi0 - xi_max, min_gap * xi0)
    if gap_hi <= 0:
        interior = np.array([])
    elif n == 1 or gap_lo >= gap_hi:
        interior = np.array([xi0 - gap_hi])
    else:
        interior = xi0 - np.geomspace(gap_hi, gap_lo, n)
    if xi_max >= xi0:
        tail = np.linspace(xi0, xi_max, max(n_beyond, 1))
        interior = np.concatenate([interior, tail])
    return interior


def _sweep_point(params: SystemParams, xi: float, threshold: float) -> SweepRow:
    a = params.delta_sum / xi if xi > 0 else math.inf
    try:
        derived = derive(params.replace(xi=float(xi)))
    except InvalidParameterError as exc:
        return SweepRow(xi=float(xi), a=a, derived=None, valid=False, error=str(exc))
    report = validity_check(derived, params.g, params.omega_m, threshold)
    return SweepRow(xi=float(xi), a=a, derived=derived, valid=report.passed)


def sweep_xi(params: SystemParams, xi_values: Iterable[float],
             threshold: float = RWA_THRESHOLD, executor=None) -> list[SweepRow]:
    """One row per grid point; points at or beyond xi0 give error rows."""
    xs = [float(x) for x in xi_values]
    if executor is None:
        return [_sweep_point(params, x, threshold) for x in xs]
    return list(executor.map(lambda x: _sweep_point(params, x, threshold), xs))


def sweep_r0(g: float, r0_values: Iterable[float]) -> list[tuple[float, float]]:
    """Rows ``(r0, G1)`` for the coupling-versus-squeezing curve."""
    return [(float(r), effective_couplings(g, float(r))[0]) for r in r0_values]


def write_sweep_csv(rows: Sequence[SweepRow], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_XI_HEADER)
        for row in rows:
            w.writerow(row.csv_fields())


def write_r0_csv(rows: Sequence[tuple[float, float]], path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("r0", "G1"))
        for r0, g1 in rows:
            w.writerow((_fmt(r0), _fmt(g1)))


# ---------------------------------------------------------------------------
# operating point

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_max(f, lo: float, hi: float, tol: float, max_iter: int = 500):
    """Golden-section search for the maximum of a unimodal ``f`` on ``[lo, hi]``."""
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    return (x1, f1) if f1 >= f2 else (x2, f2)


def operating_objective(params: SystemParams, xi: float, weight: float = 1.0) -> float:
    d = derive(params.replace(xi=xi))
    return min(d.g1 / (weight * params.kappa), d.omega1 / params.omega_m)


def find_operating_point(params: SystemParams, weight: float = 1.0,
                         min_gap: float = 1e-14) -> tuple[float, DerivedParams]:
    """Balanced design point maximising ``min(G1 / (weight kappa), Omega1 / omega_m)``.

    The search runs over ``u = ln(xi0 - xi)`` because all the structure sits
    next to the critical coupling. Raises :class:`NotFoundError` when the
    objective has no positive interior maximum.
    """
    if not weight > 0:
        raise InvalidParameterError(f"weight must be > 0, got {weight}")
    xi0 = params.xi0
    u_lo = math.log(min_gap * xi0)
    u_hi = math.log(xi0 * (1.0 - 1e-9))

    def f(u):
        return operating_objective(params, xi0 - math.exp(u), weight)

    u_star, f_star = _golden_max(f, u_lo, u_hi, tol=1e-10)
    edge = 1e-6 * (u_hi - u_lo)
    if not f_star > 0 or u_star - u_lo < edge or u_hi - u_star < edge:
        raise NotFoundError(
            f"no interior maximum of the operating objective (best {f_star:.3g})")
    xi_star = xi0 - math.exp(u_star)
    return xi_star, derive(params.replace(xi=xi_star))

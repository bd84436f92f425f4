"""Hamiltonians and dissipators of the electromechanical model in its frames.

A :class:`ModelSpec` is a time-independent generator: a Hermitian Hamiltonian
plus a list of :class:`DissipatorTerm` entries, each contributing

    rate * (A rho B^dag - 1/2 B^dag A rho - 1/2 rho B^dag A)

to d rho / dt. Diagonal terms have ``A == B``; the squeezed-bath correlations
appear as cross terms that always come in conjugate pairs ``(A, B)``, ``(B, A)``.

Frames (``frame_label``):

- ``lab``: two cavities with parametric coupling, squeezed bath, mechanics.
- ``bogoliubov-exact``: the same dynamics written with the Bogoliubov
  operators ``A1 = cosh r0 a1 + sinh r0 a2^dag`` (and 1 <-> 2) as matrices on
  the lab Fock basis, vacuum-bath dissipators.
- ``effective-rwa``: Bogoliubov modes promoted to primitive modes, pair
  creation terms dropped.
- ``reduced-blockade``: first Bogoliubov mode plus mechanics in the frame
  rotating at the probe frequency.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .design import DerivedParams, SystemParams, bath_moments, derive
from .errors import InvalidParameterError, ModelInvalidError, SpecMismatchError
from .fock import HERMITIAN_TOL, QOperator, TruncationSpec, mode_operators

FRAMES = ("lab", "bogoliubov-exact", "effective-rwa", "reduced-blockade")
MOMENT_TOL = 1e-10


@dataclass(frozen=True)
class DissipatorTerm:
    left: QOperator
    right: QOperator
    rate: float
    left_label: str = ""
    right_label: str = ""

    def __post_init__(self):
        if self.left.spec != self.right.spec:
            raise SpecMismatchError("dissipator operators on different truncations")

    @property
    def is_diagonal(self) -> bool:
        if self.left_label and self.right_label:
            return self.left_label == self.right_label
        return (self.left.data != self.right.data).nnz == 0

    def to_dict(self) -> dict:
        return {"left": self.left_label, "right": self.right_label, "rate": self.rate}


@dataclass(frozen=True)
class ProbeParams:
    """Probe amplitude and rotating-frame probe frequency ``omega_p - omega_d / 2``."""

    epsilon: float
    omega_p_rot: float = 0.0

    def __post_init__(self):
        if self.epsilon < 0:
            raise InvalidParameterError(f"probe amplitude must be >= 0, got {self.epsilon}")


@dataclass(frozen=True)
class ModelSpec:
    spec: TruncationSpec
    hamiltonian: QOperator
    dissipators: tuple
    frame_label: str
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.frame_label not in FRAMES:
            raise ModelInvalidError(f"unknown frame label {self.frame_label!r}")
        object.__setattr__(self, "dissipators", tuple(self.dissipators))
        if self.hamiltonian.spec != self.spec:
            raise SpecMismatchError("Hamiltonian truncation differs from model truncation")
        if not self.hamiltonian.is_hermitian(HERMITIAN_TOL):
            raise ModelInvalidError("Hamiltonian is not Hermitian")
        for term in self.dissipators:
            if term.left.spec != self.spec:
                raise SpecMismatchError("dissipator truncation differs from model truncation")
            if term.is_diagonal and term.rate < 0:
                raise ModelInvalidError(f"negative rate {term.rate} on diagonal term")
        self._check_pairs()

    def _check_pairs(self):
        cross = [t for t in self.dissipators if not t.is_diagonal]
        for t in cross:
            partner = [u for u in cross
                       if (u.left.data != t.right.data).nnz == 0
                       and (u.right.data != t.left.data).nnz == 0
                       and abs(u.rate - t.rate) <= 1e-14 * max(1.0, abs(t.rate))]
            if not partner:
                raise ModelInvalidError(
                    f"cross term ({t.left_label}, {t.right_label}) has no conjugate partner")

    def to_json(self) -> dict:
        """Reproducibility record; operators are rebuilt from it, never stored."""
        return {
            "frame_label": self.frame_label,
            "dims": list(self.spec.dims),
            "parameters": dict(self.parameters),
            "dissipators": [t.to_dict() for t in self.dissipators],
        }


def _hermitize(h: QOperator) -> QOperator:
    return 0.5 * (h + h.dag())


def _mech_terms(b: QOperator, gamma_m: float, n_th: float) -> list:
    bd = b.dag()
    return [DissipatorTerm(b, b, gamma_m * (n_th + 1.0), "b", "b"),
            DissipatorTerm(bd, bd, gamma_m * n_th, "b^dag", "b^dag")]


def _require_modes(spec: TruncationSpec, n: int):
    if spec.n_modes != n:
        raise ModelInvalidError(f"model needs {n} modes, truncation has {spec.n_modes}")


def _check_moments(derived: DerivedParams):
    M, N = bath_moments(derived.r0)
    if abs(M - derived.M) > MOMENT_TOL * max(1.0, M) or abs(N - derived.N) > MOMENT_TOL * max(1.0, N):
        raise InvalidParameterError("bath moments M, N inconsistent with r0")


def build_lab_model(params: SystemParams, derived: Optional[DerivedParams],
                    spec: TruncationSpec) -> ModelSpec:
    """Lab-frame model: parametric cavities, squeezed-bath dissipator, mechanics."""
    _require_modes(spec, 3)
    derived = derive(params) if derived is None else derived
    _check_moments(derived)
    if abs(derived.r0 - derive(params).r0) > MOMENT_TOL * max(1.0, derived.r0):
        raise InvalidParameterError("derived parameters do not belong to params")
    a1, a2, b = mode_operators(spec)
    a1d, a2d, bd = a1.dag(), a2.dag(), b.dag()
    h = (params.delta1 * (a1d @ a1) + params.delta2 * (a2d @ a2)
         + params.xi * (a1d @ a2d + a1 @ a2) + params.omega_m * (bd @ b)
         + params.g * (a1d @ a1) @ (bd + b))
    k, M, N = params.kappa, derived.M, derived.N
    terms = [
        DissipatorTerm(a1, a1, k * (N + 1.0), "a1", "a1"),
        DissipatorTerm(a2, a2, k * (N + 1.0), "a2", "a2"),
        DissipatorTerm(a1d, a1d, k * N, "a1^dag", "a1^dag"),
        DissipatorTerm(a2d, a2d, k * N, "a2^dag", "a2^dag"),
        # kappa M (a1 rho a2 + a2 rho a1 - a1 a2 rho - rho a1 a2 + H.c.)
        DissipatorTerm(a1, a2d, k * M, "a1", "a2^dag"),
        DissipatorTerm(a2d, a1, k * M, "a2^dag", "a1"),
        DissipatorTerm(a2, a1d, k * M, "a2", "a1^dag"),
        DissipatorTerm(a1d, a2, k * M, "a1^dag", "a2"),
    ] + _mech_terms(b, params.gamma_m, params.n_th)
    return ModelSpec(spec, _hermitize(h), terms, "lab", {"params": params.to_dict()})


def bogoliubov_operators(r0: float, spec: TruncationSpec) -> tuple[QOperator, QOperator]:
    """``A1 = cosh r0 a1 + sinh r0 a2^dag`` and ``A2 = cosh r0 a2 + sinh r0 a1^dag``
    on the lab Fock basis (cavities are modes 0 and 1)."""
    if spec.n_modes < 2:
        raise SpecMismatchError("Bogoliubov operators need both cavity modes")
    ops = mode_operators(spec)
    a1, a2 = ops[0], ops[1]
    c, s = math.cosh(r0), math.sinh(r0)
    return c * a1 + s * a2.dag(), c * a2 + s * a1.dag()


def build_bogoliubov_exact_model(params: SystemParams, derived: Optional[DerivedParams],
                                 spec: TruncationSpec) -> ModelSpec:
    """Same dynamics as :func:`build_lab_model`, written with Bogoliubov operators.

    The ``sinh^2 r0 A2 A2^dag`` coupling term is kept anti-normally ordered, so
    the mechanical coupling is exactly ``g a1^dag a1 (b + b^dag)`` away from the
    truncation edge.
    """
    _require_modes(spec, 3)
    derived = derive(params) if derived is None else derived
    _check_moments(derived)
    A1, A2 = bogoliubov_operators(derived.r0, spec)
    b = mode_operators(spec)[2]
    A1d, A2d, bd = A1.dag(), A2.dag(), b.dag()
    c, s = math.cosh(derived.r0), math.sinh(derived.r0)
    coupling = (c * c * (A1d @ A1) + s * s * (A2 @ A2d) - s * c * (A1d @ A2d + A1 @ A2))
    h = (derived.omega1 * (A1d @ A1) + derived.omega2 * (A2d @ A2)
         + params.omega_m * (bd @ b) + params.g * (bd + b) @ coupling)
    terms = [DissipatorTerm(A1, A1, params.kappa, "A1", "A1"),
             DissipatorTerm(A2, A2, params.kappa, "A2", "A2")]
    terms += _mech_terms(b, params.gamma_m, params.n_th)
    return ModelSpec(spec, _hermitize(h), terms, "bogoliubov-exact",
                     {"params": params.to_dict()})


def build_effective_model(derived: DerivedParams, omega_m: float, kappa: float,
                          gamma_m: float, n_th: float, spec: TruncationSpec) -> ModelSpec:
    """Effective radiation-pressure model with Bogoliubov modes as primitive modes.

    Only meaningful when ``derived.rwa_ratio`` is large; the caller decides.
    """
    _require_modes(spec, 3)
    A1, A2, b = mode_operators(spec)
    A1d, A2d, bd = A1.dag(), A2.dag(), b.dag()
    n1, n2, x = A1d @ A1, A2d @ A2, bd + b
    h = (derived.omega1 * n1 + derived.omega2 * n2 + omega_m * (bd @ b)
         + derived.g1 * x @ n1 + derived.g2 * x @ n2)
    terms = [DissipatorTerm(A1, A1, kappa, "A1", "A1"),
             DissipatorTerm(A2, A2, kappa, "A2", "A2")]
    terms += _mech_terms(b, gamma_m, n_th)
    record = {"derived": derived.to_dict(), "omega_m": omega_m, "kappa": kappa,
              "gamma_m": gamma_m, "n_th": n_th}
    return ModelSpec(spec, _hermitize(h), terms, "effective-rwa", record)


def build_reduced_blockade_model(g1: float, delta0: float, omega_m: float, kappa: float,
                                 gamma_m: float, n_th: float, epsilon_eff: float,
                                 spec: TruncationSpec) -> ModelSpec:
    """Single Bogoliubov mode plus mechanics, weakly probed, in the probe frame.

    ``H = -delta0 n + omega_m b^dag b + g1 (b + b^dag) n + epsilon_eff (A + A^dag)``

    with ``delta0`` the probe detuning measured from the Bogoliubov frequency,
    so the zero-phonon line sits at ``delta0 = -g1^2 / omega_m`` and phonon
    sidebands at ``-g1^2 / omega_m + k omega_m``. ``epsilon_eff`` already
    includes the ``cosh r0`` factor of the probe.
    """
    _require_modes(spec, 2)
    if epsilon_eff < 0:
        raise InvalidParameterError("epsilon_eff must be >= 0")
    A, b = mode_operators(spec)
    Ad, bd = A.dag(), b.dag()
    n = Ad @ A
    h = (-delta0) * n + omega_m * (bd @ b) + g1 * (bd + b) @ n + epsilon_eff * (A + Ad)
    terms = [DissipatorTerm(A, A, kappa, "A1", "A1")] + _mech_terms(b, gamma_m, n_th)
    record = {"g1": g1, "delta0": delta0, "omega_m": omega_m, "kappa": kappa,
              "gamma_m": gamma_m, "n_th": n_th, "epsilon_eff": epsilon_eff}
    return ModelSpec(spec, _hermitize(h), terms, "reduced-blockade", record)


def probe_operator(probe: ProbeParams, r0: float, spec: TruncationSpec,
                   rwa: bool = True) -> QOperator:
    """Lowering part ``O`` of the probe term, ``H_p(t) = O e^{i w t} + O^dag e^{-i w t}``
    with ``w = probe.omega_p_rot``.

    ``rwa=True`` keeps ``epsilon cosh r0 A1``; otherwise the counter-rotating
    ``-epsilon sinh r0 A2^dag`` piece is included (needs both Bogoliubov modes,
    modes 0 and 1 of ``spec``, taken as primitive modes).
    """
    ops = mode_operators(spec)
    c, s = math.cosh(r0), math.sinh(r0)
    out = probe.epsilon * c * ops[0]
    if not rwa:
        if spec.n_modes < 2:
            raise SpecMismatchError("full probe term needs both Bogoliubov modes")
        out = out - probe.epsilon * s * ops[1].dag()
    return out


def build_probe_term(probe: ProbeParams, r0: float, spec: TruncationSpec,
                     rwa: bool = True) -> QOperator:
    """Hermitian probe term ``O + O^dag`` at t = 0 (see :func:`probe_operator`).

    In the probe rotating frame the ``A1`` part is static; the ``A2^dag`` part
    rotates at ``2 omega_p_rot`` and is what the RWA discards.
    """
    op = probe_operator(probe, r0, spec, rwa)
    return op + op.dag()


def model_from_json(doc: dict) -> ModelSpec:
    """Rebuild a :class:`ModelSpec` from :meth:`ModelSpec.to_json` output."""
    frame = doc["frame_label"]
    spec = TruncationSpec(tuple(doc["dims"]))
    p = doc["parameters"]
    if frame == "lab":
        return build_lab_model(SystemParams(**p["params"]), None, spec)
    if frame == "bogoliubov-exact":
        return build_bogoliubov_exact_model(SystemParams(**p["params"]), None, spec)
    if frame == "effective-rwa":
        return build_effective_model(DerivedParams(**p["derived"]), p["omega_m"],
                                     p["kappa"], p["gamma_m"], p["n_th"], spec)
    if frame == "reduced-blockade":
        return build_reduced_blockade_model(spec=spec, **p)
    raise ModelInvalidError(f"unknown frame label {frame!r}")


def bogoliubov_vacuum_ket(r0: float, spec: TruncationSpec) -> np.ndarray:
    """Truncated two-mode squeezed vacuum ``sum_n (-tanh r0)^n |n, n, 0...>``.

    This is the state annihilated by both Bogoliubov operators (away from the
    cutoff), normalised on the truncated space. Extra modes sit in vacuum.
    """
    if spec.n_modes < 2:
        raise SpecMismatchError("two cavity modes required")
    psi = np.zeros(spec.total_dim, dtype=complex)
    lam = -math.tanh(r0)
    rest = (0,) * (spec.n_modes - 2)
    for n in range(min(spec.dims[0], spec.dims[1])):
        psi[spec.index((n, n) + rest)] = lam ** n
    return psi / np.linalg.norm(psi)

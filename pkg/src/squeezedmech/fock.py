"""Truncated bosonic operators and density matrices on composite Fock spaces.

Mode order is fixed: mode 0 is the first cavity (or first Bogoliubov) mode,
mode 1 the second, mode 2 the mechanics. Reduced models may drop modes but
keep the relative order. Composite basis states are ordered like
``np.kron(mode0, mode1, ...)``, i.e. mode 0 is the most significant digit.

Operators are always held as CSR sparse matrices; states are dense.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import InvalidStateError, InvalidTruncationError, SpecMismatchError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-10
POSITIVITY_FLOOR = -1e-8
COHERENT_TAIL_TOL = 1e-6


@dataclass(frozen=True)
class TruncationSpec:
    """Per-mode Fock cutoffs; mode k holds levels ``0 .. dims[k] - 1``."""

    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise InvalidTruncationError("at least one mode is required")
        for k, d in enumerate(dims):
            if d < 2:
                raise InvalidTruncationError(f"mode {k} cutoff {d} < 2")
        object.__setattr__(self, "dims", dims)

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return math.prod(self.dims)

    def index(self, occupations: Sequence[int]) -> int:
        """Flat basis index of the product state ``|n0, n1, ...>``."""
        if len(occupations) != self.n_modes:
            raise InvalidTruncationError(
                f"expected {self.n_modes} occupations, got {len(occupations)}")
        for k, (n, d) in enumerate(zip(occupations, self.dims)):
            if not 0 <= n < d:
                raise InvalidTruncationError(
                    f"occupation {n} of mode {k} outside cutoff {d}")
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    def occupations(self, index: int) -> tuple[int, ...]:
        return tuple(int(n) for n in np.unravel_index(index, self.dims))

    def low_excitation_indices(self, max_occupation: int) -> np.ndarray:
        """Basis indices whose every mode occupation is ``<= max_occupation``."""
        ranges = [range(min(max_occupation, d - 1) + 1) for d in self.dims]
        return np.array(sorted(self.index(occ) for occ in product(*ranges)))


def _check_same_spec(x, y):
    if x.spec != y.spec:
        raise SpecMismatchError(f"truncation {x.spec.dims} != {y.spec.dims}")


class QOperator:
    """Complex operator on the composite space of ``spec``.

    Instances are treated as immutable: every operation returns a new object.
    """

    __slots__ = ("spec", "data")

    def __init__(self, spec: TruncationSpec, data):
        mat = sp.csr_matrix(data, dtype=complex)
        n = spec.total_dim
        if mat.shape != (n, n):
            raise SpecMismatchError(
                f"matrix shape {mat.shape} does not match total dimension {n}")
        mat.eliminate_zeros()
        mat.sort_indices()
        self.spec = spec
        self.data = mat

    def __repr__(self):
        return f"QOperator(dims={self.spec.dims}, nnz={self.data.nnz})"

    @property
    def shape(self):
        return self.data.shape

    def toarray(self) -> np.ndarray:
        return self.data.toarray()

    def dag(self) -> QOperator:
        return QOperator(self.spec, self.data.conj().T)

    def __add__(self, other):
        if isinstance(other, QOperator):
            _check_same_spec(self, other)
            return QOperator(self.spec, self.data + other.data)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QOperator):
            _check_same_spec(self, other)
            return QOperator(self.spec, self.data - other.data)
        return NotImplemented

    def __neg__(self):
        return QOperator(self.spec, -self.data)

    def __mul__(self, scalar):
        if isinstance(scalar, QOperator):
            raise TypeError("use @ for operator products")
        if not np.isscalar(scalar):
            return NotImplemented
        return QOperator(self.spec, self.data * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return QOperator(self.spec, self.data / complex(scalar))

    def __matmul__(self, other):
        if isinstance(other, QOperator):
            _check_same_spec(self, other)
            return QOperator(self.spec, self.data @ other.data)
        return NotImplemented

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        diff = self.data - self.data.conj().T
        return diff.nnz == 0 or float(np.abs(diff.data).max()) <= tol


def adjoint(x: QOperator) -> QOperator:
    return x.dag()


def commutator(x: QOperator, y: QOperator) -> QOperator:
    return x @ y - y @ x


def identity(spec: TruncationSpec) -> QOperator:
    return QOperator(spec, sp.identity(spec.total_dim, dtype=complex, format="csr"))


def annihilation(dim: int) -> QOperator:
    """Single-mode lowering operator with ``<n-1|a|n> = sqrt(n)``."""
    spec = TruncationSpec((dim,))
    return QOperator(spec, sp.diags(np.sqrt(np.arange(1, dim)), 1, dtype=complex))


def number(dim: int) -> QOperator:
    """Exact diagonal ``(0, 1, ..., dim - 1)``."""
    return QOperator(TruncationSpec((dim,)), sp.diags(np.arange(dim, dtype=float), 0, dtype=complex))


def embed(op: QOperator, mode_index: int, spec: TruncationSpec) -> QOperator:
    """Place a single-mode operator at ``mode_index`` of a composite space."""
    if not 0 <= mode_index < spec.n_modes:
        raise InvalidTruncationError(
            f"mode index {mode_index} out of range for {spec.n_modes} modes")
    if op.shape[0] != spec.dims[mode_index]:
        raise SpecMismatchError(
            f"operator dimension {op.shape[0]} != cutoff {spec.dims[mode_index]} "
            f"of mode {mode_index}")
    out = sp.identity(1, dtype=complex, format="csr")
    for k, d in enumerate(spec.dims):
        factor = op.data if k == mode_index else sp.identity(d, dtype=complex, format="csr")
        out = sp.kron(out, factor, format="csr")
    return QOperator(spec, out)


def mode_operators(spec: TruncationSpec) -> tuple[QOperator, ...]:
    """Annihilation operators of every mode, embedded in ``spec``."""
    return tuple(embed(annihilation(d), k, spec) for k, d in enumerate(spec.dims))


class QState:
    """Density matrix on ``spec``; validated on construction and read-only."""

    __slots__ = ("spec", "rho")

    def __init__(self, spec: TruncationSpec, rho, check: bool = True):
        rho = np.array(rho, dtype=complex)
        n = spec.total_dim
        if rho.shape != (n, n):
            raise SpecMismatchError(
                f"density matrix shape {rho.shape} does not match total dimension {n}")
        if check:
            _validate_density(rho)
        rho.flags.writeable = False
        self.spec = spec
        self.rho = rho

    def __repr__(self):
        return f"QState(dims={self.spec.dims})"

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))


def _validate_density(rho: np.ndarray):
    herm = np.abs(rho - rho.conj().T).max()
    if herm > HERMITIAN_TOL:
        raise InvalidStateError(f"density matrix not Hermitian (max deviation {herm:.3g})")
    tr = np.trace(rho)
    if abs(tr - 1.0) > TRACE_TOL:
        raise InvalidStateError(f"trace {tr.real:.12g} differs from 1")
    lam = np.linalg.eigvalsh(rho)[0]
    if lam < POSITIVITY_FLOOR:
        raise InvalidStateError(f"minimum eigenvalue {lam:.3g} below positivity floor")


def pure_state(spec: TruncationSpec, ket) -> QState:
    """Projector onto a normalised copy of ``ket``."""
    psi = np.asarray(ket, dtype=complex).ravel()
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise InvalidStateError("zero vector")
    psi = psi / norm
    rho = np.outer(psi, psi.conj())
    return QState(spec, 0.5 * (rho + rho.conj().T))


def fock_state(spec: TruncationSpec, occupations: Sequence[int]) -> QState:
    rho = np.zeros((spec.total_dim,) * 2, dtype=complex)
    i = spec.index(occupations)
    rho[i, i] = 1.0
    return QState(spec, rho)


def coherent_state(dim: int, alpha: complex) -> QState:
    """Truncated and renormalised coherent state ``sum_n alpha^n / sqrt(n!) |n>``."""
    spec = TruncationSpec((dim,))
    nbar = abs(alpha) ** 2
    n = np.arange(dim)
    if nbar > 0:
        lgam = np.array([math.lgamma(k + 1) for k in n])
        tail = 1.0 - float(np.exp(n * math.log(nbar) - nbar - lgam).sum())
    else:
        tail = 0.0
    if nbar > dim / 4 or tail > COHERENT_TAIL_TOL:
        raise InvalidTruncationError(
            f"|alpha|^2 = {nbar:.4g} too large for cutoff {dim} (tail weight {tail:.2g})")
    amps = np.array([alpha ** k / math.sqrt(math.factorial(k)) for k in n], dtype=complex)
    return pure_state(spec, amps)


def thermal_state(dim: int, nbar: float) -> QState:
    """Truncated Bose-Einstein state with mean occupation ``nbar`` (renormalised)."""
    if nbar < 0:
        raise InvalidStateError(f"negative thermal occupation {nbar}")
    spec = TruncationSpec((dim,))
    if nbar == 0:
        p = np.zeros(dim)
        p[0] = 1.0
    else:
        p = (nbar / (1.0 + nbar)) ** np.arange(dim)
        p /= p.sum()
    return QState(spec, np.diag(p).astype(complex))


def tensor(*states: QState) -> QState:
    """Product state in the order given (mode order of the result)."""
    rho = np.ones((1, 1), dtype=complex)
    dims = []
    for s in states:
        rho = np.kron(rho, s.rho)
        dims.extend(s.spec.dims)
    return QState(TruncationSpec(tuple(dims)), rho)


def expectation(state: QState, op: QOperator) -> complex:
    """``trace(rho @ X)``."""
    _check_same_spec(state, op)
    # tr(rho X) = sum_ij rho_ij X_ji
    x = op.data.tocoo()
    return complex(np.sum(state.rho[x.col, x.row] * x.data))

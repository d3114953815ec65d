"""Dense complex linear algebra on register-structured operators.

Matrices are plain 2-d complex ndarrays; tensor-factor structure is carried
separately by RegisterLayout, whose factor order is authoritative.  Nothing
here reorders registers implicitly: kron concatenates layouts left-to-right
and partial_trace keeps the surviving factors in their original order.  Use
permute_registers for explicit reordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLS, MAX_KRON_DIM, BudgetError, Tolerances


def as_matrix(a) -> np.ndarray:
    """Coerce a matrix-like (ndarray or DensityOperator) to a complex ndarray."""
    m = getattr(a, "matrix", a)
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def hermitianize(m: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (m + m^dag)/2."""
    return 0.5 * (m + m.conj().T)


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered tensor-factor structure: dimensions plus unique labels."""

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have equal length")
        if not self.dims:
            raise ValueError("layout needs at least one factor")
        if any(d < 1 for d in self.dims):
            raise ValueError("factor dimensions must be >= 1")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate register labels: {self.labels}")

    @classmethod
    def single(cls, dim: int, label: str = "S") -> "RegisterLayout":
        return cls((dim,), (label,))

    @property
    def dim(self) -> int:
        return math.prod(self.dims)

    @property
    def nfactors(self) -> int:
        return len(self.dims)

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown register label {label!r}; have {self.labels}") from None

    def positions(self, labels: Iterable[str]) -> list[int]:
        """Positions of the given labels, sorted into layout order."""
        pos = sorted(self.position(lb) for lb in labels)
        if len(pos) != len(set(pos)):
            raise ValueError("repeated labels in selection")
        return pos

    def keep(self, labels: Iterable[str]) -> "RegisterLayout":
        """Sub-layout of the given labels, in original factor order."""
        pos = self.positions(labels)
        return RegisterLayout(tuple(self.dims[p] for p in pos), tuple(self.labels[p] for p in pos))

    def dim_of(self, labels: Iterable[str]) -> int:
        return math.prod(self.dims[p] for p in self.positions(labels))


@dataclass(frozen=True)
class DensityOperator:
    """Validated density matrix together with its register layout.

    Construction checks Hermiticity, positivity and unit trace against the
    supplied tolerances; pass validate=False only for operators produced by
    operations that preserve validity (internal fast path).
    """

    matrix: np.ndarray
    layout: RegisterLayout
    validate: bool = field(default=True, repr=False, compare=False)
    tols: Tolerances = field(default=DEFAULT_TOLS, repr=False, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != self.layout.dim:
            raise ValueError(f"matrix dim {m.shape[0]} != layout dim {self.layout.dim}")
        if self.validate:
            t = self.tols
            if np.abs(m - m.conj().T).max() > t.herm:
                raise ValueError("density matrix is not Hermitian within tolerance")
            if abs(m.trace() - 1.0) > t.trace:
                raise ValueError(f"density matrix trace {m.trace():.3e} != 1 within tolerance")
            w = np.linalg.eigvalsh(hermitianize(m))
            if w.min() < -t.psd:
                raise ValueError(f"density matrix has eigenvalue {w.min():.3e} < -psd tolerance")

    @classmethod
    def from_matrix(cls, m, dims: Sequence[int] | None = None,
                    labels: Sequence[str] | None = None, **kw) -> "DensityOperator":
        m = as_matrix(m)
        if dims is None:
            dims = (m.shape[0],)
        if labels is None:
            labels = tuple(f"R{i}" for i in range(len(dims)))
        return cls(m, RegisterLayout(tuple(dims), tuple(labels)), **kw)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def kron(a, b) -> np.ndarray:
    """Kronecker product with a dimension guard; layout bookkeeping is the caller's."""
    a, b = as_matrix(a), as_matrix(b)
    if a.shape[0] * b.shape[0] > MAX_KRON_DIM:
        raise BudgetError(f"kron result dimension {a.shape[0] * b.shape[0]} exceeds MAX_KRON_DIM")
    return np.kron(a, b)


def kron_density(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Tensor product of density operators; layouts concatenate left-to-right."""
    if set(a.layout.labels) & set(b.layout.labels):
        raise ValueError("layouts share labels; relabel before taking products")
    lay = RegisterLayout(a.layout.dims + b.layout.dims, a.layout.labels + b.layout.labels)
    return DensityOperator(kron(a.matrix, b.matrix), lay, validate=False)


def hermitian_eig(h, tols: Tolerances = DEFAULT_TOLS) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector matrix with orthonormal
    columns).  Raises on input that is not Hermitian within tolerance;
    convergence failures surface as numpy.linalg.LinAlgError.
    """
    h = as_matrix(h)
    if np.abs(h - h.conj().T).max() > tols.herm * max(1.0, np.abs(h).max()):
        raise ValueError("matrix is not Hermitian within tolerance")
    w, v = np.linalg.eigh(hermitianize(h))
    return w, v


def partial_trace_matrix(m: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a raw matrix over the factors not listed in keep (positions)."""
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(keep)
    t = m.reshape(dims + dims)
    row = list(range(n))
    col = [i if i not in keep else i + n for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    dk = math.prod(dims[i] for i in keep)
    return np.einsum(t, row + col, out).reshape(dk, dk)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Trace out every register not named in keep; kept factors stay in layout order."""
    pos = rho.layout.positions(keep)
    if not pos:
        raise ValueError("must keep at least one register")
    out = partial_trace_matrix(rho.matrix, rho.layout.dims, pos)
    return DensityOperator(out, rho.layout.keep([rho.layout.labels[p] for p in pos]), validate=False)


def permute_registers(rho: DensityOperator, order: Sequence[str]) -> DensityOperator:
    """Explicitly reorder tensor factors to the given label order."""
    lay = rho.layout
    if sorted(order) != sorted(lay.labels):
        raise ValueError(f"order {order!r} is not a permutation of {lay.labels!r}")
    perm = [lay.position(lb) for lb in order]
    n = lay.nfactors
    t = rho.matrix.reshape(lay.dims + lay.dims)
    t = t.transpose([*perm, *(p + n for p in perm)])
    new = RegisterLayout(tuple(lay.dims[p] for p in perm), tuple(order))
    return DensityOperator(t.reshape(new.dim, new.dim), new, validate=False)


def matrix_sqrt_psd(a, tols: Tolerances = DEFAULT_TOLS) -> np.ndarray:
    """Principal square root of a PSD Hermitian matrix.

    Eigenvalues in [-psd_tol, 0) are clipped to 0; anything more negative is
    an error.
    """
    w, v = hermitian_eig(a, tols)
    if w.min() < -tols.psd:
        raise ValueError(f"matrix has eigenvalue {w.min():.3e}; not PSD within tolerance")
    w = np.sqrt(np.clip(w, 0.0, None))
    return hermitianize((v * w) @ v.conj().T)


def trace_norm(a) -> float:
    """Sum of singular values, computed from the eigenvalues of a^dag a."""
    a = as_matrix(a)
    w = np.linalg.eigvalsh(hermitianize(a.conj().T @ a))
    # eigenvalues below the rounding floor of a^dag a are noise; their square
    # roots would otherwise leak ~sqrt(eps) each into the sum
    floor = w.max(initial=0.0) * a.shape[0] * np.finfo(float).eps
    w = np.where(w > floor, w, 0.0)
    return float(np.sqrt(w).sum())

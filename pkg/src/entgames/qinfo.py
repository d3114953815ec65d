"""Fidelity, entropies, purification and measurement primitives.

All entropic quantities use base-2 logarithms (bits).  Two-state scalar
functions accept either DensityOperator or raw ndarrays; register-aware
functions (conditional entropy, mutual information, measurement, Schmidt
decomposition) need the layout and take DensityOperator / PureState.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .config import DEFAULT_TOLS, Tolerances
from .linalg import (
    DensityOperator,
    RegisterLayout,
    as_matrix,
    hermitian_eig,
    hermitianize,
    matrix_sqrt_psd,
    partial_trace,
    partial_trace_matrix,
    trace_norm,
)


@dataclass(frozen=True)
class PureState:
    """Unit vector with a register layout."""

    amplitudes: np.ndarray
    layout: RegisterLayout
    validate: bool = field(default=True, repr=False, compare=False)
    tols: Tolerances = field(default=DEFAULT_TOLS, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        object.__setattr__(self, "amplitudes", a)
        if a.size != self.layout.dim:
            raise ValueError(f"amplitude length {a.size} != layout dim {self.layout.dim}")
        if not np.all(np.isfinite(a)):
            raise ValueError("amplitudes have non-finite entries")
        if self.validate and abs(np.linalg.norm(a) - 1.0) > self.tols.norm:
            raise ValueError(f"state norm {np.linalg.norm(a):.6e} != 1 within tolerance")

    @classmethod
    def from_vector(cls, v, dims=None, labels=None, **kw) -> "PureState":
        v = np.asarray(v, dtype=complex).reshape(-1)
        if dims is None:
            dims = (v.size,)
        if labels is None:
            labels = tuple(f"R{i}" for i in range(len(dims)))
        return cls(v, RegisterLayout(tuple(dims), tuple(labels)), **kw)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per register."""
        return self.amplitudes.reshape(self.layout.dims)

    def density(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()),
                               self.layout, validate=False)

    def overlap(self, other: "PureState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class Povm:
    """POVM: Hermitian PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...]
    tols: Tolerances = field(default=DEFAULT_TOLS, repr=False, compare=False)

    def __post_init__(self):
        els = tuple(as_matrix(e) for e in self.elements)
        object.__setattr__(self, "elements", els)
        if not els:
            raise ValueError("POVM needs at least one element")
        d = els[0].shape[0]
        t = self.tols
        total = np.zeros((d, d), dtype=complex)
        for e in els:
            if e.shape[0] != d:
                raise ValueError("POVM elements have mixed dimensions")
            if np.abs(e - e.conj().T).max() > t.herm:
                raise ValueError("POVM element is not Hermitian within tolerance")
            if np.linalg.eigvalsh(hermitianize(e)).min() < -t.psd:
                raise ValueError("POVM element is not PSD within tolerance")
            total += e
        if np.abs(total - np.eye(d)).max() > t.proj:
            raise ValueError("POVM elements do not sum to the identity within tolerance")

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def outcome_distribution(self, rho) -> np.ndarray:
        r = as_matrix(rho)
        p = np.array([np.trace(e @ r).real for e in self.elements])
        return np.clip(p, 0.0, None)


# ---------------------------------------------------------------------------
# fidelity family


def fidelity(rho, sigma, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Root fidelity F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1, in [0, 1]."""
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("states have different dimensions")
    f = trace_norm(matrix_sqrt_psd(r, tols) @ matrix_sqrt_psd(s, tols))
    if f > 1.0 + 1e-7:
        raise ValueError(f"fidelity {f} exceeds 1 beyond numerical slack")
    return min(max(f, 0.0), 1.0)


def fbar(rho, sigma, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Fidelity defect 1 - F(rho, sigma)."""
    return 1.0 - fidelity(rho, sigma, tols)


def angle(rho, sigma, tols: Tolerances = DEFAULT_TOLS) -> float:
    """Angle distance arccos F(rho, sigma), a metric in [0, pi/2]."""
    return float(np.arccos(fidelity(rho, sigma, tols)))


def povm_outcome_bound(rho, sigma, povm: Povm) -> float:
    """Classical-outcome fidelity sum_i sqrt(p_i q_i); upper-bounds F(rho, sigma)."""
    p = povm.outcome_distribution(rho)
    q = povm.outcome_distribution(sigma)
    return float(np.sqrt(p * q).sum())


# ---------------------------------------------------------------------------
# purification and Uhlmann partners


def _unique_label(base: str, taken: Iterable[str]) -> str:
    taken = set(taken)
    lb = base
    while lb in taken:
        lb += "_"
    return lb


def purify(rho: DensityOperator, ancilla_label: str | None = None) -> PureState:
    """Canonical purification with ancilla dimension equal to the system dimension.

    Eigenvalues are taken in descending order, so a pure input purifies to
    |anc_0> tensor |psi>.  The ancilla register comes first in the layout.
    """
    w, v = hermitian_eig(rho.matrix, rho.tols)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    d = rho.dim
    amps = (v * np.sqrt(np.clip(w, 0.0, None))).T.reshape(-1)  # index (anc, sys)
    lb = _unique_label(ancilla_label or "anc", rho.layout.labels)
    lay = RegisterLayout((d,) + rho.layout.dims, (lb,) + rho.layout.labels)
    return PureState(amps, lay, validate=False)


def _split_matrix(psi: PureState, system: Iterable[str]) -> tuple[np.ndarray, list[int], list[int]]:
    """Amplitudes as a (d_system x d_ancilla) matrix; returns (M, sys_pos, anc_pos)."""
    lay = psi.layout
    sys_pos = lay.positions(system)
    anc_pos = [p for p in range(lay.nfactors) if p not in sys_pos]
    if not anc_pos:
        raise ValueError("state has no ancilla registers beyond the system")
    t = psi.tensor().transpose(sys_pos + anc_pos)
    d_sys = math.prod(lay.dims[p] for p in sys_pos)
    return t.reshape(d_sys, -1), sys_pos, anc_pos


def max_overlap_isometry(target: np.ndarray, source: np.ndarray) -> tuple[np.ndarray, float]:
    """Isometry U on the ancilla maximizing Re <target| (I (x) U) |source>.

    target/source are (d_system x d_ancilla) amplitude matrices.  The achieved
    overlap equals F of the two reduced states on the system side.  Requires
    target ancilla dimension >= source ancilla dimension.
    """
    d_t, d_s = target.shape[1], source.shape[1]
    if d_t < d_s:
        raise ValueError("target ancilla is smaller than source ancilla")
    b = source.T @ target.conj()          # d_s x d_t
    ub, sv, vbh = np.linalg.svd(b, full_matrices=False)
    u = vbh.conj().T @ ub.conj().T        # d_t x d_s isometry
    return u, float(sv.sum())


def uhlmann_partner(rho: DensityOperator, sigma, phi: PureState,
                    tols: Tolerances = DEFAULT_TOLS) -> PureState:
    """Purification of sigma, on phi's space, closest to the purification phi of rho.

    The system registers are identified by rho's layout labels inside phi; all
    other registers of phi form the ancilla.  The construction is the polar /
    SVD one, so <phi|psi> is real nonnegative and equals F(rho, sigma) up to
    numerics.
    """
    s = as_matrix(sigma)
    if s.shape[0] != rho.dim:
        raise ValueError("sigma dimension differs from rho")
    m_phi, sys_pos, anc_pos = _split_matrix(phi, rho.layout.labels)
    red = partial_trace_matrix(phi.density().matrix, phi.layout.dims, sys_pos)
    if np.abs(red - rho.matrix).max() > 1e-8:
        raise ValueError("phi does not purify rho within 1e-8")

    d_anc = m_phi.shape[1]
    w, v = hermitian_eig(s, tols)
    order = np.argsort(w)[::-1]
    w, v = np.clip(w[order], 0.0, None), v[:, order]
    rank = int((w > tols.support).sum())
    if rank > d_anc:
        raise ValueError(f"phi's ancilla (dim {d_anc}) is too small to purify sigma (rank {rank})")
    k = min(d_anc, rho.dim)
    m_src = v[:, :k] * np.sqrt(w[:k])     # d_sys x k, canonical purification of sigma

    u, _ = max_overlap_isometry(m_phi, m_src)
    m_psi = m_src @ u.T                   # d_sys x d_anc

    lay = phi.layout
    shape = [lay.dims[p] for p in sys_pos] + [lay.dims[p] for p in anc_pos]
    t = m_psi.reshape(shape)
    inv = np.argsort(sys_pos + anc_pos)
    amps = t.transpose(inv).reshape(-1)
    return PureState(amps, lay, validate=False)


# ---------------------------------------------------------------------------
# entropies


def entropy_of_spectrum(w: np.ndarray, tols: Tolerances = DEFAULT_TOLS) -> float:
    w = w[w > tols.zero_eig]
    if w.size == 0:
        return 0.0
    return float(max(-(w * np.log2(w)).sum(), 0.0))


def von_neumann_entropy(rho, tols: Tolerances = DEFAULT_TOLS) -> float:
    """S(rho) in bits; eigenvalues below the zero cutoff contribute 0."""
    w = np.linalg.eigvalsh(hermitianize(as_matrix(rho)))
    return entropy_of_spectrum(w, tols)


def _reduced_entropy(rho: DensityOperator, labels: Iterable[str], tols: Tolerances) -> float:
    return von_neumann_entropy(partial_trace(rho, labels).matrix, tols)


def conditional_entropy(rho: DensityOperator, a: Iterable[str], c: Iterable[str],
                        tols: Tolerances = DEFAULT_TOLS) -> float:
    """S(A|C) = S(AC) - S(C); an empty conditioning set gives plain S(A)."""
    a, c = list(a), list(c)
    if set(a) & set(c):
        raise ValueError("conditioning registers overlap the target registers")
    if not c:
        return _reduced_entropy(rho, a, tols)
    return _reduced_entropy(rho, a + c, tols) - _reduced_entropy(rho, c, tols)


def mutual_information(rho: DensityOperator, x: Iterable[str], y: Iterable[str],
                       tols: Tolerances = DEFAULT_TOLS) -> float:
    """I(X:Y) = S(X) + S(Y) - S(XY)."""
    x, y = list(x), list(y)
    if set(x) & set(y):
        raise ValueError("the two register groups overlap")
    return (_reduced_entropy(rho, x, tols) + _reduced_entropy(rho, y, tols)
            - _reduced_entropy(rho, x + y, tols))


def _support_leak(rho_m: np.ndarray, w_sigma: np.ndarray, v_sigma: np.ndarray,
                  tols: Tolerances) -> tuple[np.ndarray, float]:
    """Diagonal of rho in sigma's eigenbasis, plus rho's mass outside sigma's support."""
    diag = np.einsum("ij,jk,ki->i", v_sigma.conj().T, rho_m, v_sigma).real
    outside = diag[w_sigma <= tols.support]
    return diag, float(np.clip(outside, 0.0, None).sum())


def relative_entropy(rho, sigma, tols: Tolerances = DEFAULT_TOLS) -> float:
    """S(rho || sigma) in bits; +inf iff rho's support leaves sigma's support.

    Support is decided by the eigenvalue cutoff tols.support (1e-10).
    """
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("states have different dimensions")
    ws, vs = hermitian_eig(s, tols)
    diag, leak = _support_leak(r, ws, vs, tols)
    if leak > tols.support:
        return math.inf
    wr = np.linalg.eigvalsh(hermitianize(r))
    tr_rho_log_rho = -entropy_of_spectrum(wr, tols)
    sup = ws > tols.support
    tr_rho_log_sigma = float((diag[sup] * np.log2(ws[sup])).sum())
    return tr_rho_log_rho - tr_rho_log_sigma


def min_relative_entropy(rho, sigma, tols: Tolerances = DEFAULT_TOLS) -> float:
    """S_inf(rho || sigma) = log2 of the least k with rho <= 2^k sigma.

    Computed as log2 lambda_max(sigma^{-1/2} rho sigma^{-1/2}) on sigma's
    support; +inf under the same support rule as relative_entropy.
    """
    r, s = as_matrix(rho), as_matrix(sigma)
    if r.shape != s.shape:
        raise ValueError("states have different dimensions")
    ws, vs = hermitian_eig(s, tols)
    _, leak = _support_leak(r, ws, vs, tols)
    if leak > tols.support:
        return math.inf
    sup = ws > tols.support
    q = (vs[:, sup] / np.sqrt(ws[sup])) @ vs[:, sup].conj().T
    lam = np.linalg.eigvalsh(hermitianize(q @ r @ q)).max()
    return float(np.log2(max(lam, tols.zero_eig)))


# ---------------------------------------------------------------------------
# measurement and Schmidt decomposition


def measure_register(state: PureState | DensityOperator, regs: Iterable[str],
                     tols: Tolerances = DEFAULT_TOLS) -> DensityOperator:
    """Dephase the named registers in the computational basis (explicit pinching).

    Off-diagonal blocks on the measured registers are zeroed exactly; no
    sampling is involved.  Idempotent, trace preserving.
    """
    rho = state.density() if isinstance(state, PureState) else state
    lay = rho.layout
    pos = lay.positions(regs)
    n = lay.nfactors
    t = rho.matrix.reshape(lay.dims + lay.dims).copy()
    for p in pos:
        shape = [1] * (2 * n)
        shape[p] = lay.dims[p]
        shape[p + n] = lay.dims[p]
        t = t * np.eye(lay.dims[p]).reshape(shape)
    return DensityOperator(t.reshape(lay.dim, lay.dim), lay, validate=False, tols=tols)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Schmidt data across a bipartition: descending coefficients and bases.

    left/right basis vectors are the columns; they live on the (cut, rest)
    register ordering, each side's factors in original layout order.
    """

    coefficients: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    left_labels: tuple[str, ...]
    right_labels: tuple[str, ...]

    def reconstruct(self) -> np.ndarray:
        """Amplitudes on the (left, right) ordering."""
        return (self.left_vectors * self.coefficients) @ self.right_vectors.T


def schmidt_decompose(psi: PureState, cut: Iterable[str]) -> SchmidtDecomposition:
    """Schmidt decomposition across the bipartition (cut registers, rest)."""
    lay = psi.layout
    cut_pos = lay.positions(cut)
    rest_pos = [p for p in range(lay.nfactors) if p not in cut_pos]
    if not rest_pos:
        raise ValueError("cut must leave at least one register on the other side")
    t = psi.tensor().transpose(cut_pos + rest_pos)
    d_left = math.prod(lay.dims[p] for p in cut_pos)
    m = t.reshape(d_left, -1)
    u, sv, vh = np.linalg.svd(m, full_matrices=False)
    return SchmidtDecomposition(
        coefficients=sv,
        left_vectors=u,
        right_vectors=vh.T,
        left_labels=tuple(lay.labels[p] for p in cut_pos),
        right_labels=tuple(lay.labels[p] for p in rest_pos),
    )

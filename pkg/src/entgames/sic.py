"""Superposed information cost: objective, decoupling construction, scalar bounds.

The central object is the superposition state
|Omega> = sum_xy sqrt(p_xy) |x>_X |phi_xy>_AB |y>_Y on registers X, A, B, Y.
The cost objective is I(X:BY) + I(Y:XA), each mutual information computed
with the named input register dephased.  For product input distributions,
build_decoupling constructs per-input isometries (Alice's U_x on A, Bob's V_y
on B) that push the state toward a product across the (inputs : work
registers) cut, with fidelity defects controlled by 9*delta and 81*delta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .games import AdviceEnsemble
from .linalg import (
    RegisterLayout,
    hermitian_eig,
    kron_density,
    partial_trace,
    permute_registers,
)
from .qinfo import PureState, fidelity, max_overlap_isometry, measure_register, mutual_information

_REGS = ("X", "A", "B", "Y")


@dataclass(frozen=True)
class SuperposedState:
    """Superposition over input pairs with per-input advice states."""

    p: np.ndarray
    advice: AdviceEnsemble
    state: PureState

    @classmethod
    def build(cls, p, advice_states) -> "SuperposedState":
        """Assemble |Omega> from a distribution and a (k, k, dA, dB) advice table."""
        p = np.asarray(p, dtype=float)
        k = p.shape[0]
        if p.shape != (k, k):
            raise ValueError("p must be square")
        if p.min() < -1e-15 or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("p is not a probability distribution")
        adv = advice_states if isinstance(advice_states, AdviceEnsemble) \
            else AdviceEnsemble(np.asarray(advice_states, dtype=complex), p)
        if adv.k != k:
            raise ValueError("advice table shape does not match p")
        if np.abs(adv.p - p).max() > 1e-12:
            raise ValueError("advice ensemble carries a different distribution")
        da, db = adv.dims()
        amps = np.sqrt(p)[:, None, None, :] * adv.states.transpose(0, 2, 3, 1)
        layout = RegisterLayout((k, da, db, k), _REGS)
        state = PureState(amps.reshape(-1), layout)
        diag = np.diag(partial_trace(state.density(), ("X", "Y")).matrix).real
        if np.abs(diag.reshape(k, k) - p).max() > 1e-9:
            raise ValueError("reduced (X, Y) diagonal does not match p")
        return cls(p, adv, state)

    @property
    def k(self) -> int:
        return self.p.shape[0]

    def dims(self) -> tuple[int, int]:
        return self.advice.dims()


def sic_terms(omega: SuperposedState) -> tuple[float, float]:
    """(I(X:BY), I(Y:XA)), each with the corresponding input register dephased."""
    mx = measure_register(omega.state, ("X",))
    my = measure_register(omega.state, ("Y",))
    return (mutual_information(mx, ("X",), ("B", "Y")),
            mutual_information(my, ("Y",), ("X", "A")))


def sic_objective(omega: SuperposedState) -> float:
    """The superposed information cost objective I(X:BY) + I(Y:XA), in bits."""
    ix, iy = sic_terms(omega)
    return ix + iy


# ---------------------------------------------------------------------------
# decoupling construction


@dataclass(frozen=True)
class DecouplingResult:
    """Isometries and fidelity defects from the decoupling construction.

    isometries_alice[x] maps A into A' (dim |A||X|), isometries_bob[y] maps B
    into B' (dim |B||Y|).  delta_in = max of the two objective terms measured
    on the input; fbar_alice is the defect of the Alice-only state against the
    X : A'BY product cut (bounded by 9 * I(X:BY)); fbar_out is the defect of
    the fully rotated state against the XY : A'B' cut (bounded by
    81 * delta_in).
    """

    isometries_alice: np.ndarray
    isometries_bob: np.ndarray
    delta_x: float
    delta_y: float
    delta_in: float
    fbar_alice: float
    fbar_out: float
    state_alice: PureState
    state_out: PureState


def _canonical_purification_matrix(rho: np.ndarray, anc_dim: int) -> np.ndarray:
    """(d_sys x anc_dim) amplitude matrix purifying rho, eigenvalues descending."""
    w, v = hermitian_eig(rho)
    order = np.argsort(w)[::-1]
    w = np.clip(w[order], 0.0, None)
    v = v[:, order]
    k = min(anc_dim, rho.shape[0])
    if w[k:].sum() > 1e-9:
        raise ValueError("ancilla too small to purify: trailing eigenvalue mass")
    # pad unused ancilla directions with zero amplitude so the matrix always
    # has anc_dim columns; the polar isometries downstream need the full width
    m = np.zeros((rho.shape[0], anc_dim), dtype=complex)
    m[:, :k] = v[:, :k] * np.sqrt(w[:k])
    return m


def build_decoupling(omega: SuperposedState) -> DecouplingResult:
    """Construct decoupling isometries for a product input distribution.

    For each x, U_x is the maximal-overlap (polar construction) isometry
    between the purification of the BY-conditional state rho_x carried by the
    ancilla A, and a fixed canonical purification of the average rho_+ on a
    larger ancilla A'.  Bob's V_y mirror this on the other side.  The reported
    defects satisfy fbar_alice <= 9*I(X:BY) and fbar_out <= 81*delta_in up to
    numerical slack.
    """
    p = omega.p
    k = omega.k
    px, py = p.sum(axis=1), p.sum(axis=0)
    if np.abs(p - np.outer(px, py)).max() > 1e-10:
        raise ValueError("decoupling construction requires a product input distribution")

    da, db = omega.dims()
    da2, db2 = da * k, db * k
    delta_x, delta_y = sic_terms(omega)
    px, py = np.clip(px, 0.0, None), np.clip(py, 0.0, None)

    omega_t = omega.state.tensor()                      # [x, a, b, y]
    rho_full = omega.state.density()

    # Alice side: conditionals on (B, Y) given x, average rho_+.
    rho_plus = partial_trace(rho_full, ("B", "Y")).matrix
    m_phi = _canonical_purification_matrix(rho_plus, da2)   # (db*k, da2), sys = (B, Y)
    u_list = np.zeros((k, da2, da), dtype=complex)
    for x in range(k):
        if px[x] <= 1e-15:
            u_list[x] = np.eye(da2, da)                 # weightless input, any isometry
            continue
        psi_x = omega_t[x] / math.sqrt(px[x])           # [a, b, y]
        src = psi_x.transpose(1, 2, 0).reshape(db * k, da)
        u_list[x], _ = max_overlap_isometry(m_phi, src)

    omega1_t = np.einsum("xpa,xaby->xpby", u_list, omega_t)
    lay1 = RegisterLayout((k, da2, db, k), _REGS)
    omega1 = PureState(omega1_t.reshape(-1), lay1, validate=False)
    rho1 = omega1.density()
    prod1 = kron_density(partial_trace(rho1, ("X",)),
                         partial_trace(rho1, ("A", "B", "Y")))
    fbar_alice = 1.0 - fidelity(rho1.matrix, prod1.matrix)

    # Bob side: conditionals on (X, A) given y.
    rho_plus_b = partial_trace(rho_full, ("X", "A")).matrix
    m_phi_b = _canonical_purification_matrix(rho_plus_b, db2)  # (k*da, db2), sys = (X, A)
    v_list = np.zeros((k, db2, db), dtype=complex)
    for y in range(k):
        if py[y] <= 1e-15:
            v_list[y] = np.eye(db2, db)
            continue
        psi_y = omega_t[:, :, :, y] / math.sqrt(py[y])  # [x, a, b]
        src = psi_y.reshape(k * da, db)
        v_list[y], _ = max_overlap_isometry(m_phi_b, src)

    omega3_t = np.einsum("yqb,xpby->xpqy", v_list, omega1_t)
    lay3 = RegisterLayout((k, da2, db2, k), _REGS)
    omega3 = PureState(omega3_t.reshape(-1), lay3, validate=False)
    rho3 = omega3.density()
    prod3 = kron_density(partial_trace(rho3, ("X", "Y")),
                         partial_trace(rho3, ("A", "B")))
    fbar_out = 1.0 - fidelity(rho3.matrix, permute_registers(prod3, _REGS).matrix)

    return DecouplingResult(
        isometries_alice=u_list,
        isometries_bob=v_list,
        delta_x=delta_x,
        delta_y=delta_y,
        delta_in=max(delta_x, delta_y),
        fbar_alice=fbar_alice,
        fbar_out=fbar_out,
        state_alice=omega1,
        state_out=omega3,
    )


# ---------------------------------------------------------------------------
# scalar bounds and grid checks


def sic_lower_bound(epsilon: float, delta: float) -> float:
    """Value of the scalar bound (1 - sqrt((1-eps)(1-delta)) - sqrt(delta*eps)) / 81.

    Any strategy family whose objective is at most delta while winning with
    probability 1 - delta on a game of entangled value 1 - eps forces the
    superposed cost to be at least this.
    """
    if not 0.0 <= epsilon <= 1.0 or not 0.0 <= delta <= 1.0:
        raise ValueError("epsilon and delta must lie in [0, 1]")
    return (1.0 - math.sqrt((1.0 - epsilon) * (1.0 - delta))
            - math.sqrt(delta * epsilon)) / 81.0


@dataclass(frozen=True)
class GridReport:
    """Outcome of a scalar claim evaluated over a parameter grid."""

    claim: str
    grid_size: int
    holds_everywhere: bool
    n_failures: int
    worst_margin: float
    worst_point: float

    def summary(self) -> str:
        status = "holds" if self.holds_everywhere else \
            f"FAILS at {self.n_failures} of {self.grid_size} points"
        return (f"{self.claim}: {status}; worst margin {self.worst_margin:.3e} "
                f"at {self.worst_point:.6g}")


def _grid_report(claim: str, grid: np.ndarray, margins: np.ndarray) -> GridReport:
    i = int(np.argmin(margins))
    fails = int((margins < 0.0).sum())
    return GridReport(claim, len(grid), fails == 0, fails,
                      float(margins[i]), float(grid[i]))


def check_bound_at_delta_zero(grid_size: int = 10_000) -> GridReport:
    """sic_lower_bound(eps, 0) >= eps/162 over an epsilon grid.  Holds."""
    eps = np.linspace(0.0, 1.0, grid_size)
    vals = (1.0 - np.sqrt(1.0 - eps)) / 81.0
    return _grid_report("bound(eps,0) >= eps/162", eps, vals - eps / 162.0)


def special_case_report(grid_size: int = 10_000, divisor: float = 324.0) -> GridReport:
    """Evaluate the claimed special case bound(eps, eps/8) >= eps/divisor.

    This claim FAILS for small eps (e.g. eps = 0.1 gives about 2.7e-4 versus
    eps/324 about 3.09e-4); the report records the failing region as a
    finding.  Nothing asserts it.
    """
    eps = np.linspace(0.0, 1.0, grid_size)
    vals = (1.0 - np.sqrt((1.0 - eps) * (1.0 - eps / 8.0))
            - np.sqrt(eps * eps / 8.0)) / 81.0
    return _grid_report(f"bound(eps, eps/8) >= eps/{divisor:g}", eps, vals - eps / divisor)


def check_supercos(grid_size: int = 10_000) -> GridReport:
    """1 - cos(alpha) <= 9 (1 - cos(alpha/3)) on [0, pi].  Holds."""
    al = np.linspace(0.0, math.pi, grid_size)
    return _grid_report("1-cos(a) <= 9(1-cos(a/3))", al,
                        9.0 * (1.0 - np.cos(al / 3.0)) - (1.0 - np.cos(al)))


@dataclass(frozen=True)
class ShiftCheckReport:
    """Grid verification that a small fidelity-defect bound caps the win rate.

    Implication checked pointwise over omega in [0, 1]: whenever
    1 - sqrt(omega(1-eps)) - sqrt((1-omega)eps) <= eps/8, then
    omega <= 1 - eps/4.  min_slack is the smallest excess of the left side
    over eps/8 in the forbidden region omega > 1 - eps/4 (positive means the
    implication holds with room; it shrinks like O(eps^2) as eps -> 0).
    """

    epsilon: float
    grid_size: int
    violations: int
    max_premise_omega: float
    min_slack: float

    @property
    def holds(self) -> bool:
        return self.violations == 0


def rel_ent_game_shift_check(epsilon: float, grid_size: int = 4001,
                             tol: float = 1e-12) -> ShiftCheckReport:
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    om = np.linspace(0.0, 1.0, grid_size)
    lhs = 1.0 - np.sqrt(om * (1.0 - epsilon)) - np.sqrt((1.0 - om) * epsilon)
    premise = lhs <= epsilon / 8.0
    beyond = om > 1.0 - epsilon / 4.0 + tol
    violations = int((premise & beyond).sum())
    max_premise = float(om[premise].max()) if premise.any() else math.nan
    min_slack = float((lhs[beyond] - epsilon / 8.0).min()) if beyond.any() else math.inf
    return ShiftCheckReport(epsilon, grid_size, violations, max_premise, min_slack)

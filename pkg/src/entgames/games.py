"""Two-player one-round games: values, strategies, repetition.

A game is (inputs [k] x [k] with distribution p, outputs [l] x [l], winning
predicate V indexed [a, b, x, y]).  Repeated games use little-endian
mixed-radix index encoding: round 1 is the least significant digit of every
combined input/output index.  The protocol simulator relies on that encoding.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import (
    DEFAULT_TOLS,
    MAX_ENUMERATION,
    MAX_TABLE_ENTRIES,
    BudgetError,
    Tolerances,
)
from .linalg import RegisterLayout, hermitian_eig, hermitianize
from .qinfo import PureState
from .random_states import haar_state, random_projective, rng_for

_STREAM_SEESAW = 101
_STREAM_ADVICE = 102


@dataclass(frozen=True)
class Game:
    """Finite two-player game with shared input distribution.

    p has shape (k, k) indexed [x, y]; v has shape (l, l, k, k) indexed
    [a, b, x, y] with boolean entries.  Tables are frozen read-only.
    """

    k: int
    l: int
    p: np.ndarray
    v: np.ndarray
    name: str | None = None

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float).copy()
        v = np.asarray(self.v).astype(bool).copy()
        if p.shape != (self.k, self.k):
            raise ValueError(f"p has shape {p.shape}, expected {(self.k, self.k)}")
        if v.shape != (self.l, self.l, self.k, self.k):
            raise ValueError(f"V has shape {v.shape}, expected {(self.l, self.l, self.k, self.k)}")
        if p.min() < -1e-15:
            raise ValueError("p has negative entries")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError(f"p sums to {p.sum()!r}, not 1 within 1e-12")
        p.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "v", v)

    def __eq__(self, other):
        if not isinstance(other, Game):
            return NotImplemented
        return (self.k == other.k and self.l == other.l and self.name == other.name
                and np.array_equal(self.p, other.p) and np.array_equal(self.v, other.v))


def chsh() -> Game:
    """The CHSH game: uniform inputs, win iff a xor b = x and y."""
    p = np.full((2, 2), 0.25)
    v = np.zeros((2, 2, 2, 2), dtype=bool)
    for a in range(2):
        for b in range(2):
            for x in range(2):
                for y in range(2):
                    v[a, b, x, y] = (a ^ b) == (x & y)
    return Game(2, 2, p, v, name="CHSH")


# ---------------------------------------------------------------------------
# strategies


@dataclass(frozen=True)
class ClassicalStrategy:
    """Deterministic maps input -> output for each player."""

    alice: tuple[int, ...]
    bob: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alice", tuple(int(a) for a in self.alice))
        object.__setattr__(self, "bob", tuple(int(b) for b in self.bob))


@dataclass(frozen=True)
class QuantumStrategy:
    """Shared pure state plus projective measurements per input.

    alice/bob have shape (k, l, d, d): measurement element for (input, output).
    """

    state: PureState
    alice: np.ndarray
    bob: np.ndarray

    def dims(self) -> tuple[int, int]:
        return self.state.layout.dims[0], self.state.layout.dims[1]

    def validate(self, tols: Tolerances = DEFAULT_TOLS) -> None:
        da, db = self.dims()
        for name, meas, d in (("alice", self.alice, da), ("bob", self.bob, db)):
            if meas.shape[2:] != (d, d):
                raise ValueError(f"{name} measurement dimension mismatch")
            for x in range(meas.shape[0]):
                total = np.zeros((d, d), dtype=complex)
                for a in range(meas.shape[1]):
                    e = meas[x, a]
                    if np.abs(e - e.conj().T).max() > tols.proj:
                        raise ValueError(f"{name} element ({x},{a}) is not Hermitian")
                    if np.abs(e @ e - e).max() > tols.proj:
                        raise ValueError(f"{name} element ({x},{a}) is not idempotent within tolerance")
                    total += e
                if np.abs(total - np.eye(d)).max() > tols.proj:
                    raise ValueError(f"{name} measurement for input {x} does not sum to identity")


@dataclass(frozen=True)
class AdviceEnsemble:
    """Input-indexed family of shared pure states on A (x) B.

    states has shape (k, k, dA, dB), amplitudes of the state handed out for
    input pair (x, y); p is the input distribution the ensemble is built for.
    """

    states: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.states, dtype=complex)
        p = np.asarray(self.p, dtype=float)
        if s.ndim != 4 or s.shape[0] != s.shape[1] or s.shape[0] != p.shape[0]:
            raise ValueError(f"states shape {s.shape} inconsistent with p shape {p.shape}")
        norms = np.linalg.norm(s.reshape(s.shape[0], s.shape[1], -1), axis=2)
        if np.abs(norms - 1.0).max() > DEFAULT_TOLS.norm:
            raise ValueError("advice states must be normalized")
        object.__setattr__(self, "states", s)
        object.__setattr__(self, "p", p)

    @property
    def k(self) -> int:
        return self.states.shape[0]

    def dims(self) -> tuple[int, int]:
        return self.states.shape[2], self.states.shape[3]


# ---------------------------------------------------------------------------
# index encoding for repeated games (little-endian, round 1 least significant)


def encode_tuple(digits, base: int) -> int:
    """Little-endian mixed-radix encode: digits[0] is round 1, least significant."""
    idx = 0
    for i, d in enumerate(digits):
        if not 0 <= d < base:
            raise ValueError(f"digit {d} out of range for base {base}")
        idx += int(d) * base**i
    return idx


def decode_index(idx: int, base: int, n: int) -> tuple[int, ...]:
    """Inverse of encode_tuple."""
    if not 0 <= idx < base**n:
        raise ValueError(f"index {idx} out of range for base {base}, {n} rounds")
    return tuple((idx // base**i) % base for i in range(n))


def _digit_table(base: int, n: int) -> np.ndarray:
    """(base**n, n) array; row r holds decode_index(r, base, n)."""
    idx = np.arange(base**n)
    return np.stack([(idx // base**i) % base for i in range(n)], axis=1)


# ---------------------------------------------------------------------------
# classical value


@dataclass(frozen=True)
class ClassicalValueResult:
    value: float
    strategy: ClassicalStrategy


def classical_value(g: Game, budget: int = MAX_ENUMERATION) -> ClassicalValueResult:
    """Exact classical value by exhaustive enumeration of deterministic maps.

    Alice maps are enumerated in lexicographic order on (a(0),...,a(k-1)); for
    each, Bob's best reply decomposes per input y.  Ties resolve to the
    lexicographically smallest (alice, bob) pair.
    """
    k, l = g.k, g.l
    n_maps = l**k
    if n_maps > budget:
        raise BudgetError(f"l^k = {n_maps} exceeds enumeration budget {budget}")

    # lexicographic order: digit for x=0 most significant
    powers = l ** np.arange(k - 1, -1, -1)
    xs = np.arange(k)
    v_xaby = g.v.transpose(2, 0, 1, 3).astype(float)          # [x, a, b, y]
    best_val = -1.0
    best_alice = best_bob = None
    chunk = max(1, min(n_maps, 1 << 14))
    for lo in range(0, n_maps, chunk):
        ms = np.arange(lo, min(lo + chunk, n_maps))
        amaps = (ms[:, None] // powers[None, :]) % l          # (m, k)
        t = v_xaby[xs[None, :], amaps]                        # (m, x, b, y)
        s = np.einsum("xy,mxby->myb", g.p, t)
        vals = s.max(axis=2).sum(axis=1)
        m_star = int(np.argmax(vals))
        if vals[m_star] > best_val + 1e-15:
            best_val = float(vals[m_star])
            best_alice = tuple(int(a) for a in amaps[m_star])
            best_bob = tuple(int(b) for b in s[m_star].argmax(axis=1))
    return ClassicalValueResult(best_val, ClassicalStrategy(best_alice, best_bob))


def strategy_win_probability(g: Game, strategy: ClassicalStrategy | QuantumStrategy) -> float:
    """Exact winning probability of a strategy in g."""
    if isinstance(strategy, ClassicalStrategy):
        if len(strategy.alice) != g.k or len(strategy.bob) != g.k:
            raise ValueError("strategy input arity does not match the game")
        a = np.array(strategy.alice)
        b = np.array(strategy.bob)
        xs = np.arange(g.k)
        return float((g.p * g.v[a[:, None], b[None, :], xs[:, None], xs[None, :]]).sum())
    phi = strategy.state.tensor()
    kmat = np.einsum("ij,ybkj,lk->ybil", phi, strategy.bob, phi.conj())
    return float(np.einsum("xy,abxy,xail,ybli->", g.p, g.v.astype(float),
                           strategy.alice, kmat).real)


# ---------------------------------------------------------------------------
# see-saw heuristic for the entangled value


def _best_projective(ops: np.ndarray) -> np.ndarray:
    """Projective measurement maximizing sum_a Tr(P_a ops[a]), heuristically.

    Two outcomes: exact positive/negative eigenspace split of the difference
    (zero eigenvalues go to outcome 0).  More outcomes: greedy eigenvalue
    assignment by iterative subspace compression, ties to the lowest output.
    """
    l, d = ops.shape[0], ops.shape[1]
    out = np.zeros_like(ops)
    if l == 1:
        out[0] = np.eye(d)
        return out
    if l == 2:
        w, v = np.linalg.eigh(hermitianize(ops[0] - ops[1]))
        sel = v[:, w >= 0.0]
        p0 = sel @ sel.conj().T
        out[0] = hermitianize(p0)
        out[1] = hermitianize(np.eye(d) - p0)
        return out
    q = np.eye(d, dtype=complex)
    for _ in range(d):
        r = q.shape[1]
        best_a, best_lam, best_u = -1, -np.inf, None
        for a in range(l):
            c = hermitianize(q.conj().T @ ops[a] @ q)
            w, v = np.linalg.eigh(c)
            if w[-1] > best_lam + 1e-15:
                best_a, best_lam, best_u = a, float(w[-1]), v[:, -1]
        vec = q @ best_u
        out[best_a] += np.outer(vec, vec.conj())
        if r == 1:
            break
        comp = np.eye(r, dtype=complex) - np.outer(best_u, best_u.conj())
        wh, vh = np.linalg.eigh(hermitianize(comp))
        q = q @ vh[:, 1:]
    return np.stack([hermitianize(m) for m in out])


def _measurement_score(meas_x: np.ndarray, ops_x: np.ndarray) -> float:
    return float(np.einsum("ail,ali->", meas_x, ops_x).real)


def _update_measurements(meas: np.ndarray, ops: np.ndarray) -> np.ndarray:
    """Per-input best-projective update, kept only when it does not decrease the score."""
    new = meas.copy()
    for x in range(meas.shape[0]):
        cand = _best_projective(ops[x])
        if _measurement_score(cand, ops[x]) >= _measurement_score(meas[x], ops[x]):
            new[x] = cand
    return new


def _alice_payoffs(g: Game, bob: np.ndarray, phi: np.ndarray) -> np.ndarray:
    kmat = np.einsum("ij,ybkj,lk->ybil", phi, bob, phi.conj())
    return np.einsum("xy,abxy,ybil->xail", g.p, g.v.astype(float), kmat)


def _bob_payoffs(g: Game, alice: np.ndarray, phi: np.ndarray) -> np.ndarray:
    cmat = np.einsum("ij,xali,lm->xajm", phi, alice, phi.conj())
    return np.einsum("xy,abxy,xajm->ybjm", g.p, g.v.astype(float), cmat)


def _payoff_operator(g: Game, alice: np.ndarray, bob: np.ndarray) -> np.ndarray:
    d = alice.shape[2] * bob.shape[2]
    t = np.einsum("xy,abxy,xail,ybjm->ijlm", g.p, g.v.astype(float), alice, bob)
    return hermitianize(t.reshape(d, d))


@dataclass(frozen=True)
class SeesawResult:
    """Best lower bound found, its strategy, and per-restart value traces."""

    value: float
    strategy: QuantumStrategy
    traces: tuple[tuple[float, ...], ...]
    best_restart: int


def entangled_value_seesaw(g: Game, d: int, restarts: int = 20, iters: int = 100,
                           seed: int = 0, improve_tol: float = 1e-12) -> SeesawResult:
    """Lower-bound the entangled value at local dimension d by alternating updates.

    Each restart draws a Haar state and random projective measurements from a
    per-restart seed, then iterates: Alice update, Bob update, state update
    (top eigenvector of the payoff operator).  Every step is non-decreasing,
    so the value trace is monotone; non-convergence within `iters` is not an
    error, the best iterate is still returned.  Heuristic: no optimality claim
    at fixed d, only a valid lower bound.
    """
    if d < 1:
        raise ValueError("local dimension must be >= 1")
    best_val, best_strategy, best_restart = -1.0, None, -1
    traces: list[tuple[float, ...]] = []
    for r in range(restarts):
        rng = rng_for(seed, _STREAM_SEESAW, r)
        phi = haar_state(rng, d * d).reshape(d, d)
        alice = np.stack([random_projective(rng, d, g.l) for _ in range(g.k)])
        bob = np.stack([random_projective(rng, d, g.l) for _ in range(g.k)])
        trace: list[float] = []
        prev = -np.inf
        for _ in range(iters):
            alice = _update_measurements(alice, _alice_payoffs(g, bob, phi))
            bob = _update_measurements(bob, _bob_payoffs(g, alice, phi))
            t = _payoff_operator(g, alice, bob)
            w, v = hermitian_eig(t)
            val = float(w[-1])
            phi = v[:, -1].reshape(d, d)
            trace.append(val)
            if val - prev < improve_tol:
                break
            prev = val
        traces.append(tuple(trace))
        val = trace[-1]
        if val > best_val:
            layout = RegisterLayout((d, d), ("A", "B"))
            best_strategy = QuantumStrategy(
                PureState(phi.reshape(-1), layout, validate=False), alice, bob)
            best_val, best_restart = val, r
    return SeesawResult(min(best_val, 1.0), best_strategy, tuple(traces), best_restart)


def value_with_advice(g: Game, advice: AdviceEnsemble, restarts: int = 20,
                      iters: int = 100, seed: int = 0,
                      improve_tol: float = 1e-12) -> float:
    """See-saw lower bound on the winning probability with per-input advice states.

    The shared state for input pair (x, y) is advice.states[x, y]; only the
    measurements are optimized.  Advice must be built for g's distribution.
    """
    if advice.k != g.k:
        raise ValueError("advice input arity does not match the game")
    if np.abs(advice.p - g.p).max() > 1e-12:
        raise ValueError("advice ensemble was built for a different distribution")
    states = advice.states
    vmat = g.v.astype(float)
    best = -1.0
    for r in range(restarts):
        rng = rng_for(seed, _STREAM_ADVICE, r)
        da, db = advice.dims()
        alice = np.stack([random_projective(rng, da, g.l) for _ in range(g.k)])
        bob = np.stack([random_projective(rng, db, g.l) for _ in range(g.k)])
        prev = -np.inf
        for _ in range(iters):
            kmat = np.einsum("xyij,ybkj,xylk->xybil", states, bob, states.conj())
            m_ops = np.einsum("xy,abxy,xybil->xail", g.p, vmat, kmat)
            alice = _update_measurements(alice, m_ops)
            cmat = np.einsum("xyij,xali,xylm->xyajm", states, alice, states.conj())
            n_ops = np.einsum("xy,abxy,xyajm->ybjm", g.p, vmat, cmat)
            bob = _update_measurements(bob, n_ops)
            val = float(np.einsum("ybjm,ybmj->", bob, n_ops).real)
            if val - prev < improve_tol:
                break
            prev = val
        best = max(best, val)
    return min(best, 1.0)


# ---------------------------------------------------------------------------
# repetition


def repeat(g: Game, n: int, budget: int = MAX_TABLE_ENTRIES) -> Game:
    """n-fold parallel repetition: product distribution, conjunction predicate."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kk, ll = g.k**n, g.l**n
    if ll * ll * kk * kk > budget:
        raise BudgetError(f"repeated predicate table would need {ll*ll*kk*kk} entries")
    dk = _digit_table(g.k, n)
    dl = _digit_table(g.l, n)
    p = np.ones((kk, kk))
    v = np.ones((ll, ll, kk, kk), dtype=bool)
    for i in range(n):
        p = p * g.p[dk[:, None, i], dk[None, :, i]]
        v = v & g.v[dl[:, None, None, None, i], dl[None, :, None, None, i],
                    dk[None, None, :, None, i], dk[None, None, None, :, i]]
    name = g.name if n == 1 else (f"{g.name}^{n}" if g.name else None)
    return Game(kk, ll, p, v, name=name)


def _win_counts(g: Game, n: int, budget: int) -> tuple[np.ndarray, np.ndarray]:
    kk, ll = g.k**n, g.l**n
    if ll * ll * kk * kk > budget:
        raise BudgetError(f"threshold predicate table would need {ll*ll*kk*kk} entries")
    dk = _digit_table(g.k, n)
    dl = _digit_table(g.l, n)
    p = np.ones((kk, kk))
    counts = np.zeros((ll, ll, kk, kk), dtype=np.int32)
    for i in range(n):
        p = p * g.p[dk[:, None, i], dk[None, :, i]]
        counts += g.v[dl[:, None, None, None, i], dl[None, :, None, None, i],
                      dk[None, None, :, None, i], dk[None, None, None, :, i]]
    return p, counts


def majority_game(g: Game, n: int, alpha: float, budget: int = MAX_TABLE_ENTRIES) -> Game:
    """Threshold repetition: win iff at least ceil(alpha*n) rounds won.

    Integer alpha*n keeps the threshold at exactly alpha*n; alpha=1 recovers
    repeat(g, n), alpha=0 is the trivial game.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    m = alpha * n
    thr = round(m) if abs(m - round(m)) < 1e-9 else math.ceil(m)
    p, counts = _win_counts(g, n, budget)
    name = f"{g.name}^{n}_maj{alpha:g}" if g.name else None
    return Game(g.k**n, g.l**n, p, counts >= thr, name=name)


# ---------------------------------------------------------------------------
# structure predicates


def is_free(g: Game, tol: float = 1e-10) -> bool:
    """True iff the input distribution is a product of its marginals."""
    px, py = g.p.sum(axis=1), g.p.sum(axis=0)
    return bool(np.abs(g.p - np.outer(px, py)).max() <= tol)


def is_projection(g: Game) -> bool:
    """True iff for every (b, x, y) exactly one winning a exists."""
    return bool((g.v.sum(axis=0) == 1).all())


# ---------------------------------------------------------------------------
# JSON game documents


def game_to_dict(g: Game) -> dict:
    d = {
        "k": g.k,
        "l": g.l,
        "p": [[float(x) for x in row] for row in g.p],
        "V": g.v.astype(int).tolist(),
    }
    if g.name is not None:
        d["name"] = g.name
    return d


def game_from_dict(d: dict) -> Game:
    try:
        return Game(int(d["k"]), int(d["l"]), np.array(d["p"], dtype=float),
                    np.array(d["V"]), name=d.get("name"))
    except KeyError as e:
        raise ValueError(f"game document is missing field {e.args[0]!r}") from None


def game_to_json(g: Game) -> str:
    """Canonical serialization: sorted keys, no whitespace, round-trip floats."""
    return json.dumps(game_to_dict(g), sort_keys=True, separators=(",", ":"))


def game_from_json(s: str) -> Game:
    return game_from_dict(json.loads(s))


def save_game(g: Game, path: str | Path) -> None:
    Path(path).write_text(game_to_json(g) + "\n")


def load_game(path: str | Path) -> Game:
    try:
        return game_from_json(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(
            f"invalid JSON in {path}: line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc

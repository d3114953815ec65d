"""Monte-Carlo simulation of the referee's spot-checking procedure.

A device plays n rounds of a game.  The referee draws v independent uniform
round indices (with replacement), inspects those rounds, and accepts iff all
inspected rounds were won.  The projection variant replaces literal string
comparison with a random GF(2)-linear hash: on a mismatch the referee still
accepts iff the hashes collide, which for a fresh random linear map happens
with probability exactly 2**-hash_bits whenever the strings differ (any lost
round forces a nonzero symbol difference).  The simulator therefore draws one
fresh uniform hash value per mismatched trial, which reproduces the
acceptance distribution exactly; the explicit hash family lives in
Gf2LinearHash and is verified separately.

Conditional threshold: the "won most rounds" statistic uses the fraction
1 - epsilon/256 for both variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .config import MAX_TABLE_ENTRIES, BudgetError
from .games import Game, QuantumStrategy, _digit_table, strategy_win_probability
from .random_states import rng_for

_STREAM_PROTOCOL = 301
_CHUNK = 512          # trials per derived generator; fixed so results are
                      # independent of how work is scheduled
Z99 = 2.5758293035489004   # two-sided 99% normal quantile

VARIANTS = ("general", "projection")
MIN_SUCCESSES_FOR_VERDICT = 100


def required_v(epsilon: float, t: float, variant: str = "general") -> int:
    """Number of inspected indices needed for the acceptance guarantees."""
    if not 0.0 < epsilon <= 1.0:
        raise ValueError("epsilon must lie in (0, 1]")
    if t < 0:
        raise ValueError("t must be >= 0")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")
    log_term = t + math.log2(1.0 / epsilon)
    if variant == "general":
        return math.ceil((256.0 / epsilon) * (log_term + 8.0))
    return math.ceil((32.0 / epsilon) * (log_term + 9.0))


@dataclass(frozen=True)
class ProtocolConfig:
    n: int
    epsilon: float
    t: float
    trials: int
    seed: int = 0
    variant: str = "general"
    v_override: int | None = None
    hash_bits: int | None = None    # None: ceil(2t)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in (0, 1]")
        if self.t < 0:
            raise ValueError("t must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.v_override is not None and self.v_override < 1:
            raise ValueError("v_override must be >= 1")
        b = self.resolved_hash_bits()
        if not 0 <= b <= 62:
            raise ValueError("hash_bits must lie in [0, 62]")

    def resolved_v(self) -> int:
        if self.v_override is not None:
            return self.v_override
        return required_v(self.epsilon, self.t, self.variant)

    def resolved_hash_bits(self) -> int:
        return math.ceil(2 * self.t) if self.hash_bits is None else self.hash_bits

    def win_threshold(self) -> float:
        return (1.0 - self.epsilon / 256.0) * self.n

    def to_dict(self) -> dict:
        return {
            "n": self.n, "epsilon": self.epsilon, "t": self.t,
            "trials": self.trials, "seed": self.seed, "variant": self.variant,
            "v_override": self.v_override, "hash_bits": self.hash_bits,
        }


# --- round-outcome models ---------------------------------------------------


@dataclass(frozen=True)
class IidBernoulli:
    """Each round won independently with probability w."""

    w: float

    def __post_init__(self):
        if not 0.0 <= self.w <= 1.0:
            raise ValueError("w must lie in [0, 1]")

    def sample_wins(self, rng, n: int, trials: int) -> np.ndarray:
        return rng.random((trials, n)) < self.w

    def win_all_probability(self, n: int) -> float:
        return self.w ** n


@dataclass(frozen=True)
class WinAllOrPartial:
    """With probability q win every round, otherwise win a uniformly random
    subset of round(f*n) rounds."""

    q: float
    f: float

    def __post_init__(self):
        if not 0.0 <= self.q <= 1.0 or not 0.0 <= self.f <= 1.0:
            raise ValueError("q and f must lie in [0, 1]")

    def partial_win_count(self, n: int) -> int:
        return int(round(self.f * n))

    def sample_wins(self, rng, n: int, trials: int) -> np.ndarray:
        all_branch = rng.random(trials) < self.q
        wins = np.zeros((trials, n), dtype=bool)
        wins[all_branch] = True
        rest = int((~all_branch).sum())
        if rest:
            m = self.partial_win_count(n)
            # argsort of iid uniforms = uniform random permutation per row
            order = np.argsort(rng.random((rest, n)), axis=1)
            wins[~all_branch] = order < m
        return wins

    def win_all_probability(self, n: int) -> float:
        return self.q + (1.0 - self.q) * (self.partial_win_count(n) == n)


class StrategyBacked:
    """Rounds generated by playing a fixed entangled strategy on the n-fold
    repetition: joint inputs sampled from the repeated game's distribution,
    decoded little-endian into per-round inputs, outputs drawn from the
    strategy's exact outcome distribution for each round."""

    def __init__(self, game: Game, strategy: QuantumStrategy, n: int):
        strategy.validate()
        if strategy.alice.shape[0] != game.k or strategy.alice.shape[1] != game.l:
            raise ValueError("strategy arity does not match the game")
        if game.k ** (2 * n) > MAX_TABLE_ENTRIES:
            raise BudgetError("joint input table too large for exact sampling")
        self.game = game
        self.strategy = strategy
        self.n = n
        self._digits = _digit_table(game.k, n)
        # joint input distribution of the n-fold repetition; only the input
        # side is tabulated, the predicate is evaluated per round
        kn = game.k ** n
        p = np.ones((kn, kn))
        for i in range(n):
            p = p * game.p[self._digits[:, None, i], self._digits[None, :, i]]
        self._p_cum = np.cumsum(p.ravel())
        self._p_cum[-1] = 1.0
        phi = strategy.state.tensor()
        kmat = np.einsum("ij,ybkj,lk->ybil", phi, strategy.bob, phi.conj())
        born = np.einsum("xail,ybli->xyab", strategy.alice, kmat).real
        born = np.clip(born, 0.0, None)
        cdf = np.cumsum(born.reshape(game.k, game.k, -1), axis=-1)
        self._cdf = cdf / cdf[..., -1:]
        self.omega = strategy_win_probability(game, strategy)

    def sample_wins(self, rng, n: int, trials: int) -> np.ndarray:
        if n != self.n:
            raise ValueError("model was built for a different round count")
        g = self.game
        kn = g.k ** self.n
        joint = np.searchsorted(self._p_cum, rng.random(trials), side="right")
        xs = self._digits[joint // kn]     # (trials, n) per-round inputs
        ys = self._digits[joint % kn]
        wins = np.empty((trials, self.n), dtype=bool)
        for r in range(self.n):
            rows = self._cdf[xs[:, r], ys[:, r]]
            idx = (rows < rng.random((trials, 1))).sum(axis=1)
            a, b = idx // g.l, idx % g.l
            wins[:, r] = g.v[a, b, xs[:, r], ys[:, r]]
        return wins

    def win_all_probability(self, n: int) -> float:
        return self.omega ** n


# --- statistics --------------------------------------------------------------


def wilson_interval(successes: int, total: int, z: float = Z99) -> tuple[float, float]:
    """Two-sided Wilson score interval; (0, 1) when there is no data."""
    if total == 0:
        return 0.0, 1.0
    phat = successes / total
    z2 = z * z
    denom = 1.0 + z2 / total
    center = (phat + z2 / (2 * total)) / denom
    half = z * math.sqrt(phat * (1 - phat) / total + z2 / (4 * total * total)) / denom
    return max(0.0, center - half), min(1.0, center + half)


@dataclass(frozen=True)
class ProtocolStats:
    variant: str
    n: int
    epsilon: float
    t: float
    v_used: int
    trials_effective: int
    successes: int
    p_succeed_hat: float
    succeed_ci: tuple[float, float]
    conditional_defined: bool
    mostwin_successes: int
    p_mostwin_given_succeed_hat: float | None
    mostwin_ci: tuple[float, float] | None
    mismatch_trials: int = 0
    mismatch_accepts: int = 0
    p_hash_accept_given_mismatch: float | None = None

    def to_dict(self) -> dict:
        return {
            "variant": self.variant, "n": self.n, "epsilon": self.epsilon,
            "t": self.t, "v_used": self.v_used,
            "trials_effective": self.trials_effective,
            "successes": self.successes,
            "p_succeed_hat": self.p_succeed_hat,
            "succeed_ci": list(self.succeed_ci),
            "conditional_defined": self.conditional_defined,
            "mostwin_successes": self.mostwin_successes,
            "p_mostwin_given_succeed_hat": self.p_mostwin_given_succeed_hat,
            "mostwin_ci": None if self.mostwin_ci is None else list(self.mostwin_ci),
            "mismatch_trials": self.mismatch_trials,
            "mismatch_accepts": self.mismatch_accepts,
            "p_hash_accept_given_mismatch": self.p_hash_accept_given_mismatch,
        }


def _simulate(config: ProtocolConfig, model, projection: bool) -> ProtocolStats:
    n, v = config.n, config.resolved_v()
    thr = config.win_threshold() - 1e-9    # integer counts vs real threshold
    bits = config.resolved_hash_bits()
    successes = mostwin = mismatches = mismatch_accepts = 0
    done = 0
    chunk_idx = 0
    while done < config.trials:
        size = min(_CHUNK, config.trials - done)
        rng = rng_for(config.seed, _STREAM_PROTOCOL, chunk_idx)
        wins = model.sample_wins(rng, n, size)
        idx = rng.integers(0, n, size=(size, v))
        matched = np.take_along_axis(wins, idx, axis=1).all(axis=1)
        if projection:
            miss = ~matched
            n_miss = int(miss.sum())
            if bits == 0:
                collide = np.ones(n_miss, dtype=bool)
            else:
                collide = rng.integers(0, 1 << bits, size=n_miss) == 0
            ok = matched.copy()
            ok[miss] = collide
            mismatches += n_miss
            mismatch_accepts += int(collide.sum())
        else:
            ok = matched
        nwins = wins.sum(axis=1)
        successes += int(ok.sum())
        mostwin += int((ok & (nwins >= thr)).sum())
        done += size
        chunk_idx += 1
    trials = config.trials
    p_succ = successes / trials
    cond_defined = successes > 0
    stats = ProtocolStats(
        variant=config.variant, n=n, epsilon=config.epsilon, t=config.t,
        v_used=v, trials_effective=trials, successes=successes,
        p_succeed_hat=p_succ,
        succeed_ci=wilson_interval(successes, trials),
        conditional_defined=cond_defined,
        mostwin_successes=mostwin,
        p_mostwin_given_succeed_hat=(mostwin / successes) if cond_defined else None,
        mostwin_ci=wilson_interval(mostwin, successes) if cond_defined else None,
        mismatch_trials=mismatches,
        mismatch_accepts=mismatch_accepts,
        p_hash_accept_given_mismatch=(mismatch_accepts / mismatches)
        if projection and mismatches else None,
    )
    return stats


def run_checking(config: ProtocolConfig, model) -> ProtocolStats:
    """Simulate the plain spot-checking procedure."""
    if config.variant != "general":
        raise ValueError("run_checking requires variant='general'")
    return _simulate(config, model, projection=False)


def run_projection(config: ProtocolConfig, model) -> ProtocolStats:
    """Simulate the hash-compressed variant."""
    if config.variant != "projection":
        raise ValueError("run_projection requires variant='projection'")
    return _simulate(config, model, projection=True)


def run_protocol(config: ProtocolConfig, model) -> ProtocolStats:
    if config.variant == "general":
        return run_checking(config, model)
    return run_projection(config, model)


# --- GF(2) linear hashing ----------------------------------------------------


@dataclass(frozen=True)
class Gf2LinearHash:
    """Linear map {0,1}^in_bits -> {0,1}^out_bits; row j is an int bitmask."""

    in_bits: int
    out_bits: int
    rows: tuple[int, ...]

    def __post_init__(self):
        if len(self.rows) != self.out_bits:
            raise ValueError("need one row mask per output bit")
        if any(r >> self.in_bits for r in self.rows):
            raise ValueError("row mask wider than in_bits")

    @classmethod
    def random(cls, rng, in_bits: int, out_bits: int) -> "Gf2LinearHash":
        rows = []
        for _ in range(out_bits):
            bits = rng.integers(0, 2, size=in_bits)
            rows.append(int(sum(int(b) << i for i, b in enumerate(bits))))
        return cls(in_bits, out_bits, tuple(rows))

    def __call__(self, x: int) -> int:
        if x >> self.in_bits:
            raise ValueError("input wider than in_bits")
        out = 0
        for j, row in enumerate(self.rows):
            out |= ((row & x).bit_count() & 1) << j
        return out


def random_hash_rows(rng, count: int, in_bits: int, out_bits: int) -> np.ndarray:
    """count independent hash matrices as uint64 row masks, shape (count, out_bits)."""
    if in_bits > 62:
        raise ValueError("in_bits must be <= 62 for packed sampling")
    return rng.integers(0, 1 << in_bits, size=(count, out_bits), dtype=np.uint64)


def hash_collides(rows: np.ndarray, diff: int) -> np.ndarray:
    """For each packed matrix, whether it maps the given difference to zero."""
    if diff == 0:
        return np.ones(rows.shape[0], dtype=bool)
    parities = np.bitwise_count(rows & np.uint64(diff)) & np.uint64(1)
    return (parities == 0).all(axis=1)


def exact_collision_probability(in_bits: int, out_bits: int) -> float:
    """Collision probability of a uniformly random linear map on any fixed
    nonzero difference, established by exhaustive row counting.

    For every nonzero d, exactly half of all in_bits-wide row masks have even
    parity against d, so each of the out_bits independent rows vanishes on d
    with probability exactly 1/2.
    """
    if not 1 <= in_bits <= 12:
        raise BudgetError("exhaustive verification supported for 1..12 input bits")
    rows = np.arange(1 << in_bits, dtype=np.uint64)
    half = 1 << (in_bits - 1)
    for d in range(1, 1 << in_bits):
        even = int(((np.bitwise_count(rows & np.uint64(d)) & np.uint64(1)) == 0).sum())
        if even != half:
            raise AssertionError(f"row parity count off for difference {d}")
    return 2.0 ** -out_bits


# --- guarantees ---------------------------------------------------------------


def checking_bound_margin(epsilon: float, t: float, v: int | None = None) -> float:
    """log2(epsilon/256) - log2((1 - epsilon/256)^v * 2^t), nonnegative iff the
    acceptance bound holds; defined for the general-variant v formula."""
    if v is None:
        v = required_v(epsilon, t, "general")
    log_fail = v * (math.log1p(-epsilon / 256.0) / math.log(2.0)) + t
    return (math.log2(epsilon) - 8.0) - log_fail


@dataclass(frozen=True)
class GuaranteeReport:
    epsilon: float
    t: float
    v_used: int
    win_all_probability: float
    applicable: bool
    succeed_bound: float
    succeed_verdict: str
    cond_bound: float
    cond_verdict: str
    verdict: str
    scalar_margin_log2: float | None
    notes: tuple[str, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "epsilon": self.epsilon, "t": self.t, "v_used": self.v_used,
            "win_all_probability": self.win_all_probability,
            "applicable": self.applicable,
            "succeed_bound": self.succeed_bound,
            "succeed_verdict": self.succeed_verdict,
            "cond_bound": self.cond_bound,
            "cond_verdict": self.cond_verdict,
            "verdict": self.verdict,
            "scalar_margin_log2": self.scalar_margin_log2,
            "notes": list(self.notes),
        }


def _bound_verdict(ci: tuple[float, float] | None, bound: float, samples: int) -> str:
    """consistent: data does not refute p >= bound; violated: whole CI below."""
    if ci is None:
        return "inconclusive"
    if ci[1] >= bound:
        return "consistent"
    return "violated" if samples >= MIN_SUCCESSES_FOR_VERDICT else "inconclusive"


def guarantee_report(config: ProtocolConfig, model, stats: ProtocolStats) -> GuaranteeReport:
    """Compare simulated estimates against the acceptance guarantees."""
    if stats.v_used != config.resolved_v() or stats.n != config.n:
        raise ValueError("stats were not produced from this config")
    if stats.variant != config.variant:
        raise ValueError("stats variant does not match config")
    p_all = float(model.win_all_probability(config.n))
    succeed_bound = 2.0 ** -config.t
    cond_bound = 1.0 - config.epsilon / 256.0
    applicable = p_all >= succeed_bound
    notes = []
    if config.variant == "projection":
        notes.append("conditional threshold fixed at 1 - epsilon/256 for both variants")
    if not applicable:
        notes.append("guarantee not applicable: model win-all probability below 2^-t")
        return GuaranteeReport(
            epsilon=config.epsilon, t=config.t, v_used=stats.v_used,
            win_all_probability=p_all, applicable=False,
            succeed_bound=succeed_bound, succeed_verdict="inconclusive",
            cond_bound=cond_bound, cond_verdict="inconclusive",
            verdict="inconclusive", scalar_margin_log2=None, notes=tuple(notes),
        )
    sv = _bound_verdict(stats.succeed_ci, succeed_bound, stats.trials_effective)
    cv = _bound_verdict(stats.mostwin_ci, cond_bound, stats.successes)
    order = {"violated": 2, "inconclusive": 1, "consistent": 0}
    overall = max((sv, cv), key=order.__getitem__)
    margin = (checking_bound_margin(config.epsilon, config.t, stats.v_used)
              if config.variant == "general" and config.v_override is None else None)
    return GuaranteeReport(
        epsilon=config.epsilon, t=config.t, v_used=stats.v_used,
        win_all_probability=p_all, applicable=True,
        succeed_bound=succeed_bound, succeed_verdict=sv,
        cond_bound=cond_bound, cond_verdict=cv,
        verdict=overall, scalar_margin_log2=margin, notes=tuple(notes),
    )


CSV_HEADER: Sequence[str] = (
    "variant", "n", "epsilon", "t", "v", "trials",
    "p_succeed", "ci_lo", "ci_hi", "p_cond", "ci_lo", "ci_hi", "verdict",
)


def stats_csv_lines(stats: ProtocolStats, verdict: str) -> list[str]:
    cond = stats.p_mostwin_given_succeed_hat
    ci = stats.mostwin_ci or ("", "")
    row = [
        stats.variant, stats.n, stats.epsilon, stats.t, stats.v_used,
        stats.trials_effective,
        repr(stats.p_succeed_hat), repr(stats.succeed_ci[0]), repr(stats.succeed_ci[1]),
        "" if cond is None else repr(cond),
        "" if ci[0] == "" else repr(ci[0]),
        "" if ci[1] == "" else repr(ci[1]),
        verdict,
    ]
    return [",".join(CSV_HEADER), ",".join(str(c) for c in row)]

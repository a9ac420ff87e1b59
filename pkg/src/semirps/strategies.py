"""Stage mixes and the concrete strategies for both players.

A strategy is a rule mapping an :class:`Observation` to a :class:`StageMix`;
the engine turns a mix into a move by inverse-CDF sampling over the move
order (Rock, Paper, Scissors) against a single uniform draw.  Deterministic
strategies return point masses.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

from semirps.engine import Move

THIRD = 1.0 / 3.0
TWO_THIRDS = 2.0 / 3.0


class AllExhausted(ValueError):
    """Every quota is zero; no stage mix exists."""


class UnknownStrategy(KeyError):
    pass


@dataclass(frozen=True)
class Observation:
    n: int
    t: int
    remaining: tuple[int, int, int]
    history_r: Sequence[Move] = ()
    history_n: Sequence[Move] = ()


@dataclass(frozen=True)
class StageMix:
    probabilities: tuple[float, float, float]

    def __post_init__(self) -> None:
        p = self.probabilities
        if len(p) != 3 or min(p) < 0 or abs(sum(p) - 1.0) > 1e-12:
            raise ValueError(f"not a distribution over three moves: {p}")

    @classmethod
    def point(cls, move: Move) -> StageMix:
        p = [0.0, 0.0, 0.0]
        p[Move(move).index] = 1.0
        return cls(tuple(p))

    def __getitem__(self, move: Move) -> float:
        return self.probabilities[Move(move).index]

    @property
    def support(self) -> tuple[Move, ...]:
        return tuple(Move.from_index(i) for i, p in enumerate(self.probabilities) if p > 0)

    def sample(self, u: float) -> Move:
        """Inverse-CDF draw; ``u`` must lie in [0, 1)."""
        cum = 0.0
        last = 0
        for i, p in enumerate(self.probabilities):
            if p > 0.0:
                last = i
            cum += p
            if u < cum:
                return Move.from_index(i)
        return Move.from_index(last)


def _live(remaining: Sequence[int]) -> list[int]:
    live = [i for i in range(3) if remaining[i] > 0]
    if not live:
        raise AllExhausted("all quotas are zero")
    return live


def _pair_low(live: list[int]) -> int:
    # Index of the beaten move x in a live pair {x, successor(x)}.
    missing = 3 - live[0] - live[1]
    return (missing + 1) % 3


def greedy_r_mix(remaining: Sequence[int]) -> StageMix:
    live = _live(remaining)
    if len(live) == 3:
        return StageMix((THIRD, THIRD, THIRD))
    if len(live) == 1:
        return StageMix.point(Move.from_index(live[0]))
    p = [0.0, 0.0, 0.0]
    x = _pair_low(live)
    p[x] = THIRD
    p[(x + 1) % 3] = TWO_THIRDS
    return StageMix(tuple(p))


def greedy_n_mix(remaining: Sequence[int]) -> StageMix:
    live = _live(remaining)
    if len(live) == 3:
        return StageMix((THIRD, THIRD, THIRD))
    if len(live) == 1:
        return StageMix.point(Move.from_index(live[0]).successor)
    p = [0.0, 0.0, 0.0]
    x = _pair_low(live)
    p[(x + 1) % 3] = TWO_THIRDS
    p[(x + 2) % 3] = THIRD
    return StageMix(tuple(p))


def uniform_nonstupid_mix(remaining: Sequence[int]) -> StageMix:
    """Uniform over the moves of N that can still win a round."""
    live = _live(remaining)
    if len(live) == 3:
        return StageMix((THIRD, THIRD, THIRD))
    if len(live) == 1:
        return StageMix.point(Move.from_index(live[0]).successor)
    p = [0.0, 0.0, 0.0]
    x = _pair_low(live)
    p[(x + 1) % 3] = 0.5
    p[(x + 2) % 3] = 0.5
    return StageMix(tuple(p))


def cyclic_r_mix(obs: Observation) -> StageMix:
    return StageMix.point(Move.from_index(obs.t % 3))


def rock_then_greedy_mix(obs: Observation) -> StageMix:
    if all(c > 0 for c in obs.remaining):
        return StageMix.point(Move.ROCK)
    return greedy_n_mix(obs.remaining)


@dataclass(frozen=True)
class Strategy:
    """A named mixing rule for one side ("r" or "n")."""

    name: str
    side: str
    rule: Callable[[Observation], StageMix]
    # Code understood by the compiled simulator; None means Python-only.
    kernel_code: int | None = None

    def mix(self, obs: Observation) -> StageMix:
        return self.rule(obs)

    def __call__(self, obs: Observation, u: float) -> Move:
        return self.rule(obs).sample(u)


GREEDY_R = Strategy("greedy-r", "r", lambda obs: greedy_r_mix(obs.remaining), 0)
CYCLIC_R = Strategy("cyclic-r", "r", cyclic_r_mix, 1)
GREEDY_N = Strategy("greedy-n", "n", lambda obs: greedy_n_mix(obs.remaining), 0)
UNIFORM_N = Strategy("uniform-n", "n", lambda obs: uniform_nonstupid_mix(obs.remaining), 1)
ROCK_THEN_GREEDY_N = Strategy("rock-then-greedy-n", "n", rock_then_greedy_mix, 2)

STRATEGIES: dict[str, Strategy] = {
    s.name: s for s in (GREEDY_R, CYCLIC_R, GREEDY_N, UNIFORM_N, ROCK_THEN_GREEDY_N)
}


def get_strategy(name: str, side: str | None = None) -> Strategy:
    try:
        strategy = STRATEGIES[name]
    except KeyError:
        raise UnknownStrategy(f"unknown strategy {name!r}; choose from {sorted(STRATEGIES)}") from None
    if side is not None and strategy.side != side:
        raise UnknownStrategy(f"{name!r} is not a strategy for player {side.upper()}")
    return strategy


def cyclic_r(obs: Observation) -> Move:
    return CYCLIC_R(obs, 0.0)


def rock_then_greedy_n(obs: Observation, u: float) -> Move:
    return ROCK_THEN_GREEDY_N(obs, u)


def uniform_nonstupid_n(obs: Observation, u: float) -> Move:
    return UNIFORM_N(obs, u)


def scripted(name: str, side: str, moves: Sequence[Move]) -> Strategy:
    """Plays a fixed move sequence, one entry per round."""
    moves = tuple(Move(m) for m in moves)
    return Strategy(name, side, lambda obs: StageMix.point(moves[obs.t]))

"""Moves, payoffs and round-by-round execution of one semi-restricted RPS game.

The restricted player R must play each move exactly ``n`` times over ``3n``
rounds; the unrestricted player N plays freely.  Scores are always reported
from N's point of view.
"""

from __future__ import annotations

import enum
from collections.abc import Sequence
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from semirps.strategies import Strategy


class GameError(Exception):
    """Base class for illegal play."""


class RMoveExhausted(GameError):
    """The restricted player selected a move whose quota is used up."""


class GameOver(GameError):
    """A round was played after round 3n."""


class Move(enum.IntEnum):
    ROCK = 1
    PAPER = 2
    SCISSORS = 3

    @property
    def index(self) -> int:
        return self.value - 1

    @property
    def successor(self) -> Move:
        """The move that beats this one."""
        return Move(self.value % 3 + 1)

    @property
    def predecessor(self) -> Move:
        """The move this one beats."""
        return Move((self.value + 1) % 3 + 1)

    @property
    def letter(self) -> str:
        return "RPS"[self.index]

    @classmethod
    def from_index(cls, i: int) -> Move:
        return cls(i + 1)


def payoff(r_move: Move, n_move: Move) -> int:
    """Score change for N when R plays ``r_move`` and N plays ``n_move``."""
    d = (int(n_move) - int(r_move)) % 3
    return (0, 1, -1)[d]


@dataclass(frozen=True)
class GameState:
    n: int
    t: int = 0
    remaining: tuple[int, int, int] | None = None
    score: int = 0
    t1: int | None = None
    t2: int | None = None

    def __post_init__(self) -> None:
        if self.remaining is None:
            object.__setattr__(self, "remaining", (self.n,) * 3)
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if sum(self.remaining) != 3 * self.n - self.t:
            raise ValueError("remaining counts inconsistent with round index")
        if any(c < 0 or c > self.n for c in self.remaining):
            raise ValueError("remaining counts out of range")

    @property
    def available(self) -> int:
        return sum(1 for c in self.remaining if c > 0)

    @property
    def finished(self) -> bool:
        return self.t == 3 * self.n


def play_round(state: GameState, r_move: Move, n_move: Move) -> GameState:
    """Apply one simultaneous round and return the successor state."""
    if state.finished:
        raise GameOver(f"all {3 * state.n} rounds already played")
    r_move = Move(r_move)
    n_move = Move(n_move)
    counts = list(state.remaining)
    if counts[r_move.index] == 0:
        raise RMoveExhausted(f"{r_move.name} quota exhausted at round {state.t + 1}")
    before = state.available
    counts[r_move.index] -= 1
    t = state.t + 1
    after = sum(1 for c in counts if c > 0)
    t1, t2 = state.t1, state.t2
    if after < before:
        if before == 3:
            t1 = t
        elif before == 2:
            t2 = t
    return replace(
        state,
        t=t,
        remaining=tuple(counts),
        score=state.score + payoff(r_move, n_move),
        t1=t1,
        t2=t2,
    )


class History(Sequence):
    """Read-only, fixed-length window onto a growing move list."""

    __slots__ = ("_moves", "_length")

    def __init__(self, moves: list[Move], length: int) -> None:
        self._moves = moves
        self._length = length

    def __len__(self) -> int:
        return self._length

    def __getitem__(self, i):
        if isinstance(i, slice):
            return tuple(self._moves[: self._length][i])
        if i < 0:
            i += self._length
        if not 0 <= i < self._length:
            raise IndexError(i)
        return self._moves[i]

    def __repr__(self) -> str:
        return f"History({''.join(m.letter for m in self)!r})"


@dataclass(frozen=True)
class Transcript:
    n: int
    r_moves: tuple[Move, ...]
    n_moves: tuple[Move, ...]
    scores: tuple[int, ...]
    t1: int
    t2: int
    final_score: int
    seed: int | None = None

    def score_at(self, t: int) -> int:
        """S(t), with S(0) = 0."""
        return 0 if t == 0 else self.scores[t - 1]

    def to_json(self, include_moves: bool = False) -> dict:
        record = {
            "n": self.n,
            "seed": self.seed,
            "final_score": self.final_score,
            "t1": self.t1,
            "t2": self.t2,
        }
        if include_moves:
            record["r_moves"] = "".join(m.letter for m in self.r_moves)
            record["n_moves"] = "".join(m.letter for m in self.n_moves)
        return record


def game_rng(master_seed: int, game_index: int) -> np.random.Generator:
    """Per-game stream, a pure function of (master seed, game index)."""
    return np.random.default_rng([int(game_index), int(master_seed)])


def run_game(
    n: int,
    strategy_r: Strategy,
    strategy_n: Strategy,
    rng: np.random.Generator,
    seed: int | None = None,
) -> Transcript:
    """Play a full game of 3n rounds.

    Each round draws exactly two uniforms from ``rng`` (first for R, then for
    N) whether or not the strategies are randomized, so a transcript depends
    only on the strategies and the stream.
    """
    from semirps.strategies import Observation

    state = GameState(n)
    r_hist: list[Move] = []
    n_hist: list[Move] = []
    scores: list[int] = []
    while not state.finished:
        obs = Observation(
            n=n,
            t=state.t,
            remaining=state.remaining,
            history_r=History(r_hist, state.t),
            history_n=History(n_hist, state.t),
        )
        mix_r = strategy_r.mix(obs)
        mix_n = strategy_n.mix(obs)
        u_r = rng.random()
        u_n = rng.random()
        r_move = mix_r.sample(u_r)
        n_move = mix_n.sample(u_n)
        state = play_round(state, r_move, n_move)
        r_hist.append(r_move)
        n_hist.append(n_move)
        scores.append(state.score)
    return Transcript(
        n=n,
        r_moves=tuple(r_hist),
        n_moves=tuple(n_hist),
        scores=tuple(scores),
        t1=state.t1 or 0,
        t2=state.t2 or 0,
        final_score=state.score,
        seed=seed,
    )

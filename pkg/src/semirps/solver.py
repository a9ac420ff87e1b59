"""Exact optimal values by backward induction over remaining-count states.

The state is the restricted player's remaining quota ``(a, b, c)``.  N's move
never changes the state, so each state is a one-shot matrix game whose
entries are the immediate payoff plus the value of the child state::

    V(s) = value of [payoff(i, j) + V(s - e_i)]   (rows i live in s, columns j)

with V(0, 0, 0) = 0.  The row player (R) minimizes, the column player (N)
maximizes.  States are processed in layers of equal total ``a + b + c``; a
layer depends only on the one below it.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from pathlib import Path

import numba
import numpy as np

from semirps.engine import Move, payoff
from semirps.strategies import StageMix

CERT_TOL = 1e-9
_PIVOT_EPS = 1e-12

# Payoff to N, rows = R's move, columns = N's move.
RPS = np.array([[0.0, 1.0, -1.0], [-1.0, 0.0, 1.0], [1.0, -1.0, 0.0]])


class DegenerateMatrix(ArithmeticError):
    """No certified minimax solution was found."""


class MissingChild(KeyError):
    pass


# ---------------------------------------------------------------------------
# compiled matrix-game core


@numba.njit(cache=True)
def _linsolve(A, b, out):
    """Gaussian elimination with partial pivoting; False if (near) singular."""
    m = A.shape[0]
    scale = 0.0
    for i in range(m):
        for j in range(m):
            if abs(A[i, j]) > scale:
                scale = abs(A[i, j])
    if scale == 0.0:
        return False
    for col in range(m):
        piv = col
        for r in range(col + 1, m):
            if abs(A[r, col]) > abs(A[piv, col]):
                piv = r
        if abs(A[piv, col]) <= _PIVOT_EPS * scale:
            return False
        if piv != col:
            for j in range(m):
                A[col, j], A[piv, j] = A[piv, j], A[col, j]
            b[col], b[piv] = b[piv], b[col]
        for r in range(col + 1, m):
            f = A[r, col] / A[col, col]
            if f != 0.0:
                for j in range(col, m):
                    A[r, j] -= f * A[col, j]
                b[r] -= f * b[col]
    for r in range(m - 1, -1, -1):
        s = b[r]
        for j in range(r + 1, m):
            s -= A[r, j] * out[j]
        out[r] = s / A[r, r]
    return True


@numba.njit(cache=True)
def _next_combination(idx, k, m):
    i = k - 1
    while i >= 0 and idx[i] == m - k + i:
        i -= 1
    if i < 0:
        return False
    idx[i] += 1
    for j in range(i + 1, k):
        idx[j] = idx[j - 1] + 1
    return True


@numba.njit(cache=True)
def _eliminate_dominated(M, row_alive, col_alive):
    """Iterated strict dominance for a minimizing row player."""
    r, c = M.shape
    changed = True
    while changed:
        changed = False
        for i in range(r):
            if not row_alive[i]:
                continue
            for k in range(r):
                if k == i or not row_alive[k]:
                    continue
                strict = True
                for j in range(c):
                    if col_alive[j] and not M[k, j] < M[i, j]:
                        strict = False
                        break
                if strict:
                    row_alive[i] = False
                    changed = True
                    break
        for j in range(c):
            if not col_alive[j]:
                continue
            for l in range(c):
                if l == j or not col_alive[l]:
                    continue
                strict = True
                for i in range(r):
                    if row_alive[i] and not M[i, l] > M[i, j]:
                        strict = False
                        break
                if strict:
                    col_alive[j] = False
                    changed = True
                    break


@numba.njit(cache=True)
def _violation(M, rows, cols, x, y, v):
    """Largest breach of the minimax certificate by the pair (x, y)."""
    worst = 0.0
    # R's mix caps every column at v; N's mix floors every row at v.
    for q in range(cols.size):
        s = 0.0
        for p in range(rows.size):
            s += x[rows[p]] * M[rows[p], cols[q]]
        worst = max(worst, s - v)
    for p in range(rows.size):
        s = 0.0
        for q in range(cols.size):
            s += M[rows[p], cols[q]] * y[cols[q]]
        worst = max(worst, v - s)
    return worst


@numba.njit(cache=True)
def _solve_game(M, x, y, tol):
    """Minimax value of M (row player minimizes); fills mixes x and y.

    Returns (value, ok).  The matrix is centred first: continuation values
    grow like sqrt(n) and would otherwise cost digits in the linear solves.
    """
    shift = M.mean()
    v, ok = _solve_centered(M - shift, x, y, tol)
    return v + shift, ok


@numba.njit(cache=True)
def _solve_centered(M, x, y, tol):
    r, c = M.shape
    x[:] = 0.0
    y[:] = 0.0
    row_alive = np.ones(r, dtype=np.bool_)
    col_alive = np.ones(c, dtype=np.bool_)
    _eliminate_dominated(M, row_alive, col_alive)
    rows = np.flatnonzero(row_alive)
    cols = np.flatnonzero(col_alive)
    nr = rows.size
    nc = cols.size

    if nr == 1:
        i = rows[0]
        best = cols[0]
        for q in range(1, nc):
            if M[i, cols[q]] > M[i, best]:
                best = cols[q]
        x[i] = 1.0
        y[best] = 1.0
        return M[i, best], True
    if nc == 1:
        j = cols[0]
        best = rows[0]
        for p in range(1, nr):
            if M[rows[p], j] < M[best, j]:
                best = rows[p]
        x[best] = 1.0
        y[j] = 1.0
        return M[best, j], True
    if nr == 2 and nc == 2:
        i0, i1 = rows[0], rows[1]
        j0, j1 = cols[0], cols[1]
        for p in range(2):
            for q in range(2):
                i = rows[p]
                j = cols[q]
                other_j = cols[1 - q]
                other_i = rows[1 - p]
                if M[i, j] >= M[i, other_j] and M[i, j] <= M[other_i, j]:
                    x[i] = 1.0
                    y[j] = 1.0
                    return M[i, j], True
        a, b = M[i0, j0], M[i0, j1]
        cc, d = M[i1, j0], M[i1, j1]
        den = a + d - b - cc
        x[i0] = (d - cc) / den
        x[i1] = 1.0 - x[i0]
        y[j0] = (d - b) / den
        y[j1] = 1.0 - y[j0]
        return (a * d - b * cc) / den, True

    # pure saddle points first (supports of size one)
    for p in range(nr):
        for q in range(nc):
            v = M[rows[p], cols[q]]
            saddle = True
            for qq in range(nc):
                if M[rows[p], cols[qq]] > v:
                    saddle = False
            for pp in range(nr):
                if M[rows[pp], cols[q]] < v:
                    saddle = False
            if saddle:
                x[rows[p]] = 1.0
                y[cols[q]] = 1.0
                return v, True

    # support enumeration over equal-size supports, lexicographic order
    # A candidate that is optimal only up to ``tol`` can be strictly worse
    # than the true solution in near-degenerate stages, so the first pass
    # accepts round-off-level breaches only.
    scale = 1.0
    for p in range(nr):
        for q in range(nc):
            scale = max(scale, abs(M[rows[p], cols[q]]))
    exact_tol = 64.0 * 2.220446049250313e-16 * scale
    best_viol = np.inf
    best_v = np.nan
    best_x = np.zeros(r)
    best_y = np.zeros(c)
    kmax = min(nr, nc)
    A = np.empty((kmax + 1, kmax + 1))
    rhs = np.empty(kmax + 1)
    solx = np.empty(kmax + 1)
    soly = np.empty(kmax + 1)
    ri = np.empty(kmax, dtype=np.int64)
    ci = np.empty(kmax, dtype=np.int64)
    for k in range(2, kmax + 1):
        Ak = A[: k + 1, : k + 1]
        bk = rhs[: k + 1]
        for e in range(k):
            ri[e] = e
        first_r = True
        while first_r or _next_combination(ri, k, nr):
            first_r = False
            for e in range(k):
                ci[e] = e
            first_c = True
            while first_c or _next_combination(ci, k, nc):
                first_c = False
                # row mix on support: equalize the chosen columns
                for e in range(k):
                    for p in range(k):
                        Ak[e, p] = M[rows[ri[p]], cols[ci[e]]]
                    Ak[e, k] = -1.0
                    bk[e] = 0.0
                for p in range(k):
                    Ak[k, p] = 1.0
                Ak[k, k] = 0.0
                bk[k] = 1.0
                if not _linsolve(Ak, bk, solx):
                    continue
                bad = False
                for p in range(k):
                    if solx[p] < -tol:
                        bad = True
                if bad:
                    continue
                # column mix on support: equalize the chosen rows
                for e in range(k):
                    for q in range(k):
                        Ak[e, q] = M[rows[ri[e]], cols[ci[q]]]
                    Ak[e, k] = -1.0
                    bk[e] = 0.0
                for q in range(k):
                    Ak[k, q] = 1.0
                Ak[k, k] = 0.0
                bk[k] = 1.0
                if not _linsolve(Ak, bk, soly):
                    continue
                for q in range(k):
                    if soly[q] < -tol:
                        bad = True
                if bad or abs(solx[k] - soly[k]) > tol:
                    continue
                x[:] = 0.0
                y[:] = 0.0
                sx = 0.0
                sy = 0.0
                for p in range(k):
                    x[rows[ri[p]]] = max(solx[p], 0.0)
                    sx += x[rows[ri[p]]]
                    y[cols[ci[p]]] = max(soly[p], 0.0)
                    sy += y[cols[ci[p]]]
                for p in range(k):
                    x[rows[ri[p]]] /= sx
                    y[cols[ci[p]]] /= sy
                v = solx[k]
                viol = _violation(M, rows, cols, x, y, v)
                if viol <= exact_tol:
                    return v, True
                if viol < best_viol:
                    best_viol = viol
                    best_v = v
                    best_x[:] = x
                    best_y[:] = y
    # nothing exact to round-off: settle for the least-violating candidate
    if best_viol <= tol:
        x[:] = best_x
        y[:] = best_y
        return best_v, True
    x[:] = 0.0
    y[:] = 0.0
    return np.nan, False


# ---------------------------------------------------------------------------
# public matrix-game API


@dataclass(frozen=True)
class MatrixGame:
    rows: tuple[Move, ...]
    payoffs: np.ndarray

    def __post_init__(self) -> None:
        p = np.asarray(self.payoffs, dtype=float)
        if p.shape != (len(self.rows), 3) or not 1 <= len(self.rows) <= 3:
            raise ValueError(f"stage matrix must be rows x 3 with 1..3 rows, got {p.shape}")
        object.__setattr__(self, "payoffs", p)


@dataclass(frozen=True)
class GameSolution:
    value: float
    row_mix: np.ndarray
    col_mix: np.ndarray

    def bounds(self, payoffs: np.ndarray) -> tuple[float, float]:
        """(floor N's mix guarantees, ceiling R's mix guarantees)."""
        payoffs = np.asarray(payoffs, dtype=float)
        return float((payoffs @ self.col_mix).min()), float((self.row_mix @ payoffs).max())


def solve_matrix_game(game: MatrixGame | np.ndarray, tol: float = CERT_TOL) -> GameSolution:
    """Solve a small zero-sum game, rows minimizing and columns maximizing.

    Strictly dominated strategies are removed first; 1xk, kx1 and 2x2
    remainders are solved in closed form, anything larger by support
    enumeration.  The result is checked against the minimax certificate.
    """
    M = game.payoffs if isinstance(game, MatrixGame) else np.asarray(game, dtype=float)
    M = np.ascontiguousarray(M, dtype=float)
    if M.ndim != 2 or M.size == 0:
        raise ValueError("payoff matrix must be a nonempty 2-D array")
    if not np.all(np.isfinite(M)):
        raise ValueError("payoffs must be finite")
    x = np.zeros(M.shape[0])
    y = np.zeros(M.shape[1])
    value, ok = _solve_game(M, x, y, tol)
    sol = GameSolution(float(value), x, y)
    if not ok:
        raise DegenerateMatrix(f"no certified solution for\n{M}")
    lo, hi = sol.bounds(M)
    if lo < value - tol or hi > value + tol:
        raise DegenerateMatrix(f"certificate failed ({lo}, {value}, {hi}) for\n{M}")
    return sol


# ---------------------------------------------------------------------------
# value tables


@dataclass(frozen=True)
class CountsState:
    a: int
    b: int
    c: int

    def __post_init__(self) -> None:
        if min(self) < 0:
            raise ValueError("counts must be nonnegative")

    def __iter__(self) -> Iterator[int]:
        return iter((self.a, self.b, self.c))

    @property
    def total(self) -> int:
        return self.a + self.b + self.c

    def child(self, move: Move) -> CountsState:
        counts = list(self)
        counts[Move(move).index] -= 1
        return CountsState(*counts)


def _key(s) -> tuple[int, int, int]:
    a, b, c = s
    return int(a), int(b), int(c)


@dataclass(frozen=True)
class ValueTable:
    n: int
    values: np.ndarray  # shape (n+1, n+1, n+1)

    def __getitem__(self, s) -> float:
        a, b, c = _key(s)
        if min(a, b, c) < 0 or max(a, b, c) > self.n:
            raise MissingChild((a, b, c))
        return float(self.values[a, b, c])

    def __contains__(self, s) -> bool:
        a, b, c = _key(s)
        return min(a, b, c) >= 0 and max(a, b, c) <= self.n

    @property
    def root(self) -> float:
        return self[(self.n, self.n, self.n)]

    def states(self) -> Iterator[tuple[int, int, int]]:
        r = range(self.n + 1)
        for a in r:
            for b in r:
                for c in r:
                    yield a, b, c

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["a", "b", "c", "value"])
            for s in self.states():
                w.writerow([*s, repr(float(self.values[s]))])


def stage_matrix(s, lookup: Mapping | ValueTable) -> MatrixGame:
    """Stage game at state ``s``: payoff plus continuation value per row."""
    s = CountsState(*_key(s))
    if s.total < 1:
        raise ValueError("stage matrix needs at least one remaining move")
    rows = tuple(m for m in Move if list(s)[m.index] > 0)
    payoffs = np.empty((len(rows), 3))
    for p, r in enumerate(rows):
        child = _key(s.child(r))
        try:
            cont = lookup[child]
        except KeyError:
            raise MissingChild(child) from None
        for j in Move:
            payoffs[p, j.index] = payoff(r, j) + cont
    return MatrixGame(rows, payoffs)


@numba.njit(cache=True)
def _optimal_layer(k, n, prev, cur, cube, store):
    """Fill layer ``k`` (states with a+b+c = k) from layer k-1.

    Returns 0 on success or 1 + the flat index (a*(n+1)+b) of a failed state.
    """
    M3 = np.empty((3, 3))
    M2 = np.empty((2, 3))
    M1 = np.empty((1, 3))
    x = np.empty(3)
    y = np.empty(3)
    cont = np.empty(3)
    live = np.empty(3, dtype=np.int64)
    for a in range(max(0, k - 2 * n), min(n, k) + 1):
        for b in range(max(0, k - a - n), min(n, k - a) + 1):
            c = k - a - b
            m = 0
            if a > 0:
                live[m] = 0
                cont[m] = prev[a - 1, b]
                m += 1
            if b > 0:
                live[m] = 1
                cont[m] = prev[a, b - 1]
                m += 1
            if c > 0:
                live[m] = 2
                cont[m] = prev[a, b]
                m += 1
            if m == 3:
                M = M3
            elif m == 2:
                M = M2
            else:
                M = M1
            for p in range(m):
                for j in range(3):
                    M[p, j] = RPS[live[p], j] + cont[p]
            v, ok = _solve_game(M, x[:m], y, CERT_TOL)
            if not ok:
                return 1 + a * (n + 1) + b
            cur[a, b] = v
            if store:
                cube[a, b, c] = v
    return 0


def _layers(n: int, store: bool):
    if n < 0:
        raise ValueError("n must be nonnegative")
    prev = np.zeros((n + 1, n + 1))
    cur = np.zeros((n + 1, n + 1))
    cube = np.zeros((n + 1,) * 3) if store else np.zeros((1, 1, 1))
    for k in range(1, 3 * n + 1):
        status = _optimal_layer(k, n, prev, cur, cube, store)
        if status:
            a, b = divmod(status - 1, n + 1)
            raise DegenerateMatrix(f"stage game at {(a, b, k - a - b)} could not be certified")
        prev, cur = cur, prev
    return prev, cube


def compute_value_table(n: int) -> ValueTable:
    """Optimal values V for every state in the cube [0, n]^3."""
    _, cube = _layers(n, store=True)
    return ValueTable(n, cube)


def optimal_value(n: int) -> float:
    """V(n, n, n), keeping only two layers in memory."""
    last, _ = _layers(n, store=False)
    return float(last[n, n]) if n > 0 else 0.0


def optimal_r_mix(s, lookup: Mapping | ValueTable) -> StageMix:
    """R's optimal stage mix at ``s`` from the solved stage game."""
    g = stage_matrix(s, lookup)
    sol = solve_matrix_game(g)
    p = [0.0, 0.0, 0.0]
    for move, w in zip(g.rows, sol.row_mix):
        p[move.index] = float(w)
    total = sum(p)
    return StageMix(tuple(q / total for q in p))


# ---------------------------------------------------------------------------
# greedy-vs-greedy oracle


@numba.njit(cache=True)
def _greedy_layer(k, n, prev, cur):
    third = 1.0 / 3.0
    for a in range(max(0, k - 2 * n), min(n, k) + 1):
        for b in range(max(0, k - a - n), min(n, k - a) + 1):
            c = k - a - b
            live = (a > 0) + (b > 0) + (c > 0)
            if live == 3:
                cur[a, b] = third * (prev[a - 1, b] + prev[a, b - 1] + prev[a, b])
            elif live == 1:
                if a > 0:
                    cur[a, b] = 1.0 + prev[a - 1, b]
                elif b > 0:
                    cur[a, b] = 1.0 + prev[a, b - 1]
                else:
                    cur[a, b] = 1.0 + prev[a, b]
            else:
                # pair {x, successor(x)}: 1/3 on x, 2/3 on its beater
                if c == 0:
                    lo, hi = prev[a - 1, b], prev[a, b - 1]
                elif a == 0:
                    lo, hi = prev[a, b - 1], prev[a, b]
                else:
                    lo, hi = prev[a, b], prev[a - 1, b]
                cur[a, b] = third + third * lo + 2.0 * third * hi


def greedy_chain_expectation(n: int) -> float:
    """Exact E[S_n] when both players play greedily.

    Expected gain is 0 per round while R has three moves left, 1/3 with two
    and 1 with one, so only R's count chain matters.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.0
    prev = np.zeros((n + 1, n + 1))
    cur = np.zeros((n + 1, n + 1))
    for k in range(1, 3 * n + 1):
        _greedy_layer(k, n, prev, cur)
        prev, cur = cur, prev
    return float(prev[n, n])


def write_summary_csv(path: str | Path, n: int, value: float) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "value", "value_over_sqrt_n"])
        w.writerow([n, repr(value), repr(value / math.sqrt(n)) if n else ""])

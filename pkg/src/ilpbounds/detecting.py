"""Detecting matrices: {0,1} matrices M with Mu = Mv forcing u = v whenever
u >= 0 and v has entries in 0..d-1.

The deterministic generator is the Cantor-Mills style recursion adapted to the
one-sided domain; the randomized one draws uniform rows plus a row of ones.
``verify_detecting`` decides the property exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import BudgetExceeded, IntMatrix, block_diag, hstack, mat_vec, vstack


class Method(str, Enum):
    DETERMINISTIC = "deterministic_recursive"
    RANDOMIZED = "randomized"
    IDENTITY = "identity_base"


@dataclass(frozen=True)
class DetectingMatrix:
    m: IntMatrix
    d: int
    method: Method
    blocks: tuple = ()  # (k_i, m_i) of each diagonal piece, in order

    def __post_init__(self):
        if not self.m.entries() <= {0, 1}:
            raise ValueError("detecting matrices have entries in {0,1}")
        if self.d < 2:
            raise ValueError("d must be at least 2")

    @property
    def k(self) -> int:
        return self.m.k

    @property
    def cols(self) -> int:
        return self.m.n_cols


def recursion_sizes(d: int, levels: int) -> list:
    """(k_i, m_i) for i = 1..levels."""
    sizes = [(d, d)]
    while len(sizes) < levels:
        k, m = sizes[-1]
        sizes.append((d * k + d, d * m + k))
    return sizes


def recursion_level(d: int, level: int) -> IntMatrix:
    """The matrix M_level of the recursion (M_1 is the d x d identity)."""
    mat = IntMatrix.identity(d)
    for _ in range(level - 1):
        mat = _next_level(mat, d)
    return mat


def _next_level(b: IntMatrix, d: int) -> IntMatrix:
    k, m = b.shape
    zero_km = IntMatrix.zeros(k, m)
    jb = IntMatrix.from_rows([[1 - x for x in r] for r in b.rows])
    top = hstack([b] * d + [IntMatrix.identity(k)])
    middle = []
    for i in range(1, d):
        blocks = [b] + [jb if j == i else zero_km for j in range(1, d)] + [IntMatrix.zeros(k, k)]
        middle.append(hstack(blocks))
    bottom = []
    for i in range(1, d):
        bottom.append([0] * (i * m) + [1] * m + [0] * ((d - 1 - i) * m + k))
    bottom.append([0] * (d * m) + [1] * k)
    return vstack([top] + middle + [IntMatrix.from_rows(bottom)])


def gen_detecting_deterministic(d: int, m_target: int) -> DetectingMatrix:
    """Block-diagonal composition of recursion levels with exactly m_target columns.

    Greedily uses the largest level whose column count fits the remaining
    columns; a remainder r < d becomes an r x r identity.
    """
    if d < 2 or m_target < 1:
        raise ValueError("need d >= 2 and m_target >= 1")
    if m_target < d:
        return DetectingMatrix(IntMatrix.identity(m_target), d, Method.IDENTITY, ((m_target, m_target),))
    sizes = [(d, d)]
    while True:
        k, m = sizes[-1]
        nxt = (d * k + d, d * m + k)
        if nxt[1] > m_target:
            break
        sizes.append(nxt)
    cache = {}
    pieces, shapes = [], []
    remaining = m_target
    level = len(sizes)
    while remaining > 0:
        while level > 0 and sizes[level - 1][1] > remaining:
            level -= 1
        if level == 0:
            pieces.append(IntMatrix.identity(remaining))
            shapes.append((remaining, remaining))
            break
        if level not in cache:
            cache[level] = recursion_level(d, level)
        pieces.append(cache[level])
        shapes.append(sizes[level - 1])
        remaining -= sizes[level - 1][1]
    mat = pieces[0] if len(pieces) == 1 else block_diag(pieces)
    only_identity = all(s[0] == s[1] and (s[0] < d or s == (d, d)) for s in shapes)
    method = Method.IDENTITY if only_identity and len(pieces) == 1 else Method.DETERMINISTIC
    return DetectingMatrix(mat, d, method, tuple(shapes))


def random_row_count(d: int, m: int) -> int:
    """ceil(4 m log(d+1) / log m) + 1, evaluated exactly with integer powers."""
    if m < 2:
        raise ValueError("m must be at least 2")
    target = (d + 1) ** (4 * m)
    q = max(0, math.floor(4 * m * math.log(d + 1) / math.log(m)) - 2)
    while m ** q < target:
        q += 1
    return q + 1


def gen_detecting_random(d: int, m: int, seed: int) -> DetectingMatrix:
    """First row all ones, remaining rows uniform over {0,1} (numpy PCG64 stream)."""
    if d < 2:
        raise ValueError("d must be at least 2")
    k = random_row_count(d, m)
    rng = np.random.default_rng(seed)
    body = rng.integers(0, 2, size=(k - 1, m))
    rows = [[1] * m] + body.tolist()
    return DetectingMatrix(IntMatrix.from_rows(rows), d, Method.RANDOMIZED, ((k, m),))


@dataclass(frozen=True)
class VerificationReport:
    verified: bool
    counterexample: Optional[tuple] = None  # (u, v)
    search_bound: int = 0
    papadimitriou_bound: int = 0
    explored_states: int = 0

    def to_json(self) -> dict:
        out = {
            "verified": self.verified,
            "counterexample": None,
            "search_bound": self.search_bound,
            "papadimitriou_bound": self.papadimitriou_bound,
            "explored_states": self.explored_states,
        }
        if self.counterexample is not None:
            u, v = self.counterexample
            out["counterexample"] = {"u": list(u), "v": list(v)}
        return out


def papadimitriou_bound(k: int, ell: int, max_a: int, max_b: int) -> int:
    return ell * ((max_a + max_b) * k) ** (2 * k + 1)


def _components(mat: IntMatrix) -> list:
    """Column index groups of the connected pieces of a {0,1} matrix (zero columns alone)."""
    parent = list(range(mat.n_cols))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in mat.rows:
        cols = [j for j, v in enumerate(r) if v]
        for j in cols[1:]:
            parent[find(j)] = find(cols[0])
    groups = {}
    for j in range(mat.n_cols):
        groups.setdefault(find(j), []).append(j)
    return sorted(groups.values())


class _AlternativeSearch:
    """Depth-first search for a solution of M y = rhs, y >= 0, other than ``avoid``.

    Values are tried in descending order so the first alternative found is the
    lexicographically greatest one. Failed (column, residual) states are memoized.
    """

    def __init__(self, rows, rhs, avoid, budget):
        self.rows = rows
        self.n = len(avoid)
        self.avoid = avoid
        self.budget = budget
        self.explored = 0
        self.cols = [[i for i, r in enumerate(rows) if r[j]] for j in range(self.n)]
        caps = []
        for j in range(self.n):
            caps.append(min(rhs[i] for i in self.cols[j]))
        self.caps = caps
        # suffix_max[j][i]: most that columns j.. can still add to row i
        suffix = [[0] * len(rows) for _ in range(self.n + 1)]
        for j in range(self.n - 1, -1, -1):
            suffix[j] = list(suffix[j + 1])
            for i in self.cols[j]:
                suffix[j][i] += caps[j]
        self.suffix = suffix
        self.rhs = rhs
        self.failed = set()

    def run(self):
        return self._go(0, tuple(self.rhs), False, [])

    def _go(self, j, res, differs, prefix):
        self.explored += 1
        if self.explored > self.budget:
            raise BudgetExceeded("detecting verification exceeded its state budget",
                                 budget=self.budget, bound=max(self.caps, default=0))
        if j == self.n:
            return list(prefix) if differs and not any(res) else None
        key = (j, res)
        if differs and key in self.failed:
            return None
        nxt = self.suffix[j + 1]
        lo, hi = 0, self.caps[j]
        for i in self.cols[j]:
            hi = min(hi, res[i])
            lo = max(lo, res[i] - nxt[i])
        col = self.cols[j]
        if lo <= hi:
            for t in range(hi, lo - 1, -1):
                new = list(res)
                for i in col:
                    new[i] -= t
                # rows untouched by this column must still be coverable
                ok = all(new[i] <= nxt[i] for i in range(len(new)) if i not in col)
                if not ok:
                    break
                prefix.append(t)
                found = self._go(j + 1, tuple(new), differs or t != self.avoid[j], prefix)
                prefix.pop()
                if found is not None:
                    return found
        if differs:
            self.failed.add(key)
        return None


def verify_detecting(mat, d: int, oracle: Optional[Callable] = None,
                     budget: int = 5_000_000) -> VerificationReport:
    """Decide exactly whether Mu = Mv (u >= 0, v in {0..d-1}^m) forces u = v.

    A counterexample exists iff M y = (d-1) M 1 has a non-negative solution
    y other than (d-1) 1; it is reported as u = y, v = (d-1) 1. Every
    coordinate of such a y is bounded by the right-hand side of any row that
    covers it, which gives a complete search box far below the generic
    Papadimitriou bound (both are reported).

    ``oracle(rows, rhs, avoid, caps)`` may replace the built-in search; it
    must return an alternative solution or None.
    """
    if isinstance(mat, DetectingMatrix):
        mat = mat.m
    if not mat.entries() <= {0, 1}:
        raise ValueError("verification expects a {0,1} matrix")
    if d < 2:
        raise ValueError("d must be at least 2")
    m = mat.n_cols
    target = (d - 1,) * m
    rhs_full = mat_vec(mat, target)
    pbound = papadimitriou_bound(mat.k, m, mat.max_abs, max(rhs_full, default=0))
    explored = 0
    search_bound = 0
    for group in _components(mat):
        rows_idx = [i for i, r in enumerate(mat.rows) if any(r[j] for j in group)]
        if not rows_idx:
            # an all-zero column: shifting it is invisible to M
            u = list(target)
            u[group[0]] += 1
            return VerificationReport(False, (tuple(u), target), search_bound, pbound, explored)
        rows = [[mat.rows[i][j] for j in group] for i in rows_idx]
        rhs = [rhs_full[i] for i in rows_idx]
        avoid = [d - 1] * len(group)
        if oracle is not None:
            caps = [min(rhs[i] for i in range(len(rows)) if rows[i][c]) for c in range(len(group))]
            search_bound = max(search_bound, max(caps))
            alt = oracle(rows, rhs, avoid, caps)
        else:
            search = _AlternativeSearch(rows, rhs, avoid, budget - explored)
            search_bound = max(search_bound, max(search.caps))
            alt = search.run()
            explored += search.explored
        if alt is not None:
            u = list(target)
            for c, j in enumerate(group):
                u[j] = alt[c]
            return VerificationReport(False, (tuple(u), target), search_bound, pbound, explored)
    return VerificationReport(True, None, search_bound, pbound, explored)


def detecting_to_text(mat: DetectingMatrix) -> str:
    """Matrix block format: a header line followed by the rows."""
    lines = [f"matrix {mat.k} {mat.cols}"]
    lines += [" ".join(str(x) for x in r) for r in mat.m.rows]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> IntMatrix:
    """Rows of integers; an optional 'matrix k m' or 'ilp k m' header is checked."""
    rows = []
    declared = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if tokens[0] in ("matrix", "ilp"):
            declared = (int(tokens[1]), int(tokens[2]))
            continue
        if ":" in tokens[0]:
            break
        rows.append([int(t) for t in tokens])
    if not rows:
        raise ValueError("no matrix rows found")
    mat = IntMatrix.from_rows(rows)
    if declared is not None and declared[0] != mat.k or declared is not None and declared[1] != mat.n_cols:
        raise ValueError(f"header declares {declared}, found {mat.shape}")
    return mat

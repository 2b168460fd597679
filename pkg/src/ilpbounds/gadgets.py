"""Small-coefficient gadgets: a number encoded by a doubling chain, subset
sum assembled from such gadgets, and duplication of coefficient-2 variables.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .core import IlpInstance, IntMatrix, block_diag, vstack


@dataclass(frozen=True)
class GadgetInstance:
    instance: IlpInstance
    designated: dict  # "z", "u", "w", "y": column index or list of indices
    expected_solutions: Optional[int] = None

    def __post_init__(self):
        cols = []
        for v in self.designated.values():
            if v is None:
                continue
            cols.extend(v if isinstance(v, (list, tuple)) else [v])
        if len(set(cols)) != len(cols):
            raise ValueError("designated columns must be distinct")
        if any(not 0 <= c < self.instance.ell for c in cols):
            raise ValueError("designated column out of range")

    def to_json(self) -> dict:
        return {"designated": {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.designated.items()},
                "expected_solutions": self.expected_solutions}


def _digits(s: int, delta: int) -> list:
    return [(s >> j) & 1 for j in range(delta)]


def _number_matrix(delta: int, s: int, forced: bool) -> tuple:
    """Rows and rhs over columns [z, y_0 .. y_{delta-1}] plus u when free."""
    width = 1 + delta + (0 if forced else 1)
    rows, rhs = [], []
    first = [0] * width
    first[1] = 1
    if not forced:
        first[-1] = 1
    rows.append(first)
    rhs.append(1)
    for j in range(delta - 1):
        r = [0] * width
        r[1 + j] = 2
        r[2 + j] = -1
        rows.append(r)
        rhs.append(0)
    last = [0] * width
    last[0] = -1
    for j, bit in enumerate(_digits(s, delta)):
        last[1 + j] = bit
    rows.append(last)
    rhs.append(0)
    return rows, rhs


def encode_number(delta: int, s: int, forced: bool = False) -> GadgetInstance:
    """z is 0 or s (free), or exactly s (forced), via y_j = 2^j y_0.

    Columns are z, y_0 .. y_{delta-1}, then u for the free variant.
    """
    if delta < 1:
        raise ValueError("delta must be at least 1")
    if not 0 <= s < 2 ** delta:
        raise ValueError(f"value {s} does not fit in {delta} bits")
    rows, rhs = _number_matrix(delta, s, forced)
    inst = IlpInstance(IntMatrix.from_rows(rows), rhs)
    designated = {"z": 0, "u": None if forced else delta + 1, "y": tuple(range(1, delta + 1))}
    return GadgetInstance(inst, designated, 1 if forced else 2)


def bits_needed(values: Sequence[int]) -> int:
    return max(1, max((int(v).bit_length() for v in values), default=1))


def subset_sum_to_ilp(s: Sequence[int], t: int) -> GadgetInstance:
    """Feasible iff some subset of s sums to t.

    Free gadgets P_1..P_k for the s_i, a forced gadget Q for t, and a first
    row z_1 + ... + z_k - w = 0 linking them.
    """
    s = [int(v) for v in s]
    if any(v < 0 for v in s) or t < 0:
        raise ValueError("subset sum needs non-negative integers")
    delta = bits_needed(s + [t])
    blocks, rhs = [], []
    z_cols, u_cols, y_cols = [], [], []
    offset = 0
    for v in s:
        g = encode_number(delta, v)
        blocks.append(g.instance.a)
        rhs.extend(g.instance.b)
        z_cols.append(offset)
        u_cols.append(offset + g.designated["u"])
        y_cols.extend(offset + c for c in g.designated["y"])
        offset += g.instance.ell
    q = encode_number(delta, t, forced=True)
    blocks.append(q.instance.a)
    rhs.extend(q.instance.b)
    w_col = offset
    y_cols.extend(offset + c for c in q.designated["y"])
    body = block_diag(blocks)
    link = [0] * body.n_cols
    for c in z_cols:
        link[c] = 1
    link[w_col] = -1
    a = vstack([IntMatrix.from_rows([link]), body])
    inst = IlpInstance(a, [0] + rhs)
    designated = {"z": tuple(z_cols), "u": tuple(u_cols), "w": w_col, "y": tuple(y_cols)}
    return GadgetInstance(inst, designated, None)


def chosen_subset(gadget: GadgetInstance, x: Sequence[int]) -> list:
    """Indices i whose gadget took the value branch (u_i = 0)."""
    return [i for i, c in enumerate(gadget.designated["u"]) if x[c] == 0]


def duplicate_to_pm1(inst: IlpInstance) -> IlpInstance:
    """Replace each 2x by x + x' with a new row x - x' = 0.

    New columns and rows are appended; x' copies the bounds of x.
    """
    a = inst.a
    if not a.entries() <= {-1, 0, 1, 2}:
        raise ValueError("entries must lie in {-1, 0, 1, 2}")
    doubled = [j for j in range(a.n_cols) if any(r[j] == 2 for r in a.rows)]
    if not doubled:
        return inst
    extra = len(doubled)
    rows = []
    for r in a.rows:
        new = [1 if v == 2 else v for v in r] + [0] * extra
        for t, j in enumerate(doubled):
            if r[j] == 2:
                new[a.n_cols + t] = 1
        rows.append(new)
    for t, j in enumerate(doubled):
        r = [0] * (a.n_cols + extra)
        r[j] = 1
        r[a.n_cols + t] = -1
        rows.append(r)
    b = list(inst.b) + [0] * extra
    lower = None if inst.lower is None else list(inst.lower) + [inst.lower[j] for j in doubled]
    upper = None if inst.upper is None else list(inst.upper) + [inst.upper[j] for j in doubled]
    w = None if inst.objective is None else list(inst.objective) + [0] * extra
    return IlpInstance(IntMatrix.from_rows(rows), b, lower, upper, w)


def duplicate_witness(inst: IlpInstance, x: Sequence[int]) -> tuple:
    """Extend a solution of inst to the duplicated instance (x' = x)."""
    doubled = [j for j in range(inst.ell) if any(r[j] == 2 for r in inst.a.rows)]
    return tuple(x) + tuple(x[j] for j in doubled)

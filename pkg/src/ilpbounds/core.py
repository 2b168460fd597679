"""Exact integer matrices, standard-form ILP instances and their file formats.

Everything here uses Python ints, so arithmetic never overflows or rounds.
All types are immutable once built.
"""
from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

IntVector = tuple  # tuple[int, ...]; kept as a plain tuple for speed and hashing


class DimensionError(ValueError):
    pass


class ParseError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """A search would need more states than its configured budget allows."""

    def __init__(self, message, *, budget=None, needed=None, bound=None):
        super().__init__(message)
        self.budget = budget
        self.needed = needed
        self.bound = bound


def as_int_vector(values: Iterable) -> IntVector:
    t = tuple(values)
    if all(type(v) is int for v in t):
        return t
    out = []
    for v in t:
        if isinstance(v, bool):
            raise TypeError("booleans are not accepted as integers")
        out.append(operator.index(v))
    return tuple(out)


def norm1(v: Sequence[int]) -> int:
    return sum(abs(x) for x in v)


def norm_inf(v: Sequence[int]) -> int:
    return max((abs(x) for x in v), default=0)


def support(v: Sequence[int]) -> tuple:
    return tuple(i for i, x in enumerate(v) if x != 0)


def vec_add(u, v) -> IntVector:
    if len(u) != len(v):
        raise DimensionError(f"length mismatch {len(u)} vs {len(v)}")
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v) -> IntVector:
    if len(u) != len(v):
        raise DimensionError(f"length mismatch {len(u)} vs {len(v)}")
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c: int, v) -> IntVector:
    return tuple(c * a for a in v)


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple
    n_cols: int
    max_abs: int = field(init=False, compare=False)

    def __post_init__(self):
        rows = tuple(as_int_vector(r) for r in self.rows)
        if not rows:
            raise DimensionError("a matrix needs at least one row")
        if self.n_cols < 1:
            raise DimensionError("a matrix needs at least one column")
        for i, r in enumerate(rows):
            if len(r) != self.n_cols:
                raise DimensionError(f"row {i} has {len(r)} entries, expected {self.n_cols}")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "max_abs", max(max(max(r), -min(r)) for r in rows))

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix":
        rows = [as_int_vector(r) for r in rows]
        if not rows:
            raise DimensionError("a matrix needs at least one row")
        return cls(tuple(rows), len(rows[0]))

    @classmethod
    def zeros(cls, k: int, ell: int) -> "IntMatrix":
        return cls(tuple((0,) * ell for _ in range(k)), ell)

    @classmethod
    def ones(cls, k: int, ell: int) -> "IntMatrix":
        return cls(tuple((1,) * ell for _ in range(k)), ell)

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)), n)

    @property
    def k(self) -> int:
        return len(self.rows)

    @property
    def ell(self) -> int:
        return self.n_cols

    @property
    def shape(self) -> tuple:
        return (len(self.rows), self.n_cols)

    def row(self, i: int) -> IntVector:
        return self.rows[i]

    def column(self, j: int) -> IntVector:
        return tuple(r[j] for r in self.rows)

    def columns(self) -> list:
        return [self.column(j) for j in range(self.n_cols)]

    def entries(self) -> set:
        return {x for r in self.rows for x in r}

    def transpose(self) -> "IntMatrix":
        return IntMatrix.from_rows(self.columns())

    def to_list(self) -> list:
        return [list(r) for r in self.rows]

    def without_row(self, i: int) -> Optional["IntMatrix"]:
        rest = self.rows[:i] + self.rows[i + 1:]
        return IntMatrix(rest, self.n_cols) if rest else None

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            return mat_mul(self, other)
        return mat_vec(self, other)

    def __str__(self):
        return "\n".join(" ".join(str(x) for x in r) for r in self.rows)


def mat_vec(a: IntMatrix, x: Sequence[int]) -> IntVector:
    if len(x) != a.n_cols:
        raise DimensionError(f"vector of length {len(x)} against {a.n_cols} columns")
    return tuple(sum(c * v for c, v in zip(r, x) if c) for r in a.rows)


def mat_mul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    if a.n_cols != b.k:
        raise DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    if a.max_abs * b.max_abs * max(a.n_cols, 1) < 2 ** 62:
        prod = np.array(a.rows, dtype=np.int64) @ np.array(b.rows, dtype=np.int64)
        return IntMatrix(tuple(map(tuple, prod.tolist())), b.n_cols)
    cols = b.columns()
    return IntMatrix(tuple(tuple(sum(p * q for p, q in zip(r, c) if p) for c in cols) for r in a.rows),
                     b.n_cols)


def hstack(blocks: Sequence[IntMatrix]) -> IntMatrix:
    k = blocks[0].k
    if any(b.k != k for b in blocks):
        raise DimensionError("hstack needs equal row counts")
    return IntMatrix.from_rows([sum((b.rows[i] for b in blocks), ()) for i in range(k)])


def vstack(blocks: Sequence[IntMatrix]) -> IntMatrix:
    ell = blocks[0].n_cols
    if any(b.n_cols != ell for b in blocks):
        raise DimensionError("vstack needs equal column counts")
    return IntMatrix(tuple(r for b in blocks for r in b.rows), ell)


def block_diag(blocks: Sequence[IntMatrix]) -> IntMatrix:
    total = sum(b.n_cols for b in blocks)
    rows = []
    offset = 0
    for b in blocks:
        for r in b.rows:
            rows.append((0,) * offset + r + (0,) * (total - offset - b.n_cols))
        offset += b.n_cols
    return IntMatrix(tuple(rows), total)


@dataclass(frozen=True)
class IlpInstance:
    """{A x = b, lower <= x <= upper}, optionally maximizing objective . x.

    ``lower=None`` means all zeros; ``upper=None`` means unbounded, and a
    ``None`` entry inside ``upper`` marks a single unbounded coordinate.
    """

    a: IntMatrix
    b: IntVector
    lower: Optional[IntVector] = None
    upper: Optional[tuple] = None
    objective: Optional[IntVector] = None

    def __post_init__(self):
        ell = self.a.n_cols
        b = as_int_vector(self.b)
        if len(b) != self.a.k:
            raise DimensionError(f"b has {len(b)} entries but A has {self.a.k} rows")
        object.__setattr__(self, "b", b)
        lower = self.lower
        if lower is not None:
            lower = as_int_vector(lower)
            if len(lower) != ell:
                raise DimensionError(f"lower has {len(lower)} entries, expected {ell}")
            if not any(lower):
                lower = None
        upper = self.upper
        if upper is not None:
            upper = tuple(None if u is None else operator.index(u) for u in upper)
            if len(upper) != ell:
                raise DimensionError(f"upper has {len(upper)} entries, expected {ell}")
            if all(u is None for u in upper):
                upper = None
        if self.objective is not None:
            w = as_int_vector(self.objective)
            if len(w) != ell:
                raise DimensionError(f"objective has {len(w)} entries, expected {ell}")
            object.__setattr__(self, "objective", w)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        for j in range(ell):
            hi = self.upper_at(j)
            if hi is not None and self.lower_at(j) > hi:
                raise ValueError(f"lower bound exceeds upper bound at coordinate {j}")

    @property
    def k(self) -> int:
        return self.a.k

    @property
    def ell(self) -> int:
        return self.a.n_cols

    def lower_at(self, j: int) -> int:
        return 0 if self.lower is None else self.lower[j]

    def upper_at(self, j: int) -> Optional[int]:
        return None if self.upper is None else self.upper[j]

    @property
    def lower_bounds(self) -> IntVector:
        return self.lower if self.lower is not None else (0,) * self.ell

    @property
    def upper_bounds(self) -> tuple:
        return self.upper if self.upper is not None else (None,) * self.ell

    def is_standard_form(self) -> bool:
        return self.lower is None and self.upper is None

    def is_bounded(self) -> bool:
        return self.upper is not None and all(u is not None for u in self.upper)

    def residual(self, x: Sequence[int]) -> IntVector:
        return vec_sub(self.b, mat_vec(self.a, x))

    def is_feasible(self, x: Sequence[int]) -> bool:
        if len(x) != self.ell:
            return False
        for j, v in enumerate(x):
            if v < self.lower_at(j):
                return False
            hi = self.upper_at(j)
            if hi is not None and v > hi:
                return False
        return mat_vec(self.a, x) == self.b

    def value(self, x: Sequence[int]) -> int:
        if self.objective is None:
            return 0
        return sum(w * v for w, v in zip(self.objective, x))

    def with_bounds(self, lower=None, upper=None) -> "IlpInstance":
        return IlpInstance(self.a, self.b, lower, upper, self.objective)


@dataclass(frozen=True)
class Solution:
    x: IntVector

    def __post_init__(self):
        object.__setattr__(self, "x", as_int_vector(self.x))

    @property
    def support(self) -> tuple:
        return support(self.x)


# ---------------------------------------------------------------- text format

def _ints(tokens, what):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"non-integer token in {what}: {' '.join(tokens)}") from None


def parse_instance(text) -> IlpInstance:
    """Read the line-oriented ILP format.

    Besides the canonical form, ``/`` may separate lines, the header may omit
    the ``ilp`` keyword and ``=`` is accepted in place of ``b:``. ``#``
    starts a comment.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    lines = []
    for raw in text.replace("/", "\n").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise ParseError("empty instance")
    head = lines[0].split()
    if head and head[0] == "ilp":
        head = head[1:]
    if len(head) != 2:
        raise ParseError("header must be 'ilp <k> <ell>'")
    k, ell = _ints(head, "header")
    if k < 1 or ell < 1:
        raise ParseError("k and ell must be positive")
    if len(lines) < k + 2:
        raise ParseError(f"expected {k} matrix rows followed by 'b:'")
    rows = []
    for i in range(k):
        tokens = lines[1 + i].split()
        if tokens and (tokens[0].endswith(":") or tokens[0] == "="):
            raise DimensionError(f"found '{tokens[0]}' where matrix row {i + 1} of {k} was expected")
        r = _ints(tokens, f"row {i + 1}")
        if len(r) != ell:
            raise DimensionError(f"row {i + 1} has {len(r)} entries, expected {ell}")
        rows.append(r)
    fields = {}
    for line in lines[1 + k:]:
        if line.startswith("="):
            key, rest = "b", line[1:]
        else:
            key, sep, rest = line.partition(":")
            if not sep or key.strip() not in ("b", "l", "u", "w"):
                raise ParseError(f"unexpected line: {line}")
            key = key.strip()
        if key in fields:
            raise ParseError(f"field {key} given twice")
        fields[key] = rest.split()
    if "b" not in fields:
        raise ParseError("missing 'b:' line")
    b = _ints(fields["b"], "b")
    if len(b) != k:
        raise DimensionError(f"b has {len(b)} entries, expected {k}")
    lower = upper = w = None
    if "l" in fields:
        lower = _ints(fields["l"], "l")
        if len(lower) != ell:
            raise DimensionError(f"l has {len(lower)} entries, expected {ell}")
    if "u" in fields:
        upper = [None if t == "*" else _ints([t], "u")[0] for t in fields["u"]]
        if len(upper) != ell:
            raise DimensionError(f"u has {len(upper)} entries, expected {ell}")
    if "w" in fields:
        w = _ints(fields["w"], "w")
        if len(w) != ell:
            raise DimensionError(f"w has {len(w)} entries, expected {ell}")
    return IlpInstance(IntMatrix.from_rows(rows), tuple(b), lower, upper, w)


def serialize_instance(inst: IlpInstance) -> str:
    out = [f"ilp {inst.k} {inst.ell}"]
    out += [" ".join(str(x) for x in r) for r in inst.a.rows]
    out.append("b: " + " ".join(str(x) for x in inst.b))
    if inst.lower is not None:
        out.append("l: " + " ".join(str(x) for x in inst.lower))
    if inst.upper is not None:
        out.append("u: " + " ".join("*" if x is None else str(x) for x in inst.upper))
    if inst.objective is not None:
        out.append("w: " + " ".join(str(x) for x in inst.objective))
    return "\n".join(out) + "\n"


def instance_to_json(inst: IlpInstance) -> dict:
    d = {"k": inst.k, "ell": inst.ell, "a": inst.a.to_list(), "b": list(inst.b)}
    if inst.lower is not None:
        d["l"] = list(inst.lower)
    if inst.upper is not None:
        d["u"] = ["*" if x is None else x for x in inst.upper]
    if inst.objective is not None:
        d["w"] = list(inst.objective)
    return d


def instance_from_json(data) -> IlpInstance:
    if isinstance(data, (str, bytes)):
        data = json.loads(data)
    a = IntMatrix.from_rows(data["a"])
    if "k" in data and data["k"] != a.k or "ell" in data and data["ell"] != a.n_cols:
        raise DimensionError("declared k/ell disagree with the matrix")
    upper = data.get("u")
    if upper is not None:
        upper = [None if x in ("*", None) else x for x in upper]
    return IlpInstance(a, tuple(data["b"]), data.get("l"), upper, data.get("w"))


def load_instance(text) -> IlpInstance:
    """Accept either the text format or its JSON mirror."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    if text.lstrip().startswith("{"):
        return instance_from_json(text)
    return parse_instance(text)

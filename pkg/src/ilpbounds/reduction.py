"""SAT to ILP feasibility with few constraints and small coefficients.

Stages: (3,4)-form rewrite, the direct {0,1} encoding, compression of the
constraints with a detecting matrix (A' = MA, b' = Mb), bitwise coefficient
reduction with carries, and the optional reduction of the targets to {0,1}.
Each stage can also push a witness forward, which lets tests check
feasibility of large intermediate instances without a search.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cnf import CnfFormula, Sat34Result, lift_assignment, sat_to_34sat, validate_34
from .core import DimensionError, IlpInstance, IntMatrix, mat_mul, mat_vec
from .detecting import DetectingMatrix, gen_detecting_deterministic

STAGES = ("34sat", "ilp", "compressed", "binary", "pm1-targets")


@dataclass(frozen=True)
class StageInfo:
    name: str
    k: int
    ell: int
    max_a: int
    max_b: int
    entry_range: tuple
    target_range: tuple
    notes: tuple = ()

    def to_json(self) -> dict:
        d = {"stage": self.name, "k": self.k, "ell": self.ell, "max_a": self.max_a,
             "max_b": self.max_b, "entry_range": list(self.entry_range),
             "target_range": list(self.target_range)}
        d.update(dict(self.notes))
        return d


def stage_info(name: str, inst: IlpInstance, **notes) -> StageInfo:
    entries = inst.a.entries()
    return StageInfo(name, inst.k, inst.ell, inst.a.max_abs, max((abs(x) for x in inst.b), default=0),
                     (min(entries), max(entries)), (min(inst.b), max(inst.b)),
                     tuple(sorted(notes.items())))


@dataclass(frozen=True)
class ReductionTrace:
    stages: tuple
    provenance: tuple  # one tag per output column

    def then(self, info: StageInfo, provenance) -> "ReductionTrace":
        return ReductionTrace(self.stages + (info,), tuple(provenance))

    def to_json(self) -> dict:
        return {"stages": [s.to_json() for s in self.stages],
                "provenance": [list(p) for p in self.provenance]}


# ------------------------------------------------------------ direct encoding

def sat34_to_ilp(phi: CnfFormula):
    """x_v + x_not_v = 1 per variable; y_c + z_c = 2 and x_l1 + x_l2 + x_l3 + y_c = 3 per clause.

    Columns: x_1, x_not_1, ..., x_n, x_not_n, then y_1, z_1, ..., y_m, z_m.
    Rows: the n variable rows, then for each clause its slack row and its literal row.
    """
    problems = validate_34(phi)
    if problems:
        raise ValueError("formula is not in (3,4)-form: " + "; ".join(problems[:3]))
    n, m = phi.num_vars, phi.num_clauses
    ell = 2 * n + 2 * m
    rows, b = [], []
    for v in range(n):
        r = [0] * ell
        r[2 * v] = r[2 * v + 1] = 1
        rows.append(r)
        b.append(1)
    for c, clause in enumerate(phi.clauses):
        y, z = 2 * n + 2 * c, 2 * n + 2 * c + 1
        slack = [0] * ell
        slack[y] = slack[z] = 1
        rows.append(slack)
        b.append(2)
        lits = [0] * ell
        for lit in clause:
            lits[2 * (abs(lit) - 1) + (0 if lit > 0 else 1)] = 1
        lits[y] = 1
        rows.append(lits)
        b.append(3)
    inst = IlpInstance(IntMatrix(tuple(tuple(r) for r in rows), ell), tuple(b))
    prov = []
    for v in range(1, n + 1):
        prov += [("x", v, True), ("x", v, False)]
    for c in range(m):
        prov += [("slack_y", c), ("slack_z", c)]
    trace = ReductionTrace((stage_info("ilp", inst),), tuple(prov))
    return inst, trace


def ilp_witness(phi: CnfFormula, assignment: Sequence[bool]) -> tuple:
    """The solution of the direct encoding that corresponds to a satisfying assignment."""
    x = []
    for v in range(phi.num_vars):
        x += [int(bool(assignment[v])), 1 - int(bool(assignment[v]))]
    for clause in phi.clauses:
        true_lits = sum(1 for lit in clause if (lit > 0) == bool(assignment[abs(lit) - 1]))
        y = 3 - true_lits
        x += [y, 2 - y]
    return tuple(x)


def assignment_from_ilp(phi: CnfFormula, x: Sequence[int]) -> tuple:
    return tuple(bool(x[2 * v]) for v in range(phi.num_vars))


# ---------------------------------------------------------------- compression

def compress_constraints(inst: IlpInstance, mat: DetectingMatrix) -> IlpInstance:
    """Replace Ax = b by (MA)x = Mb; sound because Ax is non-negative and b < d."""
    if mat.cols != inst.k:
        raise DimensionError(f"detecting matrix has {mat.cols} columns, instance has {inst.k} rows")
    if min(inst.a.entries()) < 0:
        raise ValueError("compression needs a non-negative constraint matrix")
    if min(inst.b) < 0 or max(inst.b) > mat.d - 1:
        raise ValueError(f"targets must lie in 0..{mat.d - 1}")
    if not inst.is_standard_form():
        raise ValueError("compression expects the standard form x >= 0")
    return IlpInstance(mat_mul(mat.m, inst.a), mat_vec(mat.m, inst.b))


# ------------------------------------------------------- coefficient reduction

def _bit_width(value: int) -> int:
    """ceil(log2(1 + value))."""
    return value.bit_length()


def _carry_base(b: int) -> int:
    """2^ceil(log2 b), with 0 for b = 0 (carries are then forced to 0)."""
    if b <= 0:
        return 0
    return 1 << (b - 1).bit_length()


def reduce_coefficients(inst: IlpInstance):
    """Split every row into bit equations with carries so that A' is {0,1}.

    With delta = ceil(log2(1 + max|a|)), a row a.x = b becomes, for bit j,
        y_{j-1} + sum_i a_i[j] x_i + y'_j + y''_j = b[j] + 2B   (j < delta-1)
        y_{delta-2} + sum_i a_i[delta-1] x_i = b >> (delta-1)
    together with y_j + y'_j = B and y_j + y''_j = B, where B = 2^ceil(log2 b).
    Rows come out bit rows first, then the complement pairs; new columns
    (y_j, y'_j, y''_j per bit) are appended after the original ones, row by row.
    """
    if not inst.is_standard_form():
        raise ValueError("coefficient reduction expects the standard form x >= 0")
    if min(inst.a.entries()) < 0 or min(inst.b) < 0:
        raise ValueError("coefficient reduction needs non-negative A and b")
    delta = max(1, _bit_width(inst.a.max_abs))
    ell = inst.ell
    aux_per_row = 3 * (delta - 1)
    total = ell + aux_per_row * inst.k
    rows, rhs, prov = [], [], []
    for r, (arow, b) in enumerate(zip(inst.a.rows, inst.b)):
        base_col = ell + aux_per_row * r
        big = _carry_base(b)

        def col(kind, j):
            return base_col + 3 * j + kind  # kind 0: y, 1: y', 2: y''

        for j in range(delta - 1):
            prov += [("carry", r, j), ("carry_c1", r, j), ("carry_c2", r, j)]
        for j in range(delta):
            row = [0] * total
            for i, a in enumerate(arow):
                if (a >> j) & 1:
                    row[i] = 1
            if j > 0:
                row[col(0, j - 1)] = 1
            if j < delta - 1:
                row[col(1, j)] = row[col(2, j)] = 1
                rhs.append(((b >> j) & 1) + 2 * big)
            else:
                rhs.append(b >> j)
            rows.append(tuple(row))
        for j in range(delta - 1):
            for kind in (1, 2):
                row = [0] * total
                row[col(0, j)] = row[col(kind, j)] = 1
                rows.append(tuple(row))
                rhs.append(big)
    out = IlpInstance(IntMatrix(tuple(rows), total), tuple(rhs))
    return out, tuple(prov), delta


def coefficient_witness(inst: IlpInstance, x: Sequence[int]) -> tuple:
    """Extend a solution of ``inst`` by the carry values used in ``reduce_coefficients``."""
    delta = max(1, _bit_width(inst.a.max_abs))
    extra = []
    for arow, b in zip(inst.a.rows, inst.b):
        big = _carry_base(b)
        carry = 0
        for j in range(delta - 1):
            bit_sum = carry + sum(xi for a, xi in zip(arow, x) if (a >> j) & 1)
            carry = (bit_sum - ((b >> j) & 1)) // 2
            extra += [carry, big - carry, big - carry]
    return tuple(x) + tuple(extra)


# ------------------------------------------------------------ target reduction

def reduce_targets(inst: IlpInstance):
    """Make every target 0 or 1 at the price of -1 entries.

    Adds z, y_0..y_{s-1} with z = 1 and z + y_0 + ... + y_{i-1} - y_i = 0,
    which force y_i = 2^i; each row a.x = b becomes a.x - c.y = 0 with c the
    binary digits of b.
    """
    if not inst.a.entries() <= {0, 1}:
        raise ValueError("target reduction expects a {0,1} constraint matrix")
    if min(inst.b) < 0:
        raise ValueError("targets must be non-negative")
    if not inst.is_standard_form():
        raise ValueError("target reduction expects the standard form x >= 0")
    s = max(inst.b).bit_length()
    ell = inst.ell
    total = ell + 1 + s
    rows, rhs = [], []
    for arow, b in zip(inst.a.rows, inst.b):
        rows.append(tuple(arow) + (0,) + tuple(-((b >> i) & 1) for i in range(s)))
        rhs.append(0)
    rows.append((0,) * ell + (1,) + (0,) * s)
    rhs.append(1)
    for i in range(s):
        rows.append((0,) * ell + (1,) + (1,) * i + (-1,) + (0,) * (s - 1 - i))
        rhs.append(0)
    out = IlpInstance(IntMatrix(tuple(rows), total), tuple(rhs))
    prov = (("unit",),) + tuple(("power", i) for i in range(s))
    return out, prov, s


def target_witness(inst: IlpInstance, x: Sequence[int]) -> tuple:
    s = max(inst.b).bit_length()
    return tuple(x) + (1,) + tuple(1 << i for i in range(s))


# ----------------------------------------------------------------- the pipeline

@dataclass
class PipelineRun:
    """All intermediate artefacts of one pipeline run."""

    source: CnfFormula
    sat34: Sat34Result
    instances: dict  # stage name -> IlpInstance (no entry for "34sat")
    detecting: DetectingMatrix
    trace: ReductionTrace
    delta: int = 0
    target_bits: int = 0

    def witnesses(self, assignment: Sequence[bool]) -> dict:
        """Push a satisfying assignment of the source through every stage."""
        lifted = lift_assignment(self.sat34, assignment)
        x = ilp_witness(self.sat34.formula, lifted)
        out = {"34sat": lifted, "ilp": x, "compressed": x}
        x = coefficient_witness(self.instances["compressed"], x)
        out["binary"] = x
        if "pm1-targets" in self.instances:
            out["pm1-targets"] = target_witness(self.instances["binary"], x)
        return out

    def pull_back(self, x: Sequence[int]) -> tuple:
        """Assignment of the source variables read off a solution of any ILP stage."""
        phi34 = self.sat34.formula
        return self.sat34.pull_back(assignment_from_ilp(phi34, x), self.source.num_vars)


def run_pipeline(phi: CnfFormula, d: int = 4, with_targets: bool = True) -> PipelineRun:
    sat34 = sat_to_34sat(phi)
    phi34 = sat34.formula
    ilp, trace = sat34_to_ilp(phi34)
    first = StageInfo("34sat", phi34.num_clauses, phi34.num_vars, 1, 1, (-1, 1), (1, 1),
                      (("clauses", phi34.num_clauses), ("variables", phi34.num_vars)))
    trace = ReductionTrace((first,) + trace.stages, trace.provenance)
    mat = gen_detecting_deterministic(d, ilp.k)
    compressed = compress_constraints(ilp, mat)
    trace = trace.then(stage_info("compressed", compressed, detecting_rows=mat.k, d=d), trace.provenance)
    binary, carries, delta = reduce_coefficients(compressed)
    trace = trace.then(stage_info("binary", binary, delta=delta), trace.provenance + carries)
    instances = {"ilp": ilp, "compressed": compressed, "binary": binary}
    s = 0
    if with_targets:
        pm1, extra, s = reduce_targets(binary)
        trace = trace.then(stage_info("pm1-targets", pm1, target_bits=s), trace.provenance + extra)
        instances["pm1-targets"] = pm1
    return PipelineRun(phi, sat34, instances, mat, trace, delta, s)


def pipeline(phi: CnfFormula, d: int = 4):
    """(3,4)-rewrite, encode, compress with a deterministic d-detecting matrix, reduce coefficients."""
    run = run_pipeline(phi, d, with_targets=False)
    return run.instances["binary"], run.trace

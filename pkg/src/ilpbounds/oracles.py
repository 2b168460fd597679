"""Independent deciders used to cross-check the SAT-to-ILP pipeline.

Feasibility of the encoded instance is decided by CP-SAT (exact integer
arithmetic). The later stages are too large for a direct solve once the
compression uses big detecting blocks, so their verdicts are derived from
the previous stage together with computed certificates:

* compressed: every distinct diagonal block of M is verified d-detecting,
  A is non-negative and b lies in 0..d-1, so M A x = M b forces A x = b;
* binary: each row's carry gadget is enumerated over all carries, showing
  that the bit sums it admits are exactly those with sum 2^j S_j = b;
* pm1-targets: the appended z/y block is triangular with the unique
  solution z = 1, y_i = 2^i, so every row reads a.x = b again.

Small instances are additionally solved directly at every stage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cnf import CnfFormula, brute_force_sat
from .core import BudgetExceeded, IlpInstance, IntMatrix, mat_mul, mat_vec
from .detecting import DetectingMatrix, VerificationReport, verify_detecting
from .reduction import PipelineRun, run_pipeline
from .solvers import PROPAGATION_VISITS, SolveReport, _Propagator, _report, papadimitriou_box
from .structure import block_components

CPSAT_DOMAIN_LIMIT = 2 ** 40


def _cp_model():
    from ortools.sat.python import cp_model
    return cp_model


def cpsat_solve(inst: IlpInstance, time_limit: float = 60.0) -> SolveReport:
    """Exact feasibility via CP-SAT over domains tightened by propagation.

    Domains start from the instance bounds capped by the Papadimitriou box,
    so the verdict is complete for standard-form instances.
    """
    cp_model = _cp_model()
    big = papadimitriou_box(inst)
    lo = list(inst.lower_bounds)
    hi = [big if u is None else u for u in inst.upper_bounds]
    bounds = {"B": big}
    if not _Propagator(inst).run(lo, hi, range(inst.k), max_visits=PROPAGATION_VISITS):
        return _report(inst, None, "cp-sat", 0, bounds)
    for j, col in enumerate(inst.a.columns()):
        if not any(col):
            hi[j] = lo[j]  # a zero column never affects feasibility
    if max(hi, default=0) > CPSAT_DOMAIN_LIMIT or min(lo, default=0) < -CPSAT_DOMAIN_LIMIT:
        raise BudgetExceeded("variable domains too wide for CP-SAT", bound=max(hi))
    model = cp_model.CpModel()
    xs = [model.NewIntVar(lo[j], hi[j], f"x{j}") for j in range(inst.ell)]
    for r, bi in zip(inst.a.rows, inst.b):
        model.Add(sum(c * x for c, x in zip(r, xs) if c) == bi)
    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = time_limit
    solver.parameters.num_workers = 1
    solver.parameters.random_seed = 0
    status = solver.Solve(model)
    explored = int(solver.NumBranches())
    if status in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        return _report(inst, tuple(solver.Value(x) for x in xs), "cp-sat", explored, bounds)
    if status == cp_model.INFEASIBLE:
        return _report(inst, None, "cp-sat", explored, bounds)
    raise BudgetExceeded(f"CP-SAT returned {solver.StatusName(status)} within {time_limit}s")


def cpsat_alternative(rows, rhs, avoid, caps, time_limit: float = 120.0) -> Optional[list]:
    """Oracle for verify_detecting: a solution y >= 0 of rows.y = rhs with y != avoid."""
    cp_model = _cp_model()
    model = cp_model.CpModel()
    ys = [model.NewIntVar(0, caps[j], f"y{j}") for j in range(len(avoid))]
    for r, c in zip(rows, rhs):
        model.Add(sum(y for a, y in zip(r, ys) if a) == c)
    diff = [model.NewBoolVar(f"d{j}") for j in range(len(avoid))]
    for j, y in enumerate(ys):
        model.Add(y != avoid[j]).OnlyEnforceIf(diff[j])
        model.Add(y == avoid[j]).OnlyEnforceIf(diff[j].Not())
    model.AddBoolOr(diff)
    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = time_limit
    solver.parameters.num_workers = 1
    solver.parameters.random_seed = 0
    status = solver.Solve(model)
    if status in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        alt = [solver.Value(y) for y in ys]
        assert all(sum(a * v for a, v in zip(r, alt)) == c for r, c in zip(rows, rhs))
        return alt
    if status == cp_model.INFEASIBLE:
        return None
    raise BudgetExceeded(f"CP-SAT returned {solver.StatusName(status)} within {time_limit}s")


def cpsat_sat(phi: CnfFormula, time_limit: float = 60.0) -> Optional[tuple]:
    """A satisfying assignment of phi found by CP-SAT, or None when unsatisfiable."""
    cp_model = _cp_model()
    model = cp_model.CpModel()
    xs = [model.NewBoolVar(f"v{v}") for v in range(1, phi.num_vars + 1)]
    for clause in phi.clauses:
        model.AddBoolOr([xs[lit - 1] if lit > 0 else xs[-lit - 1].Not() for lit in clause])
    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = time_limit
    solver.parameters.num_workers = 1
    solver.parameters.random_seed = 0
    status = solver.Solve(model)
    if status in (cp_model.OPTIMAL, cp_model.FEASIBLE):
        model_values = tuple(bool(solver.Value(x)) for x in xs)
        assert phi.evaluate(model_values)
        return model_values
    if status == cp_model.INFEASIBLE:
        return None
    raise BudgetExceeded(f"CP-SAT returned {solver.StatusName(status)} within {time_limit}s")


# -------------------------------------------------------- detecting blocks

_DETECTING_CACHE: dict = {}


def verify_block(mat: IntMatrix, d: int, dfs_budget: int = 200_000) -> VerificationReport:
    """verify_detecting with the built-in search, falling back to CP-SAT; cached."""
    key = (mat.rows, d)
    hit = _DETECTING_CACHE.get(key)
    if hit is None:
        try:
            hit = verify_detecting(mat, d, budget=dfs_budget)
        except BudgetExceeded:
            hit = verify_detecting(mat, d, oracle=cpsat_alternative)
        _DETECTING_CACHE[key] = hit
    return hit


# ---------------------------------------------------------------- certificates

@dataclass
class Certificate:
    stage: str
    ok: bool
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"stage": self.stage, "ok": self.ok, "detail": self.detail}


def certify_compression(ilp: IlpInstance, compressed: IlpInstance, mat: DetectingMatrix) -> Certificate:
    detail = {}
    ok = True
    if mat_mul(mat.m, ilp.a) != compressed.a or mat_vec(mat.m, ilp.b) != compressed.b:
        ok = False
        detail["product"] = "compressed system is not M A x = M b"
    if min(ilp.a.entries()) < 0 or min(ilp.b) < 0 or max(ilp.b) > mat.d - 1:
        ok = False
        detail["domain"] = "A x or b leaves the detecting domain"
    blocks = {}
    decomp = block_components(mat.m)
    for blk in decomp.blocks:
        blocks.setdefault(blk.matrix.rows, blk.matrix)
    if decomp.free_cols:
        ok = False
        detail["zero_columns"] = True
    verified = []
    for m in blocks.values():
        try:
            good = verify_block(m, mat.d).verified
        except BudgetExceeded:
            good = None  # undecided: the certificate does not hold
        verified.append({"shape": list(m.shape), "verified": good})
        ok = ok and bool(good)
    detail["blocks"] = verified
    return Certificate("compressed", ok, detail)


def _compositions(b: int, delta: int) -> int:
    """Number of S in N^delta with sum 2^j S_j = b."""
    ways = [1] + [0] * b
    for j in range(delta):
        w = 1 << j
        for t in range(w, b + 1):
            ways[t] += ways[t - w]
    return ways[b]


_CARRY_CACHE: dict = {}


def _carry_set_ok(rhs_bits: tuple, top: int, big: int, target: int) -> bool:
    """Enumerate carries y in [0, big]^(delta-1) for one row gadget and check that
    the admitted bit sums are exactly {S >= 0 : sum 2^j S_j = target}.

    Bit row j < delta-1 reads S_j + y_{j-1} + 2(big - y_j) = rhs_bits[j]; the top
    row reads S_{delta-1} + y_{delta-2} = top.
    """
    key = (rhs_bits, top, big, target)
    if key in _CARRY_CACHE:
        return _CARRY_CACHE[key]
    delta = len(rhs_bits) + 1
    if delta == 1:
        ok = top == target
    else:
        axes = [np.arange(big + 1, dtype=np.int64)] * (delta - 1)
        ys = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, delta - 1)
        cols = []
        prev = np.zeros(len(ys), dtype=np.int64)
        for j, c in enumerate(rhs_bits):
            cols.append(c - prev - 2 * (big - ys[:, j]))
            prev = ys[:, j]
        cols.append(top - prev)
        s = np.stack(cols, axis=1)
        s = s[np.all(s >= 0, axis=1)]
        weights = np.array([1 << j for j in range(delta)], dtype=np.int64)
        sums_ok = bool(np.all(s @ weights == target))
        distinct = len({tuple(r) for r in s.tolist()})
        ok = sums_ok and distinct == len(s) == _compositions(target, delta)
    _CARRY_CACHE[key] = ok
    return ok


def certify_carries(compressed: IlpInstance, binary: IlpInstance, delta: int) -> Certificate:
    """Check the bit-row layout of the binary stage and every row's carry set."""
    k, ell = compressed.k, compressed.ell
    per_row = 3 * delta - 2
    aux = 3 * (delta - 1)
    detail = {"rows_checked": 0}
    if binary.k != k * per_row or binary.ell != ell + aux * k:
        return Certificate("binary", False, {"shape": "unexpected binary-stage shape"})
    brows = binary.a.rows
    arr = np.array(brows, dtype=np.int64)
    aux_part = arr[:, ell:]

    def aux_entries(i):
        nz = np.nonzero(aux_part[i])[0]
        return {int(c) + ell: int(aux_part[i, c]) for c in nz}

    for r in range(k):
        base = r * per_row
        acol = ell + aux * r
        big = None
        rhs_bits = []
        recomposed = [0] * ell
        for j in range(delta):
            row = brows[base + j]
            for i in range(ell):
                recomposed[i] += row[i] << j
            want = {}
            if j > 0:
                want[acol + 3 * (j - 1)] = 1
            if j < delta - 1:
                want[acol + 3 * j + 1] = 1
                want[acol + 3 * j + 2] = 1
            if aux_entries(base + j) != want:
                return Certificate("binary", False, {"row": r, "bit": j, "problem": "carry columns"})
        for t in range(delta - 1):
            for kind in (1, 2):
                row = brows[base + delta + 2 * t + (kind - 1)]
                if any(row[:ell]):
                    return Certificate("binary", False, {"row": r, "problem": "x-part in a complement row"})
                if aux_entries(base + delta + 2 * t + (kind - 1)) != {acol + 3 * t: 1, acol + 3 * t + kind: 1}:
                    return Certificate("binary", False, {"row": r, "problem": "complement row"})
                val = binary.b[base + delta + 2 * t + (kind - 1)]
                if big is None:
                    big = val
                elif val != big:
                    return Certificate("binary", False, {"row": r, "problem": "unequal complement targets"})
        if tuple(recomposed) != compressed.a.rows[r]:
            return Certificate("binary", False, {"row": r, "problem": "bits do not recompose the row"})
        touching = np.nonzero(arr[:, acol:acol + aux].any(axis=1))[0]
        if aux and (touching.min() < base or touching.max() >= base + per_row):
                return Certificate("binary", False, {"row": r, "problem": "carry column shared across rows"})
        rhs_bits = tuple(binary.b[base + j] for j in range(delta - 1))
        top = binary.b[base + delta - 1]
        if not _carry_set_ok(rhs_bits, top, big or 0, compressed.b[r]):
            return Certificate("binary", False, {"row": r, "problem": "carry set differs from binary expansions"})
        detail["rows_checked"] += 1
    return Certificate("binary", True, detail)


def certify_targets(binary: IlpInstance, pm1: IlpInstance, s: int) -> Certificate:
    """Check a.x - c.y = 0 rows against binary rows and the unique z/y block solution."""
    k, ell = binary.k, binary.ell
    if pm1.k != k + s + 1 or pm1.ell != ell + 1 + s:
        return Certificate("pm1-targets", False, {"shape": "unexpected target-stage shape"})
    rows = pm1.a.rows
    block = [r[ell:] for r in rows[k:]]
    if any(any(r[:ell]) for r in rows[k:]):
        return Certificate("pm1-targets", False, {"problem": "x-part inside the z/y block"})
    # forward substitution on the square block; it must be lower triangular
    values = []
    for i, r in enumerate(block):
        if any(r[i + 1:]) or r[i] == 0:
            return Certificate("pm1-targets", False, {"problem": "z/y block is not triangular"})
        acc = pm1.b[k + i] - sum(c * v for c, v in zip(r, values))
        if acc % r[i]:
            return Certificate("pm1-targets", False, {"problem": "non-integral z/y value"})
        values.append(acc // r[i])
    if values[0] != 1 or values[1:] != [1 << i for i in range(s)]:
        return Certificate("pm1-targets", False, {"problem": "unexpected z/y values", "values": values})
    for r in range(k):
        row = rows[r]
        if row[:ell] != binary.a.rows[r] or pm1.b[r] != 0:
            return Certificate("pm1-targets", False, {"row": r, "problem": "x-part or rhs"})
        reads = -sum(c * v for c, v in zip(row[ell:], values))
        if reads != binary.b[r]:
            return Certificate("pm1-targets", False, {"row": r, "problem": "target digits"})
    return Certificate("pm1-targets", True, {"unique_block_solution": values})


# ------------------------------------------------------------ pipeline check

@dataclass
class PipelineCheck:
    satisfiable: bool
    verdicts: dict  # stage -> bool
    routes: dict  # stage -> how the verdict was obtained
    certificates: list
    direct: dict  # stage -> bool, only for instances small enough
    witnesses_ok: dict  # stage -> bool, satisfiable formulas only
    pullback_ok: Optional[bool]
    shapes: dict

    @property
    def agrees(self) -> bool:
        stages_ok = all(v == self.satisfiable for v in self.verdicts.values())
        direct_ok = all(v == self.satisfiable for v in self.direct.values() if v is not None)
        witness_ok = all(self.witnesses_ok.values())
        return stages_ok and direct_ok and witness_ok and self.pullback_ok is not False

    def to_json(self) -> dict:
        return {
            "satisfiable": self.satisfiable,
            "verdicts": self.verdicts,
            "routes": self.routes,
            "certificates": [c.to_json() for c in self.certificates],
            "direct": self.direct,
            "witnesses_ok": self.witnesses_ok,
            "pullback_ok": self.pullback_ok,
            "shapes": self.shapes,
            "agrees": self.agrees,
        }


def check_pipeline(phi: CnfFormula, d: int = 4, direct_limit: int = 100, time_limit: float = 60.0,
                   direct_time_limit: float = 20.0, run: Optional[PipelineRun] = None) -> PipelineCheck:
    """Decide every stage of the pipeline for phi and compare with brute force."""
    run = run or run_pipeline(phi, d)
    model = brute_force_sat(phi)
    sat = model is not None
    verdicts, routes, direct, wit = {}, {}, {}, {}
    certs = []

    phi34 = run.sat34.formula
    verdicts["34sat"] = cpsat_sat(phi34, time_limit) is not None
    routes["34sat"] = "cp-sat"

    ilp = run.instances["ilp"]
    rep = cpsat_solve(ilp, time_limit)
    verdicts["ilp"] = rep.feasible
    routes["ilp"] = "cp-sat"
    pullback_ok = None
    if rep.feasible:
        pullback_ok = phi.evaluate(run.pull_back(rep.witness.x))

    prev = "ilp"
    chain = [
        ("compressed", lambda: certify_compression(ilp, run.instances["compressed"], run.detecting)),
        ("binary", lambda: certify_carries(run.instances["compressed"], run.instances["binary"], run.delta)),
        ("pm1-targets", lambda: certify_targets(run.instances["binary"], run.instances["pm1-targets"],
                                                run.target_bits)),
    ]
    for stage, make in chain:
        if stage not in run.instances:
            continue
        cert = make()
        certs.append(cert)
        if cert.ok:
            verdicts[stage] = verdicts[prev]
            routes[stage] = f"certified equivalent to {prev}"
        else:
            verdicts[stage] = None
            routes[stage] = "certificate failed"
        prev = stage

    if ilp.k < direct_limit:
        for stage, inst in run.instances.items():
            try:
                direct[stage] = cpsat_solve(inst, direct_time_limit).feasible
            except BudgetExceeded:
                direct[stage] = None  # undecided in time; the certified chain still stands

    if sat:
        wits = run.witnesses(model)
        wit["34sat"] = phi34.evaluate(wits["34sat"])
        for stage, inst in run.instances.items():
            wit[stage] = inst.is_feasible(wits[stage])
    shapes = {stage: list(inst.a.shape) for stage, inst in run.instances.items()}
    return PipelineCheck(sat, verdicts, routes, certs, direct, wit, pullback_ok, shapes)

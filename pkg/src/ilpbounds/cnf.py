"""CNF formulas, DIMACS I/O, a brute-force satisfiability check, and the
rewrite into (3,4)-form: every clause has exactly three distinct variables and
every variable occurs in at most four clauses.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple  # tuple of tuples of non-zero ints, DIMACS sign convention

    def __post_init__(self):
        clauses = tuple(tuple(int(l) for l in c) for c in self.clauses)
        for c in clauses:
            for lit in c:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ValueError(f"literal {lit} out of range for {self.num_vars} variables")
        object.__setattr__(self, "clauses", clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> dict:
        """variable -> number of clauses containing it (either sign)."""
        occ = {v: 0 for v in range(1, self.num_vars + 1)}
        for c in self.clauses:
            for v in {abs(l) for l in c}:
                occ[v] += 1
        return occ

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        """assignment[v-1] is the value of variable v."""
        return all(any((lit > 0) == bool(assignment[abs(lit) - 1]) for lit in c) for c in self.clauses)


def validate_34(phi: CnfFormula, literal_cap: Optional[int] = None) -> list:
    """Problems that keep phi from being in (3,4)-form (empty list when valid)."""
    problems = []
    for idx, c in enumerate(phi.clauses):
        if len(c) != 3 or len({abs(l) for l in c}) != 3:
            problems.append(f"clause {idx} does not use exactly 3 distinct variables")
    pos = [0] * (phi.num_vars + 1)
    neg = [0] * (phi.num_vars + 1)
    for c in phi.clauses:
        for lit in c:
            (pos if lit > 0 else neg)[abs(lit)] += 1
    for v, n in phi.occurrences().items():
        if n > 4:
            problems.append(f"variable {v} occurs in {n} clauses")
        if literal_cap is not None and max(pos[v], neg[v]) > literal_cap:
            problems.append(f"a literal of variable {v} occurs more than {literal_cap} times")
    return problems


def is_34_form(phi: CnfFormula) -> bool:
    return not validate_34(phi)


def parse_dimacs(text) -> CnfFormula:
    """Tolerates comments, blank lines, clauses spanning lines and a trailing '%'."""
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    declared_vars = None
    clauses, current = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) < 4 or parts[1] != "cnf":
                raise ValueError(f"bad problem line: {line}")
            declared_vars = int(parts[2])
            continue
        if line.startswith("%"):
            break
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if current:
        clauses.append(tuple(current))
    used = max((abs(l) for c in clauses for l in c), default=0)
    n = declared_vars if declared_vars is not None else used
    if used > n:
        raise ValueError(f"literal {used} exceeds declared variable count {n}")
    return CnfFormula(n, tuple(clauses))


def to_dimacs(phi: CnfFormula) -> str:
    lines = [f"p cnf {phi.num_vars} {phi.num_clauses}"]
    lines += [" ".join(str(l) for l in c) + " 0" for c in phi.clauses]
    return "\n".join(lines) + "\n"


def brute_force_sat(phi: CnfFormula) -> Optional[tuple]:
    """First satisfying assignment in binary counting order, or None."""
    if phi.num_vars > 24:
        raise ValueError("brute force is limited to 24 variables")
    for bits in itertools.product((False, True), repeat=phi.num_vars):
        if phi.evaluate(bits):
            return bits
    return None


def dpll_sat(phi: CnfFormula) -> Optional[tuple]:
    """Plain DPLL with unit propagation; used for formulas too big to enumerate."""
    clauses = [frozenset(c) for c in phi.clauses]

    def simplify(cls, lit):
        out = []
        for c in cls:
            if lit in c:
                continue
            if -lit in c:
                c = c - {-lit}
                if not c:
                    return None
            out.append(c)
        return out

    def solve(cls, assign):
        while True:
            unit = next((c for c in cls if len(c) == 1), None)
            if unit is None:
                break
            lit = next(iter(unit))
            assign[abs(lit)] = lit > 0
            cls = simplify(cls, lit)
            if cls is None:
                return None
        if not cls:
            return assign
        counts = {}
        for c in cls:
            for l in c:
                counts[abs(l)] = counts.get(abs(l), 0) + 1
        var = max(sorted(counts), key=counts.get)
        for lit in (var, -var):
            nxt = simplify(cls, lit)
            if nxt is not None:
                res = solve(nxt, {**assign, var: lit > 0})
                if res is not None:
                    return res
        return None

    if any(len(c) == 0 for c in clauses):
        return None
    res = solve(clauses, {})
    if res is None:
        return None
    return tuple(res.get(v, False) for v in range(1, phi.num_vars + 1))


# ----------------------------------------------------------- (3,4) rewriting

# A minimally unsatisfiable formula in (3,4)-form where every literal occurs at
# most three times: a depth-5 decision tree whose leaves each get the clause
# made of the last three literals on the path to the leaf.
_UNSAT_CORE = (
    (1, 2, 4), (2, -4, 5), (-4, -5, 6), (-4, -5, -6),
    (1, -2, 7), (-2, -7, 8), (-7, -8, 9), (-7, -8, -9),
    (-1, 3, 10), (3, -10, 11), (-10, -11, 12), (-10, -11, -12),
    (-1, -3, 13), (-3, -13, 14), (-13, -14, 15), (-13, -14, -15),
)
_CORE_VARS = 15


@lru_cache(maxsize=None)
def _core_model_without_last():
    """An assignment satisfying every core clause except the last one."""
    rest = CnfFormula(_CORE_VARS, _UNSAT_CORE[:-1])
    model = brute_force_sat(rest)
    assert model is not None
    return model


@dataclass(frozen=True)
class Sat34Result:
    formula: CnfFormula
    origin: tuple  # origin[v-1] for output var v: ("var", i) | ("copy", i, j) | ("core", j) | ("false", j)

    def pull_back(self, assignment: Sequence[bool], num_vars: int) -> tuple:
        """Values of the original variables read off an output assignment."""
        out = [False] * num_vars
        for v, tag in enumerate(self.origin):
            if tag[0] in ("var", "copy"):
                out[tag[1] - 1] = bool(assignment[v])
        return tuple(out)


class _Builder:
    def __init__(self):
        self.clauses = []
        self.origin = []

    def new_var(self, tag) -> int:
        self.origin.append(tag)
        return len(self.origin)


class _FalseSupply:
    """Hands out variables that every satisfying assignment sets to false.

    The first one comes from the unsatisfiable core with one literal swapped
    for it; more are derived with clauses (-g, f, h), (-g, f, -h) and then
    (-g', f_a, f_b), each producing a fresh forced-false variable that can be
    used positively three times.
    """

    def __init__(self, builder: _Builder):
        self.b = builder
        self.slots = {}  # forced-false var -> remaining positive uses
        self.started = False

    def _start(self):
        self.started = True
        base = self.b.new_var(("false", 0))
        offset = len(self.b.origin)
        for j in range(_CORE_VARS):
            self.b.new_var(("core", j + 1))
        for c in _UNSAT_CORE[:-1]:
            self.b.clauses.append(tuple((abs(l) + offset) * (1 if l > 0 else -1) for l in c))
        last = _UNSAT_CORE[-1]
        self.b.clauses.append(tuple((abs(l) + offset) * (1 if l > 0 else -1) for l in last[:2]) + (-base,))
        helper = self.b.new_var(("false", 1))
        second = self.b.new_var(("false", 2))
        self.b.clauses.append((-second, base, helper))
        self.b.clauses.append((-second, base, -helper))
        self.slots = {base: 1, second: 2}

    def _derive(self):
        # pair the roomiest variable with the most used-up one, so a variable
        # with at least two free uses always survives
        live = sorted((v for v, s in self.slots.items() if s > 0), key=lambda v: (self.slots[v], v))
        a, b = live[-1], live[0]
        g = self.b.new_var(("false", len(self.b.origin)))
        self.b.clauses.append((-g, b, a))
        self.slots[a] -= 1
        self.slots[b] -= 1
        self.slots[g] = 3

    def take(self, count: int) -> list:
        if not self.started:
            self._start()
        while sum(1 for s in self.slots.values() if s > 0) < count + 2:
            self._derive()
        chosen = sorted((v for v, s in self.slots.items() if s > 0), key=lambda v: (self.slots[v], v))[:count]
        for v in chosen:
            self.slots[v] -= 1
        return chosen


def _normalize_clauses(phi: CnfFormula) -> list:
    """Deduplicate literals and drop tautologies."""
    out = []
    for c in phi.clauses:
        if len(c) > 3:
            raise ValueError("clauses may have at most 3 literals")
        lits = list(dict.fromkeys(c))
        if any(-l in lits for l in lits):
            continue
        out.append(lits)
    return out


def sat_to_34sat(phi: CnfFormula) -> Sat34Result:
    """Equisatisfiable (3,4)-form formula of linear size.

    Variables with more than four occurrences, or a literal occurring more
    than three times, are split into copies carrying at most two original
    occurrences each, tied together by an implication cycle. Clauses shorter
    than three literals are padded with forced-false variables.
    """
    b = _Builder()
    for v in range(1, phi.num_vars + 1):
        b.new_var(("var", v))
    clauses = _normalize_clauses(phi)

    n_now = phi.num_vars
    places = {v: [] for v in range(1, n_now + 1)}
    for ci, c in enumerate(clauses):
        for pos, lit in enumerate(c):
            places[abs(lit)].append((ci, pos))

    rename = {}
    cycles = []
    for v in range(1, n_now + 1):
        occ = places[v]
        pos = sum(1 for ci, p in occ if clauses[ci][p] > 0)
        if len(occ) <= 4 and pos <= 3 and len(occ) - pos <= 3:
            continue
        copies = [v]
        for j in range(1, (len(occ) + 1) // 2):
            copies.append(b.new_var(("copy", v, j)))
        for idx, (ci, p) in enumerate(occ):
            rename[(ci, p)] = copies[idx // 2]
        for j in range(len(copies)):
            cycles.append([-copies[j], copies[(j + 1) % len(copies)]])
    renamed = []
    for ci, c in enumerate(clauses):
        renamed.append([rename.get((ci, p), abs(l)) * (1 if l > 0 else -1) for p, l in enumerate(c)])

    supply = _FalseSupply(b)
    for c in renamed + cycles:
        if len(c) < 3:
            c = c + supply.take(3 - len(c))
        b.clauses.append(tuple(c))
    out = CnfFormula(len(b.origin), tuple(b.clauses))
    return Sat34Result(out, tuple(b.origin))


def lift_assignment(result: Sat34Result, assignment: Sequence[bool]) -> tuple:
    """Extend a satisfying assignment of the input formula to the rewritten one."""
    core = _core_model_without_last()
    values = []
    for tag in result.origin:
        if tag[0] in ("var", "copy"):
            values.append(bool(assignment[tag[1] - 1]))
        elif tag[0] == "core":
            values.append(bool(core[tag[1] - 1]))
        else:
            values.append(False)
    return tuple(values)

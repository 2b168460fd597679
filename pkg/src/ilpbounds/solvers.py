"""Exact feasibility deciders, an enumerator, a Graver-step optimizer and
support minimization for {A x = b, l <= x <= u} over the integers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .core import BudgetExceeded, IlpInstance, Solution, support
from .detecting import papadimitriou_bound
from .graver import GraverBasis, graver_basis

DEFAULT_BOX_BUDGET = 2_000_000
DEFAULT_DP_BUDGET = 2_000_000
DEFAULT_BFS_BUDGET = 2_000_000
PROPAGATION_VISITS = 100_000

FEASIBLE = "feasible"
INFEASIBLE = "infeasible"


def _ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class SolveReport:
    verdict: str
    witness: Optional[Solution]
    method: str
    explored_states: int
    bounds_used: dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.verdict == FEASIBLE

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "witness": None if self.witness is None else list(self.witness.x),
            "method": self.method,
            "explored_states": self.explored_states,
            "bounds_used": self.bounds_used,
        }


def _report(inst: IlpInstance, x, method: str, explored: int, bounds: dict) -> SolveReport:
    if x is None:
        return SolveReport(INFEASIBLE, None, method, explored, bounds)
    if not inst.is_feasible(x):
        raise AssertionError(f"{method} produced a witness that does not satisfy the instance")
    return SolveReport(FEASIBLE, Solution(x), method, explored, bounds)


def papadimitriou_box(inst: IlpInstance) -> int:
    """l * ((max|A| + max|b|) * k)^(2k+1)."""
    max_b = max((abs(v) for v in inst.b), default=0)
    return papadimitriou_bound(inst.k, inst.ell, inst.a.max_abs, max_b)


def natural_upper_bounds(inst: IlpInstance) -> list:
    """Upper bounds implied by rows whose coefficients all share one sign.

    Combined with the instance's own upper bounds; None where no bound follows.
    """
    lower = inst.lower_bounds
    out = list(inst.upper_bounds)
    for r, bi in zip(inst.a.rows, inst.b):
        if all(v >= 0 for v in r):
            sign = 1
        elif all(v <= 0 for v in r):
            sign = -1
        else:
            continue
        slack = sign * bi - sum(sign * v * lo for v, lo in zip(r, lower))
        for j, v in enumerate(r):
            if v:
                # a negative slack makes the row infeasible: signal it with an empty range
                cap = lower[j] + slack // (sign * v) if slack >= 0 else lower[j] - 1
                out[j] = cap if out[j] is None else min(out[j], cap)
    return out


# ------------------------------------------------------------- box search

class _BoxSearch:
    """Lexicographic depth-first search over lo <= x <= hi with interval pruning."""

    def __init__(self, inst: IlpInstance, lo: Sequence[int], hi: Sequence[int], budget: int):
        self.a = inst.a
        self.b = inst.b
        self.n = inst.ell
        self.k = inst.k
        self.lo = list(lo)
        self.hi = list(hi)
        self.budget = budget
        self.explored = 0
        rows = self.a.rows
        self.col = [[(i, rows[i][j]) for i in range(self.k) if rows[i][j]] for j in range(self.n)]
        smin = [[0] * self.k for _ in range(self.n + 1)]
        smax = [[0] * self.k for _ in range(self.n + 1)]
        for j in range(self.n - 1, -1, -1):
            smin[j] = list(smin[j + 1])
            smax[j] = list(smax[j + 1])
            for i, v in self.col[j]:
                p, q = v * self.lo[j], v * self.hi[j]
                smin[j][i] += min(p, q)
                smax[j][i] += max(p, q)
        self.smin, self.smax = smin, smax

    def _tick(self):
        self.explored += 1
        if self.explored > self.budget:
            raise BudgetExceeded("box search exceeded its node budget", budget=self.budget)

    def solutions(self):
        """Yield solutions in lexicographic order."""
        if any(l > h for l, h in zip(self.lo, self.hi)):
            return
        res = list(self.b)
        if any(not self.smin[0][i] <= res[i] <= self.smax[0][i] for i in range(self.k)):
            self._tick()
            return
        x = [0] * self.n
        yield from self._go(0, res, x)

    def _go(self, j, res, x):
        self._tick()
        if j == self.n:
            yield tuple(x)
            return
        lo, hi = self.lo[j], self.hi[j]
        smin, smax = self.smin[j + 1], self.smax[j + 1]
        for i, v in self.col[j]:
            # res_i - v t must stay within [smin_i, smax_i]
            if v > 0:
                lo = max(lo, _ceil_div(res[i] - smax[i], v))
                hi = min(hi, (res[i] - smin[i]) // v)
            else:
                lo = max(lo, _ceil_div(res[i] - smin[i], v))
                hi = min(hi, (res[i] - smax[i]) // v)
            if lo > hi:
                return
        col = self.col[j]
        for i, v in col:
            res[i] -= v * lo
        for t in range(lo, hi + 1):
            x[j] = t
            yield from self._go(j + 1, res, x)
            for i, v in col:
                res[i] -= v
        for i, v in col:
            res[i] += v * (hi + 1)
        x[j] = 0


def _box_limits(inst: IlpInstance, box: Sequence[int]):
    if len(box) != inst.ell:
        raise ValueError(f"box has {len(box)} entries, expected {inst.ell}")
    lo = list(inst.lower_bounds)
    hi = []
    for j, cap in enumerate(box):
        u = inst.upper_at(j)
        hi.append(int(cap) if u is None else min(int(cap), u))
    return lo, hi


def solve_box(inst: IlpInstance, box: Sequence[int], budget: int = DEFAULT_BOX_BUDGET) -> SolveReport:
    """Exhaustive search of l <= x <= min(u, box); the witness is lexicographically smallest."""
    lo, hi = _box_limits(inst, box)
    search = _BoxSearch(inst, lo, hi, budget)
    x = next(search.solutions(), None)
    return _report(inst, x, "box", search.explored, {"box": list(hi)})


def enumerate_solutions(inst: IlpInstance, box: Sequence[int], budget: int = DEFAULT_BOX_BUDGET,
                        limit: Optional[int] = None) -> list:
    """All solutions with l <= x <= min(u, box), in lexicographic order."""
    lo, hi = _box_limits(inst, box)
    out = []
    for x in _BoxSearch(inst, lo, hi, budget).solutions():
        out.append(Solution(x))
        if limit is not None and len(out) >= limit:
            break
    return out


# ------------------------------------------------------ dynamic programming

def solve_papadimitriou(inst: IlpInstance, budget: int = DEFAULT_DP_BUDGET) -> SolveReport:
    """Reachability of b through partial sums A (x_1..x_j, 0..0), 0 <= x_j <= B.

    Before the sweep, bound propagation from [0, B] tightens each variable to
    a cap; no solution inside the box is lost. A partial sum s after column
    j is kept only if b - s is still reachable by the remaining columns
    within their caps, the tightest safe range per coordinate.
    """
    if not inst.is_standard_form():
        raise ValueError("the dynamic program expects a standard-form instance")
    big = papadimitriou_box(inst)
    k, n = inst.k, inst.ell
    caps_lo, caps = [0] * n, [big] * n
    bounds = {"B": big}
    if not _Propagator(inst).run(caps_lo, caps, range(k), max_visits=PROPAGATION_VISITS):
        bounds["caps"] = None
        return _report(inst, None, "dp", 1, bounds)
    bounds["caps"] = list(caps)
    rows = inst.a.rows
    col = [[(i, rows[i][j]) for i in range(k) if rows[i][j]] for j in range(n)]
    rmin = [[0] * k for _ in range(n + 1)]
    rmax = [[0] * k for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        rmin[j] = list(rmin[j + 1])
        rmax[j] = list(rmax[j + 1])
        for i, v in col[j]:
            if v > 0:
                rmin[j][i] += v * caps_lo[j]
                rmax[j][i] += v * caps[j]
            else:
                rmin[j][i] += v * caps[j]
                rmax[j][i] += v * caps_lo[j]
    b = inst.b
    start = (0,) * k
    explored = 1
    layers = [{start: None}]
    for j in range(n):
        nxt = {}
        lo_r, hi_r = rmin[j + 1], rmax[j + 1]
        for s in layers[-1]:
            lo, hi = caps_lo[j], caps[j]
            for i, v in col[j]:
                rest = b[i] - s[i]
                if v > 0:
                    lo = max(lo, _ceil_div(rest - hi_r[i], v))
                    hi = min(hi, (rest - lo_r[i]) // v)
                else:
                    lo = max(lo, _ceil_div(rest - lo_r[i], v))
                    hi = min(hi, (rest - hi_r[i]) // v)
            if not col[j]:
                hi = lo
            for t in range(lo, hi + 1):
                ns = list(s)
                for i, v in col[j]:
                    ns[i] += v * t
                ns = tuple(ns)
                if ns not in nxt:
                    nxt[ns] = (s, t)
                    explored += 1
                    if explored > budget:
                        raise BudgetExceeded("dynamic program exceeded its state budget",
                                             budget=budget, bound=big)
        layers.append(nxt)
        if not nxt:
            return _report(inst, None, "dp", explored, bounds)
    if b not in layers[-1]:
        return _report(inst, None, "dp", explored, bounds)
    x = [0] * n
    s = b
    for j in range(n, 0, -1):
        prev, t = layers[j][s]
        x[j - 1] = t
        s = prev
    return _report(inst, tuple(x), "dp", explored, bounds)


# ------------------------------------------------------------ band search

def _in_band(y, b, r) -> bool:
    """Is y within l_inf distance r of the segment {t b : 0 <= t <= 1}? Exact."""
    lo_n, lo_d, hi_n, hi_d = 0, 1, 1, 1
    for yi, bi in zip(y, b):
        if bi == 0:
            if abs(yi) > r:
                return False
            continue
        if bi > 0:
            ln, un, den = yi - r, yi + r, bi
        else:
            ln, un, den = -yi - r, -yi + r, -bi
        if ln * lo_d > lo_n * den:
            lo_n, lo_d = ln, den
        if un * hi_d < hi_n * den:
            hi_n, hi_d = un, den
        if lo_n * hi_d > hi_n * lo_d:
            return False
    return True


def solve_steinitz(inst: IlpInstance, radius: Optional[int] = None,
                   budget: int = DEFAULT_BFS_BUDGET) -> SolveReport:
    """Breadth-first reachability of b from 0 by adding columns, staying
    within l_inf distance ``radius`` of the segment [0, b].

    The default radius is k max|A|. An infeasible answer is only returned
    when the search saturated (no point was cut off by the band) or the
    radius reached l * B * max|A|, beyond which every solution in the
    Papadimitriou box fits; otherwise the radius doubles.
    """
    if not inst.is_standard_form():
        raise ValueError("band search expects a standard-form instance")
    k, n = inst.k, inst.ell
    b = inst.b
    rows = inst.a.rows
    delta = inst.a.max_abs
    limit = max(1, n * papadimitriou_box(inst) * delta)
    r = max(1, k * delta) if radius is None else max(0, int(radius))
    steps, seen_cols = [], set()
    for j in range(n):
        c = tuple(rows[i][j] for i in range(k))
        if any(c) and c not in seen_cols:
            seen_cols.add(c)
            steps.append((j, c))
    upper_rows = [i for i in range(k) if all(v >= 0 for v in rows[i])]
    lower_rows = [i for i in range(k) if all(v <= 0 for v in rows[i])]
    bounds = {"radius": r, "radii": [], "limit": limit}
    zero = (0,) * k
    explored = 0
    if any(not any(rows[i]) and b[i] != 0 for i in range(k)):
        bounds["radii"].append(r)
        return _report(inst, None, "steinitz", 1, bounds)
    while True:
        bounds["radii"].append(r)
        bounds["radius"] = r
        parent = {zero: None}
        frontier = [zero]
        clipped = False
        found = zero == b
        while frontier and not found:
            nxt = []
            for y in frontier:
                for j, c in steps:
                    z = tuple(p + q for p, q in zip(y, c))
                    if z in parent:
                        continue
                    if any(z[i] > b[i] for i in upper_rows) or any(z[i] < b[i] for i in lower_rows):
                        continue
                    if not _in_band(z, b, r):
                        clipped = True
                        continue
                    parent[z] = (y, j)
                    explored += 1
                    if explored > budget:
                        raise BudgetExceeded("band search exceeded its node budget", budget=budget, bound=r)
                    if z == b:
                        found = True
                        break
                    nxt.append(z)
                if found:
                    break
            frontier = nxt
        if found:
            x = [0] * n
            y = b
            while parent[y] is not None:
                y, j = parent[y]
                x[j] += 1
            return _report(inst, tuple(x), "steinitz", explored, bounds)
        if not clipped or r >= limit:
            bounds["saturated"] = not clipped
            return _report(inst, None, "steinitz", explored, bounds)
        r = min(max(1, 2 * r), limit)


# ------------------------------------------------------ propagation search

class _Propagator:
    """Interval bound propagation over the rows of an instance."""

    def __init__(self, inst: IlpInstance):
        self.rows = [[(j, v) for j, v in enumerate(r) if v] for r in inst.a.rows]
        self.rhs = inst.b
        self.col_rows = [[] for _ in range(inst.ell)]
        for i, r in enumerate(self.rows):
            for j, _ in r:
                self.col_rows[j].append(i)

    def run(self, lo: list, hi: list, dirty, max_visits: Optional[int] = None) -> bool:
        """Tighten lo/hi in place; False when some row cannot be met.

        Stopping after ``max_visits`` row visits leaves valid (looser) bounds.
        """
        rows, rhs, col_rows = self.rows, self.rhs, self.col_rows
        queue = list(dirty)
        queued = set(queue)
        visits = 0
        while queue:
            visits += 1
            if max_visits is not None and visits > max_visits:
                return True
            i = queue.pop()
            queued.discard(i)
            mn = mx = 0
            for j, v in rows[i]:
                if v > 0:
                    mn += v * lo[j]
                    mx += v * hi[j]
                else:
                    mn += v * hi[j]
                    mx += v * lo[j]
            c = rhs[i]
            if mn > c or mx < c:
                return False
            for j, v in rows[i]:
                if v > 0:
                    cmin, cmax = v * lo[j], v * hi[j]
                else:
                    cmin, cmax = v * hi[j], v * lo[j]
                low = c - (mx - cmax)
                up = c - (mn - cmin)
                if v > 0:
                    nl, nh = max(lo[j], _ceil_div(low, v)), min(hi[j], up // v)
                else:
                    nl, nh = max(lo[j], _ceil_div(up, v)), min(hi[j], low // v)
                if nl > nh:
                    return False
                if nl != lo[j] or nh != hi[j]:
                    lo[j], hi[j] = nl, nh
                    for i2 in col_rows[j]:
                        if i2 not in queued:
                            queued.add(i2)
                            queue.append(i2)
        return True


def solve_propagate(inst: IlpInstance, budget: int = DEFAULT_BOX_BUDGET) -> SolveReport:
    """Bound propagation with branching on the smallest domain.

    Needs every variable bounded, either explicitly or through a row with
    coefficients of one sign. Suited to larger sparse instances where the
    lexicographic box search is too slow.
    """
    hi = natural_upper_bounds(inst)
    if any(h is None for h in hi):
        raise ValueError("every variable needs an upper bound for propagation")
    lo = list(inst.lower_bounds)
    prop = _Propagator(inst)
    explored = [0]

    def go(lo, hi, dirty):
        explored[0] += 1
        if explored[0] > budget:
            raise BudgetExceeded("propagation search exceeded its node budget", budget=budget)
        if not prop.run(lo, hi, dirty):
            return None
        best = None
        for j in range(len(lo)):
            if lo[j] < hi[j] and (best is None or hi[j] - lo[j] < hi[best] - lo[best]):
                best = j
        if best is None:
            return tuple(lo)
        for t in range(lo[best], hi[best] + 1):
            l2, h2 = list(lo), list(hi)
            l2[best] = h2[best] = t
            found = go(l2, h2, prop.col_rows[best])
            if found is not None:
                return found
        return None

    x = go(lo, list(hi), range(inst.k))
    return _report(inst, x, "propagate", explored[0], {"upper": hi})


# ----------------------------------------------------------- optimization

@dataclass(frozen=True)
class OptimizeResult:
    solution: Solution
    value: int
    iterations: int
    trace: tuple  # (lambda, g, gain) per step
    basis_size: int

    def to_json(self) -> dict:
        return {
            "solution": list(self.solution.x),
            "value": self.value,
            "iterations": self.iterations,
            "trace": [{"lambda": lam, "g": list(g), "gain": gain} for lam, g, gain in self.trace],
            "basis_size": self.basis_size,
        }


def solve_graver_augment(inst: IlpInstance, x0, lambda_max: Optional[int] = None,
                         basis: Optional[GraverBasis] = None, max_iter: int = 100_000) -> OptimizeResult:
    """Maximize w.x by repeated best steps x + lambda g over Graver vectors g.

    Only Graver vectors fitting in the box u - l can ever give a feasible
    step, so the basis is enumerated inside that box.
    """
    x = tuple(x0.x if isinstance(x0, Solution) else x0)
    if not inst.is_bounded():
        raise ValueError("Graver augmentation needs finite upper bounds")
    if not inst.is_feasible(x):
        raise ValueError("starting point is not feasible")
    lower, upper = inst.lower_bounds, inst.upper_bounds
    widths = tuple(u - l for l, u in zip(lower, upper))
    if basis is None:
        basis = graver_basis(inst.a, box=widths)
    w = inst.objective or (0,) * inst.ell
    if lambda_max is None:
        lambda_max = max(max(widths, default=1), 1)
    gains = [sum(p * q for p, q in zip(w, g)) for g in basis.vectors]
    trace = []
    for _ in range(max_iter):
        best = None
        for g, wg in zip(basis.vectors, gains):
            if wg <= 0:
                continue
            for lam in range(1, lambda_max + 1):
                if any(not l <= xi + lam * gi <= u for xi, gi, l, u in zip(x, g, lower, upper)):
                    break
                gain = lam * wg
                if best is None or gain > best[0]:
                    best = (gain, lam, g)
        if best is None:
            break
        gain, lam, g = best
        x = tuple(xi + lam * gi for xi, gi in zip(x, g))
        trace.append((lam, g, gain))
    else:
        raise RuntimeError("augmentation did not converge within the iteration limit")
    assert inst.is_feasible(x)
    return OptimizeResult(Solution(x), inst.value(x), len(trace), tuple(trace), len(basis))


def optimize_box(inst: IlpInstance, budget: int = DEFAULT_BOX_BUDGET) -> Optional[Solution]:
    """Exhaustive optimum over a bounded instance (first in lex order among ties)."""
    if not inst.is_bounded():
        raise ValueError("exhaustive optimization needs finite upper bounds")
    best = None
    for sol in enumerate_solutions(inst, inst.upper_bounds, budget):
        if best is None or inst.value(sol.x) > inst.value(best.x):
            best = sol
    return best


# ---------------------------------------------------------------- support

def _lg_ceil(v: int) -> int:
    """ceil(log2 v) for v >= 1."""
    return (v - 1).bit_length()


def support_params(inst: IlpInstance, c_const: int = 2) -> dict:
    m = inst.k
    delta = inst.a.max_abs
    alpha = c_const * _lg_ceil(delta + 1)
    h = alpha * m
    return {"m": m, "delta": delta, "c": c_const, "alpha": alpha, "h": h, "threshold": 2 * h}


@dataclass(frozen=True)
class SupportReport:
    solution: Solution
    support_size: int
    bound_params: dict
    reduction_steps: int
    reduced_support_size: int

    @property
    def within_bound(self) -> bool:
        return self.support_size <= self.bound_params["threshold"]

    def to_json(self) -> dict:
        return {
            "solution": list(self.solution.x),
            "support_size": self.support_size,
            "bound_params": self.bound_params,
            "within_bound": self.within_bound,
            "reduction_steps": self.reduction_steps,
            "reduced_support_size": self.reduced_support_size,
        }


def _support_key(x):
    return (len(support(x)), tuple(x))


def support_reduce_step(inst: IlpInstance, x, h: int) -> Optional[Solution]:
    """One exchange step x -/+ 1_I' +/- 1_I'' for h-subsets I' != I'' of supp(x)
    with A 1_I' = A 1_I''.

    The first colliding pair in lexicographic subset order is used; of the
    two resulting solutions the one with smaller (support size, vector) is
    returned. None when no two subsets collide.
    """
    x = tuple(x.x if isinstance(x, Solution) else x)
    if not inst.is_standard_form():
        raise ValueError("support reduction expects a standard-form instance")
    if h < 1:
        raise ValueError("h must be positive")
    supp = support(x)
    if len(supp) < 2 * h:
        raise ValueError(f"support {len(supp)} is below 2h = {2 * h}")
    if not inst.is_feasible(x):
        raise ValueError("x is not feasible")
    cols = inst.a.columns()
    seen = {}
    for subset in itertools.combinations(supp, h):
        key = tuple(map(sum, zip(*(cols[j] for j in subset))))
        other = seen.get(key)
        if other is None:
            seen[key] = subset
            continue
        y1, y2 = list(x), list(x)
        for j in other:
            y1[j] -= 1
            y2[j] += 1
        for j in subset:
            y1[j] += 1
            y2[j] -= 1
        best = min(tuple(y1), tuple(y2), key=_support_key)
        assert inst.is_feasible(best)
        return Solution(best)
    return None


def reduce_support(inst: IlpInstance, x, h: int, max_steps: int = 1_000_000) -> tuple:
    """Iterate support_reduce_step while it applies; returns (solution, steps).

    Each step strictly decreases (support size, vector) lexicographically,
    which is asserted.
    """
    x = tuple(x.x if isinstance(x, Solution) else x)
    steps = 0
    while len(support(x)) >= 2 * h and steps < max_steps:
        y = support_reduce_step(inst, x, h)
        if y is None:
            break
        if not _support_key(y.x) < _support_key(x):
            raise AssertionError("support reduction failed to descend")
        x = y.x
        steps += 1
    return Solution(x), steps


def support_box(inst: IlpInstance) -> list:
    """Papadimitriou box tightened by bounds implied by one-signed rows."""
    big = papadimitriou_box(inst)
    return [big if u is None else min(u, big) for u in natural_upper_bounds(inst)]


def minimal_support(inst: IlpInstance, c_const: int = 2, budget: int = DEFAULT_BOX_BUDGET) -> SupportReport:
    """Smallest-support solution in the Papadimitriou box.

    Among supports of that size the lexicographically first index set wins,
    and within it the lexicographically smallest vector. A smallest support
    is also minimal under containment.
    """
    if not inst.is_standard_form():
        raise ValueError("support minimization expects a standard-form instance")
    box = support_box(inst)
    params = support_params(inst, c_const)
    spent = 0
    found = None
    # supports by size, then in lexicographic order of index sets
    for subset in itertools.chain.from_iterable(
            itertools.combinations(range(inst.ell), size) for size in range(inst.ell + 1)):
        chosen = set(subset)
        lo = [1 if j in chosen else 0 for j in range(inst.ell)]
        hi = [box[j] if j in chosen else 0 for j in range(inst.ell)]
        search = _BoxSearch(inst, lo, hi, budget - spent)
        found = next(search.solutions(), None)
        spent += search.explored
        if found is not None:
            break
    if found is None:
        raise ValueError("instance is infeasible within the Papadimitriou box")
    start = solve_box(inst, box, budget)
    reduced, steps = reduce_support(inst, start.witness.x, params["h"])
    return SupportReport(Solution(found), len(support(found)), params, steps, len(reduced.support))

"""Brute-force Graver bases and checks of the l1-norm bounds in terms of
dual treedepth.

Kernel vectors are enumerated by their free coordinates (after exact row
reduction) in ascending l1 order; a kernel vector is Graver exactly when no
previously accepted Graver vector lies conformally below it.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, lcm
from typing import Optional, Sequence

import numpy as np

from .core import DimensionError, IntMatrix, mat_vec, norm1, norm_inf
from .structure import DEFAULT_TD_LIMIT, block_components, dual_treedepth

DEFAULT_CANDIDATE_LIMIT = 5_000_000


class SearchSpaceTooLarge(RuntimeError):
    def __init__(self, message, bound=None, estimate=None):
        super().__init__(message)
        self.bound = bound
        self.estimate = estimate


def conformal_leq(a: Sequence[int], b: Sequence[int]) -> bool:
    if len(a) != len(b):
        raise DimensionError(f"length mismatch: {len(a)} vs {len(b)}")
    return all(x * y >= 0 and abs(x) <= abs(y) for x, y in zip(a, b))


@dataclass(frozen=True)
class GraverBasis:
    matrix: IntMatrix
    vectors: tuple  # sorted by (l1, lex)
    enumeration_bound: int
    box: Optional[tuple] = None

    @property
    def g1(self) -> int:
        return max((norm1(v) for v in self.vectors), default=0)

    @property
    def g_inf(self) -> int:
        return max((norm_inf(v) for v in self.vectors), default=0)

    def __len__(self):
        return len(self.vectors)

    def __iter__(self):
        return iter(self.vectors)

    def to_json(self) -> dict:
        return {
            "shape": list(self.matrix.shape),
            "vectors": [list(v) for v in self.vectors],
            "g1": self.g1,
            "g_inf": self.g_inf,
            "enumeration_bound": self.enumeration_bound,
            "box": None if self.box is None else list(self.box),
        }


def norm_bound(max_abs: int, td: int) -> int:
    """Graver l1-norm bound (2 max|A| + 1)^(2^td - 1) for dual treedepth td."""
    return (2 * max_abs + 1) ** (2 ** td - 1)


def _kernel_param(a: IntMatrix):
    """Free columns and an integer map: D * x_pivot = -N @ x_free on ker A."""
    rows = [[Fraction(x) for x in r] for r in a.rows]
    n = a.n_cols
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = rows[r][c]
        rows[r] = [x / inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    free = [c for c in range(n) if c not in pivots]
    denom = 1
    for i in range(len(pivots)):
        for c in free:
            denom = lcm(denom, rows[i][c].denominator)
    coeff = np.array([[int(rows[i][c] * denom) for c in free] for i in range(len(pivots))],
                     dtype=np.int64).reshape(len(pivots), len(free))
    return pivots, free, denom, coeff


def _ball_size(dim: int, radius: int) -> int:
    """Number of integer points with l1 norm <= radius in dimension dim."""
    # sum_j 2^j C(dim, j) C(radius, j)
    return sum(2 ** j * comb(dim, j) * comb(radius, j) for j in range(min(dim, radius) + 1))


def graver_basis(a: IntMatrix, l1_bound: Optional[int] = None, box: Optional[Sequence[int]] = None,
                 td_limit: int = DEFAULT_TD_LIMIT,
                 candidate_limit: int = DEFAULT_CANDIDATE_LIMIT) -> GraverBasis:
    """All conformally minimal non-zero kernel vectors with l1 norm <= bound.

    The default bound is norm_bound of the dual treedepth, which makes the result
    complete. With ``box`` only vectors with |g_i| <= box_i are produced;
    this is still exact for them, since anything conformally below such a
    vector also lies in the box.
    """
    n = a.n_cols
    if box is not None:
        box = tuple(int(x) for x in box)
        if len(box) != n or min(box, default=0) < 0:
            raise DimensionError("box must have one non-negative entry per column")
    if l1_bound is None:
        if box is not None:
            l1_bound = sum(box)
        else:
            td, _ = dual_treedepth(a, td_limit)
            l1_bound = norm_bound(a.max_abs, td)
    pivots, free, denom, coeff = _kernel_param(a)
    if box is not None:
        radius = [min(box[c], l1_bound) for c in free]
    else:
        radius = [l1_bound] * len(free)
    estimate = _ball_size(len(free), l1_bound)
    grid = 1
    for r in radius:
        grid *= 2 * r + 1
    estimate = min(estimate, grid)
    if estimate > candidate_limit:
        raise SearchSpaceTooLarge(
            f"about {estimate} candidates for l1 bound {l1_bound}", bound=l1_bound, estimate=estimate)
    if not free:
        return GraverBasis(a, (), l1_bound, box)

    big = max(abs(int(coeff.max(initial=0))), abs(int(coeff.min(initial=0))), 1)
    if big * l1_bound * len(free) >= 2 ** 62:
        raise SearchSpaceTooLarge("coefficients overflow the enumeration", bound=l1_bound, estimate=estimate)

    chunks = []
    first, rest = radius[0], radius[1:]
    rest_axes = [np.arange(-r, r + 1, dtype=np.int64) for r in rest]
    if rest_axes:
        rest_grid = np.stack(np.meshgrid(*rest_axes, indexing="ij"), axis=-1).reshape(-1, len(rest))
    else:
        rest_grid = np.zeros((1, 0), dtype=np.int64)
    rest_l1 = np.abs(rest_grid).sum(axis=1)
    for f0 in range(-first, first + 1):
        keep = rest_l1 + abs(f0) <= l1_bound
        if not keep.any():
            continue
        fr = np.concatenate([np.full((int(keep.sum()), 1), f0, dtype=np.int64), rest_grid[keep]], axis=1)
        num = -(fr @ coeff.T)  # denom * pivot values
        ok = np.all(num % denom == 0, axis=1)
        fr, piv = fr[ok], num[ok] // denom
        full = np.zeros((fr.shape[0], n), dtype=np.int64)
        full[:, free] = fr
        if pivots:
            full[:, pivots] = piv
        l1 = np.abs(full).sum(axis=1)
        ok = (l1 > 0) & (l1 <= l1_bound)
        if box is not None:
            ok &= np.all(np.abs(full) <= np.array(box, dtype=np.int64), axis=1)
        chunks.append(full[ok])
    cands = np.concatenate(chunks) if chunks else np.zeros((0, n), dtype=np.int64)
    l1 = np.abs(cands).sum(axis=1)
    order = np.lexsort(tuple(cands[:, j] for j in range(n - 1, -1, -1)) + (l1,))
    cands = cands[order]

    accepted = np.zeros((0, n), dtype=np.int64)
    vectors = []
    for v in cands:
        if accepted.shape[0]:
            below = np.all((accepted * v >= 0) & (np.abs(accepted) <= np.abs(v)), axis=1)
            if below.any():
                continue
        accepted = np.vstack([accepted, v])
        vectors.append(tuple(int(x) for x in v))
    for v in vectors:
        assert not any(mat_vec(a, v)), "enumerated vector left the kernel"
    return GraverBasis(a, tuple(vectors), l1_bound, box)


@dataclass(frozen=True)
class BoundsReport:
    shape: tuple
    max_abs: int
    td: int
    g1: int
    g_inf: int
    norm_bound: int
    norm_bound_ok: bool
    one_row_bound: Optional[int] = None  # 2 max|A| - 1 for one non-zero row
    one_row_ok: Optional[bool] = None
    blocks_g1: tuple = ()
    decomposable_ok: Optional[bool] = None
    step: Optional[dict] = None  # observed inequality for a connected matrix with >= 2 rows

    def to_json(self) -> dict:
        return {
            "shape": list(self.shape),
            "max_abs": self.max_abs,
            "td_D": self.td,
            "g1": self.g1,
            "g_inf": self.g_inf,
            "norm_bound": self.norm_bound,
            "norm_bound_ok": self.norm_bound_ok,
            "one_row_bound": self.one_row_bound,
            "one_row_ok": self.one_row_ok,
            "blocks_g1": list(self.blocks_g1),
            "decomposable_ok": self.decomposable_ok,
            "step": self.step,
        }


def certify_norm_bounds(a: IntMatrix, td_limit: int = DEFAULT_TD_LIMIT,
                        candidate_limit: int = DEFAULT_CANDIDATE_LIMIT) -> BoundsReport:
    td, forest = dual_treedepth(a, td_limit)
    basis = graver_basis(a, td_limit=td_limit, candidate_limit=candidate_limit)
    bound = norm_bound(a.max_abs, td)
    g1, ginf = basis.g1, basis.g_inf
    one_row_bound = one_row_ok = None
    if a.k == 1 and a.max_abs > 0:
        one_row_bound = 2 * a.max_abs - 1
        one_row_ok = g1 <= one_row_bound

    decomp = block_components(a)
    blocks_g1 = ()
    decomposable_ok = None
    step = None
    if len(decomp.blocks) > 1 or decomp.free_cols:
        values = []
        for blk in decomp.blocks:
            values.append(graver_basis(blk.matrix, td_limit=td_limit, candidate_limit=candidate_limit).g1)
        if decomp.free_cols:
            values.append(1)  # unit vectors on all-zero columns
        blocks_g1 = tuple(values)
        decomposable_ok = g1 <= max(values)
    elif a.k >= 2:
        root = next(v for v, p in enumerate(forest.parent) if p is None)
        rest = a.without_row(root)
        rest_basis = graver_basis(rest, td_limit=td_limit, candidate_limit=candidate_limit)
        row_max = max(abs(x) for x in a.rows[root])
        rhs = (2 * row_max + 1) * rest_basis.g1 * rest_basis.g_inf
        step = {"row": root, "rest_g1": rest_basis.g1, "rest_g_inf": rest_basis.g_inf,
                "bound": rhs, "ok": g1 <= rhs}
    return BoundsReport(a.shape, a.max_abs, td, g1, ginf, bound, g1 <= bound,
                        one_row_bound, one_row_ok, blocks_g1, decomposable_ok, step)


def check_conformal_decomposition(a: IntMatrix, u: Sequence[int], basis: Optional[GraverBasis] = None) -> list:
    """Greedy conformal decomposition u = sum lambda_i g_i as [(lambda_i, g_i)]."""
    u = tuple(int(x) for x in u)
    if len(u) != a.n_cols:
        raise DimensionError("vector length does not match the column count")
    if any(mat_vec(a, u)):
        raise ValueError("vector is not in the kernel")
    if basis is None:
        basis = graver_basis(a, box=tuple(abs(x) for x in u))
    rest = list(u)
    parts = []
    while any(rest):
        g = next((g for g in basis.vectors if conformal_leq(g, rest)), None)
        if g is None:
            raise AssertionError("no Graver vector lies below a non-zero kernel vector")
        lam = min(rest[i] // g[i] for i in range(len(g)) if g[i])
        rest = [r - lam * x for r, x in zip(rest, g)]
        parts.append((lam, g))
    return parts

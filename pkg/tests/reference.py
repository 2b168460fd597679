"""Independent brute-force references used by the tests.

Nothing here imports the package, so agreement with it is a genuine
cross-check.
"""
import itertools


def schoolbook_matmul(a, b):
    return [[sum(a[i][t] * b[t][j] for t in range(len(b))) for j in range(len(b[0]))] for i in range(len(a))]


def ilp_solutions(a, b, upper, lower=None):
    """All integer x with lower <= x <= upper and a x = b, in lex order."""
    lower = lower or [0] * len(upper)
    out = []
    for x in itertools.product(*[range(l, u + 1) for l, u in zip(lower, upper)]):
        if all(sum(c * v for c, v in zip(r, x)) == bi for r, bi in zip(a, b)):
            out.append(x)
    return out


def sat_models(num_vars, clauses):
    return [bits for bits in itertools.product([False, True], repeat=num_vars)
            if all(any((l > 0) == bits[abs(l) - 1] for l in c) for c in clauses)]


def subset_sum(values, target):
    return any(sum(c) == target for r in range(len(values) + 1) for c in itertools.combinations(values, r))


def kernel_vectors(a, radius):
    """Non-zero integer kernel vectors with every |g_i| <= radius."""
    n = len(a[0])
    return [g for g in itertools.product(range(-radius, radius + 1), repeat=n)
            if any(g) and all(sum(c * v for c, v in zip(r, g)) == 0 for r in a)]


def below(u, v):
    return all(x * y >= 0 and abs(x) <= abs(y) for x, y in zip(u, v))


def graver_in_box(a, radius):
    """Conformally minimal kernel vectors inside the l_inf ball. Complete for
    that ball, since anything conformally below a vector lies in the ball too."""
    ker = kernel_vectors(a, radius)
    return sorted(g for g in ker if not any(h != g and below(h, g) for h in ker))


def rooted_forests(n):
    """Parent arrays (None for roots) of every rooted forest on n labelled vertices."""
    for parents in itertools.product([None] + list(range(n)), repeat=n):
        ok = True
        for v in range(n):
            seen, u = set(), v
            while u is not None:
                if u in seen or parents[u] == u:
                    ok = False
                    break
                seen.add(u)
                u = parents[u]
            if not ok:
                break
        if ok:
            yield parents


def _pairs(n):
    return {p: i for i, p in enumerate(itertools.combinations(range(n), 2))}


def treedepth_table(n):
    """Treedepth of every graph on n labelled vertices, indexed by edge mask.

    Each forest covers exactly the pairs in an ancestor relation; a graph's
    treedepth is the least height of a forest covering all its edges, found
    by a superset-minimum sweep over the covered-pair masks.
    """
    idx = _pairs(n)
    m = len(idx)
    inf = n + 1
    best = [inf] * (1 << m)
    for parents in rooted_forests(n):
        mask, height = 0, 0
        for v in range(n):
            depth, u = 1, parents[v]
            while u is not None:
                mask |= 1 << idx[(min(u, v), max(u, v))]
                depth += 1
                u = parents[u]
            height = max(height, depth)
        best[mask] = min(best[mask], height)
    for bit in range(m):
        for mask in range(1 << m):
            if not mask >> bit & 1:
                best[mask] = min(best[mask], best[mask | 1 << bit])
    return best, list(idx)

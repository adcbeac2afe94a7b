"""Independent oracles for the test suite.

These deliberately avoid the library's linear-algebra and orbit-grouping
paths: dense per-entry elimination, raw per-extension point scans, and
explicit zero-cycle enumeration.  Slow and simple on purpose.
"""

from itertools import product

import numpy as np

from smoothsieve import gf
from smoothsieve.mpoly import monomials_of_degree


def dense_rank_mod_p(rows, p):
    """Gaussian elimination on lists of ints mod p."""
    rows = [list(r) for r in rows if any(x % p for x in r)]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][c] % p:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][c], p - 2, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c] % p:
                f = rows[i][c]
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def multiples_matrix(gens, d, nvars, p):
    """Rows of m*g over the degree-d monomial basis, as plain int lists."""
    monos = monomials_of_degree(nvars, d)
    index = {m: i for i, m in enumerate(monos)}
    rows = []
    for g in gens:
        dg = g.homogeneous_degree()
        if dg > d:
            continue
        for m in monomials_of_degree(nvars, d - dg):
            row = [0] * len(monos)
            for e, c in g.terms.items():
                row[index[tuple(a + b for a, b in zip(e, m))]] = c
            rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Naive singular-point exhaustion for plane curves over F_2: for every
# candidate f, evaluate f and its three partials at every point of
# P^2(F_{2^e}) for e <= e_max, with no orbit grouping and no certificates.

def f2_plane_curve_oracle(d, e_max=6):
    """Boolean array over all 2^dim(S_d) candidates: True = smooth.

    Vectorized across candidates but logically a per-curve scan: each
    projective point contributes its table of monomial values, and a curve
    is singular there when the value and all three partial values vanish.
    """
    nvars = 3
    monos = monomials_of_degree(nvars, d)
    nm = len(monos)
    n = 1 << nm
    # partial exponent shifts: partial_j(x^e) = e_j x^{e - delta_j} mod 2
    monos_d1 = monomials_of_degree(nvars, d - 1)
    idx_d1 = {m: i for i, m in enumerate(monos_d1)}
    pshift = []
    for j in range(nvars):
        col = []
        for m in monos:
            if m[j] % 2 == 1:
                sh = list(m)
                sh[j] -= 1
                col.append(idx_d1[tuple(sh)])
            else:
                col.append(-1)
        pshift.append(col)

    smooth = np.ones(n, dtype=bool)
    smooth[0] = False  # the zero form is not a smooth curve
    cand = np.arange(n, dtype=np.uint64)
    cand_bits = [((cand >> np.uint64(i)) & np.uint64(1)).astype(bool)
                 for i in range(nm)]
    for e in range(1, e_max + 1):
        ext = gf.make_field(2, e)
        for lead in range(nvars):
            for rest in product(range(ext.q), repeat=nvars - lead - 1):
                pt = (0,) * lead + (1,) + rest
                mono_vals = [_mono_value(m, pt, ext) for m in monos]
                d1_vals = [_mono_value(m, pt, ext) for m in monos_d1]
                vals = np.zeros(n, dtype=np.int64)
                for i in range(nm):
                    if mono_vals[i]:
                        vals[cand_bits[i]] ^= mono_vals[i]
                singular_here = vals == 0
                for j in range(nvars):
                    if not singular_here.any():
                        break
                    pv = np.zeros(n, dtype=np.int64)
                    for i in range(nm):
                        t = pshift[j][i]
                        if t >= 0 and d1_vals[t]:
                            pv[cand_bits[i]] ^= d1_vals[t]
                    singular_here &= pv == 0
                smooth &= ~singular_here
    return smooth


def _mono_value(expo, pt, ext):
    v = 1
    for x, nexp in zip(pt, expo):
        if nexp:
            if x == 0:
                return 0
            v = ext.mul(v, ext.pow(x, nexp))
    return v


# ---------------------------------------------------------------------------
# Explicit effective zero-cycle enumeration: multisets of closed points
# weighted by degree.

def zero_cycles_pointwise(point_degrees, n_max):
    """table[n][ell] for cycles of degree <= n_max, by literal recursion
    over individual points (every cycle visited once).  Tiny inputs only."""
    table = [[0] * (n_max + 1) for _ in range(n_max + 1)]

    def rec(j, used, ell):
        if j == len(point_degrees):
            table[used][ell] += 1
            return
        d = point_degrees[j]
        rec(j + 1, used, ell)  # multiplicity 0
        mult = 1
        while used + mult * d <= n_max:
            rec(j + 1, used + mult * d, ell + d)
            mult += 1

    rec(0, 0, 0)
    return table


def zero_cycles_by_support(point_degrees, n_max):
    """table[n][ell], enumerating cycle shapes explicitly per degree class:
    within a class the multiplicity compositions are listed one by one and
    the choice of distinct points contributes a binomial factor."""
    from collections import Counter
    from math import comb

    classes = sorted(Counter(point_degrees).items())
    table = [[0] * (n_max + 1) for _ in range(n_max + 1)]

    def comps(total, parts):
        if parts == 0:
            if total == 0:
                yield ()
            return
        for head in range(1, total - parts + 2):
            for rest in comps(total - head, parts - 1):
                yield (head,) + rest

    def rec(ci, used, ell, ways):
        if ci == len(classes):
            table[used][ell] += ways
            return
        d, a_d = classes[ci]
        rec(ci + 1, used, ell, ways)
        max_total = (n_max - used) // d
        for j in range(1, min(a_d, max_total) + 1):
            choose = comb(a_d, j)
            for t in range(j, max_total + 1):
                for _ in comps(t, j):
                    rec(ci + 1, used + d * t, ell + d * j, ways * choose)

    rec(0, 0, 0, 1)
    return table

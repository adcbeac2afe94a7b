"""Graded pieces of homogeneous ideals over F_q by pure linear algebra:
degree-d pieces, degreewise saturation, membership and projective
emptiness certificates.  No Groebner bases anywhere; everything reduces
to row reduction of multiplication matrices.

Rows over F_2 are machine integers used as bitsets (bit j = coefficient
of the j-th graded-lex monomial); generic q uses tuples of codes.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import gf, mpoly
from .gf import FieldSpec
from .mpoly import MPoly, monomial_index, monomials_of_degree


# ---------------------------------------------------------------------------
# Row reduction.  GF(2) rows are ints; generic rows are tuples of codes.

def _rref2(rows):
    pivots = {}
    for row in rows:
        while row:
            c = (row & -row).bit_length() - 1
            if c in pivots:
                row ^= pivots[c]
            else:
                pivots[c] = row
                break
    # full reduction
    for c in sorted(pivots, reverse=True):
        r = pivots[c]
        for c2 in pivots:
            if c2 < c and (pivots[c2] >> c) & 1:
                pivots[c2] ^= r
    return tuple(pivots[c] for c in sorted(pivots))


def _rrefq(rows, spec):
    pivots = {}
    for row in rows:
        row = list(row)
        while True:
            c = next((j for j, x in enumerate(row) if x), None)
            if c is None:
                break
            if c in pivots:
                prow = pivots[c]
                f = spec.neg(row[c])
                row = [spec.add(x, spec.mul(f, y)) for x, y in zip(row, prow)]
            else:
                inv = spec.inv(row[c])
                pivots[c] = tuple(spec.mul(inv, x) for x in row)
                break
    for c in sorted(pivots, reverse=True):
        r = pivots[c]
        for c2 in list(pivots):
            if c2 < c and pivots[c2][c]:
                f = spec.neg(pivots[c2][c])
                pivots[c2] = tuple(spec.add(x, spec.mul(f, y))
                                   for x, y in zip(pivots[c2], r))
    return tuple(pivots[c] for c in sorted(pivots))


def _reduce2(vec, rows):
    for r in rows:
        lead = r & -r
        if vec & lead:
            vec ^= r
    return vec


def _reduceq(vec, rows, spec):
    vec = list(vec)
    for r in rows:
        c = next(j for j, x in enumerate(r) if x)
        if vec[c]:
            f = spec.neg(vec[c])
            vec = [spec.add(x, spec.mul(f, y)) for x, y in zip(vec, r)]
    return tuple(vec)


def _kernel2(rows, ncols):
    """Basis of the right kernel of the matrix whose rows are bitsets."""
    rref = _rref2(rows)
    pivot_cols = [(r & -r).bit_length() - 1 for r in rref]
    pivot_set = set(pivot_cols)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = 1 << free
        for pc, r in zip(pivot_cols, rref):
            if (r >> free) & 1:
                v |= 1 << pc
        basis.append(v)
    return basis


def _kernelq(rows, ncols, spec):
    rref = _rrefq(rows, spec)
    pivot_cols = [next(j for j, x in enumerate(r) if x) for r in rref]
    pivot_set = set(pivot_cols)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        v = [0] * ncols
        v[free] = 1
        for pc, r in zip(pivot_cols, rref):
            if r[free]:
                v[pc] = spec.neg(r[free])
        basis.append(tuple(v))
    return basis


class SubspaceBasis:
    """Reduced row-echelon basis of a subspace of S_d in the monomial basis."""

    __slots__ = ("spec", "degree", "ncols", "rows")

    def __init__(self, spec, degree, ncols, rows):
        self.spec = spec
        self.degree = degree
        self.ncols = ncols
        self.rows = tuple(rows)

    @property
    def rank(self):
        return len(self.rows)

    def contains_vector(self, vec) -> bool:
        if self.spec.q == 2:
            return _reduce2(vec, self.rows) == 0
        return not any(_reduceq(vec, self.rows, self.spec))

    def __eq__(self, other):
        return (isinstance(other, SubspaceBasis) and self.degree == other.degree
                and self.ncols == other.ncols and self.rows == other.rows)

    def __hash__(self):
        return hash((self.degree, self.ncols, self.rows))

    def to_polys(self, nvars) -> list[MPoly]:
        monos = monomials_of_degree(nvars, self.degree)
        out = []
        for row in self.rows:
            if self.spec.q == 2:
                terms = {monos[j]: 1 for j in range(self.ncols) if (row >> j) & 1}
            else:
                terms = {monos[j]: c for j, c in enumerate(row) if c}
            out.append(MPoly(self.spec, nvars, terms))
        return out


def poly_to_vector(f: MPoly, degree: int):
    """Coefficient vector of a homogeneous f in the degree-d monomial basis."""
    idx = monomial_index(f.nvars, degree)
    if f.spec.q == 2:
        v = 0
        for e, c in f.terms.items():
            v |= 1 << idx[e]
        return v
    v = [0] * len(idx)
    for e, c in f.terms.items():
        v[idx[e]] = c
    return tuple(v)


def rref_rows(rows, ncols, spec):
    return _rref2(rows) if spec.q == 2 else _rrefq(rows, spec)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EmptinessCertificate:
    """Outcome of the projective emptiness test for V(J).

    status 'empty' carries the least degree k with J_k = S_k (a
    machine-checkable Nullstellensatz certificate); 'nonempty' carries a
    witness point over F_{q^e}; 'inconclusive' means neither was found
    within the configured bounds.
    """
    status: str
    k: int | None = None
    witness: tuple | None = None
    witness_field: FieldSpec | None = None

    def to_json_dict(self):
        out = {"status": self.status}
        if self.k is not None:
            out["k"] = self.k
        if self.witness is not None:
            fs = self.witness_field
            out["witness"] = [fs.element_string(c) for c in self.witness]
            out["witness_field"] = {
                "q": fs.q, "modulus": fs.modulus_string()}
        return out


class GradedIdeal:
    """Homogeneous ideal presented by generators, with cached graded pieces.

    Caches are filled on demand; fill them from a single thread, then the
    frozen ideal may be shared read-only.
    """

    def __init__(self, spec: FieldSpec, nvars: int, generators):
        self.spec = spec
        self.nvars = nvars
        gens = []
        for g in generators:
            if not g:
                continue
            if g.spec != spec or g.nvars != nvars:
                raise gf.FieldMismatchError(
                    "generator does not match the ideal's ring")
            g.homogeneous_degree()  # raises on inhomogeneous input
            gens.append(g)
        self.generators = tuple(gens)
        self._pieces: dict[int, SubspaceBasis] = {}
        self._saturated: dict[tuple, tuple] = {}

    # -- degree-d part of the generated ideal --------------------------------

    def piece(self, d: int) -> SubspaceBasis:
        if d < 0:
            raise ValueError("degree must be >= 0")
        cached = self._pieces.get(d)
        if cached is not None:
            return cached
        spec = self.spec
        idx = monomial_index(self.nvars, d)
        ncols = len(idx)
        rows = []
        for g in self.generators:
            dg = g.homogeneous_degree()
            if dg > d:
                continue
            for m in monomials_of_degree(self.nvars, d - dg):
                if spec.q == 2:
                    row = 0
                    for e, c in g.terms.items():
                        row |= 1 << idx[tuple(a + b for a, b in zip(e, m))]
                else:
                    row = [0] * ncols
                    for e, c in g.terms.items():
                        row[idx[tuple(a + b for a, b in zip(e, m))]] = c
                rows.append(row)
        basis = SubspaceBasis(spec, d, ncols, rref_rows(rows, ncols, spec))
        self._pieces[d] = basis
        return basis

    def default_saturation_cap(self, d: int) -> int:
        return d + sum(g.homogeneous_degree() for g in self.generators)

    def saturated_piece(self, d: int, cap: int | None = None):
        """Degree-d part of the saturation, with an honesty flag.

        Returns (basis, flag); flag is 'stable' when the ascending chain
        {f : x_i^N f in piece(d+N) for all i} repeated a value for two
        consecutive N, and 'capped' when N reached the cap first.
        """
        if cap is None:
            cap = self.default_saturation_cap(d)
        key = (d, cap)
        cached = self._saturated.get(key)
        if cached is not None:
            return cached
        spec = self.spec
        dim_sd = len(monomials_of_degree(self.nvars, d))
        current = self.piece(d)
        flag = "capped"
        if current.rank == dim_sd:
            flag = "stable"  # nothing above the full space
        else:
            for n in range(1, cap + 1):
                nxt = self._saturation_stage(d, n)
                if nxt.rank == current.rank:
                    current = nxt
                    flag = "stable"
                    break
                current = nxt
                if current.rank == dim_sd:
                    flag = "stable"
                    break
        result = (current, flag)
        self._saturated[key] = result
        return result

    def _saturation_stage(self, d: int, n: int) -> SubspaceBasis:
        """{f in S_d : x_i^n f in piece(d+n) for every i}."""
        spec = self.spec
        nvars = self.nvars
        monos_d = monomials_of_degree(nvars, d)
        dim_d = len(monos_d)
        target = self.piece(d + n)
        idx_up = monomial_index(nvars, d + n)
        ncols_up = len(idx_up)
        # residuals of x_i^n * m_j reduced modulo piece(d+n); conditions stacked
        cond_rows = []  # one row per condition component, columns = S_d coords
        for i in range(nvars):
            residuals = []
            for m in monos_d:
                e = list(m)
                e[i] += n
                if spec.q == 2:
                    v = _reduce2(1 << idx_up[tuple(e)], target.rows)
                else:
                    vec = [0] * ncols_up
                    vec[idx_up[tuple(e)]] = 1
                    v = _reduceq(vec, target.rows, spec)
                residuals.append(v)
            if spec.q == 2:
                for bit in range(ncols_up):
                    row = 0
                    for j, v in enumerate(residuals):
                        if (v >> bit) & 1:
                            row |= 1 << j
                    if row:
                        cond_rows.append(row)
            else:
                for bit in range(ncols_up):
                    row = tuple(v[bit] for v in residuals)
                    if any(row):
                        cond_rows.append(row)
        if spec.q == 2:
            kern = _kernel2(cond_rows, dim_d)
        else:
            kern = _kernelq(cond_rows, dim_d, spec)
        return SubspaceBasis(spec, d, dim_d, rref_rows(kern, dim_d, spec))

    # -- membership ------------------------------------------------------------

    def contains(self, f: MPoly, strict: bool = False, with_flag: bool = False):
        """Whether f lies in the (saturated, unless strict) ideal."""
        if not f:
            return (True, "stable") if with_flag else True
        d = f.homogeneous_degree()
        vec = poly_to_vector(f, d)
        if strict:
            ok = self.piece(d).contains_vector(vec)
            flag = "stable"
        else:
            basis, flag = self.saturated_piece(d)
            ok = basis.contains_vector(vec)
        return (ok, flag) if with_flag else ok

    # -- projective emptiness -----------------------------------------------------

    def default_certificate_cap(self) -> int:
        return sum(g.homogeneous_degree() - 1 for g in self.generators) + 2

    def certifies_empty_at(self, k: int) -> bool:
        """Single-degree check: J_k = S_k proves V(J) empty (monotone in k)."""
        return self.piece(k).rank == len(monomials_of_degree(self.nvars, k))

    def is_projectively_empty(self, k_max: int | None = None, e_max: int = 2,
                              point_search: bool = True) -> EmptinessCertificate:
        if k_max is None:
            k_max = self.default_certificate_cap()
        if point_search:
            wit = self.find_point(e_max)
            if wit is not None:
                return EmptinessCertificate("nonempty", witness=wit[0],
                                            witness_field=wit[1])
        for k in range(1, k_max + 1):
            if self.certifies_empty_at(k):
                return EmptinessCertificate("empty", k=k)
        return EmptinessCertificate("inconclusive")

    def find_point(self, e_max: int):
        """Scan P^n(F_{q^e}), e <= e_max, for a common zero of the generators."""
        base = self.spec
        for e in range(1, e_max + 1):
            ext = gf.make_field(base.p, base.k * e)
            for pt in mpoly.normalized_projective_points(ext, self.nvars):
                if all(g.evaluate_codes(pt, ext) == 0 for g in self.generators):
                    return pt, ext
        return None

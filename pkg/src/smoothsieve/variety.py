"""Closed points of quasi-projective schemes over F_q: enumeration by
Frobenius orbits, Jacobian smoothness tests, local embedding dimension,
and the stratification of a subscheme by embedding dimension.

Also owns the plain-text scheme file format (see `parse_problem`).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

from . import gf, mpoly
from .gf import FieldSpec
from .graded import GradedIdeal
from .mpoly import MPoly, normalized_projective_points, projective_point_count


class EnumerationCapExceeded(ValueError):
    pass


class PointNotOnScheme(ValueError):
    pass


class SchemeFileError(ValueError):
    pass


DEFAULT_CAP = gf.ENUMERATION_CAP


@dataclass(frozen=True)
class SchemePresentation:
    """Ambient P^n plus homogeneous equations; quasi-projective when
    `removed` is nonempty (the common zero locus of `removed` is taken out).
    """
    spec: FieldSpec
    nvars: int
    equations: tuple = ()
    removed: tuple = ()
    declared_dim: int | None = None

    @property
    def ambient_dim(self):
        return self.nvars - 1

    def dim(self):
        """Declared dimension; an equation-free presentation is all of P^n."""
        if self.declared_dim is not None:
            return self.declared_dim
        if not self.equations:
            return self.ambient_dim
        return None

    def contains_code_point(self, coords, ext: FieldSpec) -> bool:
        if any(e.evaluate_codes(coords, ext) != 0 for e in self.equations):
            return False
        if self.removed and all(r.evaluate_codes(coords, ext) == 0
                                for r in self.removed):
            return False
        return True

    def is_free_ambient(self):
        return not self.equations and not self.removed


@dataclass(frozen=True)
class ClosedPoint:
    """A Frobenius orbit of geometric points; degree = orbit size."""
    degree: int
    residue: FieldSpec
    orbit: tuple
    representative: tuple

    def chart(self) -> int:
        return next(i for i, c in enumerate(self.representative) if c)

    def rep_strings(self):
        return tuple(self.residue.element_string(c) for c in self.representative)


@dataclass
class Stratum:
    e: int
    points: tuple
    counts: dict            # degree -> number of closed points (a_d)
    dim_estimate: int | None
    dim_source: str         # 'declared' | 'heuristic' | 'empty'


@dataclass
class StratumTable:
    strata: dict            # e -> Stratum
    max_degree: int
    flags: tuple = ()

    def nonempty_values(self):
        return sorted(e for e, s in self.strata.items() if s.points)


# ---------------------------------------------------------------------------
# Point enumeration.

def raw_point_count(scheme: SchemePresentation, e: int, cap: int = DEFAULT_CAP) -> int:
    """|scheme(F_{q^e})| by direct normalized scan (closed form when free)."""
    base = scheme.spec
    q_e = base.q ** e
    if scheme.is_free_ambient():
        return projective_point_count(q_e, scheme.ambient_dim)
    total = projective_point_count(q_e, scheme.ambient_dim)
    if total > cap:
        raise EnumerationCapExceeded(
            f"P^{scheme.ambient_dim}(F_{q_e}) has {total} points (cap {cap})")
    ext = gf.make_field(base.p, base.k * e)
    return sum(1 for pt in normalized_projective_points(ext, scheme.nvars)
               if scheme.contains_code_point(pt, ext))


def enumerate_closed_points(scheme: SchemePresentation, max_degree: int,
                            cap: int = DEFAULT_CAP) -> list[ClosedPoint]:
    """Every closed point of degree <= max_degree, exactly once, grouped
    into Frobenius orbits, ordered by (degree, representative)."""
    base = scheme.spec
    out = []
    for e in range(1, max_degree + 1):
        q_e = base.q ** e
        total = projective_point_count(q_e, scheme.ambient_dim)
        if total > cap or q_e > cap:
            raise EnumerationCapExceeded(
                f"P^{scheme.ambient_dim}(F_{q_e}) has {total} points (cap {cap})")
        ext = gf.make_field(base.p, base.k * e)
        k_base = base.k
        seen = set()
        bucket = []
        for pt in normalized_projective_points(ext, scheme.nvars):
            if pt in seen:
                continue
            if not scheme.contains_code_point(pt, ext):
                continue
            # q-power Frobenius orbit (normalization is preserved)
            orbit = [pt]
            cur = pt
            while True:
                cur = tuple(ext.frobenius(c, k_base) for c in cur)
                if cur == pt:
                    break
                orbit.append(cur)
            if len(orbit) != e:
                continue  # proper subfield point, already listed at its degree
            seen.update(orbit)
            rep = min(orbit)
            bucket.append(ClosedPoint(e, ext, tuple(sorted(orbit)), rep))
        bucket.sort(key=lambda P: P.representative)
        out.extend(bucket)
    return out


def mobius(n: int) -> int:
    out = 1
    f = 2
    while f * f <= n:
        if n % f == 0:
            n //= f
            if n % f == 0:
                return 0
            out = -out
        f += 1
    if n > 1:
        out = -out
    return out


def closed_point_count(scheme: SchemePresentation, d: int,
                       cap: int = DEFAULT_CAP) -> int:
    """a_d via Moebius inversion of the raw counts N_e."""
    total = sum(mobius(d // e) * raw_point_count(scheme, e, cap)
                for e in range(1, d + 1) if d % e == 0)
    assert total % d == 0
    return total // d


# ---------------------------------------------------------------------------
# Smoothness and local embedding dimension.

def _jacobian_rank_at(equations, point: ClosedPoint, chart: int | None = None) -> int:
    """Rank over kappa(P) of the affine Jacobian at the representative."""
    ext = point.residue
    rep = point.representative
    if chart is None:
        chart = point.chart()
    elif rep[chart] == 0:
        raise ValueError("chart coordinate vanishes at the point")
    if rep[chart] != 1:
        scale = ext.inv(rep[chart])
        rep = tuple(ext.mul(scale, c) for c in rep)
    cols = [i for i in range(len(rep)) if i != chart]
    rows = []
    for eq in equations:
        deh = eq.dehomogenize(chart)
        row = [deh.partial(i).evaluate_codes(rep, ext) for i in cols]
        if any(row):
            rows.append(row)
    # small dense elimination over kappa(P)
    rank = 0
    ncols = len(cols)
    rows = [list(r) for r in rows]
    for c in range(ncols):
        piv = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = ext.inv(rows[rank][c])
        rows[rank] = [ext.mul(inv, x) for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                f = ext.neg(rows[i][c])
                rows[i] = [ext.add(x, ext.mul(f, y))
                           for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def _require_on_scheme(equations, removed, point: ClosedPoint):
    ext = point.residue
    rep = point.representative
    if any(e.evaluate_codes(rep, ext) != 0 for e in equations):
        raise PointNotOnScheme(f"point {point.rep_strings()} is off the scheme")
    if removed and all(r.evaluate_codes(rep, ext) == 0 for r in removed):
        raise PointNotOnScheme(f"point {point.rep_strings()} lies in the removed locus")


def is_smooth_at(X: SchemePresentation, f: MPoly | None, point: ClosedPoint,
                 expected_dim: int, chart: int | None = None) -> bool:
    """Jacobian criterion at P: rank must equal n - expected_dim."""
    eqs = list(X.equations)
    if f is not None:
        eqs.append(f)
    _require_on_scheme(eqs, X.removed, point)
    rank = _jacobian_rank_at(eqs, point, chart)
    return rank == X.ambient_dim - expected_dim


@lru_cache(maxsize=None)
def effective_generators(V: SchemePresentation):
    """Generators augmented by low-degree saturation, with an honesty flag.

    Returns (generators, flag); flag 'capped' marks a saturation search
    that hit its cap, leaving e(P) a possible overestimate.
    """
    if not V.equations:
        return V.equations, "stable"
    ideal = GradedIdeal(V.spec, V.nvars, V.equations)
    max_d = max(g.homogeneous_degree() for g in V.equations) + 2
    gens = list(V.equations)
    flag = "stable"
    for d in range(1, max_d + 1):
        sat, sflag = ideal.saturated_piece(d)
        if sflag == "capped":
            flag = "capped"
        if sat.rank > ideal.piece(d).rank:
            known = GradedIdeal(V.spec, V.nvars, gens)
            for g in sat.to_polys(V.nvars):
                if not known.piece(d).contains_vector(
                        _vec_of(g, d)):
                    gens.append(g)
                    known = GradedIdeal(V.spec, V.nvars, gens)
    return tuple(gens), flag


def _vec_of(g, d):
    from .graded import poly_to_vector
    return poly_to_vector(g, d)


def embedding_dimension(V: SchemePresentation, point: ClosedPoint,
                        chart: int | None = None,
                        with_flag: bool = False):
    """e(P) = n - rank of the Jacobian of the (saturation-augmented)
    presentation of V at P; the dimension of the Zariski tangent space."""
    gens, flag = effective_generators(V)
    _require_on_scheme(V.equations, V.removed, point)
    rank = _jacobian_rank_at(gens, point, chart)
    e = V.ambient_dim - rank
    return (e, flag) if with_flag else e


def stratify(V: SchemePresentation, max_degree: int,
             declared_dims: dict | None = None,
             cap: int = DEFAULT_CAP) -> StratumTable:
    """Assign every closed point of degree <= B to its stratum V_e."""
    declared_dims = declared_dims or {}
    points = enumerate_closed_points(V, max_degree, cap)
    flags = []
    grouped: dict[int, list] = {}
    for P in points:
        e, fl = embedding_dimension(V, P, with_flag=True)
        if fl == "capped" and "saturation-capped" not in flags:
            flags.append("saturation-capped")
        grouped.setdefault(e, []).append(P)
    strata = {}
    q = V.spec.q
    for e, pts in sorted(grouped.items()):
        counts = {}
        for P in pts:
            counts[P.degree] = counts.get(P.degree, 0) + 1
        if e in declared_dims:
            dim_e, source = declared_dims[e], "declared"
        else:
            dim_e, source = _growth_dimension(counts, q, max_degree), "heuristic"
            flags.append(f"heuristic-dim:V_{e}")
        strata[e] = Stratum(e, tuple(pts), counts, dim_e, source)
    for e, dim_e in declared_dims.items():
        if e not in strata:
            strata[e] = Stratum(e, (), {}, dim_e, "declared")
    return StratumTable(strata, max_degree, tuple(flags))


def growth_dimension(n_e: int, e: int, q: int) -> int:
    """Nearest integer to log_q(N_e)/e in exact arithmetic: the k with
    q^{e(2k-1)} <= N_e^2 < q^{e(2k+1)}."""
    k = 0
    sq = n_e * n_e
    while q ** (e * (2 * k + 1)) <= sq:
        k += 1
    return k


def _growth_dimension(counts: dict, q: int, max_degree: int) -> int:
    """dim estimate from a_d ~ q^{dim*d}/d growth; None stands in for the
    empty stratum's dimension of -infinity."""
    n_max = 0
    best_e = 0
    for e in range(1, max_degree + 1):
        n_e = sum(d * a for d, a in counts.items() if e % d == 0)
        if n_e > 0:
            n_max, best_e = n_e, e
    if best_e == 0:
        return None
    return growth_dimension(n_max, best_e, q)


# ---------------------------------------------------------------------------
# Scheme problem files.
#
#   # comment
#   q = 2              (or q = p^k, optionally followed by [modulus in g])
#   P 3 : x y z w
#   X:
#     <polynomial per line>
#   X.remove:
#     <polynomial per line>
#   Z:
#     <polynomial per line>
#   dim X = 3
#   dim V_1 = 1

@dataclass(frozen=True)
class SchemeProblem:
    field: FieldSpec
    nvars: int
    aliases: tuple
    X: SchemePresentation
    Z: SchemePresentation | None
    stratum_dims: tuple = ()    # ((e, dim), ...)

    @property
    def dims(self):
        return dict(self.stratum_dims)

    def dim_x(self):
        return self.X.dim()


def parse_problem(text: str, q_override: int | None = None) -> SchemeProblem:
    lines = [ln.rstrip() for ln in text.splitlines()]
    q_spec = None
    nvars = None
    aliases = None
    sections = {"X": [], "X.remove": [], "Z": []}
    seen_sections = set()
    dim_x = None
    stratum_dims = {}
    current = None
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        low = line.replace(" ", "")
        if low.startswith("q="):
            q_spec = _parse_field_line(line, q_override)
            current = None
        elif line.startswith("P ") or line.startswith("P\t"):
            body = line[1:].strip()
            if ":" in body:
                npart, apart = body.split(":", 1)
                aliases = tuple(apart.replace(",", " ").split())
            else:
                npart, aliases = body, None
            n = int(npart.strip())
            nvars = n + 1
            if aliases is None:
                aliases = mpoly.default_aliases(nvars)
            if len(aliases) != nvars:
                raise SchemeFileError(
                    f"expected {nvars} variable aliases, got {len(aliases)}")
            current = None
        elif low.startswith("dimX="):
            dim_x = int(line.split("=", 1)[1])
            current = None
        elif low.startswith("dimV_"):
            head, val = low.split("=", 1)
            e = int(head[len("dimV_"):])
            stratum_dims[e] = int(val)
            current = None
        elif ":" in line and line.split(":", 1)[0].strip() in sections:
            current, rest = (part.strip() for part in line.split(":", 1))
            seen_sections.add(current)
            if rest:
                sections[current].extend(p.strip() for p in rest.split(";")
                                         if p.strip())
        elif current is not None:
            sections[current].extend(p.strip() for p in line.split(";") if p.strip())
        else:
            raise SchemeFileError(f"cannot parse line: {raw!r}")
    if q_spec is None:
        raise SchemeFileError("missing field line 'q = ...'")
    if nvars is None:
        raise SchemeFileError("missing ambient line 'P n : aliases'")

    def polys(names):
        return tuple(mpoly.parse_homogeneous(s, q_spec, nvars, aliases)
                     for s in names)

    x_eqs = polys(sections["X"])
    x_rm = polys(sections["X.remove"])
    X = SchemePresentation(q_spec, nvars, x_eqs, x_rm,
                           declared_dim=dim_x)
    if dim_x is not None:
        _validate_declared_dim(X)
    Z = None
    if "Z" in seen_sections:
        Z = SchemePresentation(q_spec, nvars, polys(sections["Z"]))
    return SchemeProblem(q_spec, nvars, tuple(aliases), X, Z,
                         tuple(sorted(stratum_dims.items())))


def _validate_declared_dim(X: SchemePresentation, e: int = 2):
    """Warn (never error) when the declared dimension disagrees with the
    point-count growth rate; skipped when the check itself would be big."""
    import warnings
    q_e = X.spec.q ** e
    if projective_point_count(q_e, X.ambient_dim) > 1 << 20:
        return
    try:
        n_e = raw_point_count(X, e)
    except EnumerationCapExceeded:
        return
    if n_e == 0:
        return
    grown = growth_dimension(n_e, e, X.spec.q)
    if grown != X.declared_dim:
        warnings.warn(
            f"declared dim X = {X.declared_dim} but point counts grow like "
            f"dimension {grown}", stacklevel=2)


def _parse_field_line(line: str, q_override: int | None) -> FieldSpec:
    body = line.split("=", 1)[1].strip()
    modulus = None
    if "[" in body:
        body, modpart = body.split("[", 1)
        modpart = modpart.rstrip("]").strip()
        body = body.strip()
    else:
        modpart = None
    if "^" in body:
        p_s, k_s = body.split("^")
        p, k = int(p_s), int(k_s)
    else:
        q = int(body)
        p, k = _factor_prime_power(q)
    if q_override is not None:
        p, k = _factor_prime_power(q_override)
        modpart = None
    spec = gf.make_field(p, k)
    if modpart is not None:
        coeffs = _parse_modulus(modpart, p, k)
        spec = gf.make_field(p, k, coeffs)
    return spec


def _factor_prime_power(q: int):
    if q < 2:
        raise SchemeFileError(f"q = {q} is not a prime power")
    p = next(f for f in range(2, q + 1) if q % f == 0)
    k = 0
    m = q
    while m % p == 0:
        m //= p
        k += 1
    if m != 1:
        raise SchemeFileError(f"q = {q} is not a prime power")
    return p, k


def _parse_modulus(text: str, p: int, k: int):
    spec1 = gf.make_field(p, 1)
    coeffs = [0] * (k + 1)
    for sign_term in text.replace("-", "+-").split("+"):
        t = sign_term.strip()
        if not t:
            continue
        neg = t.startswith("-")
        if neg:
            t = t[1:].strip()
        c = 1
        power = 0
        for fac in t.split("*"):
            fac = fac.strip()
            if not fac:
                continue
            if fac.isdigit():
                c = (c * int(fac)) % p
            elif fac == "g" or fac == "x":
                power += 1
            elif fac.startswith(("g^", "x^")):
                power += int(fac.split("^")[1])
            else:
                raise SchemeFileError(f"bad modulus term {fac!r}")
        if power > k:
            raise SchemeFileError("modulus degree too large")
        coeffs[power] = (coeffs[power] + (-c if neg else c)) % p
    return tuple(coeffs)


def dump_problem(problem: SchemeProblem) -> str:
    lines = []
    fs = problem.field
    if fs.k == 1:
        lines.append(f"q = {fs.p}")
    else:
        lines.append(f"q = {fs.p}^{fs.k} [{fs.modulus_string('g')}]")
    lines.append(f"P {problem.nvars - 1} : " + " ".join(problem.aliases))
    lines.append("X:")
    for e in problem.X.equations:
        lines.append("  " + e.to_string(problem.aliases))
    if problem.X.removed:
        lines.append("X.remove:")
        for e in problem.X.removed:
            lines.append("  " + e.to_string(problem.aliases))
    if problem.Z is not None:
        lines.append("Z:")
        for e in problem.Z.equations:
            lines.append("  " + e.to_string(problem.aliases))
    if problem.X.declared_dim is not None:
        lines.append(f"dim X = {problem.X.declared_dim}")
    for e, d in problem.stratum_dims:
        lines.append(f"dim V_{e} = {d}")
    return "\n".join(lines) + "\n"


def load_problem(path, q_override: int | None = None) -> SchemeProblem:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_problem(fh.read(), q_override)


def orbit_variants(point: ClosedPoint):
    """The same closed point presented at each of its orbit members."""
    return [replace(point, representative=member) for member in point.orbit]

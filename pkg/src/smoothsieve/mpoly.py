"""Sparse homogeneous multivariate polynomials over F_q.

Terms map exponent tuples (length nvars) to nonzero coefficient codes.
Monomial bases are ordered graded-lex with x0 major, so degree-d vectors
index consistently into the linear algebra layer.
"""

from __future__ import annotations

import re
from functools import lru_cache
from itertools import product

from . import gf
from .gf import FieldMismatchError, FieldSpec


class HomogeneityError(ValueError):
    """Polynomial is not homogeneous where homogeneity is required."""


class ParseError(ValueError):
    pass


@lru_cache(maxsize=None)
def monomials_of_degree(nvars: int, d: int) -> tuple:
    """All exponent tuples of total degree d, graded-lex (x0-major, descending)."""
    if d < 0:
        raise ValueError("degree must be >= 0")

    def comps(total, n):
        if n == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for rest in comps(total - head, n - 1):
                yield (head,) + rest

    return tuple(comps(d, nvars))


@lru_cache(maxsize=None)
def monomial_index(nvars: int, d: int) -> dict:
    return {m: i for i, m in enumerate(monomials_of_degree(nvars, d))}


def monomial_degree(expo) -> int:
    return sum(expo)


class MPoly:
    """Immutable sparse polynomial; do not mutate `terms` after creation."""

    __slots__ = ("spec", "nvars", "terms", "_hash")

    def __init__(self, spec: FieldSpec, nvars: int, terms=None):
        self.spec = spec
        self.nvars = nvars
        clean = {}
        if terms:
            for expo, code in terms.items() if isinstance(terms, dict) else terms:
                if len(expo) != nvars:
                    raise ValueError(f"exponent {expo} has wrong arity")
                code = int(code)
                if spec.k == 1:
                    code %= spec.p
                if code:
                    clean[tuple(expo)] = code
        self.terms = clean
        self._hash = None

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, spec, nvars):
        return cls(spec, nvars, {})

    @classmethod
    def constant(cls, spec, nvars, value):
        code = spec.element(value).code
        return cls(spec, nvars, {(0,) * nvars: code} if code else {})

    @classmethod
    def monomial(cls, spec, nvars, expo, coeff=1):
        code = spec.element(coeff).code
        return cls(spec, nvars, {tuple(expo): code} if code else {})

    @classmethod
    def variable(cls, spec, nvars, i):
        expo = [0] * nvars
        expo[i] = 1
        return cls.monomial(spec, nvars, expo)

    # -- ring structure -------------------------------------------------------

    def _check(self, other):
        if self.spec != other.spec or self.nvars != other.nvars:
            raise FieldMismatchError("polynomials over different rings")

    def __add__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        self._check(other)
        spec = self.spec
        out = dict(self.terms)
        for e, c in other.terms.items():
            s = spec.add(out.get(e, 0), c)
            if s:
                out[e] = s
            else:
                out.pop(e, None)
        return MPoly(spec, self.nvars, out)

    def __neg__(self):
        spec = self.spec
        return MPoly(spec, self.nvars, {e: spec.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        spec = self.spec
        if isinstance(other, (int, gf.FieldElement)):
            code = spec.element(other).code
            if not code:
                return MPoly.zero(spec, self.nvars)
            return MPoly(spec, self.nvars,
                         {e: spec.mul(c, code) for e, c in self.terms.items()})
        if not isinstance(other, MPoly):
            return NotImplemented
        self._check(other)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                s = spec.add(out.get(e, 0), spec.mul(c1, c2))
                if s:
                    out[e] = s
                else:
                    out.pop(e, None)
        return MPoly(spec, self.nvars, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, MPoly) and self.spec == other.spec
                and self.nvars == other.nvars and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.spec, self.nvars,
                               tuple(sorted(self.terms.items()))))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"MPoly({self.to_string()})"

    # -- structure queries ------------------------------------------------------

    def degree(self):
        """Total degree, or None for the zero polynomial."""
        if not self.terms:
            return None
        return max(sum(e) for e in self.terms)

    def is_homogeneous(self):
        degs = {sum(e) for e in self.terms}
        return len(degs) <= 1

    def homogeneous_degree(self):
        if not self.terms:
            return None
        degs = {sum(e) for e in self.terms}
        if len(degs) > 1:
            raise HomogeneityError(f"{self.to_string()} is not homogeneous")
        return degs.pop()

    # -- calculus and evaluation -------------------------------------------------

    def partial(self, i: int) -> "MPoly":
        """Formal partial derivative with respect to variable i."""
        if not 0 <= i < self.nvars:
            raise ValueError("variable index out of range")
        spec = self.spec
        out = {}
        for e, c in self.terms.items():
            n = e[i]
            if n == 0:
                continue
            code = spec.mul(c, n % spec.p) if n % spec.p != 1 else c
            if n % spec.p == 0 or not code:
                continue
            ne = list(e)
            ne[i] -= 1
            ne = tuple(ne)
            s = spec.add(out.get(ne, 0), code)
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return MPoly(spec, self.nvars, out)

    def evaluate_codes(self, coords, target: FieldSpec) -> int:
        """Value at a point with coordinate codes in the extension `target`."""
        emap = gf.embed_map(self.spec, target)
        acc = 0
        for e, c in self.terms.items():
            term = emap[c]
            for x, n in zip(coords, e):
                if n:
                    if x == 0:
                        term = 0
                        break
                    term = target.mul(term, target.pow(x, n))
            if term:
                acc = target.add(acc, term)
        return acc

    def evaluate(self, point) -> gf.FieldElement:
        """Evaluate at a tuple of FieldElements of a common extension field."""
        if len(point) != self.nvars:
            raise ValueError("point arity mismatch")
        target = point[0].spec
        for x in point:
            if x.spec != target:
                raise FieldMismatchError("point coordinates in mixed fields")
        code = self.evaluate_codes([x.code for x in point], target)
        return gf.FieldElement(target, code)

    def dehomogenize(self, chart: int) -> "MPoly":
        """Substitute 1 for the chart variable."""
        spec = self.spec
        out = {}
        for e, c in self.terms.items():
            ne = list(e)
            ne[chart] = 0
            ne = tuple(ne)
            s = spec.add(out.get(ne, 0), c)
            if s:
                out[ne] = s
            else:
                out.pop(ne, None)
        return MPoly(spec, self.nvars, out)

    # -- text form ------------------------------------------------------------

    def to_string(self, aliases=None) -> str:
        if not self.terms:
            return "0"
        aliases = aliases or default_aliases(self.nvars)
        parts = []
        for e in sorted(self.terms, key=lambda t: (-sum(t), tuple(-x for x in t))):
            c = self.terms[e]
            factors = []
            for name, n in zip(aliases, e):
                if n == 1:
                    factors.append(name)
                elif n > 1:
                    factors.append(f"{name}^{n}")
            body = "*".join(factors)
            if not body:
                parts.append(self._coeff_string(c))
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"{self._coeff_string(c)}*{body}")
        return " + ".join(parts)

    def _coeff_string(self, code):
        if self.spec.k == 1:
            return str(code)
        return "(" + self.spec.element_string(code) + ")"


def default_aliases(nvars):
    return tuple(f"x{i}" for i in range(nvars))


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\^)|(\*)|(\+)|(-)|(\()|(\)))")


def parse_poly(text: str, spec: FieldSpec, nvars: int, aliases=None) -> MPoly:
    """Parse `+`/`-` separated terms; `*` optional between factors, `^` powers.

    Coefficients are integers, or parenthesised expressions in the field
    generator symbol `g` for non-prime fields, e.g. `(g^2+1)*x*y`.
    """
    aliases = list(aliases or default_aliases(nvars))
    var_index = {a: i for i, a in enumerate(aliases)}
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip():
                raise ParseError(f"bad character at {text[pos:]!r}")
            break
        tokens.append(m)
        pos = m.end()

    terms = {}
    i = 0
    n = len(tokens)

    def tk(j):
        return tokens[j] if j < n else None

    sign = 1
    while i < n:
        m = tk(i)
        if m.group(5):  # +
            sign = 1
            i += 1
            continue
        if m.group(6):  # -
            sign = -1
            i += 1
            continue
        coeff = spec.one.code
        expo = [0] * nvars
        saw_factor = False
        while i < n:
            m = tk(i)
            if m.group(1):  # integer
                c = int(m.group(1)) % spec.p
                coeff = spec.mul(coeff, c) if c else 0
                saw_factor = True
                i += 1
            elif m.group(7):  # ( g-expression )
                depth = 1
                j = i + 1
                inner = []
                while j < n and depth:
                    mj = tk(j)
                    if mj.group(7):
                        depth += 1
                    elif mj.group(8):
                        depth -= 1
                        if depth == 0:
                            break
                    inner.append(mj)
                    j += 1
                if depth:
                    raise ParseError("unbalanced parentheses")
                code = _parse_gexpr(inner, spec)
                coeff = spec.mul(coeff, code) if code else 0
                saw_factor = True
                i = j + 1
            elif m.group(2):  # variable, or the field generator symbol g
                name = m.group(2)
                if name not in var_index and not (name == "g" and spec.k > 1):
                    raise ParseError(f"unknown variable {name!r}")
                power = 1
                i += 1
                if tk(i) and tk(i).group(3):  # ^
                    i += 1
                    if not (tk(i) and tk(i).group(1)):
                        raise ParseError("expected integer exponent after '^'")
                    power = int(tk(i).group(1))
                    i += 1
                if name in var_index:
                    expo[var_index[name]] += power
                else:
                    coeff = spec.mul(coeff, spec.pow(spec.gen.code, power))
                saw_factor = True
            elif m.group(4):  # *
                i += 1
            else:
                break
        if not saw_factor:
            raise ParseError(f"dangling operator in {text!r}")
        if coeff:
            if sign < 0:
                coeff = spec.neg(coeff)
            e = tuple(expo)
            s = spec.add(terms.get(e, 0), coeff)
            if s:
                terms[e] = s
            else:
                terms.pop(e, None)
        sign = 1
    return MPoly(spec, nvars, terms)


def _parse_gexpr(tokens, spec: FieldSpec) -> int:
    """Integer combination of powers of the generator symbol g."""
    if spec.k == 1:
        raise ParseError("generator literals need an extension field")
    acc = 0
    sign = 1
    i = 0
    n = len(tokens)
    while i < n:
        m = tokens[i]
        if m.group(5):
            sign = 1
            i += 1
            continue
        if m.group(6):
            sign = -1
            i += 1
            continue
        c = 1
        power = 0
        saw = False
        while i < n:
            m = tokens[i]
            if m.group(1):
                c = (c * int(m.group(1))) % spec.p
                saw = True
                i += 1
            elif m.group(2):
                if m.group(2) != "g":
                    raise ParseError("field literals use the symbol 'g'")
                power_this = 1
                i += 1
                if i < n and tokens[i].group(3):
                    i += 1
                    if not (i < n and tokens[i].group(1)):
                        raise ParseError("expected exponent after '^'")
                    power_this = int(tokens[i].group(1))
                    i += 1
                power += power_this
                saw = True
            elif m.group(4):
                i += 1
            else:
                break
        if not saw:
            raise ParseError("empty term in field literal")
        code = spec.mul(spec.pow(spec.gen.code, power), c) if c else 0
        if sign < 0:
            code = spec.neg(code)
        acc = spec.add(acc, code)
        sign = 1
    return acc


def parse_homogeneous(text, spec, nvars, aliases=None) -> MPoly:
    f = parse_poly(text, spec, nvars, aliases)
    if not f.is_homogeneous():
        raise HomogeneityError(f"{text!r} is not homogeneous")
    return f


# ---------------------------------------------------------------------------

def normalized_projective_points(spec: FieldSpec, nvars: int):
    """Points of P^{nvars-1}(F) as code tuples, first nonzero coordinate 1.

    Deterministic order: leading index ascending, then tail codes ascending.
    """
    q = spec.q
    for lead in range(nvars):
        tail = nvars - lead - 1
        if q ** tail > gf.ENUMERATION_CAP:
            raise gf.EnumerationCapError(
                f"P^{nvars-1}(F_{q}) exceeds the enumeration cap")
        for rest in product(range(q), repeat=tail):
            yield (0,) * lead + (1,) + rest


def projective_point_count(q: int, n: int) -> int:
    return (q ** (n + 1) - 1) // (q - 1)

"""The built-in theory of Int, Bool and Str, and its decision procedure.

Rather than running completion on the (undecidable in general) full theory,
values are normalized into canonical forms per sort: multivariate integer
polynomials, flattened letter words, and boolean formulas in negation
normal form.  Unknowns (labelled nulls and unconstrained attribute cells)
appear as opaque atoms inside these forms.  Equality modulo a set of
hypotheses is answered tri-state; Unknown is deliberate whenever the
answer would need reasoning outside these fragments (e.g. ordered-ring
arithmetic over nulls).
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from functools import lru_cache

from .kernel import (
    AlgSignature, App, Context, Equation, FunctionSymbol, Presentation, Sort,
    Term, Var, app, ctx, int_literal, is_int_literal, render_term,
)
from .rewrite import EqResult

INT = Sort("Int")
BOOL = Sort("Bool")
STR = Sort("Str")
TYPE_SORTS = (INT, BOOL, STR)

ZERO = FunctionSymbol("0", (), INT)
ONE = FunctionSymbol("1", (), INT)
NEG = FunctionSymbol("-", (INT,), INT)
PLUS = FunctionSymbol("+", (INT, INT), INT)
TIMES = FunctionSymbol("*", (INT, INT), INT)
LE = FunctionSymbol("<=", (INT, INT), BOOL)
TRUE = FunctionSymbol("true", (), BOOL)
FALSE = FunctionSymbol("false", (), BOOL)
NOT = FunctionSymbol("not", (BOOL,), BOOL)
AND = FunctionSymbol("and", (BOOL, BOOL), BOOL)
OR = FunctionSymbol("or", (BOOL, BOOL), BOOL)
EPS = FunctionSymbol("eps", (), STR)
LETTERS = {
    c: FunctionSymbol(f"'{c}'", (), STR)
    for c in string.ascii_lowercase + string.ascii_uppercase
}
CONCAT = FunctionSymbol(".", (STR, STR), STR)
EQS = FunctionSymbol("eq", (STR, STR), BOOL)

TYPE_SYMBOLS = (
    ZERO, ONE, NEG, PLUS, TIMES, LE, TRUE, FALSE, NOT, AND, OR,
    EPS, *LETTERS.values(), CONCAT, EQS,
)


class NonGround(Exception):
    pass


def str_literal(s: str) -> Term:
    """Desugar a literal string to a letter-concatenation term."""
    for c in s:
        if c not in LETTERS:
            raise ValueError(f"only letters a-z, A-Z allowed in string literals: {s!r}")
    if not s:
        return app(EPS)
    out = app(LETTERS[s[-1]])
    for c in reversed(s[:-1]):
        out = app(CONCAT, app(LETTERS[c]), out)
    return out


def int_term(n: int) -> Term:
    return app(int_literal(n))


@lru_cache(maxsize=1)
def builtin_type_theory() -> Presentation:
    sig = AlgSignature(TYPE_SORTS, TYPE_SYMBOLS)
    a, b, g = Var("a"), Var("b"), Var("g")
    x, y, z, w = Var("x"), Var("y"), Var("z"), Var("w")
    s, t, u, v = Var("s"), Var("t"), Var("u"), Var("v")
    cB1 = ctx(("a", BOOL))
    cB2 = ctx(("a", BOOL), ("b", BOOL))
    cB3 = ctx(("a", BOOL), ("b", BOOL), ("g", BOOL))
    cI1 = ctx(("x", INT))
    cI2 = ctx(("x", INT), ("y", INT))
    cI3 = ctx(("x", INT), ("y", INT), ("z", INT))
    cI4 = ctx(("x", INT), ("y", INT), ("z", INT), ("w", INT))
    cS1 = ctx(("s", STR))
    cS2 = ctx(("s", STR), ("t", STR))
    cS3 = ctx(("s", STR), ("t", STR), ("u", STR))
    cS4 = ctx(("s", STR), ("t", STR), ("u", STR), ("v", STR))
    c0 = ctx()

    def E(c, l, r):
        return Equation.checked(c, l, r, sig)

    T, F = app(TRUE), app(FALSE)
    eqs = [
        # boolean algebra (Huntington-complete axiom set)
        E(cB1, app(OR, a, F), a),
        E(cB1, app(AND, a, T), a),
        E(cB2, app(OR, a, b), app(OR, b, a)),
        E(cB2, app(AND, a, b), app(AND, b, a)),
        E(cB1, app(OR, a, app(NOT, a)), T),
        E(cB1, app(AND, a, app(NOT, a)), F),
        E(cB3, app(OR, a, app(AND, b, g)), app(AND, app(OR, a, b), app(OR, a, g))),
        E(cB3, app(AND, a, app(OR, b, g)), app(OR, app(AND, a, b), app(AND, a, g))),
        # commutative ring
        E(cI3, app(PLUS, app(PLUS, x, y), z), app(PLUS, x, app(PLUS, y, z))),
        E(cI1, app(PLUS, x, app(ZERO)), x),
        E(cI2, app(PLUS, x, y), app(PLUS, y, x)),
        E(cI1, app(PLUS, x, app(NEG, x)), app(ZERO)),
        E(cI3, app(TIMES, app(TIMES, x, y), z), app(TIMES, x, app(TIMES, y, z))),
        E(cI1, app(TIMES, x, app(ONE)), x),
        E(cI2, app(TIMES, x, y), app(TIMES, y, x)),
        E(cI3, app(TIMES, x, app(PLUS, y, z)),
          app(PLUS, app(TIMES, x, y), app(TIMES, x, z))),
        # totally pre-ordered ring
        E(cI3, app(OR, app(NOT, app(AND, app(LE, x, y), app(LE, y, z))),
                 app(LE, x, z)), T),
        E(cI2, app(OR, app(LE, x, y), app(LE, y, x)), T),
        E(cI4, app(OR, app(NOT, app(AND, app(LE, x, y), app(LE, z, w))),
                 app(LE, app(PLUS, x, z), app(PLUS, y, w))), T),
        E(cI3, app(OR, app(NOT, app(AND, app(LE, x, y), app(LE, app(ZERO), z))),
                 app(LE, app(TIMES, x, z), app(TIMES, y, z))), T),
        E(cI3, app(OR, app(NOT, app(AND, app(LE, app(TIMES, x, z), app(TIMES, y, z)),
                                    app(LE, app(ZERO), z))),
                 app(LE, x, y)), T),
        E(c0, app(LE, app(ONE), app(ZERO)), app(NOT, T)),
        # free monoid
        E(cS1, app(CONCAT, s, app(EPS)), s),
        E(cS1, app(CONCAT, app(EPS), s), s),
        E(cS3, app(CONCAT, app(CONCAT, s, t), u), app(CONCAT, s, app(CONCAT, t, u))),
        # eq is a congruence
        E(cS1, app(EQS, s, s), T),
        E(cS2, app(EQS, s, t), app(EQS, t, s)),
        E(cS3, app(OR, app(NOT, app(AND, app(EQS, s, t), app(EQS, t, u))),
                 app(EQS, s, u)), T),
        E(cS4, app(OR, app(NOT, app(AND, app(EQS, s, t), app(EQS, u, v))),
                 app(EQS, app(CONCAT, s, u), app(CONCAT, t, v))), T),
        # decidable equality
        E(cS3, app(EQS, app(CONCAT, s, u), app(CONCAT, t, u)), app(EQS, s, t)),
        E(cS3, app(EQS, app(CONCAT, s, t), app(CONCAT, s, u)), app(EQS, t, u)),
    ]
    letters = list(LETTERS.values())
    for i, c1 in enumerate(letters):
        for c2 in letters:
            if c1 is c2:
                continue
            eqs.append(E(cS2, app(EQS, app(CONCAT, s, app(c1)), app(CONCAT, t, app(c2))),
                         app(NOT, T)))
            eqs.append(E(cS2, app(EQS, app(CONCAT, app(c1), s), app(CONCAT, app(c2), t)),
                         app(NOT, T)))
        eqs.append(E(cS1, app(EQS, app(CONCAT, s, app(c1)), app(EPS)), app(NOT, T)))
        eqs.append(E(cS1, app(EQS, app(CONCAT, app(c1), s), app(EPS)), app(NOT, T)))
    return Presentation(sig, tuple(eqs))


# --- canonical values ---------------------------------------------------


def _atom_key(t: Term):
    if isinstance(t, Var):
        return (0, t.name)
    return (1, t.symbol.name) + tuple(_atom_key(a) for a in t.args)


@dataclass(frozen=True)
class IntPoly:
    """Multivariate polynomial over opaque atoms; monomials sorted."""

    # tuple of (monomial, coeff); monomial = tuple of (atom, power)
    terms: tuple[tuple[tuple[tuple[Term, int], ...], int], ...]

    @staticmethod
    def const(n: int) -> "IntPoly":
        return IntPoly(((() , n),)) if n else IntPoly(())

    @staticmethod
    def atom(t: Term) -> "IntPoly":
        return IntPoly(((((t, 1),), 1),))

    def _as_dict(self):
        return dict(self.terms)

    @staticmethod
    def _from_dict(d) -> "IntPoly":
        items = [(m, c) for m, c in d.items() if c != 0]
        items.sort(key=lambda mc: tuple((_atom_key(a), p) for a, p in mc[0]))
        return IntPoly(tuple(items))

    def add(self, other: "IntPoly") -> "IntPoly":
        d = self._as_dict()
        for m, c in other.terms:
            d[m] = d.get(m, 0) + c
        return IntPoly._from_dict(d)

    def neg(self) -> "IntPoly":
        return IntPoly(tuple((m, -c) for m, c in self.terms))

    def mul(self, other: "IntPoly") -> "IntPoly":
        d: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                pw: dict[Term, int] = {}
                for a, p in m1 + m2:
                    pw[a] = pw.get(a, 0) + p
                m = tuple(sorted(pw.items(), key=lambda ap: _atom_key(ap[0])))
                d[m] = d.get(m, 0) + c1 * c2
        return IntPoly._from_dict(d)

    def is_const(self) -> bool:
        return all(m == () for m, _ in self.terms)

    def const_value(self) -> int:
        assert self.is_const()
        return self.terms[0][1] if self.terms else 0

    def atoms(self) -> set[Term]:
        return {a for m, _ in self.terms for a, _ in m}

    def render(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self.terms:
            body = " * ".join(
                render_term(a) if p == 1 else f"{render_term(a)}^{p}" for a, p in m
            )
            if not m:
                parts.append(str(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{c} * {body}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


@dataclass(frozen=True)
class StrWord:
    """Flattened concatenation: literal letters and opaque atoms."""

    items: tuple[tuple[str, object], ...]  # ('lit', char) | ('atom', Term)

    @staticmethod
    def lit(s: str) -> "StrWord":
        return StrWord(tuple(("lit", c) for c in s))

    @staticmethod
    def atom(t: Term) -> "StrWord":
        return StrWord((("atom", t),))

    def concat(self, other: "StrWord") -> "StrWord":
        return StrWord(self.items + other.items)

    def is_literal(self) -> bool:
        return all(k == "lit" for k, _ in self.items)

    def literal_value(self) -> str:
        assert self.is_literal()
        return "".join(c for _, c in self.items)  # type: ignore[misc]

    def atoms(self) -> set[Term]:
        return {t for k, t in self.items if k == "atom"}  # type: ignore[misc]

    def key(self):
        return tuple(
            (0, v) if k == "lit" else (1, _atom_key(v)) for k, v in self.items
        )

    def render(self) -> str:
        if self.is_literal():
            return '"' + self.literal_value() + '"'
        parts, buf = [], ""
        for k, v in self.items:
            if k == "lit":
                buf += v  # type: ignore[operator]
            else:
                if buf:
                    parts.append(f'"{buf}"')
                    buf = ""
                parts.append(render_term(v))  # type: ignore[arg-type]
        if buf:
            parts.append(f'"{buf}"')
        return " . ".join(parts) if parts else '""'


class BoolForm:
    __slots__ = ()

    def atoms(self) -> set[Term]:
        return set()


@dataclass(frozen=True)
class BConst(BoolForm):
    value: bool

    def render(self):
        return "true" if self.value else "false"


BTRUE, BFALSE = BConst(True), BConst(False)


@dataclass(frozen=True)
class BAtom(BoolForm):
    positive: bool
    kind: str          # 'var' | 'le' | 'eq'
    payload: tuple

    def flip(self) -> "BAtom":
        return BAtom(not self.positive, self.kind, self.payload)

    def atoms(self) -> set[Term]:
        if self.kind == "var":
            return {self.payload[0]}
        if self.kind == "le":
            out = set()
            for p in self.payload:
                out |= p.atoms()
            return out
        out = set()
        for w in self.payload:
            out |= w.atoms()
        return out

    def key(self):
        if self.kind == "var":
            pk = _atom_key(self.payload[0])
        elif self.kind == "le":
            pk = tuple(p.terms for p in self.payload)
        else:
            pk = tuple(w.key() for w in self.payload)
        return (self.kind, repr(pk), self.positive)

    def render(self):
        if self.kind == "var":
            body = render_term(self.payload[0])
        elif self.kind == "le":
            l, r = self.payload
            if l.terms and all(c < 0 for _, c in l.terms):
                l, r = r.neg(), l.neg()
            body = f"({l.render()} <= {r.render()})"
        else:
            l, r = self.payload
            body = f"eq({l.render()}, {r.render()})"
        return body if self.positive else f"not {body}"


@dataclass(frozen=True)
class BNode(BoolForm):
    op: str  # 'and' | 'or'
    args: tuple[BoolForm, ...]

    def atoms(self) -> set[Term]:
        out: set[Term] = set()
        for a in self.args:
            out |= a.atoms()
        return out

    def key(self):
        return (self.op, tuple(_form_key(a) for a in self.args))

    def render(self):
        sep = " and " if self.op == "and" else " or "
        return "(" + sep.join(a.render() for a in self.args) + ")"


def _form_key(f: BoolForm):
    if isinstance(f, BConst):
        return (0, f.value)
    if isinstance(f, BAtom):
        return (1,) + f.key()
    assert isinstance(f, BNode)
    return (2,) + f.key()


def _bnode(op: str, args) -> BoolForm:
    unit = BTRUE if op == "and" else BFALSE
    kill = BFALSE if op == "and" else BTRUE
    flat: list[BoolForm] = []
    for a in args:
        if a == kill:
            return kill
        if a == unit:
            continue
        if isinstance(a, BNode) and a.op == op:
            flat.extend(a.args)
        else:
            flat.append(a)
    uniq: list[BoolForm] = []
    for a in sorted(flat, key=_form_key):
        if not uniq or uniq[-1] != a:
            uniq.append(a)
    # complement pair
    for a in uniq:
        if isinstance(a, BAtom) and a.flip() in uniq:
            return kill
    if not uniq:
        return unit
    if len(uniq) == 1:
        return uniq[0]
    return BNode(op, tuple(uniq))


def _bnot(f: BoolForm) -> BoolForm:
    if isinstance(f, BConst):
        return BConst(not f.value)
    if isinstance(f, BAtom):
        return f.flip()
    assert isinstance(f, BNode)
    return _bnode("or" if f.op == "and" else "and", [_bnot(a) for a in f.args])


def _le_atom(l: IntPoly, r: IntPoly) -> BoolForm:
    if l.is_const() and r.is_const():
        return BConst(l.const_value() <= r.const_value())
    # canonical offset: move the shared part to the right-hand side
    diff = l.add(r.neg())
    if diff.is_const():
        return BConst(diff.const_value() <= 0)
    # split diff = nonconst + c as (nonconst <= -c)
    const = sum(c for m, c in diff.terms if m == ())
    lhs = IntPoly(tuple((m, c) for m, c in diff.terms if m != ()))
    return BAtom(True, "le", (lhs, IntPoly.const(-const)))


def _eq_atom(l: StrWord, r: StrWord) -> BoolForm:
    # strip common prefix/suffix (decidable-equality axioms)
    li, ri = list(l.items), list(r.items)
    while li and ri and li[0] == ri[0]:
        li.pop(0)
        ri.pop(0)
    while li and ri and li[-1] == ri[-1]:
        li.pop()
        ri.pop()
    lw, rw = StrWord(tuple(li)), StrWord(tuple(ri))
    if not lw.items and not rw.items:
        return BTRUE
    if lw.is_literal() and rw.is_literal():
        return BConst(lw.literal_value() == rw.literal_value())
    # mismatched literal boundary letters are provably unequal
    for a, b in ((li, ri),):
        if a and b:
            for end in (0, -1):
                x, y = a[end], b[end]
                if x[0] == "lit" and y[0] == "lit" and x[1] != y[1]:
                    return BFALSE
    if (lw.is_literal() and not lw.items and rw.items) or \
       (rw.is_literal() and not rw.items and lw.items):
        pass
    pair = sorted((lw, rw), key=lambda w: w.key())
    return BAtom(True, "eq", (pair[0], pair[1]))


CanonicalValue = object  # IntPoly | StrWord | BoolForm


class TypeAlgebra:
    """A presented algebra over the built-in theory: labelled-null context
    plus ground-with-nulls hypothesis equations."""

    def __init__(self, nulls: Context = Context(), hypotheses=()):
        self.nulls = nulls
        self.hypotheses = tuple(hypotheses)
        self.inconsistent = False
        self._subst: dict[Term, CanonicalValue] = {}
        self._facts: dict[BoolForm, BoolForm] = {}
        self._rewrites: list[tuple[CanonicalValue, CanonicalValue]] = []
        self._compile()

    def _compile(self):
        plain = TypeAlgebra.__new__(TypeAlgebra)
        plain.nulls = self.nulls
        plain.inconsistent = False
        plain._subst, plain._facts, plain._rewrites = {}, {}, []
        pending = [(ts_normalize(e.lhs, plain), ts_normalize(e.rhs, plain))
                   for e in self.hypotheses]
        for _ in range(len(pending) + 4):  # fixpoint over substitution chains
            rest = []
            for l, r in pending:
                l, r = self._resubst(l), self._resubst(r)
                if l == r:
                    continue
                if not _value_atoms(l) and not _value_atoms(r):
                    self.inconsistent = True
                    continue
                if not self._try_subst(l, r) and not self._try_subst(r, l):
                    rest.append((l, r))
            pending = rest
            if not pending:
                break
        for l, r in pending:
            if isinstance(l, BoolForm) and isinstance(r, BConst):
                self._facts[l] = r
            elif isinstance(r, BoolForm) and isinstance(l, BConst):
                self._facts[r] = l
            else:
                big, small = sorted((l, r), key=_value_weight, reverse=True)
                self._rewrites.append((big, small))

    def _try_subst(self, side: CanonicalValue, value: CanonicalValue) -> bool:
        atom = _bare_atom(side)
        if atom is None:
            return False
        if atom in _value_atoms(value):
            return False
        if _value_weight(value) > _value_weight(side):
            return False
        self._subst[atom] = value
        return True

    def _resubst(self, v: CanonicalValue) -> CanonicalValue:
        return _apply_subst(v, self._subst)

    def lookup_atom(self, t: Term) -> CanonicalValue | None:
        return self._subst.get(t)

    def simplify(self, v: CanonicalValue) -> CanonicalValue:
        v = _apply_subst(v, self._subst)
        for _ in range(len(self._rewrites) + len(self._facts) + 2):
            before = v
            v = _apply_facts(v, self._facts)
            for big, small in self._rewrites:
                if v == big:
                    v = small
            if v == before:
                return v
        return v

    def free_atoms(self) -> list[Term]:
        return [Var(n) for n, _ in self.nulls.bindings if Var(n) not in self._subst]

    def residual_constraints(self) -> list[str]:
        """The compiled non-definitional content: boolean facts and
        unoriented value identifications, rendered."""
        out = []
        for form, truth in self._facts.items():
            out.append(f"{form.render()} = {truth.render()}")
        for big, small in self._rewrites:
            out.append(f"{big.render()} = {small.render()}")
        return sorted(set(out))


def _bare_atom(v: CanonicalValue) -> Term | None:
    if isinstance(v, IntPoly) and len(v.terms) == 1:
        m, c = v.terms[0]
        if c == 1 and len(m) == 1 and m[0][1] == 1:
            return m[0][0]
    if isinstance(v, StrWord) and len(v.items) == 1 and v.items[0][0] == "atom":
        return v.items[0][1]  # type: ignore[return-value]
    if isinstance(v, BAtom) and v.positive and v.kind == "var":
        return v.payload[0]
    return None


def _value_atoms(v: CanonicalValue) -> set[Term]:
    return v.atoms() if hasattr(v, "atoms") else set()


def _value_weight(v: CanonicalValue):
    """Preference order for representatives: constants, then nulls, then
    compounds; ties by size then rendering."""
    atoms = _value_atoms(v)
    if not atoms:
        cls = 0
    elif _bare_atom(v) is not None:
        a = _bare_atom(v)
        cls = 1 if isinstance(a, Var) else 2
    else:
        cls = 3
    return (cls, len(repr(v)), repr(v))


def _apply_subst(v, subst: dict[Term, CanonicalValue]):
    if not subst:
        return v
    if isinstance(v, IntPoly):
        out = IntPoly.const(0)
        for m, c in v.terms:
            part = IntPoly.const(c)
            for a, p in m:
                rep = subst.get(a)
                base = rep if isinstance(rep, IntPoly) else IntPoly.atom(a)
                for _ in range(p):
                    part = part.mul(base)
            out = out.add(part)
        return out
    if isinstance(v, StrWord):
        items: list = []
        for k, x in v.items:
            if k == "atom" and isinstance(subst.get(x), StrWord):
                items.extend(subst[x].items)  # type: ignore[union-attr]
            else:
                items.append((k, x))
        return StrWord(tuple(items))
    if isinstance(v, BConst):
        return v
    if isinstance(v, BAtom):
        if v.kind == "var":
            rep = subst.get(v.payload[0])
            if isinstance(rep, BoolForm):
                return rep if v.positive else _bnot(rep)
            return v
        if v.kind == "le":
            l, r = (_apply_subst(p, subst) for p in v.payload)
            out = _le_atom(l, r)
            return out if v.positive else _bnot(out)
        l, r = (_apply_subst(w, subst) for w in v.payload)
        out = _eq_atom(l, r)
        return out if v.positive else _bnot(out)
    if isinstance(v, BNode):
        return _bnode(v.op, [_apply_subst(a, subst) for a in v.args])
    return v


def _apply_facts(v, facts: dict[BoolForm, BoolForm]):
    if not isinstance(v, BoolForm) or not facts:
        return v
    got = facts.get(v)
    if got is not None:
        return got
    if isinstance(v, BAtom):
        flipped = facts.get(v.flip())
        if flipped is not None:
            return _bnot(flipped)
        return v
    if isinstance(v, BNode):
        return _bnode(v.op, [_apply_facts(a, facts) for a in v.args])
    return v


def ts_normalize(term: Term, alg: TypeAlgebra | None = None) -> CanonicalValue:
    """Canonical form of a type-sorted term whose entity parts are already
    resolved (remaining non-type applications act as opaque atoms)."""
    if alg is None:
        alg = _EMPTY_ALGEBRA
    v = _canon(term, alg)
    return alg.simplify(v)


def _canon(term: Term, alg: TypeAlgebra) -> CanonicalValue:
    if isinstance(term, Var):
        got = alg.lookup_atom(term)
        if got is not None:
            return got
        try:
            s = alg.nulls.sort_of(term.name)
        except Exception:
            s = None
        if s == STR:
            return StrWord.atom(term)
        if s == BOOL:
            return BAtom(True, "var", (term,))
        return IntPoly.atom(term)
    assert isinstance(term, App)
    sym = term.symbol
    if is_type_symbol(sym):
        return apply_symbol(sym, [_canon(a, alg) for a in term.args], alg)
    # opaque atom (e.g. an attribute applied to a row constant)
    got = alg.lookup_atom(term)
    if got is not None:
        return got
    return opaque_atom(term, sym.cod)


def is_type_symbol(sym: FunctionSymbol) -> bool:
    return sym in _TYPE_SYMBOL_SET or is_int_literal(sym)


_TYPE_SYMBOL_SET = frozenset(TYPE_SYMBOLS)
_LETTER_SET = frozenset(LETTERS.values())


def opaque_atom(term: Term, sort: Sort) -> CanonicalValue:
    if sort == STR:
        return StrWord.atom(term)
    if sort == BOOL:
        return BAtom(True, "var", (term,))
    return IntPoly.atom(term)


def apply_symbol(sym: FunctionSymbol, args: list,
                 alg: "TypeAlgebra | None" = None) -> CanonicalValue:
    """Apply a built-in type symbol to canonical values."""
    if alg is None:
        alg = _EMPTY_ALGEBRA
    if is_int_literal(sym):
        return IntPoly.const(int(sym.name))
    if sym == ZERO:
        return IntPoly.const(0)
    if sym == ONE:
        return IntPoly.const(1)
    if sym == NEG:
        return _as_poly(args[0]).neg()
    if sym == PLUS:
        return _as_poly(args[0]).add(_as_poly(args[1]))
    if sym == TIMES:
        return _as_poly(args[0]).mul(_as_poly(args[1]))
    if sym == LE:
        return alg.simplify(_le_atom(_as_poly(args[0]), _as_poly(args[1])))
    if sym == TRUE:
        return BTRUE
    if sym == FALSE:
        return BFALSE
    if sym == NOT:
        return _bnot(_as_bool(args[0]))
    if sym in (AND, OR):
        return _bnode("and" if sym == AND else "or",
                      [_as_bool(a) for a in args])
    if sym == EPS:
        return StrWord(())
    if sym in _LETTER_SET:
        return StrWord.lit(sym.name[1])
    if sym == CONCAT:
        return _as_word(args[0]).concat(_as_word(args[1]))
    if sym == EQS:
        return alg.simplify(_eq_atom(_as_word(args[0]), _as_word(args[1])))
    raise ValueError(f"not a type symbol: {sym}")


def _as_poly(v) -> IntPoly:
    assert isinstance(v, IntPoly), f"expected Int value, got {v!r}"
    return v


def _as_word(v) -> StrWord:
    assert isinstance(v, StrWord), f"expected Str value, got {v!r}"
    return v


def _as_bool(v) -> BoolForm:
    assert isinstance(v, BoolForm), f"expected Bool value, got {v!r}"
    return v


_EMPTY_ALGEBRA = TypeAlgebra()


def eval_ground(term: Term) -> CanonicalValue:
    v = ts_normalize(term)
    if _value_atoms(v):
        raise NonGround(render_term(term))
    return v


def ts_decide(t1: Term, t2: Term, alg: TypeAlgebra | None = None) -> EqResult:
    v1, v2 = ts_normalize(t1, alg), ts_normalize(t2, alg)
    return decide_values(v1, v2)


def decide_values(v1: CanonicalValue, v2: CanonicalValue) -> EqResult:
    if v1 == v2:
        return EqResult.Equal
    ground1, ground2 = not _value_atoms(v1), not _value_atoms(v2)
    if ground1 and ground2:
        return EqResult.NotEqual
    # distinct literal boundary letters separate words even around atoms
    if isinstance(v1, StrWord) and isinstance(v2, StrWord):
        if _eq_atom(v1, v2) == BFALSE:
            return EqResult.NotEqual
    return EqResult.Unknown


def render_value(v: CanonicalValue) -> str:
    return v.render()  # type: ignore[union-attr]


def map_value_atoms(v: CanonicalValue, fn) -> CanonicalValue:
    """Rebuild a canonical value with every opaque atom replaced by
    fn(atom) -> CanonicalValue."""
    subst = {a: fn(a) for a in _value_atoms(v)}
    return _apply_subst(v, subst)


def value_sort(v: CanonicalValue) -> Sort:
    if isinstance(v, IntPoly):
        return INT
    if isinstance(v, StrWord):
        return STR
    return BOOL


def _poly_to_term(p: IntPoly, atom_fn) -> Term:
    def mono(m, c) -> Term:
        factors: list[Term] = []
        if c != 1 or not m:
            factors.append(app(int_literal(c)) if c >= 0
                           else app(NEG, app(int_literal(-c))))
        for a, pw in m:
            for _ in range(pw):
                factors.append(atom_fn(a))
        out = factors[0]
        for f in factors[1:]:
            out = app(TIMES, out, f)
        return out

    if not p.terms:
        return app(int_literal(0))
    out = mono(*p.terms[0])
    for m, c in p.terms[1:]:
        out = app(PLUS, out, mono(m, c))
    return out


def _word_to_term(w: StrWord, atom_fn) -> Term:
    if not w.items:
        return app(EPS)
    parts = [app(LETTERS[v]) if k == "lit" else atom_fn(v)
             for k, v in w.items]
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = app(CONCAT, p, out)
    return out


def _form_to_term(f: BoolForm, atom_fn) -> Term:
    if isinstance(f, BConst):
        return app(TRUE) if f.value else app(FALSE)
    if isinstance(f, BAtom):
        if f.kind == "var":
            body = atom_fn(f.payload[0])
        elif f.kind == "le":
            body = app(LE, _poly_to_term(f.payload[0], atom_fn),
                       _poly_to_term(f.payload[1], atom_fn))
        else:
            body = app(EQS, _word_to_term(f.payload[0], atom_fn),
                       _word_to_term(f.payload[1], atom_fn))
        return body if f.positive else app(NOT, body)
    assert isinstance(f, BNode)
    sym = AND if f.op == "and" else OR
    parts = [_form_to_term(a, atom_fn) for a in f.args]
    out = parts[0]
    for p in parts[1:]:
        out = app(sym, out, p)
    return out


def value_to_term(v: CanonicalValue, atom_fn=None) -> Term:
    """Convert a canonical value back to a term; atoms pass through
    atom_fn (default: kept as-is)."""
    if atom_fn is None:
        atom_fn = lambda a: a  # noqa: E731
    if isinstance(v, IntPoly):
        return _poly_to_term(v, atom_fn)
    if isinstance(v, StrWord):
        return _word_to_term(v, atom_fn)
    assert isinstance(v, BoolForm)
    return _form_to_term(v, atom_fn)

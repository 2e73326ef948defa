"""Multi-sorted term syntax: signatures, contexts, terms, substitution.

Everything downstream (rewriting, schemas, instances, migration) is built
from the values defined here.  All values are immutable and hashable, so
structural equality is cheap and terms can be used as dict keys freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator


class KernelError(Exception):
    pass


class UnknownVariable(KernelError):
    pass


class UnknownSymbol(KernelError):
    pass


class AritySortMismatch(KernelError):
    pass


class SortMismatch(KernelError):
    pass


class ContextMismatch(KernelError):
    pass


@dataclass(frozen=True)
class Sort:
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    dom: tuple[Sort, ...]
    cod: Sort

    @property
    def arity(self) -> int:
        return len(self.dom)

    def __repr__(self):
        dom = ",".join(s.name for s in self.dom)
        return f"{self.name}:({dom})->{self.cod.name}"


@lru_cache(maxsize=None)
def int_literal(value: int) -> FunctionSymbol:
    """Nullary symbol denoting an arbitrary-precision integer constant."""
    return FunctionSymbol(str(value), (), Sort("Int"))


def is_int_literal(sym: FunctionSymbol) -> bool:
    n = sym.name
    return sym.arity == 0 and (n.isdigit() or (n.startswith("-") and n[1:].isdigit()))


class AlgSignature:
    """A set of sorts plus function symbols, in declaration order."""

    def __init__(self, sorts=(), symbols=()):
        self.sorts: dict[str, Sort] = {}
        self.symbols: dict[str, FunctionSymbol] = {}
        for s in sorts:
            self.add_sort(s)
        for f in symbols:
            self.add_symbol(f)

    def add_sort(self, s: Sort):
        if s.name in self.sorts and self.sorts[s.name] != s:
            raise KernelError(f"duplicate sort name {s.name}")
        self.sorts.setdefault(s.name, s)

    def add_symbol(self, f: FunctionSymbol):
        if f.name in self.symbols:
            if self.symbols[f.name] != f:
                raise KernelError(f"duplicate symbol name {f.name}")
            return
        for s in (*f.dom, f.cod):
            if s.name not in self.sorts:
                raise KernelError(f"symbol {f.name} uses unknown sort {s.name}")
        self.symbols[f.name] = f

    def has_symbol(self, sym: FunctionSymbol) -> bool:
        if self.symbols.get(sym.name) == sym:
            return True
        # Integer constants are admitted wherever the Int sort exists.
        return is_int_literal(sym) and "Int" in self.sorts

    def declaration_index(self, sym: FunctionSymbol) -> int:
        try:
            return list(self.symbols).index(sym.name)
        except ValueError:
            return -1  # literals sort below every declared symbol

    def __repr__(self):
        return f"AlgSignature(sorts={list(self.sorts)}, symbols={list(self.symbols)})"


class Term:
    __slots__ = ()


@dataclass(frozen=True)
class Var(Term):
    name: str

    def __repr__(self):
        return self.name


@dataclass(frozen=True)
class App(Term):
    symbol: FunctionSymbol
    args: tuple[Term, ...] = ()
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash((self.symbol.name, self.args)))

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return render_term(self)


def app(sym: FunctionSymbol, *args: Term) -> App:
    return App(sym, tuple(args))


def render_term(t: Term) -> str:
    """Print a term, using postfix path sugar for nested unary applications."""
    if isinstance(t, Var):
        return t.name
    assert isinstance(t, App)
    if t.symbol.arity == 1:
        return f"{render_term(t.args[0])}.{t.symbol.name}"
    if t.symbol.arity == 0:
        return t.symbol.name
    inner = ", ".join(render_term(a) for a in t.args)
    return f"{t.symbol.name}({inner})"


@dataclass(frozen=True)
class Context:
    bindings: tuple[tuple[str, Sort], ...] = ()

    def __post_init__(self):
        names = [n for n, _ in self.bindings]
        if len(set(names)) != len(names):
            raise KernelError(f"duplicate variable in context: {names}")

    def sort_of(self, name: str) -> Sort:
        for n, s in self.bindings:
            if n == name:
                return s
        raise UnknownVariable(name)

    def __contains__(self, name: str) -> bool:
        return any(n == name for n, _ in self.bindings)

    def names(self) -> list[str]:
        return [n for n, _ in self.bindings]

    def extend(self, other: "Context") -> "Context":
        """Concatenate, freshening clashing names with a numeric suffix."""
        taken = set(self.names())
        out = list(self.bindings)
        for n, s in other.bindings:
            fresh = n
            i = 1
            while fresh in taken:
                fresh = f"{n}_{i}"
                i += 1
            taken.add(fresh)
            out.append((fresh, s))
        return Context(tuple(out))

    def __repr__(self):
        return "(" + ", ".join(f"{n}:{s.name}" for n, s in self.bindings) + ")"


def ctx(*bindings: tuple[str, Sort]) -> Context:
    return Context(tuple(bindings))


def well_sort_check(term: Term, context: Context, sig: AlgSignature) -> Sort:
    """Return the sort of `term`, or raise naming the offending subterm."""
    if isinstance(term, Var):
        return context.sort_of(term.name)
    assert isinstance(term, App)
    sym = term.symbol
    if not sig.has_symbol(sym):
        raise UnknownSymbol(f"{sym.name} in {render_term(term)}")
    if len(term.args) != sym.arity:
        raise AritySortMismatch(
            f"{sym.name} expects {sym.arity} arguments in {render_term(term)}"
        )
    for arg, want in zip(term.args, sym.dom):
        got = well_sort_check(arg, context, sig)
        if got != want:
            raise AritySortMismatch(
                f"argument {render_term(arg)} of {sym.name} has sort "
                f"{got.name}, expected {want.name}"
            )
    return sym.cod


@dataclass(frozen=True)
class Equation:
    context: Context
    lhs: Term
    rhs: Term
    sort: Sort

    @staticmethod
    def checked(context: Context, lhs: Term, rhs: Term, sig: AlgSignature) -> "Equation":
        sl = well_sort_check(lhs, context, sig)
        sr = well_sort_check(rhs, context, sig)
        if sl != sr:
            raise SortMismatch(
                f"equation sides have sorts {sl.name} and {sr.name}: "
                f"{render_term(lhs)} = {render_term(rhs)}"
            )
        return Equation(context, lhs, rhs, sl)

    def __repr__(self):
        return f"{self.context} |- {render_term(self.lhs)} = {render_term(self.rhs)}"


@dataclass(frozen=True)
class Presentation:
    signature: AlgSignature
    equations: tuple[Equation, ...]


@dataclass(frozen=True)
class ContextMorphism:
    """Assignment of a source-context term to each target-context variable."""

    source: Context
    target: Context
    assignment: tuple[tuple[str, Term], ...]

    def __post_init__(self):
        assigned = {n for n, _ in self.assignment}
        wanted = set(self.target.names())
        if assigned != wanted:
            raise ContextMismatch(
                f"assignment covers {sorted(assigned)}, target needs {sorted(wanted)}"
            )

    def __call__(self, name: str) -> Term:
        for n, t in self.assignment:
            if n == name:
                return t
        raise UnknownVariable(name)

    def as_dict(self) -> dict[str, Term]:
        return dict(self.assignment)

    @staticmethod
    def make(source: Context, target: Context, mapping: dict[str, Term]) -> "ContextMorphism":
        return ContextMorphism(
            source, target, tuple((n, mapping[n]) for n in target.names())
        )

    @staticmethod
    def identity(context: Context) -> "ContextMorphism":
        return ContextMorphism(
            context, context, tuple((n, Var(n)) for n in context.names())
        )

    def check(self, sig: AlgSignature):
        for n, t in self.assignment:
            want = self.target.sort_of(n)
            got = well_sort_check(t, self.source, sig)
            if got != want:
                raise SortMismatch(f"{n} := {render_term(t)} has sort {got.name}, expected {want.name}")

    def __repr__(self):
        parts = ", ".join(f"{n} := {render_term(t)}" for n, t in self.assignment)
        return f"[{parts}]"


def substitute(term: Term, m: ContextMorphism) -> Term:
    """Simultaneous substitution t[x_i := m(x_i)]."""
    d = m.as_dict()
    return _subst(term, d)


def subst_map(term: Term, mapping: dict[str, Term]) -> Term:
    return _subst(term, mapping)


def _subst(term: Term, d: dict[str, Term]) -> Term:
    if isinstance(term, Var):
        if term.name not in d:
            raise UnknownVariable(term.name)
        return d[term.name]
    assert isinstance(term, App)
    if not term.args:
        return term
    return App(term.symbol, tuple(_subst(a, d) for a in term.args))


def compose_ctx_morphisms(f: ContextMorphism, g: ContextMorphism) -> ContextMorphism:
    """(g after f)(y) = substitute(g(y), f), for f: Gamma -> Theta, g: Theta -> Psi."""
    if f.target != g.source:
        raise ContextMismatch(f"cannot compose {f.target} with {g.source}")
    return ContextMorphism(
        f.source, g.target, tuple((n, substitute(t, f)) for n, t in g.assignment)
    )


def term_height(t: Term) -> int:
    if isinstance(t, Var):
        return 0
    assert isinstance(t, App)
    if not t.args:
        return 1
    return 1 + max(term_height(a) for a in t.args)


def term_size(t: Term) -> int:
    if isinstance(t, Var):
        return 1
    return 1 + sum(term_size(a) for a in t.args)


def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    out: set[str] = set()
    for a in t.args:
        out |= term_vars(a)
    return out


def term_key(t: Term) -> tuple:
    """Deterministic ordering key: height first, then a lexicographic spine."""
    return (term_height(t), term_size(t), _spine(t))


def _spine(t: Term) -> tuple:
    if isinstance(t, Var):
        return (0, t.name)
    return (1, t.symbol.name) + tuple(_spine(a) for a in t.args)


def enumerate_terms(sig: AlgSignature, context: Context, sort: Sort,
                    size_bound: int) -> list[Term]:
    """All well-sorted terms of `sort` with syntax-tree height <= size_bound.

    Deterministic: ordered by height, then symbol declaration order, then
    argument order.
    """
    by_height: dict[Sort, list[list[Term]]] = {s: [] for s in sig.sorts.values()}
    seen: dict[Sort, set[Term]] = {s: set() for s in sig.sorts.values()}

    def level(s: Sort, h: int) -> list[Term]:
        return by_height[s][h] if h < len(by_height[s]) else []

    def upto(s: Sort, h: int) -> list[Term]:
        out = []
        for i in range(min(h + 1, len(by_height[s]))):
            out.extend(by_height[s][i])
        return out

    # height 0: variables
    for s in sig.sorts.values():
        lvl = []
        for n, vs in context.bindings:
            if vs == s:
                lvl.append(Var(n))
        by_height[s].append(lvl)
        seen[s].update(lvl)

    for h in range(1, size_bound + 1):
        new: dict[Sort, list[Term]] = {s: [] for s in sig.sorts.values()}
        for sym in sig.symbols.values():
            if sym.arity == 0:
                if h == 1:
                    t = App(sym)
                    if t not in seen[sym.cod]:
                        new[sym.cod].append(t)
                        seen[sym.cod].add(t)
                continue
            # argument tuples whose max height is exactly h - 1
            pools = [upto(d, h - 1) for d in sym.dom]
            if any(not p for p in pools):
                continue
            for args in _product(pools):
                if max(term_height(a) for a in args) != h - 1:
                    continue
                t = App(sym, args)
                if t not in seen[sym.cod]:
                    new[sym.cod].append(t)
                    seen[sym.cod].add(t)
        for s in sig.sorts.values():
            by_height[s].append(new[s])

    return upto(sort, size_bound)


def _product(pools: list[list[Term]]) -> Iterator[tuple[Term, ...]]:
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest

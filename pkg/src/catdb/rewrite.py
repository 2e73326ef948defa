"""Word problems for presented theories: orientation, completion, normal forms.

Equations are oriented with a lexicographic path order whose precedence is
the reverse of symbol declaration order (the last declared symbol is the
greatest).  Completion is the unfailing flavour: unorientable equations are
kept and used for ordered rewriting instead of aborting the run.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .kernel import (
    AlgSignature, App, Context, Equation, Presentation, Term, Var,
    render_term, subst_map, term_key, term_size, term_vars,
)


class BudgetExceeded(Exception):
    pass


class EqResult(Enum):
    Equal = "Equal"
    NotEqual = "NotEqual"
    Unknown = "Unknown"


DEFAULT_CP_BUDGET = 10_000
DEFAULT_STEP_BUDGET = 100_000


class TermOrder:
    """Lexicographic path order over a total symbol precedence."""

    def __init__(self, sig: AlgSignature, precedence: list[str] | None = None):
        if precedence is None:
            precedence = list(reversed(list(sig.symbols)))
        self._rank = {name: i for i, name in enumerate(reversed(precedence))}

    def _prec(self, name: str) -> int:
        # Undeclared symbols (integer literals) rank below everything,
        # tie-broken by name so the order stays total.
        return self._rank.get(name, -1)

    def greater(self, s: Term, t: Term) -> bool:
        if s == t:
            return False
        if isinstance(s, Var):
            return False
        if isinstance(t, Var):
            return t.name in term_vars(s)
        assert isinstance(s, App) and isinstance(t, App)
        # (1) some argument of s dominates t
        for a in s.args:
            if a == t or self.greater(a, t):
                return True
        ps, pt = self._prec(s.symbol.name), self._prec(t.symbol.name)
        if ps == pt and s.symbol.name != t.symbol.name:
            ps, pt = (s.symbol.name, t.symbol.name)  # type: ignore[assignment]
        if ps > pt:  # (2) higher precedence head
            return all(self.greater(s, b) for b in t.args)
        if s.symbol.name == t.symbol.name:  # (3) lexicographic on arguments
            for a, b in zip(s.args, t.args):
                if a == b:
                    continue
                if self.greater(a, b):
                    return all(self.greater(s, c) for c in t.args)
                return False
        return False


@dataclass(frozen=True)
class RewriteRule:
    context: Context
    lhs: Term
    rhs: Term

    def __repr__(self):
        return f"{render_term(self.lhs)} ~> {render_term(self.rhs)}"


class Unorientable:
    """Marker result for equations no orientation of which is reducing."""

    def __init__(self, eq: Equation):
        self.eq = eq

    def __repr__(self):
        return f"Unorientable({self.eq})"


def orient(eq: Equation, order: TermOrder):
    if order.greater(eq.lhs, eq.rhs) and term_vars(eq.rhs) <= term_vars(eq.lhs):
        return RewriteRule(eq.context, eq.lhs, eq.rhs)
    if order.greater(eq.rhs, eq.lhs) and term_vars(eq.lhs) <= term_vars(eq.rhs):
        return RewriteRule(eq.context, eq.rhs, eq.lhs)
    return Unorientable(eq)


def match(pattern: Term, term: Term, subst: dict[str, Term] | None = None):
    """One-way matching: a substitution s with pattern[s] == term, or None."""
    if subst is None:
        subst = {}
    if isinstance(pattern, Var):
        bound = subst.get(pattern.name)
        if bound is None:
            subst[pattern.name] = term
            return subst
        return subst if bound == term else None
    if not isinstance(term, App) or term.symbol != pattern.symbol:
        return None
    for p, t in zip(pattern.args, term.args):
        if match(p, t, subst) is None:
            return None
    return subst


@dataclass
class RewriteSystem:
    rules: list[RewriteRule]
    order: TermOrder
    status: str  # "confluent" | "budget-exhausted"
    unoriented: list[Equation] = field(default_factory=list)
    step_budget: int = DEFAULT_STEP_BUDGET

    def __post_init__(self):
        self._nf_cache: dict[Term, Term] = {}

    def normalize(self, term: Term) -> Term:
        return normalize(term, self)

    def decide_equal(self, t1: Term, t2: Term) -> EqResult:
        return decide_equal(t1, t2, self)


def _rewrite_head(term: Term, rs: RewriteSystem) -> Term | None:
    for rule in rs.rules:
        s = match(rule.lhs, term)
        if s is not None:
            return subst_map(rule.rhs, s)
    # ordered rewriting with the unorientable equations
    for eq in rs.unoriented:
        for big, small in ((eq.lhs, eq.rhs), (eq.rhs, eq.lhs)):
            s = match(big, term)
            if s is not None and term_vars(small) <= term_vars(big):
                out = subst_map(small, s)
                if rs.order.greater(term, out):
                    return out
    return None


def normalize(term: Term, rs: RewriteSystem) -> Term:
    cached = rs._nf_cache.get(term)
    if cached is not None:
        return cached
    steps = [0]
    out = _normalize(term, rs, steps)
    rs._nf_cache[term] = out
    return out


def _normalize(term: Term, rs: RewriteSystem, steps: list[int]) -> Term:
    # leftmost-innermost
    while True:
        cached = rs._nf_cache.get(term)
        if cached is not None:
            return cached
        if isinstance(term, App) and term.args:
            term = App(term.symbol, tuple(_normalize(a, rs, steps) for a in term.args))
        reduced = _rewrite_head(term, rs)
        if reduced is None:
            return term
        steps[0] += 1
        if steps[0] > rs.step_budget:
            raise BudgetExceeded(f"normalize exceeded {rs.step_budget} steps")
        term = reduced


def decide_equal(t1: Term, t2: Term, rs: RewriteSystem) -> EqResult:
    n1, n2 = normalize(t1, rs), normalize(t2, rs)
    if n1 == n2:
        return EqResult.Equal
    if rs.status == "confluent":
        return EqResult.NotEqual
    return EqResult.Unknown


# --- completion ---------------------------------------------------------


def _rename_apart(t: Term, suffix: str) -> Term:
    if isinstance(t, Var):
        return Var(t.name + suffix)
    return App(t.symbol, tuple(_rename_apart(a, suffix) for a in t.args))


def unify(a: Term, b: Term, subst: dict[str, Term] | None = None):
    if subst is None:
        subst = {}
    a, b = _walk(a, subst), _walk(b, subst)
    if a == b:
        return subst
    if isinstance(a, Var):
        if a.name in term_vars(_apply(b, subst)):
            return None
        subst[a.name] = b
        return subst
    if isinstance(b, Var):
        return unify(b, a, subst)
    if a.symbol != b.symbol:
        return None
    for x, y in zip(a.args, b.args):
        if unify(x, y, subst) is None:
            return None
    return subst


def _walk(t: Term, subst: dict[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in subst:
        t = subst[t.name]
    return t


def _apply(t: Term, subst: dict[str, Term]) -> Term:
    t = _walk(t, subst)
    if isinstance(t, Var):
        return t
    return App(t.symbol, tuple(_apply(a, subst) for a in t.args))


def _positions(t: Term):
    """Non-variable positions of t as (path, subterm)."""
    if isinstance(t, Var):
        return
    yield (), t
    for i, a in enumerate(t.args):
        for path, sub in _positions(a):
            yield (i,) + path, sub


def _replace(t: Term, path: tuple[int, ...], new: Term) -> Term:
    if not path:
        return new
    assert isinstance(t, App)
    i = path[0]
    args = list(t.args)
    args[i] = _replace(args[i], path[1:], new)
    return App(t.symbol, tuple(args))


def _critical_pairs(r1: RewriteRule, r2: RewriteRule):
    """Critical pairs from overlapping r2's lhs into r1's lhs."""
    l1 = _rename_apart(r1.lhs, "#1")
    rhs1 = _rename_apart(r1.rhs, "#1")
    l2 = _rename_apart(r2.lhs, "#2")
    rhs2 = _rename_apart(r2.rhs, "#2")
    for path, sub in _positions(l1):
        if path == () and r1 is r2:
            continue  # trivial self-overlap at the root
        s = unify(sub, l2, {})
        if s is None:
            continue
        peak = _apply(l1, s)
        left = _apply(rhs1, s)
        right = _apply(_replace(l1, path, rhs2), s)
        if left != right:
            yield peak, left, right


def complete(pres: Presentation, order: TermOrder | None = None,
             budget: int = DEFAULT_CP_BUDGET,
             step_budget: int = DEFAULT_STEP_BUDGET) -> RewriteSystem:
    """Unfailing Knuth-Bendix completion of a presentation."""
    if order is None:
        order = TermOrder(pres.signature)
    rs = RewriteSystem([], order, "confluent", [], step_budget)
    pending: list[Equation] = list(pres.equations)
    processed = 0
    exhausted = False

    def push_rule(rule: RewriteRule):
        # interreduce: drop/revise existing rules the new rule touches
        kept, reopened = [], []
        for old in rs.rules:
            probe = RewriteSystem([rule], order, "budget-exhausted", [], step_budget)
            if normalize(old.lhs, probe) != old.lhs:
                reopened.append(Equation(old.context, old.lhs, old.rhs, _sort_of(old.lhs)))
            else:
                new_rhs = old.rhs
                kept.append(RewriteRule(old.context, old.lhs, new_rhs))
        rs.rules = kept + [rule]
        rs._nf_cache = {}
        pending.extend(reopened)
        # reduce all right-hand sides by the full current system
        rs.rules = [
            RewriteRule(r.context, r.lhs, normalize(r.rhs, rs)) for r in rs.rules
        ]
        rs._nf_cache = {}

    def _sort_of(t: Term):
        return t.symbol.cod if isinstance(t, App) else None

    while pending:
        pending.sort(key=lambda e: term_size(e.lhs) + term_size(e.rhs))
        eq = pending.pop(0)
        processed += 1
        if processed > budget:
            exhausted = True
            break
        lhs, rhs = normalize(eq.lhs, rs), normalize(eq.rhs, rs)
        if lhs == rhs:
            continue
        o = orient(Equation(eq.context, lhs, rhs, eq.sort), order)
        if isinstance(o, Unorientable):
            rs.unoriented.append(Equation(eq.context, lhs, rhs, eq.sort))
            rs._nf_cache = {}
            continue
        push_rule(o)
        # queue critical pairs with every current rule
        for other in list(rs.rules):
            for a, b in ((o, other), (other, o)):
                for _, left, right in _critical_pairs(a, b):
                    pending.append(Equation(eq.context, left, right, eq.sort))

    rs.status = "budget-exhausted" if (exhausted or rs.unoriented) else "confluent"
    rs.rules = [_tidy_rule(r) for r in rs.rules]
    rs._nf_cache = {}
    return rs


def _tidy_rule(rule: RewriteRule) -> RewriteRule:
    """Rename rule variables canonically (x, y, z, v3, ...)."""
    names: list[str] = []

    def collect(t: Term):
        if isinstance(t, Var):
            if t.name not in names:
                names.append(t.name)
        else:
            for a in t.args:
                collect(a)

    collect(rule.lhs)
    collect(rule.rhs)
    fresh = ["x", "y", "z"] + [f"v{i}" for i in range(3, len(names) + 3)]
    ren = {old: Var(new) for old, new in zip(names, fresh)}

    def rename(t: Term) -> Term:
        if isinstance(t, Var):
            return ren[t.name]
        return App(t.symbol, tuple(rename(a) for a in t.args))

    return RewriteRule(rule.context, rename(rule.lhs), rename(rule.rhs))


# --- ground congruence closure -----------------------------------------


class GroundClosure:
    """Union-find over ground normal forms, closed under congruence and
    under rewriting by a background system."""

    def __init__(self, ground_eqs, rs: RewriteSystem, budget: int = 100_000):
        self.rs = rs
        self.budget = budget
        self.parent: dict[Term, Term] = {}
        self.known: set[Term] = set()
        # Free variables act as inert constants (e.g. instance generators);
        # rewrite-rule variables never capture them.
        for eq in ground_eqs:
            self._union(self._add(eq.lhs), self._add(eq.rhs))
        self._rebuild()

    def _add(self, t: Term) -> Term:
        """Register t under both readings — rewrite the raw term, and
        rewrite with arguments replaced by their representatives — and
        union them.  The two can differ: a rule may only fire on the raw
        argument (e.g. a two-step path) while congruence only sees the
        representative."""
        t0 = normalize(t, self.rs)
        self._register(t0)
        if isinstance(t, App) and t.args:
            args = tuple(self._find(self._add(a)) for a in t.args)
            t1 = normalize(App(t.symbol, args), self.rs)
            self._register(t1)
            self._union(self._find(t0), self._find(t1))
        return self._find(t0)

    def _norm(self, t: Term) -> Term:
        t = normalize(t, self.rs)
        self._register(t)
        return t

    def _register(self, t: Term):
        if t in self.known:
            return
        self.known.add(t)
        self.parent.setdefault(t, t)
        if isinstance(t, App):
            for a in t.args:
                self._register(a)

    def _find(self, t: Term) -> Term:
        while self.parent.get(t, t) != t:
            self.parent[t] = self.parent.get(self.parent[t], self.parent[t])
            t = self.parent[t]
        return t

    def _union(self, a: Term, b: Term):
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        # prefer the smaller term as representative
        if term_key(rb) < term_key(ra):
            ra, rb = rb, ra
        self.parent[rb] = ra

    def _canon(self, t: Term) -> Term:
        if isinstance(t, Var) or not isinstance(t, App) or not t.args:
            return self._find(t)
        return self._find(
            self._norm(App(t.symbol, tuple(self._canon(a) for a in t.args)))
        )

    def _rebuild(self):
        steps = 0
        changed = True
        while changed:
            changed = False
            steps += 1
            if steps > self.budget:
                raise BudgetExceeded("congruence closure did not converge")
            for t in list(self.known):
                c = self._canon(t)
                if self._find(t) != c:
                    self._union(self._find(t), c)
                    changed = True

    def representative(self, t: Term) -> Term:
        r = self._add(t)
        self._rebuild()
        return self._find(r)

    def class_members(self, t: Term) -> list[Term]:
        rep = self.representative(t)
        return [m for m in self.known if self._find(m) == rep]

    def same(self, a: Term, b: Term) -> bool:
        return self.representative(a) == self.representative(b)


def ground_congruence_close(ground_eqs, rs: RewriteSystem) -> GroundClosure:
    return GroundClosure(ground_eqs, rs)

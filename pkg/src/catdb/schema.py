"""Schema presentations and compiled schemas.

A schema is presented by entities, edges (unary entity-to-entity symbols),
attributes (unary entity-to-type symbols), path equations between edge
paths, and observable equations whose sides are type-sorted.  Compiling a
schema runs completion on the entity side and assembles the collage
signature: the built-in type signature extended with the entities, edges
and attributes.  Type symbols are declared first so that every schema
symbol outranks them in the term order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import (
    AlgSignature, App, Context, ContextMorphism, Equation, FunctionSymbol,
    Presentation, Sort, Term, Var, app, ctx, render_term, subst_map,
    term_key, well_sort_check,
)
from .rewrite import (
    DEFAULT_CP_BUDGET, EqResult, RewriteSystem, complete, decide_equal,
)
from .typeside import TYPE_SORTS, TYPE_SYMBOLS, BOOL


class SchemaError(Exception):
    pass


class PossiblyInfinite(SchemaError):
    pass


class SchemaMismatch(SchemaError):
    pass


@dataclass(frozen=True)
class SchemaPresentation:
    entities: tuple[Sort, ...]
    edges: tuple[FunctionSymbol, ...]
    attributes: tuple[FunctionSymbol, ...]
    path_eqs: tuple[Equation, ...] = ()
    obs_eqs: tuple[Equation, ...] = ()

    def __post_init__(self):
        type_sorts = set(TYPE_SORTS)
        for e in self.entities:
            if e in type_sorts:
                raise SchemaError(f"entity name clashes with a type sort: {e}")
        ents = set(self.entities)
        for f in self.edges:
            if len(f.dom) != 1 or f.dom[0] not in ents or f.cod not in ents:
                raise SchemaError(f"edge must be unary entity->entity: {f}")
        for a in self.attributes:
            if len(a.dom) != 1 or a.dom[0] not in ents or a.cod not in type_sorts:
                raise SchemaError(f"attribute must be unary entity->type: {a}")
        for eq in self.path_eqs:
            if len(eq.context.bindings) != 1 or eq.sort not in ents:
                raise SchemaError(f"path equation must be unary, entity-sorted: {eq}")
        for eq in self.obs_eqs:
            if len(eq.context.bindings) != 1 or eq.sort in ents:
                raise SchemaError(
                    f"observable equation must be unary with type-sorted sides: {eq}")


@dataclass(frozen=True)
class Schema:
    presentation: SchemaPresentation
    collage_sig: AlgSignature
    entity_sig: AlgSignature
    entity_rs: RewriteSystem

    @property
    def entities(self):
        return self.presentation.entities

    @property
    def edges(self):
        return self.presentation.edges

    @property
    def attributes(self):
        return self.presentation.attributes

    @property
    def obs_eqs(self):
        return self.presentation.obs_eqs

    def edges_from(self, e: Sort):
        return [f for f in self.edges if f.dom[0] == e]

    def attrs_from(self, e: Sort):
        return [a for a in self.attributes if a.dom[0] == e]

    def is_entity(self, s: Sort) -> bool:
        return s in self.presentation.entities


def compile_schema(pres: SchemaPresentation,
                   budget: int = DEFAULT_CP_BUDGET) -> Schema:
    entity_sig = AlgSignature(pres.entities, pres.edges)
    for eq in pres.path_eqs:
        well_sort_check(eq.lhs, eq.context, entity_sig)
        well_sort_check(eq.rhs, eq.context, entity_sig)
    collage_sig = AlgSignature(
        TYPE_SORTS + pres.entities,
        TYPE_SYMBOLS + pres.edges + pres.attributes,
    )
    for eq in pres.obs_eqs:
        well_sort_check(eq.lhs, eq.context, collage_sig)
        well_sort_check(eq.rhs, eq.context, collage_sig)
    entity_rs = complete(Presentation(entity_sig, pres.path_eqs), budget=budget)
    return Schema(pres, collage_sig, entity_sig, entity_rs)


# --- schema mappings ----------------------------------------------------


@dataclass(frozen=True)
class SchemaMapping:
    """Maps entities to entities, edges to paths, attributes to observable
    terms; each image term lives in the context (x: F(dom))."""

    source: Schema
    target: Schema
    entity_map: tuple[tuple[Sort, Sort], ...]
    edge_map: tuple[tuple[FunctionSymbol, Term], ...]
    attr_map: tuple[tuple[FunctionSymbol, Term], ...]

    @staticmethod
    def make(source: Schema, target: Schema, entity_map: dict,
             edge_map: dict, attr_map: dict) -> "SchemaMapping":
        F = SchemaMapping(source, target,
                          tuple(entity_map.items()),
                          tuple(edge_map.items()),
                          tuple(attr_map.items()))
        for e in source.entities:
            if F.on_entity(e) not in target.entities:
                raise SchemaMismatch(f"no target entity for {e}")
        for f in source.edges:
            t = F.on_edge(f)
            got = well_sort_check(t, ctx(("x", F.on_entity(f.dom[0]))),
                                  target.collage_sig)
            if got != F.on_entity(f.cod):
                raise SchemaMismatch(f"edge image has wrong codomain: {f} -> {t}")
        for a in source.attributes:
            t = F.on_attr(a)
            got = well_sort_check(t, ctx(("x", F.on_entity(a.dom[0]))),
                                  target.collage_sig)
            if got != a.cod:
                raise SchemaMismatch(f"attribute image has wrong sort: {a} -> {t}")
        return F

    def on_entity(self, e: Sort) -> Sort:
        for a, b in self.entity_map:
            if a == e:
                return b
        raise SchemaMismatch(f"entity not in mapping: {e}")

    def on_edge(self, f: FunctionSymbol) -> Term:
        for g, t in self.edge_map:
            if g == f:
                return t
        raise SchemaMismatch(f"edge not in mapping: {f}")

    def on_attr(self, a: FunctionSymbol) -> Term:
        for b, t in self.attr_map:
            if b == a:
                return t
        raise SchemaMismatch(f"attribute not in mapping: {a}")

    def translate(self, term: Term) -> Term:
        """Push a term over the source collage through the mapping.
        Variables are untouched (their sorts translate via the context)."""
        if isinstance(term, Var):
            return term
        assert isinstance(term, App)
        args = tuple(self.translate(a) for a in term.args)
        sym = term.symbol
        for g, t in self.edge_map:
            if g == sym:
                return subst_map(t, {"x": args[0]})
        for b, t in self.attr_map:
            if b == sym:
                return subst_map(t, {"x": args[0]})
        return App(sym, args)

    def translate_context(self, context: Context) -> Context:
        return Context(tuple(
            (n, self.on_entity(s) if self.source.is_entity(s) else s)
            for n, s in context.bindings))


def identity_mapping(s: Schema) -> SchemaMapping:
    return SchemaMapping.make(
        s, s,
        {e: e for e in s.entities},
        {f: app(f, Var("x")) for f in s.edges},
        {a: app(a, Var("x")) for a in s.attributes},
    )


def compose_mappings(F: SchemaMapping, G: SchemaMapping) -> SchemaMapping:
    if F.target is not G.source and F.target.presentation != G.source.presentation:
        raise SchemaMismatch("mapping composition: middle schemas differ")
    return SchemaMapping.make(
        F.source, G.target,
        {e: G.on_entity(F.on_entity(e)) for e in F.source.entities},
        {f: G.translate(F.on_edge(f)) for f in F.source.edges},
        {a: G.translate(F.on_attr(a)) for a in F.source.attributes},
    )


def check_mapping(F: SchemaMapping) -> list[str]:
    """Empty list if every source equation's image holds in the target;
    otherwise descriptions of the failing equations.  Unknown counts as a
    violation."""
    from .instance import observable_decide  # late import: layered modules

    violations = []
    for eq in F.source.presentation.path_eqs:
        l, r = F.translate(eq.lhs), F.translate(eq.rhs)
        if F.target.entity_rs.decide_equal(l, r) != EqResult.Equal:
            violations.append(f"path equation not preserved: {eq}")
    for eq in F.source.presentation.obs_eqs:
        name, s = eq.context.bindings[0]
        c = Context(((name, F.on_entity(s)),))
        got = observable_decide(F.target, c, F.translate(eq.lhs), F.translate(eq.rhs))
        if got != EqResult.Equal:
            violations.append(f"observable equation not preserved: {eq}")
    return violations


# --- saturated entity categories ---------------------------------------


def saturate_entity_category(s: Schema, budget: int = 10_000
                             ) -> dict[tuple[Sort, Sort], list[Term]]:
    """Hom-set tables: for each entity pair (a, b), the normal-form path
    terms x:a |- p : b, computed by staged closure under edge application."""
    homs: dict[tuple[Sort, Sort], list[Term]] = {
        (a, b): [] for a in s.entities for b in s.entities}
    frontier: list[tuple[Sort, Sort, Term]] = []
    total = 0
    for a in s.entities:
        homs[(a, a)].append(Var("x"))
        frontier.append((a, a, Var("x")))
        total += 1
    while frontier:
        a, b, p = frontier.pop(0)
        for f in s.edges_from(b):
            q = s.entity_rs.normalize(app(f, p))
            cell = homs[(a, f.cod)]
            if q not in cell:
                cell.append(q)
                frontier.append((a, f.cod, q))
                total += 1
                if total > budget:
                    raise PossiblyInfinite(
                        f"entity category exceeded {budget} morphisms")
    for cell in homs.values():
        cell.sort(key=term_key)
    return homs


def is_discrete_opfibration(F: SchemaMapping, budget: int = 10_000) -> str:
    """'yes' | 'no' | 'unknown'.

    Checks unique lifting of generating target edges and attributes on the
    saturated entity categories: out of every image object, and — for
    edges whose codomain has a preimage — into every such preimage."""
    try:
        src_homs = saturate_entity_category(F.source, budget)
        tgt_rs = F.target.entity_rs
    except PossiblyInfinite:
        return "unknown"

    def lifts_from(s: Sort, want) -> list[Term]:
        out = []
        for s2 in F.source.entities:
            for p in src_homs[(s, s2)]:
                if want(p, s2):
                    out.append(p)
        return out

    for s in F.source.entities:
        fs = F.on_entity(s)
        for g in F.target.edges_from(fs):
            image = tgt_rs.normalize(app(g, Var("x")))
            found = lifts_from(
                s, lambda p, s2: tgt_rs.normalize(F.translate(p)) == image
                and not isinstance(p, Var))
            if len(found) != 1:
                return "no"
        for a in F.target.attrs_from(fs):
            want = _norm_obs(F.target, app(a, Var("x")))
            cands = []
            for s2 in F.source.entities:
                for p in src_homs[(s, s2)]:
                    for b in F.source.attrs_from(s2):
                        t = _norm_obs(F.target, F.translate(app(b, p)))
                        if t == want:
                            cands.append(app(b, p))
            if len(cands) != 1:
                return "no"
    # edges into the image must also lift uniquely
    for g in F.target.edges:
        for s2 in F.source.entities:
            if F.on_entity(s2) != g.cod:
                continue
            image = tgt_rs.normalize(app(g, Var("x")))
            count = 0
            for s1 in F.source.entities:
                if F.on_entity(s1) != g.dom[0]:
                    continue
                for p in src_homs[(s1, s2)]:
                    if tgt_rs.normalize(F.translate(p)) == image:
                        count += 1
            if count != 1:
                return "no"
    return "yes"


def _norm_obs(schema: Schema, t: Term) -> Term:
    """Normal form of an observable term: entity paths reduced by the
    schema's path rewriting, other symbol applications kept."""
    if isinstance(t, Var):
        return t
    assert isinstance(t, App)
    if t.symbol in schema.edges:
        return schema.entity_rs.normalize(
            App(t.symbol, tuple(_norm_obs(schema, a) for a in t.args)))
    return App(t.symbol, tuple(_norm_obs(schema, a) for a in t.args))

"""For-Where-Return queries over a schema, and their evaluation.

A query freezes its FOR context and WHERE equations into an instance;
each result row is a transform from that frozen instance into the input,
and each RETURN attribute is the value of its term under the transform.
Uber-queries bundle one such block per result entity plus KEYS morphisms
that populate the result edges by precomposition.  The bimodule route
(restriction along one collage inclusion, right extension along the
other) must agree with direct evaluation; crosscheck_migration verifies
that on concrete inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .kernel import (
    App, Context, ContextMorphism, Equation, FunctionSymbol, Sort, Term,
    Var, app, ctx, render_term, subst_map,
)
from .schema import (
    Schema, SchemaError, SchemaPresentation, compile_schema,
)
from .instance import (
    DomainDependence, InstancePresentation, SaturatedInstance, Transform,
    check_transform, enumerate_transforms, instances_isomorphic,
    render_tables, saturate,
)
from .migration import BimodulePresentation, gamma
from .typeside import TYPE_SORTS


class QueryError(Exception):
    pass


class InvalidKeys(QueryError):
    pass


@dataclass(frozen=True)
class Query:
    """FOR variables with their sorts, WHERE equations over them, and a
    RETURN context whose variables are assigned type-sorted terms."""

    schema: Schema
    for_ctx: Context
    where_eqs: tuple[Equation, ...]
    return_ctx: Context
    return_morph: ContextMorphism

    def __post_init__(self):
        type_sorts = set(TYPE_SORTS)
        for n, s in self.return_ctx.bindings:
            if s not in type_sorts:
                raise QueryError(f"return variable {n} must have a type sort")


@dataclass(frozen=True)
class QueryResult:
    instance: SaturatedInstance

    @property
    def typealg(self):
        return self.instance.typealg


def frozen_instance(Q: Query) -> InstancePresentation:
    return InstancePresentation(Q.schema, Q.for_ctx, tuple(Q.where_eqs))


def check_domain_independence(Q: Query) -> list[str]:
    """Names of FOR variables that do not have entity sorts (empty = ok)."""
    return [n for n, s in Q.for_ctx.bindings if not Q.schema.is_entity(s)]


STAR = Sort("*")


def query_to_bimodule(Q: Query) -> tuple[Schema, BimodulePresentation]:
    """The result schema has one entity with one attribute per RETURN
    variable; the bimodule has one generating edge per FOR variable, with
    the WHERE equations and the RETURN assignments as its equations."""
    attrs = tuple(FunctionSymbol(n, (STAR,), s)
                  for n, s in Q.return_ctx.bindings)
    R = compile_schema(SchemaPresentation((STAR,), (), attrs))
    gen_edges = tuple(FunctionSymbol(n, (STAR,), s)
                      for n, s in Q.for_ctx.bindings)
    by_name = {g.name: g for g in gen_edges}
    q = Var("q")
    qctx = ctx(("q", STAR))
    sub = {n: app(by_name[n], q) for n, _ in Q.for_ctx.bindings}
    eqs = []
    for eq in Q.where_eqs:
        eqs.append(Equation(qctx, subst_map(eq.lhs, sub),
                            subst_map(eq.rhs, sub), eq.sort))
    for (n, s), a in zip(Q.return_ctx.bindings, attrs):
        t = Q.return_morph(n)
        eqs.append(Equation(qctx, app(a, q), subst_map(t, sub), s))
    return R, BimodulePresentation(R, Q.schema, gen_edges, (), tuple(eqs))


def eval_query(Q: Query, J: SaturatedInstance) -> QueryResult:
    bad = check_domain_independence(Q)
    if bad:
        raise DomainDependence(
            f"FOR variables without entity sorts: {', '.join(bad)}")
    R, _ = query_to_bimodule(Q)
    alphas = enumerate_transforms(frozen_instance(Q), J)
    rows = [Var(f"{i + 1}") for i in range(len(alphas))]
    attrs = {a.name: a for a in R.attributes}
    attr_cols = {a: {} for a in R.attributes}
    for r, alpha in zip(rows, alphas):
        assign = alpha.row_assignment()
        for n, _ in Q.return_ctx.bindings:
            t = subst_map(Q.return_morph(n), assign)
            attr_cols[attrs[n]][r] = J.eval_type(t)
    si = SaturatedInstance(R, {STAR: rows}, {}, attr_cols, J.typealg, {})
    return QueryResult(si)


# --- uber-queries -------------------------------------------------------


@dataclass(frozen=True)
class UberBlock:
    for_ctx: Context
    where_eqs: tuple[Equation, ...]
    keys: tuple[tuple[FunctionSymbol, ContextMorphism], ...] = ()
    returns: tuple[tuple[FunctionSymbol, Term], ...] = ()

    def key_for(self, edge: FunctionSymbol) -> ContextMorphism:
        for f, m in self.keys:
            if f == edge:
                return m
        raise InvalidKeys(f"no keys morphism for edge {edge.name}")

    def return_for(self, attr: FunctionSymbol) -> Term:
        for a, t in self.returns:
            if a == attr:
                return t
        raise QueryError(f"no return assignment for attribute {attr.name}")


@dataclass(frozen=True)
class UberQuery:
    schema: Schema
    result_schema: Schema
    blocks: tuple[tuple[Sort, UberBlock], ...]

    def block_for(self, e: Sort) -> UberBlock:
        for s, b in self.blocks:
            if s == e:
                return b
        raise QueryError(f"no block for result entity {e.name}")


def check_uber_query(N: UberQuery) -> None:
    """Domain independence per block; each keys morphism must be a valid
    transform between the frozen instances of its blocks."""
    for e, b in N.blocks:
        bad = [n for n, s in b.for_ctx.bindings if not N.schema.is_entity(s)]
        if bad:
            raise DomainDependence(
                f"block {e.name}: FOR variables without entity sorts: "
                f"{', '.join(bad)}")
    for e, b in N.blocks:
        for f in N.result_schema.edges_from(e):
            m = b.key_for(f)
            cod_block = N.block_for(f.cod)
            dom_sat = saturate(InstancePresentation(
                N.schema, b.for_ctx, tuple(b.where_eqs)))
            cod_pres = InstancePresentation(
                N.schema, cod_block.for_ctx, tuple(cod_block.where_eqs))
            rows = {n: dom_sat.eval_entity(m(n))
                    for n, s in cod_block.for_ctx.bindings
                    if N.schema.is_entity(s)}
            t = Transform(cod_pres, dom_sat, tuple(rows.items()), ())
            errs = check_transform(t)
            if errs:
                raise InvalidKeys(
                    f"keys morphism for {f.name} violates WHERE equations: "
                    f"{'; '.join(errs)}")


def eval_uber_query(N: UberQuery, J: SaturatedInstance) -> SaturatedInstance:
    check_uber_query(N)
    R = N.result_schema
    per = {}
    for e, b in N.blocks:
        pres = InstancePresentation(N.schema, b.for_ctx, tuple(b.where_eqs))
        alphas = enumerate_transforms(pres, J)
        rows = [Var(f"{e.name.lower()}{i + 1}") for i in range(len(alphas))]
        per[e] = (b, rows, alphas)
    row_list = {e: list(per[e][1]) for e in R.entities}
    edge_cols = {}
    for f in R.edges:
        b, rows, alphas = per[f.dom[0]]
        cb, crows, calphas = per[f.cod]
        m = b.key_for(f)
        col = {}
        for r, alpha in zip(rows, alphas):
            assign = alpha.row_assignment()
            target = {n: J.eval_entity(subst_map(m(n), assign))
                      for n, s in cb.for_ctx.bindings}
            hits = [j for j, ca in enumerate(calphas)
                    if ca.row_assignment() == target]
            if len(hits) != 1:
                raise InvalidKeys(
                    f"keys morphism for {f.name} does not determine a "
                    f"unique row")
            col[r] = crows[hits[0]]
        edge_cols[f] = col
    attr_cols = {}
    for a in R.attributes:
        b, rows, alphas = per[a.dom[0]]
        col = {}
        for r, alpha in zip(rows, alphas):
            assign = alpha.row_assignment()
            col[r] = J.eval_type(subst_map(b.return_for(a), assign))
        attr_cols[a] = col
    return SaturatedInstance(R, row_list, edge_cols, attr_cols,
                             J.typealg, {})


# --- the migration cross-check -----------------------------------------


def crosscheck_migration(Q: Query, J: SaturatedInstance,
                         budget: int = 10_000) -> str:
    """Evaluate Q directly and through the bimodule collage (restriction
    after right extension); 'ok' if the two tables are isomorphic."""
    direct = eval_query(Q, J).instance
    R, M = query_to_bimodule(Q)
    via = gamma(M, J, budget)
    if instances_isomorphic(direct, via):
        return "ok"
    return ("mismatch:\n--- direct evaluation ---\n"
            + render_tables(direct)
            + "\n--- via migration ---\n" + render_tables(via))

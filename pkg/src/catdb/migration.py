"""Data migration along schema mappings, and bimodules via collages.

Delta pulls saturated tables back along a mapping; sigma pushes an
instance presentation forward syntactically; pi computes the right
adjoint row-by-row as transforms out of pulled-back representables.
Bimodules are presented by generating edges/attributes plus equations;
their collage is an ordinary schema with two inclusion mappings, through
which lambda and gamma are defined as composites of sigma/delta/pi.
"""

from __future__ import annotations

from dataclasses import dataclass

from .kernel import (
    App, Context, ContextMorphism, Equation, FunctionSymbol, Sort, Term,
    Var, app, ctx, render_term, subst_map, term_key,
)
from .schema import (
    PossiblyInfinite, Schema, SchemaError, SchemaMapping, SchemaMismatch,
    SchemaPresentation, _norm_obs, compile_schema, identity_mapping,
    saturate_entity_category, is_discrete_opfibration,
)
from .instance import (
    DomainDependence, InstanceError, InstancePresentation, SaturatedInstance,
    Transform, canonical_presentation, enumerate_transforms,
    representable_instance, row_generator_names, saturate,
)
from .typeside import (
    CanonicalValue, _bare_atom, map_value_atoms, opaque_atom, ts_normalize,
)


class MigrationError(Exception):
    pass


class NotOpfibration(MigrationError):
    pass


class NameClash(MigrationError):
    pass


# --- the three migration functors --------------------------------------


def delta(F: SchemaMapping, K: SaturatedInstance) -> SaturatedInstance:
    """Pullback: rows of s are K's rows at F(s); columns chase the images
    of edges and attributes; the type algebra is untouched."""
    src = F.source
    row_list = {s: list(K.rows(F.on_entity(s))) for s in src.entities}
    edge_cols = {}
    for f in src.edges:
        img = F.on_edge(f)
        edge_cols[f] = {r: K.eval_entity(subst_map(img, {"x": r}))
                        for r in row_list[f.dom[0]]}
    attr_cols = {}
    for a in src.attributes:
        img = F.on_attr(a)
        attr_cols[a] = {r: K.eval_type(subst_map(img, {"x": r}))
                        for r in row_list[a.dom[0]]}
    return SaturatedInstance(src, row_list, edge_cols, attr_cols,
                             K.typealg, dict(K.gen_env))


def sigma(F: SchemaMapping, I: InstancePresentation) -> InstancePresentation:
    """Left pushforward, as a presentation: re-sort the generators through
    the entity map and translate every equation symbol-wise."""
    new_ctx = F.translate_context(I.generators)
    eqs = []
    for eq in I.equations:
        sort = F.on_entity(eq.sort) if F.source.is_entity(eq.sort) else eq.sort
        eqs.append(Equation(new_ctx, F.translate(eq.lhs), F.translate(eq.rhs),
                            sort))
    return InstancePresentation(F.target, new_ctx, tuple(eqs))


def sigma_pointwise(F: SchemaMapping, I: SaturatedInstance) -> SaturatedInstance:
    """Coproduct-over-preimages formula, valid when F induces a discrete
    opfibration on collages."""
    if is_discrete_opfibration(F) != "yes":
        raise NotOpfibration("mapping is not a discrete opfibration")
    src, tgt = F.source, F.target
    src_homs = saturate_entity_category(src)
    preim = {t: [s for s in src.entities if F.on_entity(s) == t]
             for t in tgt.entities}
    row_list: dict[Sort, list[Term]] = {t: [] for t in tgt.entities}
    row_home: dict[Term, Sort] = {}
    for t in tgt.entities:
        for s in preim[t]:
            for r in I.rows(s):
                if r in row_home:
                    raise MigrationError(
                        "row terms of distinct preimages must be disjoint")
                row_home[r] = s
                row_list[t].append(r)

    def edge_lift(s: Sort, g: FunctionSymbol) -> Term:
        want = tgt.entity_rs.normalize(app(g, Var("x")))
        found = [p for s2 in src.entities for p in src_homs[(s, s2)]
                 if not isinstance(p, Var)
                 and tgt.entity_rs.normalize(F.translate(p)) == want]
        if len(found) != 1:
            raise NotOpfibration(f"no unique lift of {g.name} over {s}")
        return found[0]

    def attr_lift(s: Sort, a: FunctionSymbol) -> Term:
        want = _norm_obs(tgt, app(a, Var("x")))
        found = [app(b, p) for s2 in src.entities for p in src_homs[(s, s2)]
                 for b in src.attrs_from(s2)
                 if _norm_obs(tgt, F.translate(app(b, p))) == want]
        if len(found) != 1:
            raise NotOpfibration(f"no unique lift of {a.name} over {s}")
        return found[0]

    edge_cols = {}
    for g in tgt.edges:
        lifts = {s: edge_lift(s, g) for s in preim[g.dom[0]]}
        edge_cols[g] = {
            r: I.eval_entity(subst_map(lifts[row_home[r]], {"x": r}))
            for r in row_list[g.dom[0]]}
    attr_cols = {}
    for a in tgt.attributes:
        lifts = {s: attr_lift(s, a) for s in preim[a.dom[0]]}
        attr_cols[a] = {
            r: I.eval_type(subst_map(lifts[row_home[r]], {"x": r}))
            for r in row_list[a.dom[0]]}
    return SaturatedInstance(tgt, row_list, edge_cols, attr_cols,
                             I.typealg, dict(I.gen_env))


def pi(F: SchemaMapping, I: SaturatedInstance,
       budget: int = 10_000) -> SaturatedInstance:
    """Right pushforward: a row at target entity t is a transform from the
    canonical presentation of delta(F, saturate(y(t))) into I; edges act
    by path precomposition, attributes by evaluating their value in the
    representable's type algebra under the transform."""
    tgt = F.target
    per: dict[Sort, dict] = {}
    for t in tgt.entities:
        sat = saturate(representable_instance(tgt, t), budget)
        dI = delta(F, sat)
        names = row_generator_names(dI)
        cp = canonical_presentation(dI)
        alphas = enumerate_transforms(cp, I)
        per[t] = {"sat": sat, "names": names, "alphas": alphas,
                  "rows": [Var(f"{t.name.lower()}{i + 1}")
                           for i in range(len(alphas))]}

    row_list = {t: list(per[t]["rows"]) for t in tgt.entities}

    def alpha_of_row(t, row):
        return per[t]["alphas"][per[t]["rows"].index(row)]

    def resolve_atom_fn(t, alpha):
        names = per[t]["names"]
        assign = alpha.row_assignment()
        alg = per[t]["sat"].typealg

        def direct(atom: Term) -> CanonicalValue | None:
            if isinstance(atom, App) and atom.args and atom.args[0] in names:
                att, r2 = atom.symbol, atom.args[0]
                if att in I.attr_cols:
                    return I.attr_cols[att][assign[names[r2]]]
            return None

        def fn(atom: Term, _seen=None) -> CanonicalValue:
            v = direct(atom)
            if v is not None:
                return v
            # the algebra may know this atom as the definition of a
            # resolvable one (e.g. a pulled-back copy of the same cell)
            for key, val in alg._subst.items():
                if _bare_atom(val) == atom:
                    v = direct(key)
                    if v is not None:
                        return v
            # or relate it to an expressible value in an unoriented way
            seen = _seen or frozenset()
            if atom not in seen:
                for big, small in alg._rewrites:
                    for this, other in ((big, small), (small, big)):
                        if _bare_atom(this) == atom:
                            try:
                                return I.typealg.simplify(map_value_atoms(
                                    other,
                                    lambda a: fn(a, seen | {atom})))
                            except DomainDependence:
                                continue
            raise DomainDependence(
                f"attribute cell depends on a value outside the image: "
                f"{render_term(atom)}")
        return fn

    edge_cols = {}
    for h in tgt.edges:
        t, t1 = h.dom[0], h.cod
        col = {}
        for row in per[t]["rows"]:
            alpha = alpha_of_row(t, row)
            assign = alpha.row_assignment()
            names_t, names_t1 = per[t]["names"], per[t1]["names"]
            sat_t = per[t]["sat"]
            beta = {}
            for r1 in names_t1:  # rows of y(t1), as path terms over x:t1
                pre = subst_map(r1, {"x": app(h, Var("x"))})
                r_in_t = sat_t.eval_entity(pre, {"x": sat_t.gen_env["x"]})
                if names_t[r_in_t] in assign:
                    beta[names_t1[r1]] = assign[names_t[r_in_t]]
            hits = [i for i, a in enumerate(per[t1]["alphas"])
                    if a.row_assignment() == beta]
            if len(hits) != 1:
                raise MigrationError("edge precomposition did not land on "
                                     "a unique row")
            col[row] = per[t1]["rows"][hits[0]]
        edge_cols[h] = col

    attr_cols = {}
    for a in tgt.attributes:
        t = a.dom[0]
        col = {}
        for row in per[t]["rows"]:
            alpha = alpha_of_row(t, row)
            sat_t = per[t]["sat"]
            v0 = sat_t.eval_type(app(a, Var("x")), {"x": sat_t.gen_env["x"]})
            col[row] = I.typealg.simplify(
                map_value_atoms(v0, resolve_atom_fn(t, alpha)))
        attr_cols[a] = col

    out = SaturatedInstance(tgt, row_list, edge_cols, attr_cols,
                            I.typealg, {})
    out.pi_details = per
    return out


# --- bimodules ----------------------------------------------------------


@dataclass(frozen=True)
class BimodulePresentation:
    src: Schema
    dst: Schema
    gen_edges: tuple[FunctionSymbol, ...]
    gen_attrs: tuple[FunctionSymbol, ...]
    equations: tuple[Equation, ...] = ()

    def __post_init__(self):
        for g in self.gen_edges:
            if len(g.dom) != 1 or not self.src.is_entity(g.dom[0]) \
                    or not self.dst.is_entity(g.cod):
                raise SchemaError(
                    f"generating edge must be src-entity -> dst-entity: {g}")
        for a in self.gen_attrs:
            if len(a.dom) != 1 or not self.src.is_entity(a.dom[0]) \
                    or self.dst.is_entity(a.cod):
                raise SchemaError(
                    f"generating attribute must be src-entity -> type: {a}")
        for eq in self.equations:
            if len(eq.context.bindings) != 1 \
                    or not self.src.is_entity(eq.context.bindings[0][1]):
                raise SchemaError(
                    f"bimodule equation needs a singleton src-entity context: {eq}")


@dataclass(frozen=True)
class CollageSchema:
    schema: Schema
    incl_src: SchemaMapping
    incl_dst: SchemaMapping
    bimodule: BimodulePresentation


def collage_of_bimodule(M: BimodulePresentation,
                        budget: int | None = None) -> CollageSchema:
    sp, dp = M.src.presentation, M.dst.presentation
    ent_names = {e.name for e in sp.entities} & {e.name for e in dp.entities}
    sym_names = ({f.name for f in sp.edges + sp.attributes}
                 & {f.name for f in dp.edges + dp.attributes})
    if ent_names or sym_names:
        raise NameClash(f"collage name clashes: {sorted(ent_names | sym_names)}")
    ents = set(sp.entities) | set(dp.entities)
    path_eqs = list(sp.path_eqs) + list(dp.path_eqs)
    obs_eqs = list(sp.obs_eqs) + list(dp.obs_eqs)
    for eq in M.equations:
        (path_eqs if eq.sort in ents else obs_eqs).append(eq)
    pres = SchemaPresentation(
        sp.entities + dp.entities,
        sp.edges + dp.edges + M.gen_edges,
        sp.attributes + dp.attributes + M.gen_attrs,
        tuple(path_eqs), tuple(obs_eqs))
    col = compile_schema(pres) if budget is None else compile_schema(pres, budget)

    def inclusion(side: Schema) -> SchemaMapping:
        return SchemaMapping.make(
            side, col,
            {e: e for e in side.entities},
            {f: app(f, Var("x")) for f in side.edges},
            {a: app(a, Var("x")) for a in side.attributes})

    return CollageSchema(col, inclusion(M.src), inclusion(M.dst), M)


def companion_presentation(F: SchemaMapping,
                           prefix: str = "psi") -> BimodulePresentation:
    gens = {r: FunctionSymbol(f"{prefix}_{r.name}", (r,), F.on_entity(r))
            for r in F.source.entities}
    x = Var("x")
    eqs = []
    for f in F.source.edges:
        r, r1 = f.dom[0], f.cod
        eqs.append(Equation(
            ctx(("x", r)),
            app(gens[r1], app(f, x)),
            subst_map(F.on_edge(f), {"x": app(gens[r], x)}),
            F.on_entity(r1)))
    for a in F.source.attributes:
        r = a.dom[0]
        eqs.append(Equation(
            ctx(("x", r)),
            app(a, x),
            subst_map(F.on_attr(a), {"x": app(gens[r], x)}),
            a.cod))
    return BimodulePresentation(F.source, F.target, tuple(gens.values()),
                                (), tuple(eqs))


def conjoint_presentation(F: SchemaMapping,
                          prefix: str = "phi") -> BimodulePresentation:
    gens = {r: FunctionSymbol(f"{prefix}_{r.name}", (F.on_entity(r),), r)
            for r in F.source.entities}
    x = Var("x")
    eqs = []
    for f in F.source.edges:
        r, r1 = f.dom[0], f.cod
        eqs.append(Equation(
            ctx(("x", F.on_entity(r))),
            app(f, app(gens[r], x)),
            app(gens[r1], subst_map(F.on_edge(f), {"x": x})),
            r1))
    for a in F.source.attributes:
        r = a.dom[0]
        eqs.append(Equation(
            ctx(("x", F.on_entity(r))),
            app(a, app(gens[r], x)),
            subst_map(F.on_attr(a), {"x": x}),
            a.cod))
    return BimodulePresentation(F.target, F.source, tuple(gens.values()),
                                (), tuple(eqs))


def unit_bimodule(s: Schema, renamer=None) -> BimodulePresentation:
    """Identity bimodule s -|-> s', where s' is a disjoint renamed copy of s
    (collages need disjoint sides).  renamer maps names; default appends
    an apostrophe-free suffix '_c'."""
    ren = renamer or (lambda n: n + "_c")
    copy, to_copy = rename_schema(s, ren)
    return companion_presentation(to_copy, prefix="u")


def rename_schema(s: Schema, ren) -> tuple[Schema, SchemaMapping]:
    """A fresh copy of s with every entity/edge/attribute name passed
    through ren, plus the evident mapping s -> copy."""
    ents = {e: Sort(ren(e.name)) for e in s.entities}
    syms = {}
    for f in s.edges:
        syms[f] = FunctionSymbol(ren(f.name), (ents[f.dom[0]],), ents[f.cod])
    for a in s.attributes:
        syms[a] = FunctionSymbol(ren(a.name), (ents[a.dom[0]],), a.cod)

    def rt(t: Term) -> Term:
        if isinstance(t, Var):
            return t
        return App(syms.get(t.symbol, t.symbol), tuple(rt(x) for x in t.args))

    def req(eq: Equation) -> Equation:
        c = Context(tuple((n, ents.get(srt, srt))
                          for n, srt in eq.context.bindings))
        return Equation(c, rt(eq.lhs), rt(eq.rhs), ents.get(eq.sort, eq.sort))

    pres = s.presentation
    copy = compile_schema(SchemaPresentation(
        tuple(ents[e] for e in pres.entities),
        tuple(syms[f] for f in pres.edges),
        tuple(syms[a] for a in pres.attributes),
        tuple(req(eq) for eq in pres.path_eqs),
        tuple(req(eq) for eq in pres.obs_eqs)))
    to_copy = SchemaMapping.make(
        s, copy,
        {e: ents[e] for e in s.entities},
        {f: app(syms[f], Var("x")) for f in s.edges},
        {a: app(syms[a], Var("x")) for a in s.attributes})
    return copy, to_copy


def compose_bimodules(M: BimodulePresentation, N: BimodulePresentation,
                      budget: int = 10_000) -> BimodulePresentation:
    """Composite bimodule via the double collage: its generating edges are
    the normal-form paths from a src entity of M into a dst entity of N,
    its extra generating attributes the normal-form observations of middle
    entities reachable from src, with equations expressing pre/post
    composition and the translated observable equations."""
    if M.dst.presentation != N.src.presentation:
        raise SchemaMismatch("bimodule composition: middle schemas differ")
    R, S, T = M.src, M.dst, N.dst
    rp, sp, tp = R.presentation, S.presentation, T.presentation
    ent_names = [e.name for e in rp.entities + sp.entities + tp.entities]
    if len(set(ent_names)) != len(ent_names):
        raise NameClash("bimodule composition: entity name clash")
    ents = set(rp.entities) | set(sp.entities) | set(tp.entities)
    path_eqs = list(rp.path_eqs) + list(sp.path_eqs) + list(tp.path_eqs)
    obs_eqs = list(rp.obs_eqs) + list(sp.obs_eqs) + list(tp.obs_eqs)
    for eq in tuple(M.equations) + tuple(N.equations):
        (path_eqs if eq.sort in ents else obs_eqs).append(eq)
    double = compile_schema(SchemaPresentation(
        rp.entities + sp.entities + tp.entities,
        rp.edges + sp.edges + tp.edges + M.gen_edges + N.gen_edges,
        rp.attributes + sp.attributes + tp.attributes
        + M.gen_attrs + N.gen_attrs,
        tuple(path_eqs), tuple(obs_eqs)), budget)
    homs = saturate_entity_category(double, budget)

    def pname(t: Term) -> str:
        return render_term(t).replace("x.", "", 1).replace(".", "_")

    gen_edges: dict[Term, FunctionSymbol] = {}
    for r in rp.entities:
        for t in tp.entities:
            for p in homs[(r, t)]:
                gen_edges[p] = FunctionSymbol(f"b_{pname(p)}", (r,), t)
    mid_attrs = list(sp.attributes) + list(N.gen_attrs)
    gen_attrs: dict[Term, FunctionSymbol] = {}
    for r in rp.entities:
        for s in sp.entities:
            for p in homs[(r, s)]:
                for att in mid_attrs:
                    if att.dom[0] != s:
                        continue
                    key = _norm_obs(double, app(att, p))
                    if key not in gen_attrs:
                        gen_attrs[key] = FunctionSymbol(
                            f"o_{pname(key)}", (r,), att.cod)

    x = Var("x")
    r_attrs = set(rp.attributes) | set(M.gen_attrs)
    t_ents = set(tp.entities)
    s_ents = set(sp.entities)

    def tau(t: Term) -> Term:
        """Rewrite a double-collage observable over x:r into the composite
        bimodule's language."""
        if isinstance(t, Var):
            return t
        sym = t.symbol
        if sym in double.edges or sym in double.attributes:
            nt = _norm_obs(double, t)
            asym = nt.symbol
            if asym in double.attributes:
                dom = asym.dom[0]
                if asym in r_attrs or dom in set(rp.entities):
                    return nt
                if dom in s_ents:
                    return app(gen_attrs[nt], x)
                return App(asym, (app(gen_edges[nt.args[0]], x),))
            raise SchemaError(f"entity-sorted term in observable position: {t}")
        return App(sym, tuple(tau(a) for a in t.args))

    eqs: list[Equation] = []
    for p, E in gen_edges.items():
        r, t = E.dom[0], E.cod
        for f in R.edges:
            if f.cod != r:
                continue
            q = double.entity_rs.normalize(subst_map(p, {"x": app(f, x)}))
            eqs.append(Equation(ctx(("x", f.dom[0])),
                               app(E, app(f, x)), app(gen_edges[q], x), t))
        for g in T.edges_from(t):
            q = double.entity_rs.normalize(app(g, p))
            eqs.append(Equation(ctx(("x", r)),
                               app(g, app(E, x)), app(gen_edges[q], x), g.cod))
    for q, A in gen_attrs.items():
        r = A.dom[0]
        for f in R.edges:
            if f.cod != r:
                continue
            q2 = _norm_obs(double, subst_map(q, {"x": app(f, x)}))
            eqs.append(Equation(ctx(("x", f.dom[0])),
                               app(A, app(f, x)), app(gen_attrs[q2], x),
                               A.cod))
    for eq in M.equations:
        if eq.sort in ents:
            continue
        eqs.append(Equation(eq.context, tau(eq.lhs), tau(eq.rhs), eq.sort))
    mid_obs = [eq for eq in tuple(N.equations) + sp.obs_eqs
               if eq.sort not in ents]
    for r in rp.entities:
        for s in sp.entities:
            for p in homs[(r, s)]:
                for eq in mid_obs:
                    if eq.context.bindings[0][1] != s:
                        continue
                    name = eq.context.bindings[0][0]
                    l = subst_map(eq.lhs, {name: p})
                    rr = subst_map(eq.rhs, {name: p})
                    eqs.append(Equation(ctx(("x", r)), tau(l), tau(rr),
                                        eq.sort))
    return BimodulePresentation(
        R, T,
        tuple(gen_edges[p] for p in sorted(gen_edges, key=lambda p: term_key(p))),
        tuple(M.gen_attrs)
        + tuple(gen_attrs[q] for q in sorted(gen_attrs, key=lambda q: term_key(q))),
        tuple(eqs))


def lambda_(M: BimodulePresentation, I: InstancePresentation,
            budget: int = 10_000) -> SaturatedInstance:
    col = collage_of_bimodule(M)
    return delta(col.incl_dst, saturate(sigma(col.incl_src, I), budget))


def gamma(M: BimodulePresentation, J: SaturatedInstance,
          budget: int = 10_000) -> SaturatedInstance:
    col = collage_of_bimodule(M)
    return delta(col.incl_src, pi(col.incl_dst, J, budget))

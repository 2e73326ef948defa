"""Text DSL for theories, schemas, instances, mappings, bimodules,
queries and uber-queries (.cdb files).

Every parse and check error carries a file:line:column span.  The
grammar uses explicit `forall x:A .` binders for equations; terms use
postfix paths (x.f.g), infix `* + - <=`, function application, integer
and string literals, and `true`/`false`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .kernel import (
    AlgSignature, App, Context, ContextMorphism, Equation, FunctionSymbol,
    Presentation, Sort, Term, Var, app, int_literal, render_term,
    well_sort_check,
)
from .typeside import (
    BOOL, CONCAT, EPS, FALSE, INT, LE, NEG, PLUS, STR, TIMES, TRUE,
    TYPE_SORTS, int_term, str_literal,
)
from .schema import (
    Schema, SchemaMapping, SchemaPresentation, compile_schema,
)
from .instance import InstancePresentation
from .migration import BimodulePresentation
from .query import Query, UberBlock, UberQuery


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int

    def __str__(self):
        return f"{self.file}:{self.line}:{self.column}"


class DslError(Exception):
    def __init__(self, message: str, span: SourceSpan | None = None):
        self.span = span
        super().__init__(f"{span}: {message}" if span else message)


# --- tokenizer ----------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+|//[^\n]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*'*|\*(?![/)]))
  | (?P<op><=|->|:=|[{}();:,.=+\-\[\]|])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # ident | int | string | op | eof
    text: str
    span: SourceSpan


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    out = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise DslError(f"unexpected character {text[i]!r}",
                           SourceSpan(filename, line, col))
        kind = m.lastgroup
        tok = m.group(0)
        if kind != "ws":
            out.append(Token(kind, tok, SourceSpan(filename, line, col)))
        nl = tok.count("\n")
        if nl:
            line += nl
            col = len(tok) - tok.rfind("\n")
        else:
            col += len(tok)
        i = m.end()
    out.append(Token("eof", "", SourceSpan(filename, line, col)))
    return out


# --- workspace ----------------------------------------------------------


@dataclass
class Workspace:
    theories: dict[str, Presentation] = field(default_factory=dict)
    schemas: dict[str, Schema] = field(default_factory=dict)
    instances: dict[str, InstancePresentation] = field(default_factory=dict)
    mappings: dict[str, SchemaMapping] = field(default_factory=dict)
    bimodules: dict[str, BimodulePresentation] = field(default_factory=dict)
    queries: dict[str, Query] = field(default_factory=dict)
    uberqueries: dict[str, UberQuery] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)

    def schema_name(self, s: Schema) -> str:
        for n, sc in self.schemas.items():
            if sc is s:
                return n
        return "?"


# --- parser -------------------------------------------------------------


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.pos = 0

    # - token plumbing -

    def peek(self) -> Token:
        return self.toks[self.pos]

    def next(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise DslError(f"expected {text!r}, found {t.text!r}", t.span)
        return t

    def expect_ident(self) -> Token:
        t = self.next()
        if t.kind != "ident":
            raise DslError(f"expected a name, found {t.text!r}", t.span)
        return t

    def at(self, text: str) -> bool:
        return self.peek().text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.next()
            return True
        return False

    # - top level -

    def parse_workspace(self) -> Workspace:
        ws = Workspace()
        while self.peek().kind != "eof":
            kw = self.expect_ident()
            if kw.text == "theory":
                self.parse_theory(ws)
            elif kw.text == "schema":
                self.parse_schema(ws)
            elif kw.text == "instance":
                self.parse_instance(ws)
            elif kw.text == "mapping":
                self.parse_mapping(ws)
            elif kw.text == "bimodule":
                self.parse_bimodule(ws)
            elif kw.text == "query":
                self.parse_query(ws)
            elif kw.text == "uberquery":
                self.parse_uberquery(ws)
            elif kw.text == "typeside":
                raise DslError(
                    "the typeside is built in; `typeside` declarations are "
                    "reserved", kw.span)
            else:
                raise DslError(f"unknown declaration {kw.text!r}", kw.span)
        return ws

    # - theories -

    def parse_theory(self, ws: Workspace):
        name = self.expect_ident()
        self.expect("{")
        sorts: dict[str, Sort] = {}
        symbols: list[FunctionSymbol] = []
        equations: list[Equation] = []
        sig: AlgSignature | None = None
        while not self.accept("}"):
            section = self.expect_ident()
            if section.text == "sorts":
                while not self.accept(";"):
                    s = self.expect_ident()
                    sorts[s.text] = Sort(s.text)
            elif section.text in ("constants", "symbols"):
                # name [name...] : S1 ... Sn -> S  |  name : S
                while not self.accept(";"):
                    names = [self.next()]
                    while not self.at(":"):
                        names.append(self.next())
                    self.expect(":")
                    parts = []
                    while not self.at("->") and not self.at(";") \
                            and not self.at(","):
                        parts.append(self.expect_ident())
                    if self.accept("->"):
                        cod = self.expect_ident()
                    else:
                        cod, parts = parts[-1], parts[:-1]
                    dom = tuple(self._sort(sorts, p) for p in parts)
                    for n in names:
                        symbols.append(FunctionSymbol(
                            n.text, dom, self._sort(sorts, cod)))
                    self.accept(",")
            elif section.text == "equations":
                sig = AlgSignature(tuple(sorts.values()), tuple(symbols))
                while not self.accept(";"):
                    equations.append(self.parse_forall_eq(sig, sorts))
                    self.accept(",")
            else:
                raise DslError(f"unknown theory section {section.text!r}",
                               section.span)
        if sig is None:
            sig = AlgSignature(tuple(sorts.values()), tuple(symbols))
        ws.theories[name.text] = Presentation(sig, tuple(equations))
        ws.order.append(("theory", name.text))

    def _sort(self, sorts: dict[str, Sort], tok: Token) -> Sort:
        builtin = {s.name: s for s in TYPE_SORTS}
        if tok.text in sorts:
            return sorts[tok.text]
        if tok.text in builtin:
            return builtin[tok.text]
        raise DslError(f"unknown sort {tok.text!r}", tok.span)

    def parse_forall_eq(self, sig: AlgSignature,
                        sorts: dict[str, Sort]) -> Equation:
        t = self.expect_ident()
        if t.text != "forall":
            raise DslError(f"expected 'forall', found {t.text!r}", t.span)
        bindings = []
        while not self.accept("."):
            names = [self.expect_ident()]
            while not self.at(":"):
                names.append(self.expect_ident())
            self.expect(":")
            s = self._sort(sorts, self.expect_ident())
            bindings.extend((n.text, s) for n in names)
            self.accept(",")
        context = Context(tuple(bindings))
        lhs = self.parse_term(TermEnv(sig, context))
        eqt = self.expect("=")
        rhs = self.parse_term(TermEnv(sig, context))
        ls = well_sort_check(lhs, context, sig)
        rs = well_sort_check(rhs, context, sig)
        if ls != rs:
            raise DslError(f"equation sides have sorts {ls.name} and "
                           f"{rs.name}", eqt.span)
        return Equation(context, lhs, rhs, ls)

    # - schemas -

    def parse_schema(self, ws: Workspace):
        name = self.expect_ident()
        self.expect("{")
        entities: list[Sort] = []
        edges: list[FunctionSymbol] = []
        attributes: list[FunctionSymbol] = []
        path_eqs: list[Equation] = []
        obs_eqs: list[Equation] = []
        builtin = {s.name: s for s in TYPE_SORTS}

        def sort_of(tok: Token) -> Sort:
            for e in entities:
                if e.name == tok.text:
                    return e
            if tok.text in builtin:
                return builtin[tok.text]
            raise DslError(f"unknown sort {tok.text!r}", tok.span)

        while not self.accept("}"):
            section = self.expect_ident()
            if section.text == "entities":
                while not self.accept(";"):
                    entities.append(Sort(self.expect_ident().text))
            elif section.text in ("edges", "attributes"):
                into = edges if section.text == "edges" else attributes
                while not self.accept(";"):
                    names = [self.expect_ident()]
                    while self.accept(","):
                        if self.peek_is_decl_name():
                            names.append(self.expect_ident())
                        else:
                            break
                    self.expect(":")
                    dom = sort_of(self.expect_ident())
                    self.expect("->")
                    cod = sort_of(self.expect_ident())
                    for n in names:
                        into.append(FunctionSymbol(n.text, (dom,), cod))
                    self.accept(",")
            elif section.text in ("path_eqs", "obs_eqs"):
                sig = AlgSignature(
                    TYPE_SORTS + tuple(entities),
                    self._collage_symbols(edges, attributes))
                sorts = {e.name: e for e in entities}
                sorts.update(builtin)
                into = path_eqs if section.text == "path_eqs" else obs_eqs
                while not self.accept(";"):
                    into.append(self._schema_eq(sig, sorts))
                    self.accept(",")
            else:
                raise DslError(f"unknown schema section {section.text!r}",
                               section.span)
        pres = SchemaPresentation(tuple(entities), tuple(edges),
                                  tuple(attributes), tuple(path_eqs),
                                  tuple(obs_eqs))
        ws.schemas[name.text] = compile_schema(pres)
        ws.order.append(("schema", name.text))

    def peek_is_decl_name(self) -> bool:
        return (self.peek().kind == "ident"
                and self.toks[self.pos + 1].text in (",", ":"))

    @staticmethod
    def _collage_symbols(edges, attributes):
        from .typeside import TYPE_SYMBOLS
        return TYPE_SYMBOLS + tuple(edges) + tuple(attributes)

    def _schema_eq(self, sig, sorts) -> Equation:
        return self.parse_forall_eq(sig, sorts)

    # - instances -

    def parse_instance(self, ws: Workspace):
        name = self.expect_ident()
        self.expect_kw("on")
        sname = self.expect_ident()
        schema = self._schema(ws, sname)
        self.expect("{")
        bindings: list[tuple[str, Sort]] = []
        equations: list[Equation] = []
        builtin = {s.name: s for s in TYPE_SORTS}
        ents = {e.name: e for e in schema.entities}
        while not self.accept("}"):
            section = self.expect_ident()
            if section.text == "generators":
                while not self.accept(";"):
                    names = [self.expect_ident()]
                    while not self.at(":"):
                        names.append(self.expect_ident())
                    self.expect(":")
                    stok = self.expect_ident()
                    s = ents.get(stok.text) or builtin.get(stok.text)
                    if s is None:
                        raise DslError(f"unknown sort {stok.text!r}",
                                       stok.span)
                    bindings.extend((n.text, s) for n in names)
                    self.accept(",")
            elif section.text == "equations":
                context = Context(tuple(bindings))
                env = TermEnv(schema.collage_sig, context)
                while not self.accept(";"):
                    lhs = self.parse_term(env)
                    eqt = self.expect("=")
                    rhs = self.parse_term(env)
                    equations.append(self._mk_eq(schema.collage_sig, context,
                                                 lhs, rhs, eqt.span))
                    self.accept(",")
            else:
                raise DslError(f"unknown instance section {section.text!r}",
                               section.span)
        ws.instances[name.text] = InstancePresentation(
            schema, Context(tuple(bindings)), tuple(equations))
        ws.order.append(("instance", name.text))

    def _mk_eq(self, sig, context, lhs, rhs, span) -> Equation:
        ls = well_sort_check(lhs, context, sig)
        rs = well_sort_check(rhs, context, sig)
        if ls != rs:
            raise DslError(
                f"equation sides have sorts {ls.name} and {rs.name}", span)
        return Equation(context, lhs, rhs, ls)

    def expect_kw(self, kw: str):
        t = self.expect_ident()
        if t.text != kw:
            raise DslError(f"expected {kw!r}, found {t.text!r}", t.span)

    def _schema(self, ws: Workspace, tok: Token) -> Schema:
        if tok.text not in ws.schemas:
            raise DslError(f"unknown schema {tok.text!r}", tok.span)
        return ws.schemas[tok.text]

    # - mappings -

    def parse_mapping(self, ws: Workspace):
        name = self.expect_ident()
        self.expect(":")
        src = self._schema(ws, self.expect_ident())
        self.expect("->")
        tgt = self._schema(ws, self.expect_ident())
        self.expect("{")
        entity_map: dict[Sort, Sort] = {}
        edge_map: dict[FunctionSymbol, Term] = {}
        attr_map: dict[FunctionSymbol, Term] = {}
        tgt_ents = {e.name: e for e in tgt.entities}
        while not self.accept("}"):
            section = self.expect_ident()
            if section.text == "entity":
                stok = self.expect_ident()
                self.expect("->")
                ttok = self.expect_ident()
                e = self._entity(src, stok)
                if ttok.text not in tgt_ents:
                    raise DslError(f"unknown entity {ttok.text!r}", ttok.span)
                entity_map[e] = tgt_ents[ttok.text]
                self.expect(";")
            elif section.text in ("edge", "attribute"):
                ntok = self.expect_ident()
                self.expect("->")
                syms = {f.name: f for f in (src.edges if section.text == "edge"
                                            else src.attributes)}
                if ntok.text not in syms:
                    raise DslError(f"unknown {section.text} {ntok.text!r}",
                                   ntok.span)
                sym = syms[ntok.text]
                dom_img = entity_map.get(sym.dom[0])
                if dom_img is None:
                    raise DslError(
                        f"entity image of {sym.dom[0].name} must be declared "
                        f"before {ntok.text}", ntok.span)
                context = Context((("x", dom_img),))
                env = TermEnv(tgt.collage_sig, context, implicit_x=True)
                term = self.parse_term(env)
                (edge_map if section.text == "edge" else attr_map)[sym] = term
                self.expect(";")
            else:
                raise DslError(f"unknown mapping section {section.text!r}",
                               section.span)
        ws.mappings[name.text] = SchemaMapping.make(src, tgt, entity_map,
                                                    edge_map, attr_map)
        ws.order.append(("mapping", name.text))

    def _entity(self, schema: Schema, tok: Token) -> Sort:
        for e in schema.entities:
            if e.name == tok.text:
                return e
        raise DslError(f"unknown entity {tok.text!r}", tok.span)

    # - bimodules -

    def parse_bimodule(self, ws: Workspace):
        name = self.expect_ident()
        self.expect(":")
        src = self._schema(ws, self.expect_ident())
        self.expect("->")
        dst = self._schema(ws, self.expect_ident())
        self.expect("{")
        gen_edges: list[FunctionSymbol] = []
        gen_attrs: list[FunctionSymbol] = []
        equations: list[Equation] = []
        builtin = {s.name: s for s in TYPE_SORTS}
        src_ents = {e.name: e for e in src.entities}
        dst_ents = {e.name: e for e in dst.entities}
        while not self.accept("}"):
            section = self.expect_ident()
            if section.text in ("edges", "attributes"):
                while not self.accept(";"):
                    ntok = self.expect_ident()
                    self.expect(":")
                    dtok = self.expect_ident()
                    self.expect("->")
                    ctok = self.expect_ident()
                    if dtok.text not in src_ents:
                        raise DslError(f"unknown entity {dtok.text!r}",
                                       dtok.span)
                    if section.text == "edges":
                        if ctok.text not in dst_ents:
                            raise DslError(f"unknown entity {ctok.text!r}",
                                           ctok.span)
                        gen_edges.append(FunctionSymbol(
                            ntok.text, (src_ents[dtok.text],),
                            dst_ents[ctok.text]))
                    else:
                        if ctok.text not in builtin:
                            raise DslError(f"unknown sort {ctok.text!r}",
                                           ctok.span)
                        gen_attrs.append(FunctionSymbol(
                            ntok.text, (src_ents[dtok.text],),
                            builtin[ctok.text]))
                    self.accept(",")
            elif section.text == "equations":
                sig = AlgSignature(
                    TYPE_SORTS + src.entities + dst.entities,
                    self._collage_symbols(
                        src.edges + dst.edges + tuple(gen_edges),
                        src.attributes + dst.attributes + tuple(gen_attrs)))
                sorts = dict(builtin)
                sorts.update(src_ents)
                sorts.update(dst_ents)
                while not self.accept(";"):
                    equations.append(self.parse_forall_eq(sig, sorts))
                while self.at("forall"):
                    equations.append(self.parse_forall_eq(sig, sorts))
                    self.expect(";")
            else:
                raise DslError(f"unknown bimodule section {section.text!r}",
                               section.span)
        ws.bimodules[name.text] = BimodulePresentation(
            src, dst, tuple(gen_edges), tuple(gen_attrs), tuple(equations))
        ws.order.append(("bimodule", name.text))

    # - queries -

    def parse_query(self, ws: Workspace):
        name = self.expect_ident()
        self.expect_kw("on")
        schema = self._schema(ws, self.expect_ident())
        self.expect("{")
        for_ctx, where_eqs, returns = self._parse_block_body(schema)
        self.expect("}")
        ret_bindings = []
        assignment = {}
        for n, t in returns:
            s = well_sort_check(t, for_ctx, schema.collage_sig)
            ret_bindings.append((n, s))
            assignment[n] = t
        ret_ctx = Context(tuple(ret_bindings))
        ws.queries[name.text] = Query(
            schema, for_ctx, tuple(where_eqs), ret_ctx,
            ContextMorphism.make(for_ctx, ret_ctx, assignment))
        ws.order.append(("query", name.text))

    def _parse_block_body(self, schema: Schema, result_schema=None,
                          blocks=None):
        ents = {e.name: e for e in schema.entities}
        builtin = {s.name: s for s in TYPE_SORTS}
        for_ctx = Context(())
        where_eqs: list[Equation] = []
        returns: list[tuple[str, Term]] = []
        keys: list[tuple[FunctionSymbol, tuple[SourceSpan, str, dict]]] = []
        while self.peek().text not in ("}",):
            section = self.expect_ident()
            if section.text == "for":
                bindings = []
                while not self.accept(";"):
                    n = self.expect_ident()
                    self.expect(":")
                    stok = self.expect_ident()
                    s = ents.get(stok.text) or builtin.get(stok.text)
                    if s is None:
                        raise DslError(f"unknown sort {stok.text!r}",
                                       stok.span)
                    bindings.append((n.text, s))
                    self.accept(",")
                for_ctx = Context(tuple(bindings))
            elif section.text == "where":
                env = TermEnv(schema.collage_sig, for_ctx)
                while not self.accept(";"):
                    lhs = self.parse_term(env)
                    eqt = self.expect("=")
                    rhs = self.parse_term(env)
                    where_eqs.append(self._mk_eq(
                        schema.collage_sig, for_ctx, lhs, rhs, eqt.span))
                    self.accept(",")
            elif section.text == "return":
                env = TermEnv(schema.collage_sig, for_ctx)
                while not self.accept(";"):
                    n = self.expect_ident()
                    self.expect(":=")
                    returns.append((n.text, self.parse_term(env)))
                    self.accept(",")
            elif section.text == "keys":
                while not self.accept(";"):
                    ftok = self.expect_ident()
                    self.expect(":=")
                    btok = self.expect_ident()
                    self.expect("[")
                    assigns: dict[str, Term] = {}
                    env = TermEnv(schema.collage_sig, for_ctx)
                    while not self.accept("]"):
                        v = self.expect_ident()
                        self.expect(":=")
                        assigns[v.text] = self.parse_term(env)
                        self.accept(",")
                    keys.append((ftok, (btok, assigns)))
                    self.accept(",")
            else:
                raise DslError(f"unknown query section {section.text!r}",
                               section.span)
        if blocks is None:
            if keys:
                raise DslError("keys clauses require an uberquery",
                               keys[0][0].span)
            return for_ctx, where_eqs, returns
        return for_ctx, where_eqs, returns, keys

    def parse_uberquery(self, ws: Workspace):
        name = self.expect_ident()
        self.expect_kw("on")
        schema = self._schema(ws, self.expect_ident())
        self.expect("->")
        result = self._schema(ws, self.expect_ident())
        self.expect("{")
        raw_blocks = {}
        while not self.accept("}"):
            self.expect_kw("entity")
            etok = self.expect_ident()
            e = self._entity(result, etok)
            self.expect("{")
            for_ctx, where_eqs, returns, keys = self._parse_block_body(
                schema, result, blocks=True)
            self.expect("}")
            raw_blocks[e] = (for_ctx, where_eqs, returns, keys, etok)
        blocks = []
        for e, (for_ctx, where_eqs, returns, keys, etok) in raw_blocks.items():
            attrs = {a.name: a for a in result.attrs_from(e)}
            rets = []
            for n, t in returns:
                if n not in attrs:
                    raise DslError(f"unknown result attribute {n!r}",
                                   etok.span)
                rets.append((attrs[n], t))
            edges = {f.name: f for f in result.edges_from(e)}
            key_list = []
            for ftok, (btok, assigns) in keys:
                if ftok.text not in edges:
                    raise DslError(f"unknown result edge {ftok.text!r}",
                                   ftok.span)
                f = edges[ftok.text]
                cod_ctx = raw_blocks[f.cod][0]
                key_list.append((f, ContextMorphism.make(
                    for_ctx, cod_ctx, assigns)))
            blocks.append((e, UberBlock(for_ctx, tuple(where_eqs),
                                        tuple(key_list), tuple(rets))))
        ws.uberqueries[name.text] = UberQuery(schema, result, tuple(blocks))
        ws.order.append(("uberquery", name.text))

    # - terms -

    def parse_term(self, env: "TermEnv") -> Term:
        return self._cmp(env)

    def _cmp(self, env) -> Term:
        t = self._add(env)
        if self.accept("<="):
            u = self._add(env)
            return app(LE, t, u)
        return t

    def _add(self, env) -> Term:
        t = self._mul(env)
        while True:
            if self.accept("+"):
                t = app(PLUS, t, self._mul(env))
            elif self.accept("-"):
                t = app(PLUS, t, app(NEG, self._mul(env)))
            else:
                return t

    def _mul(self, env) -> Term:
        t = self._unary(env)
        while self.at("*") and env.infix_symbol("*") is not None:
            self.next()
            t = App(env.infix_symbol("*"), (t, self._unary(env)))
        return t

    def _unary(self, env) -> Term:
        if self.accept("-"):
            return app(NEG, self._unary(env))
        return self._postfix(env)

    def _postfix(self, env) -> Term:
        t = self._primary(env)
        while self.at(".") and self.toks[self.pos + 1].kind == "ident":
            self.next()
            ntok = self.expect_ident()
            sym = env.unary_symbol(ntok.text)
            if sym is None:
                raise DslError(f"unknown symbol {ntok.text!r}", ntok.span)
            t = App(sym, (t,))
        return t

    def _primary(self, env) -> Term:
        t = self.next()
        if t.text == "(":
            out = self.parse_term(env)
            self.expect(")")
            return out
        if t.kind == "int":
            return env.int_term(int(t.text), t.span)
        if t.kind == "string":
            return str_literal(t.text[1:-1].replace('\\"', '"')
                               .replace("\\\\", "\\"))
        if t.kind != "ident":
            raise DslError(f"unexpected {t.text!r} in term", t.span)
        if t.text == "true":
            return app(TRUE)
        if t.text == "false":
            return app(FALSE)
        if self.at("("):
            self.next()
            args = []
            while not self.accept(")"):
                args.append(self.parse_term(env))
                self.accept(",")
            sym = env.symbol(t.text, len(args))
            if sym is None:
                raise DslError(f"unknown symbol {t.text!r}", t.span)
            return App(sym, tuple(args))
        return env.atom(t.text, t.span)


class TermEnv:
    """Name resolution for term parsing: context variables, signature
    symbols, and (for mapping images) bare paths rooted at x."""

    def __init__(self, sig: AlgSignature, context: Context,
                 implicit_x: bool = False):
        self.sig = sig
        self.context = context
        self.implicit_x = implicit_x

    def _lookup(self, name: str, arity: int | None = None):
        sym = self.sig.symbols.get(name)
        if sym is not None and (arity is None or len(sym.dom) == arity):
            return sym
        return None

    def symbol(self, name: str, arity: int):
        return self._lookup(name, arity)

    def unary_symbol(self, name: str):
        return self._lookup(name, 1)

    def infix_symbol(self, name: str):
        if name == "*":
            return self._lookup("*", 2) or (TIMES if "Int" in self.sig.sorts
                                            else None)
        return None

    def int_term(self, n: int, span: SourceSpan) -> Term:
        if "Int" in self.sig.sorts:
            return int_term(n)
        sym = self._lookup(str(n), 0)
        if sym is not None:
            return app(sym)
        raise DslError(f"no constant named {n}", span)

    def atom(self, name: str, span: SourceSpan) -> Term:
        if any(n == name for n, _ in self.context.bindings):
            return Var(name)
        sym = self._lookup(name, 0)
        if sym is not None:
            return app(sym)
        if self.implicit_x:
            sym = self._lookup(name, 1)
            if sym is not None:
                return App(sym, (Var("x"),))
        raise DslError(f"unknown name {name!r}", span)


def parse_workspace(text: str, filename: str = "<input>") -> Workspace:
    return Parser(tokenize(text, filename)).parse_workspace()


# --- pretty printer -----------------------------------------------------


def _literal_string(t: Term) -> str | None:
    """Reassemble a letter-concatenation term into its source string."""
    if isinstance(t, App):
        if t.symbol == EPS:
            return ""
        n = t.symbol.name
        if t.symbol.arity == 0 and len(n) == 3 and n[0] == n[2] == "'":
            return n[1]
        if t.symbol == CONCAT:
            a = _literal_string(t.args[0])
            b = _literal_string(t.args[1])
            if a is not None and b is not None:
                return a + b
    return None


def render_dsl_term(t: Term) -> str:
    """Print a term in the surface syntax the parser accepts."""
    return _rdt(t, 0)


def _rdt(t: Term, prec: int) -> str:
    if isinstance(t, Var):
        return t.name
    s = _literal_string(t)
    if s is not None:
        return f'"{s}"'
    sym = t.symbol
    if sym.arity == 0:
        return sym.name
    if sym.name == "<=" and sym.arity == 2:
        return f"({_rdt(t.args[0], 1)} <= {_rdt(t.args[1], 1)})"
    if sym.name == "+" and sym.arity == 2:
        a, b = t.args
        if isinstance(b, App) and b.symbol.name == "-" and b.symbol.arity == 1:
            inner = f"{_rdt(a, 1)} - {_rdt(b.args[0], 2)}"
        else:
            inner = f"{_rdt(a, 1)} + {_rdt(b, 2)}"
        return f"({inner})" if prec > 1 else inner
    if sym.name == "*" and sym.arity == 2:
        inner = f"{_rdt(t.args[0], 2)} * {_rdt(t.args[1], 3)}"
        return f"({inner})" if prec > 2 else inner
    if sym.name == "-" and sym.arity == 1:
        return f"-{_rdt(t.args[0], 3)}"
    if sym.arity == 1:
        return f"{_rdt(t.args[0], 3)}.{sym.name}"
    inner = ", ".join(_rdt(a, 0) for a in t.args)
    return f"{sym.name}({inner})"


def _render_eq(eq: Equation) -> str:
    binds = ", ".join(f"{n}:{s.name}" for n, s in eq.context.bindings)
    return (f"forall {binds} . {render_dsl_term(eq.lhs)} = "
            f"{render_dsl_term(eq.rhs)}")


def render_workspace(ws: Workspace) -> str:
    out = []
    for kind, name in ws.order:
        if kind == "theory":
            out.append(_render_theory(name, ws.theories[name]))
        elif kind == "schema":
            out.append(_render_schema(name, ws.schemas[name]))
        elif kind == "instance":
            out.append(_render_instance(name, ws))
        elif kind == "mapping":
            out.append(_render_mapping(name, ws))
        elif kind == "query":
            out.append(_render_query(name, ws))
        elif kind == "uberquery":
            out.append(_render_uberquery(name, ws))
        elif kind == "bimodule":
            out.append(_render_bimodule(name, ws))
    return "\n\n".join(out) + "\n"


def _render_theory(name: str, th: Presentation) -> str:
    lines = [f"theory {name} {{"]
    lines.append("  sorts " + " ".join(th.signature.sorts) + ";")
    for sym in th.signature.symbols.values():
        dom = " ".join(s.name for s in sym.dom)
        arrow = f"{dom} -> {sym.cod.name}" if sym.dom else sym.cod.name
        lines.append(f"  symbols {sym.name} : {arrow};")
    for eq in th.equations:
        lines.append(f"  equations {_render_eq(eq)};")
    lines.append("}")
    return "\n".join(lines)


def _render_schema(name: str, s: Schema) -> str:
    p = s.presentation
    lines = [f"schema {name} {{"]
    lines.append("  entities " + " ".join(e.name for e in p.entities) + ";")
    for f in p.edges:
        lines.append(f"  edges {f.name} : {f.dom[0].name} -> {f.cod.name};")
    for a in p.attributes:
        lines.append(f"  attributes {a.name} : {a.dom[0].name} -> "
                     f"{a.cod.name};")
    for eq in p.path_eqs:
        lines.append(f"  path_eqs {_render_eq(eq)};")
    for eq in p.obs_eqs:
        lines.append(f"  obs_eqs {_render_eq(eq)};")
    lines.append("}")
    return "\n".join(lines)


def _render_instance(name: str, ws: Workspace) -> str:
    ip = ws.instances[name]
    lines = [f"instance {name} on {ws.schema_name(ip.schema)} {{"]
    for n, s in ip.generators.bindings:
        lines.append(f"  generators {n} : {s.name};")
    for eq in ip.equations:
        lines.append(f"  equations {render_dsl_term(eq.lhs)} = "
                     f"{render_dsl_term(eq.rhs)};")
    lines.append("}")
    return "\n".join(lines)


def _render_mapping(name: str, ws: Workspace) -> str:
    F = ws.mappings[name]
    lines = [f"mapping {name} : {ws.schema_name(F.source)} -> "
             f"{ws.schema_name(F.target)} {{"]
    for a, b in F.entity_map:
        lines.append(f"  entity {a.name} -> {b.name};")
    for f, t in F.edge_map:
        lines.append(f"  edge {f.name} -> {render_dsl_term(t)};")
    for a, t in F.attr_map:
        lines.append(f"  attribute {a.name} -> {render_dsl_term(t)};")
    lines.append("}")
    return "\n".join(lines)


def _render_query(name: str, ws: Workspace) -> str:
    Q = ws.queries[name]
    lines = [f"query {name} on {ws.schema_name(Q.schema)} {{"]
    lines.append("  for " + ", ".join(f"{n}:{s.name}"
                                      for n, s in Q.for_ctx.bindings) + ";")
    if Q.where_eqs:
        lines.append("  where " + ", ".join(
            f"{render_dsl_term(eq.lhs)} = {render_dsl_term(eq.rhs)}"
            for eq in Q.where_eqs) + ";")
    if Q.return_ctx.bindings:
        lines.append("  return " + ", ".join(
            f"{n} := {render_dsl_term(Q.return_morph(n))}"
            for n, _ in Q.return_ctx.bindings) + ";")
    lines.append("}")
    return "\n".join(lines)


def _render_uberquery(name: str, ws: Workspace) -> str:
    N = ws.uberqueries[name]
    lines = [f"uberquery {name} on {ws.schema_name(N.schema)} -> "
             f"{ws.schema_name(N.result_schema)} {{"]
    for e, b in N.blocks:
        lines.append(f"  entity {e.name} {{")
        lines.append("    for " + ", ".join(
            f"{n}:{s.name}" for n, s in b.for_ctx.bindings) + ";")
        if b.where_eqs:
            lines.append("    where " + ", ".join(
                f"{render_dsl_term(eq.lhs)} = {render_dsl_term(eq.rhs)}"
                for eq in b.where_eqs) + ";")
        for f, m in b.keys:
            assigns = ", ".join(f"{n} := {render_dsl_term(t)}"
                                for n, t in m.assignment)
            lines.append(f"    keys {f.name} := {f.cod.name}[{assigns}];")
        if b.returns:
            lines.append("    return " + ", ".join(
                f"{a.name} := {render_dsl_term(t)}" for a, t in b.returns) + ";")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def _render_bimodule(name: str, ws: Workspace) -> str:
    M = ws.bimodules[name]
    lines = [f"bimodule {name} : {ws.schema_name(M.src)} -> "
             f"{ws.schema_name(M.dst)} {{"]
    for g in M.gen_edges:
        lines.append(f"  edges {g.name} : {g.dom[0].name} -> {g.cod.name};")
    for a in M.gen_attrs:
        lines.append(f"  attributes {a.name} : {a.dom[0].name} -> "
                     f"{a.cod.name};")
    for eq in M.equations:
        lines.append(f"  equations {_render_eq(eq)};")
    lines.append("}")
    return "\n".join(lines)

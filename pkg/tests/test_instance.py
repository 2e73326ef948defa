"""Instance saturation, transforms, and table rendering."""

import itertools
import json

import pytest

from catdb.kernel import (
    Context, Equation, FunctionSymbol, Sort, Var, app, ctx,
)
from catdb.rewrite import EqResult
from catdb.schema import PossiblyInfinite, SchemaPresentation, compile_schema
from catdb.instance import (
    DomainDependence, InconsistentInstance, InstanceError,
    InstancePresentation, SaturatedInstance, Transform, canonical_presentation,
    check_transform, enumerate_transforms, hom_count, instances_isomorphic,
    observable_decide, render_tables, representable_instance, saturate,
    tables, tables_json,
)
from catdb.typeside import INT, LE, STR, TRUE, int_term, str_literal


def table_cells(si, entity_name):
    tab = tables(si)["entities"][entity_name]
    return {row[0]: dict(zip(tab["columns"][1:], row[1:]))
            for row in tab["rows"]}


class TestSaturation:
    def test_employee_tables_cell_for_cell(self, satJ):
        emp = table_cells(satJ, "Emp")
        assert emp == {
            "e1": {"mgr": "e1", "wrk": "d3", "last": '"Gauss"', "sal": "250"},
            "e2": {"mgr": "e4", "wrk": "d2", "last": '"Noether"', "sal": "200"},
            "e3": {"mgr": "e3", "wrk": "d1", "last": '"Einstein"', "sal": "300"},
            "e4": {"mgr": "e4", "wrk": "d2", "last": '"Turing"', "sal": "400"},
            "e5": {"mgr": "e1", "wrk": "d3", "last": '"Newton"', "sal": "100"},
            "e6": {"mgr": "e7", "wrk": "d2", "last": '"Euclid"', "sal": "150"},
            "e7": {"mgr": "e7", "wrk": "d2", "last": '"Hypatia"', "sal": "x"},
        }
        dept = table_cells(satJ, "Dept")
        assert dept == {
            "d1": {"sec": "e3", "name": '"HR"'},
            "d2": {"sec": "e6", "name": '"Admin"'},
            "d3": {"sec": "e5", "name": '"IT"'},
        }

    def test_type_algebra_hypotheses(self, satJ):
        summary = tables(satJ)["typealg"]
        assert summary["nulls"] == ["x : Int"]
        assert summary["constraints"] == ["(150 <= x) = true"]

    def test_ground_variant_has_no_nulls(self, ws):
        si = saturate(ws.instances["Jbar"])
        assert tables(si)["typealg"] == {"nulls": [], "constraints": []}
        assert len(si.rows([e for e in si.schema.entities
                            if e.name == "Emp"][0])) == 6

    def test_inconsistent_instance_rejected(self, ws):
        s = ws.schemas["S"]
        sal = {a.name: a for a in s.attributes}["sal"]
        G = ctx(("e", [e for e in s.entities if e.name == "Emp"][0]))
        ip = InstancePresentation(s, G, (
            Equation(G, app(sal, Var("e")), int_term(1), INT),
            Equation(G, app(sal, Var("e")), int_term(2), INT),
        ))
        with pytest.raises(InconsistentInstance):
            saturate(ip)

    def test_possibly_infinite_saturation(self):
        A = Sort("A")
        loop = FunctionSymbol("loop", (A,), A)
        s = compile_schema(SchemaPresentation((A,), (loop,), ()))
        with pytest.raises(PossiblyInfinite):
            saturate(InstancePresentation(s, ctx(("a", A))), budget=5)

    def test_representable_instance(self, ws):
        s = ws.schemas["S"]
        emp = [e for e in s.entities if e.name == "Emp"][0]
        si = saturate(representable_instance(s, emp))
        by_name = {e.name: e for e in s.entities}
        assert len(si.rows(by_name["Emp"])) == 4
        assert len(si.rows(by_name["Dept"])) == 1


class TestTransforms:
    def test_hom_counts_from_frozen_instances(self, ws, satJ):
        assert hom_count(ws.instances["I"], satJ) == 3
        got = {tuple(t.row_assignment()[n].name for n in ("e", "d"))
               for t in enumerate_transforms(ws.instances["I"], satJ)}
        assert got == {("e2", "d1"), ("e6", "d1"), ("e6", "d2")}

    def test_presented_transforms_between_instances(self, ws):
        sat_ip = saturate(ws.instances["I'"])
        ts = enumerate_transforms(ws.instances["I"], sat_ip)
        rendered = sorted(t.render() for t in ts)
        assert rendered == ["[e := e', d := e'.wrk]",
                           "[e := e'.wrk.sec, d := e'.wrk]"]

    def test_enumeration_matches_brute_force(self, ws, satJ):
        src = ws.instances["I"]
        got = {tuple(sorted(t.row_assignment().items()))
               for t in enumerate_transforms(src, satJ)}
        # oracle: try every assignment of generators to rows and keep the
        # ones that check out.
        gens = src.entity_generators()
        pools = [satJ.rows(s) for _, s in gens]
        want = set()
        for combo in itertools.product(*pools):
            rows = tuple((n, r) for (n, _), r in zip(gens, combo))
            t = Transform(src, satJ, rows, ())
            if not check_transform(t):
                want.add(tuple(sorted(dict(rows).items())))
        assert got == want

    def test_unforced_type_generator_rejected(self, ws, satJ):
        s = ws.schemas["S"]
        emp = [e for e in s.entities if e.name == "Emp"][0]
        G = ctx(("e", emp), ("y", INT))
        free = InstancePresentation(s, G, ())
        with pytest.raises(DomainDependence):
            enumerate_transforms(free, satJ)

    def test_mismatched_schemas_rejected(self, ws, satJ):
        r = ws.schemas["R"]
        a = [e for e in r.entities if e.name == "A"][0]
        other = InstancePresentation(r, ctx(("a", a)), ())
        with pytest.raises(InstanceError):
            enumerate_transforms(other, satJ)


class TestCanonicalPresentation:
    def test_round_trip_is_isomorphic(self, ws, satJ):
        again = saturate(canonical_presentation(satJ))
        assert instances_isomorphic(satJ, again)

    def test_round_trip_preserves_hom_counts(self, ws, satJ):
        again = saturate(canonical_presentation(satJ))
        assert hom_count(ws.instances["I"], again) == 3


class TestIsomorphism:
    def test_different_row_counts_rejected(self, ws, satJ):
        assert not instances_isomorphic(satJ, saturate(ws.instances["Jbar"]))

    def test_different_cells_rejected(self, ws):
        a = saturate(ws.instances["I"])
        b = saturate(ws.instances["I"])
        assert instances_isomorphic(a, b)

    def test_self_isomorphic(self, satJ):
        assert instances_isomorphic(satJ, satJ)


class TestObservables:
    def test_observable_consequence(self, ws):
        s = ws.schemas["S"]
        emp = [e for e in s.entities if e.name == "Emp"][0]
        sal = {a.name: a for a in s.attributes}["sal"]
        mgr = {f.name: f for f in s.edges}["mgr"]
        e = Var("e")
        c = ctx(("e", emp))
        # e.sal <= e.mgr.sal is a hypothesis; applied at e.mgr it gives
        # e.mgr.sal <= e.mgr.mgr.sal = e.mgr.sal, which is reflexive truth.
        got = observable_decide(
            s, c, app(LE, app(sal, app(mgr, e)), app(sal, app(mgr, e))),
            app(TRUE))
        assert got == EqResult.Equal
        free = observable_decide(
            s, c, app(LE, app(sal, app(mgr, e)), app(sal, e)), app(TRUE))
        assert free != EqResult.Equal


class TestRendering:
    def test_json_and_ascii_agree(self, satJ):
        data = json.loads(tables_json(satJ))
        text = render_tables(satJ)
        for ename, tab in data["entities"].items():
            assert ename in text
            for row in tab["rows"]:
                for cell in row:
                    assert cell in text

    def test_deterministic(self, ws):
        a = render_tables(saturate(ws.instances["J"]))
        b = render_tables(saturate(ws.instances["J"]))
        assert a == b

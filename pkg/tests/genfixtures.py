"""Seeded random instance presentations for the property suites."""

import random
import string

from catdb.kernel import Context, Equation, Var, app
from catdb.schema import Schema
from catdb.instance import InstancePresentation
from catdb.typeside import STR, str_literal


def random_instance(rng: random.Random, schema: Schema,
                    max_rows_per_entity: int = 3,
                    edge_fill: float = 0.7,
                    attr_fill: float = 0.4) -> InstancePresentation:
    """A random instance: a few generator rows per entity, edges wired to
    random rows (or left free), and string attributes optionally set.

    Integer/boolean attributes are left free so the random data can never
    contradict ordering hypotheses baked into a schema's observable
    equations.
    """
    names: dict = {}
    bindings = []
    for e in schema.entities:
        count = rng.randrange(1, max_rows_per_entity + 1)
        names[e] = [f"{e.name.lower()}{i}" for i in range(count)]
        bindings += [(n, e) for n in names[e]]
    G = Context(tuple(bindings))
    eqs = []
    for f in schema.edges:
        for n in names[f.dom[0]]:
            if rng.random() < edge_fill:
                eqs.append(Equation(
                    G, app(f, Var(n)), Var(rng.choice(names[f.cod])),
                    f.cod))
    for a in schema.attributes:
        if a.cod != STR:
            continue
        for n in names[a.dom[0]]:
            if rng.random() < attr_fill:
                word = "".join(rng.choice(string.ascii_lowercase)
                               for _ in range(2))
                eqs.append(Equation(
                    G, app(a, Var(n)), str_literal(word), STR))
    return InstancePresentation(schema, G, tuple(eqs))

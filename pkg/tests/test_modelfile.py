"""Model file format and JSON interchange round-trips."""

from __future__ import annotations

import json
from importlib import resources

import pytest

from santkit.concretize import concretize
from santkit.errors import ParseError
from santkit.fixtures import (USER_INTERNAL, build_geo_template,
                              build_tmi_template, build_user_template)
from santkit.jsonio import (dumps, json_to_san, json_to_template, san_to_json,
                            template_to_json)
from santkit.modelfile import (assignments_to_text, coerce_assignment,
                               load_assignments, load_template,
                               parse_assignments_text, parse_template_text,
                               template_to_text)
from santkit.template import validate_template

MODELS = resources.files("santkit") / "models"

BUILDERS = {
    "user": build_user_template,
    "geo": build_geo_template,
    "tmi": build_tmi_template,
}


@pytest.mark.parametrize("stem", sorted(BUILDERS))
def test_bundled_file_matches_builder(stem):
    doc = load_template(str(MODELS / f"{stem}.sant"))
    assert doc.template == BUILDERS[stem]()


@pytest.mark.parametrize("stem", sorted(BUILDERS))
def test_dsl_round_trip(stem):
    template = BUILDERS[stem]()
    text = template_to_text(template)
    assert parse_template_text(text).template == template


@pytest.mark.parametrize("stem", sorted(BUILDERS))
def test_template_json_round_trip(stem):
    template = BUILDERS[stem]()
    doc = json.loads(dumps(template_to_json(template)))
    assert json_to_template(doc) == template


def test_instance_json_round_trip():
    san = concretize(build_user_template(), USER_INTERNAL,
                     name="UserInternal")
    doc = json.loads(dumps(san_to_json(san)))
    assert json_to_san(doc) == san


def test_spans_recorded():
    doc = load_template(str(MODELS / "user.sant"))
    assert doc.spans["place Req"][0] > 1
    assert "gate OGRequest" in doc.spans
    assert "activity Request" in doc.spans


def test_parse_error_position_on_truncated_file():
    text = (MODELS / "user.sant").read_text()
    with pytest.raises(ParseError) as err:
        parse_template_text(text[: len(text) // 2])
    assert err.value.line > 1


def test_parse_error_on_bad_sort():
    with pytest.raises(ParseError) as err:
        parse_template_text("template T\nparams { x : float }")
    assert err.value.line == 2
    assert err.value.expected


def test_unknown_arc_target_reports_position():
    text = """template T
params { }
places { P = {1} }
activities { instantaneous A }
arcs { input G : Nope -> A }
"""
    with pytest.raises(ParseError) as err:
        parse_template_text(text)
    assert "Nope" in str(err.value)
    assert err.value.line == 5


def test_validator_uses_parsed_template():
    text = """template T
params { }
places { P = {1} }
activities { instantaneous A }
gates {
  input G : Missing {
    places = P
    enabled = all P >= 1
    effect = P[all] -= 1
  }
}
"""
    doc = parse_template_text(text)
    diags = validate_template(doc.template)
    assert any(d.code == "dangling-gate" for d in diags)


def test_assignment_file_and_coercion():
    adoc = load_assignments(str(MODELS / "user.sasg"))
    assert adoc.assignments["UserInternal"] == {"s": (1, 6, 7),
                                                "pb": (0.7, 0.2, 0.1)}
    assert adoc.assignments["UserPress"] == {"s": (3, 7), "pb": (0.6, 0.4)}
    user = build_user_template()
    coerced = coerce_assignment(user, {"s": (1, 2), "pb": (1, 0)})
    assert coerced["pb"] == (1.0, 0.0)


def test_assignment_round_trip():
    adoc = load_assignments(str(MODELS / "tmi.sasg"))
    again = parse_assignments_text(assignments_to_text(adoc))
    assert again.assignments == adoc.assignments


def test_assignment_literals():
    doc = parse_assignments_text(
        'assignments { A { x = -2  y = 1.5  z = true  s = {}  t = {1, 2.5} } }')
    values = doc.assignments["A"]
    assert values == {"x": -2, "y": 1.5, "z": True, "s": (),
                      "t": (1.0, 2.5)}


def test_duplicate_assignment_name_rejected():
    with pytest.raises(ParseError):
        parse_assignments_text("assignments { A { } A { } }")


def test_empty_label_round_trips_through_text():
    template = build_geo_template()
    text = template_to_text(template)
    assert 'label ""' not in text
    assert parse_template_text(text).template == template


def test_schema_version_checked():
    from santkit.errors import SantError
    with pytest.raises(SantError):
        json_to_template({"schema": "something-else/9"})
    with pytest.raises(SantError):
        json_to_san({"schema": "nope"})


def test_multi_entry_prob_with_default_round_trips():
    import dataclasses
    from santkit.template import CaseDistribution, CaseEntry
    from santkit.terms import Const, parse_term
    tmi = build_tmi_template()
    sw_f = tmi.activities[0]
    entries = (sw_f.case_distribution.entries[0],
               CaseEntry(None, Const(0.0)))
    mutated = dataclasses.replace(
        tmi, activities=(dataclasses.replace(
            sw_f, case_distribution=CaseDistribution(entries)),
            tmi.activities[1]))
    text = template_to_text(mutated)
    assert "default:" in text
    assert parse_template_text(text).template == mutated


def test_random_template_round_trip_fuzz():
    import random
    from santkit.arclabel import print_input_label, print_output_label
    from test_arclabel import _gen_input_spec, _gen_output_spec

    rng = random.Random(20250810)
    for round_no in range(200):
        text = _random_template_text(rng)
        doc = parse_template_text(text)
        canon = template_to_text(doc.template)
        again = parse_template_text(canon)
        assert again.template == doc.template, (round_no, text, canon)


def _random_template_text(rng):
    from santkit.arclabel import print_input_label, print_output_label
    from test_arclabel import _gen_input_spec, _gen_output_spec

    n_places = rng.randint(1, 3)
    places = [f"P{i}" for i in range(1, n_places + 1)]
    mults = {p: rng.choice(["{1}", "s", "{2, 5}", "s union {k}"])
             for p in places}
    n_acts = rng.randint(1, 2)
    acts = [f"A{i}" for i in range(1, n_acts + 1)]
    lines = ["template Fuzz", "",
             "params { s : set<int>  k : int }", "places {"]
    for p in places:
        lines.append(f"  {p} = {mults[p]}")
    lines.append("}")
    lines.append("activities {")
    for a in acts:
        if rng.random() < 0.5:
            lines.append(f"  timed {a} {{ time = exponential(2.0) }}")
        else:
            lines.append(f"  instantaneous {a}")
    lines.append("}")
    lines.append("arcs {")
    for i, a in enumerate(acts):
        p = rng.choice(places)
        label = print_input_label(_gen_input_spec(rng)).replace('"', "")
        lines.append(f'  input In{i} : {p} -> {a} label "{label}"')
        q = rng.choice(places)
        olabel = print_output_label(_gen_output_spec(rng)).replace('"', "")
        lines.append(f'  output Out{i} : {a} -> {q} label "{olabel}"')
    lines.append("}")
    if rng.random() < 0.7:
        lines.append("gates {")
        lines.append(f"""  input GX : {acts[0]} {{
    places = {places[0]}
    enabled = all {places[0]} >= 1
    effect = {places[0]}[all] -= 1
  }}""")
        lines.append("}")
    marked = [p for p in places if rng.random() < 0.5]
    if marked:
        lines.append("marking {")
        for p in marked:
            lines.append(f"  {p} = {rng.randint(1, 3)}")
        lines.append("}")
    return "\n".join(lines)


def test_unknown_marking_place_is_flagged():
    text = """template T
params { }
places { P = {1} }
activities { instantaneous A }
arcs { input G : P -> A }
marking { Ghost = 2 }
"""
    doc = parse_template_text(text)
    diags = validate_template(doc.template)
    assert any(d.code == "unknown-place" and "Ghost" in d.message
               for d in diags)

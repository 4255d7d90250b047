"""DOT export: variability dashing on templates, plain instances."""

from __future__ import annotations

import re

from santkit.concretize import concretize
from santkit.export import (san_to_dot, template_dashed_elements,
                            template_to_dot)
from santkit.fixtures import (USER_INTERNAL, build_geo_template,
                              build_tmi_template, build_user_template)


def _node_styles(dot: str) -> dict[str, str]:
    styles = {}
    for match in re.finditer(r'"([A-Za-z0-9_]+)" \[label=.*?style="([a-z,]+)"',
                             dot):
        styles[match.group(1)] = match.group(2)
    return styles


def test_user_template_dashes_variable_elements():
    dot = template_to_dot(build_user_template())
    styles = _node_styles(dot)
    for name in ("Req", "Request", "OGRequest"):
        assert "dashed" in styles[name], name
    for name in ("Idle", "Fail", "Drop"):
        assert "dashed" not in styles[name], name


def test_geo_template_dashes():
    dashed = template_dashed_elements(build_geo_template())
    assert dashed == {"Working_S", "IG_GF", "OG_GR"}


def test_tmi_template_dashes():
    dashed = template_dashed_elements(build_tmi_template())
    # Both places expand parametrically and both activities/gates touch them;
    # SW_F additionally has a parametric case count.
    assert "Working_S" in dashed and "Failed_SW_S" in dashed
    assert "SW_F" in dashed and "SW_R" not in dashed
    assert "OG_SW" in dashed


def test_instance_export_has_no_dashed_elements():
    san = concretize(build_user_template(), USER_INTERNAL,
                     name="UserInternal")
    dot = san_to_dot(san)
    assert "dashed" not in dot
    assert '"Req_6"' in dot
    assert "digraph" in dot


def test_instance_export_shows_initial_tokens():
    san = concretize(build_user_template(), USER_INTERNAL)
    dot = san_to_dot(san)
    assert 'label="Idle_1\\n(1)"' in dot


def test_arc_labels_appear_on_edges():
    dot = template_to_dot(build_user_template())
    assert 'label="s[<CASE>] -> 1"' in dot

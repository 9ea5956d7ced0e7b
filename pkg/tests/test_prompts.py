"""Template rendering: strict binding, single pass, literal braces."""

from __future__ import annotations

import pytest

from hazardrag.prompts import (
    PromptRenderError,
    PromptTemplate,
    TEMPLATES,
    get_template,
    render_prompt,
)


def test_router_prompt_contains_question_verbatim():
    rendered = render_prompt(get_template("router"), {"question": "Did the levee fail?"})
    assert "Question: Did the levee fail?" in rendered
    assert "{question}" not in rendered


def test_unbound_placeholder_is_named():
    with pytest.raises(PromptRenderError, match="evidence unbound"):
        render_prompt(get_template("evaluator"), {"question": "q"})


def test_bindings_with_braces_stay_literal():
    template = PromptTemplate(name="t", body="Value: {question}", placeholders=("question",))
    rendered = render_prompt(template, {"question": "{evidence} stays {question} literal"})
    assert rendered == "Value: {evidence} stays {question} literal"


def test_template_json_example_braces_survive():
    rendered = render_prompt(get_template("router"), {"question": "q"})
    assert '"Hurricane": 0.61' in rendered
    rendered = render_prompt(
        get_template("agentic_group"), {"list_of_prop": '["p1", "p2"]'}
    )
    assert '"Chunks"' in rendered
    assert '["p1", "p2"]' in rendered


def test_all_seven_templates_registered():
    assert set(TEMPLATES) == {
        "router",
        "evaluator",
        "rewriter",
        "answer_writer",
        "qa_generator",
        "proposition",
        "agentic_group",
    }
    for template in TEMPLATES.values():
        for placeholder in template.placeholders:
            assert "{" + placeholder + "}" in template.body


def test_unknown_template_name():
    with pytest.raises(KeyError):
        get_template("nonexistent")


def test_numeric_bindings_are_stringified():
    rendered = render_prompt(
        get_template("proposition"),
        {"disaster_type": "Flood", "year": 2015, "location": "X", "paragraph": "P."},
    )
    assert "The Flood occurred in 2015 at X." in rendered

"""Cleansing heuristics, role assignment, and document loading."""

from __future__ import annotations

import json

import pytest

from hazardrag.documents import (
    ROLE_CONTENT,
    ROLE_REFERENCES,
    ROLE_TOC,
    Document,
    DocumentFormatError,
    classify_role,
    cleanse,
    document_from_dict,
    document_to_dict,
    load_document_file,
    load_documents,
    make_paragraphs,
    split_text_paragraphs,
)

from conftest import make_document

REFERENCE_BLOCK = (
    "References\n"
    "[1] Author, A. (2011). Liquefaction observations. Journal of Testing.\n"
    "[2] Author, B. (2012). Levee performance notes. Journal of Testing."
)

TOC_BLOCK = "Table of Contents\n1. Overview .... 2\n2. Observations .... 5"


def test_all_reference_paragraphs_cleansed_away():
    doc = make_document(paragraphs=[REFERENCE_BLOCK, "Bibliography\n[3] More, C. (2001)."])
    assert cleanse(doc) == []


def test_hand_labeled_fixture_keeps_nine_of_ten():
    # One TOC paragraph among ten; the classifier must drop exactly it.
    texts = [TOC_BLOCK] + [f"Observation {i}: the embankment settled by {i} cm." for i in range(9)]
    doc = make_document(paragraphs=texts)
    kept = cleanse(doc)
    assert len(kept) == 9
    assert [p.index for p in kept] == list(range(1, 10))
    assert all(p.role == ROLE_CONTENT for p in kept)


def test_document_without_headings_is_all_content():
    doc = make_document(paragraphs=["Plain narrative text.", "More plain narrative."])
    assert len(cleanse(doc)) == 2


def test_classify_role_variants():
    assert classify_role(TOC_BLOCK) == ROLE_TOC
    assert classify_role("Acknowledgments\nWe thank the field teams.") == "acknowledgments"
    assert classify_role("ACKNOWLEDGEMENT\nThanks.") == "acknowledgments"
    assert classify_role(REFERENCE_BLOCK) == ROLE_REFERENCES
    assert classify_role("The earthquake (2011) damaged the port.") == ROLE_CONTENT
    assert classify_role("[1] Someone, A. (1999). Title.\n[2] Other, B. (2000). Title.") == "other-noncontent"


def test_cleanse_is_idempotent():
    doc = make_document(
        paragraphs=[TOC_BLOCK, "Real content here.", REFERENCE_BLOCK, "More content."]
    )
    once = cleanse(doc)
    again = cleanse(
        Document(
            id=doc.id,
            title=doc.title,
            hazard_type=doc.hazard_type,
            event_year=doc.event_year,
            event_location=doc.event_location,
            body=tuple(once),
        )
    )
    assert once == again


def test_explicit_roles_are_honored():
    paragraphs = make_paragraphs(["Looks like content."])
    doc = make_document(paragraphs=[])
    doc = Document(
        id=doc.id,
        title=doc.title,
        hazard_type=doc.hazard_type,
        event_year=doc.event_year,
        event_location=doc.event_location,
        body=(paragraphs[0].__class__(index=0, text="Looks like content.", role="toc"),),
    )
    assert cleanse(doc) == []


def test_document_json_round_trip():
    doc = make_document(paragraphs=["One.", "Two."])
    assert document_from_dict(document_to_dict(doc)) == doc


def test_document_from_dict_validates():
    with pytest.raises(DocumentFormatError):
        document_from_dict({"id": "x"})
    with pytest.raises(DocumentFormatError):
        document_from_dict(
            {
                "id": "x",
                "title": "t",
                "hazard_type": "Volcano",
                "event_year": 2000,
                "event_location": "y",
                "paragraphs": ["a"],
            }
        )


def test_split_text_paragraphs():
    assert split_text_paragraphs("a b\n\nc d\n\n\n e ") == ["a b", "c d", "e"]


def test_load_documents_from_files(tmp_path):
    doc = make_document("json-doc", paragraphs=["Alpha.", "Beta."])
    json_path = tmp_path / "doc.json"
    json_path.write_text(json.dumps(document_to_dict(doc)), encoding="utf-8")
    txt_path = tmp_path / "field-notes.txt"
    txt_path.write_text("First block.\n\nSecond block.", encoding="utf-8")

    loaded = load_documents([json_path, txt_path], hazard_type="Storm", event_year=1999)
    assert [d.id for d in loaded] == ["json-doc", "field-notes"]
    assert loaded[1].hazard_type == "Storm"
    assert [p.text for p in loaded[1].body] == ["First block.", "Second block."]


def test_load_text_requires_hazard(tmp_path):
    path = tmp_path / "notes.txt"
    path.write_text("Some text.", encoding="utf-8")
    with pytest.raises(DocumentFormatError):
        load_document_file(path)


def test_duplicate_document_ids_rejected(tmp_path):
    doc = make_document("dup", paragraphs=["A."])
    for name in ("a.json", "b.json"):
        (tmp_path / name).write_text(json.dumps(document_to_dict(doc)), encoding="utf-8")
    with pytest.raises(DocumentFormatError, match="duplicate"):
        load_documents([tmp_path])

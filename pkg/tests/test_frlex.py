import json

from litcoref import docio
from litcoref.frlex import CLOSED_CLASS, apply_default_hints, hint_token
from litcoref.model import Token


def test_pronoun_hints_filled():
    token = Token(0, "Elle", 0, 0)
    hinted = hint_token(token)
    assert hinted.category_hint == "pronoun"
    assert hinted.gender_hint == "feminine"
    assert hinted.number_hint == "singular"
    assert hinted.person_hint == "third"


def test_existing_hints_preserved():
    token = Token(0, "il", 0, 0, category_hint="proper")
    assert hint_token(token) is token


def test_unknown_word_untouched():
    token = Token(0, "maison", 0, 0)
    assert hint_token(token).category_hint == "unknown"


def test_document_application():
    payload = {
        "doc_id": "hints",
        "tokens": [
            {"text": "Il", "sentence": 0, "paragraph": 0},
            {"text": "aime", "sentence": 0, "paragraph": 0},
            {"text": "sa", "sentence": 0, "paragraph": 0},
            {"text": "maison", "sentence": 0, "paragraph": 0},
        ],
        "mentions": [
            {"start": 0, "end": 0, "category": "pronoun", "chain": "x"},
            {"start": 2, "end": 3, "head": 3, "category": "common",
             "chain": "x"},
        ],
    }
    doc = apply_default_hints(docio.parse_document(json.dumps(payload)))
    assert doc.tokens[0].category_hint == "pronoun"
    assert doc.tokens[2].gender_hint == "feminine"  # possessive "sa"
    assert doc.tokens[3].category_hint == "unknown"


def test_closed_class_table_is_well_formed():
    for form, (category, gender, number, person) in CLOSED_CLASS.items():
        assert form == form.casefold()
        assert category in ("pronoun", "other")
        assert gender in ("masculine", "feminine", "unknown")
        assert number in ("singular", "plural", "unknown")
        assert person in ("first", "second", "third", "unknown")

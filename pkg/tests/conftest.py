"""Shared fixtures: a hand-annotated example sentence, lexicon files and
small corpora. Also prints one PASS/FAIL line per acceptance criterion."""

import sys

import pytest

from litcoref import docio


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    label = report.nodeid.split("::")[-1]
    if report.passed:
        status = "PASS"
    elif report.failed:
        status = "FAIL"
    else:
        status = "SKIP"
    sys.stderr.write(f"[ACCEPTANCE] {status} {label}\n")


def pytest_runtest_logstart(nodeid, location):
    return


# ---------------------------------------------------------------------------
# The running example: a sentence with pronouns, nominals, proper nouns,
# plural mentions, singletons and third-level nesting.
#
#   On their way to visit John, my parents met Mrs. Smith and her husband.
#
# Entities: 1 = the parents (their, my parents), 2 = John, 3 = the narrator
# (my), 4 = Mrs. Smith (Mrs. Smith, her), 5 = her husband, 6 = the couple.

EXAMPLE_SENTENCE = {
    "doc_id": "example",
    "tokens": [
        {"text": "On", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "their", "sentence": 0, "paragraph": 0, "category": "pronoun",
         "number": "plural", "person": "third"},
        {"text": "way", "sentence": 0, "paragraph": 0, "category": "common"},
        {"text": "to", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "visit", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "John", "sentence": 0, "paragraph": 0, "category": "proper",
         "gender": "masculine"},
        {"text": ",", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "my", "sentence": 0, "paragraph": 0, "category": "pronoun",
         "person": "first"},
        {"text": "parents", "sentence": 0, "paragraph": 0, "category": "common",
         "number": "plural"},
        {"text": "met", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "Mrs.", "sentence": 0, "paragraph": 0, "category": "proper",
         "gender": "feminine"},
        {"text": "Smith", "sentence": 0, "paragraph": 0, "category": "proper"},
        {"text": "and", "sentence": 0, "paragraph": 0, "category": "other"},
        {"text": "her", "sentence": 0, "paragraph": 0, "category": "pronoun",
         "gender": "feminine"},
        {"text": "husband", "sentence": 0, "paragraph": 0, "category": "common",
         "gender": "masculine"},
        {"text": ".", "sentence": 0, "paragraph": 0, "category": "other"},
    ],
    "mentions": [
        {"start": 1, "end": 1, "head": 1, "category": "pronoun",
         "chain": "parents", "plural": True},
        {"start": 5, "end": 5, "head": 5, "category": "proper", "chain": None},
        {"start": 7, "end": 8, "head": 8, "category": "common",
         "chain": "parents", "plural": True},
        {"start": 7, "end": 7, "head": 7, "category": "pronoun", "chain": None},
        {"start": 10, "end": 14, "head": 14, "category": "common",
         "chain": None, "plural": True},
        {"start": 10, "end": 11, "head": 11, "category": "proper",
         "chain": "smith"},
        {"start": 13, "end": 14, "head": 14, "category": "common",
         "chain": None},
        {"start": 13, "end": 13, "head": 13, "category": "pronoun",
         "chain": "smith"},
    ],
    "chain_genders": {"parents": "u", "smith": "f"},
}


@pytest.fixture
def example_doc():
    import json

    return docio.parse_document(json.dumps(EXAMPLE_SENTENCE))


FIRSTNAME_ROWS = """# name\tmale\tfemale
Jean\t48000\t150
Marie\t300\t56000
Ralph\t12000\t40
Indiana\t80\t9000
Raymon\t5000\t20
Camille\t45000\t55000
Sylvia\t30\t7000
Noemie\t10\t8000
Leon\t9000\t30
"""

CLUE_ROWS = """# token\tgender\tkind
il\tm\tpronoun
elle\tf\tpronoun
lui\tm\tpronoun
le\tm\tarticle
la\tf\tarticle
un\tm\tarticle
une\tf\tarticle
petit\tm\tadjective
petite\tf\tadjective
fille\tf\tnoun
garcon\tm\tnoun
homme\tm\tnoun
femme\tf\tnoun
m.\tm\thonorific
monsieur\tm\thonorific
mme\tf\thonorific
madame\tf\thonorific
mlle\tf\thonorific
"""


@pytest.fixture
def firstname_lexicon(tmp_path):
    path = tmp_path / "firstnames.tsv"
    path.write_text(FIRSTNAME_ROWS, encoding="utf-8")
    return docio.load_firstname_lexicon(path)


@pytest.fixture
def clue_lexicon(tmp_path):
    path = tmp_path / "clues.tsv"
    path.write_text(CLUE_ROWS, encoding="utf-8")
    return docio.load_genderclue_lexicon(path)

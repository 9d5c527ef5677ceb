"""Default morphological hints for French closed-class words.

Ingestion normally receives hints from an upstream tagger; this provider
fills the gaps for pronouns and determiners whose attributes are lexical.
Only tokens with an unknown category hint are touched.
"""

from __future__ import annotations

from dataclasses import replace

from .docio import fold_token
from .model import Document, Token

# form -> (category, gender, number, person)
CLOSED_CLASS: dict[str, tuple[str, str, str, str]] = {
    "il": ("pronoun", "masculine", "singular", "third"),
    "elle": ("pronoun", "feminine", "singular", "third"),
    "ils": ("pronoun", "masculine", "plural", "third"),
    "elles": ("pronoun", "feminine", "plural", "third"),
    "je": ("pronoun", "unknown", "singular", "first"),
    "j'": ("pronoun", "unknown", "singular", "first"),
    "me": ("pronoun", "unknown", "singular", "first"),
    "moi": ("pronoun", "unknown", "singular", "first"),
    "tu": ("pronoun", "unknown", "singular", "second"),
    "te": ("pronoun", "unknown", "singular", "second"),
    "toi": ("pronoun", "unknown", "singular", "second"),
    "nous": ("pronoun", "unknown", "plural", "first"),
    "vous": ("pronoun", "unknown", "plural", "second"),
    "on": ("pronoun", "unknown", "singular", "third"),
    "se": ("pronoun", "unknown", "unknown", "third"),
    "lui": ("pronoun", "masculine", "singular", "third"),
    "eux": ("pronoun", "masculine", "plural", "third"),
    "celui": ("pronoun", "masculine", "singular", "third"),
    "celle": ("pronoun", "feminine", "singular", "third"),
    "ceux": ("pronoun", "masculine", "plural", "third"),
    "celles": ("pronoun", "feminine", "plural", "third"),
    "le": ("other", "masculine", "singular", "unknown"),
    "la": ("other", "feminine", "singular", "unknown"),
    "les": ("other", "unknown", "plural", "unknown"),
    "un": ("other", "masculine", "singular", "unknown"),
    "une": ("other", "feminine", "singular", "unknown"),
    "des": ("other", "unknown", "plural", "unknown"),
    "mon": ("other", "masculine", "singular", "first"),
    "ma": ("other", "feminine", "singular", "first"),
    "mes": ("other", "unknown", "plural", "first"),
    "son": ("other", "masculine", "singular", "third"),
    "sa": ("other", "feminine", "singular", "third"),
    "ses": ("other", "unknown", "plural", "third"),
}


def hint_token(token: Token) -> Token:
    """Fill hints from the closed-class table when the token has none."""
    if token.category_hint != "unknown":
        return token
    entry = CLOSED_CLASS.get(fold_token(token.text))
    if entry is None:
        return token
    category, gender, number, person = entry
    return replace(
        token,
        category_hint=category,
        gender_hint=gender if token.gender_hint == "unknown" else token.gender_hint,
        number_hint=number if token.number_hint == "unknown" else token.number_hint,
        person_hint=person if token.person_hint == "unknown" else token.person_hint,
    )


def apply_default_hints(doc: Document) -> Document:
    return Document(doc.doc_id, [hint_token(t) for t in doc.tokens],
                    doc.mentions, doc.chains, doc.embeddings)

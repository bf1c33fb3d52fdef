"""Light-weight token normalisation: lemmatiser and heuristic POS tagger.

Both are deterministic rule sets so corpora without gold annotations can still
flow through augmentation and encoding without a third-party NLP stack.
"""

import re

NOUN, VERB, ADJ, ADV, OTHER = "NOUN", "VERB", "ADJ", "ADV", "OTHER"
POS_TAGS = (NOUN, VERB, ADJ, ADV, OTHER)
CONTENT_POS = frozenset({NOUN, VERB, ADJ, ADV})

# Closed-class words never receive an open-class tag.
STOPWORDS = frozenset("""
a an the this that these those some any each every no all both either neither
of in on at by for with from to into onto upon over under about above below
between among through during before after since until within without against
along across behind beyond near toward towards via per than as like
and or but nor so yet if because although though while whereas unless whether
i me my mine myself you your yours yourself he him his himself she her hers
herself it its itself we us our ours ourselves they them their theirs themselves
who whom whose which what where when why how
is am are was were be been being has have had having do does did doing
will would shall should can could may might must
not also very too just only then there here
""".split())

_LEMMA_EXCEPTIONS = {
    "was": "be", "were": "be", "is": "be", "are": "be", "been": "be", "am": "be",
    "has": "have", "had": "have", "did": "do", "does": "do",
    "born": "bear", "died": "die", "lived": "live", "went": "go", "made": "make",
    "children": "child", "men": "man", "women": "woman", "people": "person",
    "news": "news", "series": "series", "species": "species",
}

_WORD_RE = re.compile(r"^[a-z]+$")


def lemmatize(token):
    """Lowercase ``token`` and strip regular inflection (-s/-es, -ing, -ed)."""
    word = token.lower()
    if word in _LEMMA_EXCEPTIONS:
        return _LEMMA_EXCEPTIONS[word]
    if not _WORD_RE.match(word) or len(word) <= 3:
        return word
    if word.endswith("ies") and len(word) > 4:
        return word[:-3] + "y"
    if word.endswith(("sses", "xes", "ches", "shes", "zes")):
        return word[:-2]
    if word.endswith("s") and not word.endswith(("ss", "us", "is")):
        return word[:-1]
    if word.endswith("ing") and len(word) > 5:
        stem = word[:-3]
        if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "lsz":
            stem = stem[:-1]
        return stem
    if word.endswith("ed") and len(word) > 4:
        stem = word[:-2]
        if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "lsz":
            stem = stem[:-1]
        return stem
    return word


def tag_token(token):
    word = token.lower()
    if word in STOPWORDS or not any(ch.isalpha() for ch in word):
        return OTHER
    if word.endswith("ly"):
        return ADV
    if word.endswith(("ing", "ed")):
        return VERB
    if word.endswith(("ous", "ful", "ive")):
        return ADJ
    return NOUN


def tag(tokens):
    """Heuristic POS tags for a token list."""
    return [tag_token(t) for t in tokens]


def split_phrase(text):
    """Split a relation name or phrase on underscores and whitespace."""
    return [t for t in re.split(r"[_\s]+", text.strip().lower()) if t]


def graph_term(text):
    """Normalise a phrase into knowledge-graph term form (lowercase, underscores)."""
    return "_".join(split_phrase(text))

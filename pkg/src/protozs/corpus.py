"""Sentence and relation records, plus their JSONL / JSON file formats.

Corpus lines look like::

    {"id": "s1", "tokens": [...], "pos": [...], "head": [0, 1], "tail": [4, 5],
     "relation": "place_of_birth", "head_super": "person", "tail_super": "location"}

``pos``, ``id``, ``head_super`` and ``tail_super`` are optional; spans are
half-open token ranges ``[start, end)``.
"""

import json
from dataclasses import dataclass, field, replace

from .errors import DataError
from .text import POS_TAGS, tag

UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class TaggedSentence:
    tokens: tuple
    pos: tuple
    head: tuple
    tail: tuple
    relation: str = UNKNOWN
    id: str = ""
    head_super: str = ""
    tail_super: str = ""

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        object.__setattr__(self, "pos", tuple(self.pos))
        object.__setattr__(self, "head", tuple(int(i) for i in self.head))
        object.__setattr__(self, "tail", tuple(int(i) for i in self.tail))
        n = len(self.tokens)
        if n == 0:
            raise DataError("sentence has no tokens")
        if len(self.pos) != n:
            raise DataError(f"{len(self.pos)} POS tags for {n} tokens")
        bad = [p for p in self.pos if p not in POS_TAGS]
        if bad:
            raise DataError(f"unknown POS tag {bad[0]!r}")
        for name, span in (("head", self.head), ("tail", self.tail)):
            if len(span) != 2 or not 0 <= span[0] < span[1] <= n:
                raise DataError(f"{name} span {list(span)} out of bounds for {n} tokens")
        if self.head[0] < self.tail[1] and self.tail[0] < self.head[1]:
            raise DataError("head and tail spans overlap")

    def in_entity(self, i):
        return self.head[0] <= i < self.head[1] or self.tail[0] <= i < self.tail[1]

    def with_relation(self, relation, **changes):
        return replace(self, relation=relation, **changes)

    def to_record(self):
        rec = {"id": self.id, "tokens": list(self.tokens), "pos": list(self.pos),
               "head": list(self.head), "tail": list(self.tail), "relation": self.relation}
        if self.head_super:
            rec["head_super"] = self.head_super
        if self.tail_super:
            rec["tail_super"] = self.tail_super
        return rec

    @classmethod
    def from_record(cls, rec, default_id=""):
        try:
            tokens = rec["tokens"]
            pos = rec.get("pos") or tag(tokens)
            return cls(tokens=tokens, pos=pos, head=rec["head"], tail=rec["tail"],
                       relation=rec.get("relation") or UNKNOWN,
                       id=str(rec.get("id", default_id)),
                       head_super=rec.get("head_super", "") or "",
                       tail_super=rec.get("tail_super", "") or "")
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed sentence record: {exc}") from exc


@dataclass(frozen=True)
class RelationMeta:
    name: str
    super_class: str
    head_super: str
    tail_super: str
    description: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "description", tuple(self.description))
        for attr in ("name", "super_class", "head_super", "tail_super"):
            if not str(getattr(self, attr)).strip():
                raise DataError(f"relation meta field {attr!r} is empty")

    def to_record(self):
        return {"name": self.name, "super_class": self.super_class,
                "head_super": self.head_super, "tail_super": self.tail_super,
                "description": list(self.description)}

    @classmethod
    def from_record(cls, rec):
        try:
            desc = rec.get("description", ())
            if isinstance(desc, str):
                desc = desc.split()
            return cls(name=rec["name"], super_class=rec["super_class"],
                       head_super=rec["head_super"], tail_super=rec["tail_super"],
                       description=desc)
        except (KeyError, TypeError) as exc:
            raise DataError(f"malformed relation record: {exc}") from exc


def read_corpus(path):
    out = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
                try:
                    out.append(TaggedSentence.from_record(rec, default_id=str(lineno - 1)))
                except DataError as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read corpus {path}: {exc}") from exc
    return out


def write_corpus(path, sentences):
    with open(path, "w", encoding="utf-8") as fh:
        for s in sentences:
            fh.write(json.dumps(s.to_record(), sort_keys=True) + "\n")


def read_catalog(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise DataError(f"cannot read catalog {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise DataError(f"{path}: catalog must be a JSON list")
    metas = [RelationMeta.from_record(r) for r in data]
    names = [m.name for m in metas]
    if len(set(names)) != len(names):
        raise DataError(f"{path}: duplicate relation names")
    return metas


def write_catalog(path, metas):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([m.to_record() for m in metas], fh, indent=1, sort_keys=True)
        fh.write("\n")


def catalog_index(catalog):
    return {m.name: m for m in catalog}


def group_by_relation(sentences):
    groups = {}
    for s in sentences:
        groups.setdefault(s.relation, []).append(s)
    return groups

"""Spatial relation vocabulary and the rule-based prompt parser.

A relation names a subject, an object, and either one spatial kind or a
composite of two non-contradictory planar kinds (top-left and friends).
Prompts from the benchmark template family ("a X to the right of a Y",
clauses joined by "and" or ".") are parsed without any learned component.
Anything richer should arrive as a pre-extracted relation file, either a
JSON array of {subject, object, kind} objects or plain lines of the form
"(subject, object, kind)"; see :func:`load_relations`.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import ContractViolationError, MalformedFileError


class RelationKind(str, Enum):
    LEFT = "left"
    RIGHT = "right"
    ABOVE = "above"
    BELOW = "below"
    IN_FRONT = "in_front"
    BEHIND = "behind"

    @property
    def is_planar(self) -> bool:
        return self not in (RelationKind.IN_FRONT, RelationKind.BEHIND)


_INVERSE = {
    RelationKind.LEFT: RelationKind.RIGHT,
    RelationKind.RIGHT: RelationKind.LEFT,
    RelationKind.ABOVE: RelationKind.BELOW,
    RelationKind.BELOW: RelationKind.ABOVE,
    RelationKind.IN_FRONT: RelationKind.BEHIND,
    RelationKind.BEHIND: RelationKind.IN_FRONT,
}


def inverse_kind(kind: RelationKind) -> RelationKind:
    return _INVERSE[kind]


# Composite kinds are stored vertical-first so equal relations compare equal.
_VERTICAL = (RelationKind.ABOVE, RelationKind.BELOW)
_HORIZONTAL = (RelationKind.LEFT, RelationKind.RIGHT)

_COMPOSITE_WORD = {RelationKind.ABOVE: "top", RelationKind.BELOW: "bottom"}


def _canonical_kind_order(kinds: tuple[RelationKind, ...]) -> tuple[RelationKind, ...]:
    if len(kinds) == 2 and kinds[0] in _HORIZONTAL:
        return (kinds[1], kinds[0])
    return kinds


@dataclass(frozen=True)
class RelationSpec:
    """One extracted spatial relation: subject `kinds` object."""

    subject: str
    object: str
    kinds: tuple[RelationKind, ...]
    distance_c: float | None = None

    def __post_init__(self) -> None:
        kinds = tuple(RelationKind(k) for k in self.kinds)
        if not 1 <= len(kinds) <= 2:
            raise ContractViolationError("a relation needs one kind or a composite of two")
        if len(kinds) == 2:
            if not all(k.is_planar for k in kinds):
                raise ContractViolationError("composite relations must be planar")
            if set(kinds) <= set(_VERTICAL) or set(kinds) <= set(_HORIZONTAL):
                raise ContractViolationError(f"contradictory composite {kinds}")
        object.__setattr__(self, "kinds", _canonical_kind_order(kinds))
        if not self.subject or not self.object:
            raise ContractViolationError("subject and object names must be nonempty")
        if self.subject == self.object:
            raise ContractViolationError(
                "subject and object must differ; append an index to disambiguate duplicates"
            )
        if self.distance_c is not None and self.distance_c < 0:
            raise ContractViolationError("distance_c must be nonnegative")

    @classmethod
    def single(
        cls, subject: str, obj: str, kind: RelationKind, distance_c: float | None = None
    ) -> "RelationSpec":
        return cls(subject, obj, (kind,), distance_c)

    @classmethod
    def from_kind_token(
        cls, subject: str, obj: str, token: str, distance_c: float | None = None
    ) -> "RelationSpec":
        return cls(subject, obj, normalize_kind_token(token), distance_c)

    @property
    def is_composite(self) -> bool:
        return len(self.kinds) > 1

    @property
    def is_planar(self) -> bool:
        return all(k.is_planar for k in self.kinds)

    @property
    def kind_token(self) -> str:
        """Canonical single-token spelling of the relation kind."""
        if not self.is_composite:
            return self.kinds[0].value
        vert, horiz = self.kinds
        return f"{_COMPOSITE_WORD[vert]}_{horiz.value}"

    def inverted(self) -> "RelationSpec":
        """The same pair read the other way round (object kinds subject)."""
        return RelationSpec(
            self.object,
            self.subject,
            tuple(inverse_kind(k) for k in self.kinds),
            self.distance_c,
        )

    def to_json_dict(self) -> dict:
        return {
            "subject": self.subject,
            "object": self.object,
            "kind": self.kind_token,
            "c": self.distance_c,
        }


# Every accepted keyword maps to exactly one canonical kind tuple.
_KIND_ALIASES: dict[str, tuple[RelationKind, ...]] = {
    "left": (RelationKind.LEFT,),
    "right": (RelationKind.RIGHT,),
    "above": (RelationKind.ABOVE,),
    "top": (RelationKind.ABOVE,),
    "on top of": (RelationKind.ABOVE,),
    "below": (RelationKind.BELOW,),
    "bottom": (RelationKind.BELOW,),
    "under": (RelationKind.BELOW,),
    "in_front": (RelationKind.IN_FRONT,),
    "in front": (RelationKind.IN_FRONT,),
    "in front of": (RelationKind.IN_FRONT,),
    "front": (RelationKind.IN_FRONT,),
    "behind": (RelationKind.BEHIND,),
    "hidden": (RelationKind.BEHIND,),
    "hidden behind": (RelationKind.BEHIND,),
    "top_left": (RelationKind.ABOVE, RelationKind.LEFT),
    "top left": (RelationKind.ABOVE, RelationKind.LEFT),
    "top_right": (RelationKind.ABOVE, RelationKind.RIGHT),
    "top right": (RelationKind.ABOVE, RelationKind.RIGHT),
    "bottom_left": (RelationKind.BELOW, RelationKind.LEFT),
    "bottom left": (RelationKind.BELOW, RelationKind.LEFT),
    "bottom_right": (RelationKind.BELOW, RelationKind.RIGHT),
    "bottom right": (RelationKind.BELOW, RelationKind.RIGHT),
}


def normalize_kind_token(token: str) -> tuple[RelationKind, ...]:
    """Map a relation keyword (or alias) to its canonical kind tuple."""
    key = re.sub(r"[\s\-]+", " ", token.strip().lower())
    if key not in _KIND_ALIASES:
        key = key.replace(" ", "_")
    if key not in _KIND_ALIASES:
        raise ContractViolationError(f"unknown relation keyword {token!r}")
    return _KIND_ALIASES[key]


# ---------------------------------------------------------------------------
# Template-prompt parsing


_ARTICLES = {"a", "an", "the"}

# Longest phrases first so alternation prefers them at a shared prefix.
_REL_PHRASES: list[tuple[str, tuple[RelationKind, ...]]] = [
    ("to the top left of", (RelationKind.ABOVE, RelationKind.LEFT)),
    ("to the top right of", (RelationKind.ABOVE, RelationKind.RIGHT)),
    ("to the bottom left of", (RelationKind.BELOW, RelationKind.LEFT)),
    ("to the bottom right of", (RelationKind.BELOW, RelationKind.RIGHT)),
    ("to the left of", (RelationKind.LEFT,)),
    ("to the right of", (RelationKind.RIGHT,)),
    ("hidden behind", (RelationKind.BEHIND,)),
    ("in front of", (RelationKind.IN_FRONT,)),
    ("on top of", (RelationKind.ABOVE,)),
    ("above", (RelationKind.ABOVE,)),
    ("below", (RelationKind.BELOW,)),
    ("under", (RelationKind.BELOW,)),
    ("behind", (RelationKind.BEHIND,)),
]

_PHRASE_RE = re.compile(
    r"\b(" + "|".join(p.replace(" ", r"\s+") for p, _ in _REL_PHRASES) + r")\b"
)
_PHRASE_KINDS = {p: k for p, k in _REL_PHRASES}


@dataclass
class ParseResult:
    """Relations recovered from a prompt plus diagnostics for what was not."""

    relations: list[RelationSpec] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def _clean_name(text: str) -> str:
    words = re.sub(r"[^\w\s]", " ", text).split()
    if words and words[0] in _ARTICLES:
        words = words[1:]
    return " ".join(words)


def _split_clauses(text: str) -> list[str]:
    clauses: list[str] = []
    for sentence in re.split(r"[.;!?]", text):
        fragments = re.split(r"\band\b", sentence)
        acc = ""
        for frag in fragments:
            if not acc:
                acc = frag
            elif _PHRASE_RE.search(acc) and _PHRASE_RE.search(frag):
                clauses.append(acc)
                acc = frag
            else:
                # Mid-noun-phrase "and" ("a black and white cat"): keep joined.
                acc = f"{acc} and {frag}"
        if acc.strip():
            clauses.append(acc)
    return clauses


def parse_prompt(text: str) -> ParseResult:
    """Extract relations from a benchmark-style prompt.

    Recognizes the template family "<article> X <rel-phrase> <article> Y",
    with clauses joined by "and" or ".". Unrecognized clauses produce a
    diagnostic instead of an exception so batch runs keep going.
    """
    result = ParseResult()
    lowered = text.lower()
    for clause in _split_clauses(lowered):
        clause = clause.strip()
        if not clause:
            continue
        match = _PHRASE_RE.search(clause)
        if match is None:
            result.diagnostics.append(f"no relation phrase in clause: {clause!r}")
            continue
        phrase = re.sub(r"\s+", " ", match.group(1))
        subject = _clean_name(clause[: match.start()])
        obj = _clean_name(clause[match.end() :])
        if not subject or not obj:
            result.diagnostics.append(f"missing object name in clause: {clause!r}")
            continue
        if subject == obj:
            result.diagnostics.append(f"subject equals object in clause: {clause!r}")
            continue
        result.relations.append(RelationSpec(subject, obj, _PHRASE_KINDS[phrase]))
    if not result.relations and not result.diagnostics:
        result.diagnostics.append("empty prompt")
    return result


_RENDER_PHRASE = {
    (RelationKind.LEFT,): "to the left of",
    (RelationKind.RIGHT,): "to the right of",
    (RelationKind.ABOVE,): "above",
    (RelationKind.BELOW,): "below",
    (RelationKind.IN_FRONT,): "in front of",
    (RelationKind.BEHIND,): "behind",
    (RelationKind.ABOVE, RelationKind.LEFT): "to the top left of",
    (RelationKind.ABOVE, RelationKind.RIGHT): "to the top right of",
    (RelationKind.BELOW, RelationKind.LEFT): "to the bottom left of",
    (RelationKind.BELOW, RelationKind.RIGHT): "to the bottom right of",
}


def render_relation(spec: RelationSpec) -> str:
    """Render a relation as its canonical template sentence.

    Re-parsing the rendered sentence yields the relation back, provided the
    names are lowercase (the parser lowercases its input).
    """
    return f"a {spec.subject} {_RENDER_PHRASE[spec.kinds]} a {spec.object}"


# ---------------------------------------------------------------------------
# Pre-extracted relation files


_TUPLE_LINE_RE = re.compile(r"^\s*\(\s*([^,()]+?)\s*,\s*([^,()]+?)\s*,\s*([^,()]+?)\s*\)\s*$")


def _spec_from_json_item(item: object, where: str) -> RelationSpec:
    if not isinstance(item, dict):
        raise MalformedFileError(f"{where}: expected an object, got {type(item).__name__}")
    try:
        subject = item["subject"]
        obj = item["object"]
        kind = item["kind"]
    except KeyError as exc:
        raise MalformedFileError(f"{where}: missing key {exc}") from exc
    c = item.get("c", item.get("distance_c"))
    try:
        return RelationSpec.from_kind_token(str(subject), str(obj), str(kind), c)
    except ContractViolationError as exc:
        raise MalformedFileError(f"{where}: {exc}") from exc


def load_relations(path: str | Path) -> list[RelationSpec]:
    """Load pre-extracted relations from a JSON array or "(a, b, rel)" lines."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.strip()
    if not stripped:
        return []
    if stripped.startswith("["):
        try:
            data = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise MalformedFileError(f"{path}: invalid JSON: {exc}") from exc
        return [_spec_from_json_item(item, f"{path}[{i}]") for i, item in enumerate(data)]
    specs = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        match = _TUPLE_LINE_RE.match(line)
        if match is None:
            raise MalformedFileError(f"{path}: line {lineno}: expected '(subject, object, kind)'")
        subject, obj, kind = match.groups()
        try:
            specs.append(RelationSpec.from_kind_token(subject, obj, kind))
        except ContractViolationError as exc:
            raise MalformedFileError(f"{path}: line {lineno}: {exc}") from exc
    return specs

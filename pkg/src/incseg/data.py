"""Corpus data model and column-format I/O.

Indices in the data model are 1-based and inclusive on both ends; array
code converts at the boundary. A :class:`Segmentation` always partitions
its sentence exactly (checked on construction), which keeps downstream
invariants cheap to trust.
"""

import re
from dataclasses import dataclass

_TAG_RE = re.compile(r"^O$|^[BI]-.+$")


class ParseError(ValueError):
    """Malformed input file; message carries the 1-based line number."""


class TagSchemeError(ParseError):
    """A tag outside the O / B-X / I-X scheme."""


@dataclass(frozen=True)
class Segment:
    """A contiguous labeled span, 1-based inclusive."""

    start: int
    end: int
    label: str

    def __post_init__(self):
        if not (1 <= self.start <= self.end):
            raise ValueError(f"invalid segment bounds ({self.start}, {self.end})")

    @property
    def length(self) -> int:
        return self.end - self.start + 1


@dataclass(frozen=True)
class Sentence:
    """A token sequence; characters are derived per token on demand."""

    tokens: tuple[str, ...]

    def __init__(self, tokens):
        tokens = tuple(tokens)
        if len(tokens) == 0:
            raise ValueError("sentence must have at least one token")
        if any(tok == "" for tok in tokens):
            raise ValueError("sentence contains an empty token")
        object.__setattr__(self, "tokens", tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def chars(self) -> tuple[tuple[str, ...], ...]:
        return tuple(tuple(tok) for tok in self.tokens)


class Segmentation:
    """An ordered sequence of segments that exactly covers tokens 1..n."""

    __slots__ = ("segments", "n")

    def __init__(self, segments, n: int):
        segments = tuple(segments)
        if n < 1:
            raise ValueError(f"sentence length must be positive, got {n}")
        if not segments:
            raise ValueError("segmentation must contain at least one segment")
        if segments[0].start != 1:
            raise ValueError(f"first segment starts at {segments[0].start}, not 1")
        if segments[-1].end != n:
            raise ValueError(f"last segment ends at {segments[-1].end}, not {n}")
        for prev, cur in zip(segments, segments[1:]):
            if cur.start != prev.end + 1:
                raise ValueError(
                    f"segments ({prev.start},{prev.end}) and ({cur.start},{cur.end}) "
                    "do not tile contiguously"
                )
        self.segments = segments
        self.n = n

    def __iter__(self):
        return iter(self.segments)

    def __len__(self) -> int:
        return len(self.segments)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Segmentation)
            and self.n == other.n
            and self.segments == other.segments
        )

    def __hash__(self):
        return hash((self.n, self.segments))

    def __repr__(self):
        body = " ".join(f"({s.start},{s.end},{s.label})" for s in self.segments)
        return f"Segmentation[n={self.n}: {body}]"

    def labels(self) -> set[str]:
        return {s.label for s in self.segments}


def iob_to_segments(tags) -> Segmentation:
    """Convert a tag sequence to segments.

    Maximal B-X I-X ... runs become one segment; every O token becomes its
    own single-token segment labeled O. An I-X with no live run of the
    same type opens a new segment, matching the leniency of the standard
    chunk evaluation script, so every syntactically valid tag sequence
    converts.
    """
    tags = list(tags)
    if not tags:
        raise ValueError("empty tag sequence")
    segments: list[Segment] = []
    open_start = None
    open_label = None

    def close(upto):
        nonlocal open_start, open_label
        if open_start is not None:
            segments.append(Segment(open_start, upto, open_label))
            open_start = open_label = None

    for pos, tag in enumerate(tags, start=1):
        if not _TAG_RE.match(tag):
            raise TagSchemeError(f"tag {tag!r} at position {pos} is not O, B-X, or I-X")
        if tag == "O":
            close(pos - 1)
            segments.append(Segment(pos, pos, "O"))
        elif tag.startswith("B-"):
            close(pos - 1)
            open_start, open_label = pos, tag[2:]
        else:
            label = tag[2:]
            if open_label == label:
                continue
            close(pos - 1)
            open_start, open_label = pos, label
    close(len(tags))
    return Segmentation(segments, len(tags))


def segments_to_iob(seg: Segmentation) -> list[str]:
    """Inverse of :func:`iob_to_segments` on well-formed segmentations.

    O-labeled segments emit the tag O for every covered token.
    """
    tags: list[str] = []
    for s in seg.segments:
        if s.label == "O":
            tags.extend(["O"] * s.length)
        else:
            tags.append(f"B-{s.label}")
            tags.extend([f"I-{s.label}"] * (s.length - 1))
    return tags


def parse_column_file(path, token_column: int = 0, tag_column: int = -1):
    """Read a whitespace-separated column file into (Sentence, tags) records.

    Sentences are separated by blank lines. ``tag_column`` may be negative
    to count from the end of each line.
    """
    records = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush():
        if tokens:
            records.append((Sentence(tokens), list(tags)))
            tokens.clear()
            tags.clear()

    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            fields = line.split()
            if not fields:
                flush()
                continue
            if tag_column >= 0:
                needed = max(token_column, tag_column) + 1
            else:
                needed = max(token_column + 1, -tag_column)
            if len(fields) < needed:
                raise ParseError(
                    f"line {lineno}: expected at least {needed} fields, got {len(fields)}"
                )
            token = fields[token_column]
            tag = fields[tag_column]
            if not _TAG_RE.match(tag):
                raise TagSchemeError(f"line {lineno}: tag {tag!r} is not O, B-X, or I-X")
            tokens.append(token)
            tags.append(tag)
    flush()
    return records


def load_corpus(path, token_column: int = 0, tag_column: int = -1):
    """Column file parsed straight to (Sentence, Segmentation) pairs."""
    return [
        (sentence, iob_to_segments(tags))
        for sentence, tags in parse_column_file(path, token_column, tag_column)
    ]


PAD_ID = 0
UNK_ID = 1
_N_RESERVED = 2


class Vocab:
    """Token, character, and label index spaces.

    Token and character ids reserve 0 for padding and 1 for unknown;
    labels form a closed space indexed densely from 0.
    """

    def __init__(self, tokens, chars, labels):
        self.tokens = list(tokens)
        self.chars = list(chars)
        self.labels = list(labels)
        self._token_ids = {tok: i + _N_RESERVED for i, tok in enumerate(self.tokens)}
        self._char_ids = {ch: i + _N_RESERVED for i, ch in enumerate(self.chars)}
        self.label_index = {lab: i for i, lab in enumerate(self.labels)}
        if len(self._token_ids) != len(self.tokens):
            raise ValueError("duplicate tokens in vocabulary")
        if len(self._char_ids) != len(self.chars):
            raise ValueError("duplicate characters in vocabulary")
        if len(self.label_index) != len(self.labels):
            raise ValueError("duplicate labels in vocabulary")

    @property
    def n_tokens(self) -> int:
        return len(self.tokens) + _N_RESERVED

    @property
    def n_chars(self) -> int:
        return len(self.chars) + _N_RESERVED

    @property
    def n_labels(self) -> int:
        return len(self.labels)

    def token_id(self, token: str) -> int:
        return self._token_ids.get(token, UNK_ID)

    def char_ids(self, token: str) -> list[int]:
        return [self._char_ids.get(ch, UNK_ID) for ch in token]

    def label_of(self, label_id: int) -> str:
        return self.labels[label_id]


def build_vocab(corpus, min_count: int = 1) -> Vocab:
    """Vocabulary from (Sentence, Segmentation) pairs.

    Tokens below ``min_count`` map to the unknown id. Characters come from
    every training token regardless of token frequency. Labels are the
    sorted set of segment labels, O included.
    """
    corpus = list(corpus)
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    counts: dict[str, int] = {}
    chars: dict[str, None] = {}
    labels: set[str] = set()
    for sentence, segmentation in corpus:
        for tok in sentence.tokens:
            counts[tok] = counts.get(tok, 0) + 1
            for ch in tok:
                chars.setdefault(ch, None)
        labels.update(segmentation.labels())
    kept = [tok for tok, c in counts.items() if c >= min_count]
    return Vocab(kept, list(chars), sorted(labels))

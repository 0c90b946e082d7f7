"""Leftmost-segment decoder.

Each step embeds the previously emitted segment, advances the decoder
state on that embedding concatenated with the representation of the
unprocessed suffix, scores every span starting at the cursor, and scores
labels for a chosen span. Selection is argmax span first, then argmax
label for that span, with deterministic tie-breaking toward the smallest
span end and then the smallest label id.
"""

from dataclasses import dataclass, replace

import numpy as np

from .autodiff import Tensor, add, concat, dropout, log_softmax, lstm_cell, matmul, row, stack, tanh
from .data import Segment
from .encoder import EncoderOutput, phrase_repr


@dataclass(frozen=True)
class DecoderState:
    """Recurrent state plus the cursor (first uncovered token, 1-based).

    ``cursor == n + 1`` means the sentence is fully covered. ``output`` is
    the step's top-layer hidden vector, None before the first step. The
    hidden/cell tuples are empty in the feed-forward decoder variant.
    """

    hs: tuple[Tensor, ...]
    cs: tuple[Tensor, ...]
    cursor: int
    output: Tensor | None = None

    def at_cursor(self, cursor: int) -> "DecoderState":
        return replace(self, cursor=cursor)


@dataclass
class SpanDistribution:
    """Log-probabilities over spans (start, start) .. (start, n)."""

    log_probs: Tensor
    start: int
    n: int

    def __len__(self) -> int:
        return self.n - self.start + 1

    def span_at(self, index: int) -> tuple[int, int]:
        return (self.start, self.start + index)

    def index_of(self, end: int) -> int:
        return end - self.start


@dataclass
class LabelDistribution:
    """Log-probabilities over the label space for one fixed span."""

    log_probs: Tensor
    labels: list[str]

    def __len__(self) -> int:
        return len(self.labels)


def initial_state(model) -> DecoderState:
    config = model.config
    if config.decoder == "lstm":
        hidden = config.decoder_hidden
        hs = tuple(Tensor(np.zeros(hidden)) for _ in range(config.layers))
        cs = tuple(Tensor(np.zeros(hidden)) for _ in range(config.layers))
    else:
        hs = cs = ()
    return DecoderState(hs=hs, cs=cs, cursor=1, output=None)


def segment_embedding(model, prev: Segment | None, enc: EncoderOutput) -> Tensor:
    """Embedding of the previously emitted segment; a trainable start
    vector stands in before anything has been emitted.

    The ablation switches drop the span half or the label half, shrinking
    the embedding accordingly."""
    if prev is None:
        return model.store["seg_start"]
    if not (1 <= prev.start <= prev.end <= enc.n):
        raise ValueError(f"segment ({prev.start}, {prev.end}) out of range for length {enc.n}")
    parts = []
    if model.config.use_phrase:
        parts.append(phrase_repr(enc, prev.start, prev.end))
    if model.config.use_label:
        parts.append(row(model.store["label_emb"], model.vocab.label_index[prev.label]))
    return parts[0] if len(parts) == 1 else concat(parts)


def decoder_step(
    model, state: DecoderState, seg_emb: Tensor, enc: EncoderOutput, train: bool = False
) -> DecoderState:
    """Advance the decoder on the previous-segment embedding joined with the
    representation of the remaining suffix. The cursor is left untouched;
    segment selection moves it."""
    if state.cursor > enc.n:
        raise ValueError(f"cannot step a finished decoder (cursor {state.cursor}, n {enc.n})")
    x = concat([seg_emb, phrase_repr(enc, state.cursor, enc.n)])
    config = model.config
    if config.decoder == "lstm":
        rng = model.rngs.stream("dropout") if train and config.dropout > 0 else None
        new_hs, new_cs = [], []
        for layer in range(config.layers):
            if layer > 0 and rng is not None:
                x = dropout(x, config.dropout, True, rng)
            h, c = lstm_cell(
                x, state.hs[layer], state.cs[layer],
                model.store[f"dec/{layer}/w"], model.store[f"dec/{layer}/b"],
            )
            new_hs.append(h)
            new_cs.append(c)
            x = h
        return DecoderState(hs=tuple(new_hs), cs=tuple(new_cs), cursor=state.cursor, output=x)
    hidden = tanh(add(matmul(model.store["dec/mlp/w1"], x), model.store["dec/mlp/b1"]))
    out = add(matmul(model.store["dec/mlp/w2"], hidden), model.store["dec/mlp/b2"])
    return DecoderState(hs=(), cs=(), cursor=state.cursor, output=out)


def span_scores(model, state: DecoderState, enc: EncoderOutput) -> SpanDistribution:
    """Normalized scores of every candidate span starting at the cursor."""
    if not (1 <= state.cursor <= enc.n):
        raise ValueError(f"cursor {state.cursor} out of range for length {enc.n}")
    if state.output is None:
        raise ValueError("decoder has not been stepped yet")
    projected = matmul(state.output, model.store["span_weight"])
    candidates = stack(
        [phrase_repr(enc, state.cursor, end) for end in range(state.cursor, enc.n + 1)]
    )
    scores = matmul(candidates, projected)
    return SpanDistribution(log_probs=log_softmax(scores), start=state.cursor, n=enc.n)


def label_scores(model, state: DecoderState, enc: EncoderOutput, span: tuple[int, int]) -> LabelDistribution:
    """Normalized label scores for one span, sharing the label embedding rows."""
    start, end = span
    if not (1 <= start <= end <= enc.n):
        raise ValueError(f"span ({start}, {end}) out of range for length {enc.n}")
    if state.output is None:
        raise ValueError("decoder has not been stepped yet")
    joined = concat([phrase_repr(enc, start, end), state.output])
    scores = matmul(model.store["label_emb"], matmul(model.store["label_weight"], joined))
    return LabelDistribution(log_probs=log_softmax(scores), labels=model.vocab.labels)


def select_segment(model, state: DecoderState, enc: EncoderOutput) -> Segment:
    """Argmax span, then argmax label for it. numpy's argmax takes the first
    maximum, which realizes the smallest-end / smallest-label-id tie policy
    because candidates are ordered by end and labels by id."""
    spans = span_scores(model, state, enc)
    best = int(np.argmax(spans.log_probs.data))
    start, end = spans.span_at(best)
    labels = label_scores(model, state, enc, (start, end))
    label_id = int(np.argmax(labels.log_probs.data))
    return Segment(start, end, labels.labels[label_id])

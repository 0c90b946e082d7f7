"""Sentence encoder: token representations, bidirectional context, spans.

A span representation is assembled in constant time from two boundary
context states: right state, elementwise difference, left state. Nothing
is precomputed per span pair, so memory stays linear in sentence length.
"""

from dataclasses import dataclass

import numpy as np

from .autodiff import (
    Tensor,
    concat,
    conv1d_same,
    dropout,
    lstm_cell,
    max_pool_rows,
    row,
    stack,
    sub,
)
from .data import Sentence


@dataclass
class EncoderOutput:
    """Top-layer states per token: forward, backward, and their concatenation."""

    forward: list[Tensor]
    backward: list[Tensor]
    combined: list[Tensor]

    @property
    def n(self) -> int:
        return len(self.combined)


def char_cnn(model, char_ids: list[int]) -> Tensor:
    """Fixed-width character feature: embed, convolve, max-pool over positions."""
    if not char_ids:
        raise ValueError("char_cnn: token has no characters")
    emb = stack([row(model.store["char_emb"], cid) for cid in char_ids])
    convolved = conv1d_same(emb, model.store["char_conv_w"], model.store["char_conv_b"])
    return max_pool_rows(convolved)


def embed_tokens(model, sentence: Sentence, train: bool = False) -> list[Tensor]:
    """Per-token representation: embedding row, plus the character feature
    when the character branch is enabled. Unknown tokens fall back to the
    unknown row; their characters still contribute."""
    config = model.config
    token_emb = model.store["token_emb"]
    rng = model.rngs.stream("dropout") if train and config.dropout > 0 else None
    reprs = []
    for tok in sentence.tokens:
        e = row(token_emb, model.vocab.token_id(tok))
        if config.char_cnn:
            e = concat([e, char_cnn(model, model.vocab.char_ids(tok))])
        if rng is not None:
            e = dropout(e, config.dropout, True, rng)
        reprs.append(e)
    return reprs


def _run_direction(model, inputs: list[Tensor], weight: Tensor, bias: Tensor, reverse: bool):
    hidden = model.config.encoder_hidden
    h = Tensor(np.zeros(hidden))
    c = Tensor(np.zeros(hidden))
    order = range(len(inputs) - 1, -1, -1) if reverse else range(len(inputs))
    states: list[Tensor] = [None] * len(inputs)
    for k in order:
        h, c = lstm_cell(inputs[k], h, c, weight, bias)
        states[k] = h
    return states


def encode(model, sentence: Sentence, train: bool = False) -> EncoderOutput:
    """Stacked bidirectional recurrence over the token representations.

    Boundary states on both ends are zero vectors. Dropout applies between
    layers in training mode only.
    """
    config = model.config
    inputs = embed_tokens(model, sentence, train)
    rng = model.rngs.stream("dropout") if train and config.dropout > 0 else None
    forward = backward = None
    for layer in range(config.layers):
        if layer > 0:
            inputs = [concat([f, b]) for f, b in zip(forward, backward)]
            if rng is not None:
                inputs = [dropout(x, config.dropout, True, rng) for x in inputs]
        forward = _run_direction(
            model, inputs, model.store[f"enc/{layer}/fw/w"], model.store[f"enc/{layer}/fw/b"], False
        )
        backward = _run_direction(
            model, inputs, model.store[f"enc/{layer}/bw/w"], model.store[f"enc/{layer}/bw/b"], True
        )
    combined = [concat([f, b]) for f, b in zip(forward, backward)]
    return EncoderOutput(forward=forward, backward=backward, combined=combined)


def phrase_repr(enc: EncoderOutput, start: int, end: int) -> Tensor:
    """Span representation from the two boundary states, 1-based inclusive.

    Reads exactly two context vectors, so the cost is independent of both
    the span width and the sentence length.
    """
    if not (1 <= start <= end <= enc.n):
        raise ValueError(f"span ({start}, {end}) out of range for length {enc.n}")
    left = enc.combined[start - 1]
    right = enc.combined[end - 1]
    return concat([right, sub(right, left), left])

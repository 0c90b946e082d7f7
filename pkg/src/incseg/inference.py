"""Decoding: greedy, beam, and an exhaustive oracle for small inputs.

All three run without a gradient tape. Hypothesis scores are sums of span
and label log-probabilities under the model conditioned on the
hypothesis's own segments, so the three decoders are directly comparable:
the exhaustive oracle dominates beam, and beam dominates greedy.
"""

from dataclasses import dataclass

import numpy as np

from .data import Segment, Segmentation, Sentence
from .decoder import (
    DecoderState,
    decoder_step,
    initial_state,
    label_scores,
    segment_embedding,
    select_segment,
    span_scores,
)
from .encoder import encode


def greedy_decode(model, sentence: Sentence, stats: dict | None = None) -> Segmentation:
    """Leftmost-segment loop: step the decoder, take the best segment, advance
    the cursor past it, stop once the sentence is covered.

    ``stats``, when given, receives the iteration count and the candidate-set
    size of every step."""
    n = len(sentence)
    enc = encode(model, sentence, train=False)
    state = initial_state(model)
    prev = None
    segments: list[Segment] = []
    candidate_counts: list[int] = []
    while state.cursor <= n:
        seg_emb = segment_embedding(model, prev, enc)
        state = decoder_step(model, state, seg_emb, enc)
        candidate_counts.append(n - state.cursor + 1)
        seg = select_segment(model, state, enc)
        segments.append(seg)
        prev = seg
        state = state.at_cursor(seg.end + 1)
    if stats is not None:
        stats["iterations"] = len(segments)
        stats["candidate_counts"] = candidate_counts
    return Segmentation(segments, n)


def segmentation_score(model, sentence: Sentence, segmentation: Segmentation) -> float:
    """Total log-probability of a segmentation, conditioning each step on the
    segmentation's own previous segments."""
    if segmentation.n != len(sentence):
        raise ValueError("segmentation length does not match sentence")
    enc = encode(model, sentence, train=False)
    state = initial_state(model)
    prev = None
    total = 0.0
    for seg in segmentation.segments:
        state = state.at_cursor(seg.start)
        seg_emb = segment_embedding(model, prev, enc)
        state = decoder_step(model, state, seg_emb, enc)
        spans = span_scores(model, state, enc)
        labels = label_scores(model, state, enc, (seg.start, seg.end))
        total += float(spans.log_probs.data[spans.index_of(seg.end)])
        total += float(labels.log_probs.data[model.vocab.label_index[seg.label]])
        prev = seg
    return total


@dataclass
class _Hypothesis:
    score: float
    segments: tuple[Segment, ...]
    state: DecoderState
    prev: Segment | None
    key: tuple  # (end, label_id) per segment; lexicographic tie order


def _hyp_sort_key(h: "_Hypothesis"):
    return (-h.score, h.key)


def beam_decode(model, sentence: Sentence, beam_width: int) -> Segmentation:
    """Beam search over segment sequences.

    Each live hypothesis expands with its top ``beam_width`` spans, each
    paired with its top ``beam_width`` labels; the pool of new and already
    finished hypotheses is then pruned to ``beam_width`` by accumulated
    log-probability. The greedy path is kept as a guard so widening the
    beam can never return a lower-scoring segmentation than width 1.
    Width 1 reproduces greedy decoding exactly, and a width at least the
    number of labeled segmentations reproduces the exhaustive argmax.
    """
    if beam_width < 1:
        raise ValueError(f"beam width must be >= 1, got {beam_width}")
    n = len(sentence)
    enc = encode(model, sentence, train=False)
    start = _Hypothesis(
        score=0.0, segments=(), state=initial_state(model), prev=None, key=()
    )
    live = [start]
    finished: list[_Hypothesis] = []
    for _ in range(n):
        if not live:
            break
        children: list[_Hypothesis] = []
        for hyp in live:
            seg_emb = segment_embedding(model, hyp.prev, enc)
            state = decoder_step(model, hyp.state, seg_emb, enc)
            spans = span_scores(model, state, enc)
            span_lp = spans.log_probs.data
            span_order = sorted(range(len(span_lp)), key=lambda r: (-span_lp[r], r))
            for rank in span_order[:beam_width]:
                seg_start, seg_end = spans.span_at(rank)
                labels = label_scores(model, state, enc, (seg_start, seg_end))
                label_lp = labels.log_probs.data
                label_order = sorted(range(len(label_lp)), key=lambda l: (-label_lp[l], l))
                for label_id in label_order[:beam_width]:
                    seg = Segment(seg_start, seg_end, labels.labels[label_id])
                    children.append(
                        _Hypothesis(
                            score=hyp.score + float(span_lp[rank]) + float(label_lp[label_id]),
                            segments=hyp.segments + (seg,),
                            state=state.at_cursor(seg_end + 1),
                            prev=seg,
                            key=hyp.key + ((seg_end, label_id),),
                        )
                    )
        pool = sorted(children + finished, key=_hyp_sort_key)[:beam_width]
        live = [h for h in pool if h.state.cursor <= n]
        finished = [h for h in pool if h.state.cursor > n]
    if not finished:
        raise RuntimeError("beam search ended with no finished hypothesis")
    best = min(finished, key=_hyp_sort_key)
    return Segmentation(best.segments, n)


MAX_ORACLE_LENGTH = 12


def count_segmentations(n: int, n_labels: int) -> int:
    """Number of labeled segmentations of an n-token sentence:
    sum over m of C(n-1, m-1) * n_labels**m."""
    return n_labels * (1 + n_labels) ** (n - 1)


def exhaustive_oracle(model, sentence: Sentence, stats: dict | None = None) -> Segmentation:
    """Score every labeled segmentation by depth-first enumeration and return
    the argmax. Ties resolve to the first candidate in (end, label id)
    lexicographic order, the same order selection uses stepwise."""
    n = len(sentence)
    if n > MAX_ORACLE_LENGTH:
        raise ValueError(f"exhaustive search supports n <= {MAX_ORACLE_LENGTH}, got {n}")
    enc = encode(model, sentence, train=False)
    labels = model.vocab.labels
    best_score = -np.inf
    best_segments: tuple[Segment, ...] | None = None
    evaluated = 0

    def recurse(state: DecoderState, prev: Segment | None, acc: float, segments: tuple[Segment, ...]):
        nonlocal best_score, best_segments, evaluated
        cursor = state.cursor
        if cursor > n:
            evaluated += 1
            if acc > best_score:
                best_score = acc
                best_segments = segments
            return
        seg_emb = segment_embedding(model, prev, enc)
        stepped = decoder_step(model, state, seg_emb, enc)
        spans = span_scores(model, stepped, enc)
        span_lp = spans.log_probs.data
        for end in range(cursor, n + 1):
            label_lp = label_scores(model, stepped, enc, (cursor, end)).log_probs.data
            for label_id, label in enumerate(labels):
                seg = Segment(cursor, end, label)
                recurse(
                    stepped.at_cursor(end + 1),
                    seg,
                    acc + float(span_lp[end - cursor]) + float(label_lp[label_id]),
                    segments + (seg,),
                )

    recurse(initial_state(model), None, 0.0, ())
    if stats is not None:
        stats["evaluated"] = evaluated
    assert best_segments is not None
    return Segmentation(best_segments, n)

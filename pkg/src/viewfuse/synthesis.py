"""Fusing per-view selections into one global annotation.

Front and back views carry the identifying information, so their
combined text is boosted and its first sentence becomes the head of
the global description; the best of the remaining views supplies
supplementary detail.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import EmptyText, MissingFrontOrBack, MissingView, OutOfRangeArgument
from .model import SIDE_VIEWS, VIEW_ORDER, Viewpoint

_TERMINATORS = ".!?"


@dataclass(frozen=True)
class ViewSelection:
    """The winning description for one view and its composite score."""

    view: Viewpoint
    text: str
    score: float

    def __post_init__(self):
        if not self.text:
            raise EmptyText("selection text must be non-empty")
        if not math.isfinite(self.score) or not 0.0 <= self.score <= 1.0:
            raise ValueError(f"selection score must be in [0, 1], got {self.score!r}")


class FrontBackCombined(NamedTuple):
    text: str
    score: float      # clamped to [0, 1] for downstream averaging
    raw_score: float  # unclamped weighted value, kept for ranking


@dataclass(frozen=True)
class GlobalAnnotation:
    core_sentence: str
    supplementary: str
    full_text: str
    score_global: float
    per_view: tuple[ViewSelection, ...]


def prioritize_front_back(
    selections: list[ViewSelection], w_fb: float
) -> FrontBackCombined:
    """Concatenate front then back text; score is w_fb times their mean."""
    if not math.isfinite(w_fb) or w_fb < 1.0:
        raise OutOfRangeArgument(f"w_fb must be >= 1, got {w_fb!r}")
    by_view = {s.view: s for s in selections}
    missing = [v.value for v in (Viewpoint.FRONT, Viewpoint.BACK) if v not in by_view]
    if missing:
        raise MissingFrontOrBack(f"missing selections: {', '.join(missing)}")
    front, back = by_view[Viewpoint.FRONT], by_view[Viewpoint.BACK]
    text = f"{front.text} {back.text}"
    raw = w_fb * (front.score + back.score) / 2.0
    return FrontBackCombined(text=text, score=min(1.0, max(0.0, raw)), raw_score=raw)


def extract_core_sentence(text: str) -> str:
    """The leading sentence of `text`.

    A terminator counts only when followed by whitespace or the end of
    the string, and a terminator right after a single-letter word (an
    initial such as "J.") does not end the sentence. Text without any
    terminator is returned whole.
    """
    if not text:
        raise EmptyText("text must be non-empty")
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if i + 1 < len(text) and not text[i + 1].isspace():
            continue
        # walk back over the word preceding the terminator
        j = i
        while j > 0 and text[j - 1].isalpha():
            j -= 1
        if i - j == 1:
            continue  # single-letter word: an initial, not a sentence end
        return text[: i + 1]
    return text


def assemble_global(selections: list[ViewSelection], w_fb: float) -> GlobalAnnotation:
    """Build the global annotation from all six view selections.

    The core sentence comes from the combined front/back text. The
    supplementary text is the highest-scoring side view (left, right,
    top, bottom); ties prefer the longest text, then canonical view
    order. The global score averages the front/back priority score with
    the supplementary view's score.
    """
    by_view = {s.view: s for s in selections}
    missing = [v.value for v in VIEW_ORDER if v not in by_view]
    if missing:
        raise MissingView(f"missing selections: {', '.join(missing)}")

    fb = prioritize_front_back(selections, w_fb)
    core = extract_core_sentence(fb.text).strip()

    best = None
    for view in SIDE_VIEWS:
        s = by_view[view]
        if (
            best is None
            or s.score > best.score
            or (s.score == best.score and len(s.text) > len(best.text))
        ):
            best = s
    supplementary = best.text.strip()

    full_text = f"{core} {supplementary}"
    score_global = (fb.score + best.score) / 2.0
    return GlobalAnnotation(
        core_sentence=core,
        supplementary=supplementary,
        full_text=full_text,
        score_global=score_global,
        per_view=tuple(by_view[v] for v in VIEW_ORDER),
    )

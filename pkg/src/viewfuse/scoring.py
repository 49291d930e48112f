"""Image-text relevance weighting and the composite candidate score.

Each candidate's grounding in its view image is measured by cosine
similarity between the image embedding and the candidate text
embedding, turned into a probability via softmax. The composite score
is a convex blend of normalized confidence and that relevance weight.
"""

import math
from dataclasses import dataclass

from .clustering import cosine_similarity
from .errors import EmptyCandidates, OutOfRangeArgument
from .model import EmbeddingVector, Viewpoint


@dataclass(frozen=True)
class RelevanceWeights:
    """Softmax weights over one view's candidates; sums to 1."""

    weights: tuple[float, ...]


@dataclass(frozen=True)
class ScoredCandidate:
    """A candidate after clustering and weighting.

    relevance_weight and composite_score are populated for canonical
    representatives; cluster members that were deduplicated away keep
    only their cluster id and confidence.
    """

    view: Viewpoint
    index: int
    text: str
    cluster_id: int
    raw_confidence: float
    normalized_confidence: float
    relevance_weight: float | None = None
    composite_score: float | None = None


def relevance_weights(
    image_emb: EmbeddingVector, text_embs: list[EmbeddingVector]
) -> RelevanceWeights:
    """Softmax over cosine(image, text_i) across the given candidates."""
    if len(text_embs) == 0:
        raise EmptyCandidates("at least one text embedding required")
    sims = [cosine_similarity(image_emb, t) for t in text_embs]
    peak = max(sims)
    exps = [math.exp(s - peak) for s in sims]
    total = sum(exps)
    return RelevanceWeights(weights=tuple(e / total for e in exps))


def composite_score(norm_conf: float, relevance: float, blend_ratio: float) -> float:
    """Convex combination: (1 - blend) * confidence + blend * relevance."""
    for name, value, lo, hi in (
        ("norm_conf", norm_conf, 0.0, 1.0),
        ("relevance", relevance, 0.0, 1.0),
        ("blend_ratio", blend_ratio, 0.0, 1.0),
    ):
        if not math.isfinite(value) or value < lo or value > hi:
            raise OutOfRangeArgument(f"{name} must be in [{lo}, {hi}], got {value!r}")
    if blend_ratio == 0.0:
        return norm_conf
    if blend_ratio == 1.0:
        return relevance
    return (1.0 - blend_ratio) * norm_conf + blend_ratio * relevance

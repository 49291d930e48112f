"""Token-likelihood confidence scoring.

The raw score is the mean absolute token logprob of a generated
description: 0 means every token had probability 1, larger values mean
the generator was less certain. The normalized form maps that onto
(0, 1] with higher being better, so it can be blended with relevance
weights downstream.
"""

import math
from dataclasses import dataclass

from .errors import EmptyTokenList, NegativeRaw, NonFiniteLogprob


@dataclass(frozen=True)
class ConfidenceScore:
    """Raw (lower is better) and normalized (higher is better) confidence.

    Attributes:
        raw: mean absolute token logprob, >= 0.
        normalized: exp(-raw), in (0, 1].
    """

    raw: float
    normalized: float


def compute_raw_confidence(token_logprobs: list[float]) -> float:
    """Mean absolute logprob over the generated tokens.

    Each entry must be a finite natural-log probability, i.e. <= 0.
    """
    if len(token_logprobs) == 0:
        raise EmptyTokenList("token_logprobs must be non-empty")
    total = 0.0
    for lp in token_logprobs:
        if not math.isfinite(lp) or lp > 0:
            raise NonFiniteLogprob(f"logprob must be finite and <= 0, got {lp!r}")
        total += abs(lp)
    return total / len(token_logprobs)


def normalize_confidence(raw: float) -> float:
    """Map a raw confidence onto (0, 1], strictly decreasing, 0 -> 1."""
    if not math.isfinite(raw) or raw < 0:
        raise NegativeRaw(f"raw confidence must be finite and >= 0, got {raw!r}")
    return math.exp(-raw)


def score_tokens(token_logprobs: list[float]) -> ConfidenceScore:
    """Convenience wrapper returning both forms at once."""
    raw = compute_raw_confidence(token_logprobs)
    return ConfidenceScore(raw=raw, normalized=normalize_confidence(raw))

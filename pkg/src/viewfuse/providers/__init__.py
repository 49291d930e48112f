"""Provider contracts for the four external models.

The engine needs a candidate generator (vision-language model), a text
embedder (clustering space), an image-text embedder (relevance), and a
point-cloud embedder (gating). Each is an abstract interface with a
deterministic mock, an HTTP adapter, and an on-disk response cache.
"""

import enum
import hashlib
import json
import statistics
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..confidence import compute_raw_confidence
from ..errors import MissingLogprobs
from ..model import CandidateDescription, EmbeddingVector, PointCloud, Viewpoint


class PromptPhase(enum.Enum):
    """The three turns of the generation conversation."""

    IDENTIFICATION = "identification"
    ATTRIBUTE_ELICITATION = "attribute_elicitation"
    INTEGRATION = "integration"


@dataclass(frozen=True)
class GenerationConfig:
    temperature: float = 0.7
    num_candidates: int = 5
    prompt_phase: PromptPhase = PromptPhase.INTEGRATION

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.num_candidates < 1:
            raise ValueError(f"num_candidates must be >= 1, got {self.num_candidates}")


@dataclass(frozen=True)
class ProviderRequest:
    """A logical provider call, with a stable key for the cache.

    Identical logical requests always produce identical keys, so cache
    hits survive process restarts.
    """

    kind: str  # generate_candidates | embed_text | embed_image | embed_cloud
    payload: str  # canonical JSON serialization of the inputs
    cache_key: str


def make_request(kind: str, payload: dict, model_id: str) -> ProviderRequest:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    digest = hashlib.sha256(
        f"{kind}\n{model_id}\n{canonical}".encode("utf-8")
    ).hexdigest()[:32]
    return ProviderRequest(kind=kind, payload=canonical, cache_key=digest)


def cloud_digest(cloud: PointCloud) -> str:
    """Stable content digest of a point cloud's rounded coordinates."""
    return hashlib.sha256(cloud.digest_payload()).hexdigest()


@runtime_checkable
class CandidateGenerator(Protocol):
    model_id: str

    def generate_candidates(
        self, view: Viewpoint, image_ref: str, cfg: GenerationConfig
    ) -> list[CandidateDescription]: ...


@runtime_checkable
class TextEmbedder(Protocol):
    model_id: str

    def embed_text(self, text: str) -> EmbeddingVector: ...


@runtime_checkable
class ImageEmbedder(Protocol):
    model_id: str

    def embed_image(self, image_ref: str) -> EmbeddingVector: ...


@runtime_checkable
class CloudEmbedder(Protocol):
    model_id: str

    def embed_cloud(self, cloud: PointCloud) -> EmbeddingVector: ...


@dataclass
class ProviderSet:
    """The four providers one pipeline run works with."""

    generator: CandidateGenerator
    text_embedder: TextEmbedder
    image_embedder: ImageEmbedder
    cloud_embedder: CloudEmbedder


@dataclass(frozen=True)
class CandidateDraft:
    """Generator output before confidence resolution.

    token_logprobs is None when the provider could not supply them.
    """

    view: Viewpoint
    text: str
    token_logprobs: tuple[float, ...] | None
    index: int


def resolve_drafts(drafts: list[CandidateDraft]) -> list[CandidateDescription]:
    """Turn drafts into candidates, filling in missing confidences.

    A draft without logprobs gets the median raw confidence of its
    sibling drafts that do have them, or 1.0 when no sibling does. The
    fallback keeps logprob-less candidates scoreable without inventing
    token probabilities for them.
    """
    known: dict[int, float] = {}
    for d in drafts:
        if d.token_logprobs is not None:
            if len(d.token_logprobs) == 0:
                raise MissingLogprobs(f"candidate {d.index} has an empty logprob list")
            known[d.index] = compute_raw_confidence(list(d.token_logprobs))
    fallback = statistics.median(known.values()) if known else 1.0

    out = []
    for d in drafts:
        if d.token_logprobs is not None:
            out.append(
                CandidateDescription(
                    view=d.view,
                    text=d.text,
                    token_logprobs=d.token_logprobs,
                    raw_confidence=known[d.index],
                    index=d.index,
                )
            )
        else:
            out.append(
                CandidateDescription(
                    view=d.view,
                    text=d.text,
                    token_logprobs=(),
                    raw_confidence=fallback,
                    index=d.index,
                )
            )
    return out

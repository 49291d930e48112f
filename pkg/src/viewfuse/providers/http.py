"""Generic HTTP adapter for remote model endpoints.

Rather than hard-coding one vendor, each role is configured with an
endpoint, an auth header fed from an environment variable, a JSON
request template with placeholders, and response paths saying where to
find the generated texts, logprobs, or embedding in the reply.

Template placeholders: a string value that is exactly "{image}",
"{prompt}", "{temperature}", "{n}", "{text}", or "{cloud}" is replaced
by the typed value (numbers stay numbers, the cloud becomes a nested
[[x, y, z], ...] list); placeholders inside longer strings are
substituted textually.

Response paths are dotted, with [i] for list indices and [] to map
over a list: "choices[].text" collects the text field of every choice.
"""

import logging
import os
import re
import time
from dataclasses import dataclass, field
from typing import Any

import requests

from ..errors import (
    DimensionContractViolation,
    MalformedProviderResponse,
    ProviderUnavailable,
)
from ..model import EmbeddingVector, PointCloud, Viewpoint
from . import CandidateDraft, GenerationConfig, resolve_drafts

logger = logging.getLogger(__name__)

MAX_ATTEMPTS = 3
BACKOFF_SECONDS = 1.0

_PLACEHOLDER = re.compile(r"^\{(\w+)\}$")


@dataclass(frozen=True)
class HttpProviderConfig:
    endpoint: str
    request_template: dict
    model: str = ""
    api_key_env: str = "PROVIDER_API_KEY"
    auth_header: str = "Authorization"
    auth_scheme: str = "Bearer"
    timeout: float = 60.0
    # where in the response JSON to find things
    texts_path: str = "choices[].text"
    logprobs_path: str | None = "choices[].logprobs"
    embedding_path: str = "data[0].embedding"
    prompt: str = "Describe the {view} view of this object."
    extra_headers: dict = field(default_factory=dict)


def substitute_template(template: Any, values: dict[str, Any]) -> Any:
    """Fill placeholders in a JSON-shaped template."""
    if isinstance(template, dict):
        return {k: substitute_template(v, values) for k, v in template.items()}
    if isinstance(template, list):
        return [substitute_template(v, values) for v in template]
    if isinstance(template, str):
        m = _PLACEHOLDER.match(template)
        if m and m.group(1) in values:
            return values[m.group(1)]
        out = template
        for key, value in values.items():
            token = "{" + key + "}"
            if token in out:
                out = out.replace(token, str(value))
        return out
    return template


def _tokenize_path(path: str) -> list[tuple]:
    tokens: list[tuple] = []
    for part in path.split("."):
        m = re.fullmatch(r"(\w+)((?:\[\d*\])*)", part)
        if not m:
            raise MalformedProviderResponse(f"bad response path segment {part!r}")
        tokens.append(("key", m.group(1)))
        for idx in re.findall(r"\[(\d*)\]", m.group(2)):
            tokens.append(("map", None) if idx == "" else ("index", int(idx)))
    return tokens


def _walk(current: Any, tokens: list[tuple], path: str, lenient: bool = False) -> Any:
    for i, (op, arg) in enumerate(tokens):
        if op == "key":
            if not isinstance(current, dict) or arg not in current:
                if lenient:
                    return None
                raise MalformedProviderResponse(f"response lacks {arg!r} (path {path!r})")
            current = current[arg]
        elif op == "index":
            if not isinstance(current, list) or arg >= len(current):
                if lenient:
                    return None
                raise MalformedProviderResponse(
                    f"response list too short at [{arg}] (path {path!r})"
                )
            current = current[arg]
        else:  # map over a list, applying the rest of the path to each item
            if not isinstance(current, list):
                if lenient:
                    return None
                raise MalformedProviderResponse(f"expected a list for [] (path {path!r})")
            rest = tokens[i + 1 :]
            return [_walk(item, rest, path, lenient) for item in current]
    return current


def extract_path(doc: Any, path: str) -> Any:
    """Pull a value out of parsed JSON by dotted path."""
    return _walk(doc, _tokenize_path(path), path)


def extract_path_lenient(doc: Any, path: str) -> Any:
    """Like extract_path, but dead ends become None instead of errors."""
    return _walk(doc, _tokenize_path(path), path, lenient=True)


class _HttpBase:
    def __init__(self, config: HttpProviderConfig, session=None, sleep=time.sleep):
        self.config = config
        self.session = session if session is not None else requests.Session()
        self.sleep = sleep
        self.model_id = config.model or config.endpoint

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json", **self.config.extra_headers}
        key = os.environ.get(self.config.api_key_env, "")
        if key:
            scheme = self.config.auth_scheme
            headers[self.config.auth_header] = f"{scheme} {key}".strip()
        return headers

    def _post(self, body: dict) -> dict:
        last_error = None
        for attempt in range(MAX_ATTEMPTS):
            if attempt > 0:
                delay = BACKOFF_SECONDS * (2 ** (attempt - 1))
                logger.info("retrying %s in %.1fs (attempt %d)", self.config.endpoint, delay, attempt + 1)
                self.sleep(delay)
            try:
                response = self.session.post(
                    self.config.endpoint,
                    json=body,
                    headers=self._headers(),
                    timeout=self.config.timeout,
                )
            except (requests.ConnectionError, requests.Timeout) as e:
                last_error = e
                continue
            if response.status_code >= 400:
                raise ProviderUnavailable(
                    f"{self.config.endpoint} answered HTTP {response.status_code}"
                )
            try:
                return response.json()
            except ValueError as e:
                raise MalformedProviderResponse(
                    f"{self.config.endpoint} returned non-JSON body"
                ) from e
        raise ProviderUnavailable(
            f"{self.config.endpoint} unreachable after {MAX_ATTEMPTS} attempts: {last_error}"
        )


class HttpCandidateGenerator(_HttpBase):
    """Generation endpoint adapter; validates the candidate count."""

    def generate_candidates(
        self, view: Viewpoint, image_ref: str, cfg: GenerationConfig
    ) -> list:
        prompt = self.config.prompt.replace("{view}", view.value)
        body = substitute_template(
            self.config.request_template,
            {
                "image": image_ref,
                "prompt": prompt,
                "temperature": cfg.temperature,
                "n": cfg.num_candidates,
            },
        )
        doc = self._post(body)
        texts = extract_path(doc, self.config.texts_path)
        if not isinstance(texts, list) or not all(isinstance(t, str) for t in texts):
            raise MalformedProviderResponse(
                f"{self.config.texts_path!r} did not yield a list of strings"
            )
        if len(texts) != cfg.num_candidates:
            raise MalformedProviderResponse(
                f"expected {cfg.num_candidates} candidates, got {len(texts)}"
            )
        logprob_lists: list = [None] * len(texts)
        if self.config.logprobs_path is not None:
            # absent per choice is fine (per-candidate fallback); a
            # present-but-wrong-shape answer is a contract violation
            raw = extract_path_lenient(doc, self.config.logprobs_path)
            if raw is not None and not (
                isinstance(raw, list) and all(x is None for x in raw)
            ):
                if not isinstance(raw, list) or len(raw) != len(texts):
                    raise MalformedProviderResponse(
                        "logprobs list does not align with candidates"
                    )
                try:
                    logprob_lists = [
                        tuple(float(x) for x in lp) if lp is not None else None
                        for lp in raw
                    ]
                except (TypeError, ValueError):
                    raise MalformedProviderResponse(
                        "logprobs entries are not lists of numbers"
                    ) from None
        drafts = [
            CandidateDraft(view=view, text=t, token_logprobs=lp, index=i)
            for i, (t, lp) in enumerate(zip(texts, logprob_lists))
        ]
        return resolve_drafts(drafts)


class HttpEmbedder(_HttpBase):
    """Embedding endpoint adapter shared by the three embedding roles."""

    def __init__(self, config: HttpProviderConfig, session=None, sleep=time.sleep,
                 expected_dim: int | None = None):
        super().__init__(config, session=session, sleep=sleep)
        self.expected_dim = expected_dim

    def _embed(self, values: dict) -> EmbeddingVector:
        doc = self._post(substitute_template(self.config.request_template, values))
        raw = extract_path(doc, self.config.embedding_path)
        if not isinstance(raw, list) or not raw:
            raise MalformedProviderResponse(
                f"{self.config.embedding_path!r} did not yield a vector"
            )
        vec = EmbeddingVector(tuple(float(x) for x in raw))
        if self.expected_dim is None:
            self.expected_dim = vec.dim
        elif vec.dim != self.expected_dim:
            raise DimensionContractViolation(
                f"embedding dim {vec.dim} != contracted {self.expected_dim}"
            )
        return vec

    def embed_text(self, text: str) -> EmbeddingVector:
        return self._embed({"text": text})

    def embed_image(self, image_ref: str) -> EmbeddingVector:
        return self._embed({"image": image_ref})

    def embed_cloud(self, cloud: PointCloud) -> EmbeddingVector:
        return self._embed({"cloud": cloud.points.tolist()})

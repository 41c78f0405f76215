"""Caption policy: per-item selection and ten-way synthesis from one long caption."""

from __future__ import annotations

import hashlib
import json
import os
import re
import urllib.request
from pathlib import Path

import numpy as np

from .dataset import DatasetItem
from .errors import CaptionClientError, CaptionSynthesisError, ConfigError, DatasetError

ENDPOINT_ENV = "PLATONIC_EXTRACT_LLM_ENDPOINT"
API_KEY_ENV = "PLATONIC_EXTRACT_LLM_API_KEY"
MODEL_ENV = "PLATONIC_EXTRACT_LLM_MODEL"

CAPTION_COUNT = 10
MAX_RETRIES = 3

SYNTHESIS_PROMPT = (
    "Create ten concise captions of a video using the provided detailed captions. "
    "Each caption should mention different details present. The goal is not to "
    "summarize all of the information 10 different ways, but to get 10 different "
    "descriptions all potentially containing different information.\n"
    "TASK: Extract key information from the captions and combine it into a set of "
    "ten captions, each of which is a single phrase or set of phrases that includes "
    "some subset of the relevant details in alt text format.\n"
    "Steps to Follow:\n"
    "1. Review the caption for general context.\n"
    "2. Extract the most relevant and concise information.\n"
    "3. Don't include all of the key information in every caption. Pick some "
    "information to leave out between captions.\n"
    "4. Combine extracted information into a alt text format using short phrase or "
    "set of phrases with approximately 120 tokens, considering special characters "
    "like comma as part of the token count.\n"
    "5. Minimize the use of special characters and including everything in each "
    "caption.\n"
    "6. Pick only a few things to include in each caption, it's okay to leave "
    "details out.\n"
    "What to Avoid:\n"
    "- Avoid adding or inferring information not present in the original metadata "
    "and captions.\n"
    "- Avoid using complex sentence structures or prioritizing sentence flow.\n"
    "Return a list separated only by new lines, with only the captions, nothing else."
)

_LIST_MARKER = re.compile(r"^(?:\d+[.)]|[-*])\s+")


def select_captions(item: DatasetItem, n_c: int, seed: int) -> list[str]:
    """Pick the captions an item contributes at budget n_c, in annotator order.

    n_c = 1 is a per-item seeded draw (stable under reordering or dropping
    other items); n_c > 1 takes the first n_c captions.
    """
    if n_c > len(item.captions):
        raise DatasetError(
            f"item {item.item_id!r} has {len(item.captions)} captions, need n_c = {n_c}"
        )
    if n_c == 1:
        digest = hashlib.sha256(f"{seed}\x1f{item.item_id}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return [item.captions[int(rng.integers(len(item.captions)))]]
    return list(item.captions[:n_c])


def parse_caption_lines(response: str) -> list[str] | None:
    """Extract exactly ten captions from a newline-separated response.

    Blank lines and list markers are noise; one extra leading line is treated
    as preamble (the request demanded only the captions) and dropped. Any
    other shape means the response is unusable and the caller should retry.
    """
    lines = [_LIST_MARKER.sub("", line.strip()) for line in response.splitlines()]
    lines = [line for line in lines if line]
    if len(lines) == CAPTION_COUNT:
        return lines
    if len(lines) == CAPTION_COUNT + 1:
        return lines[1:]
    return None


def _cache_path(cache_dir: str | Path, long_caption: str) -> Path:
    prompt_key = hashlib.sha256(SYNTHESIS_PROMPT.encode("utf-8")).hexdigest()[:16]
    caption_key = hashlib.sha256(long_caption.encode("utf-8")).hexdigest()[:16]
    return Path(cache_dir) / f"{prompt_key}-{caption_key}.json"


def synthesize_captions(long_caption: str, client, cache_dir: str | Path | None = None,
                        retries: int = MAX_RETRIES) -> list[str]:
    """Turn one detailed caption into ten short ones via the client.

    Results are cached on disk keyed by (prompt hash, caption hash), so
    reruns never touch the backend. Malformed responses and backend errors
    are retried up to `retries` times before the item is given up on.
    """
    if not isinstance(long_caption, str) or not long_caption.strip():
        raise ConfigError("long_caption must be a non-empty string")
    cache_file = _cache_path(cache_dir, long_caption) if cache_dir is not None else None
    if cache_file is not None and cache_file.exists():
        return json.loads(cache_file.read_text(encoding="utf-8"))

    request = f"{SYNTHESIS_PROMPT}\n\nCaptions:\n{long_caption}"
    failures = []
    for _ in range(1 + retries):
        try:
            response = client.complete(request)
        except CaptionClientError as exc:
            failures.append(str(exc))
            continue
        captions = parse_caption_lines(response)
        if captions is not None:
            if cache_file is not None:
                cache_file.parent.mkdir(parents=True, exist_ok=True)
                cache_file.write_text(json.dumps(captions, indent=2) + "\n", encoding="utf-8")
            return captions
        failures.append(f"unusable response with {len(response.splitlines())} lines")
    raise CaptionSynthesisError(
        f"no usable caption list after {1 + retries} attempts: {failures}"
    )


class HttpLLMClient:
    """Minimal completion client; endpoint and key come from the environment."""

    def __init__(self, endpoint: str, api_key: str | None = None, model: str | None = None,
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.api_key = api_key
        self.model = model
        self.timeout = timeout

    @classmethod
    def from_env(cls) -> "HttpLLMClient":
        endpoint = os.environ.get(ENDPOINT_ENV)
        if not endpoint:
            raise ConfigError(f"set {ENDPOINT_ENV} to the completion endpoint URL")
        return cls(endpoint, os.environ.get(API_KEY_ENV), os.environ.get(MODEL_ENV))

    def complete(self, prompt: str) -> str:
        payload = {"prompt": prompt}
        if self.model:
            payload["model"] = self.model
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        request = urllib.request.Request(
            self.endpoint, data=json.dumps(payload).encode("utf-8"), headers=headers
        )
        try:
            with urllib.request.urlopen(request, timeout=self.timeout) as response:
                body = json.loads(response.read().decode("utf-8"))
        except (OSError, ValueError) as exc:
            raise CaptionClientError(f"completion request failed: {exc}") from exc
        if not isinstance(body, dict) or not isinstance(body.get("text"), str):
            raise CaptionClientError("completion response lacks a text field")
        return body["text"]

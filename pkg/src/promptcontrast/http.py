"""HTTP implementations of the service clients.

All endpoints speak JSON over POST. The generator uses a chat-completions
shaped body; the scorer endpoints use the flat request/response schemas
documented in the README. Auth is a bearer token read from the environment
variable named in the endpoint config. Transient failures (connection errors,
429, 5xx) are retried with exponential backoff; anything else surfaces as a
typed client error that aborts the current search.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import requests

from .clients import NliProbs
from .errors import AuthError, MalformedResponseError, NetworkError
from .textops import MaskedPrompt
from .types import MASK_TOKEN, PromptText

_RETRYABLE = {429, 500, 502, 503, 504}


@dataclass(frozen=True)
class HttpEndpoint:
    """Where and how to reach one remote model."""

    url: str
    model: str = ""
    auth_env: Optional[str] = None
    temperature: float = 0.0
    max_tokens: int = 256
    timeout_s: float = 30.0
    max_retries: int = 3


class _HttpClient:
    kind = "http"

    def __init__(
        self,
        endpoint: HttpEndpoint,
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.endpoint = endpoint
        self._session = session or requests.Session()
        self._sleep = sleep
        # generation parameters are part of the cache namespace: changing the
        # model, temperature, or token cap must never reuse stale responses
        self.identity = (
            f"{self.kind}:{endpoint.model}@{endpoint.url}"
            f"?t={endpoint.temperature}&max={endpoint.max_tokens}"
        )

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        env = self.endpoint.auth_env
        if env:
            token = os.environ.get(env)
            if not token:
                raise AuthError(f"auth environment variable {env} is not set")
            headers["Authorization"] = f"Bearer {token}"
        return headers

    def _post(self, payload: dict) -> dict:
        headers = self._headers()
        attempts = self.endpoint.max_retries + 1
        failure: Optional[NetworkError] = None
        for attempt in range(attempts):
            if attempt:
                self._sleep(0.5 * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self.endpoint.url,
                    json=payload,
                    headers=headers,
                    timeout=self.endpoint.timeout_s,
                )
            except requests.RequestException as exc:
                failure = NetworkError(f"request to {self.endpoint.url} failed: {exc}")
                continue
            if resp.status_code in _RETRYABLE:
                failure = NetworkError(f"{self.endpoint.url} answered HTTP {resp.status_code}")
                continue
            if resp.status_code in (401, 403):
                raise AuthError(f"{self.endpoint.url} rejected credentials (HTTP {resp.status_code})")
            if resp.status_code != 200:
                raise NetworkError(f"{self.endpoint.url} answered HTTP {resp.status_code}")
            try:
                return resp.json()
            except ValueError as exc:
                raise MalformedResponseError(f"{self.endpoint.url} returned non-JSON body: {exc}")
        assert failure is not None
        raise failure

    def _field(self, data: dict, path: Sequence) -> object:
        node: object = data
        for step in path:
            try:
                node = node[step]  # type: ignore[index]
            except (KeyError, IndexError, TypeError):
                raise MalformedResponseError(
                    f"{self.endpoint.url} response lacks field {'.'.join(map(str, path))}"
                )
        return node


class HttpGenerator(_HttpClient):
    kind = "generator"

    def generate(self, prompt: PromptText) -> str:
        data = self._post(
            {
                "model": self.endpoint.model,
                "messages": [{"role": "user", "content": prompt.text}],
                "temperature": self.endpoint.temperature,
                "max_tokens": self.endpoint.max_tokens,
            }
        )
        content = self._field(data, ("choices", 0, "message", "content"))
        if not isinstance(content, str):
            raise MalformedResponseError(f"{self.endpoint.url} returned a non-string message")
        return content


class HttpInfiller(_HttpClient):
    kind = "infiller"

    def infill(self, masked: MaskedPrompt) -> str:
        data = self._post(
            {
                "model": self.endpoint.model,
                "text": masked.text,
                "mask_token": MASK_TOKEN,
                "temperature": self.endpoint.temperature,
                "max_tokens": self.endpoint.max_tokens,
            }
        )
        text = self._field(data, ("text",))
        if not isinstance(text, str):
            raise MalformedResponseError(f"{self.endpoint.url} returned a non-string text")
        return text


class HttpNliScorer(_HttpClient):
    kind = "nli"

    def nli(self, premise: str, hypothesis: str) -> NliProbs:
        data = self._post(
            {"model": self.endpoint.model, "premise": premise, "hypothesis": hypothesis}
        )
        try:
            probs = NliProbs(
                float(self._field(data, ("entailment",))),  # type: ignore[arg-type]
                float(self._field(data, ("neutral",))),  # type: ignore[arg-type]
                float(self._field(data, ("contradiction",))),  # type: ignore[arg-type]
            ).validate()
        except (TypeError, ValueError) as exc:
            raise MalformedResponseError(f"{self.endpoint.url} returned bad NLI probabilities: {exc}")
        return probs


class HttpPreferenceScorer(_HttpClient):
    kind = "preference"

    def preference(self, context: str, response_a: str, response_b: str) -> float:
        data = self._post(
            {
                "model": self.endpoint.model,
                "context": context,
                "response_a": response_a,
                "response_b": response_b,
            }
        )
        value = self._field(data, ("prob_a_preferred",))
        try:
            p = float(value)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise MalformedResponseError(f"{self.endpoint.url} returned a non-numeric preference")
        if not 0.0 <= p <= 1.0:
            raise MalformedResponseError(f"{self.endpoint.url} returned preference {p} outside [0, 1]")
        return p


class HttpJudgeScorer(_HttpClient):
    kind = "judge"

    def __init__(
        self,
        endpoint: HttpEndpoint,
        examples: Sequence[str] = (),
        session: Optional[requests.Session] = None,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        super().__init__(endpoint, session=session, sleep=sleep)
        self.examples = list(examples)

    def judge(self, conversation: str, rubric: str, salt: int = 0) -> float:
        data = self._post(
            {
                "model": self.endpoint.model,
                "conversation": conversation,
                "rubric": rubric,
                "examples": self.examples,
                "salt": salt,
            }
        )
        value = self._field(data, ("score",))
        try:
            score = float(value)  # type: ignore[arg-type]
        except (TypeError, ValueError):
            raise MalformedResponseError(f"{self.endpoint.url} returned a non-numeric score")
        if not 0.0 <= score <= 1.0:
            raise MalformedResponseError(f"{self.endpoint.url} returned score {score} outside [0, 1]")
        return score


class HttpEmbedder(_HttpClient):
    kind = "embedder"

    def embed(self, text: str) -> tuple[float, ...]:
        data = self._post({"model": self.endpoint.model, "text": text})
        vector = self._field(data, ("embedding",))
        if not isinstance(vector, list) or not vector:
            raise MalformedResponseError(f"{self.endpoint.url} returned an empty embedding")
        try:
            return tuple(float(x) for x in vector)
        except (TypeError, ValueError):
            raise MalformedResponseError(f"{self.endpoint.url} returned a non-numeric embedding")

"""Text-generation providers: a deterministic mock and a chat-completion HTTP adapter."""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Callable, Protocol

from ..errors import SkirmishError
from .prompt import PromptBundle

DEFAULT_API_KEY_ENV = "SKIRMISH_LLM_API_KEY"


class ProviderError(SkirmishError):
    """Transport or protocol failure talking to a provider."""

    def __init__(self, message: str, retriable: bool = True):
        super().__init__(message)
        self.retriable = retriable


@dataclass(frozen=True)
class DecodingParams:
    max_tokens: int = 1024
    temperature: float = 0.2


@dataclass(frozen=True)
class ProviderRequest:
    prompt: PromptBundle
    decoding: DecodingParams = DecodingParams()

    def to_dict(self) -> dict:
        return {**self.prompt.to_dict(), "max_tokens": self.decoding.max_tokens,
                "temperature": self.decoding.temperature}


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    finish_reason: str = "stop"

    def to_dict(self) -> dict:
        return {"text": self.text, "finish_reason": self.finish_reason}


class Provider(Protocol):
    def complete(self, request: ProviderRequest) -> ProviderResponse: ...


class MockProvider:
    """Answers with ``handler(request)``; deterministic as long as the handler is pure."""

    def __init__(self, handler: Callable[[ProviderRequest], str]):
        self.handler = handler
        self.calls = 0

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        return ProviderResponse(self.handler(request))


class HTTPProvider:
    """Adapter for the common chat-completion JSON shape.

    POSTs ``{"model", "messages", "max_tokens", "temperature"}`` and reads
    ``choices[0].message.content``.  The bearer credential is read from the
    environment variable named by *api_key_env* at call time.
    """

    def __init__(self, endpoint: str, model: str, api_key_env: str = DEFAULT_API_KEY_ENV,
                 timeout: float = 60.0):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout

    def payload(self, request: ProviderRequest) -> dict:
        msgs = [{"role": "system", "content": request.prompt.system}]
        msgs += [{"role": r, "content": t} for r, t in request.prompt.messages]
        return {"model": self.model, "messages": msgs,
                "max_tokens": request.decoding.max_tokens,
                "temperature": request.decoding.temperature}

    def complete(self, request: ProviderRequest) -> ProviderResponse:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        req = urllib.request.Request(self.endpoint, json.dumps(self.payload(request)).encode(),
                                     headers, method="POST")
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                body = json.loads(resp.read().decode())
        except urllib.error.HTTPError as exc:
            raise ProviderError(f"HTTP {exc.code} from provider", retriable=exc.code >= 500) from None
        except (urllib.error.URLError, TimeoutError, OSError) as exc:
            raise ProviderError(f"provider unreachable: {exc}") from None
        except json.JSONDecodeError:
            raise ProviderError("provider returned invalid JSON", retriable=False) from None
        try:
            choice = body["choices"][0]
            return ProviderResponse(choice["message"]["content"] or "",
                                    choice.get("finish_reason") or "stop")
        except (KeyError, IndexError, TypeError):
            raise ProviderError("unexpected provider response shape", retriable=False) from None

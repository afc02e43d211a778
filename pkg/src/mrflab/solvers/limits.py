"""Enumeration guards.

Defaults come from ``MRFLAB_PATH_LIMIT``, ``MRFLAB_SCENARIO_LIMIT`` and
``MRFLAB_SEARCH_LIMIT``; explicit arguments win.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

DEFAULT_PATHS = 200_000
DEFAULT_SCENARIOS = 2_000_000
DEFAULT_SEARCH = 5_000_000


def _env_int(name: str, fallback: int) -> int:
    raw = os.environ.get(name)
    if raw is None or raw == "":
        return fallback
    value = int(raw)
    if value < 0:
        raise ValueError(f"{name} must be nonnegative")
    return value


@dataclass(frozen=True)
class Limits:
    paths: int = DEFAULT_PATHS
    scenarios: int = DEFAULT_SCENARIOS
    search: int = DEFAULT_SEARCH

    @classmethod
    def from_env(cls) -> "Limits":
        return cls(_env_int("MRFLAB_PATH_LIMIT", DEFAULT_PATHS),
                   _env_int("MRFLAB_SCENARIO_LIMIT", DEFAULT_SCENARIOS),
                   _env_int("MRFLAB_SEARCH_LIMIT", DEFAULT_SEARCH))

    def with_(self, **kw) -> "Limits":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})


def resolve(limits: Limits | None) -> Limits:
    return limits if limits is not None else Limits.from_env()

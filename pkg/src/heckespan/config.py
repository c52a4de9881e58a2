"""Run configuration shared by the library entry points and the CLI."""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import UnsupportedInput

PACKAGE_FIXTURES = Path(__file__).resolve().parent / "data" / "fixtures"


def _default_cache() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or str(Path.home() / ".cache")
    return Path(base) / "heckespan"


@dataclass(frozen=True)
class RunConfig:
    cache_dir: Path = field(default_factory=_default_cache)
    db_url: str | None = None
    fixtures_dir: Path = PACKAGE_FIXTURES
    precision_bits: int = 128
    workers: int = 1
    output_format: str = "json"
    sieve_limit: int = 10**8
    offline: bool = True

    def __post_init__(self):
        if self.precision_bits < 64:
            raise UnsupportedInput("precision must be at least 64 bits")
        if self.output_format not in ("json", "csv"):
            raise UnsupportedInput(f"unknown output format {self.output_format!r}")
        if self.workers < 1:
            raise UnsupportedInput("worker count must be positive")
        object.__setattr__(self, "cache_dir", Path(self.cache_dir))
        object.__setattr__(self, "fixtures_dir", Path(self.fixtures_dir))

    @property
    def network_allowed(self) -> bool:
        return not self.offline and bool(self.db_url)

    @classmethod
    def from_env(cls, **overrides) -> "RunConfig":
        env = os.environ
        kw = {}
        if env.get("HECKESPAN_CACHE"):
            kw["cache_dir"] = Path(env["HECKESPAN_CACHE"])
        if env.get("HECKESPAN_FIXTURES"):
            kw["fixtures_dir"] = Path(env["HECKESPAN_FIXTURES"])
        if env.get("HECKESPAN_DB_URL"):
            kw["db_url"] = env["HECKESPAN_DB_URL"]
            kw["offline"] = False
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def with_(self, **kw) -> "RunConfig":
        return replace(self, **kw)

"""Cusp newform data: local level-one computation, fixture/database ingestion, coefficient cache.

Cache layout (one pair of files per (level, weight) under the cache directory):

* ``newforms_{N}_{k}.jsonl``: one JSON object per (embedding, prime) with fields
  level, weight, label, embedding_index, prime, ap_real, ap_exact, source, fetched_at.
* ``bases_{N}_{k}.json``: exact integral q-expansion bases of the newform orbits.
* ``quarantine.jsonl``: records and cache lines that failed verification.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
import threading
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass, field
from datetime import datetime, timezone
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Protocol

import jsonschema

from ..arith import is_squarefree, primes_upto
from ..config import RunConfig
from ..errors import DataUnavailable, IngestionError, NetworkError, UnsupportedInput
from .dimensions import dim_cusp_new
from .hecke import decompose, orbit_coefficients
from .level1 import _miller_ints, dim_level_one
from .newforms import NewformRecord, hecke_check
from .qexp import QExpansion, check_weight, from_ints

SCHEMA_ID = "heckespan.newforms/1"
LEVEL_ONE_AP_MAX = 1000

PAYLOAD_SCHEMA = {
    "type": "object",
    "required": ["schema", "level", "weight", "orbits", "source"],
    "properties": {
        "schema": {"const": SCHEMA_ID},
        "level": {"type": "integer", "minimum": 1},
        "weight": {"type": "integer", "minimum": 4},
        "newspace_dim": {"type": "integer", "minimum": 0},
        "source": {"type": "string"},
        "generated": {"type": "string"},
        "orbits": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "dim", "primes", "embeddings", "basis"],
                "properties": {
                    "label": {"type": "string", "pattern": r"^\d+\.\d+\.a\.[a-z]+$"},
                    "dim": {"type": "integer", "minimum": 1},
                    "primes": {"type": "array", "items": {"type": "integer", "minimum": 2}},
                    "embeddings": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["index", "ap"],
                            "properties": {
                                "index": {"type": "integer", "minimum": 0},
                                "ap": {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+(\.\d+)?([eE][-+]?\d+)?$"}},
                            },
                        },
                    },
                    "ap_exact": {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+$"}},
                    "basis": {
                        "type": "array",
                        "items": {"type": "array", "items": {"type": "string", "pattern": r"^-?\d+$"}},
                    },
                    "hecke_operator": {"type": "array", "items": {"type": "integer"}},
                    "hecke_charpoly": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
    },
}

CACHE_LINE_SCHEMA = {
    "type": "object",
    "required": ["level", "weight", "label", "embedding_index", "prime", "ap_real", "source", "fetched_at"],
    "properties": {
        "level": {"type": "integer"},
        "weight": {"type": "integer"},
        "label": {"type": "string"},
        "embedding_index": {"type": "integer", "minimum": 0},
        "prime": {"type": "integer", "minimum": 2},
        "ap_real": {"type": "string"},
        "ap_exact": {"type": ["string", "null"]},
        "source": {"type": "string"},
        "fetched_at": {"type": "string"},
    },
}


_PAYLOAD_VALIDATOR = jsonschema.Draft202012Validator(PAYLOAD_SCHEMA)
_CACHE_LINE_VALIDATOR = jsonschema.Draft202012Validator(CACHE_LINE_SCHEMA)


@dataclass
class Orbitdata:
    """Parsed orbit: its records and exact integral basis."""

    label: str
    dim: int
    records: list[NewformRecord]
    basis: list[list[int]]


class CuspSource(Protocol):
    def newforms(self, level: int, weight: int, ap_max: int | None = None) -> list[NewformRecord]: ...

    def new_cusp_basis(self, level: int, weight: int, prec: int) -> list[QExpansion]: ...


def _now() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _check_space(level: int, weight: int) -> None:
    check_weight(weight)
    if level < 1 or not is_squarefree(level):
        raise UnsupportedInput(f"level {level} unsupported: need a squarefree level")


# ---------------------------------------------------------------------------
# payload parsing and verification

def _path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(x) for x in err.absolute_path) or "<root>"


def parse_payload(payload: dict, level: int, weight: int) -> list[Orbitdata]:
    """Validate a newform payload and turn it into orbits; raises IngestionError naming the bad field."""
    try:
        _PAYLOAD_VALIDATOR.validate(payload)
    except jsonschema.ValidationError as e:
        raise IngestionError(f"schema mismatch: {e.message}", _path(e)) from None
    if payload["level"] != level:
        raise IngestionError(f"payload is for level {payload['level']}, requested {level}", "level")
    if payload["weight"] != weight:
        raise IngestionError(f"payload is for weight {payload['weight']}, requested {weight}", "weight")
    src = payload["source"]
    out = []
    total = 0
    for i, orb in enumerate(payload["orbits"]):
        where = f"orbits/{i}"
        dim = orb["dim"]
        total += dim
        if len(orb["embeddings"]) != dim:
            raise IngestionError(f"{len(orb['embeddings'])} embeddings for an orbit of dim {dim}", f"{where}/embeddings")
        if len(orb["basis"]) != dim:
            raise IngestionError(f"{len(orb['basis'])} basis forms for an orbit of dim {dim}", f"{where}/basis")
        primes = orb["primes"]
        if primes != sorted(set(primes)):
            raise IngestionError("primes must be strictly increasing", f"{where}/primes")
        basis = [[int(c) for c in b] for b in orb["basis"]]
        exact = None
        if "ap_exact" in orb:
            if dim != 1 or len(orb["ap_exact"]) != len(primes):
                raise IngestionError("ap_exact only allowed for rational orbits, one value per prime", f"{where}/ap_exact")
            exact = {p: int(a) for p, a in zip(primes, orb["ap_exact"])}
        records = []
        for emb in orb["embeddings"]:
            if len(emb["ap"]) != len(primes):
                raise IngestionError("a_p list length differs from prime list", f"{where}/embeddings/{emb['index']}/ap")
            ap = {p: float(a) for p, a in zip(primes, emb["ap"])}
            an = tuple(basis[0]) if dim == 1 else None
            records.append(
                NewformRecord(level, weight, orb["label"], emb["index"], ap, exact, an, dim, src)
            )
        out.append(Orbitdata(orb["label"], dim, records, basis))
    expect = dim_cusp_new(weight, level)
    if total != expect:
        raise IngestionError(f"orbit dimensions sum to {total}, new space has dimension {expect}", "orbits")
    return out


def verify_orbit(orb: Orbitdata) -> list[str]:
    """Cross-checks: Hecke/Ramanujan per record, and the trace of embedded a_p equals the exact trace form."""
    problems = []
    for rec in orb.records:
        rep = hecke_check(rec)
        problems += [f"{rec.full_label}: {v}" for v in rep.violations]
    tr = orb.basis[0]
    for p in orb.records[0].primes():
        if p >= len(tr):
            break
        s = math.fsum(r.ap[p] for r in orb.records)
        if abs(s - tr[p]) > 1e-7 * max(1.0, abs(tr[p])):
            problems.append(f"{orb.label}: embedded a_{p} sum {s!r} differs from trace {tr[p]}")
            break
    if len(tr) > 1 and tr[1] != orb.dim:
        problems.append(f"{orb.label}: trace form has a_1 = {tr[1]}, expected {orb.dim}")
    return problems


# ---------------------------------------------------------------------------
# raw payload sources

def fetch_payload_http(base_url: str, level: int, weight: int, timeout: float = 30.0) -> dict:
    query = urllib.parse.urlencode({"level": level, "weight": weight})
    url = f"{base_url.rstrip('/')}/newforms?{query}"
    try:
        with urllib.request.urlopen(url, timeout=timeout) as resp:
            body = resp.read()
    except urllib.error.HTTPError as e:
        if e.code == 404:
            raise DataUnavailable(level, weight, f"database returned 404 for {url}") from None
        raise NetworkError(f"HTTP {e.code} from {url}") from None
    except (urllib.error.URLError, TimeoutError, OSError) as e:
        raise NetworkError(f"cannot reach {url}: {e}") from None
    try:
        return json.loads(body)
    except ValueError as e:
        raise IngestionError(f"response is not JSON: {e}", "<body>") from None


def load_fixture(directory: Path, level: int, weight: int) -> dict:
    path = Path(directory) / f"newforms_{level}_{weight}.json"
    if not path.exists():
        raise DataUnavailable(level, weight, f"no fixture file {path.name} in {directory}")
    try:
        return json.loads(path.read_text())
    except ValueError as e:
        raise IngestionError(f"fixture {path.name} is not JSON: {e}", "<body>") from None


# ---------------------------------------------------------------------------
# coefficient cache

@dataclass
class CacheReadReport:
    path: Path
    lines: int = 0
    corrupted: list[int] = field(default_factory=list)


class CoefficientCache:
    """Append-free cache: each (level, weight) file is rewritten atomically by a single writer."""

    _lock = threading.Lock()

    def __init__(self, directory: Path):
        self.dir = Path(directory)

    def records_path(self, level: int, weight: int) -> Path:
        return self.dir / f"newforms_{level}_{weight}.jsonl"

    def bases_path(self, level: int, weight: int) -> Path:
        return self.dir / f"bases_{level}_{weight}.json"

    @property
    def quarantine_path(self) -> Path:
        return self.dir / "quarantine.jsonl"

    def _atomic_write(self, path: Path, text: str) -> None:
        self.dir.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=self.dir, prefix=path.name, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def write(self, level: int, weight: int, orbits: Iterable[Orbitdata]) -> int:
        orbits = list(orbits)
        stamp = _now()
        lines = []
        for orb in orbits:
            for rec in orb.records:
                for p in rec.primes():
                    lines.append(json.dumps({
                        "level": level, "weight": weight, "label": rec.label,
                        "embedding_index": rec.embedding_index, "prime": p,
                        "ap_real": f"{rec.ap[p]:.17e}",
                        "ap_exact": None if rec.ap_exact is None else str(rec.ap_exact[p]),
                        "source": rec.source, "fetched_at": stamp,
                    }, separators=(",", ":")))
        bases = {orb.label: {"dim": orb.dim, "basis": [[str(c) for c in b] for b in orb.basis]} for orb in orbits}
        with self._lock:
            self._atomic_write(self.records_path(level, weight), "".join(x + "\n" for x in lines))
            self._atomic_write(self.bases_path(level, weight), json.dumps({"level": level, "weight": weight, "orbits": bases}))
        return sum(len(o.records) for o in orbits)

    def quarantine(self, entries: Iterable[dict]) -> None:
        entries = list(entries)
        if not entries:
            return
        with self._lock:
            self.dir.mkdir(parents=True, exist_ok=True)
            with open(self.quarantine_path, "a") as fh:
                for e in entries:
                    fh.write(json.dumps({**e, "quarantined_at": _now()}) + "\n")

    def has(self, level: int, weight: int) -> bool:
        return self.records_path(level, weight).exists() and self.bases_path(level, weight).exists()

    def read(self, level: int, weight: int) -> tuple[list[Orbitdata], CacheReadReport] | None:
        rpath, bpath = self.records_path(level, weight), self.bases_path(level, weight)
        if not (rpath.exists() and bpath.exists()):
            return None
        report = CacheReadReport(rpath)
        groups: dict[tuple[str, int], dict] = {}
        bad = []
        with open(rpath) as fh:
            for lineno, line in enumerate(fh, 1):
                report.lines += 1
                try:
                    obj = json.loads(line)
                    _CACHE_LINE_VALIDATOR.validate(obj)
                    if obj["level"] != level or obj["weight"] != weight:
                        raise ValueError("level/weight mismatch")
                    ap = float(obj["ap_real"])
                except (ValueError, jsonschema.ValidationError) as e:
                    report.corrupted.append(lineno)
                    bad.append({"file": rpath.name, "line": lineno, "reason": str(e).splitlines()[0], "content": line.rstrip("\n")[:500]})
                    continue
                g = groups.setdefault((obj["label"], obj["embedding_index"]), {"ap": {}, "exact": {}, "source": obj["source"]})
                g["ap"][obj["prime"]] = ap
                if obj.get("ap_exact") is not None:
                    g["exact"][obj["prime"]] = int(obj["ap_exact"])
        if bad:
            self.quarantine(bad)
        try:
            bases = json.loads(bpath.read_text())["orbits"]
        except (ValueError, KeyError) as e:
            self.quarantine([{"file": bpath.name, "line": 0, "reason": f"unreadable bases file: {e}"}])
            return None
        orbits = []
        for label, info in sorted(bases.items()):
            basis = [[int(c) for c in b] for b in info["basis"]]
            dim = info["dim"]
            recs = []
            for idx in range(dim):
                g = groups.get((label, idx))
                if g is None:
                    continue
                exact = g["exact"] or None
                an = tuple(basis[0]) if dim == 1 else None
                recs.append(NewformRecord(level, weight, label, idx, g["ap"], exact, an, dim, g["source"], "cached"))
            orbits.append(Orbitdata(label, dim, recs, basis))
        return orbits, report

    def entries(self) -> list[tuple[int, int]]:
        out = []
        if not self.dir.exists():
            return out
        for p in sorted(self.dir.glob("newforms_*_*.jsonl")):
            _, n, k = p.stem.split("_")
            out.append((int(n), int(k)))
        return sorted(out)


# ---------------------------------------------------------------------------
# level one, computed locally

@lru_cache(maxsize=32)
def _level_one_orbits(weight: int, ap_max: int) -> tuple:
    d = dim_level_one(weight)
    if d <= 1:
        return ()
    prec = max(ap_max, 2 * weight)
    cusp = [list(x) for x in _miller_ints(weight, prec)[1:]]
    orbits = decompose(cusp, weight, 1)
    primes = primes_upto(ap_max).tolist()
    data = []
    for o in orbits:
        emb = orbit_coefficients(o, primes)
        data.append((o, emb, [o.basis[0][p] for p in primes[:25]]))
    data.sort(key=lambda t: (t[0].dim, t[2]))
    out = []
    for idx, (o, emb, _) in enumerate(data):
        label = f"1.{weight}.a.{chr(97 + idx)}"
        recs = []
        for s, row in enumerate(emb):
            ap = {p: float(x) for p, x in zip(primes, row)}
            exact = {p: int(o.basis[0][p]) for p in primes} if o.dim == 1 else None
            an = tuple(o.basis[0]) if o.dim == 1 else None
            recs.append(NewformRecord(1, weight, label, s, ap, exact, an, o.dim, "local-miller"))
        out.append(Orbitdata(label, o.dim, recs, o.basis))
    return tuple(out)


def level_one_orbits(weight: int, ap_max: int = LEVEL_ONE_AP_MAX) -> list[Orbitdata]:
    check_weight(weight)
    return list(_level_one_orbits(weight, max(ap_max, LEVEL_ONE_AP_MAX)))


# ---------------------------------------------------------------------------
# public fetch and the default source

def _payload(level: int, weight: int, config: RunConfig) -> dict:
    if config.network_allowed:
        return fetch_payload_http(config.db_url, level, weight)
    return load_fixture(config.fixtures_dir, level, weight)


def ingest(level: int, weight: int, config: RunConfig, cache: CoefficientCache | None = None) -> list[Orbitdata]:
    """Fetch, validate and verify; verified orbits are cached, failing records quarantined."""
    _check_space(level, weight)
    cache = cache or CoefficientCache(config.cache_dir)
    if level == 1:
        orbits = level_one_orbits(weight)
    else:
        orbits = parse_payload(_payload(level, weight, config), level, weight)
    good, rejected = [], []
    for orb in orbits:
        problems = verify_orbit(orb)
        if problems:
            rejected += [{"level": level, "weight": weight, "label": orb.label, "reason": p} for p in problems]
        else:
            orb.records = [r.with_status("verified") for r in orb.records]
            good.append(orb)
    cache.quarantine(rejected)
    if rejected:
        bad = sorted({r["label"] for r in rejected})
        # the space is incomplete without the quarantined orbits; cache nothing
        raise IngestionError(f"verification failed for {', '.join(bad)}: {rejected[0]['reason']}", "orbits")
    cache.write(level, weight, good)
    return good


def lmfdb_fetch(level: int, weight: int, config: RunConfig | None = None, refresh: bool = False) -> list[NewformRecord]:
    """All embeddings of the newforms in S_k^new(Gamma0(level)), verified and cached."""
    config = config or RunConfig.from_env()
    return [r for orb in get_orbits(level, weight, config, refresh) for r in orb.records]


def get_orbits(level: int, weight: int, config: RunConfig, refresh: bool = False) -> list[Orbitdata]:
    _check_space(level, weight)
    if dim_cusp_new(weight, level) == 0:
        return []
    cache = CoefficientCache(config.cache_dir)
    if not refresh:
        got = cache.read(level, weight)
        if got is not None:
            orbits, report = got
            if not report.corrupted and sum(len(o.records) for o in orbits) == dim_cusp_new(weight, level):
                return orbits
    return ingest(level, weight, config, cache)


class DefaultCuspSource:
    """Level one computed locally; higher levels through the cache/fixture/database path."""

    def __init__(self, config: RunConfig | None = None, ap_max: int | None = None):
        self.config = config or RunConfig.from_env()
        self.ap_max = ap_max
        self._memo: dict[tuple[int, int], list[Orbitdata]] = {}

    def orbits(self, level: int, weight: int) -> list[Orbitdata]:
        key = (level, weight)
        if key not in self._memo:
            if level == 1:
                self._memo[key] = level_one_orbits(weight, self.ap_max or LEVEL_ONE_AP_MAX)
            else:
                self._memo[key] = get_orbits(level, weight, self.config)
        return self._memo[key]

    def newforms(self, level: int, weight: int, ap_max: int | None = None) -> list[NewformRecord]:
        """Embedded newforms; with ``ap_max`` every record must carry a_p for all p <= ap_max."""
        _check_space(level, weight)
        recs = [r for o in self.orbits(level, weight) for r in o.records]
        if ap_max is not None and recs and max(recs[0].ap) < primes_upto(ap_max)[-1]:
            if level != 1:
                raise DataUnavailable(level, weight, f"a_p stored up to {max(recs[0].ap)}, need {ap_max}")
            self._memo[(level, weight)] = level_one_orbits(weight, int(ap_max))
            recs = [r for o in self.orbits(level, weight) for r in o.records]
        return recs

    def new_cusp_basis(self, level: int, weight: int, prec: int) -> list[QExpansion]:
        _check_space(level, weight)
        out = []
        for orb in self.orbits(level, weight):
            for j, b in enumerate(orb.basis):
                if len(b) - 1 < prec:
                    if level == 1:
                        self._memo[(level, weight)] = level_one_orbits(weight, prec)
                        return self.new_cusp_basis(level, weight, prec)
                    raise DataUnavailable(level, weight, f"exact basis stored to q^{len(b) - 1}, need q^{prec}")
                out.append(from_ints(weight, level, b[: prec + 1], f"{orb.label}[{j}]"))
        return out

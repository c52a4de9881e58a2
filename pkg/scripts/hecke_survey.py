#!/usr/bin/env python3
"""Measure minimal Hecke-span bounds over squarefree levels and compare with the Sage bound.

Usage: scripts/hecke_survey.py [--levels 1-30] [--weights 4,6,8,12] [--out survey.json]
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from heckespan import span
from heckespan.arith import is_squarefree
from heckespan.config import RunConfig
from heckespan.errors import HeckeSpanError
from heckespan.modforms.sources import DefaultCuspSource


def survey(levels, weights, src, slack: int = 10) -> dict:
    rows, findings, missing = [], [], []
    for N in levels:
        for k in weights:
            n_max = max(span.sage_hypothesis_bound(k, N), 2 * N) + slack
            t = time.perf_counter()
            try:
                rep = span.minimal_hecke_bound(k, N, n_max, src)
            except HeckeSpanError as e:
                missing.append({"level": N, "weight": k, "reason": str(e)})
                continue
            d = rep.to_dict()
            d.pop("rank_trace")
            d["seconds"] = round(time.perf_counter() - t, 3)
            rows.append(d)
            findings += [{"level": N, "weight": k, "finding": f} for f in rep.findings]
    return {
        "schema": "heckespan.survey/1",
        "levels": list(levels),
        "weights": list(weights),
        "rows": rows,
        "findings": findings,
        "unavailable": missing,
        "violations": sum(1 for r in rows if r["within_sage_bound"] is False),
    }


def _range(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        a, _, b = part.partition("-")
        out += range(int(a), int(b or a) + 1)
    return out


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--levels", default="1-30", help="squarefree members are kept, e.g. 1-30 or 11,13")
    ap.add_argument("--weights", default="4,6,8,12")
    ap.add_argument("--out", help="write JSON here instead of stdout")
    ap.add_argument("--offline", action="store_true", help="fixtures and cache only")
    args = ap.parse_args(argv)
    cfg = RunConfig.from_env(offline=True) if args.offline else RunConfig.from_env()
    rep = survey([n for n in _range(args.levels) if is_squarefree(n)], _range(args.weights), DefaultCuspSource(cfg))
    text = json.dumps(rep, indent=2, sort_keys=True)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    for r in rep["rows"]:
        print(f"N={r['level']:>2} k={r['weight']:>2} dim={r['dim']:>3} minimal={r['minimal_n']} "
              f"with_a0={r['minimal_n_with_constant']} sage={r['sage_hypothesis_bound']} {'ok' if r['within_sage_bound'] else 'FINDING'} ({r['seconds']}s)",
              file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""Time the exact determinant-square sum for a few specs over growing X.

Usage: scripts/benchmark_detsum.py [--xmax 50,100,200] [--specs 4.1,12.1,4.5,12.3] [--repeat 3]

Timings depend on the machine; the printed values of the sums are exact and repeatable.
"""

from __future__ import annotations

import argparse
import json
import sys

from heckespan import detsum
from heckespan.config import RunConfig
from heckespan.errors import HeckeSpanError
from heckespan.modforms.sources import DefaultCuspSource


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--xmax", default="50,100,200")
    ap.add_argument("--specs", default="4.1,12.1,4.5,12.3", help="comma list of K.M")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    src = DefaultCuspSource(RunConfig.from_env())
    rows = []
    for sel in args.specs.split(","):
        k, M = map(int, sel.split("."))
        spec = detsum.block_spec(k, M, src)
        for X in map(float, args.xmax.split(",")):
            try:
                b = detsum.benchmark(spec, X, repeat=args.repeat)
            except HeckeSpanError as e:
                print(f"k={k} M={M} X={X:g}: skipped ({e})", file=sys.stderr)
                continue
            rows.append({"k": k, "M": M, **b})
            print(f"k={k:>2} M={M:>2} m={spec.m} X={X:>6g} dets={b['determinants']:>8} "
                  f"best={b['seconds']:.4f}s rate={b['determinants_per_second']:.0f}/s", file=sys.stderr)
    print(json.dumps({"schema": "heckespan.benchmark/1", "rows": rows}, indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())

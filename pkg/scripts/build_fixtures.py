#!/usr/bin/env python3
from __future__ import annotations

import argparse
import json
import sys
from datetime import UTC, datetime
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent
if str(REPO_ROOT) not in sys.path:
    sys.path.insert(0, str(REPO_ROOT))

from tests.oracles import H0_ORACLE_PATH, H0_ORACLE_POINTS, h0_bounds  # noqa: E402


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Regenerate the brute-force oracle fixtures used by the test suite.")
    parser.add_argument("--out", default=str(H0_ORACLE_PATH), help="Where to write the x1^4 + x2^4 oracle")
    parser.add_argument("--points", type=int, default=H0_ORACLE_POINTS, help="Circle points for the moment means")
    parser.add_argument("--check", action="store_true", help="Compare against the stored file instead of writing")
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    args = parse_args(argv)
    out = Path(args.out)
    mu, big_m = h0_bounds(args.points)

    if args.check:
        if not out.exists():
            print(f"error: no fixture at {out}", file=sys.stderr)
            return 1
        stored = json.loads(out.read_text())
        drift = max(abs(stored["mu"] - mu), abs(stored["M"] - big_m))
        print(f"stored: mu={stored['mu']!r} M={stored['M']!r}")
        print(f"fresh:  mu={mu!r} M={big_m!r}")
        print(f"drift:  {drift:.3e}")
        return 0 if drift <= 1e-9 else 2

    payload = {
        "provenance": {
            "symbol": "x1^4 + x2^4",
            "method": (
                "nested uniform scans, no refinement: for each of `points` xi angles in [0, pi) the mean of "
                "(xi.omega)^4 / |omega|_{4/3}^4 over `points` omega angles in [0, 2 pi), divided by H(xi); "
                "mu and M are the grid min and max"
            ),
            "points": args.points,
            "generated": datetime.now(UTC).isoformat(),
            "script": "scripts/build_fixtures.py",
        },
        "mu": mu,
        "M": big_m,
    }
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out}: mu={mu!r} M={big_m!r}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

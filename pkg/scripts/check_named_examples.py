#!/usr/bin/env python3
"""Re-run every built-in named example and compare against its recorded
expectations.  Exits nonzero if any example disagrees.

    python3 scripts/check_named_examples.py
    python3 scripts/check_named_examples.py --verbose
"""

import argparse
import sys

from traceforms.k3hk import evaluate_famous, famous_examples


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--verbose", action="store_true",
                    help="print the full result dict for each example")
    args = ap.parse_args(argv)

    bad = 0
    for key in sorted(famous_examples()):
        out = evaluate_famous(key)
        mark = "ok " if out["matches"] else "FAIL"
        print(f"[{mark}] {key}: {out['summary']}")
        if args.verbose or not out["matches"]:
            for k, v in sorted(out["expected"].items()):
                got = out["results"].get(k)
                print(f"       {k}: expected {v!r}, got {got!r}")
        bad += 0 if out["matches"] else 1
    print(f"\n{len(famous_examples()) - bad} matched, {bad} mismatched")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())

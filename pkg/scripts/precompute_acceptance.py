#!/usr/bin/env python3
"""Compute acceptance-scenario results into the on-disk cache.

Usage:
    python3 scripts/precompute_acceptance.py JOB [JOB ...]
    python3 scripts/precompute_acceptance.py --all
    python3 scripts/precompute_acceptance.py --list

Jobs already present in the cache are skipped.  Intended to run in the
background ahead of `pytest tests/test_acceptance.py`.
"""

import argparse
import importlib.util
import pathlib
import sys
import time

ROOT = pathlib.Path(__file__).resolve().parents[1]


def _load_lib():
    spec = importlib.util.spec_from_file_location(
        "acceptance_lib", ROOT / "tests" / "acceptance_lib.py")
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("jobs", nargs="*", help="job names (see --list)")
    ap.add_argument("--all", action="store_true", help="run every known job")
    ap.add_argument("--list", action="store_true", help="print job names")
    args = ap.parse_args(argv)

    lib = _load_lib()
    if args.list:
        for name in lib.JOBS:
            mark = "cached" if lib.is_cached(name) else "-"
            print(f"{name:40s} {mark}")
        return 0

    names = list(lib.JOBS) if args.all else args.jobs
    if not names:
        ap.error("no jobs given (use --all or --list)")
    unknown = [n for n in names if n not in lib.JOBS]
    if unknown:
        ap.error(f"unknown jobs: {', '.join(unknown)}")

    for name in names:
        if lib.is_cached(name):
            print(f"[skip] {name} (cached)", flush=True)
            continue
        t0 = time.perf_counter()
        print(f"[run ] {name} ...", flush=True)
        try:
            out = lib.ensure(name)
        except Exception as exc:
            print(f"[FAIL] {name}: {type(exc).__name__}: {exc}", flush=True)
            continue
        dt = time.perf_counter() - t0
        da = out["delta_a"]
        last = da[-1] if da.size else float("nan")
        print(f"[done] {name}: {dt/60:.1f} min, cycles={da.size}, "
              f"delta_a_end={last:.4g}, failure={out['meta']['failure_cycle']}",
              flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())

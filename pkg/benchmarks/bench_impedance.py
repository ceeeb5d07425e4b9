#!/usr/bin/env python3
"""Assembly-time comparison of the two coupling-integral kernel paths.

The quadrature kernels bind their implementation at import time from the
RISOPT_NO_NUMBA environment variable, so a single process can only time
one path.  Run without flags to get both: the script re-invokes itself
with the flag flipped and prints the two walls side by side.
"""

import argparse
import json
import os
import pathlib
import subprocess
import sys
import time

SCENARIO = pathlib.Path(__file__).resolve().parents[1] / "scenarios" / "reference_network.json"


def measure(sides):
    from risopt import assemble_impedance_set, load_scenario
    from risopt._kernels import USE_NUMBA
    from risopt.impedance import _assemble_cached
    from risopt.scenario import build_groups

    sc = load_scenario(SCENARIO)

    def assemble(side):
        scn = sc.replace(ris_elements=side * side, ris_spacing_m=sc.wavelength / side)
        groups = tuple(build_groups(scn))
        _assemble_cached.cache_clear()
        t0 = time.perf_counter()
        assemble_impedance_set(
            groups,
            scn.wavelength,
            generator_impedance=scn.generator_impedance_ohm,
            load_impedance=scn.load_impedance_ohm,
        )
        return time.perf_counter() - t0

    assemble(2)  # warm the jit cache / numpy allocator before timing
    return {
        "kernel": "numba" if USE_NUMBA else "numpy",
        "timings": [[side * side, assemble(side)] for side in sides],
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sides", default="4,8,16", help="comma list of grid sides")
    parser.add_argument("--single", action="store_true", help="time only this process's path")
    args = parser.parse_args(argv)
    sides = [int(s) for s in args.sides.split(",")]

    mine = measure(sides)
    if args.single:
        print(json.dumps(mine))
        return 0

    env = dict(os.environ)
    env["RISOPT_NO_NUMBA"] = "0" if mine["kernel"] == "numpy" else "1"
    child = subprocess.run(
        [sys.executable, __file__, "--single", "--sides", args.sides],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    other = json.loads(child.stdout.strip().splitlines()[-1])
    by_kernel = {r["kernel"]: dict(map(tuple, r["timings"])) for r in (mine, other)}

    print(f"{'elements':>10} {'numba [s]':>12} {'numpy [s]':>12} {'speedup':>9}")
    for side in sides:
        p = side * side
        tn, tp = by_kernel["numba"][p], by_kernel["numpy"][p]
        print(f"{p:>10} {tn:>12.3f} {tp:>12.3f} {tp / tn:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

"""Reproduction workflows and their CSV/JSON artifacts.

Three artifact families: per-iteration convergence traces with the
coupling-aware and coupling-unaware optimizers run side by side, sum-rate
sweeps over element density and antenna count, and re-radiation patterns
of the tuned surfaces.  Numeric cells are written with round-trip float
repr so a rerun of the same scenario is byte-identical.
"""

from __future__ import annotations

import csv
import json
import os
import pathlib
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import channel_farfield_bundle
from .impedance import assemble_impedance_set
from .optimizer import array_factor_db, bcd_optimize, ris_excitation
from .scenario import Scenario, build_groups, ris_element_positions, scenario_hash

CSV_EOL = "\r\n"
MODES = ("mca", "mcu")
ARTIFACT_KINDS = ("convergence", "sweep", "af")


# ---------------------------------------------------------------------------
# scenario -> channel pieces

def bundle_for_scenario(sc: Scenario):
    groups = tuple(build_groups(sc))
    imp = assemble_impedance_set(
        groups,
        sc.wavelength,
        generator_impedance=sc.generator_impedance_ohm,
        load_impedance=sc.load_impedance_ohm,
    )
    return channel_farfield_bundle(imp, sc)


# ---------------------------------------------------------------------------
# CSV plumbing

def _fmt(x) -> str:
    return repr(float(x))


def _write_csv(path, kind: str, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# risopt-{kind} v1{CSV_EOL}")
        writer = csv.writer(f, lineterminator=CSV_EOL)
        writer.writerow(header)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# convergence traces

def run_convergence(sc: Scenario, curvature: str = "re") -> dict:
    """Optimize the same physical setup in both modes; keys follow MODES order."""
    bundle = bundle_for_scenario(sc)
    return {mode: bcd_optimize(bundle, sc.replace(mode=mode), curvature) for mode in MODES}


def trace_header(n_ris: int):
    return (
        ["iteration", "mode", "sum_rate_bits", "sum_rate_internal_bits", "wmse"]
        + [f"mu_{k + 1}" for k in range(n_ris)]
        + [f"delta_norm_{k + 1}" for k in range(n_ris)]
    )


def write_trace_csv(path, results: dict, n_ris: int) -> None:
    rows = []
    for result in results.values():
        for rec in result.trace:
            rows.append(
                [str(rec.iteration), rec.mode, _fmt(rec.sum_rate_bits),
                 _fmt(rec.sum_rate_internal_bits), _fmt(rec.wmse)]
                + [_fmt(m) for m in rec.mu]
                + [_fmt(d) for d in rec.delta_norm]
            )
    _write_csv(path, "trace", trace_header(n_ris), rows)


# ---------------------------------------------------------------------------
# density / antenna-count sweep

@dataclass(frozen=True)
class SweepCell:
    antennas: int
    spacing_m: float
    elements: int
    mode: str
    sum_rate_bits: float


def sweep_scenarios(sc: Scenario, antenna_counts, side_counts):
    """Square surfaces of fixed aperture: side elements spaced wavelength/side."""
    subs = []
    for n_ant in antenna_counts:
        for side in side_counts:
            subs.append(
                sc.replace(
                    tx_antennas=int(n_ant),
                    rx_antennas=int(n_ant),
                    ris_elements=int(side) * int(side),
                    ris_spacing_m=sc.wavelength / int(side),
                )
            )
    return subs


def run_antenna_sweep(
    sc: Scenario,
    antenna_counts=(2,),
    side_counts=(2, 4, 8, 16),
    curvature: str = "re",
    max_workers=None,
):
    subs = sweep_scenarios(sc, antenna_counts, side_counts)

    def one_cell(sub):
        bundle = bundle_for_scenario(sub)
        cells = []
        for mode in MODES:
            res = bcd_optimize(bundle, sub.replace(mode=mode), curvature)
            cells.append(
                SweepCell(
                    antennas=sub.tx_antennas,
                    spacing_m=sub.ris_spacing_m,
                    elements=sub.ris_elements,
                    mode=mode,
                    sum_rate_bits=res.sum_rate_bits,
                )
            )
        return cells

    workers = max_workers or min(len(subs), os.cpu_count() or 1)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        nested = list(pool.map(one_cell, subs))
    return [cell for group in nested for cell in group]


def write_sweep_csv(path, cells) -> None:
    rows = [
        [str(c.antennas), _fmt(c.spacing_m), str(c.elements), c.mode, _fmt(c.sum_rate_bits)]
        for c in cells
    ]
    _write_csv(path, "sweep", ["L", "d", "P", "mode", "sum_rate_bits"], rows)


# ---------------------------------------------------------------------------
# re-radiation patterns

def run_array_factor(sc: Scenario, curvature: str = "re", n_angles: int = 721):
    """Optimize, then sweep each surface's pattern against every transmitter."""
    bundle = bundle_for_scenario(sc)
    result = bcd_optimize(bundle, sc, curvature)
    thetas = np.linspace(-np.pi / 2, np.pi / 2, n_angles)
    rows = []
    for k in range(sc.n_ris):
        positions = ris_element_positions(sc, k)
        for j in range(sc.n_pairs):
            excitation = ris_excitation(bundle, result.ris, result.precoders.v, k, j)
            pattern = array_factor_db(positions, sc.wavelength, excitation, thetas)
            link = f"ris{k}:tx{j}"
            rows.extend((float(t), float(db), link) for t, db in zip(thetas, pattern))
    return result, rows


def write_af_csv(path, rows) -> None:
    _write_csv(
        path,
        "af",
        ["theta_rad", "af_db", "link_id"],
        [[_fmt(t), _fmt(db), link] for t, db, link in rows],
    )


# ---------------------------------------------------------------------------
# one-shot driver

def run_all(
    sc: Scenario,
    out_dir,
    artifacts=ARTIFACT_KINDS,
    curvature: str = "re",
    sweep_antennas=(2,),
    sweep_sides=(2, 4, 8, 16),
    n_angles: int = 721,
    max_workers=None,
) -> dict:
    for kind in artifacts:
        if kind not in ARTIFACT_KINDS:
            raise ValueError(f"unknown artifact kind {kind!r}; expected one of {ARTIFACT_KINDS}")
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    written = []
    summary = {}

    if "convergence" in artifacts:
        results = run_convergence(sc, curvature)
        write_trace_csv(out / "trace.csv", results, sc.n_ris)
        written.append("trace.csv")
        summary["final_sum_rate_bits"] = {m: r.sum_rate_bits for m, r in results.items()}

    if "sweep" in artifacts:
        cells = run_antenna_sweep(
            sc, sweep_antennas, sweep_sides, curvature, max_workers=max_workers
        )
        write_sweep_csv(out / "sweep.csv", cells)
        written.append("sweep.csv")
        summary["sweep_cells"] = len(cells)

    if "af" in artifacts:
        _, rows = run_array_factor(sc, curvature, n_angles)
        write_af_csv(out / "af.csv", rows)
        written.append("af.csv")
        summary["af_rows"] = len(rows)

    meta = {
        "scenario_hash": scenario_hash(sc),
        "seed": sc.seed,
        "mode": sc.mode,
        "curvature": curvature,
        "iterations": sc.iterations,
        "artifacts": written,
        "summary": summary,
        "wall_time_s": time.perf_counter() - t0,
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    }
    (out / "run_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta

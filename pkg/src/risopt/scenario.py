"""Scenario configuration: JSON loading, validation, defaults, geometry.

A scenario pins down everything a run needs: carrier frequency, the
transmitter/receiver pair positions, surface placement and density, power
budgets, and optimizer knobs.  Unknown JSON keys are rejected so typos
cannot silently fall back to defaults.  All lengths are meters, powers
dBm, impedances ohms.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .errors import ScenarioError
from .geometry import RadiatorGroup, linear_array_group, planar_grid_group

C0 = 299792458.0

MODES = ("mca", "mcu")
RIS_INITS = ("random", "zeros", "resonant")

_REQUIRED_KEYS = ("frequency_hz", "pairs")
_OPTIONAL_KEYS = (
    "ris_centers",
    "tx_antennas",
    "rx_antennas",
    "ris_elements",
    "ris_spacing_m",
    "r0_ohm",
    "tx_power_dbm",
    "noise_power_dbm",
    "weights",
    "nlos",
    "mode",
    "seed",
    "iterations",
    "trust_delta",
    "ris_init",
    "antenna_spacing_m",
    "antenna_length_m",
    "antenna_radius_m",
    "ris_element_length_m",
    "ris_element_radius_m",
    "generator_impedance_ohm",
    "load_impedance_ohm",
)


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError(f"power must be positive to express in dBm, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class Scenario:
    frequency_hz: float
    pairs: tuple  # ((tx_xyz, rx_xyz), ...)
    ris_centers: tuple
    tx_antennas: int
    rx_antennas: int
    ris_elements: int
    ris_spacing_m: float
    r0_ohm: float
    tx_power_dbm: tuple
    noise_power_dbm: tuple
    weights: tuple
    nlos: bool
    mode: str
    seed: int
    iterations: int
    trust_delta: float
    ris_init: str
    antenna_spacing_m: float
    antenna_length_m: float
    antenna_radius_m: float
    ris_element_length_m: float
    ris_element_radius_m: float
    generator_impedance_ohm: complex
    load_impedance_ohm: complex

    @property
    def wavelength(self) -> float:
        return C0 / self.frequency_hz

    @property
    def n_pairs(self) -> int:
        return len(self.pairs)

    @property
    def n_ris(self) -> int:
        return len(self.ris_centers)

    @property
    def tx_power_w(self) -> tuple:
        return tuple(dbm_to_watts(p) for p in self.tx_power_dbm)

    @property
    def noise_power_w(self) -> tuple:
        return tuple(dbm_to_watts(p) for p in self.noise_power_dbm)

    def replace(self, **kwargs) -> "Scenario":
        import dataclasses

        return dataclasses.replace(self, **kwargs)


def _fail(path: str, message: str):
    raise ScenarioError(f"{path}: {message}")


def _as_xyz(value, path):
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        _fail(path, f"expected [x, y, z], got {value!r}")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        _fail(path, f"coordinates must be numbers, got {value!r}")


def _as_positive(value, path, kind=float):
    try:
        out = kind(value)
    except (TypeError, ValueError):
        _fail(path, f"expected a number, got {value!r}")
    if isinstance(value, bool) or out <= 0:
        _fail(path, f"must be positive, got {value!r}")
    return out


def _as_count(value, path, minimum=1):
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(path, f"expected an integer, got {value!r}")
    if value < minimum:
        _fail(path, f"must be >= {minimum}, got {value}")
    return value


def _as_impedance(value, path) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        z = complex(float(value), 0.0)
    elif isinstance(value, (list, tuple)) and len(value) == 2:
        try:
            z = complex(float(value[0]), float(value[1]))
        except (TypeError, ValueError):
            _fail(path, f"expected a number or [re, im], got {value!r}")
    else:
        _fail(path, f"expected a number or [re, im], got {value!r}")
    if z.real <= 0:
        _fail(path, f"real part must be positive, got {value!r}")
    return z


def _broadcast_floats(value, n, path):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return tuple(float(value) for _ in range(n))
    if isinstance(value, (list, tuple)):
        if len(value) != n:
            _fail(path, f"expected {n} entries, got {len(value)}")
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            _fail(path, f"entries must be numbers, got {value!r}")
    _fail(path, f"expected a number or a list of {n} numbers, got {value!r}")


def load_scenario(source) -> Scenario:
    """Build a validated Scenario from a JSON file path, JSON text, or dict.

    Unknown keys are rejected with their path; omitted optional keys pick
    up frequency-derived defaults.
    """
    if isinstance(source, dict):
        data = dict(source)
    else:
        text = None
        try:
            with open(source, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError:
            if isinstance(source, str) and source.lstrip().startswith("{"):
                text = source
            else:
                raise ScenarioError(f"cannot read scenario file {source!r}")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ScenarioError("scenario root must be a JSON object")

    known = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    for key in data:
        if key not in known:
            _fail(f"$.{key}", "unknown key")
    for key in _REQUIRED_KEYS:
        if key not in data:
            _fail(f"$.{key}", "required key missing")

    frequency = _as_positive(data["frequency_hz"], "$.frequency_hz")
    lam = C0 / frequency

    raw_pairs = data["pairs"]
    if not isinstance(raw_pairs, list) or not raw_pairs:
        _fail("$.pairs", "expected a non-empty list of {tx, rx} objects")
    pairs = []
    for idx, entry in enumerate(raw_pairs):
        if not isinstance(entry, dict) or set(entry) != {"tx", "rx"}:
            _fail(f"$.pairs[{idx}]", f"expected {{'tx': xyz, 'rx': xyz}}, got {entry!r}")
        pairs.append(
            (_as_xyz(entry["tx"], f"$.pairs[{idx}].tx"), _as_xyz(entry["rx"], f"$.pairs[{idx}].rx"))
        )
    n_pairs = len(pairs)

    raw_ris = data.get("ris_centers", [])
    if not isinstance(raw_ris, list):
        _fail("$.ris_centers", "expected a list of [x, y, z]")
    ris_centers = tuple(
        _as_xyz(c, f"$.ris_centers[{i}]") for i, c in enumerate(raw_ris)
    )

    tx_antennas = _as_count(data.get("tx_antennas", 2), "$.tx_antennas")
    rx_antennas = _as_count(data.get("rx_antennas", 2), "$.rx_antennas")
    if rx_antennas > tx_antennas:
        _fail("$.rx_antennas", f"receive streams ({rx_antennas}) cannot exceed transmit antennas ({tx_antennas})")

    ris_elements = _as_count(data.get("ris_elements", 16), "$.ris_elements")
    side = math.isqrt(ris_elements)
    if side * side != ris_elements:
        _fail("$.ris_elements", f"must be a perfect square for the planar grid, got {ris_elements}")

    ris_spacing = data.get("ris_spacing_m")
    if ris_spacing is None:
        ris_spacing = lam / side  # side*spacing covers a wavelength-sized aperture
    else:
        ris_spacing = _as_positive(ris_spacing, "$.ris_spacing_m")

    weights = data.get("weights")
    if weights is None:
        weights = tuple(1.0 for _ in range(n_pairs))
    else:
        weights = _broadcast_floats(weights, n_pairs, "$.weights")
        if any(w < 0 for w in weights):
            _fail("$.weights", f"weights must be non-negative, got {weights}")
        if sum(weights) <= 0:
            _fail("$.weights", "at least one weight must be positive")

    mode = data.get("mode", "mca")
    if mode not in MODES:
        _fail("$.mode", f"expected one of {MODES}, got {mode!r}")
    ris_init = data.get("ris_init", "random")
    if ris_init not in RIS_INITS:
        _fail("$.ris_init", f"expected one of {RIS_INITS}, got {ris_init!r}")

    nlos = data.get("nlos", True)
    if not isinstance(nlos, bool):
        _fail("$.nlos", f"expected true/false, got {nlos!r}")

    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        _fail("$.seed", f"expected a non-negative integer, got {seed!r}")

    iterations = data.get("iterations", 100)
    if isinstance(iterations, bool) or not isinstance(iterations, int) or iterations < 0:
        _fail("$.iterations", f"expected a non-negative integer, got {iterations!r}")

    return Scenario(
        frequency_hz=frequency,
        pairs=tuple(pairs),
        ris_centers=ris_centers,
        tx_antennas=tx_antennas,
        rx_antennas=rx_antennas,
        ris_elements=ris_elements,
        ris_spacing_m=float(ris_spacing),
        r0_ohm=_as_positive(data.get("r0_ohm", 0.2), "$.r0_ohm"),
        tx_power_dbm=_broadcast_floats(data.get("tx_power_dbm", 20.0), n_pairs, "$.tx_power_dbm"),
        noise_power_dbm=_broadcast_floats(
            data.get("noise_power_dbm", -120.0), n_pairs, "$.noise_power_dbm"
        ),
        weights=weights,
        nlos=nlos,
        mode=mode,
        seed=seed,
        iterations=iterations,
        trust_delta=_as_positive(data.get("trust_delta", 0.01), "$.trust_delta"),
        ris_init=ris_init,
        antenna_spacing_m=_as_positive(data.get("antenna_spacing_m", lam / 2), "$.antenna_spacing_m"),
        antenna_length_m=_as_positive(data.get("antenna_length_m", lam / 2), "$.antenna_length_m"),
        antenna_radius_m=_as_positive(data.get("antenna_radius_m", lam / 500), "$.antenna_radius_m"),
        ris_element_length_m=_as_positive(
            data.get("ris_element_length_m", lam / 32), "$.ris_element_length_m"
        ),
        ris_element_radius_m=_as_positive(
            data.get("ris_element_radius_m", lam / 500), "$.ris_element_radius_m"
        ),
        generator_impedance_ohm=_as_impedance(
            data.get("generator_impedance_ohm", 50.0), "$.generator_impedance_ohm"
        ),
        load_impedance_ohm=_as_impedance(
            data.get("load_impedance_ohm", 50.0), "$.load_impedance_ohm"
        ),
    )


def scenario_to_dict(sc: Scenario) -> dict:
    """Resolved scenario as a canonical JSON-serializable dict."""
    return {
        "frequency_hz": sc.frequency_hz,
        "pairs": [{"tx": list(tx), "rx": list(rx)} for tx, rx in sc.pairs],
        "ris_centers": [list(c) for c in sc.ris_centers],
        "tx_antennas": sc.tx_antennas,
        "rx_antennas": sc.rx_antennas,
        "ris_elements": sc.ris_elements,
        "ris_spacing_m": sc.ris_spacing_m,
        "r0_ohm": sc.r0_ohm,
        "tx_power_dbm": list(sc.tx_power_dbm),
        "noise_power_dbm": list(sc.noise_power_dbm),
        "weights": list(sc.weights),
        "nlos": sc.nlos,
        "mode": sc.mode,
        "seed": sc.seed,
        "iterations": sc.iterations,
        "trust_delta": sc.trust_delta,
        "ris_init": sc.ris_init,
        "antenna_spacing_m": sc.antenna_spacing_m,
        "antenna_length_m": sc.antenna_length_m,
        "antenna_radius_m": sc.antenna_radius_m,
        "ris_element_length_m": sc.ris_element_length_m,
        "ris_element_radius_m": sc.ris_element_radius_m,
        "generator_impedance_ohm": [sc.generator_impedance_ohm.real, sc.generator_impedance_ohm.imag],
        "load_impedance_ohm": [sc.load_impedance_ohm.real, sc.load_impedance_ohm.imag],
    }


def scenario_hash(sc: Scenario) -> str:
    """Hash of the resolved scenario; insensitive to JSON key order."""
    canonical = json.dumps(scenario_to_dict(sc), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_groups(sc: Scenario) -> list[RadiatorGroup]:
    """Instantiate all radiator groups of a scenario.

    Transmit/receive arrays are z-oriented wires on a y-axis line through
    their stated centers; each surface is a square z-oriented grid spanning
    the x = const plane through its center.
    """
    groups = []
    for j, (tx, _) in enumerate(sc.pairs):
        groups.append(
            linear_array_group(
                "transmitter",
                j,
                tx,
                sc.tx_antennas,
                sc.antenna_spacing_m,
                sc.antenna_length_m,
                sc.antenna_radius_m,
            )
        )
    for i, (_, rx) in enumerate(sc.pairs):
        groups.append(
            linear_array_group(
                "receiver",
                i,
                rx,
                sc.rx_antennas,
                sc.antenna_spacing_m,
                sc.antenna_length_m,
                sc.antenna_radius_m,
            )
        )
    side = math.isqrt(sc.ris_elements)
    for k, center in enumerate(sc.ris_centers):
        groups.append(
            planar_grid_group(
                "ris",
                k,
                center,
                side,
                sc.ris_spacing_m,
                sc.ris_element_length_m,
                sc.ris_element_radius_m,
            )
        )
    return groups


def ris_element_positions(sc: Scenario, k: int):
    """Element centers of surface k, ordered as its impedance-block ports."""
    import numpy as np

    side = math.isqrt(sc.ris_elements)
    group = planar_grid_group(
        "ris",
        k,
        sc.ris_centers[k],
        side,
        sc.ris_spacing_m,
        sc.ris_element_length_m,
        sc.ris_element_radius_m,
    )
    return np.array([d.center for d in group.dipoles])

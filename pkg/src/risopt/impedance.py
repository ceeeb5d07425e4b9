"""Mutual-impedance computation between thin-wire dipole groups.

Impedances follow the induced-EMF construction: the field of a sinusoidal
current on one wire is integrated along the other wire against its own
sinusoidal current, then referred to the feed-point currents.  Self terms
evaluate the field on the wire surface (offset = radius).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType

import numpy as np

from . import _kernels
from .errors import GeometryError, NumericalError
from .geometry import DipoleGeometry, RadiatorGroup

GroupKey = tuple[str, int]

PARALLEL_TOL = 1e-12
# feed current sin(k h) below this means the feed sits on a current node and
# the terminal referral is ill-defined
FEED_CURRENT_FLOOR = 1e-9

DEFAULT_RTOL = 1e-8


def _check_wavelength(wavelength: float) -> float:
    if not (wavelength > 0.0) or not math.isfinite(wavelength):
        raise ValueError(f"wavelength must be positive and finite, got {wavelength}")
    return float(wavelength)


def _feed_sine(kw: float, half_length: float) -> float:
    s = math.sin(kw * half_length)
    if abs(s) < FEED_CURRENT_FLOOR:
        raise GeometryError(
            f"feed current vanishes for length {2 * half_length!r} at this "
            "wavelength; terminal impedance is undefined"
        )
    return s


def _dipole_sort_key(d: DipoleGeometry):
    return (d.center, d.length, d.radius, d.axis)


def _check_overlap(d1: DipoleGeometry, d2: DipoleGeometry) -> None:
    if d1 == d2:
        return  # same dipole: self-impedance branch
    dot = sum(a * b for a, b in zip(d1.axis, d2.axis))
    if abs(abs(dot) - 1.0) < PARALLEL_TOL:
        dist = math.dist(d1.center, d2.center)
        if dist < 2.0 * max(d1.radius, d2.radius):
            raise GeometryError(
                f"parallel wires overlap: center distance {dist!r} < "
                f"2 * radius {max(d1.radius, d2.radius)!r}"
            )


def dipole_mutual_impedance(
    d1: DipoleGeometry,
    d2: DipoleGeometry,
    wavelength: float,
    rtol: float = DEFAULT_RTOL,
) -> complex:
    """Mutual (or self) impedance between two wire dipoles, in ohms.

    Swapping the arguments returns the identical value: the coupling
    integral is reciprocal, and the pair is evaluated in a canonical order
    so both call directions share one quadrature.

    Raises GeometryError for overlapping parallel wires and ValueError for
    a non-positive wavelength.
    """
    wavelength = _check_wavelength(wavelength)
    _check_overlap(d1, d2)
    if _dipole_sort_key(d2) < _dipole_sort_key(d1):
        d1, d2 = d2, d1
    kw = 2.0 * math.pi / wavelength
    s1 = _feed_sine(kw, d1.half_length)
    s2 = _feed_sine(kw, d2.half_length)
    rel = np.array(d2.center, dtype=float) - np.array(d1.center, dtype=float)
    raw = _kernels.coupling_integral(
        rel,
        np.array(d1.axis, dtype=float),
        np.array(d2.axis, dtype=float),
        d1.half_length,
        d2.half_length,
        d1.radius,
        kw,
        rtol=rtol,
    )
    return -raw / (s1 * s2)


# ---------------------------------------------------------------------------
# block assembly

@dataclass(frozen=True)
class ImpedanceSet:
    """All pairwise impedance blocks between radiator groups.

    blocks[(x, y)] holds the |x| x |y| coupling matrix from group x ports to
    group y ports; blocks[(y, x)] is its transpose by reciprocity.  The
    generator and load impedances are scalar per-port values expanded to
    diagonal matrices on demand.  Instances are immutable; arrays are
    read-only views.
    """

    blocks: MappingProxyType
    group_sizes: MappingProxyType
    wavelength: float
    generator_impedance: complex
    load_impedance: complex

    def block(self, x: GroupKey, y: GroupKey) -> np.ndarray:
        return self.blocks[(x, y)]

    def generator_matrix(self, key: GroupKey) -> np.ndarray:
        return self.generator_impedance * np.eye(self.group_sizes[key], dtype=complex)

    def load_matrix(self, key: GroupKey) -> np.ndarray:
        return self.load_impedance * np.eye(self.group_sizes[key], dtype=complex)


def _group_arrays(g: RadiatorGroup):
    return g.centers(), g.axes(), g.half_lengths(), g.radii()


def _block_overlap_check(gx: RadiatorGroup, gy: RadiatorGroup) -> None:
    same = gx.key == gy.key
    ux, uy = gx.axes(), gy.axes()
    cx, cy = gx.centers(), gy.centers()
    parallel = np.abs(np.abs(ux @ uy.T) - 1.0) < PARALLEL_TOL
    dist = np.linalg.norm(cx[:, None, :] - cy[None, :, :], axis=2)
    rmax = np.maximum(gx.radii()[:, None], gy.radii()[None, :])
    bad = parallel & (dist < 2.0 * rmax)
    if same:
        np.fill_diagonal(bad, False)
    if bad.any():
        p, q = np.argwhere(bad)[0]
        raise GeometryError(
            f"overlapping parallel wires between groups {gx.key} and {gy.key}: "
            f"elements ({int(p)}, {int(q)}) at center distance {dist[p, q]!r}"
        )


def _assemble_block(gx: RadiatorGroup, gy: RadiatorGroup, kw: float, rtol: float) -> np.ndarray:
    _block_overlap_check(gx, gy)
    cx, ux, hx, ax = _group_arrays(gx)
    cy, uy, hy, _ = _group_arrays(gy)
    raw = _kernels.coupling_block(
        cx, ux, hx, ax, cy, uy, hy, kw, rtol=rtol, same_group=(gx.key == gy.key)
    )
    sx = np.array([_feed_sine(kw, h) for h in hx])
    sy = np.array([_feed_sine(kw, h) for h in hy])
    return -raw / (sx[:, None] * sy[None, :])


@lru_cache(maxsize=8)
def _assemble_cached(
    groups: tuple[RadiatorGroup, ...],
    wavelength: float,
    generator_impedance: complex,
    load_impedance: complex,
    rtol: float,
) -> ImpedanceSet:
    kw = 2.0 * math.pi / wavelength
    keys = [g.key for g in groups]
    if len(set(keys)) != len(keys):
        raise GeometryError(f"duplicate group keys in {keys}")

    blocks: dict[tuple[GroupKey, GroupKey], np.ndarray] = {}
    ordered = sorted(groups, key=lambda g: g.key)
    for a, gx in enumerate(ordered):
        for gy in ordered[a:]:
            mat = _assemble_block(gx, gy, kw, rtol)
            mat.flags.writeable = False
            blocks[(gx.key, gy.key)] = mat
            if gx.key != gy.key:
                tr = np.ascontiguousarray(mat.T)
                tr.flags.writeable = False
                blocks[(gy.key, gx.key)] = tr

    for g in ordered:
        diag = np.diag(blocks[(g.key, g.key)])
        if not np.all(diag.real > 0.0):
            raise NumericalError(
                f"self block of group {g.key} has a non-positive radiation "
                f"resistance on the diagonal (min {diag.real.min()!r})"
            )

    return ImpedanceSet(
        blocks=MappingProxyType(blocks),
        group_sizes=MappingProxyType({g.key: g.size for g in groups}),
        wavelength=wavelength,
        generator_impedance=generator_impedance,
        load_impedance=load_impedance,
    )


def assemble_impedance_set(
    groups,
    wavelength: float,
    generator_impedance: complex = 50.0 + 0.0j,
    load_impedance: complex = 50.0 + 0.0j,
    rtol: float = DEFAULT_RTOL,
) -> ImpedanceSet:
    """Build every pairwise impedance block (self pairs included).

    Each unordered group pair is integrated once and mirrored, so the
    reciprocity relation blocks[(x, y)] == blocks[(y, x)].T holds exactly.
    Results are memoized on the full argument tuple; groups and the
    returned set are immutable, so the cache is safe to share between
    worker threads.
    """
    wavelength = _check_wavelength(wavelength)
    generator_impedance = complex(generator_impedance)
    load_impedance = complex(load_impedance)
    if generator_impedance.real <= 0.0 or load_impedance.real <= 0.0:
        raise ValueError("generator and load impedances need a positive real part")
    return _assemble_cached(
        tuple(groups), wavelength, generator_impedance, load_impedance, float(rtol)
    )

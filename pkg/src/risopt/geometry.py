"""Wire-dipole geometry primitives and radiator-group builders.

All positions and lengths are in meters.  Geometry containers use plain
tuples so they stay hashable; conversion to numpy arrays happens at the
kernel boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GeometryError

AXIS_UNIT_TOL = 1e-12

GROUP_KINDS = ("transmitter", "receiver", "ris")

Vec3 = tuple[float, float, float]


@dataclass(frozen=True)
class DipoleGeometry:
    """A straight thin-wire dipole with a sinusoidal current profile.

    Parameters
    ----------
    center : tuple of 3 floats
        Wire midpoint.
    length : float
        Tip-to-tip wire length.
    radius : float
        Wire radius; must stay below length / 10 for the thin-wire model.
    axis : tuple of 3 floats
        Unit vector along the wire.
    """

    center: Vec3
    length: float
    radius: float
    axis: Vec3

    def __post_init__(self):
        if self.length <= 0.0:
            raise GeometryError(f"dipole length must be positive, got {self.length}")
        if self.radius <= 0.0:
            raise GeometryError(f"dipole radius must be positive, got {self.radius}")
        if not self.radius < self.length / 10.0:
            raise GeometryError(
                f"thin-wire model needs radius < length/10 "
                f"(radius={self.radius}, length={self.length})"
            )
        norm = math.sqrt(sum(a * a for a in self.axis))
        if abs(norm - 1.0) > AXIS_UNIT_TOL:
            raise GeometryError(f"axis must be a unit vector, |axis| = {norm!r}")

    @property
    def half_length(self) -> float:
        return 0.5 * self.length


@dataclass(frozen=True)
class RadiatorGroup:
    """An ordered collection of dipoles acting as one port group.

    `kind` is one of 'transmitter', 'receiver', 'ris'; `index` numbers the
    groups of the same kind.  The (kind, index) pair keys impedance blocks.
    """

    kind: str
    index: int
    dipoles: tuple[DipoleGeometry, ...]

    def __post_init__(self):
        if self.kind not in GROUP_KINDS:
            raise GeometryError(f"unknown group kind {self.kind!r}")
        if not self.dipoles:
            raise GeometryError(f"group {self.key} has no dipoles")

    @property
    def key(self) -> tuple[str, int]:
        return (self.kind, self.index)

    @property
    def size(self) -> int:
        return len(self.dipoles)

    def centers(self) -> np.ndarray:
        return np.array([d.center for d in self.dipoles], dtype=float)

    def axes(self) -> np.ndarray:
        return np.array([d.axis for d in self.dipoles], dtype=float)

    def half_lengths(self) -> np.ndarray:
        return np.array([d.half_length for d in self.dipoles], dtype=float)

    def radii(self) -> np.ndarray:
        return np.array([d.radius for d in self.dipoles], dtype=float)


# ---------------------------------------------------------------------------
# group builders

def linear_array_group(
    kind: str,
    index: int,
    center,
    n_elements: int,
    spacing: float,
    length: float,
    radius: float,
    line_axis=(0.0, 1.0, 0.0),
    wire_axis=(0.0, 0.0, 1.0),
) -> RadiatorGroup:
    """Uniform linear array of parallel dipoles.

    Elements sit on a line through `center` along `line_axis`, wires along
    `wire_axis`, centered so the array midpoint is `center`.
    """
    cx, cy, cz = (float(v) for v in center)
    lx, ly, lz = (float(v) for v in line_axis)
    dipoles = []
    for m in range(n_elements):
        off = (m - (n_elements - 1) / 2.0) * spacing
        dipoles.append(
            DipoleGeometry(
                center=(cx + off * lx, cy + off * ly, cz + off * lz),
                length=length,
                radius=radius,
                axis=tuple(float(v) for v in wire_axis),
            )
        )
    return RadiatorGroup(kind=kind, index=index, dipoles=tuple(dipoles))


def planar_grid_group(
    kind: str,
    index: int,
    center,
    per_side: int,
    spacing: float,
    length: float,
    radius: float,
    plane_axes=((0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    wire_axis=(0.0, 0.0, 1.0),
) -> RadiatorGroup:
    """Square per_side x per_side grid of parallel dipoles.

    The grid spans `plane_axes` around `center`; default is the x = const
    plane with wires along z.
    """
    cx, cy, cz = (float(v) for v in center)
    (ax1, ax2) = plane_axes
    dipoles = []
    for m in range(per_side):
        for n in range(per_side):
            o1 = (m - (per_side - 1) / 2.0) * spacing
            o2 = (n - (per_side - 1) / 2.0) * spacing
            dipoles.append(
                DipoleGeometry(
                    center=(
                        cx + o1 * ax1[0] + o2 * ax2[0],
                        cy + o1 * ax1[1] + o2 * ax2[1],
                        cz + o1 * ax1[2] + o2 * ax2[2],
                    ),
                    length=length,
                    radius=radius,
                    axis=tuple(float(v) for v in wire_axis),
                )
            )
    return RadiatorGroup(kind=kind, index=index, dipoles=tuple(dipoles))

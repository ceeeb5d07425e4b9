"""End-to-end channel construction from impedance blocks.

Two routes are provided and cross-validated: the exact two-port reduction
of the full multiport network, and the far-field composition whose
surface-dependent part is affine in each tuned-surface inverse.  The
far-field route is what the optimizer consumes.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from types import MappingProxyType

import numpy as np

from .errors import SingularMatrixError
from .impedance import ImpedanceSet
from .scenario import Scenario

COND_LIMIT = 1e12


# ---------------------------------------------------------------------------
# tunable surface state

@dataclass(frozen=True)
class RisConfiguration:
    """Per-element tuned loads of every surface: b = r0 + j x.

    The real part is pinned to the common loss resistance r0 by
    construction; only the reactances x are stored and updated.
    """

    r0: float
    reactances: tuple

    def __post_init__(self):
        if self.r0 <= 0:
            raise ValueError(f"loss resistance must be positive, got {self.r0}")
        frozen = []
        for x in self.reactances:
            arr = np.asarray(x, dtype=float)
            if arr.ndim != 1:
                raise ValueError("each surface needs a 1-D reactance vector")
            if not np.all(np.isfinite(arr)):
                raise ValueError("reactances must be finite")
            arr = arr.copy()
            arr.flags.writeable = False
            frozen.append(arr)
        object.__setattr__(self, "reactances", tuple(frozen))

    @property
    def n_ris(self) -> int:
        return len(self.reactances)

    @property
    def n_elements(self) -> int:
        return len(self.reactances[0]) if self.reactances else 0

    def vector(self, k: int) -> np.ndarray:
        """Complex load vector b_k with Re(b_k) = r0 exactly."""
        return self.r0 + 1j * self.reactances[k]

    def with_increment(self, k: int, dx) -> "RisConfiguration":
        """New configuration with reactances of surface k shifted by dx."""
        dx = np.asarray(dx, dtype=float)
        new = list(self.reactances)
        new[k] = new[k] + dx
        return RisConfiguration(r0=self.r0, reactances=tuple(new))

    @classmethod
    def zeros(cls, n_ris: int, n_elements: int, r0: float) -> "RisConfiguration":
        return cls(r0=r0, reactances=tuple(np.zeros(n_elements) for _ in range(n_ris)))

    @classmethod
    def random_uniform(cls, n_ris, n_elements, r0, rng, span=100.0) -> "RisConfiguration":
        """Reactances drawn uniformly from [-span, span] ohms."""
        return cls(
            r0=r0,
            reactances=tuple(rng.uniform(-span, span, size=n_elements) for _ in range(n_ris)),
        )

    @classmethod
    def resonant(cls, ris_self, r0) -> "RisConfiguration":
        """Loads cancel each element's self reactance, so every element starts
        at series resonance and current magnitudes are uniform across the
        surface; the optimizer then steers phases with sub-ohm increments."""
        return cls(
            r0=r0,
            reactances=tuple(-np.imag(np.diagonal(block)).copy() for block in ris_self),
        )


# ---------------------------------------------------------------------------
# far-field channel bundle

@dataclass(frozen=True)
class ChannelBundle:
    """Far-field channel pieces, all independent of the tuned loads.

    direct[(i, j)]  : receiver i <- transmitter j, with loads open (L x M)
    ris_in[(i, k)]  : receiver i <- surface k (L x P)
    ris_out[(k, j)] : surface k <- transmitter j (P x M)
    ris_self[k]     : surface self/mutual impedance block (P x P)

    The full channel is direct - sum_k ris_in @ inv(ris_self + diag(b_k)) @ ris_out.
    """

    direct: MappingProxyType
    ris_in: MappingProxyType
    ris_out: MappingProxyType
    ris_self: tuple
    n_pairs: int
    n_ris: int
    rx_ports: int
    tx_ports: int
    n_elements: int
    coupling: str = "full"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.flags.writeable = False
    return arr


def _solve_right(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    """b @ inv(a), via a linear solve with partial pivoting."""
    try:
        return np.linalg.solve(a.T, b.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is singular") from exc


def _solve_left(a: np.ndarray, b: np.ndarray, what: str) -> np.ndarray:
    try:
        return np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"{what} is singular") from exc


def channel_farfield_bundle(imp: ImpedanceSet, sc: Scenario) -> ChannelBundle:
    """Assemble the far-field channel pieces for every link and surface.

    With sc.nlos set, the direct blocks are zeroed while the surface paths
    are kept; everything else is read straight off the impedance set.
    """
    n = sc.n_pairs
    n_ris = sc.n_ris
    direct = {}
    ris_in = {}
    ris_out = {}

    rx_fronts = {}
    for i in range(n):
        rk = ("receiver", i)
        z_ii = imp.block(rk, rk)
        rx_fronts[i] = np.eye(z_ii.shape[0]) + z_ii / imp.load_impedance

    tx_backs = {}
    for j in range(n):
        tk = ("transmitter", j)
        z_jj = imp.block(tk, tk)
        tx_backs[j] = z_jj + imp.generator_matrix(tk)

    for i in range(n):
        for j in range(n):
            if sc.nlos:
                direct[(i, j)] = _freeze(
                    np.zeros((sc.rx_antennas, sc.tx_antennas), dtype=complex)
                )
            else:
                z_ij = imp.block(("receiver", i), ("transmitter", j))
                h = _solve_left(
                    rx_fronts[i],
                    _solve_right(tx_backs[j], z_ij, f"transmitter {j} drive matrix"),
                    f"receiver {i} front matrix",
                )
                direct[(i, j)] = _freeze(h)

    for i in range(n):
        for k in range(n_ris):
            z_ik = imp.block(("receiver", i), ("ris", k))
            ris_in[(i, k)] = _freeze(
                _solve_left(rx_fronts[i], z_ik, f"receiver {i} front matrix")
            )
    for k in range(n_ris):
        for j in range(n):
            z_kj = imp.block(("ris", k), ("transmitter", j))
            ris_out[(k, j)] = _freeze(
                _solve_right(tx_backs[j], z_kj, f"transmitter {j} drive matrix")
            )

    ris_self = tuple(_freeze(imp.block(("ris", k), ("ris", k)).copy()) for k in range(n_ris))

    return ChannelBundle(
        direct=MappingProxyType(direct),
        ris_in=MappingProxyType(ris_in),
        ris_out=MappingProxyType(ris_out),
        ris_self=ris_self,
        n_pairs=n,
        n_ris=n_ris,
        rx_ports=sc.rx_antennas,
        tx_ports=sc.tx_antennas,
        n_elements=sc.ris_elements if n_ris else 0,
        coupling="full",
    )


def mcu_impedance_view(bundle: ChannelBundle) -> ChannelBundle:
    """Coupling-unaware view: surface self blocks reduced to their diagonals.

    Idempotent; everything but ris_self is shared with the input bundle.
    """
    diag_self = tuple(_freeze(np.diag(np.diag(b))) for b in bundle.ris_self)
    return replace(bundle, ris_self=diag_self, coupling="diagonal")


def ris_inverse(bundle: ChannelBundle, ris: RisConfiguration, k: int) -> np.ndarray:
    """X_k = inv(ris_self_k + diag(b_k)); the one place an explicit inverse is kept."""
    w = bundle.ris_self[k] + np.diag(ris.vector(k))
    try:
        return np.linalg.inv(w)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError(f"loaded surface matrix {k} is singular") from exc


def end_to_end_channel(bundle: ChannelBundle, ris: RisConfiguration, i: int, j: int) -> np.ndarray:
    """Receiver-i from transmitter-j channel at the given surface loads."""
    h = bundle.direct[(i, j)].copy()
    for k in range(bundle.n_ris):
        w = bundle.ris_self[k] + np.diag(ris.vector(k))
        y = _solve_left(w, bundle.ris_out[(k, j)], f"loaded surface matrix {k}")
        h -= bundle.ris_in[(i, k)] @ y
    return h


def compose_channels(bundle: ChannelBundle, inverses) -> dict:
    """All (i, j) channels from precomputed surface inverses X_k."""
    out = {}
    scatter = {
        (i, k): bundle.ris_in[(i, k)] @ inverses[k]
        for i in range(bundle.n_pairs)
        for k in range(bundle.n_ris)
    }
    for i in range(bundle.n_pairs):
        for j in range(bundle.n_pairs):
            h = bundle.direct[(i, j)].copy()
            for k in range(bundle.n_ris):
                h -= scatter[(i, k)] @ bundle.ris_out[(k, j)]
            out[(i, j)] = h
    return out


# ---------------------------------------------------------------------------
# exact route (validation reference)

def _cond_guard(mat: np.ndarray, what: str) -> None:
    c = np.linalg.cond(mat)
    if not np.isfinite(c) or c > COND_LIMIT:
        raise SingularMatrixError(f"{what} has condition number {c:.3e} beyond {COND_LIMIT:.0e}")


def channel_exact(
    imp: ImpedanceSet, ris: RisConfiguration, i: int, j: int, k: int
) -> np.ndarray:
    """Exact receiver-i from transmitter-j channel through surface k alone.

    Solves the full multiport reduction with no far-field discarding, so it
    keeps every feedback product between the arrays and the surface.  Used
    as the validation reference for the far-field composition.
    """
    rk, tk, sk = ("receiver", i), ("transmitter", j), ("ris", k)
    w = imp.block(sk, sk) + np.diag(ris.vector(k))
    _cond_guard(w, f"loaded surface matrix {k}")

    def psi(a, b):
        z_ab = imp.block(a, b)
        z_ak = imp.block(a, sk)
        z_kb = imp.block(sk, b)
        return z_ab - z_ak @ _solve_left(w, z_kb, f"loaded surface matrix {k}")

    psi_ii = psi(rk, rk)
    psi_ij = psi(rk, tk)
    psi_ji = psi(tk, rk)
    psi_jj = psi(tk, tk)

    drive = psi_jj + imp.generator_matrix(tk)
    _cond_guard(drive, f"transmitter {j} drive matrix")
    zl = imp.load_impedance
    front = (
        np.eye(psi_ii.shape[0])
        + psi_ii / zl
        - psi_ij @ _solve_left(drive, psi_ji, f"transmitter {j} drive matrix") / zl
    )
    _cond_guard(front, f"receiver {i} front matrix")
    return _solve_left(
        front,
        _solve_right(drive, psi_ij, f"transmitter {j} drive matrix"),
        f"receiver {i} front matrix",
    )

"""Quadrature kernels for the wire-coupling integral.

The coupling integral feeds every impedance block, so this is the hot path
of the whole package.  Two interchangeable implementations live here:

* numba ``@njit`` scalar loops (default when numba imports cleanly), and
* a vectorized pure-numpy path, selected by setting ``RISOPT_NO_NUMBA=1``.

Both integrate the tangential electric field of a sinusoidal-current wire
along a second wire, weighted by the second wire's current, using
129-point Gauss-Legendre panels with panel-doubling refinement.

Field point with cylindrical coordinates (rho, z) about a wire of
half-length h carrying I(z') = sin(k (h - |z'|)):

    E_z   = -j eta/(4 pi)      [ g(R1) + g(R2) - 2 cos(kh) g(R0) ]
    E_rho = +j eta/(4 pi rho)  [ (z-h) g(R1) + (z+h) g(R2) - 2 z cos(kh) g(R0) ]

with g(R) = exp(-j k R)/R, R1/R2 the distances to the wire tips and R0 to
its center.  Observation radii are clamped to the source-wire radius,
which both regularizes the self term (surface evaluation) and keeps the
collinear case finite.
"""

from __future__ import annotations

import math
import os

import numpy as np

MU0 = 4.0e-7 * math.pi
C0 = 299792458.0
ETA0 = MU0 * C0  # free-space wave impedance, ohm

GL_POINTS = 129
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(GL_POINTS)

MAX_PANELS = 512

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency, but stay usable
    HAS_NUMBA = False

USE_NUMBA = HAS_NUMBA and os.environ.get("RISOPT_NO_NUMBA", "0") != "1"


# ---------------------------------------------------------------------------
# pure-numpy path (vectorized over all panel nodes of one wire pair)

def _pair_fixed_np(rel, u1, u2, h1, h2, a1, kw, n_panels):
    """Coupling integral for one wire pair on a fixed composite GL rule."""
    width = 2.0 * h2 / n_panels
    mid = -h2 + width * (np.arange(n_panels) + 0.5)
    t = (mid[:, None] + 0.5 * width * _GL_NODES[None, :]).ravel()
    w = np.broadcast_to(0.5 * width * _GL_WEIGHTS, (n_panels, GL_POINTS)).ravel()

    p = rel[None, :] + t[:, None] * u2[None, :]
    z = p @ u1
    rv = p - z[:, None] * u1[None, :]
    rho = np.sqrt(np.einsum("ij,ij->i", rv, rv))
    re = np.maximum(rho, a1)

    r1 = np.sqrt(re * re + (z - h1) ** 2)
    r2 = np.sqrt(re * re + (z + h1) ** 2)
    r0 = np.sqrt(re * re + z * z)
    g1 = np.exp(-1j * kw * r1) / r1
    g2 = np.exp(-1j * kw * r2) / r2
    g0 = np.exp(-1j * kw * r0) / r0

    coskh = math.cos(kw * h1)
    scale = ETA0 / (4.0 * math.pi)
    ez = -1j * scale * (g1 + g2 - 2.0 * coskh * g0)
    er = 1j * scale * ((z - h1) * g1 + (z + h1) * g2 - 2.0 * z * coskh * g0) / re

    axes_dot = float(u1 @ u2)
    with np.errstate(invalid="ignore", divide="ignore"):
        proj = np.where(rho > 0.0, (rv @ u2) / np.maximum(rho, 1e-300), 0.0)
    et = ez * axes_dot + er * proj

    cur = np.sin(kw * (h2 - np.abs(t)))
    return complex(np.sum(w * et * cur))


def _pair_adaptive_np(rel, u1, u2, h1, h2, a1, kw, rtol, max_panels):
    prev = _pair_fixed_np(rel, u1, u2, h1, h2, a1, kw, 1)
    n = 2
    while True:
        cur = _pair_fixed_np(rel, u1, u2, h1, h2, a1, kw, n)
        if abs(cur - prev) <= rtol * abs(cur) or n >= max_panels:
            return cur
        prev = cur
        n *= 2


def _block_np(c1, u1, h1, a1, c2, u2, h2, kw, rtol, max_panels, same_group):
    n1 = c1.shape[0]
    n2 = c2.shape[0]
    out = np.empty((n1, n2), dtype=np.complex128)
    for p in range(n1):
        q0 = p if same_group else 0
        for q in range(q0, n2):
            out[p, q] = _pair_adaptive_np(
                c2[q] - c1[p], u1[p], u2[q], h1[p], h2[q], a1[p], kw, rtol, max_panels
            )
            if same_group and q != p:
                out[q, p] = out[p, q]
    return out


# ---------------------------------------------------------------------------
# numba path (scalar loops; same algorithm)

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _pair_fixed_nb(rel, u1, u2, h1, h2, a1, kw, n_panels, nodes, weights):
        scale = ETA0 / (4.0 * math.pi)
        coskh = math.cos(kw * h1)
        axes_dot = u1[0] * u2[0] + u1[1] * u2[1] + u1[2] * u2[2]
        width = 2.0 * h2 / n_panels
        total = 0.0 + 0.0j
        for ip in range(n_panels):
            midt = -h2 + width * (ip + 0.5)
            halfw = 0.5 * width
            for iq in range(nodes.shape[0]):
                t = midt + halfw * nodes[iq]
                w = halfw * weights[iq]
                px = rel[0] + t * u2[0]
                py = rel[1] + t * u2[1]
                pz = rel[2] + t * u2[2]
                z = px * u1[0] + py * u1[1] + pz * u1[2]
                rvx = px - z * u1[0]
                rvy = py - z * u1[1]
                rvz = pz - z * u1[2]
                rho = math.sqrt(rvx * rvx + rvy * rvy + rvz * rvz)
                re = rho if rho > a1 else a1
                r1 = math.sqrt(re * re + (z - h1) * (z - h1))
                r2 = math.sqrt(re * re + (z + h1) * (z + h1))
                r0 = math.sqrt(re * re + z * z)
                g1 = complex(math.cos(kw * r1), -math.sin(kw * r1)) / r1
                g2 = complex(math.cos(kw * r2), -math.sin(kw * r2)) / r2
                g0 = complex(math.cos(kw * r0), -math.sin(kw * r0)) / r0
                ez = -1j * scale * (g1 + g2 - 2.0 * coskh * g0)
                er = (
                    1j
                    * scale
                    * ((z - h1) * g1 + (z + h1) * g2 - 2.0 * z * coskh * g0)
                    / re
                )
                if rho > 0.0:
                    proj = (rvx * u2[0] + rvy * u2[1] + rvz * u2[2]) / rho
                else:
                    proj = 0.0
                et = ez * axes_dot + er * proj
                total += w * et * math.sin(kw * (h2 - abs(t)))
        return total

    @njit(cache=True, nogil=True)
    def _pair_adaptive_nb(rel, u1, u2, h1, h2, a1, kw, rtol, max_panels, nodes, weights):
        prev = _pair_fixed_nb(rel, u1, u2, h1, h2, a1, kw, 1, nodes, weights)
        n = 2
        while True:
            cur = _pair_fixed_nb(rel, u1, u2, h1, h2, a1, kw, n, nodes, weights)
            if abs(cur - prev) <= rtol * abs(cur) or n >= max_panels:
                return cur
            prev = cur
            n *= 2

    @njit(cache=True, nogil=True)
    def _block_nb(c1, u1, h1, a1, c2, u2, h2, kw, rtol, max_panels, same_group, nodes, weights):
        n1 = c1.shape[0]
        n2 = c2.shape[0]
        out = np.empty((n1, n2), dtype=np.complex128)
        for p in range(n1):
            q0 = p if same_group else 0
            for q in range(q0, n2):
                out[p, q] = _pair_adaptive_nb(
                    c2[q] - c1[p],
                    u1[p],
                    u2[q],
                    h1[p],
                    h2[q],
                    a1[p],
                    kw,
                    rtol,
                    max_panels,
                    nodes,
                    weights,
                )
                if same_group and q != p:
                    out[q, p] = out[p, q]
        return out


# ---------------------------------------------------------------------------
# dispatch

def coupling_integral(rel, u1, u2, h1, h2, a1, kw, rtol=1e-8, max_panels=MAX_PANELS):
    """Raw coupling integral for a single wire pair (no current normalization)."""
    rel = np.ascontiguousarray(rel, dtype=float)
    u1 = np.ascontiguousarray(u1, dtype=float)
    u2 = np.ascontiguousarray(u2, dtype=float)
    if USE_NUMBA:
        return _pair_adaptive_nb(
            rel, u1, u2, h1, h2, a1, kw, rtol, max_panels, _GL_NODES, _GL_WEIGHTS
        )
    return _pair_adaptive_np(rel, u1, u2, h1, h2, a1, kw, rtol, max_panels)


def coupling_block(c1, u1, h1, a1, c2, u2, h2, kw, rtol=1e-8, max_panels=MAX_PANELS, same_group=False):
    """Raw coupling integrals for all wire pairs of two groups.

    Returns an (n1, n2) complex matrix; with same_group=True only the upper
    triangle is integrated and the block is mirrored.
    """
    c1 = np.ascontiguousarray(c1, dtype=float)
    u1 = np.ascontiguousarray(u1, dtype=float)
    h1 = np.ascontiguousarray(h1, dtype=float)
    a1 = np.ascontiguousarray(a1, dtype=float)
    c2 = np.ascontiguousarray(c2, dtype=float)
    u2 = np.ascontiguousarray(u2, dtype=float)
    h2 = np.ascontiguousarray(h2, dtype=float)
    if USE_NUMBA:
        return _block_nb(
            c1, u1, h1, a1, c2, u2, h2, kw, rtol, max_panels, same_group, _GL_NODES, _GL_WEIGHTS
        )
    return _block_np(c1, u1, h1, a1, c2, u2, h2, kw, rtol, max_panels, same_group)

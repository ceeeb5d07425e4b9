"""Alternating optimization of precoders and tunable surface loads.

One outer iteration runs a weighted-MMSE precoder pass (receive filters,
MSE weights, water-filled transmit precoders), then steps each surface's
reactance vector by minimizing a quadratic surrogate of the weighted MSE.
The surrogate comes from a first-order expansion of the loaded-surface
inverse; a trust region on the reactance increment keeps that expansion
honest, and backtracking against the exactly refreshed weighted MSE makes
every accepted step a true descent step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import (
    ChannelBundle,
    RisConfiguration,
    compose_channels,
    mcu_impedance_view,
    ris_inverse,
)
from .errors import ConvergenceError, NumericalError, ScenarioError
from .scenario import Scenario

LN2 = math.log(2.0)
INVERSE_RESIDUAL_TOL = 1e-8
BACKTRACK_LIMIT = 30
MU_BISECT_STEPS = 200
MU_BISECT_RTOL = 1e-13
DIVERGENCE_DROP_BITS = 1e-3
DIVERGENCE_PATIENCE = 10


# ---------------------------------------------------------------------------
# containers

@dataclass(frozen=True)
class PrecoderSet:
    """Per-pair transmit precoders v, receive filters g, and MSE weights w."""

    v: tuple
    g: tuple
    w: tuple

    @property
    def n_pairs(self) -> int:
        return len(self.v)


@dataclass(frozen=True)
class SurfaceStepTerms:
    """Quadratic surrogate pieces for one surface: e(jx) = const + x'Re(m)x + 2Im(u)'x."""

    m: np.ndarray
    u: np.ndarray
    x_norm: float


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    mode: str
    sum_rate_bits: float
    sum_rate_internal_bits: float
    wmse: float
    mu: tuple
    delta_norm: tuple


@dataclass(frozen=True)
class OptimizerResult:
    mode: str
    curvature: str
    trace: tuple
    ris: RisConfiguration
    precoders: PrecoderSet
    sum_rate_bits: float
    re_deviation_max: float  # max over every iterate of |Re(load) - R_0|
    power_overrun_max: float  # max over every iterate of relative budget excess


# ---------------------------------------------------------------------------
# rates and mean-square error

def rate_bits(h_table: dict, v, i: int, noise_w) -> float:
    """Achievable rate of pair i in bits, receiver-optimal by construction."""
    l = h_table[(i, i)].shape[0]
    j_other = noise_w[i] * np.eye(l, dtype=complex)
    for j in range(len(v)):
        if j == i:
            continue
        hv = h_table[(i, j)] @ v[j]
        j_other += hv @ hv.conj().T
    hv_own = h_table[(i, i)] @ v[i]
    j_full = j_other + hv_own @ hv_own.conj().T
    sign_f, logdet_f = np.linalg.slogdet(j_full)
    sign_o, logdet_o = np.linalg.slogdet(j_other)
    if sign_f == 0 or sign_o == 0:
        raise NumericalError(f"rank-deficient covariance at pair {i}")
    return (logdet_f - logdet_o) / LN2


def weighted_sum_rate(h_table: dict, v, weights, noise_w) -> float:
    return sum(weights[i] * rate_bits(h_table, v, i, noise_w) for i in range(len(v)))


def mse_matrix(h_table: dict, precoders: PrecoderSet, i: int, noise_w) -> np.ndarray:
    """Stream-error covariance of pair i at the stored (not re-optimized) filters."""
    g_i, v_i = precoders.g[i], precoders.v[i]
    gh = g_i.conj().T
    m_own = gh @ h_table[(i, i)] @ v_i
    s = m_own.shape[0]
    e = np.eye(s, dtype=complex) - m_own - m_own.conj().T + noise_w[i] * (gh @ g_i)
    for j in range(precoders.n_pairs):
        t = gh @ h_table[(i, j)] @ precoders.v[j]
        e += t @ t.conj().T
    return e


def frozen_wmse(h_table: dict, precoders: PrecoderSet, weights, noise_w) -> float:
    """Sum of weighted MSE traces at fixed filters and weights."""
    total = 0.0
    for i in range(precoders.n_pairs):
        total += weights[i] * float(
            np.trace(precoders.w[i] @ mse_matrix(h_table, precoders, i, noise_w)).real
        )
    return total


# ---------------------------------------------------------------------------
# weighted-MMSE precoder pass

def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + a.conj().T)


def _power_loaded_precoder(k_mat, target, power):
    """v = inv(k_mat + mu I) target with tr(v v') <= power, mu >= 0 minimal.

    k_mat is Hermitian PSD; the multiplier is found on the eigenbasis where
    the transmitted power is an explicit decreasing function of mu.
    """
    lam, q = np.linalg.eigh(_hermitize(k_mat))
    lam = np.maximum(lam, 0.0)
    t = q.conj().T @ target
    row = np.sum(np.abs(t) ** 2, axis=1)

    def spent(mu):
        return float(np.sum(row / (lam + mu) ** 2))

    lam_floor = max(float(lam.max()), 1.0) * 1e-14
    if lam.min() > lam_floor and spent(0.0) <= power:
        mu = 0.0
    else:
        hi = math.sqrt(max(float(row.sum()), 1e-300) / power)
        while spent(hi) > power:
            hi *= 4.0
        lo = 0.0
        for _ in range(MU_BISECT_STEPS):
            mid = 0.5 * (lo + hi)
            if spent(mid) > power:
                lo = mid
            else:
                hi = mid
            if hi - lo <= MU_BISECT_RTOL * max(hi, 1e-300):
                break
        mu = hi
    v = q @ (t / (lam + mu)[:, None])
    return v, mu


def wmmse_precoder_step(h_table, v, weights, powers, noise_w, update_tx=True):
    """One full precoder pass; returns the new PrecoderSet and per-pair mu."""
    n = len(v)
    g_list, w_list = [], []
    for i in range(n):
        l = h_table[(i, i)].shape[0]
        j_i = noise_w[i] * np.eye(l, dtype=complex)
        for j in range(n):
            hv = h_table[(i, j)] @ v[j]
            j_i += hv @ hv.conj().T
        g_i = np.linalg.solve(j_i, h_table[(i, i)] @ v[i])
        e_i = _hermitize(
            np.eye(v[i].shape[1], dtype=complex) - v[i].conj().T @ h_table[(i, i)].conj().T @ g_i
        )
        w_i = _hermitize(np.linalg.inv(e_i))
        g_list.append(g_i)
        w_list.append(w_i)

    if not update_tx:
        return PrecoderSet(v=tuple(v), g=tuple(g_list), w=tuple(w_list)), (0.0,) * n

    v_new, mus = [], []
    for i in range(n):
        m = v[i].shape[0]
        k_i = np.zeros((m, m), dtype=complex)
        for j in range(n):
            gwg = g_list[j] @ w_list[j] @ g_list[j].conj().T
            k_i += weights[j] * h_table[(j, i)].conj().T @ gwg @ h_table[(j, i)]
        target = weights[i] * h_table[(i, i)].conj().T @ g_list[i] @ w_list[i]
        vi, mu = _power_loaded_precoder(k_i, target, powers[i])
        v_new.append(vi)
        mus.append(mu)
    return PrecoderSet(v=tuple(v_new), g=tuple(g_list), w=tuple(w_list)), tuple(mus)


def random_precoders(rng, n_pairs, tx_ports, streams, powers):
    """Full-power random starting precoders."""
    out = []
    for i in range(n_pairs):
        v = rng.standard_normal((tx_ports, streams)) + 1j * rng.standard_normal((tx_ports, streams))
        v *= math.sqrt(powers[i] / float(np.sum(np.abs(v) ** 2)))
        out.append(v)
    return tuple(out)


def matched_precoders(h_table, n_pairs, streams, powers):
    """Starting precoders along the right singular vectors of each intended
    link, scaled to spend the power budget with equality."""
    out = []
    for i in range(n_pairs):
        _, _, vh = np.linalg.svd(h_table[(i, i)])
        k = min(streams, vh.shape[0])
        v = np.zeros((vh.shape[1], streams), dtype=complex)
        v[:, :k] = vh[:k].conj().T * math.sqrt(powers[i] / k)
        out.append(v)
    return tuple(out)


# ---------------------------------------------------------------------------
# surface load surrogate

def q_mapping(a: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Flatten a @ diag(d) @ c into a single matrix acting on stacked copies of d.

    Output column (s * P + p) carries a[:, p] * c[p, s], so that
    a @ diag(d) @ c == q_mapping(a, c) @ gamma_stack(d, c.shape[1]).
    """
    s_out = c.shape[1]
    return np.einsum("lp,pc->lcp", a, c).reshape(a.shape[0], s_out * a.shape[1])


def gamma_stack(delta: np.ndarray, n_streams: int) -> np.ndarray:
    p = delta.shape[0]
    g = np.zeros((n_streams * p, n_streams), dtype=complex)
    for s in range(n_streams):
        g[s * p : (s + 1) * p, s] = delta
    return g


def checked_inverses(bundle: ChannelBundle, ris: RisConfiguration):
    """Loaded-surface inverses with a residual gate on each one."""
    inverses = []
    for k in range(bundle.n_ris):
        x = ris_inverse(bundle, ris, k)
        w = bundle.ris_self[k] + np.diag(ris.vector(k))
        resid = np.linalg.norm(x @ w - np.eye(w.shape[0]))
        scale = max(np.linalg.norm(x) * np.linalg.norm(w), 1.0)
        if resid > INVERSE_RESIDUAL_TOL * scale:
            raise NumericalError(
                f"surface {k} inverse residual {resid:.3e} exceeds {INVERSE_RESIDUAL_TOL:.0e} x {scale:.3e}"
            )
        inverses.append(x)
    return inverses


def surface_step_terms(
    bundle: ChannelBundle, ris: RisConfiguration, precoders: PrecoderSet, weights, noise_w, k: int
) -> SurfaceStepTerms:
    """Quadratic surrogate of the weighted MSE in the surface-k load increment.

    With b_k -> b_k + d the loaded inverse moves by -X diag(d) X to first
    order, so each stream matrix moves by a_ik diag(d) c_kj with
    a_ik = g_i' T_ik X_k and c_kj = X_k S_kj v_j.  Collecting terms gives
    e(d) = const + d' m d + 2 Re(u' d), and the quadratic kernel separates
    into a Hadamard product of the receive- and transmit-side Grams.
    """
    inverses = checked_inverses(bundle, ris)
    h_table = compose_channels(bundle, inverses)
    x = inverses[k]
    n = precoders.n_pairs
    p = x.shape[0]

    c_list = [x @ bundle.ris_out[(k, j)] @ precoders.v[j] for j in range(n)]
    cc = np.zeros((p, p), dtype=complex)
    for c in c_list:
        cc += c @ c.conj().T

    awa = np.zeros((p, p), dtype=complex)
    g_vec = np.zeros(p, dtype=complex)
    for i in range(n):
        a_ik = precoders.g[i].conj().T @ bundle.ris_in[(i, k)] @ x
        wa = precoders.w[i] @ a_ik
        awa += weights[i] * (a_ik.conj().T @ wa)
        d_sum = np.zeros_like(c_list[i])
        for j in range(n):
            n_ij = precoders.g[i].conj().T @ h_table[(i, j)] @ precoders.v[j]
            d_sum += c_list[j] @ n_ij.conj().T
        g_vec += weights[i] * np.einsum("ps,sp->p", d_sum - c_list[i], wa)

    m = awa * np.conj(cc)
    return SurfaceStepTerms(m=m, u=np.conj(g_vec), x_norm=float(np.linalg.norm(x, 2)))


def solve_reactance_step(m, u, radius, curvature="re"):
    """Trust-region minimizer of x'K x + 2 Im(u)'x over ||x||_inf <= radius.

    K is Re(m) (default) or Im(m) behind the curvature flag; the multiplier
    keeping the step inside the region is found by bisection, with mu = 0
    short-circuited whenever the unconstrained minimizer already fits.
    """
    if curvature == "re":
        kern = np.real(m)
    elif curvature == "im":
        kern = np.imag(m)
    else:
        raise ValueError(f"curvature must be 're' or 'im', got {curvature!r}")
    grad_half = np.imag(u)
    if not np.any(grad_half):
        return np.zeros(len(u)), 0.0

    lam, q = np.linalg.eigh(0.5 * (kern + kern.T))
    t = q.T @ grad_half

    def step(mu):
        with np.errstate(divide="ignore", invalid="ignore"):
            return -(q @ (t / (lam + mu)))

    lam_floor = max(float(np.abs(lam).max()), 1.0) * 1e-14
    if lam.min() > lam_floor:
        x0 = step(0.0)
        if float(np.abs(x0).max()) <= radius:
            return x0, 0.0

    hi = max(float(np.linalg.norm(t)) / radius, lam_floor)
    while float(np.abs(step(hi)).max()) > radius:
        hi *= 4.0
    lo = 0.0
    for _ in range(MU_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        if float(np.abs(step(mid)).max()) > radius:
            lo = mid
        else:
            hi = mid
        if hi - lo <= MU_BISECT_RTOL * max(hi, 1e-300):
            break
    return step(hi), hi


def neumann_apply(x: np.ndarray, delta: np.ndarray, order: int = 2) -> np.ndarray:
    """Series update of a loaded-surface inverse for a diagonal load shift.

    Returns sum_{n<=order} X (-diag(delta) X)^n; refuses when the update
    ratio ||diag(delta) X|| reaches 1 and the series no longer contracts.
    """
    dx = delta[:, None] * x
    rho = float(np.linalg.norm(dx, 2))
    if rho >= 1.0:
        raise NumericalError(f"series update ratio {rho:.3e} is not a contraction")
    out = x.copy()
    term = x
    for _ in range(order):
        term = -(term @ dx)
        out += term
    return out


# ---------------------------------------------------------------------------
# outer loop

def _wsr(bundle, ris, v, weights, noise_w):
    h = compose_channels(bundle, checked_inverses(bundle, ris))
    return weighted_sum_rate(h, v, weights, noise_w)


def _initial_ris(sc: Scenario, bundle: ChannelBundle, rng) -> RisConfiguration:
    if sc.ris_init == "zeros":
        return RisConfiguration.zeros(sc.n_ris, sc.ris_elements, sc.r0_ohm)
    if sc.ris_init == "resonant":
        return RisConfiguration.resonant(bundle.ris_self, sc.r0_ohm)
    return RisConfiguration.random_uniform(sc.n_ris, sc.ris_elements, sc.r0_ohm, rng)


def bcd_optimize(bundle: ChannelBundle, sc: Scenario, curvature: str = "re") -> OptimizerResult:
    """Run the full alternating loop on the given channel pieces.

    In coupling-aware mode the optimizer sees the full surface blocks;
    in coupling-unaware mode it optimizes against the diagonal view while
    the reported sum rate is always evaluated on the true bundle.
    """
    if (
        bundle.n_pairs != sc.n_pairs
        or bundle.n_ris != sc.n_ris
        or bundle.rx_ports != sc.rx_antennas
        or bundle.tx_ports != sc.tx_antennas
        or (bundle.n_ris and bundle.n_elements != sc.ris_elements)
    ):
        raise ScenarioError("channel bundle dimensions do not match the scenario")
    internal = mcu_impedance_view(bundle) if sc.mode == "mcu" else bundle
    rng = np.random.default_rng(sc.seed)
    ris = _initial_ris(sc, bundle, rng)
    h0 = compose_channels(internal, checked_inverses(internal, ris))
    v = matched_precoders(h0, sc.n_pairs, sc.rx_antennas, sc.tx_power_w)
    weights, powers, noise = sc.weights, sc.tx_power_w, sc.noise_power_w
    streams = sc.rx_antennas
    precoders = PrecoderSet(v=v, g=(), w=())

    def internal_rates(v_now):
        h = compose_channels(internal, checked_inverses(internal, ris))
        return [rate_bits(h, v_now, i, noise) for i in range(sc.n_pairs)]

    # running maxima over every recorded iterate, not just the final state
    deviations = {"re": 0.0, "power": -np.inf}

    def record(it, v_now, mus, dnorms):
        for k in range(sc.n_ris):
            dev = float(np.abs(ris.vector(k).real - sc.r0_ohm).max())
            deviations["re"] = max(deviations["re"], dev)
        for i in range(sc.n_pairs):
            spent = float(np.sum(np.abs(v_now[i]) ** 2))
            deviations["power"] = max(deviations["power"], (spent - powers[i]) / powers[i])
        rates = internal_rates(v_now)
        internal_sum = sum(weights[i] * r for i, r in enumerate(rates))
        if sc.mode == "mcu":
            true_sum = _wsr(bundle, ris, v_now, weights, noise)
        else:
            true_sum = internal_sum
        wmse = sum(weights[i] * (streams - r) for i, r in enumerate(rates))
        trace.append(
            TraceRecord(
                iteration=it,
                mode=sc.mode,
                sum_rate_bits=true_sum,
                sum_rate_internal_bits=internal_sum,
                wmse=wmse,
                mu=tuple(mus),
                delta_norm=tuple(dnorms),
            )
        )
        return internal_sum

    trace = []
    zeros = (0.0,) * sc.n_ris
    prev_internal = record(0, v, zeros, zeros)
    drops = 0

    for it in range(1, sc.iterations + 1):
        h_int = compose_channels(internal, checked_inverses(internal, ris))
        precoders, _ = wmmse_precoder_step(h_int, v, weights, powers, noise)
        v = precoders.v

        mus, dnorms = [], []
        for k in range(sc.n_ris):
            terms = surface_step_terms(internal, ris, precoders, weights, noise, k)
            radius = sc.trust_delta / max(terms.x_norm, 1e-300)
            x, mu = solve_reactance_step(terms.m, terms.u, radius, curvature)
            h_now = compose_channels(internal, checked_inverses(internal, ris))
            e0 = frozen_wmse(h_now, precoders, weights, noise)
            accepted = np.zeros_like(x)
            for _ in range(BACKTRACK_LIMIT):
                if not np.any(x):
                    break
                trial = ris.with_increment(k, x)
                h_trial = compose_channels(internal, checked_inverses(internal, trial))
                if frozen_wmse(h_trial, precoders, weights, noise) <= e0 + 1e-12 * max(abs(e0), 1.0):
                    accepted = x
                    break
                x = 0.5 * x
            ris = ris.with_increment(k, accepted)
            mus.append(mu)
            dnorms.append(float(np.abs(accepted).max()) if accepted.size else 0.0)

        internal_sum = record(it, v, mus, dnorms)
        if internal_sum < prev_internal - DIVERGENCE_DROP_BITS:
            drops += 1
            if drops >= DIVERGENCE_PATIENCE:
                err = ConvergenceError(
                    f"internal sum rate fell {drops} consecutive iterations at iteration {it}"
                )
                err.trace = tuple(trace)
                raise err
        else:
            drops = 0
        prev_internal = internal_sum

    return OptimizerResult(
        mode=sc.mode,
        curvature=curvature,
        trace=tuple(trace),
        ris=ris,
        precoders=precoders,
        sum_rate_bits=trace[-1].sum_rate_bits,
        re_deviation_max=deviations["re"],
        power_overrun_max=deviations["power"],
    )


# ---------------------------------------------------------------------------
# radiated pattern of a tuned surface

def ris_excitation(bundle: ChannelBundle, ris: RisConfiguration, v, k: int, j: int) -> np.ndarray:
    """Net per-element drive of surface k due to transmitter j, summed over streams."""
    x = ris_inverse(bundle, ris, k)
    return np.asarray((x @ bundle.ris_out[(k, j)] @ v[j]).sum(axis=1))


def array_factor_db(positions, wavelength, excitation, thetas) -> np.ndarray:
    """Azimuthal re-radiation pattern, normalized to a 0 dB peak.

    thetas are angles in the horizontal plane measured from the +x axis
    toward +y; element heights only add a common phase per element and are
    kept in the projection.
    """
    thetas = np.asarray(thetas, dtype=float)
    pos = np.asarray(positions, dtype=float)
    u = np.stack([np.cos(thetas), np.sin(thetas), np.zeros_like(thetas)], axis=1)
    phase = np.exp(1j * (2.0 * np.pi / wavelength) * (u @ pos.T))
    af = np.abs(phase @ np.asarray(excitation))
    peak = af.max()
    if peak <= 0:
        raise NumericalError("all-zero excitation has no pattern")
    return 20.0 * np.log10(np.maximum(af / peak, 1e-300))

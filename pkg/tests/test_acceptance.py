"""End-to-end acceptance gate.

One test per headline requirement, each tagged with the `criterion`
marker so the terminal summary prints a [PASS]/[FAIL] line per claim.
The physical-scale runs are expensive and shared through session
fixtures; every optimizer result produced anywhere in this module is
pooled so the constraint sweep can inspect all of them.
"""

import pathlib

import numpy as np
import pytest

from risopt import (
    RisConfiguration,
    bcd_optimize,
    bundle_for_scenario,
    channel_exact,
    dipole_mutual_impedance,
    load_scenario,
    rate_bits,
    ris_element_positions,
    ris_excitation,
    array_factor_db,
    assemble_impedance_set,
)
from risopt.channel import ris_inverse
from risopt.geometry import DipoleGeometry
from risopt.optimizer import (
    PrecoderSet,
    gamma_stack,
    mse_matrix,
    neumann_apply,
    q_mapping,
    random_precoders,
    surface_step_terms,
)
from risopt.scenario import build_groups

from test_optimizer import crandn, exact_objective, toy_state

SCENARIO = pathlib.Path(__file__).resolve().parents[1] / "scenarios" / "reference_network.json"

# per-step slack for the trace monotonicity checks: numerical floor plus
# the second-order remainder of the linearized inverse update
def trace_slack(sc):
    return 1e-6 + sc.trust_delta**2


@pytest.fixture(scope="session")
def sc_ref():
    return load_scenario(SCENARIO)


@pytest.fixture(scope="session")
def run_pool():
    """Every (label, OptimizerResult) produced by the fixtures below."""
    return []


def _optimize(sc, pool, label):
    bundle = bundle_for_scenario(sc)
    result = bcd_optimize(bundle, sc, "re")
    pool.append((label, result))
    return bundle, result


@pytest.fixture(scope="session")
def run_p16(sc_ref, run_pool):
    """Reference geometry, 4x4 surfaces at quarter-wave spacing, 500 rounds."""
    sc = sc_ref.replace(iterations=500)
    return _optimize(sc, run_pool, "p16")[1], sc


@pytest.fixture(scope="session")
def runs_p64(sc_ref, run_pool):
    """8x8 surfaces at eighth-wave spacing, both coupling treatments, one seed."""
    side = 8
    sc = sc_ref.replace(ris_elements=side * side, ris_spacing_m=sc_ref.wavelength / side)
    aware = _optimize(sc, run_pool, "p64-aware")[1]
    unaware = _optimize(sc.replace(mode="mcu"), run_pool, "p64-unaware")[1]
    return aware, unaware


@pytest.fixture(scope="session")
def runs_antennas(sc_ref, run_pool, run_p16):
    """Antenna counts 1..3 per end at the reference surface spacing."""
    finals = {}
    for n in (1, 3):
        sc = sc_ref.replace(iterations=500, tx_antennas=n, rx_antennas=n)
        finals[n] = _optimize(sc, run_pool, f"antennas-{n}")[1].sum_rate_bits
    finals[2] = run_p16[0].sum_rate_bits
    return finals


@pytest.fixture(scope="session")
def run_p256(sc_ref, run_pool):
    """16x16 surfaces at sixteenth-wave spacing."""
    side = 16
    sc = sc_ref.replace(ris_elements=side * side, ris_spacing_m=sc_ref.wavelength / side)
    bundle, result = _optimize(sc, run_pool, "p256")
    return bundle, result, sc


# ---------------------------------------------------------------------------
# surrogate algebra against independent references

@pytest.mark.criterion("01 surrogate gradient matches central differences across a size grid")
def test_gradient_matches_finite_differences_on_grid():
    checked = 0
    for n_pairs in (1, 2):
        for ants in (1, 2, 3):
            for n_ris in (1, 2):
                for p in (1, 4, 16):
                    for seed in (3, 4):
                        state = toy_state(
                            seed=100 * seed + checked,
                            n_pairs=n_pairs,
                            n_ris=n_ris,
                            l=ants,
                            m=ants,
                            p=p,
                        )
                        bundle, ris, precoders, weights, noise = state
                        k = n_ris - 1
                        terms = surface_step_terms(bundle, ris, precoders, weights, noise, k)
                        analytic = 2.0 * np.imag(terms.u)
                        h = 1e-5 / max(terms.x_norm, 1.0)
                        fd = np.zeros_like(analytic)
                        for idx in range(p):
                            e = np.zeros(p)
                            e[idx] = h
                            up = exact_objective(bundle, ris, precoders, weights, noise, k, e)
                            dn = exact_objective(bundle, ris, precoders, weights, noise, k, -e)
                            fd[idx] = (up - dn) / (2.0 * h)
                        err = np.linalg.norm(fd - analytic)
                        assert err <= 1e-5 * max(np.linalg.norm(analytic), 1e-12), (
                            f"pairs={n_pairs} ants={ants} surfaces={n_ris} p={p} seed={seed}"
                        )
                        checked += 1
    assert checked >= 50


@pytest.mark.criterion("02 bilinear-in-loads mapping identity holds to 1e-13")
def test_mapping_identity_holds():
    rng = np.random.default_rng(11)
    for _ in range(100):
        l, p, m = rng.integers(1, 5, size=3)
        a, c = crandn(rng, l, p), crandn(rng, p, m)
        d = crandn(rng, p)
        direct = a @ np.diag(d) @ c
        mapped = q_mapping(a, c) @ gamma_stack(d, m)
        assert np.abs(direct - mapped).max() <= 1e-13 * max(np.abs(direct).max(), 1.0)


@pytest.mark.criterion("03 linearized inverse update carries a second-order error")
def test_inverse_linearization_error_is_second_order():
    for seed in range(10):
        rng = np.random.default_rng(50 + seed)
        p = 16
        b = crandn(rng, p, p) + np.diag(5.0 + rng.uniform(0, 1, p))
        x = np.linalg.inv(b)
        step = rng.standard_normal(p)
        step *= 0.05 / (np.linalg.norm(x, 2) * np.abs(step).max())

        def err(s):
            exact = np.linalg.inv(b + np.diag(1j * s))
            return np.linalg.norm(exact - neumann_apply(x, 1j * s, order=1))

        ratio = err(step) / err(0.5 * step)
        assert 3.5 <= ratio <= 4.5, f"seed {seed}: ratio {ratio}"


@pytest.mark.criterion("04 achievable rate equals the inverse error-matrix log-determinant")
def test_rate_equals_mmse_error_matrix_determinant():
    for seed in range(50):
        rng = np.random.default_rng(200 + seed)
        n, l, m = 2, 2, 3
        h = {(i, j): crandn(rng, l, m) for i in range(n) for j in range(n)}
        v = random_precoders(rng, n, m, l, (1.0,) * n)
        noise = tuple(rng.uniform(0.01, 0.1, n))
        filters = []
        for i in range(n):
            cov = noise[i] * np.eye(l, dtype=complex)
            for j in range(n):
                hv = h[(i, j)] @ v[j]
                cov = cov + hv @ hv.conj().T
            filters.append(np.linalg.solve(cov, h[(i, i)] @ v[i]))
        precoders = PrecoderSet(v=v, g=tuple(filters), w=())
        for i in range(n):
            e = mse_matrix(h, precoders, i, noise)
            direct = rate_bits(h, v, i, noise)
            via_e = -np.log2(np.linalg.det(e).real)
            assert abs(direct - via_e) <= 1e-8 * max(abs(direct), 1e-12)


# ---------------------------------------------------------------------------
# physical-scale runs

@pytest.mark.criterion("05 reference run: sum rate never drops, weighted mse never rises")
def test_reference_run_is_monotone(run_p16):
    result, sc = run_p16
    slack = trace_slack(sc)
    rates = [t.sum_rate_internal_bits for t in result.trace]
    wmses = [t.wmse for t in result.trace]
    assert len(rates) == sc.iterations + 1
    for a, b in zip(rates, rates[1:]):
        assert b >= a - slack
    for a, b in zip(wmses, wmses[1:]):
        assert b <= a + slack


@pytest.mark.criterion("06 coupling-aware design beats the unaware mismatched design")
def test_coupling_aware_final_rate_at_least_unaware(runs_p64):
    aware, unaware = runs_p64
    assert aware.sum_rate_bits >= unaware.sum_rate_bits


@pytest.mark.criterion("07 final rate non-decreasing in antenna count")
def test_final_rate_grows_with_antennas(runs_antennas):
    finals = [runs_antennas[n] for n in (1, 2, 3)]
    assert finals[0] <= finals[1] <= finals[2], finals


@pytest.mark.criterion("08 far-field composition matches the exact network reduction")
def test_farfield_matches_exact_reduction(sc_ref):
    sc = sc_ref.replace(nlos=False)
    groups = tuple(build_groups(sc))
    imp = assemble_impedance_set(
        groups,
        sc.wavelength,
        generator_impedance=sc.generator_impedance_ohm,
        load_impedance=sc.load_impedance_ohm,
    )
    bundle = bundle_for_scenario(sc)
    rng = np.random.default_rng(sc.seed)
    ris = RisConfiguration.random_uniform(sc.n_ris, sc.ris_elements, sc.r0_ohm, rng)
    inverses = [ris_inverse(bundle, ris, k) for k in range(sc.n_ris)]
    for i in range(sc.n_pairs):
        for j in range(sc.n_pairs):
            for k in range(sc.n_ris):
                exact = channel_exact(imp, ris, i, j, k)
                far = bundle.direct[(i, j)] - bundle.ris_in[(i, k)] @ inverses[k] @ bundle.ris_out[(k, j)]
                rel = np.linalg.norm(far - exact) / np.linalg.norm(exact)
                assert rel <= 1e-3, f"link ({i},{j}) via surface {k}: {rel}"


@pytest.mark.criterion("09 half-wave dipole self-impedance and block reciprocity")
def test_self_impedance_and_reciprocity(sc_ref):
    lam = sc_ref.wavelength
    dip = DipoleGeometry(
        center=(0.0, 0.0, 0.0),
        length=lam / 2,
        radius=lam / 500,
        axis=(0.0, 0.0, 1.0),
    )
    z = dipole_mutual_impedance(dip, dip, lam)
    ref = 73.0 + 42.0j
    assert abs(z.real - ref.real) <= 0.05 * ref.real
    assert abs(z.imag - ref.imag) <= 0.05 * ref.imag

    groups = tuple(build_groups(sc_ref))
    imp = assemble_impedance_set(
        groups,
        lam,
        generator_impedance=sc_ref.generator_impedance_ohm,
        load_impedance=sc_ref.load_impedance_ohm,
    )
    keys = [(g.kind, g.index) for g in groups]
    for x in keys:
        for y in keys:
            fwd = imp.block(x, y)
            back = imp.block(y, x)
            assert np.abs(fwd - back.T).max() <= 1e-9


@pytest.mark.criterion("10 load real parts and transmit power budgets hold at every iterate")
def test_constraints_hold_on_every_run(run_pool, run_p16, runs_p64, runs_antennas, run_p256):
    assert len(run_pool) >= 6
    for label, result in run_pool:
        assert result.re_deviation_max <= 1e-12, label
        assert result.power_overrun_max <= 1e-9, label


@pytest.mark.criterion("11 tuned dense surface nulls the interfered receiver")
def test_dense_surface_nulls_interfered_receiver(run_p256):
    bundle, result, sc = run_p256
    k = 1  # surface centered between the two receivers' corridor end
    positions = ris_element_positions(sc, k)
    center = np.asarray(sc.ris_centers[k], float)
    for j in range(sc.n_pairs):
        other_rx = np.asarray(sc.pairs[1 - j][1], float)
        d = other_rx - center
        angle = float(np.arctan2(d[1], d[0]))
        excitation = ris_excitation(bundle, result.ris, result.precoders.v, k, j)
        grid = np.linspace(-np.pi / 2, np.pi / 2, 3601)
        pattern = array_factor_db(positions, sc.wavelength, excitation, [angle, *grid])
        toward_interfered = pattern[0]
        peak = pattern.max()
        assert toward_interfered <= peak - 10.0, (
            f"driver {j}: {toward_interfered:.2f} dB vs peak {peak:.2f} dB"
        )

"""Channel composition: exact multiport reduction vs far-field assembly."""

import pathlib
from types import MappingProxyType

import numpy as np
import pytest

from risopt.channel import (
    ChannelBundle,
    RisConfiguration,
    channel_exact,
    channel_farfield_bundle,
    compose_channels,
    end_to_end_channel,
    mcu_impedance_view,
    ris_inverse,
)
from risopt.errors import SingularMatrixError
from risopt.impedance import ImpedanceSet, assemble_impedance_set
from risopt.scenario import build_groups, load_scenario

REFERENCE = pathlib.Path(__file__).resolve().parents[1] / "scenarios" / "reference_network.json"


# ---------------------------------------------------------------------------
# hand-built scalar network (1 tx port, 1 rx port, 1 surface port)

T0, R0K, S0 = ("transmitter", 0), ("receiver", 0), ("ris", 0)


def toy_impedance(entries: dict, sizes: dict, zg=50 + 0j, zl=50 + 0j) -> ImpedanceSet:
    blocks = {}
    for (a, b), m in entries.items():
        arr = np.atleast_2d(np.array(m, dtype=complex))
        blocks[(a, b)] = arr
        if (b, a) not in entries:
            blocks[(b, a)] = arr.T.copy()
    return ImpedanceSet(
        blocks=MappingProxyType(blocks),
        group_sizes=MappingProxyType(dict(sizes)),
        wavelength=1.0,
        generator_impedance=zg,
        load_impedance=zl,
    )


def scalar_network(rng):
    def z():
        return complex(rng.uniform(5, 60), rng.uniform(-40, 40))

    vals = {
        "z_tt": 70 + 40j,
        "z_rr": 65 - 30j,
        "z_ss": 1.5 - 200j,
        "z_rt": z(),
        "z_rs": z(),
        "z_st": z(),
    }
    imp = toy_impedance(
        {
            (T0, T0): vals["z_tt"],
            (R0K, R0K): vals["z_rr"],
            (S0, S0): vals["z_ss"],
            (R0K, T0): vals["z_rt"],
            (R0K, S0): vals["z_rs"],
            (S0, T0): vals["z_st"],
        },
        {T0: 1, R0K: 1, S0: 1},
    )
    return imp, vals


def scalar_exact(vals, b, zg=50 + 0j, zl=50 + 0j):
    """Direct transcription of the two-port reduction for scalar blocks."""
    w = vals["z_ss"] + b
    psi_rr = vals["z_rr"] - vals["z_rs"] ** 2 / w
    psi_rt = vals["z_rt"] - vals["z_rs"] * vals["z_st"] / w
    psi_tt = vals["z_tt"] - vals["z_st"] ** 2 / w
    drive = psi_tt + zg
    front = 1 + psi_rr / zl - psi_rt * psi_rt / (drive * zl)
    return psi_rt / (front * drive)


def test_exact_channel_matches_scalar_formula():
    rng = np.random.default_rng(11)
    imp, vals = scalar_network(rng)
    for x in [-150.0, -3.0, 0.0, 12.5, 400.0]:
        ris = RisConfiguration(r0=0.2, reactances=(np.array([x]),))
        got = channel_exact(imp, ris, 0, 0, 0)
        want = scalar_exact(vals, 0.2 + 1j * x)
        assert got.shape == (1, 1)
        assert got[0, 0] == pytest.approx(want, rel=1e-12)


def test_exact_channel_singular_load_raises():
    # fabricated surface block whose self-impedance the load cancels exactly
    imp = toy_impedance(
        {
            (T0, T0): 70 + 40j,
            (R0K, R0K): 65 - 30j,
            (S0, S0): -0.2 - 200j,
            (R0K, T0): 20 + 5j,
            (R0K, S0): 15 - 8j,
            (S0, T0): 11 + 3j,
        },
        {T0: 1, R0K: 1, S0: 1},
    )
    ris = RisConfiguration(r0=0.2, reactances=(np.array([200.0]),))
    with pytest.raises(SingularMatrixError, match="loaded surface matrix"):
        channel_exact(imp, ris, 0, 0, 0)


# ---------------------------------------------------------------------------
# reference geometry, one surface: far-field assembly vs exact reduction

@pytest.fixture(scope="module")
def single_surface_setup():
    sc = load_scenario(REFERENCE).replace(nlos=False)
    data = {
        "frequency_hz": sc.frequency_hz,
        "pairs": [
            {"tx": [5.0, 20.0, 1.0], "rx": [5.0, 5.0, 1.0]},
            {"tx": [5.0, 10.0, 1.0], "rx": [5.0, 25.0, 1.0]},
        ],
        "ris_centers": [[0.0, 20.0, 2.0]],
        "nlos": False,
        "ris_elements": 16,
    }
    sc = load_scenario(data)
    imp = assemble_impedance_set(tuple(build_groups(sc)), sc.wavelength)
    rng = np.random.default_rng(3)
    ris = RisConfiguration.random_uniform(1, sc.ris_elements, sc.r0_ohm, rng, span=80.0)
    return sc, imp, ris


def test_farfield_matches_exact_on_reference_geometry(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    for i in range(sc.n_pairs):
        for j in range(sc.n_pairs):
            exact = channel_exact(imp, ris, i, j, 0)
            far = end_to_end_channel(bundle, ris, i, j)
            rel = np.linalg.norm(far - exact) / np.linalg.norm(exact)
            assert rel <= 1e-3, f"link ({i},{j}) mismatch {rel:.2e}"
            assert rel > 0  # the two routes are genuinely distinct computations


def test_open_circuit_limit_recovers_direct_path(single_surface_setup):
    sc, imp, _ = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    huge = RisConfiguration(r0=0.2, reactances=(np.full(sc.ris_elements, 1e9),))
    for i in range(sc.n_pairs):
        for j in range(sc.n_pairs):
            h = end_to_end_channel(bundle, huge, i, j)
            d = bundle.direct[(i, j)]
            assert np.linalg.norm(h - d) / np.linalg.norm(d) < 1e-6


def test_nlos_zeroes_direct_but_keeps_surface_paths(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc.replace(nlos=True))
    for key, blk in bundle.direct.items():
        assert np.all(blk == 0)
    h = end_to_end_channel(bundle, ris, 0, 0)
    assert np.linalg.norm(h) > 0


def test_surface_sum_decomposition(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    x0 = ris_inverse(bundle, ris, 0)
    h = end_to_end_channel(bundle, ris, 0, 1)
    manual = bundle.direct[(0, 1)] - bundle.ris_in[(0, 0)] @ x0 @ bundle.ris_out[(0, 1)]
    assert np.allclose(h, manual, rtol=1e-12, atol=0)


def test_compose_channels_matches_per_link(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    inverses = [ris_inverse(bundle, ris, k) for k in range(bundle.n_ris)]
    table = compose_channels(bundle, inverses)
    for i in range(sc.n_pairs):
        for j in range(sc.n_pairs):
            assert np.allclose(table[(i, j)], end_to_end_channel(bundle, ris, i, j), rtol=1e-12)


def test_ris_inverse_identity(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    x = ris_inverse(bundle, ris, 0)
    w = bundle.ris_self[0] + np.diag(ris.vector(0))
    assert np.linalg.norm(x @ w - np.eye(sc.ris_elements)) < 1e-8


def test_zero_surface_network_reduces_to_direct():
    sc = load_scenario(
        {
            "frequency_hz": 28e9,
            "pairs": [{"tx": [5.0, 20.0, 1.0], "rx": [5.0, 5.0, 1.0]}],
            "nlos": False,
        }
    )
    imp = assemble_impedance_set(tuple(build_groups(sc)), sc.wavelength)
    bundle = channel_farfield_bundle(imp, sc)
    assert bundle.n_ris == 0
    ris = RisConfiguration(r0=0.2, reactances=())
    h = end_to_end_channel(bundle, ris, 0, 0)
    assert np.allclose(h, bundle.direct[(0, 0)])
    assert np.linalg.norm(h) > 0


# ---------------------------------------------------------------------------
# coupling-unaware view

def test_mcu_view_diagonalizes_and_is_idempotent(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    view = mcu_impedance_view(bundle)
    assert view.coupling == "diagonal"
    off = view.ris_self[0] - np.diag(np.diag(view.ris_self[0]))
    assert np.all(off == 0)
    assert np.array_equal(np.diag(view.ris_self[0]), np.diag(bundle.ris_self[0]))
    # untouched pieces are shared, not copied
    assert view.direct[(0, 0)] is bundle.direct[(0, 0)]
    assert view.ris_in[(0, 0)] is bundle.ris_in[(0, 0)]
    again = mcu_impedance_view(view)
    assert np.array_equal(again.ris_self[0], view.ris_self[0])


def test_mcu_view_changes_the_channel(single_surface_setup):
    sc, imp, ris = single_surface_setup
    bundle = channel_farfield_bundle(imp, sc)
    view = mcu_impedance_view(bundle)
    h_full = end_to_end_channel(bundle, ris, 0, 0)
    h_diag = end_to_end_channel(view, ris, 0, 0)
    assert np.linalg.norm(h_full - h_diag) > 0


# ---------------------------------------------------------------------------
# tuned-load container

def test_configuration_real_part_is_exact():
    ris = RisConfiguration(r0=0.2, reactances=(np.array([1.0, -2.0, 3.5]),))
    b = ris.vector(0)
    assert np.all(b.real == 0.2)
    assert np.array_equal(b.imag, [1.0, -2.0, 3.5])


def test_configuration_increment_and_immutability():
    ris = RisConfiguration(r0=0.2, reactances=(np.zeros(3), np.ones(3)))
    shifted = ris.with_increment(1, np.array([0.5, -0.5, 0.0]))
    assert np.array_equal(shifted.reactances[1], [1.5, 0.5, 1.0])
    assert np.array_equal(shifted.reactances[0], ris.reactances[0])
    assert np.array_equal(ris.reactances[1], [1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        ris.reactances[0][0] = 9.0


def test_configuration_rejects_bad_inputs():
    with pytest.raises(ValueError):
        RisConfiguration(r0=0.0, reactances=(np.zeros(2),))
    with pytest.raises(ValueError):
        RisConfiguration(r0=0.2, reactances=(np.array([np.nan, 0.0]),))
    with pytest.raises(ValueError):
        RisConfiguration(r0=0.2, reactances=(np.zeros((2, 2)),))


def test_random_configuration_spans_and_seeds():
    rng = np.random.default_rng(5)
    a = RisConfiguration.random_uniform(2, 16, 0.2, rng, span=100.0)
    assert a.n_ris == 2 and a.n_elements == 16
    assert all(np.all(np.abs(x) <= 100.0) for x in a.reactances)
    b = RisConfiguration.random_uniform(2, 16, 0.2, np.random.default_rng(5), span=100.0)
    assert all(np.array_equal(x, y) for x, y in zip(a.reactances, b.reactances))

import mpmath
import numpy as np
import pytest

from subcellsbp.equations import (
    InvalidStateError,
    advection,
    burgers,
    ec_volume_pair_grid,
    entropy,
    entropy_potential,
    entropy_variables,
    euler,
    hll_wave_speeds,
    is_fully_upwind,
    log_mean,
    make_law,
    maxwell,
    numerical_flux,
    physical_flux,
    volume_flux_ec,
)

LAWS = {
    "advection": advection(2.0),
    "burgers": burgers(),
    "maxwell": maxwell(1.0),
    "euler": euler(1.4),
}


def random_states(law, rng, n=100):
    if law.name == "euler":
        rho = 0.5 + rng.random(n)
        vel = rng.standard_normal(n)
        p = 0.5 + rng.random(n)
        return np.column_stack([rho, rho * vel, p / 0.4 + 0.5 * rho * vel**2])
    return rng.standard_normal((n, law.n_vars))


# ---------------------------------------------------------------------------
# physical flux and entropy pairs
# ---------------------------------------------------------------------------

def test_euler_flux_by_hand():
    law = LAWS["euler"]
    assert np.allclose(physical_flux(law, [[1.0, 0.0, 1.0]]), [[0.0, 0.4, 0.0]])


def test_scalar_fluxes():
    assert physical_flux(LAWS["burgers"], [[0.0]])[0, 0] == 0.0
    assert physical_flux(LAWS["advection"], [[3.0]])[0, 0] == 6.0
    assert np.allclose(physical_flux(LAWS["maxwell"], [[2.0, 3.0]]), [[3.0, 2.0]])


def test_euler_rejects_invalid_state():
    with pytest.raises(InvalidStateError, match="invalid thermodynamic state"):
        physical_flux(LAWS["euler"], [[1.0, 0.0, -1.0]])
    with pytest.raises(InvalidStateError):
        physical_flux(LAWS["euler"], [[-1.0, 0.0, 1.0]])


def test_entropy_values():
    assert entropy(LAWS["advection"], [[2.0]])[0] == pytest.approx(2.0)
    law = LAWS["euler"]
    s = np.log(0.4)
    assert entropy(law, [[1.0, 0.0, 1.0]])[0] == pytest.approx(-s / 0.4)


@pytest.mark.parametrize("name", list(LAWS))
def test_entropy_variables_match_finite_differences(name, rng):
    law = LAWS[name]
    for w0 in random_states(law, rng, 5):
        v = entropy_variables(law, w0[None])[0]
        fd = np.zeros(law.n_vars)
        for i in range(law.n_vars):
            h = 1e-6 * (1 + abs(w0[i]))
            wp, wm = w0.copy(), w0.copy()
            wp[i] += h
            wm[i] -= h
            fd[i] = (entropy(law, wp[None])[0] - entropy(law, wm[None])[0]) / (2 * h)
        assert np.max(np.abs(v - fd) / np.maximum(1.0, np.abs(fd))) < 1e-6


# ---------------------------------------------------------------------------
# numerical fluxes
# ---------------------------------------------------------------------------

def godunov_oracle(wl, wr):
    """Exact scalar Riemann flux for the convex flux w^2/2 by brute-force
    extremization over the state interval."""
    grid = np.linspace(min(wl, wr), max(wl, wr), 2001)
    values = 0.5 * grid**2
    return values.min() if wl <= wr else values.max()


def test_godunov_examples_against_oracle(rng):
    law = LAWS["burgers"]
    assert numerical_flux("godunov", law, [[1.0]], [[0.0]])[0, 0] == pytest.approx(0.5)
    assert numerical_flux("godunov", law, [[-1.0]], [[1.0]])[0, 0] == pytest.approx(0.0)
    for _ in range(50):
        wl, wr = rng.standard_normal(2) * 2
        got = numerical_flux("godunov", law, [[wl]], [[wr]])[0, 0]
        assert got == pytest.approx(godunov_oracle(wl, wr), abs=2e-3)


def test_rusanov_advection_reduces_to_upwind():
    law = LAWS["advection"]
    got = numerical_flux("rusanov", law, [[1.0]], [[3.0]])[0, 0]
    assert got == pytest.approx(2.0, abs=1e-14)  # (2+6)/2 - (2/2)(3-1)


def test_hll_consistency():
    law = LAWS["euler"]
    w = np.array([[1.3, 0.4, 2.6]])
    assert np.allclose(numerical_flux("hll", law, w, w), physical_flux(law, w), atol=1e-13)


def test_flux_kind_law_compatibility():
    with pytest.raises(ValueError, match="godunov"):
        numerical_flux("godunov", LAWS["euler"], [[1.0, 0.0, 1.0]], [[1.0, 0.0, 1.0]])
    with pytest.raises(ValueError, match="hll"):
        numerical_flux("hll", LAWS["advection"], [[1.0]], [[1.0]])
    with pytest.raises(ValueError, match="upwind"):
        numerical_flux("upwind", LAWS["maxwell"], [[1.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(ValueError, match="unknown"):
        numerical_flux("roe", LAWS["advection"], [[1.0]], [[1.0]])


@pytest.mark.parametrize("name,kind", [
    ("advection", "upwind"), ("advection", "godunov"), ("advection", "rusanov"),
    ("advection", "central"), ("burgers", "godunov"), ("burgers", "rusanov"),
    ("maxwell", "rusanov"), ("maxwell", "central"), ("euler", "hll"),
    ("euler", "rusanov"), ("euler", "central"),
])
def test_flux_consistency_on_random_states(name, kind, rng):
    law = LAWS[name]
    states = random_states(law, rng, 100)
    got = numerical_flux(kind, law, states, states)
    assert np.max(np.abs(got - physical_flux(law, states))) < 1e-13 * max(1.0, np.max(np.abs(got)))


def test_scalar_advection_fluxes_agree(rng):
    law = LAWS["advection"]
    wl = rng.standard_normal((100, 1))
    wr = rng.standard_normal((100, 1))
    expected = 2.0 * wl
    for kind in ("upwind", "godunov", "rusanov"):
        assert np.max(np.abs(numerical_flux(kind, law, wl, wr) - expected)) < 1e-13


def test_is_fully_upwind_truth_table():
    manufactured = np.array([[2.0, 2.0, 4.0]])
    assert is_fully_upwind("upwind", LAWS["advection"])
    assert is_fully_upwind("godunov", LAWS["burgers"], np.full((4, 1), 1.5))
    assert not is_fully_upwind("godunov", LAWS["burgers"], np.array([[1.0], [-0.5]]))
    assert is_fully_upwind("hll", LAWS["euler"], manufactured)
    subsonic = np.array([[1.0, 0.1, 2.5]])
    assert not is_fully_upwind("hll", LAWS["euler"], subsonic)
    for kind in ("rusanov", "central"):
        for law in LAWS.values():
            assert not is_fully_upwind(kind, law, manufactured)
    assert not is_fully_upwind("upwind", advection(-1.0))


def test_hll_is_exactly_one_sided_when_supersonic():
    law = LAWS["euler"]
    wl = np.array([[2.0, 2.0, 4.0]])
    wr = np.array([[2.1, 2.1, 4.4]])
    s_min, _ = hll_wave_speeds(law, wl, wr)
    assert s_min[0] > 0
    assert np.array_equal(numerical_flux("hll", law, wl, wr), physical_flux(law, wl))


# ---------------------------------------------------------------------------
# entropy-conservative volume flux
# ---------------------------------------------------------------------------

def test_log_mean_against_high_precision():
    mpmath.mp.dps = 50
    for a, b in [(1.0, 2.0), (0.3, 0.30000001), (5.0, 5.0 + 1e-12), (2.0, 2.0)]:
        if a == b:
            expected = a
        else:
            expected = float((mpmath.mpf(a) - mpmath.mpf(b)) / (mpmath.log(a) - mpmath.log(b)))
        assert log_mean(np.array(a), np.array(b)) == pytest.approx(expected, rel=1e-14)


def test_ec_flux_properties(rng):
    law = LAWS["euler"]
    wl = random_states(law, rng, 50)
    wr = random_states(law, rng, 50)
    f = volume_flux_ec(law, wl, wr)
    assert np.max(np.abs(f - volume_flux_ec(law, wr, wl))) == 0.0  # symmetry
    assert np.max(np.abs(volume_flux_ec(law, wl, wl) - physical_flux(law, wl))) < 1e-13
    dv = entropy_variables(law, wr) - entropy_variables(law, wl)
    dpsi = entropy_potential(law, wr) - entropy_potential(law, wl)
    residual = np.abs(np.sum(dv * f, axis=1) - dpsi)
    assert np.max(residual) < 1e-11


def test_pair_grid_kernel_matches_general_flux(rng):
    law = LAWS["euler"]
    wg = random_states(law, rng, 12).reshape(3, 4, 3)
    grid = ec_volume_pair_grid(law, wg)
    direct = volume_flux_ec(law, wg[:, :, None, :], wg[:, None, :, :])
    assert np.array_equal(grid, direct)


def test_make_law_dispatch():
    assert make_law("advection", alpha=3.0).params["alpha"] == 3.0
    assert make_law("maxwell", c=2.0).energy_weights[1] == 4.0
    with pytest.raises(ValueError):
        make_law("elasticity")

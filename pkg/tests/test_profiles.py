"""Radial profiles: quadrature weights, derivatives, extremal integrals."""

import math

import numpy as np
import pytest

from lpentropy.errors import DomainError, OracleDisagreement
from lpentropy.profiles import (
    RadialProfile,
    entropy_integral,
    extremal_integrals,
    extremal_profile,
    extremal_spec,
    grad_energy,
    lp_norm,
    plogp,
    radial_derivative,
    random_stretched_mixture,
)
from lpentropy.special_fn import sphere_area, stretched_exp_moment

PAIRS = [(3, 1.5), (3, 2.0), (4, 2.0)]

# closed gamma-form values at b = 1, frozen from the analytic route
FLAT_INTEGRALS = {
    (3, 1.5): {
        "entropy": -2.0269468501930175,
        "grad_energy": 3.464101615137755,
        "mass_moment2": 0.6889235961592758,
        "grad_moment2": 3.9775022369364277,
        "entropy_moment2": -1.855693910698207,
    },
    (3, 2.0): {
        "entropy": -2.1773740579341836,
        "grad_energy": 3.0,
        "mass_moment2": 0.75,
        "grad_moment2": 3.75,
        "entropy_moment2": -2.3830305434506363,
    },
    (4, 2.0): {
        "entropy": -2.903165410578909,
        "grad_energy": 4.0,
        "mass_moment2": 1.0,
        "grad_moment2": 6.0,
        "entropy_moment2": -3.9031654105789104,
    },
}


def test_cell_measure_exact_for_constants():
    """The weights must integrate constants exactly: that is their invariant."""
    for n in (2, 3, 5):
        grid = np.geomspace(1e-6, 4.0, 5000)
        u = RadialProfile(grid=grid, values=np.ones_like(grid), dimension=n)
        ball = sphere_area(n) * grid[-1] ** n / n
        assert float(np.sum(u.cell_measure())) == pytest.approx(ball, rel=1e-13)


def test_radial_derivative_second_order():
    errs = []
    for m in (2000, 4000):
        g = np.geomspace(0.05, 6.0, m)
        err = np.max(np.abs(radial_derivative(g, np.sin(g)) - np.cos(g)))
        errs.append(err)
    ratio = errs[0] / errs[1]
    assert 3.2 < ratio < 4.8  # second-order scheme halves the step, quarters the error


def test_extremal_profile_is_normalized():
    for n, p in PAIRS:
        for b in (0.5, 1.0, 2.0):
            u = extremal_profile(n, p, b)
            assert lp_norm(u, p) == pytest.approx(1.0, abs=2e-8)


def test_extremal_integrals_frozen_values():
    for (n, p), expected in FLAT_INTEGRALS.items():
        got = extremal_integrals(n, p, 1.0)
        for key, val in expected.items():
            assert getattr(got, key) == pytest.approx(val, rel=1e-12), (n, p, key)
        assert got.max_rel_difference <= 1e-8


def test_saturation_identity_every_rate():
    """entropy = (n/p) ln(constant * grad energy) exactly on the family."""
    from lpentropy.constants import entropy_best_constant

    for n, p in PAIRS:
        a0 = entropy_best_constant(n, p)
        for b in (0.5, 1.0, 2.0, 5.0):
            e = extremal_integrals(n, p, b)
            assert e.entropy == pytest.approx(
                (n / p) * math.log(a0 * e.grad_energy), abs=1e-12
            )


def test_route_disagreement_is_detected():
    # a deliberately starved grid cannot hit an absurdly tight tolerance
    with pytest.raises(OracleDisagreement):
        extremal_integrals(3, 1.5, 1.0, n_nodes=5_000, check_tol=1e-12)


def test_plogp_underflow_guard():
    """u^p ln(u^p) must stay finite when u**p underflows to zero."""
    vals = np.array([0.0, 1e-200, 1e-3, 1.0, 2.0])
    out = plogp(vals, 2.0)
    assert np.all(np.isfinite(out))
    assert out[0] == 0.0
    assert out[3] == 0.0
    assert out[4] == pytest.approx(4.0 * math.log(4.0), rel=1e-12)
    assert out[2] == pytest.approx(1e-6 * math.log(1e-6), rel=1e-12)


def test_profile_validation():
    g = np.geomspace(1e-4, 1.0, 100)
    with pytest.raises(DomainError):
        RadialProfile(grid=g[::-1], values=np.ones(100), dimension=3)
    with pytest.raises(DomainError):
        RadialProfile(grid=g, values=-np.ones(100), dimension=3)
    with pytest.raises(DomainError):
        RadialProfile(grid=g, values=np.ones(100), dimension=1)
    with pytest.raises(DomainError):
        lp_norm(RadialProfile(grid=g, values=np.ones(100), dimension=3), 0.5)


def test_csv_round_trip(tmp_path):
    u = extremal_profile(3, 2.0, 1.0, n_nodes=500)
    path = tmp_path / "profile.csv"
    u.to_csv(path)
    back = RadialProfile.from_csv(path, dimension=3)
    assert np.array_equal(back.grid, u.grid)
    assert np.array_equal(back.values, u.values)


def test_csv_malformed_inputs(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DomainError, match="empty"):
        RadialProfile.from_csv(empty, dimension=3)

    bad_row = tmp_path / "bad.csv"
    bad_row.write_text("r,u\n0.1,0.5\n0.2,oops\n")
    with pytest.raises(DomainError, match="line 3"):
        RadialProfile.from_csv(bad_row, dimension=3)

    short_row = tmp_path / "short.csv"
    short_row.write_text("r,u\n0.1\n")
    with pytest.raises(DomainError):
        RadialProfile.from_csv(short_row, dimension=3)


def test_mixture_seeding_and_positivity():
    rng = np.random.default_rng(123)
    u1 = random_stretched_mixture(3, rng)
    u2 = random_stretched_mixture(3, np.random.default_rng(123))
    assert np.array_equal(u1.values, u2.values)
    assert np.all(u1.values > 0)
    assert u1.dimension == 3
    # mixtures are deliberately unnormalized trial data
    norm = lp_norm(u1, 2.0)
    assert math.isfinite(norm) and norm > 0
    assert u1.values[-1] < 1e-15  # decays to the tail cutoff


def test_entropy_and_grad_consistency():
    """Quadrature operators agree with the closed forms on the extremal."""
    u = extremal_profile(3, 2.0, 1.0)
    ref = extremal_integrals(3, 2.0, 1.0)
    assert entropy_integral(u, 2.0) == pytest.approx(ref.entropy, abs=5e-8)
    assert grad_energy(u, 2.0) == pytest.approx(ref.grad_energy, rel=5e-8)


def test_extremal_spec_shape():
    spec = extremal_spec(3, 2.0, 1.0)
    assert spec.shape_power == pytest.approx(2.0)
    spec = extremal_spec(3, 1.5, 1.0)
    assert spec.shape_power == pytest.approx(3.0)
    r = np.array([0.5, 1.0])
    expected = spec.amplitude * np.exp(-1.0 * r**3.0)
    assert spec.value(r) == pytest.approx(expected, rel=1e-14)


def test_gaussian_norm_and_grad_energy_closed_forms():
    # ||e^{-r^2}||_2 = (pi/2)^{3/4} on R^3; the gradient energy is
    # omega_2 * 4 * int r^4 e^{-2r^2} dr = 3 (pi/2)^{3/2}
    g = np.geomspace(1e-4, 12.0, 400_000)
    u = RadialProfile(g, np.exp(-(g**2)), 3)
    assert lp_norm(u, 2.0) == pytest.approx((math.pi / 2) ** 0.75, rel=1e-8)
    target = 16.0 * math.pi * stretched_exp_moment(4, 2.0, 2.0)
    assert target == pytest.approx(3.0 * (math.pi / 2) ** 1.5, rel=1e-14)
    assert grad_energy(u, 2.0) == pytest.approx(target, rel=1e-8)


def test_extremal_spec_amplitude_normalizes_exactly():
    """The amplitude solves a^p A(S^{n-1}) M = 1 in closed form, not by quadrature."""
    for n, p, b in [(3, 2.0, 1.0), (3, 1.5, 0.5), (4, 2.0, 2.0), (5, 1.2, 1.0)]:
        spec = extremal_spec(n, p, b)
        mom = stretched_exp_moment(n - 1, spec.shape_power, p * b)
        assert spec.amplitude**p * sphere_area(n) * mom == pytest.approx(1.0, abs=1e-13)


def test_entropy_dilation_covariance():
    # the discrete entropy sum shifts by exactly n ln(lam) under
    # u_lam(r) = lam^{n/p} u(lam r), provided the quadrature norm is 1
    u0 = extremal_profile(3, 2.0, 1.0)
    u = RadialProfile(u0.grid, u0.values / lp_norm(u0, 2.0), 3)
    base = entropy_integral(u, 2.0)
    for lam in (0.5, 2.0):
        ul = RadialProfile(u.grid / lam, lam ** (3 / 2.0) * u.values, 3)
        gap = entropy_integral(ul, 2.0) - base - 3 * math.log(lam)
        assert abs(gap) <= 1e-8

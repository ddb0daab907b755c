import numpy as np
import pytest
from scipy.integrate import quad

from psido.grid import make_grid, random_bandlimited, sample
from psido.sobolev import (SobolevSpec, bessel_potential, gaussian_family, hs_norm,
                           norm_equivalence_probe, wmp_norm)


@pytest.fixture(scope="module")
def g():
    return make_grid(8.0, 512)


@pytest.fixture(scope="module")
def gauss(g):
    return sample(g, lambda t: np.exp(-np.pi * t[..., 0] ** 2))


def test_bessel_two_on_gaussian(g, gauss):
    t = g.t1
    expected = (1 + 2 * np.pi - 4 * np.pi ** 2 * t ** 2) * np.exp(-np.pi * t ** 2)
    assert np.max(np.abs(bessel_potential(gauss, 2).values - expected)) <= 1e-6


def test_bessel_group_law(g):
    f = random_bandlimited(g, 1, 8)[0]
    assert np.max(np.abs(bessel_potential(bessel_potential(f, 3), -3).values - f.values)) <= 1e-9
    twice = bessel_potential(bessel_potential(f, 1), 1)
    assert np.max(np.abs(twice.values - bessel_potential(f, 2).values)) <= 1e-9
    assert np.array_equal(bessel_potential(f, 0).values, f.values)


def test_bessel_overflow_guard(gauss):
    with pytest.raises(ValueError, match="overflow"):
        bessel_potential(gauss, 17)


@pytest.mark.parametrize("s,r", [(0.0, 1.0), (1.0, 2.0), (-1.0, 1.5), (0.5, -2.0)])
def test_lifting(g, s, r):
    f = random_bandlimited(g, 1, 21)[0]
    lhs = hs_norm(bessel_potential(f, r), s, weight="bessel")
    assert lhs == pytest.approx(hs_norm(f, s + r, weight="bessel"), rel=1e-6)


def test_h0_is_l2(g):
    for f in random_bandlimited(g, 3, 4):
        assert hs_norm(f, 0.0) / f.l2_norm() == pytest.approx(1.0, abs=1e-8)


def test_h1_gaussian_quadrature_oracle(gauss):
    ref = np.sqrt(quad(lambda x: (1 + x * x) * np.exp(-2 * np.pi * x * x), -np.inf, np.inf)[0])
    assert hs_norm(gauss, 1.0) == pytest.approx(ref, abs=1e-6)


def test_hs_norm_monotone_in_s(gauss):
    vals = [hs_norm(gauss, s) for s in (-1, 0, 0.5, 1, 2)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_w12_matches_euclidean(g):
    f = sample(g, lambda t: np.sin(t[..., 0]) * np.exp(-t[..., 0] ** 2))

    def integrand(t):
        u = np.sin(t) * np.exp(-t ** 2)
        du = (np.cos(t) - 2 * t * np.sin(t)) * np.exp(-t ** 2)
        return u ** 2 + du ** 2

    ref = np.sqrt(quad(integrand, -np.inf, np.inf)[0])
    assert wmp_norm(f, 1, 2) == pytest.approx(ref, abs=1e-6)


def test_wmp_norm_basics(g, gauss):
    assert wmp_norm(gauss, 0, 3) == pytest.approx(gauss.lp_norm(3))
    assert wmp_norm(2 * gauss, 2, 2) == pytest.approx(2 * wmp_norm(gauss, 2, 2))
    with pytest.raises(ValueError):
        wmp_norm(gauss, 5)


def test_equivalence_gaussian_family():
    assert norm_equivalence_probe(m=1).verdict == "equivalent"
    assert norm_equivalence_probe(m=2, weight="bessel").verdict == "equivalent"
    rep = norm_equivalence_probe(m=0)
    assert max(abs(r - 1) for row in rep.ratios for r in row) <= 1e-8


def test_equivalence_standard_weight_second_order_leaves_bracket():
    # the constant relating (1 + xi^2)^2 to 1 + (2 pi xi)^2 + (2 pi xi)^4 is 1/(4 pi^2)
    rep = norm_equivalence_probe(m=2)
    assert 1 / (4 * np.pi ** 2) < min(rep.ratios[-1]) < 0.1
    assert rep.verdict == "not-established"


def test_equivalence_skips_zero_members():
    fam = gaussian_family()[:19] + [lambda t: np.zeros(t.shape[:-1])]
    rep = norm_equivalence_probe(fam, m=1)
    assert rep.skipped == [19] and rep.verdict == "equivalent"
    with pytest.raises(ValueError):
        norm_equivalence_probe(fam[:5])


def test_scaling_invariance_of_ratio(g, gauss):
    r1 = hs_norm(gauss, 1) / wmp_norm(gauss, 1)
    r2 = hs_norm(3 * gauss, 1) / wmp_norm(3 * gauss, 1)
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_sobolev_spec(gauss):
    with pytest.raises(ValueError):
        SobolevSpec(1.5, flavor="integer-W")
    with pytest.raises(ValueError):
        SobolevSpec(1, p=1.0)
    assert SobolevSpec(1, flavor="integer-W").norm(gauss) == pytest.approx(wmp_norm(gauss, 1))
    assert SobolevSpec(1).norm(gauss) == pytest.approx(hs_norm(gauss, 1, weight="bessel"))
    # bessel flavor at p = 2 agrees with the L^2 norm of the potential
    assert SobolevSpec(1, p=2).norm(gauss) == pytest.approx(bessel_potential(gauss, 1).l2_norm(), rel=1e-10)
    assert SobolevSpec(1, p=4).norm(gauss) > 0

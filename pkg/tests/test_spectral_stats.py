import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from steposc import spectral_stats as ss
from steposc.errors import DomainError
from steposc.potentials import PotentialSpec, StepRegion
from steposc.semiclassics import inverse_weyl, volume_function, weyl_count


def test_reference_values():
    assert ss.reference_cdf("semi-poisson", 1.0) == pytest.approx(1 - 3 * math.exp(-2), abs=1e-12)
    assert ss.reference_cdf("goe", 1.0) == pytest.approx(1 - math.exp(-math.pi / 4), abs=1e-12)
    assert ss.reference_cdf("poisson", 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    for law in ss.LAWS:
        assert ss.reference_cdf(law, 0.0) == 0.0


@pytest.mark.parametrize("law", ss.LAWS)
def test_pdf_normalized(law):
    val, _ = integrate.quad(lambda s: ss.reference_pdf(law, s), 0, np.inf, epsabs=1e-13)
    assert val == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("law", ss.LAWS)
def test_cdf_is_integral_of_pdf(law):
    for s in (0.3, 1.0, 2.7):
        val, _ = integrate.quad(lambda x: ss.reference_pdf(law, x), 0, s, epsabs=1e-14)
        assert ss.reference_cdf(law, s) == pytest.approx(val, abs=1e-12)


def test_negative_spacing_rejected():
    with pytest.raises(DomainError):
        ss.reference_cdf("poisson", -0.1)


def test_ks_all_ones():
    s = np.ones(100)
    assert ss.ks_distance(s, "poisson") == pytest.approx(math.exp(-1), abs=1e-12)


@pytest.mark.parametrize("law", ss.LAWS)
def test_ks_two_sided_matches_scipy(law, rng):
    s = ss.sample_spacings(law, 500, rng)
    ref = stats.kstest(s, lambda x: ss.reference_cdf(law, np.maximum(x, 0))).statistic
    assert ss.ks_distance(s, law, "two-sided") == pytest.approx(ref, abs=1e-14)
    assert ss.ks_distance(s, law) <= ref + 1e-15


@pytest.mark.parametrize("law", ss.LAWS)
def test_self_sample_close(law):
    worst = max(ss.ks_distance(ss.sample_spacings(law, 10_000, np.random.default_rng(k)), law)
                for k in range(20))
    assert worst < 0.02


@pytest.mark.parametrize("law", ss.LAWS)
def test_synthetic_best_law(law, rng):
    s = ss.sample_spacings(law, 4000, rng)
    assert ss.best_law(s) == law


def test_uniform_ladder_unfolds_to_ones():
    sample = ss.spacing_sample(3.0 + 0.37 * np.arange(200), trim=0.0)
    np.testing.assert_allclose(sample.spacings, 1.0, rtol=1e-12)


def test_poisson_process_unfolded(rng):
    levels = np.cumsum(rng.exponential(0.3, 3000))
    sample = ss.spacing_sample(levels)
    assert sample.mean == pytest.approx(1.0, rel=1e-12)
    assert ss.best_law(sample) == ss.POISSON


def test_trim_and_window():
    sample = ss.spacing_sample(np.arange(100.0), trim=0.1)
    assert sample.window["index"] == [11, 100]
    assert len(sample) == 89


def test_weyl_unfolding_of_exact_levels():
    V = PotentialSpec.harmonic(1.0)
    vol = volume_function(V, V, StepRegion())
    # N(E) = 3 E^2 / 8 for this case, inverted in closed form
    levels = np.sqrt(8.0 * (np.arange(120) + 0.5) / 3.0)
    assert inverse_weyl(10.5, vol, 50.0) == pytest.approx(levels[10], rel=1e-9)
    x = ss.unfold(levels, "weyl", volume=vol)
    np.testing.assert_allclose(np.diff(x), 1.0, rtol=1e-8)


def test_polynomial_unfolding_mean_one(rng):
    levels = np.sort(rng.uniform(0, 10, 400)) ** 1.5
    x = ss.unfold(levels, "polynomial", degree=3)
    assert np.mean(np.diff(x)) == pytest.approx(1.0)


def test_duplicates_need_collapse():
    lv = np.array([1.0, 2.0, 2.0, 3.0, 4.0, 4.0, 4.0, 5.0])
    with pytest.raises(DomainError):
        ss.spacing_sample(lv, trim=0.0)
    s = ss.spacing_sample(lv, trim=0.0, collapse=True, degeneracy_tol=1e-9)
    np.testing.assert_allclose(s.spacings, 1.0)


def test_unsorted_rejected():
    with pytest.raises(DomainError):
        ss.unfold([1.0, 3.0, 2.0])


def test_degeneracy_count():
    rep = ss.degeneracy_count([1.0, 2.0, 2.0 + 1e-12, 3.0, 3.0, 3.0], 1e-9)
    assert rep.multiplicities.tolist() == [1, 2, 3]
    assert rep.multiplicity_at(3.0) == 3
    assert rep.multiplicity_at(7.0) == 0


def test_histogram_needs_50():
    with pytest.raises(DomainError):
        ss.spacing_distribution(np.ones(49))
    d = ss.spacing_distribution(np.linspace(0.1, 3.9, 400))
    assert np.sum(d.pdf * np.diff(d.edges)) == pytest.approx(1.0)


def test_ecdf_unit_step():
    s = np.ones(60)
    d = ss.spacing_distribution(s)
    np.testing.assert_allclose(ss.ecdf(s, [0.999, 1.0, 1.001]), [0.0, 1.0, 1.0])
    assert d.cdf[-1] == 1.0


def test_weyl_check_exact_levels():
    V = PotentialSpec.harmonic(1.0)
    vol = volume_function(V, V, StepRegion())
    levels = np.sqrt(8.0 * (np.arange(110) + 1.0) / 3.0)
    wc = ss.weyl_check(levels, lambda e: weyl_count(e, vol))
    np.testing.assert_allclose(wc.ratio, 1.0, rtol=1e-8)
    with pytest.raises(DomainError):
        ss.weyl_check(levels[:50], lambda e: weyl_count(e, vol))


def test_summary_fields(rng):
    sample = ss.spacing_sample(np.cumsum(rng.exponential(1.0, 200)))
    d = ss.spacing_summary(sample, 200)
    assert set(d) >= {"ks_poisson", "ks_sp", "ks_goe", "n_levels", "window", "unfolding"}
    rows = ss.spacing_table(sample)
    assert len(rows[0]) == len(ss.SPACING_HEADER)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 100.0, allow_nan=False), min_size=3, max_size=60, unique=True))
def test_mean_spacing_unfolding_property(xs):
    E = np.sort(np.array(xs))
    if np.min(np.diff(E)) <= 1e-9 * (E[-1] - E[0] + 1):
        return
    x = ss.unfold(E)
    assert np.mean(np.diff(x)) == pytest.approx(1.0, rel=1e-12)
    assert np.all(np.diff(x) > 0)

import math

import numpy as np
import pytest

from steposc import wavefn as wf
from steposc.errors import DomainError, GridMismatchError
from steposc.potentials import PotentialSpec, StepRegion

SQRT2 = math.sqrt(2.0)

# n_oo / (3/4 n_all) from enumerating the harmonic ladders of omega = (1, sqrt 2)
FRACTION_ORACLE = {20: 0.29314420803782504, 30: 0.3070452155625657, 40: 0.31386430678466076,
                   50: 0.3171007927519819, 60: 0.319706498951782, 80: 0.32360742705570295}


@pytest.fixture(scope="module")
def products(small_step_spectrum, harmonic_11, origin):
    V1, V2 = harmonic_11
    g = small_step_spectrum.grid
    s1, s2 = wf.axis_spectra(V1, V2, g)
    return wf.product_states(s1, s2, float(small_step_spectrum.eigenvalues[-1]), g, origin)


def test_product_energies_in_spectrum(products, small_step_spectrum):
    ev = small_step_spectrum.eigenvalues
    assert products, "expected product states below the top level"
    for p in products:
        assert np.min(np.abs(ev - p.energy)) < 1e-8


def test_product_fields_are_eigenfunctions(products, small_step_spectrum):
    ham = small_step_spectrum.hamiltonian
    for p in products:
        assert wf.field_residual(ham, p.field, p.energy) < 1e-8


def test_product_lies_in_its_cluster(products, small_step_spectrum):
    # omega = (1, 1) is resonant: a product may mix with other states of equal energy,
    # but its weight stays inside the degenerate cluster
    sp = small_step_spectrum
    ham = sp.hamiltonian
    for p in products:
        c = (ham.from_field(p.field) @ sp.vectors) * ham.grid.cell_area
        near = np.abs(sp.eigenvalues - p.energy) < 1e-6
        assert np.sum(c[near] ** 2) == pytest.approx(1.0, abs=1e-8)
    best, which = wf.match_products(sp, products)
    assert best.shape == (len(sp),) and np.all(best <= 1.0 + 1e-12)


def test_products_need_origin(harmonic_11, small_step_spectrum):
    V1, V2 = harmonic_11
    s1, s2 = wf.axis_spectra(V1, V2, small_step_spectrum.grid)
    with pytest.raises(DomainError):
        wf.product_states(s1, s2, 10.0, small_step_spectrum.grid, StepRegion(-1.0, 0.0))


def test_fraction_prediction_matches_enumeration(harmonic_1r2, origin):
    V1, V2 = harmonic_1r2
    for E, f in FRACTION_ORACLE.items():
        assert wf.concentrated_fraction_prediction(V1, V2, origin, E).fraction == pytest.approx(f, rel=1e-12)


def test_fraction_tends_to_one_third(harmonic_1r2, origin):
    V1, V2 = harmonic_1r2
    dev = [abs(wf.concentrated_fraction_prediction(V1, V2, origin, E).fraction - 1 / 3)
           for E in (20, 40, 60, 120, 240)]
    assert all(a > b for a, b in zip(dev, dev[1:]))
    big = wf.concentrated_fraction_prediction(V1, V2, origin, 400.0)
    assert big.smooth_odd_odd_fraction == pytest.approx(0.25, abs=0.01)


def test_wkb_profile():
    V = PotentialSpec.harmonic(1.0)
    prof = wf.wkb_profile(V, 4.5, [0.0, 1.0, 4.0])
    assert prof.amplitude[0] == pytest.approx(9.0 ** -0.25)
    assert prof.amplitude[2] < prof.amplitude[1]
    with pytest.raises(DomainError):
        wf.wkb_profile(V, 4.5, [3.0])  # V = E at the turning point
    loose = wf.wkb_profile(V, 4.5, [3.0], strict=False)
    assert np.isnan(loose.amplitude[0])


def test_overlaps_identity(small_step_spectrum):
    C = wf.overlap_matrix(small_step_spectrum, small_step_spectrum)
    np.testing.assert_allclose(C, np.eye(len(small_step_spectrum)), atol=1e-10)
    fields = wf.fields_from_spectrum(small_step_spectrum, [1, 2, 3])
    c = wf.overlap_coefficients(fields[1], fields)
    np.testing.assert_allclose(c, [0, 1, 0], atol=1e-10)


def test_overlap_grid_mismatch(small_step_spectrum, small_smooth_spectrum):
    with pytest.raises(GridMismatchError):
        wf.overlap_matrix(small_step_spectrum, small_smooth_spectrum)


def test_mixing_zero_field(small_step_spectrum):
    rep = wf.mixing_metrics(small_step_spectrum, small_step_spectrum, N=5, dN=10, J=40,
                            ref_index=30)
    assert rep.P == pytest.approx(1.0, abs=1e-6)
    assert rep.T == pytest.approx(1.0, abs=1e-6)
    assert rep.x_scaled == 0.0
    assert rep.captured_mass_min == pytest.approx(1.0, abs=1e-9)


def test_mixing_degenerate_rotation():
    # a 45 degree rotation inside a doubly degenerate pair keeps P = 1 under span projection
    c = 1 / math.sqrt(2)
    C = np.array([[c, -c, 0], [c, c, 0], [0, 0, 1.0]])
    P, T, captured = wf.mixing_from_overlaps(C, np.array([1.0, 1.0, 2.0]), delta=0.01)
    assert P == pytest.approx(1.0)
    assert T == pytest.approx(5 / 3)


def test_mixing_needs_levels(small_step_spectrum):
    with pytest.raises(DomainError):
        wf.mixing_metrics(small_step_spectrum, small_step_spectrum, N=35, dN=10, J=40,
                          ref_index=30)


def test_smooth_ground_state(small_smooth_spectrum, harmonic_1r2):
    V1, V2 = harmonic_1r2
    psi = wf.fields_from_spectrum(small_smooth_spectrum, [1])[0]
    MH, MV = wf.marginal_means(psi)
    assert MV.argmax == 0.0 and MH.argmax == 0.0
    assert MV.integral() == pytest.approx(1.0, rel=1e-10)
    rep = wf.e_tilde(psi, V1, V2)
    assert rep.e_tilde == 0.0
    assert rep.label == "delocalized"


def test_argmax_prefers_outer():
    q = np.array([-2.0, -1.0, 0.0, 1.0, 1.5])
    m = np.array([0.0, 1.0, 0.5, 0.2, 1.0])
    assert q[wf.argmax_outer(q, m)] == -1.0 or q[wf.argmax_outer(q, m)] == 1.5
    assert q[wf.argmax_outer(q, m)] == 1.5


def test_census(small_step_spectrum, harmonic_11, products):
    V1, V2 = harmonic_11
    census = wf.concentration_census(small_step_spectrum, (21, 40), V1, V2, products=products)
    assert len(census.reports) == 20
    assert census.product_fraction is not None
    d = census.reports[0].as_dict()
    assert set(d) >= {"n", "E", "e_tilde", "argmax_q1", "argmax_q2", "label"}
    with pytest.raises(DomainError):
        wf.concentration_census(small_step_spectrum, (30, 41), V1, V2)


def test_log_density():
    f = np.array([[0.0, -2.0], [1.0, 0.5]])
    out = wf.log_density_export(f)
    assert out[0, 1] == pytest.approx(math.log(4.0))
    with pytest.raises(DomainError):
        wf.log_density_export(np.zeros((3, 3)))

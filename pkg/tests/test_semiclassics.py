import math

import numpy as np
import pytest

from steposc.errors import DomainError
from steposc.potentials import PotentialSpec, StepRegion
from steposc.semiclassics import (ebk_action, ebk_ladder, ebk_level, families, family,
                                  harmonic_phase_volume, inverse_weyl, phase_volume,
                                  solve_ebk, volume_function, weyl_count, weyl_curve)

SQRT2 = math.sqrt(2.0)

# Monte-Carlo volume of {H <= 8} outside the step, omega = (1, sqrt 2), walls (-1, -1):
# 2e7 uniform samples in the bounding box, numpy seed 12345
MC_VOLUME = 840.7399615124918
MC_SIGMA = 0.2939557237241668


def h(omega):
    return PotentialSpec.harmonic(omega)


def test_ladder_closed_forms():
    assert ebk_level(0, 1, "single") == pytest.approx(5 / 3, rel=1e-15)
    assert ebk_level(0, 2, "I") == pytest.approx(1.25, rel=1e-15)
    assert ebk_level(3, 1, "single") == pytest.approx(2 * 3 / 3 + 5 / 3)


def test_ladder_label_errors():
    with pytest.raises(DomainError):
        ebk_level(0, 1, "I")
    with pytest.raises(DomainError):
        ebk_level(0, 2, "single")
    with pytest.raises(DomainError):
        ebk_level(-1, 1, "single")


def test_direct_presentation_scales_by_m():
    inv = ebk_ladder(2, "II", 5, "inverse").energies
    direct = ebk_ladder(2, "II", 5, "direct").energies
    np.testing.assert_allclose(direct, 2 * inv)


def test_ebk_action_m1():
    V = h(1.0)
    for E in (1.0, 4.0, 9.5):
        assert ebk_action(E / 2, E / 2, family(1, "single"), V, V) == pytest.approx(1.5 * E)


def test_ebk_action_smooth_torus():
    from steposc.semiclassics import EbkFamily
    V1, V2 = h(1.0), h(SQRT2)
    fam = EbkFamily((2, 2), (0, 0), "torus")
    assert ebk_action(2.0, 3.0, fam, V1, V2) == pytest.approx(2.0 + 3.0 / SQRT2)


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_quantization_reproduces_ladders(m):
    """Root finding on the action condition gives the closed-form ladders."""
    V1, V2 = h(1.0), h(1.0 / m)
    for fam in families(m):
        for n in range(6):
            for split in (0.3, 0.5, 0.7):
                E = solve_ebk(n, fam, V1, V2, split=split)
                assert E == pytest.approx(ebk_level(n, m, fam.label), abs=1e-10)


def test_volume_origin_closed_form():
    V = h(1.0)
    assert phase_volume(1.0, V, V) == pytest.approx(3 * math.pi ** 2 / 2, rel=1e-6)
    for w2, E in ((2.0, 3.0), (SQRT2, 7.0)):
        smooth = 2 * math.pi ** 2 * E ** 2 / w2
        assert phase_volume(E, V, h(w2)) == pytest.approx(0.75 * smooth, rel=1e-6)


def test_volume_monte_carlo():
    vol = phase_volume(8.0, h(1.0), h(SQRT2), StepRegion(-1.0, -1.0))
    assert abs(vol - MC_VOLUME) < 3 * MC_SIGMA


def test_harmonic_volume_monte_carlo():
    vol = harmonic_phase_volume(8.0, h(1.0), h(SQRT2), StepRegion(-1.0, -1.0))
    assert abs(vol - MC_VOLUME) < 3 * MC_SIGMA


@pytest.mark.parametrize("E,V1,V2,step", [
    (1.0, h(1.0), h(1.0), StepRegion()),
    (6.0, PotentialSpec.harmonic(1.0, 0.5), PotentialSpec.harmonic(SQRT2, 0.25), StepRegion()),
    (9.0, PotentialSpec.harmonic(1.0, 1.5), PotentialSpec.harmonic(SQRT2, 0.75),
     StepRegion(-0.3, -0.2)),
    (2.0, h(1.0), h(1.0), StepRegion(-5.0, -5.0)),
])
def test_harmonic_volume_matches_action_quadrature(E, V1, V2, step):
    assert harmonic_phase_volume(E, V1, V2, step) == pytest.approx(
        phase_volume(E, V1, V2, step, rtol=1e-10), rel=1e-10)


def test_harmonic_volume_rejects_tabulated():
    V = PotentialSpec.from_function(lambda q: q ** 4, 3.0)
    with pytest.raises(DomainError):
        harmonic_phase_volume(1.0, V, V)


def test_volume_without_walls_reached():
    # walls too far to be reached: full ellipsoid volume
    V = h(1.0)
    vol = phase_volume(2.0, V, V, StepRegion(-5.0, -5.0))
    assert vol == pytest.approx(2 * math.pi ** 2 * 4.0, rel=1e-6)


def test_weyl_count():
    V = h(1.0)
    vol = volume_function(V, V)
    assert weyl_count(0.0, vol) == 0.0
    assert weyl_count(1.0, vol) == pytest.approx(3 / 8, rel=1e-6)
    curve = weyl_curve([2.0, 4.0], V, h(2.0))
    np.testing.assert_allclose(curve, [3 * 4 / 16, 3 * 16 / 16], rtol=1e-6)


def test_inverse_weyl():
    V = h(1.0)
    vol = volume_function(V, V)
    E = inverse_weyl(100.0, vol, 100.0)
    assert weyl_count(E, vol) == pytest.approx(100.0, rel=1e-9)
    assert E == pytest.approx(math.sqrt(100 * 8 / 3), rel=1e-6)

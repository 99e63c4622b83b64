import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from innerlab.measures import (
    TAU,
    CantorComponent,
    CircleMeasure,
    GapList,
    Interval,
    bc_entropy,
    delta,
    full_circle,
    harmonic_measure_of_arc,
    herglotz_transform,
    interval_mass,
    is_beurling_carleson,
    merge,
    middle_thirds_cantor,
    modulus_of_continuity,
    poisson_extension,
    restrict_scaled,
    total_mass,
    wrap_angle,
)


# -- strategies -------------------------------------------------------------

angles = st.floats(min_value=0.0, max_value=TAU - 1e-9, allow_nan=False)
masses = st.floats(min_value=0.0, max_value=5.0, allow_nan=False)


@st.composite
def atomic_measures(draw, max_atoms=6):
    n = draw(st.integers(min_value=0, max_value=max_atoms))
    used = set()
    atoms = []
    for _ in range(n):
        a = draw(angles)
        if a in used:
            continue
        used.add(a)
        atoms.append((a, draw(masses)))
    return CircleMeasure(atoms=tuple(atoms))


# -- total_mass -------------------------------------------------------------


def test_total_mass_zero_case():
    assert total_mass(CircleMeasure()) == 0.0


def test_total_mass_single_atom():
    assert total_mass(delta(0.0, 0.3)) == pytest.approx(0.3, abs=0)


def test_total_mass_additivity():
    mu = CircleMeasure(
        atoms=((0.0, 0.3),),
        cantor_parts=(CantorComponent(full_circle(), 1 / 3, 6, 0.7),),
    )
    assert total_mass(mu) == pytest.approx(1.0, abs=1e-15)


# -- interval_mass ----------------------------------------------------------


def test_atom_inside_interval():
    mu = delta(0.0, 1.0)
    assert interval_mass(mu, Interval(-0.1, 0.2)) == pytest.approx(1.0)


def test_atom_outside_interval():
    mu = delta(0.0, 1.0)
    assert interval_mass(mu, Interval(0.5, 0.5)) == 0.0


def test_cantor_left_third_carries_half_the_mass():
    # self-similarity oracle: each child of the construction carries half
    mu = middle_thirds_cantor(1.0, Interval(0.0, 1.0), depth=12)
    assert interval_mass(mu, Interval(0.0, 1.0 / 3.0)) == pytest.approx(0.5, abs=1e-9)


def test_interval_mass_half_open_endpoints():
    mu = delta(1.0, 2.0)
    assert interval_mass(mu, Interval(1.0, 0.5)) == pytest.approx(2.0)
    assert interval_mass(mu, Interval(0.5, 0.5)) == 0.0


@given(atomic_measures(), st.integers(min_value=1, max_value=8), st.floats(0.0, TAU - 1e-6))
@settings(max_examples=60, deadline=None)
def test_partition_additivity_atomic(mu, k, offset):
    cuts = np.sort(np.mod(offset + np.linspace(0.0, TAU, k, endpoint=False), TAU))
    # endpoint genericity: push cuts off atom angles (documented nudge convention)
    for a, _ in mu.atoms:
        cuts[np.abs(cuts - a) < 1e-9] += 2e-9
    lengths = np.diff(np.concatenate([cuts, [cuts[0] + TAU]]))
    pieces = [
        interval_mass(mu, Interval(s, l)) for s, l in zip(cuts, lengths) if l > 0
    ]
    assert sum(pieces) == pytest.approx(total_mass(mu), abs=1e-12)


def test_partition_additivity_cantor():
    mu = middle_thirds_cantor(1.0, Interval(0.3, 2.0), depth=10)
    cuts = np.linspace(0.0, TAU, 17, endpoint=False)
    got = sum(interval_mass(mu, Interval(s, TAU / 17)) for s in cuts)
    assert got == pytest.approx(1.0, abs=1e-6)


# -- modulus of continuity ----------------------------------------------------


def test_modulus_single_atom_always_captured():
    mu = delta(2.0, 1.0)
    for t in (0.01, 0.5, 3.0):
        assert modulus_of_continuity(mu, t) == pytest.approx(1.0)


def test_modulus_two_antipodal_atoms():
    mu = CircleMeasure(atoms=((0.0, 0.5), (math.pi, 0.5)))
    assert modulus_of_continuity(mu, 0.1) == pytest.approx(0.5)


def test_modulus_cantor_third_window():
    # brute-force-by-anchoring oracle at depth >= 10: best window is a child cell
    mu = middle_thirds_cantor(1.0, Interval(0.0, 1.0), depth=11)
    got = modulus_of_continuity(mu, 1.0 / 3.0)
    assert got == pytest.approx(0.5, abs=1e-9)


@given(atomic_measures(), st.floats(1e-3, 1.0), st.floats(1.0, 3.0))
@settings(max_examples=40, deadline=None)
def test_modulus_monotone_in_t(mu, t1, scale):
    t2 = min(t1 * scale, TAU)
    m1 = modulus_of_continuity(mu, t1)
    m2 = modulus_of_continuity(mu, t2)
    assert m2 >= m1 - 1e-12


# -- Poisson extension --------------------------------------------------------


def test_poisson_mean_value_property():
    rng = np.random.default_rng(7)
    for _ in range(100):
        n = rng.integers(0, 4)
        atoms = tuple((rng.uniform(0, TAU), rng.uniform(0, 2)) for _ in range(n))
        parts = ()
        if rng.random() < 0.5:
            parts = (
                CantorComponent(
                    Interval(rng.uniform(0, TAU), rng.uniform(0.1, TAU)),
                    rng.uniform(0.2, 0.8),
                    6,
                    rng.uniform(0, 2),
                ),
            )
        mu = CircleMeasure(atoms=atoms, cantor_parts=parts)
        assert poisson_extension(mu, 0.0) == pytest.approx(total_mass(mu), abs=1e-10)


def test_poisson_atom_closed_forms():
    assert poisson_extension(delta(0.0, 1.0), 0.5) == pytest.approx(3.0, abs=1e-14)
    assert poisson_extension(delta(math.pi, 1.0), 0.5) == pytest.approx(1 / 3, abs=1e-14)


def test_poisson_positive_and_rejects_boundary():
    mu = delta(1.0, 0.5)
    rng = np.random.default_rng(3)
    for _ in range(50):
        z = rng.uniform(-0.7, 0.7) + 1j * rng.uniform(-0.7, 0.7)
        assert poisson_extension(mu, z) > 0.0
    with pytest.raises(ValueError):
        poisson_extension(mu, 1.0 + 0j)


def test_harmonic_measure_against_quadrature():
    from scipy.integrate import quad

    z = 0.3 + 0.2j
    f = lambda th: (1 - abs(z) ** 2) / abs(np.exp(1j * th) - z) ** 2 / TAU
    assert harmonic_measure_of_arc(z, 1.0, 1.5) == pytest.approx(
        quad(f, 1.0, 2.5)[0], abs=1e-12
    )
    assert harmonic_measure_of_arc(z, 5.0, 2.5) == pytest.approx(
        quad(f, 5.0, 7.5)[0], abs=1e-12
    )


def test_herglotz_real_part_is_poisson():
    mu = CircleMeasure(
        atoms=((0.3, 0.4),),
        cantor_parts=(CantorComponent(Interval(2.0, 1.5), 0.4, 8, 0.6),),
    )
    for z in (0.2 + 0.1j, -0.5j, 0.7):
        h = herglotz_transform(mu, z)
        assert h.real == pytest.approx(poisson_extension(mu, z), abs=1e-10)


# -- entropy / Beurling-Carleson ----------------------------------------------


def test_entropy_single_gap():
    g = GapList(gaps=(Interval(0.0, TAU / math.e),), covered_total=TAU / math.e)
    assert bc_entropy(g) == pytest.approx(1 / math.e, abs=1e-12)


def test_entropy_no_gaps():
    assert bc_entropy(GapList(gaps=(), covered_total=0.0)) == 0.0


def test_entropy_middle_thirds_series():
    # geometric-series oracle: sum over n of n * 2^(n-1) * 3^-n * log 3 = 3 log 3
    oracle = 0.0
    for n in range(1, 301):
        oracle += 2 ** (n - 1) * 3.0 ** (-n) * n * math.log(3.0)
    part = CantorComponent(full_circle(), 1 / 3, 14, 1.0)
    got = bc_entropy(part.gap_list())
    assert got == pytest.approx(oracle, rel=1e-9)
    assert got == pytest.approx(3 * math.log(3), rel=1e-9)


def test_is_beurling_carleson_cases():
    part = CantorComponent(full_circle(), 1 / 3, 10, 1.0)
    ok, _ = is_beurling_carleson(part.gap_list())
    assert ok
    # single point: complement is one arc of (normalized) length 1
    ok1, e1 = is_beurling_carleson(GapList(gaps=(Interval(0.0, TAU),), covered_total=TAU))
    assert ok1 and e1 == pytest.approx(0.0)
    ok2, _ = is_beurling_carleson(
        GapList(gaps=(Interval(0.0, 1.0),), covered_total=1.0, tail_bound=math.inf)
    )
    assert not ok2


# -- restriction / merge -------------------------------------------------------


def test_restrict_conserves_mass_with_complement():
    mu = CircleMeasure(
        atoms=((0.1, 0.2), (4.0, 0.5)),
        cantor_parts=(CantorComponent(Interval(1.0, 3.0), 0.3, 8, 1.3),),
    )
    arc = Interval(0.5, 2.0)
    rest = restrict_scaled(mu, arc)
    comp = restrict_scaled(mu, Interval(arc.end % TAU, TAU - arc.length))
    assert total_mass(rest) + total_mass(comp) == pytest.approx(
        total_mass(mu), abs=1e-12
    )
    assert total_mass(rest) == pytest.approx(interval_mass(mu, arc), abs=1e-12)


def test_restrict_scaling_factor():
    mu = delta(1.0, 2.0)
    assert total_mass(restrict_scaled(mu, Interval(0.5, 1.0), 0.25)) == pytest.approx(0.5)


def test_merge_combines_components():
    mu = merge([delta(0.0, 0.3), delta(0.0, 0.2), delta(1.0, 0.1)])
    assert total_mass(mu) == pytest.approx(0.6)
    assert len(mu.atoms) == 2


# -- validation / serialization -------------------------------------------------


def test_rejects_negative_mass():
    with pytest.raises(ValueError):
        CircleMeasure(atoms=((0.0, -1.0),))
    with pytest.raises(ValueError):
        CircleMeasure.from_json('{"atoms": [{"angle": 0.0, "mass": -0.5}]}')


def test_rejects_duplicate_atoms():
    with pytest.raises(ValueError):
        CircleMeasure(atoms=((1.0, 0.5), (1.0, 0.5)))


def test_json_round_trip():
    mu = CircleMeasure(
        atoms=((0.0, 0.3),),
        cantor_parts=(CantorComponent(Interval(0.0, 1.0), 1 / 3, 12, 0.7),),
    )
    back = CircleMeasure.from_json(mu.to_json())
    assert back.atoms == mu.atoms
    assert back.cantor_parts[0].gap_ratio == pytest.approx(1 / 3)
    assert total_mass(back) == pytest.approx(1.0)


def test_wrap_angle():
    assert wrap_angle(-0.1) == pytest.approx(TAU - 0.1)
    assert wrap_angle(TAU + 0.25) == pytest.approx(0.25)

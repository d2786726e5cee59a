"""Tests for curved plane waves, circle superpositions, and field plumbing."""

import numpy as np
import pytest

from contractlab.circlefn import (
    PARITY_SIGN,
    PARITY_TRIVIAL,
    CircleFunction,
    from_samples,
    l2_distance,
    mode_function,
    sup_distance,
    uniform_nodes,
)
from contractlab.deformation import deformed_element, product_t
from contractlab.fields import (
    Field,
    GridSpec,
    field_from_evaluator,
    field_from_samples,
    sup_distance as field_sup_distance,
    zoom_field,
)
from contractlab.matgroup import (
    coords_from_p,
    make_rng,
    sample_p,
    sample_rotation,
)
from contractlab.waves import (
    WaveSpec,
    isotypic_project,
    plane_wave_field,
    poisson,
    quasi_regular,
    recover_circle_weights,
    wave_eval,
    wave_field,
    wave_figure_data,
)


# ---------------------------------------------------------------------------
# Oracles.


def sym_exp_2x2(w):
    """Closed-form exponential of symmetric traceless 2x2 matrices."""
    w = np.asarray(w, dtype=np.float64)
    q = np.sqrt((w * w).sum(axis=(-2, -1)) / 2.0)
    safe = np.where(q > 0, q, 1.0)
    coeff = np.where(q > 0, np.sinh(safe) / safe, 1.0)
    return np.cosh(q)[..., None, None] * np.eye(2) + coeff[..., None, None] * w


def rot(b):
    return np.array([[np.cos(b), -np.sin(b)], [np.sin(b), np.cos(b)]])


def wave_oracle(ell, b, t, v):
    """Wave value from first principles: the triangular radius r1 of the
    closed-form exponential gives modulus r1 and phase ell*log(r1)/t."""
    w = t * (rot(b) @ np.asarray(v, dtype=np.float64) @ rot(b).T)
    g = sym_exp_2x2(w)
    r1 = np.hypot(g[..., 0, 0], g[..., 1, 0])
    return r1 * np.exp(1j * ell * np.log(r1) / t)


def plane_wave_oracle(ell, b, v):
    moved = rot(b) @ np.asarray(v, dtype=np.float64) @ rot(b).T
    return np.exp(1j * ell * moved[..., 0, 0])


def zpow_field(j):
    """(a1 + i a2)^j in frame coordinates; pure rotation mode -2j."""

    def evaluator(points):
        c = coords_from_p(points)
        return (c[..., 0] + 1j * c[..., 1]) ** j

    return field_from_evaluator(evaluator)


def test_wave_matches_closed_form_oracle():
    rng = make_rng(51)
    pts = sample_p(rng, 40, 2, 1.4)
    worst = 0.0
    for ell in (30.0, 7.5):
        for b in (0.0, 1.0, 2.3):
            for t in (1.0, 0.5, 0.25):
                got = wave_eval(WaveSpec(ell=ell, b_angle=b, t=t), pts)
                worst = max(worst, float(np.abs(got - wave_oracle(ell, b, t, pts)).max()))
    assert worst < 1e-12


def test_flat_wave_closed_form_and_origin_normalization():
    rng = make_rng(52)
    pts = sample_p(rng, 30, 2, 1.5)
    for ell, b in ((30.0, 1.0), (12.0, 0.0), (5.0, 2.1)):
        got = wave_eval(WaveSpec(ell=ell, b_angle=b, t=0.0), pts)
        assert np.abs(got - plane_wave_oracle(ell, b, pts)).max() < 1e-12
        assert np.abs(np.abs(got) - 1.0).max() < 1e-14
    origin = np.zeros((2, 2))
    for t in (0.0, 0.5, 1.0):
        assert wave_eval(WaveSpec(ell=30.0, b_angle=1.0, t=t), origin) == 1.0 + 0.0j


def test_wavespec_rejects_negative_scale():
    with pytest.raises(ValueError):
        WaveSpec(ell=1.0, b_angle=0.0, t=-0.5)


def test_zoom_identity_bit_exact_at_binary_scales():
    rng = make_rng(53)
    pts = sample_p(rng, 25, 2, 1.5)
    for ell, b in ((30.0, 1.0), (7.0, 0.3)):
        base = wave_field(WaveSpec(ell=ell, b_angle=b, t=1.0))
        for t in (0.5, 0.25, 0.125, 2.0 ** -6):
            zoomed, _ = zoom_field(base, t).evaluate(pts)
            direct = wave_eval(WaveSpec(ell=t * ell, b_angle=b, t=t), pts)
            assert np.array_equal(zoomed, direct)


def test_convergence_to_plane_wave():
    grid = GridSpec(extent=1.5, resolution=65)
    pts = grid.points()
    flat = wave_eval(WaveSpec(ell=30.0, b_angle=1.0, t=0.0), pts)
    sups = []
    for t in (1.0, 0.5, 0.25, 0.125, 1.0 / 64.0):
        cur = wave_eval(WaveSpec(ell=30.0, b_angle=1.0, t=t), pts)
        sups.append(float(np.abs(cur - flat).max()))
    assert all(b < a for a, b in zip(sups, sups[1:]))
    assert sups[-1] < 0.5 * sups[0]


def test_source_angle_covariance():
    rng = make_rng(54)
    pts = sample_p(rng, 30, 2, 1.3)
    for b in (0.7, 2.4):
        for t in (1.0, 0.25):
            lhs = wave_eval(WaveSpec(ell=18.0, b_angle=b, t=t), pts)
            moved = rot(b) @ pts @ rot(b).T
            rhs = wave_eval(WaveSpec(ell=18.0, b_angle=0.0, t=t), moved)
            assert np.abs(lhs - rhs).max() < 1e-12


def test_quasi_regular_is_a_representation():
    rng = make_rng(55)
    probe = sample_p(rng, 12, 2, 0.9)
    f = wave_field(WaveSpec(ell=12.0, b_angle=0.7, t=0.5))
    k = sample_rotation(rng, 2)
    v = sample_p(rng, 2, 2, 0.8)
    g1 = deformed_element(k[0], v[0], 0.5)
    g2 = deformed_element(k[1], v[1], 0.5)
    lhs, _ = quasi_regular(g1, quasi_regular(g2, f)).evaluate(probe)
    rhs, _ = quasi_regular(product_t(g1, g2), f).evaluate(probe)
    assert np.abs(lhs - rhs).max() < 1e-12
    ident = deformed_element(np.eye(2), np.zeros((2, 2)), 0.5)
    same, _ = quasi_regular(ident, f).evaluate(probe)
    base, _ = f.evaluate(probe)
    assert np.abs(same - base).max() < 1e-13


def test_poisson_matches_independent_trapezoid():
    rng = make_rng(56)
    probe = sample_p(rng, 15, 2, 1.0)
    F = CircleFunction(parity=PARITY_TRIVIAL, coeffs={0: 1.0, 2: 0.5j, -2: 0.25})
    nodes = uniform_nodes(2 * F.bandwidth + 16)
    for ell, t in ((3.0, 1.0), (30.0, 0.5)):
        got, _ = poisson(F, ell, t).evaluate(probe)
        ref = sum(F(a) * wave_oracle(ell, a, t, probe) for a in nodes) / len(nodes)
        assert np.abs(got - ref).max() < 1e-13


def test_poisson_grid_sampling_keeps_evaluator():
    grid = GridSpec(extent=1.0, resolution=17)
    F = mode_function(0)
    f = poisson(F, 5.0, 0.5, grid=grid)
    assert f.samples is not None and f.samples.shape == (17, 17)
    assert not f.sampled_only
    direct, _ = poisson(F, 5.0, 0.5).evaluate(grid.points())
    assert np.abs(f.samples - direct).max() < 1e-14


def test_sampled_field_interpolation_and_mask():
    grid = GridSpec(extent=1.0, resolution=33)
    coords = np.stack(grid.mesh(), axis=-1)
    plane = coords[..., 0] + 2.0 * coords[..., 1]
    f = field_from_samples(grid, plane)
    assert f.sampled_only
    rng = make_rng(57)
    inner = sample_p(rng, 20, 2, 0.8)
    got, mask = f.evaluate(inner)
    c = coords_from_p(inner)
    assert mask.all()
    # bilinear interpolation reproduces affine data exactly up to roundoff
    assert np.abs(got - (c[..., 0] + 2.0 * c[..., 1])).max() < 1e-12
    far = sample_p(rng, 20, 2, 1.0) + 10.0 * np.array([[1.0, 0.0], [0.0, -1.0]])
    _, outside = f.evaluate(far)
    assert not outside.any()
    with pytest.raises(ValueError):
        zoom_field(f, 2.0)
    zoomed = zoom_field(f, 0.5)
    got_half, _ = zoomed.evaluate(inner)
    assert np.abs(got_half - 0.5 * (c[..., 0] + 2.0 * c[..., 1])).max() < 1e-12


def test_field_constructor_validation():
    with pytest.raises(ValueError):
        Field()
    with pytest.raises(ValueError):
        Field(samples=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        GridSpec(extent=0.0, resolution=8)
    with pytest.raises(ValueError):
        GridSpec(extent=1.0, resolution=1)
    with pytest.raises(ValueError):
        zoom_field(wave_field(WaveSpec(ell=1.0, b_angle=0.0, t=1.0)), 0.0)
    grid = GridSpec(extent=1.0, resolution=9)
    narrow = field_from_samples(grid, np.ones((9, 9)))
    far = 20.0 * np.array([[[1.0, 0.0], [0.0, -1.0]]])
    with pytest.raises(ValueError):
        field_sup_distance(narrow, narrow, far)


def test_isotypic_projection_modes_and_idempotence():
    rng = make_rng(58)
    probe = sample_p(rng, 10, 2, 1.0)
    for j in (1, 2):
        f = zpow_field(j)
        ref, _ = f.evaluate(probe)
        keep, _ = isotypic_project(f, -2 * j).evaluate(probe)
        assert np.abs(keep - ref).max() < 1e-12
        for wrong in (0, 2 * j, -2 * j + 2):
            off, _ = isotypic_project(f, wrong).evaluate(probe)
            assert np.abs(off).max() < 1e-12
    f = zpow_field(1)
    once = isotypic_project(f, -2)
    twice = isotypic_project(once, -2)
    v1, _ = once.evaluate(probe)
    v2, _ = twice.evaluate(probe)
    assert np.abs(v1 - v2).max() < 1e-13
    # character weight shifts the surviving mode
    shifted, _ = isotypic_project(f, 0, character_weight=2).evaluate(probe)
    ref, _ = f.evaluate(probe)
    assert np.abs(shifted - ref).max() < 1e-12
    with pytest.raises(ValueError):
        isotypic_project(f, 4, quad_nodes=10)


def test_isotypic_commutes_with_zoom_bit_for_bit():
    rng = make_rng(59)
    probe = sample_p(rng, 10, 2, 1.0)
    f = zpow_field(2)
    for t in (0.5, 0.25):
        a, _ = isotypic_project(zoom_field(f, t), -4).evaluate(probe)
        b, _ = zoom_field(isotypic_project(f, -4), t).evaluate(probe)
        assert np.array_equal(a, b)


def test_wave_figure_data_frames_and_determinism():
    frames = wave_figure_data(30.0, [1.0, 0.5], extent=1.5, resolution=32)
    assert [fr["t"] for fr in frames] == [1.0, 0.5]
    for fr in frames:
        assert fr["values"].shape == (32, 32)
        assert fr["envelope"]["lambda"] == 30.0
        assert fr["envelope"]["range"] == 1.5
        assert fr["envelope"]["resolution"] == 32
    again = wave_figure_data(30.0, [1.0, 0.5], extent=1.5, resolution=32)
    for fr, fr2 in zip(frames, again):
        assert np.array_equal(fr["values"], fr2["values"])
    with pytest.raises(ValueError):
        wave_figure_data(30.0, [1.0], resolution=1)


def test_recover_circle_weights_matched_nodes_roundtrip():
    rng = make_rng(60)
    F = CircleFunction(parity=PARITY_TRIVIAL, coeffs={0: 0.8, 2: 0.3 - 0.2j})
    nodes = 24
    field = poisson(F, 8.0, 0.5, quad_nodes=nodes)
    samples = sample_p(rng, 120, 2, 1.3)
    recovered, rel = recover_circle_weights(
        field, 8.0, 0.5, bandwidth=3, sample_points=samples, quad_nodes=nodes
    )
    assert rel < 1e-12
    assert l2_distance(recovered, F) < 1e-12


def test_circle_function_parity_and_algebra():
    with pytest.raises(ValueError):
        CircleFunction(parity=PARITY_TRIVIAL, coeffs={1: 1.0})
    with pytest.raises(ValueError):
        CircleFunction(parity=PARITY_SIGN, coeffs={2: 1.0})
    with pytest.raises(ValueError):
        CircleFunction(parity="weird", coeffs={})
    F = CircleFunction(parity=PARITY_TRIVIAL, coeffs={0: 1.0, 4: 0.5, 2: 0.0})
    assert F.bandwidth == 4
    assert F.modes == [0, 4]  # zero amplitudes are pruned
    G = F.plus(mode_function(2, amplitude=2.0))
    assert G.modes == [0, 2, 4]
    assert G.parity == PARITY_TRIVIAL
    H = F.scaled(2.0)
    assert H.coeffs[4] == 1.0
    assert mode_function(3).parity == PARITY_SIGN
    assert mode_function(2).parity == PARITY_TRIVIAL
    with pytest.raises(ValueError):
        uniform_nodes(0)


def test_circle_function_sampling_roundtrip_and_distances():
    F = CircleFunction(parity=None, coeffs={-1: 0.5j, 0: 1.0, 3: 0.25})
    nodes = uniform_nodes(16)
    back = from_samples(F(nodes))
    assert back.modes == F.modes
    assert l2_distance(back, F) < 1e-14
    assert back.parity is None
    even = from_samples(mode_function(2)(nodes))
    assert even.parity == PARITY_TRIVIAL
    odd = from_samples(mode_function(1)(nodes))
    assert odd.parity == PARITY_SIGN
    G = F.plus(mode_function(0, amplitude=0.5))
    assert abs(l2_distance(F, G) - 0.5) < 1e-14
    assert abs(sup_distance(F, G) - 0.5) < 1e-14

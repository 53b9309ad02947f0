import math

import numpy as np
import pytest

from shrinklab import forms
from shrinklab.adapted_frame import closed_form_stars, singular_decomposition
from shrinklab.forms import (ParallelForm2, contraction_i_alpha,
                             contraction_i_alpha_j_beta, eta1, eta2, eta_diff,
                             eta_sum, hodge_star, star_gradient)
from shrinklab.geometry import (GraphImmersion, PlaneImmersion, ProductTorus,
                                evaluate_frame)

SQRT2 = math.sqrt(2.0)


def test_form_storage_antisymmetry():
    w = ParallelForm2((1, 2, 3, 4, 5, 6))
    m = w.matrix()
    assert np.all(m == -m.T)
    u, v = np.array([1.0, 0, 2, 0]), np.array([0, 1.0, 0, -1])
    assert w.apply_values(u, v) == -w.apply_values(v, u)
    with pytest.raises(ValueError):
        ParallelForm2((1, 2, 3))


def test_star_on_flat_plane():
    frame = evaluate_frame(PlaneImmersion(), (0.4, 0.4))
    assert hodge_star(eta1(), frame) == 1.0
    assert hodge_star(eta2(), frame) == 0.0


def test_star_identity_graph():
    frame = evaluate_frame(GraphImmersion.from_exprs("x1", "x2"), (0.3, 0.9))
    values = [hodge_star(f, frame) for f in (eta1(), eta2(), eta_sum(), eta_diff())]
    assert values == pytest.approx([0.5, 0.5, 1.0, 0.0], abs=1e-15)


def test_star_swap_graph_negative_jacobian():
    frame = evaluate_frame(GraphImmersion.from_exprs("x2", "x1"), (1.0, -0.4))
    s1 = hodge_star(eta1(), frame)
    s2 = hodge_star(eta2(), frame)
    assert s2 == pytest.approx(-s1, abs=1e-15)
    assert s2 == pytest.approx(-0.5, abs=1e-15)


def test_second_star_is_jacobian_times_first():
    g = GraphImmersion.from_exprs("sin(x1) + 0.3*x2^2", "x1*x2 - 0.2*x1^3")
    rng = np.random.default_rng(5)
    for x in rng.uniform(-1.5, 1.5, (40, 2)):
        frame = evaluate_frame(g, x)
        df = g.differential(x)
        jf = df[0, 0] * df[1, 1] - df[0, 1] * df[1, 0]
        assert abs(hodge_star(eta2(), frame)
                   - jf * hodge_star(eta1(), frame)) < 1e-10


def test_orientation_star_positive_on_graphs():
    rng = np.random.default_rng(6)
    g = GraphImmersion.from_exprs("2*x1 - 3*x2 + sin(x2)", "x1^3 - x2")
    for x in rng.uniform(-1.5, 1.5, (25, 2)):
        for gauge in ("gram_schmidt", "adapted"):
            frame = evaluate_frame(g, x, gauge=gauge)
            assert hodge_star(eta1(), frame) > 0.0


def test_contractions_on_flat_plane():
    frame = evaluate_frame(PlaneImmersion(), (0.0, 0.0))
    assert np.abs(contraction_i_alpha(eta1(), frame)).max() == 0.0
    m = contraction_i_alpha(eta2(), frame)
    # dx3^dx4 pairs the normal axes with nothing tangent: entries vanish too
    assert np.abs(m).max() == 0.0
    # a mixed form couples tangent and normal slots with unit entries
    mixed = ParallelForm2((0, 1, 0, 0, 0, 0))  # dx1 ^ dx3
    m = contraction_i_alpha(mixed, frame)
    assert sorted(np.abs(m).ravel().tolist()) == [0.0, 0.0, 0.0, 1.0]


def test_double_contraction_closed_forms():
    g = GraphImmersion.from_exprs("0.4*x1^2 + x2", "sin(x2) - 0.3*x1")
    rng = np.random.default_rng(7)
    for x in rng.uniform(-1, 1, (10, 2)):
        frame = evaluate_frame(g, x, gauge="adapted")
        dec = singular_decomposition(g.differential(x))
        s1, s2, _, _ = closed_form_stars(dec.lambda1, dec.lambda2)
        t1 = contraction_i_alpha_j_beta(eta1(), frame)
        t2 = contraction_i_alpha_j_beta(eta2(), frame)
        # with the adapted frame, eta1(e3, e4) is the second star and
        # eta2(e3, e4) the first
        assert t1[0, 1, 0, 1] == pytest.approx(s2, abs=1e-12)
        assert t2[0, 1, 0, 1] == pytest.approx(s1, abs=1e-12)
        assert t1[0, 1, 1, 0] == pytest.approx(-s2, abs=1e-12)
        assert np.abs(t1[0, 0]).max() == 0.0
    frame = evaluate_frame(PlaneImmersion(), (0.2, 0.2))
    assert contraction_i_alpha_j_beta(eta1(), frame)[0, 1, 0, 1] == 0.0


def test_star_gradient_methods_agree():
    cut = [("plane", PlaneImmersion(linear=[[0.3, 1.0], [0.2, -0.5]]),
            [(0.4, 0.9)]),
           ("cubic", GraphImmersion.from_exprs(
               "0.3*x1^3 - 0.2*x2^2 + 0.1*x1*x2", "0.4*x2^3 + 0.25*x1^2"),
            np.random.default_rng(8).uniform(-1, 1, (10, 2))),
           ("torus", ProductTorus(SQRT2, SQRT2), [(math.pi / 4, 0.0)])]
    rng = np.random.default_rng(9)
    all_forms = [eta1(), eta2(), eta_sum(), eta_diff(),
                 ParallelForm2(tuple(rng.uniform(-1, 1, 6)))]
    for label, imm, points in cut:
        for x in points:
            for form in all_forms:
                a = star_gradient(form, imm, x, method="frame_formula")
                b = star_gradient(form, imm, x, method="direct")
                scale = 1.0 + np.abs(b).max()
                assert np.abs(a - b).max() / scale < 1e-9, (label, form)
                if label == "plane":
                    assert np.abs(a).max() < 1e-13


def test_star_gradient_unknown_method():
    with pytest.raises(ValueError):
        star_gradient(eta1(), PlaneImmersion(), (0, 0), method="bogus")


def test_closed_forms_match_gram_evaluation_large_gradients():
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(1000):
        scale = 10.0 ** rng.uniform(-1, 3)   # |lambda| up to 1e3
        df = rng.uniform(-1, 1, (2, 2)) * scale
        g = GraphImmersion(
            lambda j1, j2, df=df: j1 * df[0, 0] + j2 * df[0, 1],
            lambda j1, j2, df=df: j1 * df[1, 0] + j2 * df[1, 1])
        frame = evaluate_frame(g, (0.3, 0.1))
        dec = singular_decomposition(df)
        closed = closed_form_stars(dec.lambda1, dec.lambda2)
        gram = [hodge_star(f, frame)
                for f in (eta1(), eta2(), eta_sum(), eta_diff())]
        worst = max(worst, np.abs(np.array(closed) - np.array(gram)).max())
    assert worst < 1e-10

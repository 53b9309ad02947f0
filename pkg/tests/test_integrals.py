import math
import warnings

import numpy as np
import pytest

from shrinklab import forms
from shrinklab.geometry import (FrameFields, GraphImmersion, PlaneImmersion,
                                ProductTorus)
from shrinklab.integrals import (ChainReport, CoarseGridWarning, CutoffProfile,
                                 PreconditionError, QuadratureGrid,
                                 constant_field, curvature_mismatch_field,
                                 expr_field, gaussian_weighted_integral,
                                 ibp_residual, log_star_field, star_field,
                                 surface_area_in_ball, weighted_estimate_chain)

SQRT2 = math.sqrt(2.0)
TORUS_GRID = QuadratureGrid(0.0, 2 * np.pi, 0.0, 2 * np.pi, 64, 64)


def test_grid_validation():
    with pytest.raises(ValueError):
        QuadratureGrid.square(1.0, 4)
    with pytest.raises(ValueError):
        QuadratureGrid(0, 1, 1, 0, 16, 16)
    with pytest.raises(ValueError):
        QuadratureGrid(0, 1, 0, 1, 16, 16, rule="simpson")


@pytest.mark.parametrize("rule", ["midpoint", "gauss_legendre_4"])
def test_weights_positive_and_sum_to_area(rule):
    grid = QuadratureGrid(-1.2, 2.0, 0.5, 3.0, 10, 14, rule)
    cells = grid.cells()
    pu, pv, w = grid.rule_points()
    assert np.all(w > 0)
    total = np.sum((cells[:, 2] * cells[:, 3])[:, None] * w[None, :])
    assert total == pytest.approx(grid.area, abs=1e-12)


def test_torus_area_exact():
    ball = surface_area_in_ball(ProductTorus(SQRT2, SQRT2), TORUS_GRID, 3.0)
    assert ball.area == pytest.approx(8 * math.pi ** 2, abs=1e-6)
    assert ball.boundary_fraction == 0.0


def test_plane_disc_area():
    ball = surface_area_in_ball(PlaneImmersion(), QuadratureGrid.square(2.5, 160),
                                2.0)
    assert ball.area == pytest.approx(4 * math.pi, rel=1e-2)
    assert ball.ratio == pytest.approx(math.pi, rel=1e-2)


def test_scaled_graph_ball_area():
    # identity graph: metric 2*delta, so the r-ball cuts |x| <= r/sqrt(2)
    # and carries area element 2: area = 2 pi r^2 / 2 * 2 = 4 pi at r = 2
    g = GraphImmersion.from_exprs("x1", "x2")
    ball = surface_area_in_ball(g, QuadratureGrid.square(1.7, 128), 2.0)
    assert ball.area == pytest.approx(4 * math.pi, rel=1e-2)


def test_growth_ratio_constant_for_plane():
    ratios = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CoarseGridWarning)
        for r in (1.0, 2.0, 4.0, 8.0):
            grid = QuadratureGrid.square(r + 0.5, 128)
            ratios.append(surface_area_in_ball(PlaneImmersion(), grid, r).ratio)
    for ratio in ratios:
        assert ratio == pytest.approx(math.pi, rel=1e-2)
    assert max(ratios) / min(ratios) < 1.02


def test_coarse_grid_warning():
    with pytest.warns(CoarseGridWarning):
        surface_area_in_ball(PlaneImmersion(), QuadratureGrid.square(4.0, 8), 1.0)


def test_gaussian_weighted_integrals():
    plane_grid = QuadratureGrid.square(20.0, 64)
    assert gaussian_weighted_integral(PlaneImmersion(), plane_grid, None) \
        == pytest.approx(4 * math.pi, abs=1e-4)
    torus = ProductTorus(SQRT2, SQRT2)
    assert gaussian_weighted_integral(torus, TORUS_GRID, None) \
        == pytest.approx(8 * math.pi ** 2 * math.exp(-1.0), abs=1e-6)
    assert gaussian_weighted_integral(PlaneImmersion(), plane_grid, 0.0) == 0.0


def test_gauss_rule_high_order_convergence():
    # coarse-to-fine error ratio far above the 2^2 of a low-order rule
    exact = 4 * math.pi
    errs = []
    for n in (12, 24):
        grid = QuadratureGrid.square(20.0, n)
        errs.append(abs(gaussian_weighted_integral(PlaneImmersion(), grid, None)
                        - exact))
    assert errs[1] < errs[0] / 12.0 or errs[1] < 1e-12


def test_cutoff_profile_bounds():
    cut = CutoffProfile(r=2.0)
    ts = np.linspace(1.0, 3.5, 400)
    vals = np.array([cut.value(t) for t in ts])
    slopes = np.array([cut.slope(t) for t in ts])
    assert np.all((0.0 <= vals) & (vals <= 1.0))
    assert np.abs(slopes).max() <= 2.0
    assert np.abs(slopes).max() == pytest.approx(15.0 / 8.0, rel=1e-3)
    assert cut.value(1.99) == 1.0 and cut.value(3.01) == 0.0
    with pytest.raises(ValueError):
        CutoffProfile(r=-1.0)
    with pytest.raises(ValueError):
        CutoffProfile(r=1.0, width=2.0)


def test_cutoff_field_matches_profile_values():
    cut = CutoffProfile(r=1.5)
    pl = PlaneImmersion()
    pts = np.stack([np.linspace(0.1, 3.0, 50), np.zeros(50)])
    ff = FrameFields(pl, pts)
    q = sum(j * j for j in ff.F)
    phi = cut.field_jets(q)
    expected = np.array([cut.value(t) for t in pts[0]])
    assert np.abs(np.asarray(phi.v) - expected).max() < 1e-14


def test_ibp_trivial_cases():
    cut = CutoffProfile(r=2.0)
    grid = QuadratureGrid.square(3.2, 64)
    pl = PlaneImmersion()
    assert ibp_residual(pl, grid, constant_field(3.0), cut) == 0.0
    assert ibp_residual(pl, grid, log_star_field(forms.eta_sum()), cut) == 0.0


def test_ibp_convergence_second_order():
    cut = CutoffProfile(r=2.0)
    g = GraphImmersion.from_exprs("0.1*sin(x1)", "0.1*x1*x2")
    res = {n: ibp_residual(g, QuadratureGrid.square(3.2, n),
                           log_star_field(forms.eta_sum()), cut)
           for n in (32, 64)}
    assert res[64] < 1e-3
    assert res[32] / res[64] >= 3.5


def test_chain_trivial_on_plane():
    grid = QuadratureGrid.square(3.5, 96)
    rep = weighted_estimate_chain(PlaneImmersion(), grid,
                                  star_field(forms.eta_sum()),
                                  constant_field(0.0), r=2.0)
    assert isinstance(rep, ChainReport)
    assert rep.all_hold()
    assert rep.core_integral == 0.0
    assert rep.pointwise_violations == 0
    assert rep.analytic_bound > 0.0
    assert "finite-sample" in rep.note
    d = rep.to_dict()
    assert {q["name"] for q in d["inequalities"]} == {
        "core_le_cutoff", "cutoff_le_gradphi", "gradphi_le_8annulus",
        "annulus_le_analytic", "pointwise_nonpositive"}


def test_chain_with_curvature_mismatch_field():
    grid = QuadratureGrid.square(3.5, 96)
    rep = weighted_estimate_chain(PlaneImmersion(), grid,
                                  star_field(forms.eta_sum()),
                                  curvature_mismatch_field("sum"), r=2.0)
    assert rep.all_hold() and rep.core_integral == 0.0


def test_curvature_mismatch_matches_adapted_frame():
    from shrinklab.geometry import evaluate_frame
    g = GraphImmersion.from_exprs("0.3*sin(x1) + 0.1*x2^2",
                                  "0.2*x1*x2 - 0.15*x1^3")
    rng = np.random.default_rng(4)
    pts = rng.uniform(-1, 1, (2, 25))
    ff = FrameFields(g, pts)
    got = {kind: curvature_mismatch_field(kind)(ff) for kind in ("sum", "diff")}
    for n in range(pts.shape[1]):
        h = evaluate_frame(g, pts[:, n], gauge="adapted").sff
        qs = sum((h[0, 0, k] - h[1, 1, k]) ** 2 + (h[1, 0, k] + h[0, 1, k]) ** 2
                 for k in range(2))
        qd = sum((h[0, 0, k] + h[1, 1, k]) ** 2 + (h[1, 0, k] - h[0, 1, k]) ** 2
                 for k in range(2))
        assert got["sum"][n] == pytest.approx(qs, abs=1e-12)
        assert got["diff"][n] == pytest.approx(qd, abs=1e-12)


def test_chain_negative_control_flags_violations():
    grid = QuadratureGrid.square(3.5, 96)
    rep = weighted_estimate_chain(PlaneImmersion(), grid,
                                  expr_field("exp(-(x1^2 + x2^2)/8)"),
                                  constant_field(0.0), r=2.0)
    assert rep.pointwise_max > 0.1
    assert rep.pointwise_violations > 0
    flags = {q["name"]: q["holds"] for q in rep.inequalities}
    assert not flags["pointwise_nonpositive"]


def test_chain_preconditions():
    grid = QuadratureGrid.square(3.5, 64)
    with pytest.raises(PreconditionError):
        weighted_estimate_chain(PlaneImmersion(), grid, expr_field("x1"),
                                constant_field(0.0), r=2.0)
    with pytest.raises(PreconditionError):
        weighted_estimate_chain(PlaneImmersion(), grid,
                                star_field(forms.eta_sum()),
                                constant_field(-1.0), r=2.0)
    with pytest.raises(ValueError):
        weighted_estimate_chain(PlaneImmersion(), grid,
                                star_field(forms.eta_sum()),
                                constant_field(0.0), r=0.5)

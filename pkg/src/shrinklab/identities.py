"""Pointwise verifiers for the parallel-form structure identities.

Each checker evaluates both sides of one identity by maximally independent
code paths (surface Laplacians through coordinate jets on one side, frame
contractions of the second fundamental form on the other) and returns a
:class:`ResidualReport`.  Agreement is then evidence, not tautology: the two
sides share only the jet substrate.

Checkers whose identity holds only on self-shrinkers record the pointwise
shrinker residual norm in the report's ``shrinker_norm`` so the caller can
see whether the hypothesis applies.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import forms as _forms
from . import geometry as _geo
from .forms import ParallelForm2
from .geometry import FrameFields, Immersion

__all__ = [
    "ResidualReport",
    "check_codazzi_symmetry",
    "check_star_laplacian",
    "check_shrinker_star_identity",
    "check_structure_equation",
    "check_contraction_closed_form",
    "check_graph_star_equation",
    "GRAPH_STAR_EQUATIONS",
    "classify_rigidity",
    "random_graph_corpus",
    "random_forms",
    "random_points",
]


@dataclass
class ResidualReport:
    """Two-sided evaluation of one identity at one point."""

    name: str
    point: np.ndarray
    lhs: float | np.ndarray
    rhs: float | np.ndarray
    abs_residual: float
    rel_residual: float
    shrinker_norm: float
    extra: dict = field(default_factory=dict)

    @property
    def defect(self) -> float:
        """Signed lhs - rhs when both sides are scalars."""
        return float(np.asarray(self.lhs) - np.asarray(self.rhs))

    def to_dict(self) -> dict:
        def _plain(v):
            a = np.asarray(v)
            return a.tolist() if a.ndim else float(a)
        d = {"name": self.name, "point": _plain(self.point),
             "lhs": _plain(self.lhs), "rhs": _plain(self.rhs),
             "abs_residual": self.abs_residual, "rel_residual": self.rel_residual,
             "shrinker_norm": self.shrinker_norm}
        d.update(self.extra)
        return d


def _report(name, x, lhs, rhs, shrinker_norm, **extra) -> ResidualReport:
    a = np.asarray(lhs, dtype=float)
    b = np.asarray(rhs, dtype=float)
    abs_res = float(np.max(np.abs(a - b))) if a.shape else float(abs(a - b))
    scale = 1.0 + max(float(np.max(np.abs(a))) if a.size else 0.0,
                      float(np.max(np.abs(b))) if b.size else 0.0)
    return ResidualReport(name=name, point=np.asarray(x, float), lhs=lhs, rhs=rhs,
                          abs_residual=abs_res, rel_residual=abs_res / scale,
                          shrinker_norm=shrinker_norm, extra=dict(extra))


def _context(imm, x, ff) -> float:
    return float(np.linalg.norm(_geo.shrinker_residual(imm, x, fields=ff)))


# -- identity checkers -----------------------------------------------------------

def check_codazzi_symmetry(imm: Immersion, x,
                           fields: FrameFields | None = None) -> ResidualReport:
    """h^alpha_{ij,k} = h^alpha_{ik,j}: exact symmetry in flat ambient space."""
    ff = fields if fields is not None else FrameFields(imm, x)
    hcov = _geo.sff_covariant_derivative(imm, x, fields=ff)
    swapped = np.transpose(hcov, (0, 1, 3, 2))
    return _report("codazzi", x, hcov.ravel(), swapped.ravel(), _context(imm, x, ff))


def check_star_laplacian(imm: Immersion, x, form: ParallelForm2,
                         fields: FrameFields | None = None) -> ResidualReport:
    """Laplacian of the star against its curvature contraction expansion.

    Valid on any surface: Delta(*Omega) equals
    -(h^a_ik)^2 *Omega + h^a_{,i} Omega_{i a} + 2 sum_{i<j,k} h^a_ik h^b_jk
    Omega_{i a, j b}, with the flat-ambient curvature terms identically zero.
    """
    ff = fields if fields is not None else FrameFields(imm, x)
    lhs = ff.laplacian_value(ff.star_field(form))
    frame = _geo.evaluate_frame(imm, x, fields=ff)
    star = _forms.hodge_star(form, frame)
    omega_ia = _forms.contraction_i_alpha(form, frame)
    omega_iajb = _forms.contraction_i_alpha_j_beta(form, frame)
    hder = _geo.mean_curvature_normal_derivative(imm, x, fields=ff)
    h = frame.sff
    rhs = -float(np.sum(h * h)) * star
    rhs += sum(hder[alpha, i] * omega_ia[i, alpha]
               for i in range(2) for alpha in range(2))
    rhs += 2.0 * sum(h[alpha, 0, k] * h[beta, 1, k] * omega_iajb[0, 1, alpha, beta]
                     for k in range(2) for alpha in range(2) for beta in range(2))
    return _report("star_laplacian", x, lhs, rhs, _context(imm, x, ff),
                   form=str(form))


def check_shrinker_star_identity(imm: Immersion, x, form: ParallelForm2,
                                 fields: FrameFields | None = None) -> ResidualReport:
    """Omega_{i a} h^a_{,i} = <F, grad *Omega> / 2: holds on self-shrinkers only."""
    ff = fields if fields is not None else FrameFields(imm, x)
    frame = _geo.evaluate_frame(imm, x, fields=ff)
    omega_ia = _forms.contraction_i_alpha(form, frame)
    hder = _geo.mean_curvature_normal_derivative(imm, x, fields=ff)
    lhs = sum(omega_ia[i, alpha] * hder[alpha, i]
              for i in range(2) for alpha in range(2))
    rhs = 0.5 * ff.position_dot_gradient(ff.star_field(form))
    return _report("shrinker_star", x, lhs, rhs, _context(imm, x, ff),
                   form=str(form))


def check_structure_equation(imm: Immersion, x, form: ParallelForm2,
                             fields: FrameFields | None = None) -> ResidualReport:
    """Full structure equation for the star of a parallel form on a shrinker.

    Defect of Delta(*Omega) + (h^a_ik)^2 *Omega
    - 2 sum_{i<j} Omega_{i a, j b} h^a_ik h^b_jk - <F, grad *Omega>/2,
    reported as lhs against 0.
    """
    ff = fields if fields is not None else FrameFields(imm, x)
    u = ff.star_field(form)
    frame = _geo.evaluate_frame(imm, x, fields=ff)
    star = _forms.hodge_star(form, frame)
    omega_iajb = _forms.contraction_i_alpha_j_beta(form, frame)
    h = frame.sff
    value = ff.laplacian_value(u)
    value += float(np.sum(h * h)) * star
    value -= 2.0 * sum(h[alpha, 0, k] * h[beta, 1, k] * omega_iajb[0, 1, alpha, beta]
                       for k in range(2) for alpha in range(2) for beta in range(2))
    value -= 0.5 * ff.position_dot_gradient(u)
    return _report("structure_eq", x, value, 0.0, _context(imm, x, ff),
                   form=str(form))


def check_contraction_closed_form(imm: Immersion, x, which: str,
                                  fields: FrameFields | None = None) -> ResidualReport:
    """Mixed-contraction term against its adapted-frame closed form (graphs).

    For eta1 the general contraction 2 sum Omega_{i a, j b} h^a_ik h^b_jk
    collapses to 2 *eta2 (h3_1k h4_2k - h4_1k h3_2k) in the adapted frame,
    and for eta2 the weight is *eta1.  The left side is computed in the
    deterministic Gram-Schmidt gauge, the right in the adapted gauge, so the
    two paths share nothing beyond the immersion jets.
    """
    if which not in ("eta1", "eta2"):
        raise ValueError(f"which must be 'eta1' or 'eta2', got {which!r}")
    if imm.kind != "graph":
        raise _geo.GaugeError("contraction closed form requires a graph immersion")
    ff = fields if fields is not None else FrameFields(imm, x)
    form = _forms.eta1() if which == "eta1" else _forms.eta2()
    frame_gs = _geo.evaluate_frame(imm, x, fields=ff)
    omega_iajb = _forms.contraction_i_alpha_j_beta(form, frame_gs)
    hg = frame_gs.sff
    lhs = 2.0 * sum(hg[alpha, 0, k] * hg[beta, 1, k] * omega_iajb[0, 1, alpha, beta]
                    for k in range(2) for alpha in range(2) for beta in range(2))
    frame_ad = _geo.evaluate_frame(imm, x, gauge="adapted", fields=ff)
    ha = frame_ad.sff
    cross = sum(ha[0, 0, k] * ha[1, 1, k] - ha[1, 0, k] * ha[0, 1, k]
                for k in range(2))
    weight = _forms.hodge_star(_forms.eta2() if which == "eta1" else _forms.eta1(),
                               frame_ad)
    rhs = 2.0 * weight * cross
    return _report(f"contraction_{which}", x, lhs, rhs, _context(imm, x, ff))


GRAPH_STAR_EQUATIONS = ("eta1", "eta2", "eta_sum", "eta_diff")


def check_graph_star_equation(imm: Immersion, x, which: str,
                              fields: FrameFields | None = None) -> ResidualReport:
    """Defect of one of the four graph structure equations (shrinkers only).

    With adapted-frame components h^a_ik and the four named stars s1, s2,
    s' = s1 + s2, s'' = s1 - s2:

    * ``eta1``:     Delta s1 + s1 |A|^2 - 2 s2 X - <F, grad s1>/2
    * ``eta2``:     Delta s2 + s2 |A|^2 - 2 s1 X - <F, grad s2>/2
    * ``eta_sum``:  Delta s' + s' ((h3_1k - h4_2k)^2 + (h4_1k + h3_2k)^2) - <F, grad s'>/2
    * ``eta_diff``: Delta s'' + s'' ((h3_1k + h4_2k)^2 + (h4_1k - h3_2k)^2) - <F, grad s''>/2

    where X = h3_1k h4_2k - h4_1k h3_2k (summed over k).  The sum and
    difference defects equal eta1 + eta2 and eta1 - eta2 respectively.
    """
    if which not in GRAPH_STAR_EQUATIONS:
        raise ValueError(f"which must be one of {GRAPH_STAR_EQUATIONS}, got {which!r}")
    if imm.kind != "graph":
        raise _geo.GaugeError("graph star equations require a graph immersion")
    ff = fields if fields is not None else FrameFields(imm, x)
    form = {"eta1": _forms.eta1(), "eta2": _forms.eta2(),
            "eta_sum": _forms.eta_sum(), "eta_diff": _forms.eta_diff()}[which]
    u = ff.star_field(form)
    frame_ad = _geo.evaluate_frame(imm, x, gauge="adapted", fields=ff)
    star = _forms.hodge_star(form, frame_ad)
    h = frame_ad.sff
    if which in ("eta1", "eta2"):
        cross = sum(h[0, 0, k] * h[1, 1, k] - h[1, 0, k] * h[0, 1, k]
                    for k in range(2))
        other = _forms.hodge_star(_forms.eta2() if which == "eta1" else _forms.eta1(),
                                  frame_ad)
        curvature_term = star * float(np.sum(h * h)) - 2.0 * other * cross
    elif which == "eta_sum":
        quad = sum((h[0, 0, k] - h[1, 1, k]) ** 2 + (h[1, 0, k] + h[0, 1, k]) ** 2
                   for k in range(2))
        curvature_term = star * quad
    else:
        quad = sum((h[0, 0, k] + h[1, 1, k]) ** 2 + (h[1, 0, k] - h[0, 1, k]) ** 2
                   for k in range(2))
        curvature_term = star * quad
    value = ff.laplacian_value(u) + curvature_term - 0.5 * ff.position_dot_gradient(u)
    return _report(f"graph_star_{which}", x, value, 0.0, _context(imm, x, ff))


# -- rigidity classifier ------------------------------------------------------------

def classify_rigidity(h, f_tan, f_nor, tol: float = 1e-6) -> str:
    """Classify a pointwise state as none, minimal, or totally_geodesic.

    ``h`` is the (2, 2, 2) table h[alpha, i, j] (not assumed symmetric: the
    checker is pure algebra over the supplied entries), ``f_tan``/``f_nor``
    the tangential and normal position components.

    Minimality is granted when either quadratic combination

        sum_k (h3_1k - h4_2k)^2 + (h4_1k + h3_2k)^2   or
        sum_k (h3_1k + h4_2k)^2 + (h4_1k - h3_2k)^2

    falls below tol^2.  When the position vector is additionally tangential
    and nonzero (|f_nor| <= tol < |f_tan|), the determinant relation
    h^a_11 h^a_22 - (h^a_12)^2 = 0 must follow; together with minimality it
    forces every component below tol, hence totally geodesic.  Inconsistent
    data in that regime (determinant relation violated) classifies as none.
    """
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    h = np.asarray(h, dtype=float)
    if h.shape != (2, 2, 2):
        raise ValueError("h must have shape (2, 2, 2) = [alpha, i, j]")
    f_tan = np.asarray(f_tan, dtype=float)
    f_nor = np.asarray(f_nor, dtype=float)
    q_minus = sum((h[0, 0, k] - h[1, 1, k]) ** 2 + (h[1, 0, k] + h[0, 1, k]) ** 2
                  for k in range(2))
    q_plus = sum((h[0, 0, k] + h[1, 1, k]) ** 2 + (h[1, 0, k] - h[0, 1, k]) ** 2
                 for k in range(2))
    if min(q_minus, q_plus) > tol * tol:
        return "none"
    position_regime = (np.linalg.norm(f_nor) <= tol) and (np.linalg.norm(f_tan) > tol)
    if not position_regime:
        return "minimal"
    for alpha in range(2):
        det_rel = h[alpha, 0, 0] * h[alpha, 1, 1] - h[alpha, 0, 1] * h[alpha, 1, 0]
        if abs(det_rel) > tol * tol:
            return "none"
    if np.max(np.abs(h)) > tol:
        return "none"
    return "totally_geodesic"


# -- randomized corpus ---------------------------------------------------------------

_POLY_POWERS = [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (2, 1), (1, 2), (0, 3)]


def _random_component(rng) -> str:
    terms = []
    for _ in range(rng.integers(2, 4)):
        kind = rng.integers(0, 3)
        c = rng.uniform(0.1, 0.45) * rng.choice([-1.0, 1.0])
        if kind == 0:
            p, q = _POLY_POWERS[rng.integers(0, len(_POLY_POWERS))]
            xs = []
            if p:
                xs.append("x1" if p == 1 else f"x1^{p}")
            if q:
                xs.append("x2" if q == 1 else f"x2^{q}")
            terms.append(f"{c:.6f}*" + "*".join(xs))
        elif kind == 1:
            a = rng.uniform(-1.3, 1.3)
            b = rng.uniform(-1.3, 1.3)
            fn = "sin" if rng.integers(0, 2) else "cos"
            terms.append(f"{c:.6f}*{fn}({a:.6f}*x1 + {b:.6f}*x2)")
        else:
            a = rng.uniform(-0.5, 0.5)
            b = rng.uniform(-0.5, 0.5)
            terms.append(f"{c:.6f}*exp({a:.6f}*x1 + {b:.6f}*x2)")
    return " + ".join(terms)


def random_graph_corpus(count: int, seed: int) -> list[_geo.GraphImmersion]:
    """Deterministic pool of smooth random graphs with moderate gradients."""
    rng = np.random.default_rng(seed)
    return [_geo.GraphImmersion.from_exprs(_random_component(rng),
                                           _random_component(rng))
            for _ in range(count)]


def random_forms(count: int, seed: int) -> list[ParallelForm2]:
    rng = np.random.default_rng(seed)
    return [ParallelForm2(tuple(rng.uniform(-1.0, 1.0, 6)), name=f"rand{i}")
            for i in range(count)]


def random_points(count: int, seed: int, box: float = 1.5) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(count, 2))

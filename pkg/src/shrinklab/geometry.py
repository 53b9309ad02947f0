"""Per-point extrinsic geometry of immersed surfaces in R^4.

An :class:`Immersion` maps the 2-d parameter domain into R^4 and evaluates as
four order-3 jets, so every derived field (metric, frames, second fundamental
form, mean curvature) is itself a jet-valued field obtained by arithmetic on
those jets.  Neighborhood derivatives of frame quantities therefore come from
the jets of the frame construction, never from finite differencing.

The orthonormal gauge built here is deterministic: tangents Gram-Schmidt the
coordinate vectors dF/du, dF/dv in that order, and the normal basis completes
by projecting the ambient axes in the order (3, 4, 1, 2), keeping the first
two projections with norm above 1e-6.  Graph immersions always orient so that
the dx1^dx2 star is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import adapted_frame as _af
from . import expr as _expr
from . import jets
from .jets import Jet3

__all__ = [
    "DegenerateImmersionError", "GaugeError",
    "Immersion", "GraphImmersion", "PlaneImmersion", "ProductTorus",
    "DiscreteImmersion",
    "PointFrame", "FrameFields",
    "evaluate_frame", "shrinker_residual", "laplace_beltrami",
    "mean_curvature_normal_derivative", "sff_covariant_derivative",
]

GRAM_DET_FLOOR = 1e-12
NORMAL_PROJECTION_FLOOR = 1e-6


class DegenerateImmersionError(ValueError):
    """Coordinate tangents are (numerically) linearly dependent."""


class GaugeError(ValueError):
    """Requested frame gauge is unavailable for this immersion kind."""


# -- immersions -----------------------------------------------------------------

class Immersion:
    """A jet-evaluable map from the parameter plane into R^4."""

    kind = "abstract"

    def ambient_jets(self, x) -> tuple[Jet3, Jet3, Jet3, Jet3]:
        """Four ambient coordinates as order-3 jets at x (batch allowed)."""
        raise NotImplementedError


class GraphImmersion(Immersion):
    """Graph (x1, x2, f1(x), f2(x)); f components evaluate over jets."""

    kind = "graph"

    def __init__(self, f1, f2, sources: tuple[str, str] | None = None):
        self.f1 = f1
        self.f2 = f2
        self.sources = sources

    @classmethod
    def from_exprs(cls, src1: str, src2: str) -> "GraphImmersion":
        a1, a2 = _expr.parse(src1), _expr.parse(src2)
        return cls(lambda j1, j2: _expr._eval(a1, j1, j2),
                   lambda j1, j2: _expr._eval(a2, j1, j2),
                   sources=(src1, src2))

    def ambient_jets(self, x):
        j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
        return j1, j2, self.f1(j1, j2), self.f2(j1, j2)

    def differential(self, x) -> np.ndarray:
        """Jacobian of f with rows (df1, df2)."""
        j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
        v1, v2 = self.f1(j1, j2), self.f2(j1, j2)
        return np.array([[v1.g1, v1.g2], [v2.g1, v2.g2]], dtype=float)


class PlaneImmersion(Immersion):
    """Affine plane F(x) = (x1 + b1, x2 + b2, (Lx)1 + b3, (Lx)2 + b4)."""

    kind = "plane"

    def __init__(self, linear=None, offset=None):
        self.linear = np.zeros((2, 2)) if linear is None else np.asarray(linear, float)
        self.offset = np.zeros(4) if offset is None else np.asarray(offset, float)
        if self.linear.shape != (2, 2) or self.offset.shape != (4,):
            raise ValueError("plane takes a 2x2 linear part and a 4-offset")

    def ambient_jets(self, x):
        j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
        L, b = self.linear, self.offset
        return (j1 + b[0], j2 + b[1],
                j1 * L[0, 0] + j2 * L[0, 1] + b[2],
                j1 * L[1, 0] + j2 * L[1, 1] + b[3])


class ProductTorus(Immersion):
    """Product of circles (r1 cos u, r1 sin u, r2 cos v, r2 sin v)."""

    kind = "torus"

    def __init__(self, r1: float, r2: float):
        if r1 <= 0 or r2 <= 0:
            raise ValueError("torus radii must be positive")
        self.r1, self.r2 = float(r1), float(r2)

    def ambient_jets(self, x):
        j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
        return (jets.cos(j1) * self.r1, jets.sin(j1) * self.r1,
                jets.cos(j2) * self.r2, jets.sin(j2) * self.r2)


class DiscreteImmersion(Immersion):
    """Graph-shaped interpolant of gridded (f1, f2) samples.

    Uses tensor splines of the highest odd degree the grid supports (quintic
    where possible) so third derivatives exist everywhere off the knot lines.
    """

    kind = "discrete"

    def __init__(self, x1_nodes, x2_nodes, f1_values, f2_values):
        from scipy.interpolate import RectBivariateSpline
        x1_nodes = np.asarray(x1_nodes, float)
        x2_nodes = np.asarray(x2_nodes, float)
        k = min(5, len(x1_nodes) - 1, len(x2_nodes) - 1)
        if k % 2 == 0:
            k -= 1
        if k < 3:
            raise ValueError("discrete immersion needs at least a 4x4 grid")
        self._splines = [RectBivariateSpline(x1_nodes, x2_nodes, np.asarray(v, float),
                                             kx=k, ky=k)
                         for v in (f1_values, f2_values)]
        self._derivs = [{(dx, dy): s.partial_derivative(dx, dy)
                         for dx in range(4) for dy in range(4 - dx)}
                        for s in self._splines]

    def _component_jet(self, ci: int, x1, x2) -> Jet3:
        d = self._derivs[ci]

        def ev(dx, dy):
            out = d[(dx, dy)](x1, x2, grid=False)
            return float(out) if np.ndim(out) == 0 else out

        return Jet3(ev(0, 0), ev(1, 0), ev(0, 1),
                    ev(2, 0), ev(1, 1), ev(0, 2),
                    ev(3, 0), ev(2, 1), ev(1, 2), ev(0, 3))

    def ambient_jets(self, x):
        j1, j2 = jets.seed(x, 1), jets.seed(x, 2)
        return (j1, j2,
                self._component_jet(0, x[0], x[1]),
                self._component_jet(1, x[0], x[1]))


# -- jet-level vector helpers -----------------------------------------------------

def _dot4(u, v) -> Jet3:
    return ((u[0] * v[0] + u[1] * v[1]) + (u[2] * v[2] + u[3] * v[3]))


def _axpy(alpha, u, v):
    """v + alpha * u componentwise over 4-vectors of jets."""
    return [v[A] + alpha * u[A] for A in range(4)]


def _scale(alpha, u):
    return [alpha * u[A] for A in range(4)]


_AXES = np.eye(4)


# -- frame fields ------------------------------------------------------------------

class FrameFields:
    """Jet-valued geometric fields of an immersion at one parameter point.

    The coordinate-level quantities (tangents, metric, Christoffel symbols,
    mean curvature vector) broadcast over batch points; the orthonormal frame
    and second-fundamental-form fields involve per-point branch decisions and
    require a single point.
    """

    def __init__(self, imm: Immersion, x):
        self.imm = imm
        self.x = np.asarray(x, dtype=float)
        self.F = list(imm.ambient_jets(self.x))
        self.T = [[self.F[A].deriv_field(a) for A in range(4)] for a in (1, 2)]
        g00 = _dot4(self.T[0], self.T[0])
        g01 = _dot4(self.T[0], self.T[1])
        g11 = _dot4(self.T[1], self.T[1])
        self.g = [[g00, g01], [g01, g11]]
        self.det_g = g00 * g11 - g01 * g01
        if np.any(np.asarray(self.det_g.v) <= GRAM_DET_FLOOR):
            raise DegenerateImmersionError(
                f"Gram determinant {self.det_g.v!r} <= {GRAM_DET_FLOOR} at x={x!r}")
        self.sqrt_det_g = jets.sqrt(self.det_g)
        inv = 1.0 / self.det_g
        self.ginv = [[g11 * inv, -(g01 * inv)], [-(g01 * inv), g00 * inv]]

    @property
    def _scalar(self) -> bool:
        return not isinstance(self.F[0].v, np.ndarray)

    # coordinate-level fields ----------------------------------------------

    @cached_property
    def d2F(self):
        """Second-derivative jets d_a d_b F[A], index [a][b][A] (order 1)."""
        return [[[self.F[A].deriv_field(a).deriv_field(b) for A in range(4)]
                 for b in (1, 2)] for a in (1, 2)]

    @cached_property
    def christoffel_jets(self):
        """Gamma^c_ab as jets, index [c][a][b]."""
        dg = [[[self.g[a][b].deriv_field(c) for b in range(2)] for a in range(2)]
              for c in (1, 2)]
        out = []
        for c in range(2):
            row = []
            for a in range(2):
                col = []
                for b in range(2):
                    s = jets.constant(0.0, like=self.F[0])
                    for d in range(2):
                        s = s + self.ginv[c][d] * (dg[a][b][d] + dg[b][a][d] - dg[d][a][b])
                    col.append(s * 0.5)
                row.append(col)
            out.append(row)
        return out

    @cached_property
    def mean_curvature_jets(self):
        """Ambient mean curvature vector field H[A] as jets (order 1)."""
        gam = self.christoffel_jets
        H = []
        for A in range(4):
            s = jets.constant(0.0, like=self.F[0])
            for a in range(2):
                for b in range(2):
                    term = self.d2F[a][b][A]
                    for c in range(2):
                        term = term - gam[c][a][b] * self.T[c][A]
                    s = s + self.ginv[a][b] * term
            H.append(s)
        return H

    def star_field(self, form) -> Jet3:
        """Hodge star of a parallel 2-form as a jet field (coordinate formula)."""
        return form.apply_jets(self.T[0], self.T[1]) / self.sqrt_det_g

    def laplacian_value(self, u: Jet3):
        """Laplace-Beltrami of a scalar field from its jet: g^{ab}(u_ab - Gamma^c_ab u_c)."""
        gam = self.christoffel_jets
        total = 0.0
        for a in range(2):
            for b in range(2):
                term = u.partial2(a + 1, b + 1)
                for c in range(2):
                    term = term - gam[c][a][b].v * u.partial(c + 1)
                total = total + self.ginv[a][b].v * term
        return total

    def position_dot_gradient(self, u: Jet3):
        """<F, grad u> with the surface gradient, frame-free."""
        total = 0.0
        FdotT = [sum(self.F[A].v * self.T[a][A].v for A in range(4)) for a in range(2)]
        for a in range(2):
            for b in range(2):
                total = total + self.ginv[a][b].v * u.partial(b + 1) * FdotT[a]
        return total

    # frame-level fields (scalar points only) --------------------------------

    @cached_property
    def e_jets(self):
        """Orthonormal frame e1..e4 as jet 4-vectors (gram_schmidt gauge)."""
        if not self._scalar:
            raise ValueError("frame fields require a single parameter point")
        e1 = _scale(1.0 / jets.sqrt(self.g[0][0]), self.T[0])
        w = _axpy(-_dot4(self.T[1], e1), e1, self.T[1])
        e2 = _scale(1.0 / jets.sqrt(_dot4(w, w)), w)
        frame = [e1, e2]
        for axis in (2, 3, 0, 1):
            if len(frame) == 4:
                break
            v = [jets.constant(_AXES[axis][A], like=self.F[0]) for A in range(4)]
            for prev in frame:
                v = _axpy(-_dot4(v, prev), prev, v)
            nn = _dot4(v, v)
            if nn.v > NORMAL_PROJECTION_FLOOR ** 2:
                frame.append(_scale(1.0 / jets.sqrt(nn), v))
        if len(frame) < 4:
            raise DegenerateImmersionError(
                f"could not complete a normal basis at x={self.x!r}")
        return frame

    @cached_property
    def c_jets(self):
        """Domain components of the tangent frame: e_i = sum_a c[i][a] T_a."""
        return [[sum(self.ginv[a][b] * _dot4(self.e_jets[i], self.T[b])
                     for b in range(2))
                 for a in range(2)] for i in range(2)]

    @cached_property
    def h_jets(self):
        """Second fundamental form fields h[alpha][i][j] = <DD_{e_i} e_j, e_alpha>."""
        dE = [[[self.e_jets[j][A].deriv_field(a) for A in range(4)]
               for a in (1, 2)] for j in range(4)]
        out = []
        for alpha in range(2):
            rows = []
            for i in range(2):
                cols = []
                for j in range(2):
                    nab = [sum(self.c_jets[i][a] * dE[j][a][A] for a in range(2))
                           for A in range(4)]
                    cols.append(_dot4(nab, self.e_jets[2 + alpha]))
                rows.append(cols)
            out.append(rows)
        return out

    def frame_dirderiv_values(self, i: int, vec_jets):
        """Values of the ambient directional derivative of a jet 4-vector along e_i."""
        c = [self.c_jets[i][a].v for a in range(2)]
        return np.array([sum(c[a] * vec_jets[A].partial(a + 1) for a in range(2))
                         for A in range(4)])

    def gradient_in_frame(self, u: Jet3) -> np.ndarray:
        """Components <grad u, e_k> = e_k(u) of a scalar field's surface gradient."""
        return np.array([sum(self.c_jets[k][a].v * u.partial(a + 1) for a in range(2))
                         for k in range(2)])


# -- point frame -------------------------------------------------------------------

@dataclass
class PointFrame:
    """Pointwise geometric state in a chosen orthonormal gauge.

    ``e`` holds rows e1..e4 (tangent pair first); ``sff[alpha, i, j]`` are the
    components h^alpha_ij with alpha indexing (e3, e4); ``christoffel[c, a, b]``
    is the coordinate connection.
    """

    x: np.ndarray
    F: np.ndarray
    e: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: float
    christoffel: np.ndarray
    sff: np.ndarray
    mean_curv: np.ndarray
    F_tan: np.ndarray
    F_nor: np.ndarray
    coord_tangents: np.ndarray
    gauge: str

    @property
    def tangent(self) -> np.ndarray:
        return self.e[:2]

    @property
    def normal(self) -> np.ndarray:
        return self.e[2:]

    @property
    def sff_norm_sq(self) -> float:
        return float(np.sum(self.sff ** 2))


def _star1_positive_check(frame: PointFrame):
    star1 = frame.e[0, 0] * frame.e[1, 1] - frame.e[0, 1] * frame.e[1, 0]
    if star1 <= 0.0:
        raise AssertionError(
            f"orientation violated: dx1^dx2 star {star1} <= 0 on a graph frame")


def evaluate_frame(imm: Immersion, x, gauge: str = "gram_schmidt",
                   fields: FrameFields | None = None) -> PointFrame:
    """Complete pointwise frame data at x.

    ``gram_schmidt`` orthonormalizes the coordinate tangents and completes the
    normal basis from projected ambient axes; ``adapted`` (graph kind only)
    uses the singular-value frame of the differential.
    """
    ff = fields if fields is not None else FrameFields(imm, x)
    if not ff._scalar:
        raise ValueError("evaluate_frame takes a single parameter point")
    Fv = np.array([j.v for j in ff.F])
    Tv = np.array([[ff.T[a][A].v for A in range(4)] for a in range(2)])
    gv = np.array([[ff.g[a][b].v for b in range(2)] for a in range(2)])
    ginv = np.array([[ff.ginv[a][b].v for b in range(2)] for a in range(2)])
    gam = np.array([[[ff.christoffel_jets[c][a][b].v for b in range(2)]
                     for a in range(2)] for c in range(2)])

    if gauge == "gram_schmidt":
        ev = np.array([[ff.e_jets[i][A].v for A in range(4)] for i in range(4)])
        sff = np.array([[[ff.h_jets[alpha][i][j].v for j in range(2)]
                         for i in range(2)] for alpha in range(2)])
        # symmetrize the i<->j rounding dust away; fields keep the raw values
        sff = 0.5 * (sff + np.swapaxes(sff, 1, 2))
    elif gauge == "adapted":
        if imm.kind != "graph":
            raise GaugeError(f"adapted gauge requires a graph immersion, got "
                             f"kind {imm.kind!r}")
        af = _af.build_adapted_frame(imm, ff.x)
        ev = af.e
        d2F = np.array([[[ff.d2F[a][b][A].v for A in range(4)] for b in range(2)]
                        for a in range(2)])
        sff = np.zeros((2, 2, 2))
        for alpha in range(2):
            for i in range(2):
                for j in range(2):
                    ci, cj = ev[i, :2], ev[j, :2]
                    acc = 0.0
                    for a in range(2):
                        for b in range(2):
                            acc += ci[a] * cj[b] * float(d2F[a][b] @ ev[2 + alpha])
                    sff[alpha, i, j] = acc
    else:
        raise GaugeError(f"unknown gauge {gauge!r}")

    frame = PointFrame(
        x=ff.x.copy(), F=Fv, e=ev, g=gv, g_inv=ginv,
        sqrt_det_g=float(ff.sqrt_det_g.v), christoffel=gam,
        sff=sff,
        mean_curv=np.array([sff[a, 0, 0] + sff[a, 1, 1] for a in range(2)]),
        F_tan=np.array([Fv @ ev[i] for i in range(2)]),
        F_nor=np.array([Fv @ ev[2 + a] for a in range(2)]),
        coord_tangents=Tv, gauge=gauge)
    if imm.kind == "graph":
        _star1_positive_check(frame)
    return frame


# -- operations ---------------------------------------------------------------------

def shrinker_residual(imm: Immersion, x, fields: FrameFields | None = None) -> np.ndarray:
    """Ambient vector H + F_perp / 2; zero exactly when the point self-shrinks."""
    frame = evaluate_frame(imm, x, fields=fields)
    res = np.zeros(4)
    for a in range(2):
        res += (frame.mean_curv[a] + 0.5 * frame.F_nor[a]) * frame.e[2 + a]
    return res


def laplace_beltrami(imm: Immersion, field, x,
                     fields: FrameFields | None = None) -> float:
    """Laplace-Beltrami of a scalar field given as x -> Jet3 (order >= 2)."""
    ff = fields if fields is not None else FrameFields(imm, x)
    return float(ff.laplacian_value(field(ff.x)))


def mean_curvature_normal_derivative(imm: Immersion, x,
                                     fields: FrameFields | None = None) -> np.ndarray:
    """Normal components <(D_{e_i} H)^perp, e_alpha>, shape (2, 2) = [alpha, i]."""
    ff = fields if fields is not None else FrameFields(imm, x)
    H = ff.mean_curvature_jets
    ev = np.array([[ff.e_jets[i][A].v for A in range(4)] for i in range(4)])
    out = np.zeros((2, 2))
    for i in range(2):
        dH = ff.frame_dirderiv_values(i, H)
        for alpha in range(2):
            out[alpha, i] = dH @ ev[2 + alpha]
    return out


def sff_covariant_derivative(imm: Immersion, x,
                             fields: FrameFields | None = None) -> np.ndarray:
    """Covariant derivative h^alpha_{ij,k} of the second fundamental form.

    Evaluates e_k(h^alpha_ij) + h^beta_ij <e_alpha, DD_{e_k} e_beta>
    - C^l_{ki} h^alpha_{lj} - C^l_{kj} h^alpha_{li}, with every ingredient read
    off the jet-valued frame fields.  Shape (2, 2, 2, 2) = [alpha, i, j, k].
    """
    ff = fields if fields is not None else FrameFields(imm, x)
    ev = np.array([[ff.e_jets[i][A].v for A in range(4)] for i in range(4)])
    hv = np.array([[[ff.h_jets[alpha][i][j].v for j in range(2)]
                    for i in range(2)] for alpha in range(2)])
    # ambient directional derivatives of frame vectors along e_k
    dE = np.array([[ff.frame_dirderiv_values(k, ff.e_jets[m]) for m in range(4)]
                   for k in range(2)])  # [k, m, A]
    # normal connection <e_alpha, DD_{e_k} e_beta> and tangential C^l_{ki}
    conn_n = np.einsum("kmA,nA->kmn", dE[:, 2:, :], ev[2:])  # [k, beta, alpha]
    conn_t = np.einsum("kmA,lA->kml", dE[:, :2, :], ev[:2])  # [k, i, l]
    out = np.zeros((2, 2, 2, 2))
    for alpha in range(2):
        for i in range(2):
            for j in range(2):
                base = ff.h_jets[alpha][i][j]
                for k in range(2):
                    val = sum(ff.c_jets[k][a].v * base.partial(a + 1) for a in range(2))
                    for beta in range(2):
                        val += hv[beta, i, j] * conn_n[k, beta, alpha]
                    for l in range(2):
                        val -= conn_t[k, i, l] * hv[alpha, l, j]
                        val -= conn_t[k, j, l] * hv[alpha, l, i]
                    out[alpha, i, j, k] = val
    return out

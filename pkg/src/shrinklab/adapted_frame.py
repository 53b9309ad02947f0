"""Determinant-normalized 2x2 singular decomposition and the adapted frame.

``singular_decomposition`` factors the transposed differential M = df^T as
A diag(lambda1, lambda2) B with A, B special orthogonal, via the closed-form
rotation angles (atan2 of symmetric/antisymmetric matrix parts), so there are
no iterations and no convergence concerns.  The convention is

* lambda2 = the larger-magnitude, nonnegative singular value,
* lambda1 carries the sign of J_f = det(df)  (so lambda1 * lambda2 = J_f),
* exact ties of the unsigned singular values resolve to domain bases closest
  to the coordinate axes (a1 = (1, 0)).

From the factors, the oriented bases a1, a2 (domain) and a3, a4 (range)
satisfy df(a_i) = lambda_i a_{2+i} with dx1^dx2(a1, a2) = dx3^dx4(a3, a4) = 1,
and the adapted orthonormal frame of a graph point mixes them:

    e_i     = (a_i + lambda_i a_{2+i}) / sqrt(1 + lambda_i^2)
    e_{2+i} = (a_{2+i} - lambda_i a_i) / sqrt(1 + lambda_i^2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AdaptedFrame",
    "singular_decomposition",
    "singular_decomposition_batch",
    "build_adapted_frame",
    "closed_form_stars",
]


@dataclass
class AdaptedFrame:
    """Signed singular values, oriented 2-d bases, and the ambient e-frame.

    ``a1, a2`` live in the domain factor, ``a3, a4`` in the range factor;
    ``factor_a``/``factor_b`` are the special-orthogonal matrices of the
    decomposition, kept for audit.  ``e`` is (4, 4) with rows e1..e4 and is
    filled only by :func:`build_adapted_frame`.
    """

    lambda1: float
    lambda2: float
    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    factor_a: np.ndarray
    factor_b: np.ndarray
    e: np.ndarray | None = None

    @property
    def jacobian(self) -> float:
        return self.lambda1 * self.lambda2


def singular_decomposition_batch(dfs: np.ndarray):
    """Vectorized decomposition of differentials, shape (..., 2, 2).

    Returns (lambda1, lambda2, A, B) with M = df^T = A diag(l1, l2) B,
    det A = det B = 1, under the ordering/sign convention above.
    """
    dfs = np.asarray(dfs, dtype=float)
    m = np.swapaxes(dfs, -1, -2)  # transposed-gradient layout
    a, b = m[..., 0, 0], m[..., 0, 1]
    c, d = m[..., 1, 0], m[..., 1, 1]
    e = 0.5 * (a + d)
    f = 0.5 * (a - d)
    g = 0.5 * (b + c)
    h = 0.5 * (b - c)
    q = np.hypot(e, h)
    r = np.hypot(f, g)
    sx = q + r       # unsigned larger singular value
    sy = q - r       # carries the sign of det(m)
    a1ang = np.arctan2(g, f)
    a2ang = np.arctan2(h, e)
    theta = 0.5 * (a1ang + a2ang)
    phi = 0.5 * (a1ang - a2ang)
    cph, sph = np.cos(phi), np.sin(phi)
    cth, sth = np.cos(theta), np.sin(theta)
    u = np.stack([np.stack([cph, -sph], -1), np.stack([sph, cph], -1)], -2)
    v = np.stack([np.stack([cth, -sth], -1), np.stack([sth, cth], -1)], -2)
    # swap so the larger value sits in slot 2 while keeping both dets = +1:
    # M = (U S^T) diag(sy, sx) (S V^T) with S the quarter rotation.
    s = np.array([[0.0, -1.0], [1.0, 0.0]])
    amat = u @ s.T
    bmat = s @ np.swapaxes(v, -1, -2)

    # Exact ties of the unsigned singular values (q == 0 or r == 0, which
    # includes every conformal or anticonformal df): pick the a-basis on the
    # coordinate axes, A = I, B = diag(1/l1, 1/l2) M.
    tie = (q == 0.0) | (r == 0.0)
    if np.any(tie):
        det = a * d - b * c
        lam2 = q + r                          # one summand is zero on ties
        safe2 = np.where(lam2 > 0.0, lam2, 1.0)
        lam1 = det / safe2                    # |lam1| == lam2 on ties
        safe1 = np.where(lam1 == 0.0, 1.0, lam1)
        eye = np.zeros(m.shape)
        eye[..., 0, 0] = 1.0
        eye[..., 1, 1] = 1.0
        binv = np.stack([m[..., 0, :] / safe1[..., None],
                         m[..., 1, :] / safe2[..., None]], -2)
        binv = np.where((lam2 > 0.0)[..., None, None], binv, eye)
        t = tie[..., None, None]
        amat = np.where(t, eye, amat)
        bmat = np.where(t, binv, bmat)
        sy = np.where(tie, lam1, sy)
        sx = np.where(tie, lam2, sx)
    return sy, sx, amat, bmat


def singular_decomposition(df) -> AdaptedFrame:
    """Decompose one 2x2 differential; e-frame left unfilled."""
    df = np.asarray(df, dtype=float)
    if df.shape != (2, 2) or not np.all(np.isfinite(df)):
        raise ValueError("df must be a finite 2x2 matrix")
    l1, l2, amat, bmat = singular_decomposition_batch(df[None])
    amat, bmat = amat[0], bmat[0]
    return AdaptedFrame(
        lambda1=float(l1[0]), lambda2=float(l2[0]),
        a1=amat[:, 0].copy(), a2=amat[:, 1].copy(),
        a3=bmat[0, :].copy(), a4=bmat[1, :].copy(),
        factor_a=amat, factor_b=bmat)


def build_adapted_frame(imm, x) -> AdaptedFrame:
    """Adapted frame of a graph immersion at x, with the ambient e1..e4 filled.

    a1, a2 lift into the x1x2-plane and a3, a4 into the x3x4-plane; the e-frame
    mixes them through the signed singular values.
    """
    if getattr(imm, "kind", None) != "graph":
        from .geometry import GaugeError
        raise GaugeError(f"adapted frame requires a graph immersion, got kind "
                         f"{getattr(imm, 'kind', None)!r}")
    fr = singular_decomposition(imm.differential(x))
    e = np.zeros((4, 4))
    for i, (lam, adom, aran) in enumerate(
            [(fr.lambda1, fr.a1, fr.a3), (fr.lambda2, fr.a2, fr.a4)]):
        n = math.sqrt(1.0 + lam * lam)
        e[i, :2] = adom / n
        e[i, 2:] = lam * aran / n
        e[2 + i, :2] = -lam * adom / n
        e[2 + i, 2:] = aran / n
    fr.e = e
    return fr


def closed_form_stars(lambda1: float, lambda2: float):
    """Hodge stars of the four named 2-forms from the signed singular values.

    Returns (star_eta1, star_eta2, star_eta_sum, star_eta_diff) where the
    last two belong to dx1^dx2 +/- dx3^dx4.
    """
    jf = lambda1 * lambda2
    s1 = 1.0 / np.sqrt((1.0 + lambda1 * lambda1) * (1.0 + lambda2 * lambda2))
    return s1, jf * s1, (1.0 + jf) * s1, (1.0 - jf) * s1

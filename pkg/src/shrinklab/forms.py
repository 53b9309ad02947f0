"""Constant (parallel) 2-forms on R^4 and their surface contractions.

A 2-form is stored by its six upper-triangle coefficients w_AB (A < B), so
antisymmetry is exact by construction.  The star of a form on a surface is
the coordinate-frame value Omega(dF/du, dF/dv) / sqrt(det g), which equals
the orthonormal-frame value and is independent of the frame choice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import FrameFields, Immersion, PointFrame

__all__ = [
    "ParallelForm2", "eta1", "eta2", "eta_sum", "eta_diff", "named_forms",
    "hodge_star", "contraction_i_alpha", "contraction_i_alpha_j_beta",
    "star_gradient",
]

_PAIRS = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))


@dataclass(frozen=True)
class ParallelForm2:
    """Constant 2-form sum_{A<B} w_AB dx_A ^ dx_B."""

    coeff: tuple[float, float, float, float, float, float]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.coeff) != 6:
            raise ValueError("a 2-form on R^4 has 6 coefficients "
                             "(w12, w13, w14, w23, w24, w34)")
        object.__setattr__(self, "coeff", tuple(float(c) for c in self.coeff))

    def matrix(self) -> np.ndarray:
        """Full antisymmetric 4x4 coefficient matrix."""
        m = np.zeros((4, 4))
        for w, (a, b) in zip(self.coeff, _PAIRS):
            m[a, b] = w
            m[b, a] = -w
        return m

    def apply_values(self, u, v) -> float:
        """Omega(u, v) for numeric 4-vectors."""
        total = 0.0
        for w, (a, b) in zip(self.coeff, _PAIRS):
            if w != 0.0:
                total += w * (u[a] * v[b] - u[b] * v[a])
        return total

    def apply_jets(self, u, v):
        """Omega(u, v) for 4-vectors of jets."""
        total = None
        for w, (a, b) in zip(self.coeff, _PAIRS):
            if w != 0.0:
                term = (u[a] * v[b] - u[b] * v[a]) * w
                total = term if total is None else total + term
        if total is None:
            from . import jets
            return jets.constant(0.0, like=u[0])
        return total

    def __str__(self):
        return self.name or f"form{self.coeff}"


def eta1() -> ParallelForm2:
    """dx1 ^ dx2."""
    return ParallelForm2((1, 0, 0, 0, 0, 0), name="eta1")


def eta2() -> ParallelForm2:
    """dx3 ^ dx4."""
    return ParallelForm2((0, 0, 0, 0, 0, 1), name="eta2")


def eta_sum() -> ParallelForm2:
    """dx1 ^ dx2 + dx3 ^ dx4."""
    return ParallelForm2((1, 0, 0, 0, 0, 1), name="etaP")


def eta_diff() -> ParallelForm2:
    """dx1 ^ dx2 - dx3 ^ dx4."""
    return ParallelForm2((1, 0, 0, 0, 0, -1), name="etaPP")


def named_forms() -> dict[str, ParallelForm2]:
    return {"eta1": eta1(), "eta2": eta2(), "etaP": eta_sum(), "etaPP": eta_diff()}


# -- operations ---------------------------------------------------------------

def hodge_star(form: ParallelForm2, frame: PointFrame) -> float:
    """Omega(X1, X2) / sqrt(det g) with the coordinate tangent vectors."""
    t = frame.coord_tangents
    return form.apply_values(t[0], t[1]) / frame.sqrt_det_g


def contraction_i_alpha(form: ParallelForm2, frame: PointFrame) -> np.ndarray:
    """Matrix Omega_{i alpha}: tangent slot i replaced by normal e_alpha.

    Row i=1 is Omega(e_alpha, e2), row i=2 is Omega(e1, e_alpha); returned
    shape (2, 2) indexed [i, alpha] with alpha over (e3, e4).
    """
    e = frame.e
    out = np.zeros((2, 2))
    for alpha in range(2):
        out[0, alpha] = form.apply_values(e[2 + alpha], e[1])
        out[1, alpha] = form.apply_values(e[0], e[2 + alpha])
    return out


def contraction_i_alpha_j_beta(form: ParallelForm2, frame: PointFrame) -> np.ndarray:
    """Table Omega_{i alpha, j beta} for a surface: both slots normal.

    Only (i, j) = (1, 2) carries data in dimension two; the (2, 1) entries
    are the antisymmetric mirror and the diagonal vanishes.  Shape
    (2, 2, 2, 2) indexed [i, j, alpha, beta].
    """
    e = frame.e
    out = np.zeros((2, 2, 2, 2))
    for alpha in range(2):
        for beta in range(2):
            value = form.apply_values(e[2 + alpha], e[2 + beta])
            out[0, 1, alpha, beta] = value
            out[1, 0, beta, alpha] = value
    return out


def star_gradient(form: ParallelForm2, imm: Immersion, x, method: str = "frame_formula",
                  fields: FrameFields | None = None) -> np.ndarray:
    """Surface gradient of the star, as components along e1, e2.

    ``frame_formula`` contracts the second fundamental form with the mixed
    form slots, sum_i h^alpha_{ik} Omega_{i alpha}; ``direct`` differentiates
    the star scalar field through jets.  The two agree on any immersion.
    """
    ff = fields if fields is not None else FrameFields(imm, x)
    if method == "direct":
        return ff.gradient_in_frame(ff.star_field(form))
    if method != "frame_formula":
        raise ValueError(f"unknown method {method!r}")
    from .geometry import evaluate_frame
    frame = evaluate_frame(imm, x, fields=ff)
    omega = contraction_i_alpha(form, frame)
    out = np.zeros(2)
    for k in range(2):
        out[k] = sum(frame.sff[alpha, i, k] * omega[i, alpha]
                     for i in range(2) for alpha in range(2))
    return out

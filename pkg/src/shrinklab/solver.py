"""Nonlinear least squares for the discrete graphical self-shrinker system.

Unknowns are the two map components on the interior nodes of a uniform grid
over [-R, R]^2 with Dirichlet data from an affine map's trace.  The residual
discretizes the normal components of H + F_perp/2 with second-order central
differences, the Jacobian is assembled sparsely from stencil-local coloring
(nine-point dependency box, (i mod 3, j mod 3) x component classes, 18
residual evaluations), and a Levenberg-Marquardt loop with multiplicative
damping drives the residual down; accepted steps strictly decrease the norm.

Affine data through the origin is an exact root of the discrete system, so
probe runs that relax random interior perturbations back to the boundary's
affine map are evidence consistent with plane rigidity, never a proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = [
    "DiscreteGraph", "SolverConfig", "SolverReport", "ProbeReport",
    "DegenerateNodeError",
    "assemble_residual", "gauss_newton_solve", "bernstein_probe",
]

_METRIC_FLOOR = 1e-10
_NORMAL_FLOOR = 1e-6


class DegenerateNodeError(ValueError):
    """Discrete metric (or normal completion) degenerated at a named node."""


def _smooth_noise(n: int, rng) -> np.ndarray:
    """Random smooth field on the (n+1)^2 grid, sup-norm 1, zero boundary."""
    from scipy.interpolate import RectBivariateSpline
    t = np.linspace(0.0, 1.0, 6)
    coarse = rng.uniform(-1.0, 1.0, (6, 6))
    s = RectBivariateSpline(t, t, coarse, kx=3, ky=3)
    u = np.linspace(0.0, 1.0, n + 1)
    fine = s(u, u)
    window = np.outer(np.sin(np.pi * u) ** 2, np.sin(np.pi * u) ** 2)
    field = fine * window
    peak = np.max(np.abs(field))
    return field / peak if peak > 0 else field


@dataclass
class DiscreteGraph:
    """Gridded map values with an affine Dirichlet boundary.

    ``f1``/``f2`` are (n+1, n+1) arrays indexed [i, j] over x1 = -R + 2Ri/n,
    x2 = -R + 2Rj/n.  Boundary nodes always carry the trace of x -> Lx + c.
    """

    n: int
    half_width: float
    f1: np.ndarray
    f2: np.ndarray
    boundary_map: np.ndarray
    boundary_offset: np.ndarray

    def __post_init__(self):
        if self.n < 8:
            raise ValueError(f"grid must have n >= 8 cells per side, got {self.n}")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        shape = (self.n + 1, self.n + 1)
        if self.f1.shape != shape or self.f2.shape != shape:
            raise ValueError(f"value arrays must have shape {shape}")
        self.boundary_map = np.asarray(self.boundary_map, float).reshape(2, 2)
        self.boundary_offset = np.asarray(self.boundary_offset, float).reshape(2)
        self.apply_boundary()

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / self.n

    def nodes(self):
        x = np.linspace(-self.half_width, self.half_width, self.n + 1)
        return np.meshgrid(x, x, indexing="ij")

    def affine_values(self):
        x1, x2 = self.nodes()
        L, c = self.boundary_map, self.boundary_offset
        return (L[0, 0] * x1 + L[0, 1] * x2 + c[0],
                L[1, 0] * x1 + L[1, 1] * x2 + c[1])

    def apply_boundary(self):
        a1, a2 = self.affine_values()
        for f, a in ((self.f1, a1), (self.f2, a2)):
            f[0, :], f[-1, :] = a[0, :], a[-1, :]
            f[:, 0], f[:, -1] = a[:, 0], a[:, -1]

    @classmethod
    def from_map(cls, boundary_map, n: int, half_width: float,
                 boundary_offset=(0.0, 0.0), perturbation: float = 0.0,
                 rng=None) -> "DiscreteGraph":
        """Affine data everywhere, plus an optional random interior bump.

        The perturbation is a smooth random field of sup-amplitude
        ``perturbation`` vanishing at the boundary (coarse random noise
        upsampled by a cubic spline under a sine-squared window); node-wise
        white noise of the same amplitude would carry mesh-scale gradients
        that say nothing about the continuum problem.
        """
        L = np.asarray(boundary_map, float).reshape(2, 2)
        c = np.asarray(boundary_offset, float).reshape(2)
        x = np.linspace(-half_width, half_width, n + 1)
        x1, x2 = np.meshgrid(x, x, indexing="ij")
        f1 = L[0, 0] * x1 + L[0, 1] * x2 + c[0]
        f2 = L[1, 0] * x1 + L[1, 1] * x2 + c[1]
        if perturbation:
            if rng is None:
                rng = np.random.default_rng(0)
            f1 += perturbation * _smooth_noise(n, rng)
            f2 += perturbation * _smooth_noise(n, rng)
        return cls(n=n, half_width=half_width, f1=f1, f2=f2,
                   boundary_map=L, boundary_offset=c)

    def interior_vector(self) -> np.ndarray:
        return np.concatenate([self.f1[1:-1, 1:-1].ravel(),
                               self.f2[1:-1, 1:-1].ravel()])

    def with_interior(self, u: np.ndarray) -> "DiscreteGraph":
        m = (self.n - 1) ** 2
        f1 = self.f1.copy()
        f2 = self.f2.copy()
        f1[1:-1, 1:-1] = u[:m].reshape(self.n - 1, self.n - 1)
        f2[1:-1, 1:-1] = u[m:].reshape(self.n - 1, self.n - 1)
        return DiscreteGraph(n=self.n, half_width=self.half_width, f1=f1, f2=f2,
                             boundary_map=self.boundary_map,
                             boundary_offset=self.boundary_offset)


def _interior_geometry(dg: DiscreteGraph, check: bool = True):
    """Central-difference geometry at interior nodes.

    Returns a dict of (n-1, n-1) arrays: first/second derivatives, metric,
    normal frames, residual components, Jacobian determinant, and the full
    squared norm of the second fundamental form.
    """
    h = dg.h
    f = np.stack([dg.f1, dg.f2])  # (2, n+1, n+1)
    c = f[:, 1:-1, 1:-1]
    fx1 = (f[:, 2:, 1:-1] - f[:, :-2, 1:-1]) / (2 * h)
    fx2 = (f[:, 1:-1, 2:] - f[:, 1:-1, :-2]) / (2 * h)
    fx1x1 = (f[:, 2:, 1:-1] - 2 * c + f[:, :-2, 1:-1]) / (h * h)
    fx2x2 = (f[:, 1:-1, 2:] - 2 * c + f[:, 1:-1, :-2]) / (h * h)
    fx1x2 = (f[:, 2:, 2:] - f[:, 2:, :-2] - f[:, :-2, 2:] + f[:, :-2, :-2]) \
        / (4 * h * h)

    g11 = 1.0 + fx1[0] ** 2 + fx1[1] ** 2
    g12 = fx1[0] * fx2[0] + fx1[1] * fx2[1]
    g22 = 1.0 + fx2[0] ** 2 + fx2[1] ** 2
    det = g11 * g22 - g12 * g12
    if check and np.any(det <= _METRIC_FLOOR):
        i, j = np.unravel_index(int(np.argmin(det)), det.shape)
        raise DegenerateNodeError(
            f"discrete metric degenerate (det={det[i, j]:.3e}) at interior "
            f"node ({i + 1}, {j + 1})")

    # ambient 4-vectors at interior nodes
    x1, x2 = dg.nodes()
    xi1, xi2 = x1[1:-1, 1:-1], x2[1:-1, 1:-1]
    shape = xi1.shape
    T1 = np.stack([np.ones(shape), np.zeros(shape), fx1[0], fx1[1]])
    T2 = np.stack([np.zeros(shape), np.ones(shape), fx2[0], fx2[1]])
    F = np.stack([xi1, xi2, c[0], c[1]])

    inv11, inv12, inv22 = g22 / det, -g12 / det, g11 / det

    def tangential(v):
        vt1 = np.einsum("aij,aij->ij", v, T1)
        vt2 = np.einsum("aij,aij->ij", v, T2)
        w1 = inv11 * vt1 + inv12 * vt2
        w2 = inv12 * vt1 + inv22 * vt2
        return w1 * T1 + w2 * T2

    # Gram-Schmidt normal completion, ambient axes in order 3, 4 (graphs
    # never exhaust these unless the gradient is ~1e6)
    n1 = np.zeros_like(T1)
    n1[2] = 1.0
    n1 = n1 - tangential(n1)
    n1norm = np.sqrt(np.einsum("aij,aij->ij", n1, n1))
    n2 = np.zeros_like(T1)
    n2[3] = 1.0
    n2 = n2 - tangential(n2)
    if check and np.any(n1norm <= _NORMAL_FLOOR):
        i, j = np.unravel_index(int(np.argmin(n1norm)), n1norm.shape)
        raise DegenerateNodeError(
            f"normal completion failed at interior node ({i + 1}, {j + 1})")
    n1 = n1 / n1norm
    n2 = n2 - np.einsum("aij,aij->ij", n2, n1) * n1
    n2norm = np.sqrt(np.einsum("aij,aij->ij", n2, n2))
    if check and np.any(n2norm <= _NORMAL_FLOOR):
        i, j = np.unravel_index(int(np.argmin(n2norm)), n2norm.shape)
        raise DegenerateNodeError(
            f"normal completion failed at interior node ({i + 1}, {j + 1})")
    n2 = n2 / n2norm

    # tangential Laplacian of position: only the (f1, f2) slots are nonzero
    Hc = inv11 * fx1x1 + 2 * inv12 * fx1x2 + inv22 * fx2x2  # (2, ...)
    Hamb = np.stack([np.zeros(shape), np.zeros(shape), Hc[0], Hc[1]])
    Hperp = Hamb - tangential(Hamb)
    V = Hperp + 0.5 * (F - tangential(F))
    r1 = np.einsum("aij,aij->ij", V, n1)
    r2 = np.einsum("aij,aij->ij", V, n2)

    jf = fx1[0] * fx2[1] - fx2[0] * fx1[1]

    # squared norm of the second fundamental form, frame-free contraction
    S = {(0, 0): fx1x1, (0, 1): fx1x2, (1, 0): fx1x2, (1, 1): fx2x2}
    inv = {(0, 0): inv11, (0, 1): inv12, (1, 0): inv12, (1, 1): inv22}
    B = {}
    for a in range(2):
        for b in range(2):
            amb = np.stack([np.zeros(shape), np.zeros(shape),
                            S[(a, b)][0], S[(a, b)][1]])
            B[(a, b)] = amb - tangential(amb)
    sffsq = np.zeros(shape)
    for a in range(2):
        for b in range(2):
            for cc in range(2):
                for d in range(2):
                    sffsq += inv[(a, cc)] * inv[(b, d)] * np.einsum(
                        "kij,kij->ij", B[(a, b)], B[(cc, d)])

    return {"r1": r1, "r2": r2, "jf": jf, "sffsq": sffsq, "det": det}


def assemble_residual(dg: DiscreteGraph) -> np.ndarray:
    """Residual vector: the two normal shrinker components per interior node."""
    geo = _interior_geometry(dg)
    return np.stack([geo["r1"].ravel(), geo["r2"].ravel()], axis=1).ravel()


@dataclass
class SolverConfig:
    """Levenberg-Marquardt settings.

    ``tol`` is the per-node convergence target: the solve stops once the RMS
    of the residual components drops to tol or below.
    """

    tol: float = 1e-10
    max_iter: int = 100
    lm_lambda0: float = 1e-3
    lm_grow: float = 10.0
    lm_shrink: float = 3.0
    lm_lambda_max: float = 1e12
    fd_step: float = 1e-7


@dataclass
class SolverReport:
    iterations: int
    residual_history: list
    final_max_residual: float
    final_affine_distance: float
    jf_min: float
    jf_max: float
    max_sff_norm: float
    converged: bool
    message: str = ""

    def to_dict(self) -> dict:
        return {"iterations": self.iterations,
                "residual_history": self.residual_history,
                "final_max_residual": self.final_max_residual,
                "final_affine_distance": self.final_affine_distance,
                "jf_range": [self.jf_min, self.jf_max],
                "max_sff_norm": self.max_sff_norm,
                "converged": self.converged,
                "message": self.message}


def _affine_distance(dg: DiscreteGraph) -> float:
    """Sup distance of the grid values to their best-fit affine map."""
    x1, x2 = dg.nodes()
    design = np.stack([np.ones(x1.size), x1.ravel(), x2.ravel()], axis=1)
    worst = 0.0
    for f in (dg.f1, dg.f2):
        coef, *_ = np.linalg.lstsq(design, f.ravel(), rcond=None)
        worst = max(worst, float(np.max(np.abs(f.ravel() - design @ coef))))
    return worst


def _coloring(n: int):
    """Column groups and their affected residual rows for the 9-point box.

    Yields (columns, rows_per_column) where columns index the packed unknown
    vector; same-class nodes are at least 3 apart, so their stencil boxes hit
    disjoint residual rows.
    """
    m = n - 1
    node_id = np.arange(m * m).reshape(m, m)
    groups = []
    for comp in range(2):
        for ci in range(3):
            for cj in range(3):
                ii, jj = np.meshgrid(np.arange(ci, m, 3), np.arange(cj, m, 3),
                                     indexing="ij")
                ii, jj = ii.ravel(), jj.ravel()
                if ii.size == 0:
                    continue
                cols = comp * m * m + node_id[ii, jj]
                rows = []
                for q in range(ii.size):
                    i0, j0 = ii[q], jj[q]
                    di = np.arange(max(0, i0 - 1), min(m, i0 + 2))
                    dj = np.arange(max(0, j0 - 1), min(m, j0 + 2))
                    box = node_id[np.ix_(di, dj)].ravel()
                    rows.append(np.concatenate([2 * box, 2 * box + 1]))
                groups.append((cols, rows))
    return groups


def _jacobian(dg: DiscreteGraph, u: np.ndarray, r0: np.ndarray,
              groups, step: float) -> sp.csr_matrix:
    rows_all, cols_all, vals_all = [], [], []
    for cols, rows in groups:
        up = u.copy()
        up[cols] += step
        rp = assemble_residual(dg.with_interior(up))
        dr = (rp - r0) / step
        for q, col in enumerate(cols):
            rr = rows[q]
            rows_all.append(rr)
            cols_all.append(np.full(rr.size, col))
            vals_all.append(dr[rr])
    rows_all = np.concatenate(rows_all)
    cols_all = np.concatenate(cols_all)
    vals_all = np.concatenate(vals_all)
    nr, nc = r0.size, u.size
    return sp.coo_matrix((vals_all, (rows_all, cols_all)), shape=(nr, nc)).tocsr()


def gauss_newton_solve(dg0: DiscreteGraph,
                       cfg: SolverConfig | None = None) -> tuple[DiscreteGraph, SolverReport]:
    """Levenberg-Marquardt relaxation of the discrete shrinker residual.

    Damping starts at ``lm_lambda0``, grows 10x on rejected steps and shrinks
    3x on accepted ones; exceeding ``lm_lambda_max`` ends the run with a
    non-converged report instead of an exception.
    """
    cfg = cfg or SolverConfig()
    dg = dg0.with_interior(dg0.interior_vector())  # normalized copy
    u = dg.interior_vector()
    r = assemble_residual(dg)
    nodes = (dg.n - 1) ** 2
    rms = lambda v: float(np.linalg.norm(v)) / np.sqrt(2 * nodes)
    history = [float(np.linalg.norm(r))]
    geo = _interior_geometry(dg)
    jf_min, jf_max = float(geo["jf"].min()), float(geo["jf"].max())
    groups = _coloring(dg.n)
    lam = cfg.lm_lambda0
    converged = bool(rms(r) <= cfg.tol)
    message = "converged at start" if converged else ""
    iterations = 0
    while not converged and iterations < cfg.max_iter:
        iterations += 1
        J = _jacobian(dg, u, r, groups, cfg.fd_step)
        JtJ = (J.T @ J).tocsc()
        Jtr = J.T @ r
        accepted = False
        while not accepted:
            A = JtJ + lam * sp.identity(u.size, format="csc")
            delta = spla.spsolve(A, -Jtr)
            trial = u + delta
            rt = assemble_residual(dg.with_interior(trial))
            if np.linalg.norm(rt) < np.linalg.norm(r):
                u, r = trial, rt
                dg = dg.with_interior(u)
                history.append(float(np.linalg.norm(r)))
                geo = _interior_geometry(dg)
                jf_min = min(jf_min, float(geo["jf"].min()))
                jf_max = max(jf_max, float(geo["jf"].max()))
                lam = max(lam / cfg.lm_shrink, 1e-15)
                accepted = True
            else:
                lam *= cfg.lm_grow
                if lam > cfg.lm_lambda_max:
                    break
        if not accepted:
            message = f"damping exceeded {cfg.lm_lambda_max:.0e}"
            break
        if rms(r) <= cfg.tol:
            converged = True
            message = "residual tolerance reached"
    if not converged and not message:
        message = "iteration limit reached"
    geo = _interior_geometry(dg)
    report = SolverReport(
        iterations=iterations,
        residual_history=history,
        final_max_residual=float(np.max(np.abs(r))),
        final_affine_distance=_affine_distance(dg),
        jf_min=jf_min, jf_max=jf_max,
        max_sff_norm=float(np.sqrt(np.max(geo["sffsq"]))),
        converged=converged, message=message)
    return dg, report


@dataclass
class ProbeReport:
    """Aggregate of randomized relaxation runs for one boundary map."""

    boundary_map: list
    jacobian: float
    condition_sum_positive: bool      # J_f + 1 > 0 on the boundary map
    condition_diff_positive: bool     # 1 - J_f > 0 on the boundary map
    seeds: int
    fraction_converged: float
    max_affine_distance: float
    jf_min: float
    jf_max: float
    max_sff_norm: float
    runs: list = dc_field(default_factory=list)

    def to_dict(self) -> dict:
        return {"boundary_map": self.boundary_map, "jacobian": self.jacobian,
                "condition_sum_positive": self.condition_sum_positive,
                "condition_diff_positive": self.condition_diff_positive,
                "seeds": self.seeds,
                "fraction_converged": self.fraction_converged,
                "max_affine_distance": self.max_affine_distance,
                "jf_range": [self.jf_min, self.jf_max],
                "max_sff_norm": self.max_sff_norm,
                "runs": self.runs}


def bernstein_probe(boundary_map, seeds: int, cfg: SolverConfig | None = None,
                    n: int = 32, half_width: float = 3.0,
                    perturbation: float = 0.1, seed0: int = 0) -> ProbeReport:
    """Relax random interior perturbations of an affine map and aggregate.

    Each seed perturbs the interior by ``perturbation * uniform(-1, 1)`` and
    runs the solver; the report records which Jacobian conditions the
    boundary map satisfies and the observed outcome.  Failures aggregate into
    ``fraction_converged`` instead of raising.
    """
    L = np.asarray(boundary_map, float).reshape(2, 2)
    jf = float(np.linalg.det(L))
    runs = []
    n_conv = 0
    max_dist = 0.0
    max_sff = 0.0
    jf_min, jf_max = np.inf, -np.inf
    for k in range(seeds):
        rng = np.random.default_rng(seed0 + k)
        dg0 = DiscreteGraph.from_map(L, n=n, half_width=half_width,
                                     perturbation=perturbation, rng=rng)
        _, rep = gauss_newton_solve(dg0, cfg)
        n_conv += bool(rep.converged)
        max_dist = max(max_dist, rep.final_affine_distance)
        max_sff = max(max_sff, rep.max_sff_norm)
        jf_min = min(jf_min, rep.jf_min)
        jf_max = max(jf_max, rep.jf_max)
        runs.append({"seed": seed0 + k, "converged": rep.converged,
                     "iterations": rep.iterations,
                     "affine_distance": rep.final_affine_distance,
                     "max_sff_norm": rep.max_sff_norm})
    return ProbeReport(
        boundary_map=L.ravel().tolist(), jacobian=jf,
        condition_sum_positive=jf + 1.0 > 0.0,
        condition_diff_positive=1.0 - jf > 0.0,
        seeds=seeds, fraction_converged=n_conv / seeds if seeds else 0.0,
        max_affine_distance=max_dist, jf_min=float(jf_min), jf_max=float(jf_max),
        max_sff_norm=max_sff, runs=runs)

"""Command-line entry point: reproducible verification and experiment runs.

Subcommands map onto the library modules:

* ``verify``  -- run the randomized identity corpus, emit JSONL residual
  records plus a CSV summary, exit nonzero if any tolerance fails;
* ``star``    -- Hodge stars of the named forms for a graph map at a point;
* ``svd``     -- determinant-normalized singular decomposition of a 2x2;
* ``solve``   -- relax a discrete graph to the shrinker system;
* ``growth``  -- area-in-ball table (volume growth witness);
* ``chain``   -- weighted estimate chain report;
* ``probe``   -- randomized relaxation probe for a boundary map.

Every run resolves its configuration from defaults, an optional TOML file,
repeatable ``--set section.key=value`` overrides, and dedicated flags (in
that precedence order), embeds the resolved configuration and its SHA-256 in
the JSON report, and is byte-deterministic apart from the timestamp field.

Exit codes: 0 success, 1 assertion (tolerance/convergence) failure, 2 config
or usage error, 3 precondition violation (degenerate geometry, domain error).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
import time
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from . import adapted_frame as af
from . import expr as expr_mod
from . import forms as forms_mod
from . import geometry as geo
from . import identities as idn
from . import integrals as ig
from . import solver as sv
from .jets import JetDomainError

__all__ = ["main", "RunConfig", "ToleranceFailure"]

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_PRECONDITION = 3


class ToleranceFailure(AssertionError):
    """A hard verification assertion exceeded its stated tolerance."""


class ConfigError(ValueError):
    pass


_PRECONDITION_ERRORS = (geo.DegenerateImmersionError, geo.GaugeError,
                        JetDomainError, ig.PreconditionError,
                        sv.DegenerateNodeError)
_CONFIG_ERRORS = (ConfigError, expr_mod.ExprError, tomllib.TOMLDecodeError)


class RunConfig:
    """Resolved options of one run, hashable for reproducibility."""

    def __init__(self, command: str, options: dict):
        self.command = command
        self.options = options

    def sha256(self) -> str:
        blob = json.dumps({"command": self.command, "options": self.options},
                          sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def report_header(self) -> dict:
        return {"command": self.command, "config": self.options,
                "config_sha256": self.sha256(),
                "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S")}


_DEFAULTS: dict[str, dict] = {
    "verify": {"suite": "full", "seed": 1234},
    "star": {"map": "x2;-x1", "at": "1,0"},
    "svd": {"matrix": "3,0,0,4"},
    "solve": {"n": 32, "half_width": 3.0, "boundary_map": "0,1,-1,0",
              "boundary_offset": "0,0", "perturbation": 0.1, "seed": 0,
              "tol": 1e-10, "max_iter": 100},
    "growth": {"kind": "plane", "f1": "0", "f2": "0",
               "linear": "0,0,0,0", "offset": "0,0,0,0",
               "r1": 1.4142135623730951, "r2": 1.4142135623730951,
               "csv": "", "radii": "1,2,4,8", "resolution": 128,
               "rule": "gauss_legendre_4"},
    "chain": {"kind": "plane", "f1": "0", "f2": "0",
              "linear": "0,0,0,0", "offset": "0,0,0,0",
              "r1": 1.4142135623730951, "r2": 1.4142135623730951,
              "csv": "", "r": 2.0, "resolution": 96, "margin": 1.5,
              "g": "etaP", "K": "zero"},
    "probe": {"boundary_map": "0,0,0,0", "seeds": 5, "n": 32,
              "half_width": 3.0, "perturbation": 0.1, "seed": 0,
              "tol": 1e-10, "max_iter": 100},
}


def _coerce(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    return text


def resolve_config(command: str, config_path: str | None,
                   overrides: list[str], flag_values: dict) -> RunConfig:
    options = dict(_DEFAULTS[command])
    if config_path:
        try:
            with open(config_path, "rb") as fh:
                data = tomllib.load(fh)
        except OSError as e:
            raise ConfigError(f"cannot read config file: {e}") from e
        section = data.get(command, {})
        if not isinstance(section, dict):
            raise ConfigError(f"config section [{command}] must be a table")
        for key, value in section.items():
            if key not in options:
                raise ConfigError(f"unknown config key {command}.{key}")
            options[key] = value
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        dotted, value = item.split("=", 1)
        parts = dotted.split(".")
        if len(parts) == 2:
            section, key = parts
            if section != command:
                raise ConfigError(f"--set section {section!r} does not match "
                                  f"command {command!r}")
        elif len(parts) == 1:
            key = parts[0]
        else:
            raise ConfigError(f"--set key {dotted!r} too deep")
        if key not in options:
            raise ConfigError(f"unknown config key {command}.{key}")
        options[key] = _coerce(value)
    for key, value in flag_values.items():
        if value is not None:
            options[key] = value
    return RunConfig(command, options)


def _floats(text: str, count: int, what: str) -> list[float]:
    parts = [p for p in str(text).replace(";", ",").split(",") if p.strip()]
    if len(parts) != count:
        raise ConfigError(f"{what} needs {count} comma-separated numbers, "
                          f"got {text!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"bad number in {what}: {e}") from e


def _surface_from(options: dict) -> geo.Immersion:
    kind = options["kind"]
    if kind == "graph":
        return geo.GraphImmersion.from_exprs(options["f1"], options["f2"])
    if kind == "plane":
        linear = np.array(_floats(options["linear"], 4, "linear")).reshape(2, 2)
        offset = np.array(_floats(options["offset"], 4, "offset"))
        return geo.PlaneImmersion(linear=linear, offset=offset)
    if kind == "torus":
        return geo.ProductTorus(float(options["r1"]), float(options["r2"]))
    raise ConfigError(f"unknown surface kind {options['kind']!r}")


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2,
                               default=_json_default) + "\n")


# -- verify -----------------------------------------------------------------------

_SUITES = {
    "full": {"graphs": 50, "points": 10, "rand_forms": 10,
             "shrinker_points": 20, "svd_samples": 100000},
    "quick": {"graphs": 8, "points": 3, "rand_forms": 3,
              "shrinker_points": 6, "svd_samples": 5000},
}

_TOLERANCES = {
    "star_laplacian": 1e-8,
    "contraction_eta1": 1e-9,
    "contraction_eta2": 1e-9,
    "codazzi": 1e-8,
    "shrinker_residual": 1e-12,
    "shrinker_star": 1e-8,
    "structure_eq": 1e-8,
    "graph_star": 1e-8,
    "graph_star_additivity": 1e-10,
    "svd_jacobian": 1e-10,
    "svd_stars": 1e-10,
    "svd_bases": 1e-12,
    "star_ratio": 1e-10,
}


def run_verify(cfg: RunConfig, out_dir: Path) -> int:
    suite = cfg.options["suite"]
    if suite not in _SUITES:
        raise ConfigError(f"unknown suite {suite!r}")
    sizes = _SUITES[suite]
    seed = int(cfg.options["seed"])
    records: list[dict] = []
    maxima: dict[str, dict] = {}

    def track(name: str, rel: float, record: dict | None = None):
        slot = maxima.setdefault(name, {"samples": 0, "max": 0.0})
        slot["samples"] += 1
        slot["max"] = max(slot["max"], rel)
        if record is not None:
            records.append(record)

    graphs = idn.random_graph_corpus(sizes["graphs"], seed)
    points = idn.random_points(sizes["points"], seed + 1)
    all_forms = (list(forms_mod.named_forms().values())
                 + idn.random_forms(sizes["rand_forms"], seed + 2))

    for gi, g in enumerate(graphs):
        for x in points:
            ff = geo.FrameFields(g, x)
            for form in all_forms:
                r = idn.check_star_laplacian(g, x, form, fields=ff)
                track("star_laplacian", r.rel_residual,
                      dict(r.to_dict(), surface=f"graph-{gi}"))
            for which in ("eta1", "eta2"):
                r = idn.check_contraction_closed_form(g, x, which, fields=ff)
                track(f"contraction_{which}", r.rel_residual,
                      dict(r.to_dict(), surface=f"graph-{gi}"))
            defects = {w: idn.check_graph_star_equation(g, x, w, fields=ff)
                       for w in idn.GRAPH_STAR_EQUATIONS}
            add = max(abs(defects["eta_sum"].defect
                          - (defects["eta1"].defect + defects["eta2"].defect)),
                      abs(defects["eta_diff"].defect
                          - (defects["eta1"].defect - defects["eta2"].defect)))
            track("graph_star_additivity", add,
                  {"name": "graph_star_additivity", "surface": f"graph-{gi}",
                   "point": list(map(float, x)), "abs_residual": add})
            r = idn.check_codazzi_symmetry(g, x, fields=ff)
            track("codazzi", r.rel_residual,
                  dict(r.to_dict(), surface=f"graph-{gi}"))

    # exact shrinkers: linear graphs through 0 and the balanced torus
    rng = np.random.default_rng(seed + 3)
    shrinkers = [("torus-sqrt2", geo.ProductTorus(np.sqrt(2.0), np.sqrt(2.0)))]
    for k in range(3):
        L = [float(v) for v in rng.uniform(-1.2, 1.2, 4)]
        shrinkers.append((f"linear-graph-{k}", geo.GraphImmersion.from_exprs(
            f"{L[0]!r}*x1 + {L[1]!r}*x2", f"{L[2]!r}*x1 + {L[3]!r}*x2")))
    spts = idn.random_points(sizes["shrinker_points"], seed + 4, box=2.0)
    for label, imm in shrinkers:
        for x in spts:
            ff = geo.FrameFields(imm, x)
            norm = float(np.linalg.norm(geo.shrinker_residual(imm, x, fields=ff)))
            track("shrinker_residual", norm,
                  {"name": "shrinker_residual", "surface": label,
                   "point": list(map(float, x)), "abs_residual": norm})
            for form in all_forms[:6]:
                r = idn.check_shrinker_star_identity(imm, x, form, fields=ff)
                track("shrinker_star", r.rel_residual,
                      dict(r.to_dict(), surface=label))
                r = idn.check_structure_equation(imm, x, form, fields=ff)
                track("structure_eq", r.rel_residual,
                      dict(r.to_dict(), surface=label))
            if imm.kind == "graph":
                for which in idn.GRAPH_STAR_EQUATIONS:
                    r = idn.check_graph_star_equation(imm, x, which, fields=ff)
                    track("graph_star", r.rel_residual,
                          dict(r.to_dict(), surface=label))

    # singular-decomposition sweep
    rng = np.random.default_rng(seed + 5)
    dfs = rng.uniform(-10.0, 10.0, (sizes["svd_samples"], 2, 2))
    l1, l2, A, B = af.singular_decomposition_batch(dfs)
    jf = dfs[:, 0, 0] * dfs[:, 1, 1] - dfs[:, 0, 1] * dfs[:, 1, 0]
    track("svd_jacobian", float(np.max(np.abs(l1 * l2 - jf))))
    a1 = A[:, :, 0]
    a3 = B[:, 0, :]
    dfa1 = np.einsum("nij,nj->ni", dfs, a1)
    track("svd_bases", float(np.max(np.abs(dfa1 - l1[:, None] * a3))))
    s1c, s2c, spc, smc = af.closed_form_stars(l1, l2)
    den = np.sqrt((1 + dfs[:, 0, 0] ** 2 + dfs[:, 1, 0] ** 2)
                  * (1 + dfs[:, 0, 1] ** 2 + dfs[:, 1, 1] ** 2)
                  - (dfs[:, 0, 0] * dfs[:, 0, 1] + dfs[:, 1, 0] * dfs[:, 1, 1]) ** 2)
    track("svd_stars", float(np.max(np.abs(s1c - 1.0 / den))))
    track("star_ratio", float(np.max(np.abs(s2c - jf * (1.0 / den)))))

    rows = []
    all_pass = True
    for name in sorted(maxima):
        tol = _TOLERANCES["graph_star" if name.startswith("graph_star_eta")
                          else name]
        ok = maxima[name]["max"] <= tol
        all_pass &= ok
        rows.append({"identity": name, "samples": maxima[name]["samples"],
                     "max_residual": maxima[name]["max"], "tolerance": tol,
                     "pass": ok})

    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "verify_residuals.jsonl", "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(out_dir / "verify_summary.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["identity", "samples",
                                                "max_residual", "tolerance",
                                                "pass"])
        writer.writeheader()
        writer.writerows(rows)
    _write_json(out_dir / "verify_summary.json",
                dict(cfg.report_header(), results=rows, all_pass=all_pass))
    for row in rows:
        status = "PASS" if row["pass"] else "FAIL"
        print(f"{status}  {row['identity']:<24} samples={row['samples']:<6} "
              f"max={row['max_residual']:.3e}  tol={row['tolerance']:.0e}")
    if not all_pass:
        raise ToleranceFailure("one or more identity residuals exceeded tolerance")
    return EXIT_OK


# -- small commands ----------------------------------------------------------------

def run_star(cfg: RunConfig, out_dir: Path) -> int:
    sources = str(cfg.options["map"]).split(";")
    if len(sources) != 2:
        raise ConfigError('star --map expects "f1;f2"')
    x = _floats(cfg.options["at"], 2, "--at")
    imm = geo.GraphImmersion.from_exprs(sources[0].strip(), sources[1].strip())
    frame = geo.evaluate_frame(imm, x)
    named = forms_mod.named_forms()
    stars = {name: forms_mod.hodge_star(form, frame)
             for name, form in named.items()}
    dec = af.singular_decomposition(imm.differential(x))
    closed = dict(zip(("eta1", "eta2", "etaP", "etaPP"),
                      af.closed_form_stars(dec.lambda1, dec.lambda2)))
    payload = dict(cfg.report_header(),
                   stars={k: float(v) for k, v in stars.items()},
                   closed_form={k: float(v) for k, v in closed.items()},
                   lambda1=dec.lambda1, lambda2=dec.lambda2,
                   jacobian=dec.jacobian)
    _write_json(out_dir / "star.json", payload)
    for name in ("eta1", "eta2", "etaP", "etaPP"):
        print(f"*{name:<6} = {stars[name]: .12f}   (closed form {closed[name]: .12f})")
    print(f"lambda1 = {dec.lambda1:.12g}  lambda2 = {dec.lambda2:.12g}  "
          f"J_f = {dec.jacobian:.12g}")
    return EXIT_OK


def run_svd(cfg: RunConfig, out_dir: Path) -> int:
    vals = _floats(cfg.options["matrix"], 4, "--matrix")
    df = np.array(vals).reshape(2, 2)
    dec = af.singular_decomposition(df)
    stars = af.closed_form_stars(dec.lambda1, dec.lambda2)
    payload = dict(cfg.report_header(),
                   lambda1=dec.lambda1, lambda2=dec.lambda2,
                   jacobian=dec.jacobian,
                   a1=dec.a1.tolist(), a2=dec.a2.tolist(),
                   a3=dec.a3.tolist(), a4=dec.a4.tolist(),
                   stars={"eta1": stars[0], "eta2": stars[1],
                          "etaP": stars[2], "etaPP": stars[3]})
    _write_json(out_dir / "svd.json", payload)
    print(f"lambda1 = {dec.lambda1:.12g}")
    print(f"lambda2 = {dec.lambda2:.12g}")
    print(f"J_f     = {dec.jacobian:.12g}")
    print(f"a1 = {dec.a1}  a2 = {dec.a2}")
    print(f"a3 = {dec.a3}  a4 = {dec.a4}")
    print("stars   = " + ", ".join(f"{s:.12g}" for s in stars))
    return EXIT_OK


def run_solve(cfg: RunConfig, out_dir: Path) -> int:
    o = cfg.options
    L = np.array(_floats(o["boundary_map"], 4, "boundary_map")).reshape(2, 2)
    c = np.array(_floats(o["boundary_offset"], 2, "boundary_offset"))
    rng = np.random.default_rng(int(o["seed"]))
    dg0 = sv.DiscreteGraph.from_map(L, n=int(o["n"]),
                                    half_width=float(o["half_width"]),
                                    boundary_offset=c,
                                    perturbation=float(o["perturbation"]),
                                    rng=rng)
    scfg = sv.SolverConfig(tol=float(o["tol"]), max_iter=int(o["max_iter"]))
    solved, report = sv.gauss_newton_solve(dg0, scfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    x1, x2 = solved.nodes()
    with open(out_dir / "solve_solution.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x1", "x2", "f1", "f2"])
        for i in range(solved.n + 1):
            for j in range(solved.n + 1):
                writer.writerow([repr(x1[i, j]), repr(x2[i, j]),
                                 repr(solved.f1[i, j]), repr(solved.f2[i, j])])
    _write_json(out_dir / "solve_report.json",
                dict(cfg.report_header(), report=report.to_dict()))
    print(f"converged={report.converged} iterations={report.iterations} "
          f"max_residual={report.final_max_residual:.3e} "
          f"affine_distance={report.final_affine_distance:.3e}")
    if not report.converged:
        raise ToleranceFailure(f"solver did not converge: {report.message}")
    return EXIT_OK


def run_growth(cfg: RunConfig, out_dir: Path) -> int:
    o = cfg.options
    imm = _surface_from(o)
    radii = [float(s) for s in str(o["radii"]).split(",") if s.strip()]
    if not radii:
        raise ConfigError("growth needs at least one radius")
    resolution = int(o["resolution"])
    rows = []
    for r in radii:
        if imm.kind == "torus":
            grid = ig.QuadratureGrid(0.0, 2 * np.pi, 0.0, 2 * np.pi,
                                     resolution, resolution, o["rule"])
        else:
            grid = ig.QuadratureGrid.square(r + 0.5, resolution, o["rule"])
        ball = ig.surface_area_in_ball(imm, grid, r)
        rows.append({"r": r, "area": ball.area, "ratio": ball.ratio,
                     "boundary_fraction": ball.boundary_fraction})
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "growth.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["r", "area", "ratio",
                                                "boundary_fraction"])
        writer.writeheader()
        writer.writerows(rows)
    _write_json(out_dir / "growth.json", dict(cfg.report_header(), results=rows))
    for row in rows:
        print(f"r={row['r']:<6g} area={row['area']:.8f} ratio={row['ratio']:.8f}")
    return EXIT_OK


def run_chain(cfg: RunConfig, out_dir: Path) -> int:
    o = cfg.options
    imm = _surface_from(o)
    r = float(o["r"])
    resolution = int(o["resolution"])
    if imm.kind == "torus":
        grid = ig.QuadratureGrid(0.0, 2 * np.pi, 0.0, 2 * np.pi,
                                 resolution, resolution)
    else:
        grid = ig.QuadratureGrid.square(r + float(o["margin"]), resolution)
    gkey = str(o["g"])
    named = forms_mod.named_forms()
    if gkey in named:
        g_field = ig.star_field(named[gkey])
    else:
        g_field = ig.expr_field(gkey)
    kkey = str(o["K"])
    if kkey == "zero":
        k_field = ig.constant_field(0.0)
    elif kkey == "curvature_sum":
        k_field = ig.curvature_mismatch_field("sum")
    elif kkey == "curvature_diff":
        k_field = ig.curvature_mismatch_field("diff")
    else:
        k_field = ig.expr_field(kkey)
    report = ig.weighted_estimate_chain(imm, grid, g_field, k_field, r)
    _write_json(out_dir / "chain.json",
                dict(cfg.report_header(), report=report.to_dict()))
    for item in report.inequalities:
        mark = "ok " if item["holds"] else "VIOLATED"
        print(f"{mark} {item['name']:<24} {item['lhs']:.6e} <= {item['rhs']:.6e}")
    print(f"pointwise max violation: {report.pointwise_max:.3e} "
          f"({report.pointwise_violations} samples)")
    print(report.note)
    return EXIT_OK


def run_probe(cfg: RunConfig, out_dir: Path) -> int:
    o = cfg.options
    L = np.array(_floats(o["boundary_map"], 4, "boundary_map")).reshape(2, 2)
    scfg = sv.SolverConfig(tol=float(o["tol"]), max_iter=int(o["max_iter"]))
    report = sv.bernstein_probe(L, seeds=int(o["seeds"]), cfg=scfg,
                                n=int(o["n"]), half_width=float(o["half_width"]),
                                perturbation=float(o["perturbation"]),
                                seed0=int(o["seed"]))
    _write_json(out_dir / "probe.json",
                dict(cfg.report_header(), report=report.to_dict()))
    print(f"boundary J_f = {report.jacobian:g}  "
          f"(J_f + 1 > 0: {report.condition_sum_positive}, "
          f"1 - J_f > 0: {report.condition_diff_positive})")
    print(f"converged {report.fraction_converged:.0%} of {report.seeds} runs, "
          f"max affine distance {report.max_affine_distance:.3e}, "
          f"max |A| {report.max_sff_norm:.3e}")
    print(f"J_f over iterates stayed in [{report.jf_min:.3f}, {report.jf_max:.3f}]")
    return EXIT_OK


_RUNNERS = {"verify": run_verify, "star": run_star, "svd": run_svd,
            "solve": run_solve, "growth": run_growth, "chain": run_chain,
            "probe": run_probe}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="runs", help="output directory")
    common.add_argument("--config", default=None, help="TOML config file")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VAL",
                        help="override a config key (section.key=value)")
    common.add_argument("--threads", type=int, default=1,
                        help="accepted for compatibility; execution is "
                             "single-threaded and deterministic")
    parser = argparse.ArgumentParser(
        prog="shrinklab",
        description="workbench for graphical self-shrinking surfaces in R^4")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_command(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    p = add_command("verify", "run the identity corpus")
    p.add_argument("--suite", choices=("quick", "full"), default=None)
    p.add_argument("--seed", type=int, default=None)

    p = add_command("star", "Hodge stars of a graph map at a point")
    p.add_argument("--map", default=None, help='expressions "f1;f2"')
    p.add_argument("--at", default=None, help="evaluation point u,v")

    p = add_command("svd", "singular decomposition of a 2x2 matrix")
    p.add_argument("--matrix", default=None, help="a,b,c,d row-major")

    p = add_command("solve", "relax a discrete graph to the shrinker system")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--half-width", dest="half_width", type=float, default=None)
    p.add_argument("--boundary-map", dest="boundary_map", default=None)
    p.add_argument("--boundary-offset", dest="boundary_offset", default=None)
    p.add_argument("--perturbation", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    p = add_command("growth", "area-in-ball growth table")
    p.add_argument("--kind", choices=("plane", "graph", "torus"), default=None)
    p.add_argument("--f1", default=None)
    p.add_argument("--f2", default=None)
    p.add_argument("--linear", default=None)
    p.add_argument("--offset", default=None)
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--radii", default=None)
    p.add_argument("--resolution", type=int, default=None)

    p = add_command("chain", "weighted estimate chain report")
    p.add_argument("--kind", choices=("plane", "graph", "torus"), default=None)
    p.add_argument("--f1", default=None)
    p.add_argument("--f2", default=None)
    p.add_argument("--linear", default=None)
    p.add_argument("--offset", default=None)
    p.add_argument("--r1", type=float, default=None)
    p.add_argument("--r2", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--resolution", type=int, default=None)
    p.add_argument("--g", default=None, help="positive field: form name or expression")
    p.add_argument("--K", default=None,
                   help="nonnegative field: zero, curvature_sum, curvature_diff, "
                        "or an expression")

    p = add_command("probe", "randomized relaxation probe")
    p.add_argument("--boundary-map", dest="boundary_map", default=None)
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--half-width", dest="half_width", type=float, default=None)
    p.add_argument("--perturbation", type=float, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    flag_values = {k: v for k, v in vars(args).items()
                   if k in _DEFAULTS[command]}
    try:
        cfg = resolve_config(command, args.config, getattr(args, "set"),
                             flag_values)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        return _RUNNERS[command](cfg, Path(args.out))
    except _CONFIG_ERRORS as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except _PRECONDITION_ERRORS as e:
        print(f"precondition violated: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ToleranceFailure as e:
        print(f"verification failed: {e}", file=sys.stderr)
        return EXIT_ASSERTION


if __name__ == "__main__":
    raise SystemExit(main())

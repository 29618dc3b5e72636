"""Command-line front end: scenario files in, analysis reports out.

Input is a JSON file::

    {
      "version": "1",
      "scenario": {"builder": "spin_j", "params": {"j": 1}},
      "seed":  [[matrix]],          // optional, row-major, entries [re, im]
      "rho":   [[matrix]],          // optional density matrix
      "tasks": [{"task": "decompose"}, ...]
    }

``scenario`` is either a builder invocation (see ``scenarios.SCENARIO_BUILDERS``)
or inline models ``{"name": ..., "rep": MODEL, "stabilizer": MODEL}`` with
MODEL one of::

    {"kind": "finite", "elements": [[matrix], ...]}
    {"kind": "one_parameter", "generator": [[matrix]]}
    {"kind": "lie", "generators": [[matrix], ...]}
    {"kind": "trivial", "dim": n}

Tasks run in order against the scenario's decompositions (computed once);
an ``optimize`` task installs its output as the current seed for later
tasks.  Supported tasks: ``decompose``, ``check-seed``, ``extremal``,
``rank-bounds``, ``optimize``, ``split``, ``merit``.  ``optimize`` and
``merit`` accept a ``weight`` option::

    {"type": "uniform"}
    {"type": "identity_indicator"}            // finite models
    {"type": "cosine", "coefficients": [c0, c1, ...]}  // one-parameter models

Matrix entries are emitted as [re, im] pairs at full precision, so the json
format re-parses to the exact values used internally; the md format rounds
to 6 significant digits for reading.  Exit codes: 0 success, 2 validation
failure, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .covariant import Seed, check_seed
from .extremality import (
    convex_split,
    is_extremal,
    minimal_support_check,
    perturbation_space,
    rank_bounds,
)
from .grouprep import (
    DecompositionError,
    GroupModel,
    intertwiner_check,
    isotypic_decompose,
)
from .numerics import DEFAULT_RNG_SEED, DEFAULT_TOL, rank_tol
from .optimize import (
    ConvergenceError,
    FigureOfMerit,
    average_figure_of_merit,
    merit_normalization,
    ml_map,
    optimize_likelihood,
)
from .scenarios import Scenario, build_scenario

__all__ = ["main", "run_file", "CLIValidationError"]

TASK_NAMES = ("decompose", "check-seed", "extremal", "rank-bounds",
              "optimize", "split", "merit")


class CLIValidationError(ValueError):
    """Input file failed validation; message carries the schema path."""


def _fail(path: str, message: str):
    raise CLIValidationError(f"{path}: {message}")


def _parse_complex(entry, path: str) -> complex:
    if isinstance(entry, (int, float)):
        return complex(float(entry), 0.0)
    if (isinstance(entry, list) and len(entry) == 2
            and all(isinstance(x, (int, float)) for x in entry)):
        return complex(float(entry[0]), float(entry[1]))
    _fail(path, "expected a number or an [re, im] pair")


def _parse_matrix(obj, path: str) -> np.ndarray:
    if not isinstance(obj, list) or not obj:
        _fail(path, "expected a nonempty row-major nested array")
    rows = []
    width = None
    for i, row in enumerate(obj):
        if not isinstance(row, list) or not row:
            _fail(f"{path}[{i}]", "expected a nonempty row")
        if width is None:
            width = len(row)
        elif len(row) != width:
            _fail(f"{path}[{i}]", f"row length {len(row)} != {width}")
        rows.append([_parse_complex(e, f"{path}[{i}][{j}]")
                     for j, e in enumerate(row)])
    return np.array(rows, dtype=complex)


def _encode_matrix(m: np.ndarray):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def _parse_model(obj, path: str) -> GroupModel:
    if not isinstance(obj, dict):
        _fail(path, "expected a model object")
    kind = obj.get("kind")
    try:
        if kind == "finite":
            if "elements" not in obj:
                _fail(f"{path}.elements", "missing")
            mats = [_parse_matrix(m, f"{path}.elements[{i}]")
                    for i, m in enumerate(obj["elements"])]
            return GroupModel.finite(mats)
        if kind == "one_parameter":
            if "generator" not in obj:
                _fail(f"{path}.generator", "missing")
            return GroupModel.one_parameter(_parse_matrix(obj["generator"],
                                                          f"{path}.generator"))
        if kind == "lie":
            if "generators" not in obj:
                _fail(f"{path}.generators", "missing")
            mats = [_parse_matrix(m, f"{path}.generators[{i}]")
                    for i, m in enumerate(obj["generators"])]
            return GroupModel.lie(mats, dim=obj.get("dim"))
        if kind == "trivial":
            if not isinstance(obj.get("dim"), int):
                _fail(f"{path}.dim", "trivial model needs an integer dim")
            return GroupModel.trivial(obj["dim"])
    except CLIValidationError:
        raise
    except (ValueError, TypeError) as exc:
        _fail(path, str(exc))
    _fail(f"{path}.kind",
          "expected one of finite, one_parameter, lie, trivial")


def _parse_scenario(obj, path: str) -> Scenario:
    if not isinstance(obj, dict):
        _fail(path, "expected a scenario object")
    if "builder" in obj:
        params = obj.get("params", {})
        if not isinstance(params, dict):
            _fail(f"{path}.params", "expected an object")
        try:
            return build_scenario(obj["builder"], **params)
        except (ValueError, TypeError) as exc:
            _fail(path, str(exc))
    if "rep" in obj and "stabilizer" in obj:
        rep = _parse_model(obj["rep"], f"{path}.rep")
        stab = _parse_model(obj["stabilizer"], f"{path}.stabilizer")
        if rep.dim != stab.dim:
            _fail(path, f"rep dim {rep.dim} != stabilizer dim {stab.dim}")
        return Scenario(name=str(obj.get("name", "inline")), rep=rep,
                        stabilizer=stab, dim=rep.dim)
    _fail(path, "expected a builder invocation or inline rep/stabilizer models")


def _parse_weight(obj, path: str, model: GroupModel) -> FigureOfMerit:
    if not isinstance(obj, dict):
        _fail(path, "expected a weight object")
    wtype = obj.get("type")
    if wtype == "uniform":
        return FigureOfMerit("weighted", lambda _p: 1.0)
    if wtype == "identity_indicator":
        if model.kind != "finite":
            _fail(path, "identity_indicator needs a finite model")
        return FigureOfMerit("weighted",
                             lambda t: 1.0 if int(t) == 0 else 0.0)
    if wtype == "cosine":
        if model.kind != "one_parameter":
            _fail(path, "cosine weights need a one-parameter model")
        coeffs = obj.get("coefficients")
        if (not isinstance(coeffs, list) or not coeffs
                or not all(isinstance(c, (int, float)) for c in coeffs)):
            _fail(f"{path}.coefficients", "expected a nonempty list of numbers")
        cs = [float(c) for c in coeffs]

        def f(phi: float) -> float:
            return sum(c * math.cos(k * phi) for k, c in enumerate(cs))

        return FigureOfMerit("weighted", f)
    _fail(f"{path}.type", "expected uniform, identity_indicator, or cosine")


def _class_table(dec):
    return [{"label": cls.label, "dim_irrep": cls.dim_irrep,
             "multiplicity": cls.multiplicity} for cls in dec.classes]


def _run_tasks(doc, tol: float, rng_seed: int, max_iter: int):
    """Execute the file's tasks; returns (report dict, exit code)."""
    if not isinstance(doc, dict):
        raise CLIValidationError("top level: expected an object")
    if "version" not in doc:
        _fail("version", "missing")
    scenario = _parse_scenario(doc.get("scenario"), "scenario")
    tasks = doc.get("tasks")
    if not isinstance(tasks, list) or not tasks:
        _fail("tasks", "expected a nonempty list")

    g_dec = isotypic_decompose(scenario.rep, tol=tol, rng_seed=rng_seed)
    g0_dec = isotypic_decompose(scenario.stabilizer, tol=tol, rng_seed=rng_seed)

    seed = None
    if "seed" in doc:
        m = _parse_matrix(doc["seed"], "seed")
        if m.shape[0] != scenario.dim:
            _fail("seed", f"dimension {m.shape[0]} != scenario dim {scenario.dim}")
        seed = Seed(m, g_dec, g0_dec)
    rho = None
    if "rho" in doc:
        rho = _parse_matrix(doc["rho"], "rho")
        if rho.shape[0] != scenario.dim:
            _fail("rho", f"dimension {rho.shape[0]} != scenario dim {scenario.dim}")

    def need_seed(path):
        if seed is None:
            _fail(path, "task needs a seed (none in file, none produced earlier)")
        return seed

    def need_rho(path):
        if rho is None:
            _fail(path, "task needs rho")
        return rho

    exit_code = 0
    results = []
    for idx, spec_obj in enumerate(tasks):
        path = f"tasks[{idx}]"
        if not isinstance(spec_obj, dict) or "task" not in spec_obj:
            _fail(path, "expected an object with a 'task' field")
        name = spec_obj["task"]
        if name not in TASK_NAMES:
            _fail(f"{path}.task", f"unknown task {name!r}")
        entry = {"task": name}

        if name == "decompose":
            rep_check = intertwiner_check(g_dec, scenario.rep, rng_seed=rng_seed)
            stab_check = intertwiner_check(g0_dec, scenario.stabilizer,
                                           rng_seed=rng_seed)
            entry["rep_classes"] = _class_table(g_dec)
            entry["stabilizer_classes"] = _class_table(g0_dec)
            entry["rep_check_violation"] = rep_check.max_violation
            entry["stabilizer_check_violation"] = stab_check.max_violation
        elif name == "check-seed":
            rep = check_seed(need_seed(path), tol=max(tol, 1e-10))
            entry.update(valid=bool(rep.valid), psd_margin=rep.psd_margin,
                         normalization_violation=rep.norm_violation,
                         commutation_violation=rep.comm_violation,
                         tolerance=rep.tolerance)
        elif name == "extremal":
            cert = is_extremal(need_seed(path), tol=tol)
            pspace = perturbation_space(seed, tol=tol)
            entry.update(extremal=bool(cert.extremal),
                         gram_rank=int(cert.gram_rank),
                         block_dim=int(cert.block_dim),
                         perturbation_dimension=int(pspace.dimension),
                         minimal_support=bool(minimal_support_check(seed, tol=tol)))
            entry["witness"] = (None if cert.witness is None
                                else _encode_matrix(cert.witness))
        elif name == "rank-bounds":
            rb = rank_bounds(need_seed(path), tol=tol)
            entry.update(lower_bound=int(rb.lower_bound),
                         support_rank=int(rank_tol(np.asarray(seed.matrix), tol)),
                         budget_lhs=int(rb.budget_lhs),
                         budget_rhs=int(rb.budget_rhs),
                         budget_ok=bool(rb.budget_ok))
        elif name == "optimize":
            target = need_rho(path)
            merit_scale = None
            if "weight" in spec_obj:
                fom = _parse_weight(spec_obj["weight"], f"{path}.weight",
                                    scenario.rep)
                try:
                    merit_scale = merit_normalization(fom, g_dec)
                    target = ml_map(target, fom, g_dec)
                except ValueError as exc:
                    _fail(f"{path}.weight", str(exc))
            try:
                res = optimize_likelihood(target, g_dec, g0_dec, tol=tol,
                                          max_iter=max_iter)
            except ValueError as exc:
                _fail(path, str(exc))
            entry.update(value=res.value, iterations=res.iterations,
                         converged=bool(res.converged), unique=bool(res.unique),
                         stability_alpha_max=res.stability_alpha_max,
                         certified_optimal=bool(res.certified_optimal),
                         certified_value=res.certified_value)
            entry["seed_matrix"] = _encode_matrix(res.seed.matrix)
            if merit_scale is not None:
                entry["merit_normalization"] = merit_scale
                entry["merit_value"] = merit_scale * res.value
            seed = res.seed
            if not res.converged:
                exit_code = 3
        elif name == "split":
            s = need_seed(path)
            if "perturbation" in spec_obj:
                pert = _parse_matrix(spec_obj["perturbation"],
                                     f"{path}.perturbation")
            else:
                pspace = perturbation_space(s, tol=tol)
                if pspace.dimension == 0:
                    _fail(path, "seed is extremal; no perturbation to split along "
                                "(and none was supplied)")
                pert = pspace.basis[0]
            try:
                split = convex_split(s, pert, tol=tol)
            except ValueError as exc:
                _fail(path, str(exc))
            entry.update(weight=split.weight,
                         plus=_encode_matrix(split.plus.matrix),
                         minus=_encode_matrix(split.minus.matrix),
                         perturbation_used=_encode_matrix(pert))
        elif name == "merit":
            s = need_seed(path)
            target = need_rho(path)
            if "weight" not in spec_obj:
                _fail(f"{path}.weight", "missing (merit task needs a weight)")
            fom = _parse_weight(spec_obj["weight"], f"{path}.weight", scenario.rep)
            try:
                entry["value"] = average_figure_of_merit(s, target, fom)
                entry["normalization"] = merit_normalization(fom, g_dec)
            except ValueError as exc:
                _fail(f"{path}.weight", str(exc))
        results.append(entry)

    report = {
        "tool_version": __version__,
        "file_version": str(doc["version"]),
        "rng_seed": rng_seed,
        "tolerance": tol,
        "max_iter": max_iter,
        "scenario": {"name": scenario.name, "dim": scenario.dim,
                     "notes": scenario.notes},
        "results": results,
    }
    return report, exit_code


def _fmt_num(x, sig: int = 6) -> str:
    return f"{x:.{sig}g}"


def _md_value(v) -> str:
    if isinstance(v, bool) or v is None or isinstance(v, (str, int)):
        return str(v)
    if isinstance(v, float):
        return _fmt_num(v)
    return str(v)


def _md_matrix(m, lines):
    for row in m:
        cells = []
        for re, im in row:
            cells.append(f"{_fmt_num(re)}{'+' if im >= 0 else '-'}{_fmt_num(abs(im))}j")
        lines.append("    [ " + "  ".join(cells) + " ]")


def _render_md(report) -> str:
    lines = ["# seed analysis report", ""]
    lines.append(f"- tool version: {report['tool_version']}")
    lines.append(f"- file version: {report['file_version']}")
    lines.append(f"- rng seed: {report['rng_seed']}")
    lines.append(f"- tolerance: {_fmt_num(report['tolerance'])}")
    sc = report["scenario"]
    lines.append(f"- scenario: {sc['name']} (dim {sc['dim']})")
    if sc.get("notes"):
        lines.append(f"- notes: {sc['notes']}")
    for i, entry in enumerate(report["results"]):
        lines.append("")
        lines.append(f"## task {i + 1}: {entry['task']}")
        for key, val in entry.items():
            if key == "task":
                continue
            if key in ("rep_classes", "stabilizer_classes"):
                lines.append(f"- {key.replace('_', ' ')}:")
                for cls in val:
                    lines.append(f"    - {cls['label']}: dim {cls['dim_irrep']}, "
                                 f"multiplicity {cls['multiplicity']}")
            elif isinstance(val, list):
                lines.append(f"- {key.replace('_', ' ')}:")
                _md_matrix(val, lines)
            else:
                lines.append(f"- {key.replace('_', ' ')}: {_md_value(val)}")
    lines.append("")
    return "\n".join(lines)


def run_file(path: str, tol: float = DEFAULT_TOL, rng_seed: int = DEFAULT_RNG_SEED,
             max_iter: int = 10000):
    """Parse and execute a scenario file; returns (report dict, exit code)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CLIValidationError(f"invalid JSON: {exc}") from exc
    return _run_tasks(doc, tol=tol, rng_seed=rng_seed, max_iter=max_iter)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="covseed",
        description="Analyze covariant measurement seeds: decomposition, "
                    "extremality, rank bounds, likelihood optimization.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="execute the tasks in a scenario file")
    run_p.add_argument("file", help="scenario JSON file")
    run_p.add_argument("--tol", type=float, default=DEFAULT_TOL,
                       help="numerical tolerance (default 1e-9)")
    run_p.add_argument("--rng-seed", type=int, default=DEFAULT_RNG_SEED,
                       help="seed for all randomized internals")
    run_p.add_argument("--format", choices=("json", "md"), default="json",
                       help="report format (default json)")
    run_p.add_argument("--out", default=None, help="write the report here "
                       "instead of stdout")
    run_p.add_argument("--max-iter", type=int, default=10000,
                       help="optimizer iteration cap (default 10000)")
    args = parser.parse_args(argv)

    try:
        report, code = run_file(args.file, tol=args.tol, rng_seed=args.rng_seed,
                                max_iter=args.max_iter)
    except CLIValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DecompositionError, ConvergenceError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    if args.format == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        text = _render_md(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

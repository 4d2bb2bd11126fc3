"""Command-line driver.

    wigner-parity run <config | preset>
    wigner-parity refine <config | preset> --levels n
    wigner-parity presets list | show <name>
    wigner-parity validate <config | preset>

Exit status 0 on success, 2 on validation errors, 3 on numerical failures;
failures print a JSON object on standard error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .bvp import check_sign_convention, solve_bvp
from .config import PRESETS, ConfigError, load_config
from .exceptions import NumericalError, WignerError
from .grid import write_field
from .odd_moments import build_moment_Q
from .oracle import compare_fields, solve_direct
from .potential import build_kernel_table
from .propagation import build_propagator
from .wigner_op import operator_bound_check, subspace_norms

log = logging.getLogger("wigner_parity")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL = 0, 2, 3
BOUND_STATIONS = 5
RESTRICTION_NOTE = ("fine minus its free-streaming extension, restricted to every other x node and "
                    "pairwise velocity-cell averages, compared with the coarse field minus its own")


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o)}")


def write_moments(path, xs, J, orders):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x"] + [f"J{n}" for n in orders])
        for x, row in zip(xs, J):
            w.writerow([repr(float(x))] + [repr(float(a)) for a in row])


def write_matrix(path, A):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in A:
            w.writerow([repr(float(a)) for a in row])


def truncation_residual(table, bd):
    """Kernel and inflow magnitude at the velocity cut-off, relative to their peaks."""
    kern = np.abs(table.nodes)
    kpeak = float(kern.max())
    data = np.abs(np.concatenate([bd.f_R, bd.f_L]))
    dpeak = float(data.max())
    return {
        "kernel_at_vmax": float(kern[:, [0, -1]].max() / kpeak) if kpeak > 0 else 0.0,
        "data_at_vmax": float(max(data[0], data[-1]) / dpeak) if dpeak > 0 else 0.0,
        "v_max": table.vgrid.v_max,
    }


def _bound_reports(table, seed):
    idx = np.linspace(0, table.x.size - 1, BOUND_STATIONS).round().astype(int)
    return [dict(operator_bound_check(table, int(i), trials=100, seed=seed + k)) for k, i in enumerate(idx)]


def _resolved_config(cfg):
    """Copy of the config with every file reference made absolute."""
    pot = dict(cfg.potential)
    if "samples" in pot:
        pot["samples"] = str(cfg.resolve(pot["samples"]).resolve())
    bnd = {k: (str(cfg.resolve(v).resolve()) if k in ("f_L", "f_R") else v) for k, v in cfg.boundary.items()}
    return replace(cfg, potential=pot, boundary=bnd, output_dir=str(cfg.output_path().resolve()))


def _solve(cfg, table, bd):
    if cfg.mode == "oracle":
        return solve_direct(table, bd)
    return solve_bvp(table, bd, cfg.mode if cfg.mode != "compare" else "general", n_moments=cfg.N)


def run(cfg):
    """Execute one configured job and write its artifacts; returns the output directory."""
    cfg.validate()
    spec = cfg.potential_spec()
    vgrid, sgrid = cfg.grids()
    table = build_kernel_table(spec, vgrid, sgrid, max_moment_order=max(2 * cfg.N - 1, 1),
                               quad_tol=cfg.tolerances["quadrature"])
    bd = cfg.boundary_data(vgrid)
    out = cfg.output_path()
    out.mkdir(parents=True, exist_ok=True)
    files = []

    trunc = truncation_residual(table, bd)
    warnings = []
    for key in ("kernel_at_vmax", "data_at_vmax"):
        if trunc[key] > cfg.tolerances["truncation"]:
            msg = f"{key} = {trunc[key]:.3g} exceeds the truncation tolerance; consider a larger v_max"
            log.warning(msg)
            warnings.append(msg)

    sol = _solve(cfg, table, bd)
    write_field(out / "field.csv", sgrid.nodes, vgrid, sol.values)
    files.append("field.csv")
    orders = list(range(1, 2 * cfg.N, 2))
    write_moments(out / "moments.csv", sgrid.nodes, sol.moments(orders), orders)
    files.append("moments.csv")

    diag = {
        "mode": cfg.mode,
        "residuals": {k: v for k, v in sol.provenance["residuals"].items()},
        "truncation": trunc,
        "warnings": warnings,
        "operator_bound": _bound_reports(table, cfg.seed),
        "subspace_norms_B": {repr(float(table.x[i])): subspace_norms(table, i)
                             for i in np.linspace(0, table.x.size - 1, BOUND_STATIONS).round().astype(int)},
    }
    for key in ("condition_number", "propagator_conditions", "inflow_discretization_term",
                "inverse_defect", "moment_Q_discrepancy"):
        if key in sol.provenance:
            diag[key] = sol.provenance[key]
    inflow_ok = sol.provenance["residuals"]["inflow"]["left"] <= cfg.tolerances["inflow"]
    diag["inflow_within_tolerance"] = bool(inflow_ok)

    if cfg.mode in ("general", "compare", "symmetric_shortcut"):
        if cfg.mode != "symmetric_shortcut":
            R_lr = build_propagator(table, "even", "l_to_r")
            Q_rl = build_propagator(table, "odd", "r_to_l")
            for name, P in (("R_lr", R_lr), ("Q_rl", Q_rl)):
                P.save(out / f"{name}.csv", out / f"{name}.json")
                files += [f"{name}.csv", f"{name}.json"]
            diag["sign_convention"] = check_sign_convention(table, bd)
        if not (spec.family == "tabulated" and 2 * cfg.N - 3 > 3):
            Qm = build_moment_Q(spec, sgrid, cfg.N, "l_to_r")
            write_matrix(out / "Q_moment.csv", Qm)
            _write_json(out / "Q_moment.json", {"N": cfg.N, "direction": "l_to_r", "orders": orders,
                                                "grids": {"l": sgrid.length, "M": sgrid.M}})
            files += ["Q_moment.csv", "Q_moment.json"]

    if cfg.mode == "compare":
        ora = solve_direct(table, bd)
        write_field(out / "oracle_field.csv", sgrid.nodes, vgrid, ora.values)
        files.append("oracle_field.csv")
        report = compare_fields(sol, ora)
        report["oracle_residuals"] = ora.provenance["residuals"]
        _write_json(out / "comparison.json", report)
        files.append("comparison.json")
        diag["comparison_global_relative_l2"] = report["global_relative_l2"]

    _write_json(out / "diagnostics.json", diag)
    files.append("diagnostics.json")
    _write_manifest(out, cfg, files, command="run")
    return out


def _write_manifest(out, cfg, files, command):
    resolved = _resolved_config(cfg)
    manifest = {
        "command": command,
        "config": resolved.to_dict(),
        "config_ini": resolved.to_ini(),
        "versions": {"wigner_parity": __version__, "python": platform.python_version(),
                     "numpy": np.__version__, "scipy": __import__("scipy").__version__},
        "files": {name: hashlib.sha256((out / name).read_bytes()).hexdigest() for name in sorted(files)},
    }
    _write_json(out / "manifest.json", manifest)


def _restrict(values, factor=2):
    """Fine field -> coarse grid: every other x node, pairwise velocity-cell averages."""
    coarse = values[::factor]
    return coarse.reshape(coarse.shape[0], -1, factor).mean(axis=2)


def _orders(diffs):
    return [float(np.log2(a / b)) if a > 0 and b > 0 else None for a, b in zip(diffs, diffs[1:])]


def refine_study(cfg, levels):
    """Halve dx and dv per level; report pairwise differences and observed orders."""
    if levels < 2:
        raise ConfigError("refine needs at least 2 levels", field="levels")
    cfg.validate()
    if "preset" not in cfg.boundary:
        raise ConfigError("refinement needs a boundary preset (files are tied to one grid)",
                          field="boundary")
    pipeline_mode = cfg.mode if cfg.mode in ("general", "symmetric_shortcut") else "general"
    fields = {"parity": [], "oracle": []}
    free = []
    meta = []
    for lev in range(levels):
        c = cfg.refined(lev)
        vgrid, sgrid = c.grids()
        table = build_kernel_table(c.potential_spec(), vgrid, sgrid, max_moment_order=1,
                                   quad_tol=c.tolerances["quadrature"])
        bd = c.boundary_data(vgrid)
        free.append(np.broadcast_to(np.concatenate([bd.f_R, bd.f_L]), (sgrid.M + 1, vgrid.size)))
        fields["parity"].append(solve_bvp(table, bd, pipeline_mode).values)
        fields["oracle"].append(solve_direct(table, bd).values)
        meta.append({"level": lev, "K": c.K, "dv": c.dv, "M": c.M})
        log.info("refinement level %d done (K=%d, M=%d)", lev, c.K, c.M)
    report = {"levels": meta, "restriction": RESTRICTION_NOTE}
    for name, fs in fields.items():
        diffs = []
        for k in range(levels - 1):
            coarse, fine = fs[k], fs[k + 1]
            # the free-streaming part is exact on every grid; comparing it across
            # non-nested offset grids would only measure data sampling error
            d = _restrict(fine - free[k + 1]) - (coarse - free[k])
            ref = max(np.linalg.norm(coarse), np.linalg.norm(_restrict(fine)))
            diffs.append(float(np.linalg.norm(d) / ref) if ref > 0 else 0.0)
        report[name] = {"pairwise_relative_l2": diffs, "observed_orders": _orders(diffs)}
    out = cfg.output_path()
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "refinement.json", report)
    _write_manifest(out, cfg, ["refinement.json"], command=f"refine --levels {levels}")
    return report


def _fail(exc, code):
    payload = exc.to_dict() if isinstance(exc, WignerError) else {"error": type(exc).__name__,
                                                                   "message": str(exc)}
    print(json.dumps(payload, default=_json_default), file=sys.stderr)
    return code


def build_parser():
    parser = argparse.ArgumentParser(prog="wigner-parity", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run one configured job")
    p.add_argument("config")
    p = sub.add_parser("refine", help="refinement study")
    p.add_argument("config")
    p.add_argument("--levels", type=int, default=3)
    p = sub.add_parser("presets", help="list or show built-in presets")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("name", nargs="?")
    p = sub.add_parser("validate", help="validate a config without running it")
    p.add_argument("config")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            if args.action == "list":
                print("\n".join(sorted(PRESETS)))
            elif args.name not in PRESETS:
                raise ConfigError(f"unknown preset {args.name!r}", field="name")
            else:
                print(PRESETS[args.name], end="")
            return EXIT_OK
        cfg = load_config(args.config)
        if args.command == "validate":
            cfg.validate()
            print(json.dumps({"valid": True, "config": cfg.to_dict()}, sort_keys=True))
        elif args.command == "run":
            out = run(cfg)
            print(str(out))
        else:
            report = refine_study(cfg, args.levels)
            print(json.dumps(report, indent=2))
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (WignerError, ValueError, OSError) as exc:
        return _fail(exc, EXIT_VALIDATION)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

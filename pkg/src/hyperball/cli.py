"""Batch command-line front end.

Subcommands orchestrate solves, scans, estimate verifications and
Palais-Smale demos, writing a JSON report plus CSV tables under --out.
Reports embed the fully resolved configuration and are byte-identical
across reruns with the same configuration and seed, except for the
timestamp field.  Floats are serialized with 17 significant digits.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure
(diagnostic JSON still written when possible), 4 requested object not found
(for `nonexistence`, finding nothing is success and exits 0).
"""

from __future__ import annotations

import argparse
import datetime
import json
import math
import re
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__, bubbles, conformal, correspond, energy, radial
from .params import Params
from .radial import ShootConfig, SolutionNotFoundError

__all__ = ["main", "run", "write_report", "dumps_report"]

_FLOAT_SENTINEL = "@@F{}@@"
_FLOAT_RE = re.compile(r'"@@F([^"@]+)@@"')


def _tag_floats(obj):
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return None
        return _FLOAT_SENTINEL.format(format(obj, ".17g"))
    if isinstance(obj, dict):
        return {k: _tag_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tag_floats(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _tag_floats(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return _tag_floats(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def dumps_report(report: dict) -> str:
    """Serialize a report with 17-significant-digit floats."""
    text = json.dumps(_tag_floats(report), indent=2)
    return _FLOAT_RE.sub(lambda m: m.group(1), text) + "\n"


def _schema():
    with resources.files("hyperball").joinpath("schemas/report.schema.json").open() as fh:
        return json.load(fh)


def write_report(out_dir: Path, report: dict) -> Path:
    import jsonschema

    jsonschema.validate(report, _schema())
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "report.json"
    path.write_text(dumps_report(report))
    return path


def _write_table(path: Path, header: str, rows) -> None:
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_fmt_cell(c) for c in row) + "\n")


def _fmt_cell(c) -> str:
    if isinstance(c, float):
        return format(c, ".17g")
    return str(c)


class ConfigError(ValueError):
    pass


_COMMON = {
    "N": dict(type=int, help="ball dimension"),
    "p": dict(type=float, help="nonlinearity power"),
    "lambda": dict(type=float, dest="lam", help="spectral parameter"),
    "nodes": dict(type=int, help="requested sign changes"),
    "s-min": dict(type=float, dest="s_min", help="scan lower bound for u(0)"),
    "s-max": dict(type=float, dest="s_max", help="scan upper bound for u(0)"),
    "grid": dict(type=int, help="number of scan points"),
    "T-max": dict(type=float, dest="T_max", help="integration horizon"),
    "tol": dict(type=float, help="relative integrator tolerance"),
    "seed": dict(type=int, help="seed for stochastic sampling"),
    "out": dict(type=str, help="output directory"),
    "config": dict(type=str, help="JSON config file (flags override it)"),
}

_DEFAULTS = {
    "nodes": 0,
    "s_min": 1e-2,
    "s_max": None,
    "grid": 200,
    "T_max": 25.0,
    "tol": 1e-12,
    "seed": 0,
    "out": "out",
    "mu_decades": "1e-6:1e-3",
    "mu_points": 7,
    "d_list": "4,6,8,10",
    "eps_list": "1e-1,1e-2,1e-3",
    "samples": 200,
    "from_solution": None,
    "n": None, "k": None, "eta": 0.0, "t": 0.0,
    "alpha": None, "h": None,
    "N": None, "p": None, "lam": None,
}


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperball", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_common(sp, names):
        for name in names:
            kw = dict(_COMMON[name])
            help_text = kw.pop("help")
            sp.add_argument(f"--{name}", default=None, help=help_text, **kw)

    sp = sub.add_parser("solve", help="compute a k-nodal decaying solution")
    add_common(sp, ["N", "p", "lambda", "nodes", "s-min", "s-max", "grid",
                    "T-max", "tol", "seed", "out", "config"])

    sp = sub.add_parser("scan", help="classify trajectories over an s grid")
    add_common(sp, ["N", "p", "lambda", "s-min", "s-max", "grid", "T-max",
                    "tol", "seed", "out", "config"])

    sp = sub.add_parser("nonexistence",
                        help="certify absence of decaying sign-changing trajectories")
    add_common(sp, ["N", "p", "lambda", "s-min", "s-max", "grid", "T-max",
                    "tol", "seed", "out", "config"])

    sp = sub.add_parser("verify-bubbles", help="fit concentration scaling laws")
    add_common(sp, ["N", "seed", "out", "config"])
    sp.add_argument("--mu-decades", default=None, dest="mu_decades",
                    help="mu range lo:hi")
    sp.add_argument("--mu-points", default=None, dest="mu_points", type=int)

    sp = sub.add_parser("ps-demo", help="energy-quantization gap sweep")
    add_common(sp, ["N", "p", "lambda", "seed", "out", "config"])
    sp.add_argument("--d-list", default=None, dest="d_list",
                    help="comma separated translation distances")
    sp.add_argument("--eps-list", default=None, dest="eps_list",
                    help="comma separated bubble scales")

    sp = sub.add_parser("sobolev", help="estimate the embedding best constant")
    add_common(sp, ["N", "p", "lambda", "seed", "out", "config"])

    sp = sub.add_parser("map-hsm", help="Hardy-Sobolev-Mazya parameter map / transport")
    add_common(sp, ["seed", "out", "config"])
    for name, typ in [("n", int), ("k", int), ("eta", float), ("t", float)]:
        sp.add_argument(f"--{name}", default=None, type=typ)
    sp.add_argument("--from-solution", default=None, dest="from_solution",
                    help="directory of a previous solve run to transport")
    sp.add_argument("--samples", default=None, type=int)

    sp = sub.add_parser("map-grushin", help="Grushin parameter map / transport")
    add_common(sp, ["seed", "out", "config"])
    for name, typ in [("alpha", float), ("k", int), ("h", int)]:
        sp.add_argument(f"--{name}", default=None, type=typ)
    sp.add_argument("--from-solution", default=None, dest="from_solution")
    sp.add_argument("--samples", default=None, type=int)

    sp = sub.add_parser("verify-decay", help="decay diagnostics of a solution")
    add_common(sp, ["N", "p", "lambda", "nodes", "tol", "seed", "out", "config"])
    sp.add_argument("--from-solution", default=None, dest="from_solution")
    return ap


def _resolve(args: argparse.Namespace) -> dict:
    """Merge flags over config-file values over defaults."""
    cfg = {}
    file_cfg = {}
    config_path = getattr(args, "config", None)
    if config_path:
        try:
            file_cfg = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {config_path}: {e}")
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a flat JSON object")
    for key, default in _DEFAULTS.items():
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            cfg[key] = flag_val
        elif key in file_cfg:
            cfg[key] = file_cfg[key]
        else:
            cfg[key] = default
    cfg["command"] = args.command
    for key in ("grid", "seed", "samples", "mu_points"):
        if cfg.get(key) is not None:
            cfg[key] = int(cfg[key])
    return cfg


def _require(cfg: dict, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"missing required parameters: {', '.join(missing)}")


def _params(cfg: dict) -> Params:
    _require(cfg, "N", "p", "lam")
    try:
        return Params(int(cfg["N"]), float(cfg["p"]), float(cfg["lam"]))
    except ValueError as e:
        raise ConfigError(str(e))


def _shoot_config(cfg: dict) -> ShootConfig:
    return ShootConfig(T_max=float(cfg["T_max"]), rtol=float(cfg["tol"]),
                       atol=float(cfg["tol"]) * 1e-2)


def _base_report(cfg: dict) -> dict:
    return {
        "command": cfg["command"],
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "seed": int(cfg["seed"]),
        "config": {k: v for k, v in cfg.items() if k != "command"},
        "results": {},
    }


def _float_list(text) -> list:
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    return [float(x) for x in str(text).split(",") if x.strip()]


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------

def _run_solve(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    report = _base_report(cfg)
    try:
        res = radial.find_nodal_solution(
            int(cfg["nodes"]), params, _shoot_config(cfg),
            s_min=float(cfg["s_min"]),
            s_max=None if cfg["s_max"] is None else float(cfg["s_max"]),
        )
    except SolutionNotFoundError as e:
        report["results"] = {"status": "not-found", "detail": str(e)}
        write_report(out, report)
        return 4
    rep = energy.energy(res.profile, params)
    report["results"] = {
        "status": "found",
        **res.to_dict(),
        "energy_report": rep.to_dict(),
        "decay": radial.decay_check(res.profile, params),
        "ode_residual": radial.ode_residual_max(res.profile, params),
    }
    write_report(out, report)
    res.profile.to_csv(out / "profile.csv")
    return 0


def _scan_rows(params, cfg):
    s_max = cfg["s_max"] if cfg["s_max"] is not None else 1e2
    grid = np.geomspace(float(cfg["s_min"]), float(s_max), int(cfg["grid"]))
    scan_cfg = ShootConfig.scan()
    rows = []
    for s in grid:
        r = radial.shoot(float(s), params, scan_cfg)
        rows.append((float(s), r.classification, r.node_count, r.energy))
    return rows


def _run_scan(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    rows = _scan_rows(params, cfg)
    report = _base_report(cfg)
    counts: dict = {}
    for _, cls, _, _ in rows:
        counts[cls] = counts.get(cls, 0) + 1
    report["results"] = {"status": "scanned", "n_scanned": len(rows),
                         "classification_counts": counts}
    write_report(out, report)
    _write_table(out / "table.csv", "s,classification,node_count,energy", rows)
    return 0


def _run_nonexistence(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    if not params.is_critical:
        raise ConfigError("nonexistence scans require the critical power "
                          f"p = {params.critical_p}")
    s_max = cfg["s_max"] if cfg["s_max"] is not None else 1e2
    grid = np.geomspace(float(cfg["s_min"]), float(s_max), int(cfg["grid"]))
    scan = radial.nonexistence_scan(params, grid)
    report = _base_report(cfg)
    report["results"] = {
        "status": "none-found" if scan.certified else "counterexample-or-undetermined",
        **scan.to_dict(),
    }
    write_report(out, report)
    _write_table(out / "table.csv", "s,classification,node_count,energy",
                 [(r.s, r.classification, r.node_count, r.energy) for r in scan.rows])
    return 0


def _run_verify_bubbles(cfg: dict, out: Path) -> int:
    _require(cfg, "N")
    lo, hi = (float(x) for x in str(cfg["mu_decades"]).split(":"))
    mu = np.geomspace(lo, hi, int(cfg["mu_points"]))
    rep = bubbles.verify_bubble_estimates(int(cfg["N"]), mu)
    report = _base_report(cfg)
    report["results"] = {
        "status": "fitted",
        "slopes": rep.slopes,
        "predicted": rep.predicted,
        "max_slope_error": rep.max_slope_error(),
        "fit_residual": rep.fit_residual,
    }
    write_report(out, report)
    keys = list(rep.quantities)
    rows = [(m, *[rep.quantities[k][i] for k in keys]) for i, m in enumerate(rep.mu)]
    _write_table(out / "table.csv", "mu," + ",".join(keys), rows)
    return 0


def _run_ps_demo(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    if not params.is_critical:
        raise ConfigError("the quantization demo requires the critical power")
    ground = radial.find_nodal_solution(0, params)
    d_list = _float_list(cfg["d_list"])
    eps_list = _float_list(cfg["eps_list"])
    spec = bubbles.make_superposition_sequence(ground.profile, d_list, eps_list, params)
    rows = bubbles.quantization_check(spec)
    report = _base_report(cfg)
    report["results"] = {
        "status": "checked",
        "level": spec.level,
        "ground_energy": ground.energy,
        "rows": [
            {"index": r.index, "separation": r.separation,
             "energy": r.energy, "gap": r.gap}
            for r in rows
        ],
    }
    write_report(out, report)
    _write_table(out / "table.csv", "index,separation,energy,level,gap",
                 [(r.index, r.separation, r.energy, r.level, r.gap) for r in rows])
    return 0


def _run_sobolev(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    est = energy.estimate_sobolev_constant(params)
    report = _base_report(cfg)
    report["results"] = {"status": "estimated", **est.to_dict()}
    write_report(out, report)
    return 0


def _load_solution(cfg: dict):
    src = Path(cfg["from_solution"])
    if src.is_dir():
        src = src / "profile.csv"
    if not src.exists():
        raise ConfigError(f"no profile found at {src}")
    return radial.RadialProfile.from_csv(src)


def _sample_cloud(f, k: int, n: int, n_samples: int, seed: int):
    rng = np.random.default_rng(seed)
    rho = rng.uniform(0.3, 3.0, n_samples)
    z = rng.uniform(-2.0, 2.0, (n_samples, n - k))
    dirs = rng.standard_normal((n_samples, k))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    y = rho[:, None] * dirs
    vals = f.cyl(rho, z)
    return y, z, vals


def _run_map_hsm(cfg: dict, out: Path) -> int:
    _require(cfg, "n", "k")
    try:
        hp = correspond.HSMParams(int(cfg["n"]), int(cfg["k"]),
                                  float(cfg["eta"]), float(cfg["t"]))
    except ValueError as e:
        raise ConfigError(str(e))
    params = correspond.hsm_to_hyperbolic(hp)
    report = _base_report(cfg)
    report["results"] = {"status": "mapped", "mapped_params": params.to_dict(),
                         "p_t": float(hp.p_t)}
    rows = None
    if cfg["from_solution"]:
        prof = _load_solution(cfg)
        f = correspond.transport_to_hsm(prof, hp)
        y, z, vals = _sample_cloud(f, hp.k, hp.n, int(cfg["samples"]), int(cfg["seed"]))
        rows = [(*yi, *zi, vi) for yi, zi, vi in zip(y, z, vals)]
        report["results"]["n_samples"] = len(rows)
    write_report(out, report)
    if rows is not None:
        hdr = ",".join([f"y{i+1}" for i in range(hp.k)]
                       + [f"z{i+1}" for i in range(hp.n - hp.k)] + ["value"])
        _write_table(out / "samples.csv", hdr, rows)
    return 0


def _run_map_grushin(cfg: dict, out: Path) -> int:
    _require(cfg, "alpha", "k", "h")
    try:
        gp = correspond.GrushinParams(float(cfg["alpha"]), int(cfg["k"]), int(cfg["h"]))
    except ValueError as e:
        raise ConfigError(str(e))
    params = correspond.grushin_to_hyperbolic(gp)
    report = _base_report(cfg)
    report["results"] = {"status": "mapped", "mapped_params": params.to_dict(),
                         "Q": float(gp.Q)}
    rows = None
    if cfg["from_solution"]:
        prof = _load_solution(cfg)
        f = correspond.transport_to_grushin(prof, gp)
        n = gp.k + gp.h
        y, z, vals = _sample_cloud(f, gp.k, n, int(cfg["samples"]), int(cfg["seed"]))
        rows = [(*yi, *zi, vi) for yi, zi, vi in zip(y, z, vals)]
        report["results"]["n_samples"] = len(rows)
    write_report(out, report)
    if rows is not None:
        hdr = ",".join([f"y{i+1}" for i in range(gp.k)]
                       + [f"z{i+1}" for i in range(gp.h)] + ["value"])
        _write_table(out / "samples.csv", hdr, rows)
    return 0


def _run_verify_decay(cfg: dict, out: Path) -> int:
    params = _params(cfg)
    if cfg["from_solution"]:
        prof = _load_solution(cfg)
    else:
        res = radial.find_nodal_solution(int(cfg["nodes"]), params)
        prof = res.profile
    report = _base_report(cfg)
    report["results"] = {"status": "checked", **radial.decay_check(prof, params)}
    write_report(out, report)
    prof.to_csv(out / "profile.csv")
    return 0


_RUNNERS = {
    "solve": _run_solve,
    "scan": _run_scan,
    "nonexistence": _run_nonexistence,
    "verify-bubbles": _run_verify_bubbles,
    "ps-demo": _run_ps_demo,
    "sobolev": _run_sobolev,
    "map-hsm": _run_map_hsm,
    "map-grushin": _run_map_grushin,
    "verify-decay": _run_verify_decay,
}


def run(argv=None) -> int:
    ap = _build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = _resolve(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out = Path(cfg["out"])
    try:
        return _RUNNERS[cfg["command"]](cfg, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        diag = _base_report(cfg)
        diag["results"] = {"status": "numerical-failure", "detail": str(e)}
        try:
            write_report(out, diag)
        except Exception:
            pass
        print(f"numerical failure: {e}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end.

Exit codes: 0 success, 2 configuration or input error, 3 convergence
failure (including a numeric error above 2% of |P|), 4 physics-consistency
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import __version__
from .analysis import curve_rows, normalize_by_pfa, read_curve_csv, rolling_weighted_average
from .config import ConfigError, RunConfig, default_config, load_config
from .ema import ema_pressure_with_error
from .lifshitz import lifshitz_pressure_with_error
from .materials import matsubara_frequency, permittivity_imag_freq
from .modal import BlochPoint, grating_modes
from .numerics import ConvergenceError, PhysicsError
from .pfa import pfa_pressure_with_error
from .scattering import plane_grating_pressure

EXIT_OK, EXIT_CONFIG, EXIT_CONVERGENCE, EXIT_PHYSICS = 0, 2, 3, 4
PRESSURE_FIELDS = ("d_nm", "pressure_mPa", "numeric_error_mPa")
KNOBS = {"N": "truncation_N", "matsubara_cap": "matsubara_cap", "bz_nodes": "bz_nodes",
         "ky_nodes": "ky_nodes"}
ERROR_BUDGET = 0.02


def compute_point(method: str, d: float, cfg: RunConfig) -> tuple[float, float]:
    """(pressure, numeric error) in Pa for one distance."""
    g, m, env, num = cfg.geometry, cfg.material, cfg.environment, cfg.numerics
    if method == "scattering":
        pt = plane_grating_pressure(d, g, m, env, num, adaptive=cfg.adaptive)
        return pt.pressure, pt.numeric_error
    if method == "lifshitz":
        return lifshitz_pressure_with_error(d, m, env, num)
    if method == "pfa":
        return pfa_pressure_with_error(d, g, m, env, num)
    if method == "ema":
        return ema_pressure_with_error(d, g, m, env, num)
    raise ConfigError("method", f"unknown method {method!r}")


def pressure_table(method: str, cfg: RunConfig):
    rows = []
    for d in cfg.distances.values():
        p, err = compute_point(method, float(d), cfg)
        if err > ERROR_BUDGET * abs(p):
            raise ConvergenceError(f"numeric error {err:.3e} Pa above 2% of |P| at d = {d} nm")
        rows.append({"d_nm": float(d), "pressure_mPa": p * 1e3, "numeric_error_mPa": err * 1e3})
    return rows


def convergence_study(cfg: RunConfig, knob: str, d: float = 500.0, steps: int = 3,
                      start: int | None = None):
    """Pressure at ``d`` along a doubling ladder of ``knob`` with successive relative deltas.

    The Matsubara sum is truncated at the cap rather than failing, so small
    caps are meaningful rungs of the ladder.
    """
    if knob not in KNOBS:
        raise ConfigError("knob", f"must be one of {', '.join(KNOBS)}")
    if steps < 1:
        raise ConfigError("steps", "must be >= 1")
    field = KNOBS[knob]
    value = start if start is not None else getattr(cfg.numerics, field)
    if value < 1:
        raise ConfigError("start", "must be >= 1")
    rows, prev = [], None
    for _ in range(steps):
        num = cfg.numerics.with_(**{field: value})
        pt = plane_grating_pressure(d, cfg.geometry, cfg.material, cfg.environment, num,
                                    estimate_error=False, strict=False)
        delta = None if prev is None else abs(pt.pressure / prev - 1.0)
        rows.append({"knob": knob, "value": value, "d_nm": d, "pressure_mPa": pt.pressure * 1e3,
                     "rel_delta": delta})
        prev = pt.pressure
        value *= 2
    return rows


def compare(configs: list[RunConfig], methods: list[str] | None = None):
    """Join pressure columns of several methods; ratios are taken to the first."""
    base = configs[0]
    for c in configs[1:]:
        if c.geometry != base.geometry:
            raise ConfigError("geometry", "compared configurations must share the geometry")
        if not np.array_equal(c.distances.values(), base.distances.values()):
            raise ConfigError("distances", "compared configurations must share the distance grid")
    if methods:
        runs = [(mt, base) for mt in methods]
    else:
        runs = [(c.method, c) for c in configs]
    labels, seen = [], {}
    for mt, _ in runs:
        seen[mt] = seen.get(mt, 0) + 1
        labels.append(mt if seen[mt] == 1 else f"{mt}_{seen[mt]}")
    columns = {lab: [compute_point(mt, float(d), c)[0] for d in base.distances.values()]
               for lab, (mt, c) in zip(labels, runs)}
    rows = []
    for i, d in enumerate(base.distances.values()):
        row = {"d_nm": float(d)}
        for lab in labels:
            row[f"{lab}_mPa"] = columns[lab][i] * 1e3
        for lab in labels[1:]:
            row[f"ratio_{lab}_over_{labels[0]}"] = columns[lab][i] / columns[labels[0]][i]
        rows.append(row)
    return rows


def modes_table(cfg: RunConfig, xi: float, k_x: float, k_y: float):
    eps = permittivity_imag_freq(xi, cfg.material)
    ms = grating_modes(cfg.geometry, eps, BlochPoint(k_x, k_y, xi), cfg.numerics.truncation_N)
    return [{"mode": i, "decay_per_nm": float(lam)} for i, lam in enumerate(ms.eigenvalues)]


def smooth_table(cfg: RunConfig, path: str, normalize: bool):
    an = cfg.analysis
    curve = read_curve_csv(path, an.distance_offset)
    smoothed = rolling_weighted_average(curve, an.schedule)
    ratio = None
    if normalize:
        ratio = normalize_by_pfa(smoothed, cfg.geometry, cfg.material, cfg.environment,
                                 error_mode=an.error_mode)
    return curve_rows(smoothed, ratio)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(float(f"{v:.12g}"))
    return str(v)


def render(rows, fmt: str) -> str:
    if fmt == "json":
        clean = [{k: (float(f"{v:.12g}") if isinstance(v, float) else v) for k, v in r.items()}
                 for r in rows]
        return json.dumps(clean, indent=1) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(rows[0].keys())
        for r in rows:
            w.writerow([_fmt(v) for v in r.values()])
    return buf.getvalue()


def manifest(cfg: RunConfig, command: str, rows) -> dict:
    points = [{"d_nm": r["d_nm"], "numeric_error_mPa": r["numeric_error_mPa"]}
              for r in rows if "numeric_error_mPa" in r]
    resolved = cfg.to_dict()
    resolved["numerics"].pop("threads")
    return {"command": command, "version": __version__, "config_hash": cfg.digest(),
            "config": resolved, "points": points}


def write_outputs(text: str, meta: dict, out: str | None):
    if out is None:
        sys.stdout.write(text)
        return
    with open(out, "w", newline="") as fh:
        fh.write(text)
    root, _ = os.path.splitext(out)
    with open(root + ".manifest.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True)
        fh.write("\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", action="append", metavar="PATH",
                        help="TOML run configuration (compare accepts several)")
    common.add_argument("--out", metavar="PATH", help="output file; a .manifest.json is written next to it")
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads for the frequency sum (default: all cores)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="casimir-grating",
                                     description="Casimir pressure between a plate and a lamellar grating.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="pressure curve with the configured method")
    sub.add_parser("pressure", parents=[common], help="scattering (modal) pressure curve")
    sub.add_parser("lifshitz", parents=[common], help="plane-plane pressure curve")
    sub.add_parser("pfa", parents=[common], help="proximity-force pressure curve")
    sub.add_parser("ema", parents=[common], help="effective-medium slab pressure curve")
    sp = sub.add_parser("modes", parents=[common], help="grating layer decay constants at one point")
    sp.add_argument("--xi", type=float, default=None, help="imaginary frequency in eV (default: first Matsubara)")
    sp.add_argument("--kx", type=float, default=0.001, help="Bloch k_x in 1/nm")
    sp.add_argument("--ky", type=float, default=0.0, help="k_y in 1/nm")
    sp = sub.add_parser("convergence", parents=[common], help="doubling ladder of one numerical knob")
    sp.add_argument("--knob", choices=tuple(KNOBS), required=True)
    sp.add_argument("--distance", type=float, default=500.0, help="separation in nm")
    sp.add_argument("--steps", type=int, default=3, help="ladder length")
    sp.add_argument("--start", type=int, default=None, help="first rung (default: configured value)")
    sp = sub.add_parser("compare", parents=[common], help="join methods and add ratio columns")
    sp.add_argument("--methods", default=None, help="comma-separated methods applied to the first config")
    sp = sub.add_parser("smooth", parents=[common], help="rolling weighted average of measured data")
    sp.add_argument("--input", required=True, help="CSV d_nm,pressure_mPa,random_err_mPa,systematic_err_mPa")
    sp.add_argument("--normalize", action="store_true", help="append ratio,ratio_err to the PFA baseline")
    return parser


def _execute(args) -> tuple[str, dict]:
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        raise ConfigError("threads", "must be >= 1")
    paths = args.config or []
    if len(paths) > 1 and args.command != "compare":
        raise ConfigError("config", "only the compare subcommand accepts several configurations")
    configs = [load_config(p, threads) for p in paths] or [default_config(threads)]
    cfg = configs[0]
    cmd = args.command
    if cmd in ("run", "pressure", "lifshitz", "pfa", "ema"):
        method = cfg.method if cmd == "run" else ("scattering" if cmd == "pressure" else cmd)
        rows = pressure_table(method, cfg)
    elif cmd == "modes":
        xi = args.xi if args.xi is not None else matsubara_frequency(1, cfg.environment)
        if not xi > 0:
            raise ConfigError("xi", "must be > 0")
        rows = modes_table(cfg, xi, args.kx, args.ky)
    elif cmd == "convergence":
        rows = convergence_study(cfg, args.knob, args.distance, args.steps, args.start)
    elif cmd == "compare":
        methods = [m.strip() for m in args.methods.split(",")] if args.methods else None
        if methods:
            for mt in methods:
                if mt not in ("scattering", "pfa", "ema", "lifshitz"):
                    raise ConfigError("methods", f"unknown method {mt!r}")
        rows = compare(configs, methods)
    elif cmd == "smooth":
        try:
            rows = smooth_table(cfg, args.input, args.normalize)
        except OSError as exc:
            raise ConfigError("input", f"cannot read {args.input}: {exc.strerror}") from None
    return render(rows, args.format), manifest(cfg, cmd, rows)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, meta = _execute(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except PhysicsError as exc:
        print(f"physics failure: {exc}", file=sys.stderr)
        return EXIT_PHYSICS
    except ValueError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    write_outputs(text, meta, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

"""Command-line driver: ground-witness, noise-sweep, depth-sweep, bound, oracle-check.

Exit status: 0 when every check passes, 1 on a scientific inconsistency,
2 on a usage or validation error.  Sweeps write CSV, single reports JSON;
both carry ``schema`` = "1".
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, InputError, PreconditionError
from .lattice import Lattice
from .stabilizer import NoiseModel, TrajectoryEnsemble, apply_circuit, init_zero, random_local_circuit
from .toric import (
    build_loop_pair,
    build_toric,
    energy_density,
    ground_state,
    loop_pair_min_side,
)
from .witness import (
    bound_report,
    depth_lower_bound,
    recommended_region_size,
    scan_good_subsystem,
    twist_pairing,
    verify_main_inequality,
)

SCHEMA = "1"
log = logging.getLogger("twistbench")

DEFAULT_SWEEP = (0.0, 0.001, 0.002, 0.005, 0.01, 0.02, 0.03, 0.04, 0.05)

NOISE_COLUMNS = (
    "schema", "rate", "px", "py", "pz", "shots", "seed",
    "eps_global", "eps_global_stderr",
    "window_x", "window_y", "window_side", "eps_window", "eps_window_stderr", "window_good",
    "R_size", "region_energy", "region_energy_stderr", "eps_hat",
    "exp_P", "exp_Q", "exp_twist", "C", "stderr_C",
    "prep_depth", "delta_hat", "witness_lower", "witness_upper", "witness_upper_printed",
    "upper_applicable", "k_P", "k_Q", "depth_lower", "lower_ok", "upper_ok", "consistent",
)

DEPTH_COLUMNS = (
    "schema", "D", "shots", "seed", "R_size", "region_energy", "region_energy_stderr",
    "eps_hat", "eps_hat_stderr", "exp_P", "exp_Q", "exp_twist", "C", "stderr_C",
    "witness_lower", "witness_upper", "witness_upper_printed", "upper_applicable",
    "lower_ok", "upper_ok", "consistent",
)


@dataclass
class ExperimentConfig:
    width: int = 16
    height: int = 16
    boundary: str = "periodic"
    diameter: int | None = None
    d_sep: int | None = None
    region: int | None = None
    noise: tuple | None = None
    sweep: list | None = None
    shots: int = 10_000
    seed: int = 0
    depth_sweep: list | None = None
    prep_depth: int | None = None
    intersecting: bool = True
    format: str | None = None
    out: str | None = None
    workers: int = field(default_factory=lambda: os.cpu_count() or 1)

    def validate(self):
        for name in ("width", "height", "shots", "seed", "workers"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise InputError(f"{name}: must be an integer, got {v!r}")
        if self.width < 2 or self.height < 2:
            raise InputError(f"lattice: must be at least 2x2, got {self.width}x{self.height}")
        if self.boundary not in ("periodic", "open"):
            raise InputError(f"boundary: must be periodic or open, got {self.boundary!r}")
        if self.shots < 1:
            raise InputError(f"shots: must be positive, got {self.shots}")
        if self.seed < 0:
            raise InputError(f"seed: must be non-negative, got {self.seed}")
        if self.workers < 1:
            raise InputError(f"workers: must be positive, got {self.workers}")
        if self.format not in (None, "csv", "json"):
            raise InputError(f"format: must be csv or json, got {self.format!r}")
        for name in ("diameter", "d_sep", "region", "prep_depth"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 0):
                raise InputError(f"{name}: must be a non-negative integer, got {v!r}")
        if self.noise is not None and self.sweep is None:
            NoiseModel(*self.noise)
        elif self.noise is not None and (min(self.noise) < 0 or sum(self.noise) <= 0):
            # with a sweep the triple only sets the X/Y/Z proportions
            raise InputError(f"noise: proportions must be non-negative and not all zero, got {self.noise}")
        for r in self.sweep or ():
            if not 0 <= r <= 1:
                raise InputError(f"sweep: rates must lie in [0, 1], got {r}")
        for d in self.depth_sweep or ():
            if not isinstance(d, int) or d < 0:
                raise InputError(f"depth_sweep: depths must be non-negative integers, got {d!r}")

    def lattice(self) -> Lattice:
        return Lattice(self.width, self.height, self.boundary)

    def loop_geometry(self) -> tuple[int, int, int]:
        """(diameter, d_sep, region side) with defaults filled in."""
        short = min(self.width, self.height)
        d = self.diameter if self.diameter is not None else max(3, short // 2)
        sep = self.d_sep if self.d_sep is not None else max(2, d - d % 2)
        side = self.region
        if side is None:
            side = max(short - 4, loop_pair_min_side(d, sep)) if d >= 3 else short
            side = min(side, short)
        if side > short:
            raise InputError(f"region: side {side} exceeds the lattice ({self.width}x{self.height})")
        return d, sep, side

    def echo(self) -> dict:
        # workers and output location do not affect results, so they are left out
        d = {k: v for k, v in self.__dict__.items() if k not in ("workers", "out", "format")}
        if d["noise"] is not None:
            d["noise"] = list(d["noise"])
        return d


# -- parsing ---------------------------------------------------------------


def _parse_lattice(text: str) -> tuple[int, int]:
    try:
        w, h = text.lower().split("x")
        return int(w), int(h)
    except ValueError:
        raise InputError(f"lattice: expected WxH, got {text!r}") from None


def _parse_noise(text) -> tuple[float, float, float]:
    parts = text if isinstance(text, (list, tuple)) else str(text).split(",")
    if isinstance(text, dict):
        parts = [text.get(k, 0.0) for k in ("px", "py", "pz")]
    try:
        vals = tuple(float(p) for p in parts)
    except (TypeError, ValueError):
        raise InputError(f"noise: expected px,py,pz, got {text!r}") from None
    if len(vals) != 3:
        raise InputError(f"noise: expected three probabilities, got {len(vals)}")
    return vals


def _parse_sweep(text) -> list[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    text = str(text)
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise InputError("sweep: step must be positive")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + k * step, 12) for k in range(max(n, 0))]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"sweep: expected a:b:step or a comma list, got {text!r}") from None


def _parse_ints(text, name: str) -> list[int]:
    if isinstance(text, (list, tuple)):
        vals = list(text)
    else:
        try:
            vals = [int(v) for v in str(text).split(",") if v.strip()]
        except ValueError:
            raise InputError(f"{name}: expected a comma list of integers, got {text!r}") from None
    return vals


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise InputError(f"config: cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"config: {path} is not valid JSON ({exc.msg})") from None
    if not isinstance(raw, dict):
        raise InputError("config: top level must be an object")
    out: dict = {}
    lat = raw.get("lattice", {})
    for key in ("width", "height", "boundary"):
        if key in lat:
            out[key] = lat[key]
    loop = raw.get("loop", {})
    for src, dst in (("diameter", "diameter"), ("d_sep", "d_sep"), ("region", "region")):
        if src in loop:
            out[dst] = loop[src]
    if "intersecting" in loop:
        out["intersecting"] = bool(loop["intersecting"])
    if "noise" in raw:
        noise = raw["noise"]
        if isinstance(noise, dict) and "sweep" in noise:
            out["sweep"] = _parse_sweep(noise["sweep"])
            noise = {k: v for k, v in noise.items() if k != "sweep"}
        if noise:
            out["noise"] = _parse_noise(noise)
    if "sweep" in raw:
        out["sweep"] = _parse_sweep(raw["sweep"])
    for key in ("shots", "seed", "prep_depth", "workers"):
        if key in raw:
            out[key] = raw[key]
    if "depth_sweep" in raw:
        out["depth_sweep"] = _parse_ints(raw["depth_sweep"], "depth_sweep")
    output = raw.get("output", {})
    if "format" in output:
        out["format"] = output["format"]
    if "path" in output:
        out["out"] = output["path"]
    known = {"lattice", "loop", "noise", "sweep", "shots", "seed", "prep_depth",
             "workers", "depth_sweep", "output"}
    extra = sorted(set(raw) - known)
    if extra:
        raise InputError(f"config: unknown field(s) {', '.join(extra)}")
    return out


def build_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults, then the JSON file, then explicit flags."""
    values = _load_config_file(args.config) if args.config else {}
    if args.lattice:
        values["width"], values["height"] = _parse_lattice(args.lattice)
    flag_map = {
        "boundary": args.boundary, "diameter": args.diameter, "d_sep": args.dsep,
        "region": args.region, "shots": args.shots, "seed": args.seed,
        "prep_depth": args.prep_depth, "format": args.format, "out": args.out,
        "workers": args.workers,
    }
    values.update({k: v for k, v in flag_map.items() if v is not None})
    if args.noise:
        values["noise"] = _parse_noise(args.noise)
    if args.sweep:
        values["sweep"] = _parse_sweep(args.sweep)
    if args.depths:
        values["depth_sweep"] = _parse_ints(args.depths, "depths")
    if args.no_intersect:
        values["intersecting"] = False
    try:
        cfg = ExperimentConfig(**values)
    except TypeError as exc:
        raise InputError(f"config: {exc}") from None
    cfg.validate()
    return cfg


# -- output ----------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        v = float(v)
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(payload: dict) -> str:
    return json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n"


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_rows(cfg: ExperimentConfig, command: str, columns, rows, ok: bool):
    if (cfg.format or "csv") == "csv":
        _emit(render_csv(columns, rows), cfg.out)
    else:
        payload = {"schema": SCHEMA, "command": command, "config": cfg.echo(),
                   "ok": ok, "rows": rows}
        _emit(render_json(payload), cfg.out)


def _emit_report(cfg: ExperimentConfig | None, command: str, report: dict, ok: bool, out=None):
    payload = {"schema": SCHEMA, "command": command, "ok": ok}
    if cfg is not None:
        payload["config"] = cfg.echo()
    payload["report"] = report
    _emit(render_json(payload), out if cfg is None else cfg.out)


# -- commands --------------------------------------------------------------


def _setup(cfg: ExperimentConfig):
    """Validated lattice, code and loop pair; raises before any simulation."""
    lat = cfg.lattice()
    code = build_toric(lat)
    d, sep, side = cfg.loop_geometry()
    x0, y0 = (lat.width - side) // 2, (lat.height - side) // 2
    region = lat.rectangle(x0, y0, side, side)
    pair = build_loop_pair(code, region, d, sep, intersecting=cfg.intersecting)
    return lat, code, pair, side


def cmd_ground_witness(cfg: ExperimentConfig) -> int:
    lat, code, pair, side = _setup(cfg)
    state = ground_state(code)
    w = twist_pairing(state, pair)
    expected = 2.0 if pair.intersecting else 0.0
    ok = w.C == expected
    report = w.to_dict()
    report.update({
        "n_qubits": code.n, "logical_qubits": code.logical_qubits, "region_side": side,
        "intersecting": pair.intersecting, "crossings": [list(c) for c in pair.crossings],
        "weight_P": pair.P.weight, "weight_Q": pair.Q.weight, "expected_C": expected,
    })
    _emit_report(cfg, "ground-witness", report, ok)
    if not ok:
        log.error("C = %r, expected %r", w.C, expected)
    return 0 if ok else 1


def _noise_models(cfg: ExperimentConfig) -> list[tuple[float, NoiseModel]]:
    if cfg.sweep is None and cfg.noise is not None:
        m = NoiseModel(*cfg.noise)
        return [(m.total, m)]
    sweep = cfg.sweep if cfg.sweep is not None else DEFAULT_SWEEP
    weights = cfg.noise or (1.0, 1.0, 1.0)
    tot = sum(weights)
    if tot <= 0:
        raise InputError("noise: the channel weights used with --sweep must not all be zero")
    return [(r, NoiseModel(*(r * w / tot for w in weights))) for r in sweep]


def noise_sweep_rows(cfg: ExperimentConfig) -> list[dict]:
    lat, code, pair, side = _setup(cfg)
    models = _noise_models(cfg)
    prep = cfg.prep_depth if cfg.prep_depth is not None else max(lat.width, lat.height)
    base = ground_state(code)
    rows = []
    for rate, model in models:
        ens = TrajectoryEnsemble(base, model, cfg.shots, cfg.seed, cfg.workers)
        eps, eps_se = energy_density(ens, code)
        window, _ = scan_good_subsystem(ens, code, side, eps)
        sw = verify_main_inequality(ens, pair, code, prep)
        br = bound_report(sw.R_size, sw.eps_hat, prep, lattice=lat, k_P=sw.k_P)
        w = sw.witness
        row = {
            "schema": SCHEMA, "rate": rate, "px": model.px, "py": model.py, "pz": model.pz,
            "shots": cfg.shots, "seed": cfg.seed, "eps_global": eps, "eps_global_stderr": eps_se,
            "window_x": window.window_origin.x, "window_y": window.window_origin.y,
            "window_side": side, "eps_window": window.local_density,
            "eps_window_stderr": window.stderr, "window_good": window.is_good,
            "R_size": sw.R_size, "region_energy": sw.region_energy,
            "region_energy_stderr": sw.region_energy_stderr, "eps_hat": sw.eps_hat,
            "exp_P": w.exp_P, "exp_Q": w.exp_Q, "exp_twist": w.exp_twist, "C": w.C,
            "stderr_C": w.stderr_C, "prep_depth": prep, "delta_hat": br.delta,
            "witness_lower": sw.witness_lower, "witness_upper": sw.witness_upper,
            "witness_upper_printed": sw.witness_upper_printed,
            "upper_applicable": sw.upper_applicable, "k_P": sw.k_P, "k_Q": sw.k_Q,
            "depth_lower": br.depth_lower, "lower_ok": sw.lower_ok, "upper_ok": sw.upper_ok,
            "consistent": sw.consistent,
        }
        log.info("rate=%g eps=%.4g C=%.4f+-%.4f consistent=%s",
                 rate, sw.eps_hat, w.C, w.stderr_C, sw.consistent)
        rows.append(row)
    return rows


def cmd_noise_sweep(cfg: ExperimentConfig) -> int:
    rows = noise_sweep_rows(cfg)
    ok = all(r["consistent"] for r in rows)
    _emit_rows(cfg, "noise-sweep", NOISE_COLUMNS, rows, ok)
    return 0 if ok else 1


def depth_sweep_rows(cfg: ExperimentConfig) -> list[dict]:
    lat, code, pair, _ = _setup(cfg)
    depths = cfg.depth_sweep if cfg.depth_sweep is not None else [0, 1, 2, 4, 8]
    if cfg.sweep is not None:
        raise InputError("sweep: depth-sweep takes one absolute --noise channel, not a rate sweep")
    noisy = cfg.noise is not None and NoiseModel(*cfg.noise).total > 0
    rows = []
    for D in depths:
        circ = random_local_circuit(lat, D, np.random.default_rng([cfg.seed, D]))
        state, _ = apply_circuit(init_zero(lat.n_sites), circ, lat)
        target = TrajectoryEnsemble(state, NoiseModel(*cfg.noise), cfg.shots, cfg.seed,
                                    cfg.workers) if noisy else state
        sw = verify_main_inequality(target, pair, code, D)
        w = sw.witness
        rows.append({
            "schema": SCHEMA, "D": D, "shots": cfg.shots if noisy else 1, "seed": cfg.seed,
            "R_size": sw.R_size, "region_energy": sw.region_energy,
            "region_energy_stderr": sw.region_energy_stderr, "eps_hat": sw.eps_hat,
            "eps_hat_stderr": sw.region_energy_stderr / sw.R_size,
            "exp_P": w.exp_P, "exp_Q": w.exp_Q, "exp_twist": w.exp_twist, "C": w.C,
            "stderr_C": w.stderr_C, "witness_lower": sw.witness_lower,
            "witness_upper": sw.witness_upper, "witness_upper_printed": sw.witness_upper_printed,
            "upper_applicable": sw.upper_applicable, "lower_ok": sw.lower_ok,
            "upper_ok": sw.upper_ok, "consistent": sw.consistent,
        })
        log.info("D=%d eps=%.4g C=%.4f consistent=%s", D, sw.eps_hat, w.C, sw.consistent)
    return rows


def cmd_depth_sweep(cfg: ExperimentConfig) -> int:
    rows = depth_sweep_rows(cfg)
    ok = all(r["consistent"] for r in rows)
    _emit_rows(cfg, "depth-sweep", DEPTH_COLUMNS, rows, ok)
    return 0 if ok else 1


def cmd_bound(args: argparse.Namespace) -> int:
    if args.eps is None:
        raise InputError("eps: required for the bound command")
    eps = float(args.eps)
    if not eps >= 0:
        raise InputError(f"eps: must be non-negative, got {args.eps}")
    lattice = Lattice(*_parse_lattice(args.lattice), args.boundary or "periodic") if args.lattice else None
    R = args.R_size
    if R is None:
        R = lattice.n_sites if eps == 0 and lattice else recommended_region_size(eps, args.alpha_exponent)
    if R is None or R < 1:
        raise InputError("R-size: give --R-size or a lattice for eps = 0")
    # raises with the precondition in the message before anything is printed
    depth_lower_bound(R, eps, lattice, args.alpha_exponent)
    rep = bound_report(R, eps, args.D, alpha_exponent=args.alpha_exponent, lattice=lattice)
    _emit_report(None, "bound", rep.to_dict(), True, args.out)
    return 0


def cmd_oracle_check(args: argparse.Namespace) -> int:
    from .oracle.dense import check_cap
    from .oracle.suite import run_oracle_suite

    lattice = None
    if args.lattice:
        lattice = Lattice(*_parse_lattice(args.lattice), args.boundary or "open")
        check_cap(lattice.n_sites, mixed=True)
    seed = args.seed if args.seed is not None else 0
    report = run_oracle_suite(seed, args.inject_fault, args.scale, lattice)
    for law in report["laws"]:
        if not law["ok"]:
            log.error("law %s failed: %d/%d passes, worst %r",
                      law["name"], law["passes"], law["trials"],
                      law.get("worst_residual", law.get("worst_margin")))
    _emit(render_json(report), args.out)
    return 0 if report["ok"] else 1


# -- entry point -----------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lattice", help="WxH, e.g. 16x16")
    common.add_argument("--boundary", choices=("periodic", "open"))
    common.add_argument("--diameter", type=int, help="loop diameter in sites")
    common.add_argument("--dsep", type=int, help="distance between the loop crossings (even)")
    common.add_argument("--region", type=int, help="side of the square region R")
    common.add_argument("--noise", help="px,py,pz")
    common.add_argument("--sweep", help="noise rates as a:b:step or a comma list")
    common.add_argument("--depths", help="comma list of circuit depths")
    common.add_argument("--shots", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--prep-depth", type=int, dest="prep_depth",
                        help="depth D claimed for the ground-state preparation")
    common.add_argument("--no-intersect", action="store_true", dest="no_intersect",
                        help="use a nested, disjoint Q loop")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--workers", type=int)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="twistbench", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("ground-witness", parents=[common], help="C on the exact ground state")
    sub.add_parser("noise-sweep", parents=[common], help="sandwich check per noise rate (CSV)")
    sub.add_parser("depth-sweep", parents=[common], help="sandwich check per circuit depth (CSV)")
    b = sub.add_parser("bound", parents=[common], help="closed-form bounds, no simulation")
    b.add_argument("--eps", type=float)
    b.add_argument("--R-size", type=int, dest="R_size")
    b.add_argument("--alpha-exponent", type=float, default=0.5, dest="alpha_exponent")
    b.add_argument("-D", type=int, dest="D", help="circuit depth for the upper bounds")
    o = sub.add_parser("oracle-check", parents=[common], help="dense-oracle law suite")
    o.add_argument("--inject-fault", action="store_true", dest="inject_fault",
                   help="flip a tableau sign; the suite must then fail")
    o.add_argument("--scale", type=float, default=1.0, help="fraction of the default trial counts")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(name)s: %(message)s", stream=sys.stderr,
    )
    try:
        if args.command == "bound":
            return cmd_bound(args)
        if args.command == "oracle-check":
            return cmd_oracle_check(args)
        cfg = build_config(args)
        handler = {
            "ground-witness": cmd_ground_witness,
            "noise-sweep": cmd_noise_sweep,
            "depth-sweep": cmd_depth_sweep,
        }[args.command]
        return handler(cfg)
    except PreconditionError as exc:
        print(f"twistbench: precondition violated: {exc}", file=sys.stderr)
        return 2
    except (InputError, CapacityError) as exc:
        print(f"twistbench: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Experiment CLI: single solves, convergence traces, and parameter sweeps.

Subcommands:

    starris simulate    --config F --seed S --out DIR
    starris convergence --config F --seed S --out trace.csv
    starris sweep       --config F --param pmax --values 0.01,0.05,0.1
                        --trials 20 --schemes Proposed,RABM --out sweep.csv
                        [--threads K] [--preset desk|paper] [--timing wall]

Config files are INI-style key=value text (UTF-8, '#' comments); keys may
live at the top level or in the [dc] / [ls] sections.  Unset keys take the
reference-deployment defaults.  dBm/dB convenience keys (noise_dbm, rho_db)
are converted to linear watts/gain at load time.

CSV outputs are pure functions of (config bytes, CLI arguments): trials own
independent counter-based streams, rows are emitted in sorted order whatever
the thread count, and runtime_ms is 0.0 unless wall-clock timing is
explicitly requested (measured timings would break byte-reproducibility).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .bcd import Scheme, run_scheme
from .scenario import DcParams, SearchParams, SystemConfig, ValidationError, draw_channels, place_users
from .streams import channel_stream, scheme_stream


class ParseError(ValueError):
    """Config file or CLI value could not be parsed; message names the field."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

SWEEP_HEADER = ["scheme", "seed", "param", "value", "sum_rate", "iterations", "runtime_ms"]
SWEEP_PARAMS = ("pmax", "antennas", "elements", "qlevel")

# Desk preset keeps full sweeps in the minutes range; paper preset restores
# the reference-deployment scale.
PRESETS = {
    "desk": {"N": 16, "max_bcd_iters": 200},
    "paper": {"N": 64, "max_bcd_iters": 1000},
}

_ROOT_FIELDS = {
    "m": ("M", int),
    "n": ("N", int),
    "u_a": ("U_A", int),
    "u_b": ("U_B", int),
    "q": ("Q", int),
    "p_max": ("p_max", float),
    "p_min": ("p_min", float),
    "sigma2": ("sigma2", float),
    "rho": ("rho", float),
    "alpha_pl": ("alpha_pl", float),
    "radius": ("radius", float),
    "epsilon": ("epsilon", float),
    "max_bcd_iters": ("max_bcd_iters", int),
    "n_exact": ("n_exact", int),
    "seed": ("seed", int),
}
_PAIR_FIELDS = {
    "ap_pos": "ap_pos",
    "ris_pos": "ris_pos",
    "center_a": "center_a",
    "center_b": "center_b",
}
_DC_FIELDS = {"tol": float, "max_outer": int, "max_inner": int}
_LS_FIELDS = {"restarts": int, "max_flips": int}


def _convert(raw: str, kind, field: str):
    try:
        return kind(raw)
    except ValueError as err:
        raise ParseError(f"field '{field}': cannot parse {raw!r} as {kind.__name__}") from err


def _parse_pair(raw: str, field: str):
    parts = [s.strip() for s in raw.split(",")]
    if len(parts) != 2:
        raise ParseError(f"field '{field}': expected 'x, y', got {raw!r}")
    return (_convert(parts[0], float, field), _convert(parts[1], float, field))


def load_config(path, preset: str | None = None) -> SystemConfig:
    """Read an INI config; unset fields take defaults (optionally via preset).

    Precedence: built-in defaults < preset < file values.  p_min, when not
    given, floats at 1e-6 * p_max so the power box stays well-posed.
    """
    text = Path(path).read_text(encoding="utf-8")
    return parse_config(text, preset=preset)


def parse_config(text: str, preset: str | None = None) -> SystemConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string("[system]\n" + text)
    except configparser.Error as err:
        raise ParseError(f"config parse error: {err}") from err

    values: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ParseError(f"unknown preset {preset!r} (choose from {sorted(PRESETS)})")
        values.update(PRESETS[preset])

    root = parser["system"] if parser.has_section("system") else {}
    noise_dbm = rho_db = None
    for key, raw in root.items():
        if key == "noise_dbm":
            noise_dbm = _convert(raw, float, key)
        elif key == "rho_db":
            rho_db = _convert(raw, float, key)
        elif key in _ROOT_FIELDS:
            field, kind = _ROOT_FIELDS[key]
            values[field] = _convert(raw, kind, key)
        elif key in _PAIR_FIELDS:
            values[_PAIR_FIELDS[key]] = _parse_pair(raw, key)
        else:
            raise ParseError(f"unknown config field '{key}'")
    if noise_dbm is not None:
        if "sigma2" in values:
            raise ParseError("specify either sigma2 or noise_dbm, not both")
        values["sigma2"] = 10.0 ** (noise_dbm / 10.0) / 1000.0
    if rho_db is not None:
        if "rho" in values:
            raise ParseError("specify either rho or rho_db, not both")
        values["rho"] = 10.0 ** (rho_db / 10.0)

    for section, fields, cls in (("dc", _DC_FIELDS, DcParams), ("ls", _LS_FIELDS, SearchParams)):
        if parser.has_section(section):
            kwargs = {}
            for key, raw in parser[section].items():
                if key not in fields:
                    raise ParseError(f"unknown config field '{section}.{key}'")
                kwargs[key] = _convert(raw, fields[key], f"{section}.{key}")
            values[section] = cls(**kwargs)

    if "p_min" not in values and "p_max" in values:
        values["p_min"] = 1e-6 * values["p_max"]
    return SystemConfig(**values).validate()


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple
    trials: int
    schemes: tuple

    def validate(self) -> "SweepSpec":
        if self.param not in SWEEP_PARAMS:
            raise ParseError(f"param must be one of {SWEEP_PARAMS}, got {self.param!r}")
        if not self.values:
            raise ParseError("values must be nonempty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ParseError("values must be strictly increasing")
        if self.trials < 1:
            raise ParseError("trials must be >= 1")
        if not self.schemes:
            raise ParseError("at least one scheme required")
        return self


@dataclass(frozen=True)
class ResultRow:
    scheme: str
    seed: int
    param: str
    value: float
    sum_rate: float
    iterations: int
    runtime_ms: float


def apply_param(cfg: SystemConfig, param: str, value) -> SystemConfig:
    if param == "pmax":
        return dataclasses.replace(cfg, p_max=float(value), p_min=1e-6 * float(value))
    if param == "antennas":
        return dataclasses.replace(cfg, M=int(value))
    if param == "elements":
        return dataclasses.replace(cfg, N=int(value))
    if param == "qlevel":
        return dataclasses.replace(cfg, Q=int(value))
    raise ParseError(f"unknown sweep param {param!r}")


def trial_channels(cfg: SystemConfig, trial: int):
    """Channel draw for one Monte-Carlo trial from its own substream."""
    rng = channel_stream(cfg.seed, trial)
    return draw_channels(cfg, place_users(cfg, rng), rng)


def _sweep_cell(cfg: SystemConfig, spec: SweepSpec, value, trial: int, scheme: Scheme, wall: bool) -> ResultRow:
    cell_cfg = apply_param(cfg, spec.param, value).validate()
    ch = trial_channels(cell_cfg, trial)
    rng = scheme_stream(cell_cfg.seed, trial, scheme.ordinal)
    t0 = time.perf_counter()
    report = run_scheme(scheme, cell_cfg, ch, rng)
    elapsed = 1e3 * (time.perf_counter() - t0)
    return ResultRow(
        scheme=scheme.value,
        seed=trial,
        param=spec.param,
        value=value,
        sum_rate=report.sum_rate,
        iterations=report.iterations,
        runtime_ms=elapsed if wall else 0.0,
    )


def cmd_sweep(cfg: SystemConfig, spec: SweepSpec, out_path, threads: int = 1, wall_timing: bool = False) -> None:
    """Run the sweep grid and write sorted rows; output is reproducible
    byte-for-byte for a fixed (config, arguments) regardless of threads."""
    spec.validate()
    cells = [
        (value, scheme, trial)
        for value in spec.values
        for scheme in spec.schemes
        for trial in range(spec.trials)
    ]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(lambda c: _sweep_cell(cfg, spec, c[0], c[2], c[1], wall_timing), cells)
            )
    else:
        rows = [_sweep_cell(cfg, spec, v, t, s, wall_timing) for (v, s, t) in cells]

    order = {scheme: i for i, scheme in enumerate(Scheme)}
    rows.sort(key=lambda r: (r.value, order[Scheme(r.scheme)], r.seed))
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(SWEEP_HEADER)
    for r in rows:
        writer.writerow(
            [r.scheme, r.seed, r.param, _fmt(r.value), _fmt(r.sum_rate), r.iterations, _fmt(r.runtime_ms)]
        )
    Path(out_path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _fmt(x) -> str:
    """Shortest round-trip decimal form; stable across runs."""
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def cmd_convergence(cfg: SystemConfig, seed: int, out_path) -> None:
    cfg = dataclasses.replace(cfg, seed=seed).validate()
    ch = trial_channels(cfg, 0)
    rng = scheme_stream(cfg.seed, 0, Scheme.PROPOSED.ordinal)
    report = run_scheme(Scheme.PROPOSED, cfg, ch, rng)
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["iteration", "sum_rate"])
    for i, rate in enumerate(report.trace, start=1):
        writer.writerow([i, _fmt(rate)])
    Path(out_path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def cmd_simulate(cfg: SystemConfig, seed: int, out_dir) -> None:
    cfg = dataclasses.replace(cfg, seed=seed).validate()
    ch = trial_channels(cfg, 0)
    rng = scheme_stream(cfg.seed, 0, Scheme.PROPOSED.ordinal)
    report = run_scheme(Scheme.PROPOSED, cfg, ch, rng)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {
        "scheme": Scheme.PROPOSED.value,
        "seed": seed,
        "sum_rate": report.sum_rate,
        "initial_sum_rate": report.initial_sum_rate,
        "iterations": report.iterations,
        "termination": report.termination,
        "safeguard_rejections": report.safeguard_rejections,
        "trace": list(report.trace),
        "block_timings_ms": report.block_timings,
        "config": _config_dict(cfg),
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _config_dict(cfg: SystemConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["ap_pos"] = list(cfg.ap_pos)
    d["ris_pos"] = list(cfg.ris_pos)
    d["center_a"] = list(cfg.center_a)
    d["center_b"] = list(cfg.center_b)
    return d


def _parse_schemes(raw: str) -> tuple:
    by_name = {s.value.lower(): s for s in Scheme}
    by_name["rabm+rsv"] = Scheme.RABM_RSV
    by_name["f-star"] = Scheme.FSTAR
    by_name["all"] = None
    schemes = []
    for token in raw.split(","):
        token = token.strip().lower()
        if token == "all":
            return tuple(Scheme)
        if token not in by_name:
            raise ParseError(f"unknown scheme {token!r} (choose from {sorted(by_name)})")
        schemes.append(by_name[token])
    return tuple(schemes)


def _parse_values(raw: str, param: str) -> tuple:
    kind = float if param == "pmax" else int
    return tuple(_convert(tok.strip(), kind, "values") for tok in raw.split(","))


def _load(args) -> SystemConfig:
    if args.config is not None:
        try:
            return load_config(args.config, preset=args.preset)
        except FileNotFoundError as err:
            raise ParseError(f"config file not found: {args.config}") from err
    return parse_config("", preset=args.preset)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="starris", description=__doc__.splitlines()[0])
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="INI config file (defaults if omitted)")
        p.add_argument("--preset", choices=sorted(PRESETS), default=None)
        p.add_argument("--seed", type=int, default=None, help="override the config seed")

    p_sim = sub.add_parser("simulate", help="one full solve; JSON report")
    common(p_sim)
    p_sim.add_argument("--out", required=True, help="output directory")

    p_conv = sub.add_parser("convergence", help="per-iteration sum-rate trace CSV")
    common(p_conv)
    p_conv.add_argument("--out", required=True, help="output CSV path")

    p_sweep = sub.add_parser("sweep", help="Monte-Carlo parameter sweep CSV")
    common(p_sweep)
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True, help="comma-separated, strictly increasing")
    p_sweep.add_argument("--trials", type=int, default=20)
    p_sweep.add_argument("--schemes", default="all")
    p_sweep.add_argument("--threads", type=int, default=1)
    p_sweep.add_argument("--timing", choices=("none", "wall"), default="none",
                         help="wall-clock runtimes break byte-reproducibility")
    p_sweep.add_argument("--out", required=True, help="output CSV path")
    return top


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _load(args)
        seed = args.seed if args.seed is not None else cfg.seed
        cfg = dataclasses.replace(cfg, seed=seed).validate()
        if args.command == "simulate":
            cmd_simulate(cfg, seed, args.out)
        elif args.command == "convergence":
            cmd_convergence(cfg, seed, args.out)
        elif args.command == "sweep":
            spec = SweepSpec(
                param=args.param,
                values=_parse_values(args.values, args.param),
                trials=args.trials,
                schemes=_parse_schemes(args.schemes),
            ).validate()
            cmd_sweep(cfg, spec, args.out, threads=args.threads, wall_timing=args.timing == "wall")
    except (ParseError, ValidationError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as err:  # numerical or I/O failure: name it, fail loud
        print(f"runtime error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

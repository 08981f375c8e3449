"""Command-line front end: ``qlap <command> [options]``.

Settings come from three layers, later ones winning: built-in defaults, an
INI file given with ``--config``, then command-line flags.  Every command that
writes files also writes ``config.ini`` into its output directory; running
the same command with ``--config <that file>`` reproduces the outputs.

Exit codes: 0 success, 2 usage or validation error, 3 vanishing infimum
(an informative outcome), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import verify
from .functionals import report
from .minimize import (
    MinimizeError,
    MinimizeOptions,
    Status,
    estimate_rho_hat,
    global_minimize,
    local_minimize,
    threshold_estimates,
)
from .params import (
    ParameterError,
    ProblemParams,
    classify_regime,
    gn_exponents,
    liouville_certificate,
)
from .shoot import (
    GroundStateNotFound,
    ShootConfig,
    ShootError,
    TailError,
    decay_fit,
    find_ground_state,
    shoot,
)

log = logging.getLogger("qlap")

EXIT_OK, EXIT_USAGE, EXIT_VANISHING, EXIT_FAILURE = 0, 2, 3, 4


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# configuration

# (section, key, type, flag destination)
_FIELDS = [
    ("params", "N", int, "N"),
    ("params", "q", float, "q"),
    ("params", "p", float, "p"),
    ("params", "alpha", float, "alpha"),
    ("params", "m", float, "m"),
    ("grid", "n", int, "n"),
    ("grid", "r_max", float, "r_max"),
    ("minimize", "max_iter", int, "max_iter"),
    ("minimize", "tol_grad", float, "tol_grad"),
    ("minimize", "restarts", int, "restarts"),
    ("minimize", "seed", int, "seed"),
    ("shoot", "lambda", float, "lam"),
    ("shoot", "u0", float, "u0"),
    ("shoot", "horizon", float, "horizon"),
    ("shoot", "tol_step", float, "tol_step"),
    ("shoot", "blowup_threshold", float, "blowup"),
    ("output", "dir", str, "out"),
    ("output", "format", str, "format"),
]


@dataclass
class RunConfig:
    params: ProblemParams
    minimize: MinimizeOptions
    shoot: ShootConfig
    output_dir: Path | None
    format: str = "json"
    raw: dict = field(default_factory=dict)

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        for section, key, _, dest in _FIELDS:
            value = self.raw.get(dest)
            # the output directory is chosen per run, so it is not echoed
            if value is None or dest == "out":
                continue
            if not cp.has_section(section):
                cp.add_section(section)
            cp.set(section, key, repr(value) if isinstance(value, float) else str(value))
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _read_ini(path: str) -> dict:
    cp = configparser.ConfigParser()
    cp.optionxform = str
    if not cp.read(path, encoding="utf-8"):
        raise UsageError(f"cannot read config file {path!r}")
    known = {(s, k) for s, k, _, _ in _FIELDS}
    for section in cp.sections():
        for key in cp[section]:
            if (section, key) not in known:
                raise UsageError(f"unknown config entry [{section}] {key}")
    out = {}
    for section, key, typ, dest in _FIELDS:
        if cp.has_option(section, key):
            text = cp.get(section, key)
            try:
                out[dest] = typ(text)
            except ValueError as exc:
                raise UsageError(f"[{section}] {key} = {text!r}: {exc}") from None
    return out


def build_config(args: argparse.Namespace, required: tuple[str, ...] = ()) -> RunConfig:
    """Merge defaults, the INI file and flags, then validate everything eagerly."""
    raw = _read_ini(args.config) if getattr(args, "config", None) else {}
    for _, _, _, dest in _FIELDS:
        value = getattr(args, dest, None)
        if value is not None:
            raw[dest] = value
    missing = [f"--{k}" for k in required if raw.get(k) is None]
    if missing:
        raise UsageError(f"missing required option(s): {', '.join(missing)}")
    for k in ("N", "q", "p"):
        if raw.get(k) is None:
            raise UsageError(f"--{k} is required")
    try:
        params = ProblemParams(N=raw["N"], q=raw["q"], p=raw["p"],
                               alpha=raw.get("alpha", 1.0), m=raw.get("m", 1.0))
        mopts = MinimizeOptions(
            max_iter=raw.get("max_iter", 20000), tol_grad=raw.get("tol_grad", 1e-7),
            restarts=raw.get("restarts", 6), seed=raw.get("seed", 0),
            n=raw.get("n", 1025), r_max=raw.get("r_max"))
        scfg = ShootConfig(lam=raw.get("lam", 1.0), u0=raw.get("u0", 1.0),
                           r_max=raw.get("horizon"), tol_step=raw.get("tol_step", 1e-12),
                           blowup_threshold=raw.get("blowup", 1e6))
    except ParameterError as exc:
        raise UsageError(str(exc)) from None
    fmt = raw.get("format", "json")
    if fmt not in ("json", "csv"):
        raise UsageError(f"format must be json or csv, got {fmt!r}")
    out = raw.get("out")
    return RunConfig(params, mopts, scfg, Path(out) if out else None, fmt, raw)


def _dump(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, indent=2) + "\n"


def _plain(obj):
    """Turn numpy scalars and containers into JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


class Output:
    """Writes files into the output directory (if any) and echoes the config there."""

    def __init__(self, cfg: RunConfig):
        self.dir = cfg.output_dir
        if self.dir is not None:
            self.dir.mkdir(parents=True, exist_ok=True)
            (self.dir / "config.ini").write_text(cfg.to_ini(), encoding="utf-8")

    def write(self, name: str, text: str) -> None:
        if self.dir is not None:
            (self.dir / name).write_text(text, encoding="utf-8")


def _flatten(rec: dict, prefix: str = "") -> list[tuple[str, object]]:
    rows = []
    for k in sorted(rec):
        v = rec[k]
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            rows += _flatten(v, key + ".")
        else:
            rows.append((key, json.dumps(_plain(v)) if isinstance(v, (list, tuple)) else v))
    return rows


def emit(cfg: RunConfig, rec: dict) -> None:
    """Print a record to stdout as JSON or as ``key,value`` CSV rows."""
    if cfg.format == "csv":
        print(_csv_table(["key", "value"], [list(r) for r in _flatten(_plain(rec))]), end="")
    else:
        print(_dump(rec), end="")


def _csv_table(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def cmd_regime(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    reg = classify_regime(p)
    rec = {
        "exponents": gn_exponents(p).as_dict(),
        "regime": reg.kind.value,
        "zero_mass_eligible": reg.zero_mass_eligible,
        "liouville": liouville_certificate(p.N, p.p, p.q).kind.value,
    }
    Output(cfg).write("regime.json", _dump(rec))
    emit(cfg, rec)
    return EXIT_OK


def cmd_minimize(args) -> int:
    cfg = build_config(args, required=("m", "alpha"))
    p, opts = cfg.params, cfg.minimize
    if args.local:
        rho = args.rho if args.rho is not None else estimate_rho_hat(p)
        res = local_minimize(p, rho, opts)
    else:
        res = global_minimize(p, opts)
    out = Output(cfg)
    out.write("minimize.json", res.to_json(p) + "\n")
    out.write("profile.csv", res.u.to_csv())
    out.write("energy_report.json", report(res.u, p).to_json(p) + "\n")
    emit(cfg, {"status": res.status.value, "energy": res.energy, "lambda": res.lam,
               "K": res.K, "constraint": res.constraint})
    if res.status is Status.VANISHING:
        return EXIT_VANISHING
    return EXIT_OK if res.status is Status.CONVERGED else EXIT_FAILURE


def cmd_alpha0(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    reg = classify_regime(p)
    if not reg.is_intermediate:
        tab = gn_exponents(p)
        raise UsageError(f"alpha0 needs the intermediate regime p2={tab.p2:g} < p < pq={tab.pq:g}; "
                         f"(N={p.N}, q={p.q}, p={p.p}) is {reg.kind.value}")
    rep, qres = threshold_estimates(p, cfg.minimize)
    rec = rep.to_record(p)
    out = Output(cfg)
    out.write("alpha0.json", _dump(rec))
    out.write("quotient_minimizer.csv", qres.u.to_csv())
    emit(cfg, rec)
    return EXIT_OK


def _shoot_outputs(cfg: RunConfig, res, extra: dict | None = None) -> None:
    rec = res.to_record()
    if extra:
        rec.update(extra)
    out = Output(cfg)
    out.write("shoot.json", _dump(rec))
    out.write("trajectory.csv", res.trajectory_csv())
    emit(cfg, rec)


def cmd_shoot(args) -> int:
    cfg = build_config(args)
    res = shoot(cfg.shoot, cfg.params)
    _shoot_outputs(cfg, res)
    return EXIT_OK


def cmd_zero_mass(args) -> int:
    cfg = build_config(args)
    p = cfg.params
    scfg = ShootConfig(lam=0.0, u0=1.0, r_max=cfg.shoot.r_max, tol_step=cfg.shoot.tol_step,
                       blowup_threshold=cfg.shoot.blowup_threshold)
    try:
        res = find_ground_state(p, 0.0, scfg)
    except GroundStateNotFound as exc:
        cert = liouville_certificate(p.N, p.p, p.q)
        rec = {"found": False, "message": str(exc), "liouville": cert.kind.value,
               "params": p.as_dict(),
               "note": "numerical surrogate: no decaying radial shooting solution in the scanned range"}
        Output(cfg).write("zero_mass.json", _dump(rec))
        emit(cfg, rec)
        return EXIT_FAILURE
    extra = {"found": True}
    try:
        slope, intercept, window = decay_fit(res)
        extra["decay_fit"] = {"slope": slope, "intercept": intercept, "r_window": list(window)}
    except TailError as exc:
        extra["decay_fit"] = {"error": str(exc)}
    _shoot_outputs(cfg, res, extra)
    return EXIT_OK


def _scan_row(job):
    params, opts, value = job
    try:
        res = global_minimize(params, opts)
    except (MinimizeError, ParameterError) as exc:
        return [value, "error", math.nan, math.nan, math.nan, math.nan, math.nan, str(exc)]
    d = res.diagnostics
    return [value, res.status.value, res.energy, res.lam, res.K, d.get("q_residual", math.nan),
            d.get("pohozaev_residual", math.nan), ""]


def worker_count() -> int:
    raw = os.environ.get("QLAP_THREADS")
    if raw is None:
        return max(1, min(4, os.cpu_count() or 1))
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"QLAP_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise UsageError(f"QLAP_THREADS must be a positive integer, got {raw!r}")
    return n


def cmd_scan(args) -> int:
    need = ("alpha",) if args.vary == "m" else ("m",)
    cfg = build_config(args, required=need)
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    if args.geometric:
        if not (args.start > 0 and args.stop > 0):
            raise UsageError("--geometric needs positive --from and --to")
        values = np.geomspace(args.start, args.stop, args.steps)
    else:
        values = np.linspace(args.start, args.stop, args.steps)
    jobs = []
    for v in values.tolist():
        try:
            jobs.append((cfg.params.replace(**{args.vary: v}), cfg.minimize, v))
        except ParameterError as exc:
            raise UsageError(str(exc)) from None
    workers = worker_count()
    if workers == 1:
        rows = [_scan_row(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_row, jobs))  # map keeps input order
    header = [args.vary, "status", "energy", "lambda", "K", "q_residual", "pohozaev_residual", "error"]
    text = _csv_table(header, rows)
    Output(cfg).write("scan.csv", text)
    print(text, end="")
    failed = sum(r[1] == "error" for r in rows)
    if failed:
        log.warning("%d of %d scan rows failed", failed, len(rows))
    return EXIT_OK if failed < len(rows) else EXIT_FAILURE


def cmd_verify(args) -> int:
    out_dir = Path(args.out) if args.out else None
    checks = verify.run(quick=args.quick)
    for c in checks:
        print(c.line())
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "verify.json").write_text(_dump([c.to_record() for c in checks]), encoding="utf-8")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAILURE


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sp: argparse.ArgumentParser, shoot_opts: bool = False) -> None:
    g = sp.add_argument_group("problem")
    g.add_argument("--config", help="INI file with [params] [grid] [minimize] [shoot] [output]")
    g.add_argument("--N", type=int)
    g.add_argument("--q", type=float)
    g.add_argument("--p", type=float)
    g.add_argument("--alpha", type=float)
    g.add_argument("--m", type=float)
    g.add_argument("--out", help="output directory (files are written only if given)")
    g.add_argument("--format", choices=("json", "csv"))
    n = sp.add_argument_group("numerics")
    n.add_argument("--n", type=int, help="grid nodes")
    n.add_argument("--r-max", dest="r_max", type=float, help="grid radius (default: automatic)")
    n.add_argument("--max-iter", dest="max_iter", type=int)
    n.add_argument("--tol-grad", dest="tol_grad", type=float)
    n.add_argument("--restarts", type=int)
    n.add_argument("--seed", type=int)
    if shoot_opts:
        s = sp.add_argument_group("shooting")
        s.add_argument("--lambda", dest="lam", type=float)
        s.add_argument("--u0", type=float)
        s.add_argument("--horizon", type=float, help="integration horizon r_max")
        s.add_argument("--tol-step", dest="tol_step", type=float)
        s.add_argument("--blowup", type=float, help="blow-up cap as a multiple of u0")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlap", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("regime", help="exponent table, regime and Liouville certificate")
    _add_common(sp)
    sp.set_defaults(func=cmd_regime)

    sp = sub.add_parser("minimize", help="global or local constrained minimization")
    _add_common(sp)
    sp.add_argument("--local", action="store_true", help="minimize on {K > rho/2} instead")
    sp.add_argument("--rho", type=float, help="radius for --local (default: estimated)")
    sp.set_defaults(func=cmd_minimize)

    sp = sub.add_parser("alpha0", help="threshold strength: closed form vs bisection")
    _add_common(sp)
    sp.set_defaults(func=cmd_alpha0)

    sp = sub.add_parser("shoot", help="integrate one radial trajectory")
    _add_common(sp, shoot_opts=True)
    sp.set_defaults(func=cmd_shoot)

    sp = sub.add_parser("zero-mass", help="decaying solution at lambda = 0 and its tail fit")
    _add_common(sp, shoot_opts=True)
    sp.set_defaults(func=cmd_zero_mass)

    sp = sub.add_parser("scan", help="sweep m or alpha through global minimization")
    _add_common(sp)
    sp.add_argument("--vary", choices=("m", "alpha"), required=True)
    sp.add_argument("--from", dest="start", type=float, required=True)
    sp.add_argument("--to", dest="stop", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--geometric", action="store_true", help="log-spaced values")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("verify", help="run the invariant suite")
    sp.add_argument("--quick", action="store_true", help="skip the minimizer-heavy checks")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(levelname)s %(message)s", stream=sys.stderr)
    t0 = time.time()
    try:
        code = args.func(args)
    except (UsageError, ParameterError) as exc:
        print(f"qlap {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MinimizeError, ShootError, TailError) as exc:
        print(f"qlap {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    log.info("%s finished in %.2fs with exit code %d", args.command, time.time() - t0, code)
    return code


if __name__ == "__main__":
    sys.exit(main())

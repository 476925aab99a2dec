"""
Command-line driver: read a JSON run configuration, evaluate it, write tables.

Usage::

    tunnel-lab --config run.json [--jobs N] [--out DIR] [--verbose]

Every run writes a CSV table, a JSON summary and, when requested, an SVG
plot into the output directory (``TUNNEL_LAB_OUT`` overrides ``--out``).
Exit status is 0 on success, 1 for an invalid configuration and 2 when a
numerical routine fails; the JSON summary then names the error type.
"""

from __future__ import annotations

import argparse
import csv
import enum
import io
import itertools
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .errors import TunnelLabError
from .fields import Drive, NO_DRIVE, Shape
from .system import ZenerSystem

__all__ = ["Mode", "RunConfig", "ConfigError", "load_config", "run", "main", "TUNNEL_COLUMNS", "ENHANCED_COLUMNS"]

log = logging.getLogger("tunnel_lab")

TUNNEL_COLUMNS = ("mode", "g", "r", "theta", "tau0", "x_exit", "action", "exact_exponent", "flag_eq16a", "flag_eq18a", "flag_eq28")
ENHANCED_COLUMNS = ("mode", "lam", "eps", "A0", "sigma_mag", "A0_fB", "A1", "W", "valid")


class Mode(str, enum.Enum):
    STATIC = "static"
    PULSE = "pulse"
    EXACT_VS_SEMICLASSICAL = "exact-vs-semiclassical"
    SWEEP = "sweep"
    ENHANCED2D = "enhanced2d"
    RESONANCE = "resonance"


class ConfigError(ValueError):
    """The run configuration is malformed."""


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DriveConfig:
    shape: str = "lorentzian_cubed"
    r: float = 0.1
    width: float = 3.0

    def drive(self, r: float | None = None, width: float | None = None) -> Drive:
        return Drive(Shape(self.shape), self.r if r is None else r, self.width if width is None else width)


@dataclass(frozen=True)
class Tolerances:
    min_admissibility: float = 25.0
    resonance_atol: float = 1e-6


@dataclass(frozen=True)
class Outputs:
    csv: str = "results.csv"
    json: str = "summary.json"
    plot: str | None = "plot.svg"


@dataclass(frozen=True)
class RunConfig:
    """Validated run description.

    ``g`` lists the coupling values for the static, pulse and cross-check
    modes.  ``sweep`` maps axis names (``g``, ``r``, ``width``) to value
    lists; the sweep runs over their Cartesian product.  ``barrier`` holds
    ``lam`` and ``eps`` of the 2D reference barrier; ``resonance`` holds
    ``param``, ``range`` and ``count`` of the scan.
    """

    mode: Mode
    g: tuple[float, ...] = (20.0,)
    drive: DriveConfig = field(default_factory=DriveConfig)
    sweep: dict[str, tuple[float, ...]] = field(default_factory=dict)
    exact: bool | None = None
    tolerances: Tolerances = field(default_factory=Tolerances)
    barrier: dict[str, float] = field(default_factory=lambda: {"lam": 3.0, "eps": 0.5})
    resonance: dict[str, Any] = field(default_factory=lambda: {"param": "lam", "range": (5.0, 12.0), "count": 8})
    outputs: Outputs = field(default_factory=Outputs)
    seed: int | None = None

    @property
    def run_exact(self) -> bool:
        if self.exact is not None:
            return self.exact
        return self.mode in (Mode.STATIC, Mode.EXACT_VS_SEMICLASSICAL)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "g": list(self.g),
            "drive": vars(self.drive),
            "sweep": {k: list(v) for k, v in self.sweep.items()},
            "exact": self.run_exact,
            "tolerances": vars(self.tolerances),
            "barrier": dict(self.barrier),
            "resonance": {k: list(v) if isinstance(v, tuple) else v for k, v in self.resonance.items()},
            "outputs": vars(self.outputs),
            "seed": self.seed,
        }


_TOP_KEYS = {"mode", "g", "drive", "sweep", "exact", "tolerances", "barrier", "resonance", "outputs", "seed"}


def _reject_unknown(d: dict, allowed: set, where: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(v, where: str, positive: bool = False, nonneg: bool = False) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where} must be a finite number, got {v!r}")
    if positive and not v > 0:
        raise ConfigError(f"{where} must be positive, got {v}")
    if nonneg and v < 0:
        raise ConfigError(f"{where} must be non-negative, got {v}")
    return float(v)


def _axis(spec, where: str, **kw) -> tuple[float, ...]:
    """A list of numbers, a scalar, or ``{"start", "stop", "count"}``."""
    if isinstance(spec, dict):
        _reject_unknown(spec, {"start", "stop", "count"}, where)
        if set(spec) != {"start", "stop", "count"}:
            raise ConfigError(f"{where} needs start, stop and count")
        n = spec["count"]
        if isinstance(n, bool) or not isinstance(n, int) or n < 1:
            raise ConfigError(f"{where}.count must be an integer >= 1, got {n!r}")
        a, b = _number(spec["start"], f"{where}.start", **kw), _number(spec["stop"], f"{where}.stop", **kw)
        return tuple(float(v) for v in np.linspace(a, b, n))
    if isinstance(spec, list):
        if not spec:
            raise ConfigError(f"{where} is empty")
        return tuple(_number(v, f"{where}[{i}]", **kw) for i, v in enumerate(spec))
    return (_number(spec, where, **kw),)


def load_config(data: dict) -> RunConfig:
    """Validate a parsed JSON object.

    Raises
    ------
    ConfigError
        On unknown keys, wrong types, empty axes or non-positive tolerances.
    """
    _reject_unknown(data, _TOP_KEYS, "config")
    if "mode" not in data:
        raise ConfigError("config needs a mode")
    try:
        mode = Mode(data["mode"])
    except ValueError:
        raise ConfigError(f"unknown mode {data['mode']!r}; choose from {[m.value for m in Mode]}") from None
    kw: dict[str, Any] = {"mode": mode}
    if "g" in data:
        kw["g"] = _axis(data["g"], "g", positive=True)
    if "drive" in data:
        d = data["drive"]
        _reject_unknown(d, {"shape", "r", "width"}, "drive")
        shape = d.get("shape", "lorentzian_cubed")
        if shape not in {s.value for s in Shape}:
            raise ConfigError(f"unknown drive shape {shape!r}")
        kw["drive"] = DriveConfig(shape, _number(d.get("r", 0.1), "drive.r", nonneg=True), _number(d.get("width", 3.0), "drive.width", positive=True))
    if "sweep" in data:
        sw = data["sweep"]
        _reject_unknown(sw, {"g", "r", "width"}, "sweep")
        kw["sweep"] = {k: _axis(v, f"sweep.{k}", nonneg=(k == "r"), positive=(k != "r")) for k, v in sw.items()}
    if mode is Mode.SWEEP and not kw.get("sweep"):
        raise ConfigError("sweep mode needs at least one sweep axis")
    if "exact" in data:
        if not isinstance(data["exact"], bool):
            raise ConfigError("exact must be true or false")
        kw["exact"] = data["exact"]
    if "tolerances" in data:
        t = data["tolerances"]
        _reject_unknown(t, {"min_admissibility", "resonance_atol"}, "tolerances")
        kw["tolerances"] = Tolerances(**{k: _number(v, f"tolerances.{k}", positive=True) for k, v in t.items()})
    if "barrier" in data:
        bar = data["barrier"]
        _reject_unknown(bar, {"lam", "eps"}, "barrier")
        merged = {"lam": 3.0, "eps": 0.5}
        merged.update({k: _number(v, f"barrier.{k}") for k, v in bar.items()})
        if merged["eps"] <= 0:
            raise ConfigError("barrier.eps must be positive")
        kw["barrier"] = merged
    if "resonance" in data:
        res = data["resonance"]
        _reject_unknown(res, {"param", "range", "count"}, "resonance")
        param = res.get("param", "lam")
        if param not in ("lam", "eps"):
            raise ConfigError("resonance.param must be 'lam' or 'eps'")
        rng = res.get("range", [5.0, 12.0])
        if not isinstance(rng, list) or len(rng) != 2:
            raise ConfigError("resonance.range must be a two-element list")
        lo, hi = (_number(v, "resonance.range") for v in rng)
        if not lo < hi:
            raise ConfigError("resonance.range must be increasing")
        count = res.get("count", 8)
        if isinstance(count, bool) or not isinstance(count, int) or count < 2:
            raise ConfigError("resonance.count must be an integer >= 2")
        kw["resonance"] = {"param": param, "range": (lo, hi), "count": count}
    if "outputs" in data:
        o = data["outputs"]
        _reject_unknown(o, {"csv", "json", "plot"}, "outputs")
        for k in ("csv", "json"):
            if k in o and (not isinstance(o[k], str) or not o[k]):
                raise ConfigError(f"outputs.{k} must be a file name")
        if "plot" in o and o["plot"] is not None and (not isinstance(o["plot"], str) or not o["plot"]):
            raise ConfigError("outputs.plot must be a file name or null")
        kw["outputs"] = Outputs(**o)
    if "seed" in data:
        if data["seed"] is not None and (isinstance(data["seed"], bool) or not isinstance(data["seed"], int)):
            raise ConfigError("seed must be an integer or null")
        kw["seed"] = data["seed"]
    return RunConfig(**kw)


# --------------------------------------------------------------------------
# work items (module level so the worker pool can pickle them)
# --------------------------------------------------------------------------


def _tunnel_point(task: tuple) -> dict:
    mode, g, shape, r, width, exact, min_adm = task
    from .exact_zener import packet_probability
    from .semiclassical import action_integral, check_semiclassical, closed_form_action

    drive = NO_DRIVE if shape is None else Drive(Shape(shape), r, width)
    row: dict[str, Any] = {"mode": mode, "g": g, "r": 0.0 if drive.is_null else r, "theta": None if drive.is_null else width}
    try:
        flags = check_semiclassical(ZenerSystem(g), drive)
        row.update(flags.as_columns())
        ab = action_integral(drive, g)
        row.update(tau0=ab.tau0, x_exit=ab.x_exit, action=ab.action, exact_exponent=None)
        if drive.shape is Shape.LORENTZIAN_CUBED and not drive.is_null:
            row["closed_form_action"] = closed_form_action(width, g)
        elif drive.is_null:
            row["closed_form_action"] = math.pi * g / 2.0
        if exact:
            res = packet_probability(ZenerSystem(g), None if drive.is_null else drive, min_admissibility=min_adm)
            row["exact_exponent"] = res.exponent
    except TunnelLabError as exc:
        row["error"] = {"name": type(exc).__name__, "message": str(exc)}
    return row


def _enhanced_point(task: tuple) -> dict:
    lam, eps, seed = task
    from .enhanced_2d import enhanced_action, reference_barrier

    row: dict[str, Any] = {"mode": None, "lam": lam, "eps": eps}
    try:
        res = enhanced_action(reference_barrier(lam=lam, eps=eps), seed=seed)
        row.update(A0=res.A0, sigma_mag=res.sigma_mag, A0_fB=res.A0_fB, A1=res.A1, W=res.W, valid=res.valid, f_point=list(res.f_point))
    except TunnelLabError as exc:
        row["error"] = {"name": type(exc).__name__, "message": str(exc)}
    return row


def _map(fn, tasks: list, jobs: int) -> list:
    """Evaluate tasks, in parallel when ``jobs > 1``; results keep task order."""
    if jobs <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, tasks))


# --------------------------------------------------------------------------
# modes
# --------------------------------------------------------------------------


def _tunnel_tasks(cfg: RunConfig) -> list[tuple]:
    exact, adm = cfg.run_exact, cfg.tolerances.min_admissibility
    d = cfg.drive
    m = cfg.mode.value
    if cfg.mode is Mode.STATIC:
        return [(m, g, None, 0.0, 0.0, exact, adm) for g in cfg.g]
    if cfg.mode in (Mode.PULSE, Mode.EXACT_VS_SEMICLASSICAL):
        return [(m, g, d.shape, d.r, d.width, exact, adm) for g in cfg.g]
    axes = {"g": cfg.g[:1], "r": (d.r,), "width": (d.width,)}
    axes.update(cfg.sweep)
    return [(m, g, d.shape, r, w, exact, adm) for g, r, w in itertools.product(axes["g"], axes["r"], axes["width"])]


def _tunnel_extras(cfg: RunConfig, rows: list[dict]) -> dict:
    extras: dict[str, Any] = {}
    if cfg.mode is Mode.EXACT_VS_SEMICLASSICAL and cfg.run_exact:
        errs = []
        for row in rows:
            if row.get("exact_exponent") is not None and row.get("action"):
                row["relative_error"] = abs(row["exact_exponent"] - row["action"]) / row["action"]
                errs.append(row["relative_error"])
        if len(errs) == len(rows) and len(errs) > 1:
            order = np.argsort([row["g"] for row in rows])
            e = [errs[i] for i in order]
            extras["error_decreases_with_g"] = bool(all(b < a for a, b in zip(e[:-1], e[1:])))
    return extras


def _plot_tunnel(cfg: RunConfig, rows: list[dict], path: Path):
    ok = [r for r in rows if "error" not in r]
    if not ok:
        return
    if cfg.mode is Mode.SWEEP:
        axis = next((k for k, v in cfg.sweep.items() if len(v) > 1), "g")
        key = {"g": "g", "r": "r", "width": "theta"}[axis]
        xs = [r[key] for r in ok]
        series = {"A / g": [r["action"] / r["g"] for r in ok]}
        if all("closed_form_action" in r for r in ok):
            series["closed form / g"] = [r["closed_form_action"] / r["g"] for r in ok]
        if all(r.get("exact_exponent") is not None for r in ok):
            series["exact -ln W / g"] = [r["exact_exponent"] / r["g"] for r in ok]
        _svg(path, xs, series, xlabel=key, ylabel="exponent / g")
    else:
        xs = [r["g"] for r in ok]
        series = {"semiclassical A": [r["action"] for r in ok]}
        if all(r.get("exact_exponent") is not None for r in ok):
            series["exact -ln W"] = [r["exact_exponent"] for r in ok]
        _svg(path, xs, series, xlabel="g", ylabel="-ln W")


def _svg(path: Path, xs, series: dict, xlabel: str, ylabel: str):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "tunnel-lab", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        order = np.argsort(xs, kind="stable")
        for label, ys in series.items():
            ax.plot(np.asarray(xs)[order], np.asarray(ys)[order], marker="o", label=label)
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
        plt.close(fig)


def _run_tunnel(cfg: RunConfig, jobs: int) -> tuple[list[dict], dict]:
    rows = _map(_tunnel_point, _tunnel_tasks(cfg), jobs)
    return rows, _tunnel_extras(cfg, rows)


def _run_enhanced(cfg: RunConfig, jobs: int) -> tuple[list[dict], dict]:
    lam, eps = cfg.barrier["lam"], cfg.barrier["eps"]
    rows = _map(_enhanced_point, [(lam, eps, cfg.seed)], jobs)
    for r in rows:
        r["mode"] = cfg.mode.value
    return rows, {}


def _run_resonance(cfg: RunConfig, jobs: int) -> tuple[list[dict], dict]:
    from .enhanced_2d import reference_barrier, resonance_search

    param = cfg.resonance["param"]
    lo, hi = cfg.resonance["range"]
    grid = np.linspace(lo, hi, cfg.resonance["count"])
    base = dict(cfg.barrier)
    tasks = []
    for v in grid:
        p = dict(base, **{param: float(v)})
        tasks.append((p["lam"], p["eps"], cfg.seed))
    rows = _map(_enhanced_point, tasks, jobs)
    for r in rows:
        r["mode"] = cfg.mode.value
    extras: dict[str, Any] = {"param": param}
    failed = [r for r in rows if "error" in r]
    if failed:
        return rows, extras
    b = reference_barrier(**base)
    res = resonance_search(b, param, (lo, hi), atol=cfg.tolerances.resonance_atol, seed=cfg.seed)
    extras["resonance"] = {
        "value": res.value,
        "A1": res.A1,
        "A0": res.result.A0,
        "W": res.result.W,
        "valid": res.result.valid,
        "outside_validity": res.outside_validity,
        "evaluations": res.evaluations,
    }
    return rows, extras


def _plot_resonance(cfg: RunConfig, rows: list[dict], path: Path):
    ok = [r for r in rows if "error" not in r]
    if ok:
        key = cfg.resonance["param"]
        _svg(path, [r[key] for r in ok], {"A1": [r["A1"] for r in ok], "A0": [r["A0"] for r in ok]}, xlabel=key, ylabel="exponent")


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def _write_csv(path: Path, rows: list[dict], columns: tuple[str, ...]):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    path.write_text(buf.getvalue())


def _clean(obj):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def run(cfg: RunConfig, out_dir: str | os.PathLike, jobs: int = 1) -> int:
    """Execute ``cfg`` and write its artifacts; returns the exit status."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict[str, Any] = {"config": cfg.as_dict(), "status": "ok", "error": None}
    enhanced = cfg.mode in (Mode.ENHANCED2D, Mode.RESONANCE)
    try:
        if cfg.mode is Mode.ENHANCED2D:
            rows, extras = _run_enhanced(cfg, jobs)
        elif cfg.mode is Mode.RESONANCE:
            rows, extras = _run_resonance(cfg, jobs)
        else:
            rows, extras = _run_tunnel(cfg, jobs)
    except TunnelLabError as exc:
        rows, extras = [], {}
        summary["error"] = {"name": type(exc).__name__, "message": str(exc)}
    failed = [r["error"] for r in rows if "error" in r]
    if failed and summary["error"] is None:
        summary["error"] = failed[0]
    if summary["error"] is not None:
        summary["status"] = "numerical-failure"
        log.error("numerical failure: %s: %s", summary["error"]["name"], summary["error"]["message"])
    summary["rows"] = rows
    summary.update(extras)
    _write_csv(out / cfg.outputs.csv, rows, ENHANCED_COLUMNS if enhanced else TUNNEL_COLUMNS)
    (out / cfg.outputs.json).write_text(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n")
    if cfg.outputs.plot:
        if cfg.mode is Mode.RESONANCE:
            _plot_resonance(cfg, rows, out / cfg.outputs.plot)
        elif not enhanced:
            _plot_tunnel(cfg, rows, out / cfg.outputs.plot)
    return 2 if summary["error"] is not None else 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tunnel-lab", description="Tunneling exponents in nonstationary fields and 2D barriers.")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for sweep points (default 1)")
    p.add_argument("--out", default=".", help="output directory (overridden by TUNNEL_LAB_OUT)")
    p.add_argument("--verbose", action="store_true", help="log progress")
    return p


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = os.environ.get("TUNNEL_LAB_OUT") or args.out
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        with open(args.config) as fh:
            data = json.load(fh)
        cfg = load_config(data)
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"tunnel-lab: configuration error: {exc}", file=sys.stderr)
        return 1
    log.info("mode %s, writing to %s", cfg.mode.value, out)
    return run(cfg, out, args.jobs)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

    decolab run CONFIG [--out DIR] [--workers N] [--tol X]
    decolab fig1 [options]
    decolab fig2 [options]

A run config is flat ``key = value`` text.  One section names the model
(``[ohmic]``, ``[driven]``, ``[mattress]``, ``[field]`` or ``[plate]``);
optional ``[sweep]``, ``[settings]`` and ``[output]`` sections add sweep
axes, quadrature tolerances and the output directory::

    [ohmic]
    gamma = 1e-3
    T = 1e5

    [sweep]
    t = 0, 1, 101          # start, stop, count (append ", log" for geometric)

Every run writes one CSV per quantity and a ``manifest.txt`` of
``key: value`` lines.  Exit status: 0 clean, 1 outputs written with
validation warnings, 2 error.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Optional, Sequence

import numpy as np

from . import __version__
from .core import CouplingProfile, DomainError, DriveProfile, make_oscillator_spec
from .numerics import QuadratureSettings

EXIT_OK, EXIT_WARN, EXIT_ERROR = 0, 1, 2
MANIFEST_NAME = "manifest.txt"
ENV_OUT = "DECOLAB_OUT"
DEFAULT_OUT = "decolab_out"
MAX_SWEEP_AXES = 2


class ConfigError(Exception):
    pass


# ------------------------------------------------------------------ models


@dataclass(frozen=True)
class Param:
    default: object
    unit: str = "1"
    choices: Optional[tuple] = None


@dataclass(frozen=True)
class Model:
    name: str
    params: dict
    outputs: tuple           # (column, unit) pairs computed per point
    filename: str
    evaluate: Callable       # (params, settings) -> tuple of output values
    uses_settings: bool = False


def _quad(settings: Optional[dict]) -> Optional[QuadratureSettings]:
    if not settings:
        return None
    return QuadratureSettings(**settings)


def _eval_ohmic(p: dict, settings: Optional[dict]):
    from .ohmic import decoherence_exponent_ohmic
    spec = make_oscillator_spec(p["M"], p["Omega"], p["gamma"], p["Gamma"], p["T"], p["a"],
                                strict_regime=bool(p["strict"]))
    return (decoherence_exponent_ohmic(spec, p["t"], _quad(settings)),)


def _eval_driven(p: dict, settings: Optional[dict]):
    from .driven import decoherence_exponent_driven, kernels
    spec = make_oscillator_spec(p["M"], p["Omega"], p["gamma"], p["Gamma"], p["T"], p["a"],
                                strict_regime=bool(p["strict"]))
    if p["drive"] == "delta":
        drive = DriveProfile.delta(p["strength"])
    else:
        drive = DriveProfile.sine(p["amplitude"], p["Lambda"])
    t = p["t"]
    if t == 0:
        return (0.0,)
    ks = kernels(spec, t, int(p["n_samples"]), settings=_quad(settings))
    return (decoherence_exponent_driven(spec, drive, t, ks),)


def _eval_mattress(p: dict, settings: Optional[dict]):
    from .mattress import (ParabolicOverlap, gaussian_packet_rengiw, make_mattress_spec,
                           rengiw_at_points)
    if p["profile"] == "gaussian":
        prof = CouplingProfile.gaussian(p["a_g"])
    else:
        prof = ParabolicOverlap(p["u2"])
    spec = make_mattress_spec(p["M"], p["mu"], p["T"], prof)
    R0 = gaussian_packet_rengiw(p["sigma"], p["x0"], p["p0"])
    vals, flags = rengiw_at_points(spec, R0, p["t"], p["k"], p["delta"])
    v = complex(np.ravel(vals)[0])
    flag = bool(np.ravel(flags)[0])
    if flag:
        warnings.warn(f"node (k={p['k']:g}, Delta={p['delta']:g}) lies outside the "
                      "high-temperature premise (U'' > 2 M T U)", RuntimeWarning)
    return (v.real, v.imag, int(flag))


def _eval_field(p: dict, settings: Optional[dict]):
    from .field import (decoherence_DL_highT, decoherence_DL_numeric, decoherence_DL_zeroT,
                        make_field_spec)
    fspec = make_field_spec(int(p["n"]), p["g"], T=p["T"], Gamma=p["Gamma"])
    t, L = p["t"], p["L"]
    if p["method"] == "numeric":
        D = decoherence_DL_numeric(fspec, t, L, thermal=p["thermal"], settings=_quad(settings))
        return (D,)
    if fspec.T == 0:
        return (decoherence_DL_zeroT(fspec, t, L),)
    if p["thermal"] != "classical":
        raise DomainError("closed forms at T > 0 need thermal = classical (high-T limit)")
    return (decoherence_DL_highT(fspec, t, L),)


def _eval_plate(p: dict, settings: Optional[dict]):
    from .field import plate_power
    b = p["b"] if p["b"] > 0 else None
    return (plate_power(p["Q"], p["rho"], p["v"], p["z"], b),)


_OSC = {
    "M": Param(1.0, "E0^-1"), "Omega": Param(1.0, "E0"), "gamma": Param(1e-3, "E0"),
    "Gamma": Param(1e3, "E0"), "T": Param(1e5, "E0"), "a": Param(1.0, "E0^-1/2"),
    "strict": Param(1),
}

MODELS = {
    "ohmic": Model(
        "ohmic", {**_OSC, "t": Param(0.01, "E0^-1")},
        (("D", "1"),), "ohmic_D.csv", _eval_ohmic, uses_settings=True),
    "driven": Model(
        "driven",
        {**_OSC, "T": Param(0.0, "E0"), "t": Param(1.0, "E0^-1"),
         "drive": Param("sine", choices=("delta", "sine")),
         "strength": Param(2.0), "amplitude": Param(1.0, "E0"), "Lambda": Param(1.0, "E0"),
         "n_samples": Param(256)},
        (("D", "1"),), "driven_D.csv", _eval_driven, uses_settings=True),
    "mattress": Model(
        "mattress",
        {"M": Param(1.0, "E0^-1"), "mu": Param(0.1), "T": Param(10.0, "E0"),
         "profile": Param("gaussian", choices=("gaussian", "parabolic")),
         "a_g": Param(1.0, "x^-2"), "u2": Param(1.0, "x^-2"),
         "sigma": Param(1.0, "x"), "x0": Param(0.0, "x"), "p0": Param(0.0, "x^-1"),
         "t": Param(1.0, "E0^-1"), "k": Param(0.0, "x^-1"), "delta": Param(0.0, "x")},
        (("Re_R", "1"), ("Im_R", "1"), ("flag", "1")), "mattress_R.csv", _eval_mattress),
    "field": Model(
        "field",
        {"n": Param(3, choices=(1, 3)), "g": Param(1.0), "T": Param(100.0, "E0"),
         "Gamma": Param(1.0, "E0"), "t": Param(1.0, "E0^-1"), "L": Param(1.0, "E0^-1"),
         "method": Param("closed", choices=("closed", "numeric")),
         "thermal": Param("classical", choices=("exact", "classical"))},
        (("D", "1"),), "field_D.csv", _eval_field, uses_settings=True),
    "plate": Model(
        "plate",
        {"Q": Param(1.0, "charge"), "rho": Param(1.0, "resistivity"), "v": Param(0.1, "velocity"),
         "z": Param(1.0, "length"), "b": Param(0.0, "length")},
        (("P", "power"),), "plate_P.csv", _eval_plate),
}

SETTINGS_KEYS = ("abs_tol", "rel_tol", "panel_budget")


# ------------------------------------------------------------------ config


@dataclass(frozen=True)
class SweepAxis:
    name: str
    start: float
    stop: float
    count: int
    log: bool = False

    def values(self) -> np.ndarray:
        if self.count == 1:
            return np.array([self.start])
        if self.log:
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)

    def describe(self) -> str:
        return f"{self.start!r}, {self.stop!r}, {self.count}, {'log' if self.log else 'linear'}"


@dataclass
class RunConfig:
    model: Model
    params: dict
    sweeps: list = field(default_factory=list)
    settings: dict = field(default_factory=dict)
    out_dir: Optional[str] = None
    source: dict = field(default_factory=dict)    # raw key -> text, for the manifest echo


def _coerce(model: Model, key: str, text: str, lineno: int):
    spec = model.params[key]
    d = spec.default
    try:
        if isinstance(d, str):
            val = text
        elif isinstance(d, int) and not isinstance(d, bool):
            f = float(text)
            if f != int(f):
                raise ValueError
            val = int(f)
        else:
            val = float(text)
    except ValueError:
        raise ConfigError(f"line {lineno}: bad value {text!r} for key {key}") from None
    if spec.choices is not None and val not in spec.choices:
        raise ConfigError(f"line {lineno}: key {key} must be one of {list(spec.choices)}, got {text!r}")
    return val


def parse_config(text: str) -> RunConfig:
    """Parse run-config text; errors name the offending line and key."""
    section = None
    model: Optional[Model] = None
    raw = {"model": [], "sweep": [], "settings": [], "output": []}
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("[") and s.endswith("]"):
            name = s[1:-1].strip().lower()
            if name in MODELS:
                if model is not None:
                    raise ConfigError(f"line {lineno}: second model section [{name}]; "
                                      f"exactly one model per config")
                model = MODELS[name]
                section = "model"
            elif name in ("sweep", "settings", "output"):
                section = name
            else:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            continue
        if "=" not in s:
            raise ConfigError(f"line {lineno}: expected key = value, got {s!r}")
        key, val = (x.strip() for x in s.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key")
        if section is None:
            raise ConfigError(f"line {lineno}: key {key} appears before any section header")
        raw[section].append((lineno, key, val))
    if model is None:
        raise ConfigError("no model section; expected one of " + ", ".join(f"[{m}]" for m in MODELS))

    cfg = RunConfig(model, {k: v.default for k, v in model.params.items()})
    seen = set()
    for lineno, key, val in raw["model"]:
        if key not in model.params:
            raise ConfigError(f"line {lineno}: unknown parameter {key} for model {model.name}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        seen.add(key)
        cfg.params[key] = _coerce(model, key, val, lineno)
        cfg.source[key] = val
    for lineno, key, val in raw["sweep"]:
        if key not in model.params:
            raise ConfigError(f"line {lineno}: unknown parameter {key} for model {model.name}")
        if isinstance(model.params[key].default, str):
            raise ConfigError(f"line {lineno}: key {key} is not numeric and cannot be swept")
        if any(ax.name == key for ax in cfg.sweeps):
            raise ConfigError(f"line {lineno}: duplicate sweep axis {key}")
        parts = [x.strip() for x in val.split(",")]
        log = False
        if len(parts) == 4 and parts[3].lower() in ("log", "linear"):
            log = parts[3].lower() == "log"
            parts = parts[:3]
        if len(parts) != 3:
            raise ConfigError(f"line {lineno}: sweep {key} needs 'start, stop, count[, log]'")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"line {lineno}: bad sweep specification for key {key}") from None
        if count < 1:
            raise ConfigError(f"line {lineno}: sweep {key} count must be >= 1")
        if log and not (start > 0 and stop > 0):
            raise ConfigError(f"line {lineno}: log sweep {key} needs positive bounds")
        cfg.sweeps.append(SweepAxis(key, start, stop, count, log))
    if len(cfg.sweeps) > MAX_SWEEP_AXES:
        raise ConfigError(f"at most {MAX_SWEEP_AXES} sweep axes, got {len(cfg.sweeps)}")
    for lineno, key, val in raw["settings"]:
        if key not in SETTINGS_KEYS:
            raise ConfigError(f"line {lineno}: unknown setting {key}")
        try:
            cfg.settings[key] = int(float(val)) if key == "panel_budget" else float(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {val!r} for key {key}") from None
    for lineno, key, val in raw["output"]:
        if key != "dir":
            raise ConfigError(f"line {lineno}: unknown output key {key}")
        cfg.out_dir = val
    if cfg.settings and not model.uses_settings:
        raise ConfigError(f"model {model.name} takes no quadrature settings")
    return cfg


# ------------------------------------------------------------------ output


def format_value(v) -> str:
    """17 significant digits, scientific notation; integers verbatim."""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.16e" % float(v)


def _atomic_write(path: str, data: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_bytes(header: Sequence[str], rows: Sequence[Sequence]) -> bytes:
    lines = [",".join(header)]
    lines.extend(",".join(format_value(v) for v in row) for row in rows)
    return ("\n".join(lines) + "\n").encode("ascii")


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Write a CSV atomically and return its sha256."""
    data = csv_bytes(header, rows)
    _atomic_write(path, data)
    return hashlib.sha256(data).hexdigest()


class Manifest:
    """Ordered key: value record written after all outputs."""

    def __init__(self, command: str):
        self.entries: list[tuple[str, str]] = []
        self.warnings: list[str] = []
        self.add("tool", "decolab")
        self.add("version", __version__)
        self.add("command", command)
        self.add("started", _now())

    def add(self, key: str, value) -> None:
        text = str(value).replace("\n", " ")
        self.entries.append((key, text))

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def output(self, name: str, sha: str, rows: int) -> None:
        self.add(f"output.{name}.sha256", sha)
        self.add(f"output.{name}.rows", rows)

    def write(self, out_dir: str) -> str:
        entries = list(self.entries)
        entries.append(("finished", _now()))
        entries.append(("warnings", len(self.warnings)))
        for i, w in enumerate(self.warnings, start=1):
            entries.append((f"warning.{i}", w.replace("\n", " ")))
        entries.append(("status", "warnings" if self.warnings else "ok"))
        text = "".join(f"{k}: {v}\n" for k, v in entries)
        path = os.path.join(out_dir, MANIFEST_NAME)
        _atomic_write(path, text.encode("utf-8"))
        return path

    @property
    def exit_code(self) -> int:
        return EXIT_WARN if self.warnings else EXIT_OK


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def resolve_out_dir(cli_out: Optional[str], cfg_out: Optional[str] = None) -> str:
    out = cli_out or cfg_out or os.environ.get(ENV_OUT) or DEFAULT_OUT
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out!r} is not writable")
    return out


# ------------------------------------------------------------------ execution


class PointError(Exception):
    pass


def _point_task(args):
    model_name, params, settings, where = args
    model = MODELS[model_name]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            values = model.evaluate(params, settings)
        except Exception as exc:
            at = f" at {where}" if where else ""
            raise PointError(f"model {model_name}{at}: {type(exc).__name__}: {exc}") from None
    return tuple(values), [f"{w.category.__name__}: {w.message}" for w in caught]


def map_ordered(fn: Callable, tasks: Sequence, workers: int) -> list:
    """fn over tasks, results in task order regardless of completion order."""
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def execute(cfg: RunConfig, out_dir: str, workers: int = 1, manifest: Optional[Manifest] = None,
            config_path: str = "") -> int:
    model = cfg.model
    man = manifest or Manifest("run")
    man.add("config_path", config_path)
    man.add("model", model.name)
    for k in sorted(cfg.params):
        man.add(f"config.{model.name}.{k}", cfg.params[k])
    for ax in cfg.sweeps:
        man.add(f"sweep.{ax.name}", ax.describe())
    for k in sorted(cfg.settings):
        man.add(f"settings.{k}", cfg.settings[k])
    man.add("workers", workers)

    axes = [ax.values() for ax in cfg.sweeps]
    points = list(itertools.product(*axes)) if axes else [()]
    tasks = []
    for pt in points:
        p = dict(cfg.params)
        for ax, val in zip(cfg.sweeps, pt):
            cur = model.params[ax.name].default
            p[ax.name] = int(round(val)) if isinstance(cur, int) and not isinstance(cur, bool) else float(val)
        where = ", ".join(f"{ax.name}={v:.6g}" for ax, v in zip(cfg.sweeps, pt))
        tasks.append((model.name, p, cfg.settings or None, where))
    results = map_ordered(_point_task, tasks, workers)

    rows = []
    for pt, (values, caught) in zip(points, results):
        rows.append(tuple(float(v) for v in pt) + tuple(values))
        for msg in caught:
            where = ", ".join(f"{ax.name}={v:.6g}" for ax, v in zip(cfg.sweeps, pt))
            man.warn(f"{msg} [{where}]" if where else msg)
    header = [f"{ax.name} [{model.params[ax.name].unit}]" for ax in cfg.sweeps]
    header += [f"{c} [{u}]" for c, u in model.outputs]
    sha = write_csv(os.path.join(out_dir, model.filename), header, rows)
    man.output(model.filename, sha, len(rows))
    if model.name == "field":
        _field_validation(cfg, man)
    man.write(out_dir)
    return man.exit_code


def _field_validation(cfg: RunConfig, man: Manifest, rel_tol: float = 5e-3) -> None:
    """Closed form vs quadrature at each distinct swept (t, L) corner."""
    from .field import closed_form_report, make_field_spec
    p = cfg.params
    fspec = make_field_spec(int(p["n"]), p["g"], T=p["T"], Gamma=p["Gamma"])
    if fspec.T > 0 and p["thermal"] != "classical":
        man.add("validation.closed_form", "skipped (exact thermal factor at T > 0 has no closed form)")
        return
    case = "zeroT" if fspec.T == 0 else "highT"
    G = fspec.Gamma
    vals = {p["t"], p["L"]}
    for ax in cfg.sweeps:
        if ax.name in ("t", "L"):
            vals.update((ax.start, ax.stop))
    pts = sorted({max(1e-3, G * v) for v in vals} | {0.5, 2.0, 8.0})
    rep = closed_form_report(fspec, case, pts, rel_tol=rel_tol)
    _record_report(man, f"validation.{case}.n{fspec.n}", rep)


def _record_report(man: Manifest, prefix: str, rep: dict) -> None:
    for key in ("grid_points", "printed_max_rel_dev", "printed_ok", "corrected_max_rel_dev",
                "corrected_ok", "numeric_t_L_asymmetry_rel"):
        man.add(f"{prefix}.{key}", rep[key])
    if not rep["corrected_ok"]:
        man.warn(f"{prefix}: corrected closed form deviates from quadrature by "
                 f"{rep['corrected_max_rel_dev']:.3g} at (Gamma t, Gamma L) = {rep['corrected_worst_at_Gt_GL']}")


# ------------------------------------------------------------------ figures


def _fig1_point(args):
    from .field import decoherence_DL_highT, decoherence_DL_numeric, make_field_spec
    n, g, T, Gamma, method, t, L = args
    fspec = make_field_spec(n, g, T=T, Gamma=Gamma)
    if method == "numeric":
        return decoherence_DL_numeric(fspec, t, L, thermal="classical")
    return decoherence_DL_highT(fspec, t, L)


def fig1(out_dir: str, g: float = 1.0, T: float = 100.0, Gamma: float = 1.0, t_max: float = 10.0,
         L_max: float = 10.0, resolution: int = 101, method: str = "closed", workers: int = 1,
         validate: bool = True) -> int:
    """n = 3 high-temperature D_L(t) on a resolution x resolution grid.

    Axes are written in units of 1/Gamma.  The manifest carries the
    largest t <-> L asymmetry of the grid and the closed-form check.
    """
    if resolution < 2:
        raise DomainError("resolution must be >= 2")
    man = Manifest("fig1")
    for k, v in (("g", g), ("T", T), ("Gamma", Gamma), ("t_max", t_max), ("L_max", L_max),
                 ("resolution", resolution), ("method", method), ("n", 3)):
        man.add(f"config.fig1.{k}", v)
    ts = np.linspace(0.0, t_max, resolution)
    Ls = np.linspace(0.0, L_max, resolution)
    tasks = [(3, g, T, Gamma, method, float(a) / Gamma, float(b) / Gamma) for a in ts for b in Ls]
    vals = np.array(map_ordered(_fig1_point, tasks, workers)).reshape(resolution, resolution)
    rows = [(a, b, vals[i, j]) for i, a in enumerate(ts) for j, b in enumerate(Ls)]
    sha = write_csv(os.path.join(out_dir, "fig1_D.csv"),
                    ["t [1/Gamma]", "L [1/Gamma]", "D [1]"], rows)
    man.output("fig1_D.csv", sha, len(rows))

    if np.array_equal(ts, Ls):
        asym = float(np.max(np.abs(vals - vals.T)))
        where = np.unravel_index(int(np.argmax(np.abs(vals - vals.T))), vals.shape)
    else:
        swapped = np.array(map_ordered(_fig1_point, [(3, g, T, Gamma, method, b, a)
                                                     for (_, _, _, _, _, a, b) in tasks], workers))
        diff = np.abs(vals - swapped.reshape(resolution, resolution))
        asym = float(np.max(diff))
        where = np.unravel_index(int(np.argmax(diff)), diff.shape)
    peak = float(np.max(np.abs(vals)))
    man.add("symmetric_pair.max_abs_diff", format_value(asym))
    man.add("symmetric_pair.max_rel_diff", format_value(asym / peak if peak > 0 else 0.0))
    man.add("symmetric_pair.worst_at_Gt_GL", f"{ts[where[0]]:.6g}, {Ls[where[1]]:.6g}")
    man.add("grid.max_D", format_value(peak))
    n_neg = int(np.sum(vals < 0))
    man.add("grid.negative_D_count", n_neg)
    if n_neg:
        man.warn(f"{n_neg} grid points have D < 0")
    if validate:
        from .field import closed_form_report, make_field_spec
        rep = closed_form_report(make_field_spec(3, g, T=T, Gamma=Gamma), "highT",
                                 [0.05, 0.5, 1.0, 2.0, 5.0, min(t_max, L_max)])
        _record_report(man, "validation.highT.n3", rep)
    man.write(out_dir)
    return man.exit_code


FIG2_CASES = ((1, "highT"), (1, "zeroT"), (3, "highT"), (3, "zeroT"))


def fig2_L_grid(L_max: float = 50.0, n_lin: int = 500, n_small: int = 40) -> np.ndarray:
    """Uniform grid on [0, L_max] merged with a geometric one on [1e-3, 0.2]."""
    lin = np.arange(n_lin + 1) * L_max / n_lin
    small = np.geomspace(1e-3, 0.2, n_small)
    return np.unique(np.concatenate([lin, small]))


def _fig2_point(args):
    from .field import (decoherence_DL_highT, decoherence_DL_numeric, decoherence_DL_zeroT,
                        make_field_spec)
    n, case, g, T, Gamma, method, t, L = args
    if case == "zeroT":
        fspec = make_field_spec(n, g, T=0.0, Gamma=Gamma)
        if method == "numeric":
            return decoherence_DL_numeric(fspec, t, L)
        return decoherence_DL_zeroT(fspec, t, L)
    fspec = make_field_spec(n, g, T=T, Gamma=Gamma)
    if method == "numeric":
        return decoherence_DL_numeric(fspec, t, L, thermal="classical")
    return decoherence_DL_highT(fspec, t, L)


def loglog_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of ln y against ln x."""
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def fig2(out_dir: str, g: float = 1.0, T: float = 100.0, Gamma: float = 1.0, L_max: float = 50.0,
         n_L: int = 500, method: str = "closed", workers: int = 1) -> int:
    """D_L(m / Gamma), m = 1, 2, 3, against L for n in {1, 3} at high T and T = 0.

    Writes fig2_n{n}_{case}.csv with columns L, D_at_m1, D_at_m2, D_at_m3
    (L in units of 1/Gamma).  The manifest records the pointwise time
    ordering, the small-L log-log slope and, for n = 3 at high T, the
    saturation ratio D(20)/D(40).
    """
    man = Manifest("fig2")
    for k, v in (("g", g), ("T", T), ("Gamma", Gamma), ("L_max", L_max), ("n_L", n_L),
                 ("method", method)):
        man.add(f"config.fig2.{k}", v)
    Ls = fig2_L_grid(L_max, n_L)
    small = (Ls > 0) & (Ls <= 0.2)
    for n, case in FIG2_CASES:
        tasks = [(n, case, g, T, Gamma, method, m / Gamma, float(L) / Gamma)
                 for L in Ls for m in (1, 2, 3)]
        vals = np.array(map_ordered(_fig2_point, tasks, workers)).reshape(Ls.size, 3)
        name = f"fig2_n{n}_{case}.csv"
        sha = write_csv(os.path.join(out_dir, name),
                        ["L [1/Gamma]", "D_at_m1 [1]", "D_at_m2 [1]", "D_at_m3 [1]"],
                        [(L, *row) for L, row in zip(Ls, vals)])
        man.output(name, sha, Ls.size)
        key = f"check.n{n}_{case}"
        slack = 1e-12 * np.max(np.abs(vals))
        ordered = bool(np.all(vals[:, 2] >= vals[:, 1] - slack) and np.all(vals[:, 1] >= vals[:, 0] - slack))
        man.add(f"{key}.time_ordering", "pass" if ordered else "fail")
        if not ordered:
            man.warn(f"{key}: D_at_m3 >= D_at_m2 >= D_at_m1 violated")
        for m in (1, 2, 3):
            slope = loglog_slope(Ls[small], vals[small, m - 1])
            ok = abs(slope - 2.0) <= 0.1
            man.add(f"{key}.small_L_slope_m{m}", f"{slope:.6f}")
            if not ok:
                man.warn(f"{key}: small-L log-log slope {slope:.4f} at t = {m}/Gamma is outside 2.0 +- 0.1")
        if n == 3 and case == "highT" and L_max >= 40:
            i20 = int(np.argmin(np.abs(Ls - 20.0)))
            i40 = int(np.argmin(np.abs(Ls - 40.0)))
            for m in (1, 2, 3):
                ratio = vals[i20, m - 1] / vals[i40, m - 1]
                man.add(f"{key}.saturation_D20_over_D40_m{m}", f"{ratio:.6f}")
                if not 0.99 <= ratio <= 1.01:
                    man.warn(f"{key}: D(L=20)/D(L=40) = {ratio:.4f} at t = {m}/Gamma is outside [0.99, 1.01]")
    man.write(out_dir)
    return man.exit_code


# ------------------------------------------------------------------ entry point


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="decolab", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"decolab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="evaluate a model over a parameter sweep")
    r.add_argument("config", help="key = value parameter file")
    r.add_argument("--out", default=None, help=f"output directory (fallback ${ENV_OUT})")
    r.add_argument("--workers", type=_positive_int, default=1)
    r.add_argument("--tol", type=_positive_float, default=None,
                   help="relative quadrature tolerance (overrides [settings] rel_tol)")

    for name, hlp in (("fig1", "n=3 high-T D_L(t) grid"), ("fig2", "D_L at t = 1, 2, 3 / Gamma")):
        f = sub.add_parser(name, help=hlp)
        f.add_argument("--out", default=None)
        f.add_argument("--workers", type=_positive_int, default=1)
        f.add_argument("--g", type=_positive_float, default=1.0)
        f.add_argument("--T", type=_positive_float, default=100.0, help="high-T temperature")
        f.add_argument("--Gamma", type=_positive_float, default=1.0)
        f.add_argument("--method", choices=("closed", "numeric"), default="closed")
        if name == "fig1":
            f.add_argument("--t-max", type=_positive_float, default=10.0)
            f.add_argument("--L-max", type=_positive_float, default=10.0)
            f.add_argument("--resolution", type=_positive_int, default=101)
        else:
            f.add_argument("--L-max", type=_positive_float, default=50.0)
            f.add_argument("--n-L", type=_positive_int, default=500)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            try:
                with open(args.config, encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {args.config!r}: {exc.strerror}") from None
            cfg = parse_config(text)
            if args.tol is not None:
                if not cfg.model.uses_settings:
                    raise ConfigError(f"model {cfg.model.name} takes no quadrature settings")
                cfg.settings["rel_tol"] = args.tol
            if cfg.settings:
                QuadratureSettings(**cfg.settings)   # validate early
            out = resolve_out_dir(args.out, cfg.out_dir)
            return execute(cfg, out, args.workers, config_path=args.config)
        out = resolve_out_dir(args.out)
        if args.command == "fig1":
            return fig1(out, args.g, args.T, args.Gamma, args.t_max, args.L_max, args.resolution,
                        args.method, args.workers)
        return fig2(out, args.g, args.T, args.Gamma, args.L_max, args.n_L, args.method, args.workers)
    except (ConfigError, PointError, DomainError, ValueError, ArithmeticError, OSError) as exc:
        print(f"decolab: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # model failures such as non-converged quadrature
        print(f"decolab: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())

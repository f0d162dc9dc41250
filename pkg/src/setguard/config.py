"""JSON run configuration: parsing, validation, serialization and scenario building.

Schema (version 1)::

    {
      "version": 1,                        required
      "preset": "example5" | "example6" | "example7",   or
      "scenario": { inline definition },   exactly one of preset/scenario
      "variant": "...",                    preset-specific, see PRESET_VARIANTS
      "horizon": 10.0, "step": 0.001, "stride": 1, "seed": 0,
      "gamma": 1.0, "mu": 0.01, "a": 0.1, "K": 1.0,
      "alpha": 0.5, "C": 1.0, "jac_inv_cap": 1000.0,
      "plant_row": [a1, a2, a3], "gphi": [g1, g2, g3],   example6 robustness knobs
      "disturbance": true,                 false switches the disturbance off
      "cross_check": false,                also integrate eps for comparison
      "certify": false,                    run the matching certificate too
      "out": "dir",
      "emit": {"csv": true, "svg": true, "report": true}
    }

Inline scenarios describe the plant, transform, controller, disturbance and
x0 explicitly; see README for an example.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import simkit as sk
from . import transforms as tfm
from .controllers import (
    OpenLoop,
    OutputFeedbackGain,
    StateFeedbackGain,
    build_filtered_controller,
)
from .errors import ConfigError
from .plants import LinearPlant, SectorPlant, transfer_from_state_space

SCHEMA_VERSION = 1

PRESET_VARIANTS = {
    "example5": ("exp", "sin"),
    "example6": ("base", "margin", "fig5"),
    "example7": ("nonhurwitz", "hurwitz"),
}
# overrides each preset understands
PRESET_KNOBS = {
    "example5": {"K", "alpha"},
    "example6": {"gamma", "alpha", "C", "jac_inv_cap", "plant_row", "gphi"},
    "example7": {"K", "mu", "a", "alpha"},
}
EMIT_KEYS = ("csv", "svg", "report")


@dataclass(frozen=True)
class RunConfig:
    version: int = SCHEMA_VERSION
    preset: str | None = None
    scenario: dict | None = None
    variant: str | None = None
    horizon: float | None = None
    step: float | None = None
    stride: int | None = None
    seed: int | None = None
    gamma: float | None = None
    mu: float | None = None
    a: float | None = None
    K: float | None = None
    alpha: float | None = None
    C: float | None = None
    jac_inv_cap: float | None = None
    plant_row: tuple | None = None
    gphi: tuple | None = None
    disturbance: bool | None = None
    cross_check: bool | None = None
    certify: bool = False
    out: str | None = None
    emit: dict = field(default_factory=lambda: {k: True for k in EMIT_KEYS})

    def to_dict(self) -> dict:
        d = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, tuple):
                val = list(val)
            d[f.name] = val
        return d


def serialize(cfg: RunConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n"


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    pos = text.find(needle)
    if pos < 0:
        return None
    return text.count("\n", 0, pos) + 1


def _fail(text, msg, path):
    key = path.split(".")[-1].split("[")[0] if path else None
    raise ConfigError(msg, field=path, line=_line_of(text, key) if key else None)


def _number(text, obj, key, path, positive=False, nonneg=False, integer=False):
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        _fail(text, "must be a number", path)
    if integer and (not isinstance(val, int) and not float(val).is_integer()):
        _fail(text, "must be an integer", path)
    if not math.isfinite(val):
        _fail(text, "must be finite", path)
    if positive and not val > 0:
        _fail(text, "must be positive", path)
    if nonneg and val < 0:
        _fail(text, "must be non-negative", path)
    return int(val) if integer else float(val)


def _numlist(text, val, path, length=None):
    if not isinstance(val, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                            and math.isfinite(v) for v in val):
        _fail(text, "must be a list of finite numbers", path)
    if length is not None and len(val) != length:
        _fail(text, f"must have {length} entries", path)
    return tuple(float(v) for v in val)


def _matrix(text, val, path):
    if isinstance(val, list) and val and all(isinstance(r, list) for r in val):
        rows = [_numlist(text, r, f"{path}[{i}]") for i, r in enumerate(val)]
        if len({len(r) for r in rows}) != 1:
            _fail(text, "rows must have equal length", path)
        return [list(r) for r in rows]
    if isinstance(val, list):
        return [list(_numlist(text, val, path))]
    _fail(text, "must be a matrix (list of rows)", path)


_TOP_KEYS = {f.name for f in fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON run configuration; raises ConfigError."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc.msg} (column {exc.colno})", line=exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be a JSON object", line=1)
    unknown = sorted(set(raw) - _TOP_KEYS)
    if unknown:
        _fail(text, "unknown key", unknown[0])
    if "version" not in raw:
        raise ConfigError('missing required "version" field', field="version", line=1)
    if raw["version"] != SCHEMA_VERSION or isinstance(raw["version"], bool):
        _fail(text, f"unsupported schema version (expected {SCHEMA_VERSION})", "version")
    kw = {"version": SCHEMA_VERSION}
    if ("preset" in raw) == ("scenario" in raw):
        raise ConfigError('exactly one of "preset" or "scenario" is required', field="preset",
                          line=_line_of(text, "preset") or _line_of(text, "scenario"))
    if "preset" in raw:
        preset = raw["preset"]
        if preset not in PRESET_VARIANTS:
            _fail(text, f"unknown preset (choose from {', '.join(PRESET_VARIANTS)})", "preset")
        kw["preset"] = preset
        if "variant" in raw:
            if raw["variant"] not in PRESET_VARIANTS[preset]:
                _fail(text, f"variant must be one of {PRESET_VARIANTS[preset]}", "variant")
            kw["variant"] = raw["variant"]
        for knob in ("gamma", "mu", "a", "K", "C", "jac_inv_cap", "plant_row", "gphi"):
            if knob in raw and knob not in PRESET_KNOBS[preset]:
                _fail(text, f"not applicable to preset {preset}", knob)
    else:
        if not isinstance(raw["scenario"], dict):
            _fail(text, "must be an object", "scenario")
        kw["scenario"] = raw["scenario"]
        for knob in ("variant", "gamma", "mu", "a", "K", "plant_row", "gphi"):
            if knob in raw:
                _fail(text, "only valid together with a preset", knob)
    for key in ("horizon", "step", "gamma", "mu", "a", "K", "alpha", "jac_inv_cap"):
        if key in raw:
            kw[key] = _number(text, raw, key, key, positive=True)
    if "C" in raw:
        kw["C"] = _number(text, raw, "C", "C", nonneg=True)
    if "stride" in raw:
        kw["stride"] = _number(text, raw, "stride", "stride", positive=True, integer=True)
    if "seed" in raw:
        kw["seed"] = _number(text, raw, "seed", "seed", nonneg=True, integer=True)
    if "step" in kw and "horizon" in kw and kw["step"] > kw["horizon"]:
        _fail(text, "step must not exceed the horizon", "step")
    if "plant_row" in raw:
        kw["plant_row"] = _numlist(text, raw["plant_row"], "plant_row", 3)
    if "gphi" in raw:
        g = raw["gphi"]
        kw["gphi"] = _numlist(text, [g] * 3 if isinstance(g, (int, float)) and not isinstance(g, bool) else g,
                              "gphi", 3)
    for key in ("disturbance", "cross_check", "certify"):
        if key in raw:
            if not isinstance(raw[key], bool):
                _fail(text, "must be true or false", key)
            kw[key] = raw[key]
    if "out" in raw:
        if not isinstance(raw["out"], str) or not raw["out"]:
            _fail(text, "must be a non-empty string", "out")
        kw["out"] = raw["out"]
    if "emit" in raw:
        em = raw["emit"]
        if not isinstance(em, dict):
            _fail(text, "must be an object", "emit")
        bad = sorted(set(em) - set(EMIT_KEYS))
        if bad:
            _fail(text, "unknown key", f"emit.{bad[0]}")
        emit = {k: True for k in EMIT_KEYS}
        for k, v in em.items():
            if not isinstance(v, bool):
                _fail(text, "must be true or false", f"emit.{k}")
            emit[k] = v
        kw["emit"] = emit
    cfg = RunConfig(**kw)
    # build once so that scenario-level preconditions surface at load time
    build_scenario(cfg, text=text)
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)


# ---------------------------------------------------------------- scenario building

_PROFILE_ARGS = {
    "exp_decay": ("g0", "g_inf", "k"),
    "sinusoid": ("g0", "g_inf", "k"),
    "paired_independent": ("component", "g0", "g1", "g2", "g3", "g4", "g5", "k"),
    "margin_augmented": ("g6", "k0"),
    "piecewise_freeze": ("amplitude", "half_width", "freeze_time", "omega"),
    "scaled_pair": ("r_lower", "r_upper"),
    "tabulated": ("times", "lower", "upper"),
}


def _profile(text, d, path):
    if not isinstance(d, dict) or "kind" not in d:
        _fail(text, "profile must be an object with a kind", path)
    kind = d["kind"]
    if kind not in _PROFILE_ARGS:
        _fail(text, f"unknown profile kind {kind!r}", f"{path}.kind")
    allowed = set(_PROFILE_ARGS[kind]) | {"kind", "base"}
    bad = sorted(set(d) - allowed)
    if bad:
        _fail(text, "unknown key", f"{path}.{bad[0]}")
    params = {k: d[k] for k in _PROFILE_ARGS[kind] if k in d}
    base = _profile(text, d["base"], f"{path}.base") if "base" in d else None
    try:
        return tfm.BoundaryProfile(kind, params, base)
    except (ValueError, TypeError) as exc:
        _fail(text, str(exc), path)


def _check_keys(text, d, allowed, path):
    if not isinstance(d, dict):
        _fail(text, "must be an object", path)
    bad = sorted(set(d) - set(allowed))
    if bad:
        _fail(text, "unknown key", f"{path}.{bad[0]}")


def _inline(cfg: RunConfig, text: str):
    sc = cfg.scenario
    _check_keys(text, sc, {"name", "plant", "transform", "controller", "disturbance", "x0",
                           "horizon", "step"}, "scenario")
    for req in ("plant", "transform", "controller", "x0"):
        if req not in sc:
            _fail(text, "missing required key", f"scenario.{req}")
    pd = sc["plant"]
    _check_keys(text, pd, {"A", "B", "D", "L", "G", "nonlinearity", "C"}, "scenario.plant")
    for req in ("A", "B", "D", "L"):
        if req not in pd:
            _fail(text, "missing required key", f"scenario.plant.{req}")
    mats = {k: _matrix(text, pd[k], f"scenario.plant.{k}") for k in ("A", "L")}
    for k in ("B", "D"):
        m = _matrix(text, pd[k], f"scenario.plant.{k}")
        n = len(mats["A"])
        mats[k] = np.array(m).reshape(n, -1) if np.array(m).size % n == 0 else m
    try:
        plant = LinearPlant(mats["A"], mats["B"], mats["D"], mats["L"])
        if "G" in pd:
            plant = SectorPlant(plant, _matrix(text, pd["G"], "scenario.plant.G"),
                                pd.get("nonlinearity", "sine"), float(pd.get("C", 1.0)))
    except ValueError as exc:
        _fail(text, str(exc), "scenario.plant")
    td = sc["transform"]
    _check_keys(text, td, {"kind", "profiles", "r", "r_lower", "r_upper", "inverse_margin"},
                "scenario.transform")
    if not isinstance(td.get("profiles"), list):
        _fail(text, "must be a list of profiles", "scenario.transform.profiles")
    profiles = tuple(_profile(text, p, f"scenario.transform.profiles[{i}]")
                     for i, p in enumerate(td["profiles"]))
    try:
        tr = tfm.Transform(td.get("kind", "logistic_between"), profiles,
                           **{k: float(td[k]) for k in ("r", "r_lower", "r_upper", "inverse_margin") if k in td})
    except (ValueError, TypeError) as exc:
        _fail(text, str(exc), "scenario.transform")
    cd = sc["controller"]
    _check_keys(text, cd, {"type", "K", "T", "K1", "K2", "gamma", "T1", "T2", "mu", "a"},
                "scenario.controller")
    ctype = cd.get("type")
    try:
        if ctype == "state_feedback":
            ctrl = StateFeedbackGain(float(cd.get("K", 1.0)), np.array(cd.get("T", [0.0] * plant.n), float))
        elif ctype == "output_feedback":
            ctrl = OutputFeedbackGain(cd["K1"], cd["K2"], float(cd.get("gamma", 1.0)),
                                      cd.get("T1"), cd.get("T2"))
        elif ctype == "filtered":
            tf = transfer_from_state_space(plant)
            ctrl = build_filtered_controller(tf.Q, tf.R, float(cd.get("K", 1.0)),
                                             float(cd.get("mu", 0.01)), float(cd.get("a", 0.1)))
        elif ctype == "open_loop":
            ctrl = OpenLoop(plant.m)
        else:
            _fail(text, "type must be state_feedback, output_feedback, filtered or open_loop",
                  "scenario.controller.type")
    except (ValueError, KeyError, TypeError) as exc:
        _fail(text, str(exc), "scenario.controller")
    dd = sc.get("disturbance", {"kind": "zero"})
    _check_keys(text, dd, {f.name for f in fields(sk.DisturbanceSpec)}, "scenario.disturbance")
    try:
        dist = sk.DisturbanceSpec(**{k: (tuple(v) if isinstance(v, list) else v) for k, v in dd.items()})
    except (ValueError, TypeError) as exc:
        _fail(text, str(exc), "scenario.disturbance")
    x0 = _numlist(text, sc["x0"], "scenario.x0")
    kw = dict(name=str(sc.get("name", "inline")), plant=plant, transform=tr, controller=ctrl,
              disturbance=dist, x0=np.array(x0))
    for k, tk in (("horizon", "horizon"), ("step", "h")):
        if k in sc:
            kw[tk] = _number(text, sc, k, f"scenario.{k}", positive=True)
    return kw


def build_scenario(cfg: RunConfig, text: str = "", seed: int | None = None) -> sk.Scenario:
    """Turn a validated config into a Scenario (ConfigError on precondition failures)."""
    seed = cfg.seed if seed is None else seed
    common = {}
    if cfg.horizon is not None:
        common["horizon"] = cfg.horizon
    if cfg.step is not None:
        common["h"] = cfg.step
    if cfg.stride is not None:
        common["stride"] = cfg.stride
    if cfg.cross_check is not None:
        common["cross_check"] = cfg.cross_check
    if cfg.jac_inv_cap is not None:
        common["jac_inv_cap"] = cfg.jac_inv_cap
    try:
        if cfg.scenario is not None:
            kw = _inline(cfg, text)
            if seed is not None:
                kw["disturbance"] = sk.DisturbanceSpec(**{**asdict(kw["disturbance"]), "seed": seed})
            if cfg.disturbance is False:
                kw["disturbance"] = sk.DisturbanceSpec("zero")
            for key in ("alpha", "C"):
                if getattr(cfg, key) is not None:
                    kw[key] = getattr(cfg, key)
            kw.update(common)
            return sk.Scenario(**kw)
        args = dict(common)
        if seed is not None:
            args["seed"] = seed
        if cfg.disturbance is not None:
            args["disturbance"] = cfg.disturbance
        for key in ("alpha", "K", "gamma", "mu", "a", "C"):
            if getattr(cfg, key) is not None:
                args[key] = getattr(cfg, key)
        if cfg.preset == "example5":
            return sk.preset_example5(boundary=cfg.variant or "exp", **args)
        if cfg.preset == "example6":
            if cfg.plant_row is not None:
                args["a"] = cfg.plant_row
            if cfg.gphi is not None:
                args["gphi"] = cfg.gphi
            return sk.preset_example6(variant=cfg.variant or "base", **args)
        return sk.preset_example7(nonhurwitz=(cfg.variant or "nonhurwitz") == "nonhurwitz", **args)
    except ConfigError:
        raise
    except (ValueError, ArithmeticError) as exc:
        raise ConfigError(f"scenario rejected: {exc}", field=cfg.preset or "scenario",
                          line=_line_of(text, "preset") or _line_of(text, "scenario")) from None

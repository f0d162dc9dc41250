"""Output sets, barrier coordinate changes and their calculus.

A transform maps an unconstrained coordinate eps (one per output) onto the
open interval between a lower and an upper boundary that may move in time.
All maps are diagonal: output i depends only on eps[i].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import JacobianUnderflow, OutOfSet

PROFILE_KINDS = (
    "exp_decay",
    "sinusoid",
    "paired_independent",
    "margin_augmented",
    "piecewise_freeze",
    "scaled_pair",
    "tabulated",
)

TRANSFORM_KINDS = (
    "saturating_rational",
    "scaled_logistic",
    "logistic_between",
    "piecewise_exponential",
)

_REQUIRED = {
    "exp_decay": ("g0", "g_inf", "k"),
    "sinusoid": ("g0", "g_inf", "k"),
    "paired_independent": ("component", "g0", "g1", "g2", "g3", "g4", "g5", "k"),
    "margin_augmented": ("g6", "k0"),
    "piecewise_freeze": ("amplitude", "half_width", "freeze_time"),
    "scaled_pair": ("r_lower", "r_upper"),
    "tabulated": ("times", "lower", "upper"),
}
_NEEDS_BASE = ("margin_augmented", "scaled_pair")


@dataclass(frozen=True, eq=False)
class BoundaryProfile:
    """Time-varying boundary pair with analytic first derivatives.

    Scalar kinds (``exp_decay``, ``sinusoid``) describe a single function g(t);
    both slots of :func:`eval_boundary` then carry g.  ``scaled_pair`` turns a
    scalar base into the pair (r_lower*g, r_upper*g) and ``margin_augmented``
    widens a base pair by g6*exp(-k0*t) on each side.
    """

    kind: str
    params: dict = field(default_factory=dict)
    base: "BoundaryProfile | None" = None

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ValueError(f"unknown profile kind {self.kind!r}")
        missing = [k for k in _REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ValueError(f"{self.kind} profile is missing {missing}")
        if self.kind in _NEEDS_BASE and self.base is None:
            raise ValueError(f"{self.kind} profile needs a base profile")
        if self.kind == "tabulated":
            t = np.asarray(self.params["times"], dtype=float)
            lo = np.asarray(self.params["lower"], dtype=float)
            hi = np.asarray(self.params["upper"], dtype=float)
            if t.ndim != 1 or t.size < 2 or lo.shape != t.shape or hi.shape != t.shape:
                raise ValueError("tabulated profile needs equal-length 1-D arrays (>= 2 points)")
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated times must be strictly increasing")
            if np.any(lo >= hi):
                raise ValueError("tabulated lower must stay below upper")
            object.__setattr__(self, "_table", (t, lo, hi))
        else:
            for key, val in self.params.items():
                if key != "component" and not math.isfinite(float(val)):
                    raise ValueError(f"profile parameter {key} is not finite")

    def __eq__(self, other):
        if not isinstance(other, BoundaryProfile):
            return NotImplemented
        return (
            self.kind == other.kind
            and _params_equal(self.params, other.params)
            and self.base == other.base
        )

    @property
    def is_scalar(self) -> bool:
        return self.kind in ("exp_decay", "sinusoid")

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        for k, v in self.params.items():
            out[k] = [float(x) for x in v] if isinstance(v, (list, tuple, np.ndarray)) else v
        if self.base is not None:
            out["base"] = self.base.to_dict()
        return out


def _params_equal(a: dict, b: dict) -> bool:
    if a.keys() != b.keys():
        return False
    return all(np.array_equal(np.asarray(a[k]), np.asarray(b[k])) for k in a)


# ---------------------------------------------------------------- constructors

def exp_decay(g0: float, g_inf: float, k: float) -> BoundaryProfile:
    """g(t) = (g0 - g_inf) exp(-k t) + g_inf."""
    return BoundaryProfile("exp_decay", {"g0": g0, "g_inf": g_inf, "k": k})


def sinusoid(g0: float, g_inf: float, k: float) -> BoundaryProfile:
    """g(t) = g0 sin(k t) + g0 + g_inf."""
    return BoundaryProfile("sinusoid", {"g0": g0, "g_inf": g_inf, "k": k})


def scaled_pair(base: BoundaryProfile, r_lower: float, r_upper: float) -> BoundaryProfile:
    return BoundaryProfile("scaled_pair", {"r_lower": r_lower, "r_upper": r_upper}, base)


def paired_independent(component: int, g0, g1, g2, g3, g4, g5, k) -> BoundaryProfile:
    """Decaying band (component 1) or cosine band (component 2) with separate edges."""
    if component not in (1, 2):
        raise ValueError("component must be 1 or 2")
    return BoundaryProfile(
        "paired_independent",
        {"component": component, "g0": g0, "g1": g1, "g2": g2, "g3": g3,
         "g4": g4, "g5": g5, "k": k},
    )


def margin_augmented(base: BoundaryProfile, g6: float, k0: float) -> BoundaryProfile:
    return BoundaryProfile("margin_augmented", {"g6": g6, "k0": k0}, base)


def piecewise_freeze(amplitude: float, half_width: float, freeze_time: float,
                     omega: float = 1.0) -> BoundaryProfile:
    """Band amplitude*cos(omega t) +- half_width, held at its freeze-time value afterwards."""
    return BoundaryProfile(
        "piecewise_freeze",
        {"amplitude": amplitude, "half_width": half_width,
         "freeze_time": freeze_time, "omega": omega},
    )


def tabulated(times: Sequence[float], lower: Sequence[float], upper: Sequence[float]) -> BoundaryProfile:
    return BoundaryProfile("tabulated", {"times": list(times), "lower": list(lower),
                                         "upper": list(upper)})


# ---------------------------------------------------------------- evaluation

def eval_boundary(b: BoundaryProfile, t: float):
    """Return (g_lower, g_upper, dg_lower_dt, dg_upper_dt) at time t."""
    p = b.params
    kind = b.kind
    if kind == "exp_decay":
        e = math.exp(-p["k"] * t)
        g = (p["g0"] - p["g_inf"]) * e + p["g_inf"]
        dg = -p["k"] * (p["g0"] - p["g_inf"]) * e
        return g, g, dg, dg
    if kind == "sinusoid":
        k = p["k"]
        g = p["g0"] * math.sin(k * t) + p["g0"] + p["g_inf"]
        dg = p["g0"] * k * math.cos(k * t)
        return g, g, dg, dg
    if kind == "scaled_pair":
        g, _, dg, _ = eval_boundary(b.base, t)
        a = (p["r_lower"] * g, p["r_lower"] * dg)
        c = (p["r_upper"] * g, p["r_upper"] * dg)
        lo, hi = (a, c) if a[0] <= c[0] else (c, a)
        return lo[0], hi[0], lo[1], hi[1]
    if kind == "paired_independent":
        k = p["k"]
        if p["component"] == 1:
            e = math.exp(-k * t)
            hi = (p["g0"] - p["g1"]) * e + p["g1"]
            lo = (p["g0"] - p["g2"]) * e + p["g3"]
            return lo, hi, -k * (p["g0"] - p["g2"]) * e, -k * (p["g0"] - p["g1"]) * e
        c, s = math.cos(k * t), math.sin(k * t)
        hi = (p["g0"] - p["g2"]) * c + p["g4"]
        lo = c + p["g5"]
        return lo, hi, -k * s, -k * (p["g0"] - p["g2"]) * s
    if kind == "margin_augmented":
        lo, hi, dlo, dhi = eval_boundary(b.base, t)
        m = p["g6"] * math.exp(-p["k0"] * t)
        dm = -p["k0"] * m
        return lo - m, hi + m, dlo - dm, dhi + dm
    if kind == "piecewise_freeze":
        w = p.get("omega", 1.0)
        # the derivative is one-sided at the joint: the frozen branch starts at t = freeze_time
        if t < p["freeze_time"]:
            c = p["amplitude"] * math.cos(w * t)
            dc = -p["amplitude"] * w * math.sin(w * t)
        else:
            c = p["amplitude"] * math.cos(w * p["freeze_time"])
            dc = 0.0
        return c - p["half_width"], c + p["half_width"], dc, dc
    if kind == "tabulated":
        ts, lo, hi = b._table
        tc = min(max(t, ts[0]), ts[-1])
        j = int(np.clip(np.searchsorted(ts, tc, side="right") - 1, 0, ts.size - 2))
        dt = ts[j + 1] - ts[j]
        s = (tc - ts[j]) / dt
        dlo = (lo[j + 1] - lo[j]) / dt if ts[0] <= t <= ts[-1] else 0.0
        dhi = (hi[j + 1] - hi[j]) / dt if ts[0] <= t <= ts[-1] else 0.0
        return (lo[j] + s * (lo[j + 1] - lo[j]), hi[j] + s * (hi[j + 1] - hi[j]), dlo, dhi)
    raise ValueError(f"unknown profile kind {kind!r}")  # pragma: no cover


def check_profile(b: BoundaryProfile, horizon: float, points: int = 2001) -> None:
    """Raise ValueError unless the band is non-degenerate and finite on a grid.

    Pair profiles need lower < upper; a scalar g(t) must stay away from zero,
    since the band it scales collapses there.
    """
    for t in np.linspace(0.0, horizon, points):
        vals = eval_boundary(b, float(t))
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"profile is not finite at t={t}")
        if b.is_scalar:
            if vals[1] == 0.0:
                raise ValueError(f"scalar profile g vanishes at t={t}")
        elif not vals[0] < vals[1]:
            raise ValueError(f"profile lower >= upper at t={t}")


# ---------------------------------------------------------------- transforms

_FAMILY = {
    "saturating_rational": "rational",
    "scaled_logistic": "logistic",
    "logistic_between": "logistic",
    "piecewise_exponential": "pexp",
}


@dataclass(frozen=True)
class Transform:
    """Barrier coordinate change for v outputs.

    ``saturating_rational`` and ``scaled_logistic`` use scalar profiles g(t)
    with offsets ``r`` or (``r_lower``, ``r_upper``); the other two families
    take boundary pairs directly.  ``inverse_margin`` is the relative margin
    (fraction of the band width) that :func:`phi_inverse` keeps from the edges.

    Every family is written on the band (lo, hi): a scalar family with
    g(t) < 0 is the same map with eps mirrored, which is how the flipped
    inequalities of the negative branch are handled.
    """

    kind: str
    profiles: tuple
    r: float = 0.0
    r_lower: float = 0.0
    r_upper: float = 1.0
    inverse_margin: float = 1e-9

    def __post_init__(self):
        if self.kind not in TRANSFORM_KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        profiles = tuple(self.profiles)
        if not profiles:
            raise ValueError("a transform needs at least one output profile")
        object.__setattr__(self, "profiles", profiles)
        scalar = self.kind in ("saturating_rational", "scaled_logistic")
        for b in profiles:
            if not isinstance(b, BoundaryProfile):
                raise TypeError("profiles must be BoundaryProfile instances")
            if scalar and not b.is_scalar:
                raise ValueError(f"{self.kind} needs scalar g(t) profiles, got {b.kind}")
            if not scalar and b.is_scalar:
                raise ValueError(f"{self.kind} needs boundary-pair profiles, got {b.kind}")
        if self.kind == "scaled_logistic" and not self.r_lower < self.r_upper:
            raise ValueError("scaled_logistic needs r_lower < r_upper")
        if not 0.0 <= self.inverse_margin < 0.5:
            raise ValueError("inverse_margin must lie in [0, 0.5)")
        if self.kind == "saturating_rational":
            object.__setattr__(self, "_offsets", (self.r - 1.0, self.r + 1.0))
        elif self.kind == "scaled_logistic":
            object.__setattr__(self, "_offsets", (self.r_lower, self.r_upper))
        else:
            object.__setattr__(self, "_offsets", None)
        object.__setattr__(self, "_family", _FAMILY[self.kind])

    @property
    def v(self) -> int:
        return len(self.profiles)

    def edges(self, t: float) -> tuple:
        """Per output (lo, hi, dlo/dt, dhi/dt, orientation) as plain floats.

        Orientation is -1 only for scalar families with g(t) < 0.
        """
        out = []
        off = self._offsets
        for b in self.profiles:
            if off is None:
                lo, hi, dlo, dhi = eval_boundary(b, t)
                out.append((lo, hi, dlo, dhi, 1.0))
                continue
            _, g, _, dg = eval_boundary(b, t)
            a, c = off[0] * g, off[1] * g
            if a <= c:
                out.append((a, c, off[0] * dg, off[1] * dg, 1.0))
            else:
                out.append((c, a, off[1] * dg, off[0] * dg, -1.0))
        return tuple(out)

    def bounds(self, t: float):
        """(lower, upper, dlower/dt, dupper/dt) arrays of the prescribed set at t."""
        e = np.array(self.edges(t), dtype=float).reshape(-1, 5)
        return e[:, 0], e[:, 1], e[:, 2], e[:, 3]


def _eps_list(T: Transform, eps):
    e = np.asarray(eps, dtype=float).reshape(-1)
    if e.size != T.v:
        raise ValueError(f"expected {T.v} eps values, got {e.size}")
    return e.tolist()


def _forward1(fam, e, lo, hi):
    w = hi - lo
    if fam == "logistic":
        if e >= 0:
            q = math.exp(-e)
            y = hi - w * (q / (1.0 + q))
        else:
            q = math.exp(e)
            y = lo + w * (q / (1.0 + q))
    elif fam == "pexp":
        y = hi - 0.5 * w * math.exp(-e) if e >= 0 else lo + 0.5 * w * math.exp(e)
    else:
        y = 0.5 * (lo + hi) + 0.5 * w * (e / (abs(e) + 1.0))
    # rounding can land on an edge once the tail term drops below one ulp
    return min(max(y, math.nextafter(lo, math.inf)), math.nextafter(hi, -math.inf))


def _jac1(fam, e, lo, hi):
    w = hi - lo
    if fam == "logistic":
        q = math.exp(-abs(e))
        return w * q / ((1.0 + q) * (1.0 + q))
    if fam == "pexp":
        return 0.5 * w * math.exp(-abs(e))
    return 0.5 * w / ((abs(e) + 1.0) ** 2)


def _dt1(fam, e, dlo, dhi):
    if fam == "logistic":
        q = math.exp(-abs(e))
        s = 1.0 / (1.0 + q) if e >= 0 else q / (1.0 + q)
        return dlo * (1.0 - s) + dhi * s
    if fam == "pexp":
        return dhi + 0.5 * (dlo - dhi) * math.exp(-e) if e >= 0 else dlo + 0.5 * (dhi - dlo) * math.exp(e)
    return 0.5 * (dlo + dhi) + 0.5 * (dhi - dlo) * (e / (abs(e) + 1.0))


def _inverse1(fam, y, lo, hi):
    if fam == "logistic":
        return math.log((y - lo) / (hi - y))
    if fam == "pexp":
        # the two branches meet at the midpoint, where eps = 0
        half = 0.5 * (hi - lo)
        if y >= lo + half:
            return -math.log((hi - y) / half)
        return math.log((y - lo) / half)
    s = (2.0 * y - lo - hi) / (hi - lo)
    return s / (1.0 - abs(s))


def phi_forward(T: Transform, eps, t: float, edges=None) -> np.ndarray:
    """Map eps to the output value y, strictly inside the set."""
    ed = T.edges(t) if edges is None else edges
    fam = T._family
    return np.array([_forward1(fam, sg * e, lo, hi)
                     for e, (lo, hi, _, _, sg) in zip(_eps_list(T, eps), ed)])


def _inverse_list(T: Transform, ys, t, rel, ed) -> list:
    fam = T._family
    out = []
    for i, (yi, (lo, hi, _, _, sg)) in enumerate(zip(ys, ed)):
        d = rel * (hi - lo)
        if not (lo + d <= yi <= hi - d and lo < yi < hi):
            raise OutOfSet(f"output {i + 1} = {yi!r} is outside ({lo!r}, {hi!r}) at t={t}")
        out.append(sg * _inverse1(fam, yi, lo, hi))
    return out


def phi_inverse(T: Transform, y, t: float, margin: float | None = None, edges=None) -> np.ndarray:
    """Recover eps from y; raises OutOfSet if y is not inside the set with margin."""
    yv = np.asarray(y, dtype=float).reshape(-1)
    if yv.size != T.v:
        raise ValueError(f"expected {T.v} outputs, got {yv.size}")
    ed = T.edges(t) if edges is None else edges
    rel = T.inverse_margin if margin is None else margin
    return np.array(_inverse_list(T, yv.tolist(), t, rel, ed))


def phi_jacobian_diag(T: Transform, eps, t: float, edges=None) -> np.ndarray:
    """Diagonal of dPhi/deps as a vector.

    Positive everywhere except for the scalar families with g(t) < 0, where the
    map is decreasing and the set's edges swap roles.
    """
    ed = T.edges(t) if edges is None else edges
    fam = T._family
    return np.array([sg * _jac1(fam, sg * e, lo, hi)
                     for e, (lo, hi, _, _, sg) in zip(_eps_list(T, eps), ed)])


def phi_jacobian(T: Transform, eps, t: float) -> np.ndarray:
    """dPhi/deps as a diagonal v x v matrix."""
    return np.diag(phi_jacobian_diag(T, eps, t))


def phi_partial_t(T: Transform, eps, t: float, edges=None) -> np.ndarray:
    """dPhi/dt with eps held fixed."""
    ed = T.edges(t) if edges is None else edges
    fam = T._family
    return np.array([_dt1(fam, sg * e, dlo, dhi)
                     for e, (_, _, dlo, dhi, sg) in zip(_eps_list(T, eps), ed)])


def epsilon_rate(T: Transform, eps, ydot, t: float, floor: float = 1e-30, edges=None) -> np.ndarray:
    """eps' = (dPhi/deps)^-1 (y' - dPhi/dt)."""
    ed = T.edges(t) if edges is None else edges
    jac = phi_jacobian_diag(T, eps, t, ed)
    if np.any(~(np.abs(jac) >= floor)):
        raise JacobianUnderflow(f"transform derivative {np.abs(jac).min()!r} below floor {floor!r} at t={t}")
    return (np.asarray(ydot, dtype=float).reshape(-1) - phi_partial_t(T, eps, t, ed)) / jac


def tightened_bounds(T: Transform, N: float, t: float, edges=None):
    """Image of the eps box [-N, N] at time t as (lower, upper)."""
    if not N > 0:
        raise ValueError("N must be positive")
    ed = T.edges(t) if edges is None else edges
    a = phi_forward(T, np.full(T.v, -float(N)), t, ed)
    b = phi_forward(T, np.full(T.v, float(N)), t, ed)
    return np.minimum(a, b), np.maximum(a, b)

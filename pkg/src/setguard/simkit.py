"""Closed-loop simulation, disturbance generation, constraint monitoring and presets."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import certificates as cert
from .controllers import (
    FilteredController,
    OpenLoop,
    OutputFeedbackGain,
    StateFeedbackGain,
    build_filtered_controller,
    check_T_matrix,
    hurwitz_poly,
)
from .errors import JacobianUnderflow, NonFiniteState, OutOfSet, SingularLB
from .plants import LinearPlant, SectorPlant, transfer_from_state_space
from .transforms import (
    Transform,
    check_profile,
    epsilon_rate,
    margin_augmented,
    paired_independent,
    _inverse_list,
    phi_inverse,
    piecewise_freeze,
    exp_decay,
    sinusoid,
    tightened_bounds,
)

EPS_GUARD = 1e6
DISTURBANCE_KINDS = ("zero", "sine_noise_mix", "constant", "sinusoid", "tabulated")


# ---------------------------------------------------------------- disturbance

@dataclass(frozen=True)
class DisturbanceSpec:
    """Disturbance signal f(t), identical on every disturbance channel except for noise.

    ``sine_noise_mix``: offset + amplitude sin(omega t) + clamp(d(t) / sat_scale, -1, 1)
    where d is zero-order-hold Gaussian noise with variance noise_power/sample_time.
    ``sinusoid`` drops the offset and noise; ``constant`` is ``value``;
    ``tabulated`` interpolates (``times``, ``values``) linearly.
    """

    kind: str = "sine_noise_mix"
    offset: float = 0.1
    amplitude: float = 1.0
    omega: float = 3.0
    sat_scale: float = 0.3
    noise_power: float = 0.1
    sample_time: float = 0.1
    seed: int = 0
    value: float = 0.0
    times: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.sample_time <= 0 or self.noise_power < 0 or self.sat_scale <= 0:
            raise ValueError("need sample_time > 0, sat_scale > 0 and noise_power >= 0")
        if self.kind == "tabulated":
            if len(self.times) < 2 or len(self.times) != len(self.values):
                raise ValueError("tabulated disturbance needs matching times/values (>= 2)")
            if np.any(np.diff(self.times) <= 0):
                raise ValueError("tabulated disturbance times must increase")


class NoiseStream:
    """Deterministic zero-order-hold Gaussian samples, generated lazily in blocks."""

    BLOCK = 1024

    def __init__(self, spec: DisturbanceSpec, channels: int = 1):
        self.std = math.sqrt(spec.noise_power / spec.sample_time)
        self.rng = np.random.default_rng(spec.seed)
        self.channels = channels
        self.samples = np.zeros((0, channels))

    def sample(self, index: int) -> np.ndarray:
        while index >= self.samples.shape[0]:
            block = self.rng.standard_normal((self.BLOCK, self.channels)) * self.std
            self.samples = np.vstack([self.samples, block])
        return self.samples[index]


def hold_index(spec: DisturbanceSpec, t: float) -> int:
    return int(math.floor(t / spec.sample_time + 1e-9))


def disturbance_eval(spec: DisturbanceSpec, t: float, rng_stream: NoiseStream | None = None,
                     index: int | None = None, channels: int = 1) -> np.ndarray:
    """f(t) for every channel.  ``index`` pins the noise hold interval (defaults to t's)."""
    if spec.kind == "zero":
        return np.zeros(channels)
    if spec.kind == "constant":
        return np.full(channels, float(spec.value))
    if spec.kind == "sinusoid":
        return np.full(channels, spec.amplitude * math.sin(spec.omega * t))
    if spec.kind == "tabulated":
        return np.full(channels, float(np.interp(t, spec.times, spec.values)))
    base = spec.offset + spec.amplitude * math.sin(spec.omega * t)
    if spec.noise_power == 0.0:
        return np.full(channels, base)
    if rng_stream is None:
        raise ValueError("sine_noise_mix with noise needs a NoiseStream")
    d = rng_stream.sample(hold_index(spec, t) if index is None else index)
    return base + np.clip(d / spec.sat_scale, -1.0, 1.0)


# ---------------------------------------------------------------- scenario

@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate and certify one closed loop.

    ``design_plant`` is the nominal model a filtered controller was built from
    when it differs from the simulated plant (robustness runs).
    """

    name: str
    plant: object
    transform: Transform
    controller: object
    disturbance: DisturbanceSpec
    x0: np.ndarray
    horizon: float = 10.0
    h: float = 1e-3
    stride: int = 1
    alpha: float = 0.5
    C: float = 1.0
    jac_inv_cap: float = 1e3
    design_plant: LinearPlant | None = None
    cross_check: bool = False
    stiffness_limit: float = 1.5
    max_level: int = 24
    description: str = ""

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float).reshape(-1)
        object.__setattr__(self, "x0", x0)
        if x0.size != self.plant.n:
            raise ValueError(f"x0 has {x0.size} entries, plant order is {self.plant.n}")
        if self.transform.v != self.plant.v:
            raise ValueError("transform and plant output counts differ")
        if not (self.horizon > 0 and self.h > 0 and self.stride >= 1):
            raise ValueError("need horizon > 0, h > 0 and stride >= 1")
        for b in self.transform.profiles:
            check_profile(b, self.horizon)
        # y(0) must start strictly inside the set; fail fast otherwise
        phi_inverse(self.transform, self.plant.L @ x0, 0.0)

    @property
    def needs_eps(self) -> bool:
        return not isinstance(self.controller, OpenLoop)

    @property
    def nz(self) -> int:
        return self.controller.order if isinstance(self.controller, FilteredController) else 0


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    eps: np.ndarray
    u: np.ndarray
    f: np.ndarray
    g_lower: np.ndarray
    g_upper: np.ndarray
    z: np.ndarray
    events: list = field(default_factory=list)
    eps_integrated: np.ndarray | None = None
    aborted: bool = False
    substeps: int = 0

    def __len__(self):
        return self.t.size


@dataclass
class MarginReport:
    min_margin: np.ndarray
    violation_count: int
    first_violation_time: float | None
    max_abs_eps: float
    N: float
    tightened_lower: np.ndarray
    tightened_upper: np.ndarray
    tightened_inside: bool

    def to_dict(self) -> dict:
        return {
            "min_margin": [float(m) for m in self.min_margin],
            "violation_count": int(self.violation_count),
            "first_violation_time": self.first_violation_time,
            "max_abs_eps": float(self.max_abs_eps),
            "N": float(self.N),
            "tightened_inside": bool(self.tightened_inside),
        }


# ---------------------------------------------------------------- integration

def _rk4(f, x, t, h):
    k1 = f(x, t)
    k2 = f(x + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(x + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(x + h * k3, t + h)
    xn = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    # ||k3 - k2|| / ||(h/2)(k2 - k1)|| estimates the local Jacobian norm for free
    d1 = k2 - k1
    d2 = k3 - k2
    den = math.sqrt(d1 @ d1) * 0.5 * h
    rho = math.sqrt(d2 @ d2) / den if den > 1e-300 else 0.0
    return xn, rho


def rk4_step(f, state, t: float, h: float) -> np.ndarray:
    """One classical Runge-Kutta step of x' = f(x, t).

    Float input is integrated in float64.  Object arrays (e.g. of mpmath
    numbers) pass through untouched, which lets the same step be run in
    extended precision.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(state)
    if x.dtype != object:
        x = x.astype(float)
    with np.errstate(over="ignore", invalid="ignore"):
        xn, _ = _rk4(f, x, t, h)
    finite = (all(math.isfinite(float(v)) for v in xn) if xn.dtype == object
              else bool(np.all(np.isfinite(xn))))
    if not finite:
        raise NonFiniteState(f"non-finite state after step at t={t}")
    return xn


class _Loop:
    """Right-hand side of the combined state (x, controller state, integrated eps).

    Every law is affine in (x, z, eps), so the plant and controller are folded
    into s' = Acl s + Beps eps + Dtot f (+ G phi(x)) with s = (x, z).
    """

    def __init__(self, s: Scenario):
        self.s = s
        p = s.plant
        n, nz = p.n, s.nz
        self.n, self.nz, self.v, self.m = n, nz, p.v, p.m
        self.ns = n + nz
        self.A, self.B, self.D, self.L = p.A, p.B, p.D, p.L
        self.sector = p if isinstance(p, SectorPlant) and np.any(p.G != 0) else None
        self.T = s.transform
        self.rel = s.transform.inverse_margin
        c = s.controller
        self.law = type(c)
        # u = Ux s + Ue eps
        Ux = np.zeros((p.m, n + nz))
        Ue = np.zeros((p.m, p.v))
        if isinstance(c, StateFeedbackGain):
            LB = self.L @ self.B
            if abs(np.linalg.det(LB)) <= 1e-12:
                raise SingularLB("L B is singular")
            Ux[:, :n] = -np.linalg.solve(LB, self.L @ self.A)
            Ue = -c.K * np.linalg.inv(LB)
        elif isinstance(c, OutputFeedbackGain):
            Ux[:, :n] = c.K1 @ self.L
            Ue = c.gamma * c.K2
        elif isinstance(c, FilteredController):
            Ac, Bc, Cc, dc = c.realization
            Ux[:, n:] = Cc
            Ue = np.array([[dc]])
        self.Ux, self.Ue = Ux, Ue
        Acl = np.zeros((n + nz, n + nz))
        Acl[:n] = np.hstack([self.A, np.zeros((n, nz))]) + self.B @ Ux
        Beps = np.zeros((n + nz, p.v))
        Beps[:n] = self.B @ Ue
        if nz:
            Acl[n:, n:] = Ac
            Beps[n:] = Bc
        self.Acl, self.Beps = Acl, Beps
        self.Dtot = np.vstack([self.D, np.zeros((nz, p.l))])
        self.Dvec = self.Dtot[:, 0].copy() if p.l == 1 else None
        self.needs_eps = s.needs_eps
        self.dist = s.disturbance
        self.stream = NoiseStream(s.disturbance, p.l)
        self.cross = s.cross_check
        self.held = None
        self._edges = {}

    def edges(self, t):
        e = self._edges.get(t)
        if e is None:
            if len(self._edges) > 16:
                self._edges.clear()
            e = self._edges[t] = self.T.edges(t)
        return e

    def eps_of(self, x, t):
        return np.array(_inverse_list(self.T, (self.L @ x).tolist(), t, self.rel, self.edges(t)))

    def hold(self, t):
        """Freeze the noise sample for the base step starting at t."""
        self.held = None
        if self.dist.kind == "sine_noise_mix" and self.dist.noise_power > 0:
            d = self.stream.sample(hold_index(self.dist, t))
            self.held = np.clip(d / self.dist.sat_scale, -1.0, 1.0)

    def force(self, t):
        ds = self.dist
        if ds.kind == "sine_noise_mix":
            f = ds.offset + ds.amplitude * math.sin(ds.omega * t)
            return f if self.held is None else f + self.held
        return disturbance_eval(ds, t, self.stream, channels=self.s.plant.l)

    def control(self, st, eps):
        u = self.Ux @ st[:self.ns]
        return u if eps is None else u + self.Ue @ eps

    def __call__(self, state, t):
        ns = self.ns
        s_ = state[:ns] if state.size > ns else state
        out = self.Acl @ s_
        if self.needs_eps:
            eps = _inverse_list(self.T, (self.L @ state[:self.n]).tolist(), t, self.rel, self.edges(t))
            out += self.Beps @ eps
        f = self.force(t)
        if self.Dvec is not None:
            out += self.Dvec * (f if isinstance(f, float) else f[0])
        else:
            out += self.Dtot @ np.atleast_1d(f)
        if self.sector is not None:
            x = state[:self.n]
            out[:self.n] += self.sector.G @ self.sector.phi(x, t)
        if state.size == ns:
            return out
        if self.cross:
            xdot = out[:self.n]
            rate = epsilon_rate(self.T, state[ns:], self.L @ xdot, t, edges=self.edges(t))
        else:
            rate = np.zeros(state.size - ns)
        return np.concatenate([out, rate])


def run_scenario(s: Scenario):
    """Integrate the closed loop on the grid t_k = k h and monitor the set.

    Each base step is covered by RK4 substeps of size h / 2**level.  A substep
    is accepted when the state stays finite, the stage-based stiffness
    estimate keeps h_s * rho within ``stiffness_limit`` (RK4's real stability
    interval is about 2.78) and, for closed loops, the new output is still
    inside the set.  Otherwise the level is raised.  Each base step starts one
    level below where the previous one ended.
    """
    # overflow inside a rejected trial step is expected; the step logic handles it
    with np.errstate(over="ignore", invalid="ignore"):
        return _run(s)


def _run(s: Scenario):
    """Body of :func:`run_scenario`."""
    loop = _Loop(s)
    n, nz, v = loop.n, loop.nz, loop.v
    steps = int(round(s.horizon / s.h))
    cross = s.cross_check
    eps0 = loop.eps_of(s.x0, 0.0)
    state = np.concatenate([s.x0, np.zeros(nz), eps0 if cross else np.zeros(0)])
    rows = {k: [] for k in ("t", "x", "y", "eps", "u", "f", "lo", "hi", "z", "ei")}
    events = []
    flags = {"guard": False, "violation": False}
    aborted = False

    def record(t, st, k):
        x = st[:n]
        y = loop.L @ x
        ed = loop.edges(t)
        lo = np.array([e[0] for e in ed])
        hi = np.array([e[1] for e in ed])
        try:
            eps = loop.eps_of(x, t)
        except OutOfSet:
            eps = np.full(v, np.nan)
            if not flags["violation"]:
                flags["violation"] = True
                events.append((t, "ConstraintViolation", "output left the prescribed set"))
        if s.needs_eps and np.all(np.isfinite(eps)):
            u = loop.control(st, eps)
        elif s.needs_eps:
            u = np.full(loop.m, np.nan)
        else:
            u = loop.control(st, None)
        ei = st[n + nz:] if cross else np.zeros(0)
        mags = np.abs(np.concatenate([eps, ei]))
        mags = mags[np.isfinite(mags)]
        big = float(mags.max()) if mags.size else 0.0
        if big > EPS_GUARD and not flags["guard"]:
            flags["guard"] = True
            events.append((t, "EpsilonGuard", f"|eps| = {big:.6g} exceeds {EPS_GUARD:g}"))
        if k % s.stride == 0:
            rows["t"].append(t)
            rows["x"].append(x.copy())
            rows["y"].append(y)
            rows["eps"].append(eps)
            rows["u"].append(u)
            rows["f"].append(disturbance_eval(s.disturbance, t, loop.stream, channels=s.plant.l))
            rows["lo"].append(lo)
            rows["hi"].append(hi)
            rows["z"].append(st[n:n + nz].copy())
            rows["ei"].append(ei.copy() if cross else np.full(v, np.nan))

    record(0.0, state, 0)
    level = 0
    substeps = 0
    for k in range(steps):
        t0 = k * s.h
        t1 = (k + 1) * s.h
        loop.hold(t0)
        tt = t0
        level = max(level - 1, 0)
        while tt < t1 - 1e-12 * s.h:
            hs = min(s.h / 2 ** level, t1 - tt)
            try:
                xn, rho = _rk4(loop, state, tt, hs)
                ok = bool(np.all(np.isfinite(xn))) and hs * rho <= s.stiffness_limit
                if ok and s.needs_eps:
                    loop.eps_of(xn[:n], tt + hs)
            except OutOfSet:
                ok = False
            except JacobianUnderflow as exc:
                events.append((tt, "JacobianUnderflow", str(exc) + "; integrated-eps check disabled"))
                loop.cross = False
                cross = False
                state[n + nz:] = np.nan
                continue
            except FloatingPointError:
                ok = False
            if ok:
                state = xn
                tt += hs
                substeps += 1
            else:
                level += 1
                if level > s.max_level:
                    aborted = True
                    break
        if aborted:
            events.append((tt, "NonFiniteState",
                           f"no admissible step down to h/2^{s.max_level}; run aborted"))
            break
        record(t1, state, k + 1)

    arr = {k: np.array(v_) for k, v_ in rows.items()}
    traj = Trajectory(
        t=arr["t"], x=arr["x"].reshape(len(arr["t"]), n), y=arr["y"].reshape(len(arr["t"]), v),
        eps=arr["eps"].reshape(len(arr["t"]), v), u=arr["u"].reshape(len(arr["t"]), -1),
        f=arr["f"].reshape(len(arr["t"]), -1), g_lower=arr["lo"].reshape(len(arr["t"]), v),
        g_upper=arr["hi"].reshape(len(arr["t"]), v), z=arr["z"].reshape(len(arr["t"]), nz),
        events=events, eps_integrated=arr["ei"].reshape(len(arr["t"]), v) if s.cross_check else None,
        aborted=aborted, substeps=substeps,
    )
    return traj, monitor(traj, s.transform)


def monitor(traj: Trajectory, boundaries: Transform | None = None) -> MarginReport:
    """Margins to the boundaries at every sample plus the tightened inner set."""
    y, lo, hi = traj.y, traj.g_lower, traj.g_upper
    v = y.shape[1] if y.ndim == 2 else 0
    if len(traj) == 0:
        empty = np.zeros(v)
        return MarginReport(np.full(v, np.inf), 0, None, 0.0, 0.0, empty, empty, True)
    margin = np.minimum(y - lo, hi - y)
    bad = ~(margin > 0)
    rows_bad = np.any(bad, axis=1)
    count = int(rows_bad.sum())
    first = float(traj.t[np.argmax(rows_bad)]) if count else None
    eps = traj.eps
    max_eps = float(np.nanmax(np.abs(eps))) if np.any(np.isfinite(eps)) else math.inf
    N = max_eps
    tl = np.full_like(y, np.nan)
    tu = np.full_like(y, np.nan)
    inside = False
    if boundaries is not None and math.isfinite(N):
        Nn = max(N, 1e-12)
        for i, t in enumerate(traj.t):
            tl[i], tu[i] = tightened_bounds(boundaries, Nn, float(t))
        inside = bool(np.all(tl > lo) and np.all(tu < hi))
    return MarginReport(margin.min(axis=0), count, first, max_eps, N, tl, tu, inside)


# ---------------------------------------------------------------- output

def csv_header(traj: Trajectory) -> list[str]:
    n, v, m, l_ = traj.x.shape[1], traj.y.shape[1], traj.u.shape[1], traj.f.shape[1]
    cols = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"y{i + 1}" for i in range(v)]
    cols += [f"eps{i + 1}" for i in range(v)] + [f"u{i + 1}" for i in range(m)]
    cols += ["f"] if l_ == 1 else [f"f{i + 1}" for i in range(l_)]
    cols += [f"glo{i + 1}" for i in range(v)] + [f"ghi{i + 1}" for i in range(v)]
    return cols


def trajectory_csv(traj: Trajectory) -> str:
    """CSV text with 17 significant digits and events as trailing '#' lines."""
    buf = io.StringIO()
    buf.write(",".join(csv_header(traj)) + "\n")
    block = np.hstack([traj.t.reshape(-1, 1), traj.x, traj.y, traj.eps, traj.u, traj.f,
                       traj.g_lower, traj.g_upper])
    for row in block:
        buf.write(",".join(format(float(x), ".17g") for x in row) + "\n")
    for t, kind, msg in traj.events:
        buf.write(f"# event t={format(float(t), '.17g')} {kind}: {msg}\n")
    return buf.getvalue()


def write_csv(traj: Trajectory, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(trajectory_csv(traj))


# ---------------------------------------------------------------- certificates

def certify(s: Scenario, **kwargs) -> cert.CertificateReport:
    """Certificate matching the scenario's control law."""
    c = s.controller
    if isinstance(c, StateFeedbackGain):
        checks = [("A - B (LB)^-1 L A - T L is Hurwitz", check_T_matrix(s.plant, c.T))]
        return cert.lmi_report(s.alpha, c.K, checks=checks,
                               kind="state-feedback 2x2 LMI")
    if isinstance(c, FilteredController):
        flags = []
        if not s.plant.hurwitz:
            flags.append("plant matrix A is not Hurwitz (assumed by the filtered-law result)")
        checks = [("filter polynomial p (mu p + 1)^(rho-1) + a mu is Hurwitz", hurwitz_poly(c.delta))]
        return cert.lmi_report(s.alpha, c.K, extra_flags=flags, checks=checks,
                               kind="filtered-law 2x2 LMI")
    if isinstance(c, OutputFeedbackGain):
        plant = s.plant if isinstance(s.plant, SectorPlant) else SectorPlant(s.plant, np.zeros((s.plant.n, s.plant.n)), "zero", 0.0)
        return cert.verify_extended(plant, c, s.transform, s.alpha, s.C,
                                    jac_inv_cap=s.jac_inv_cap, horizon=s.horizon, **kwargs)
    return cert.CertificateReport(False, None, [], None, ["open loop: nothing to certify"],
                                  kind="open loop")


# ---------------------------------------------------------------- presets

EX5 = dict(A=[[0.0, 1.0], [1.0, 2.0]], B=[[0.0], [1.0]], D=[[1.0], [1.0]], L=[[1.0, 2.0]],
           x0=[2.0, 1.0])
EX6 = dict(
    B=[[1.0, 2.0], [1.0, 1.0], [1.0, 2.0]], D=[[1.0], [1.0], [1.0]],
    L=[[2.0, 1.0, 1.0], [1.0, 2.0, 1.0]],
    K1=[[0.0, 0.0], [-0.01, -0.01]], K2=[[1.5, -1.75], [-1.0, 1.0]],
    # analysis injections, n x v and v x v; sign chosen so A + B K1 L + T1 L is Hurwitz
    T1=[[-1.0, -1.0], [-2.0, -2.0], [-1.0, -1.0]], T2=[[-1.0, -2.0], [-1.0, -2.0]],
)
EX6_X0 = {"base": [5 / 3, 2 / 3, -1.0], "margin": [10 / 3, -5 / 3, -1.0], "fig5": [1.0, 1.0, 0.0]}
EX7_ROW = {False: [-1.0, -3.0, -3.0], True: [1.0, 3.0, 3.0]}


def preset_example5(boundary: str = "exp", disturbance: bool = True, seed: int = 0,
                    K: float = 1.0, T=(1.0, 1.0), alpha: float = 0.5, **overrides) -> Scenario:
    """Relative-degree-one plant under the state-feedback law, 0.8 g < y < g."""
    plant = LinearPlant(EX5["A"], EX5["B"], EX5["D"], EX5["L"])
    y0 = float((plant.L @ np.array(EX5["x0"]))[0])
    g0 = y0 + 0.01
    if boundary == "exp":
        g = exp_decay(g0, 0.1, 0.5)
    elif boundary == "sin":
        g = sinusoid(g0, 0.1, 0.5)
    else:
        raise ValueError("boundary must be 'exp' or 'sin'")
    tr = Transform("scaled_logistic", (g,), r_lower=0.8, r_upper=1.0)
    dist = DisturbanceSpec("sine_noise_mix", seed=seed) if disturbance else DisturbanceSpec("zero", seed=seed)
    name = f"example5_{boundary}" + ("" if disturbance else "_nodist")
    base = dict(name=name, plant=plant, transform=tr, controller=StateFeedbackGain(K, np.array(T, float)),
                disturbance=dist, x0=np.array(EX5["x0"]), horizon=10.0, alpha=alpha,
                description="state feedback, scaled logistic band 0.8 g(t) < y < g(t)")
    base.update(overrides)
    return Scenario(**base)


def example6_profiles(y0, augmented: bool):
    g0 = float(np.linalg.norm(y0)) + 0.01
    args = dict(g0=g0, g1=0.1, g2=2.0, g3=-0.2, g4=g0 - 0.1, g5=0.8, k=0.5)
    prof = [paired_independent(1, **args), paired_independent(2, **args)]
    if augmented:
        prof = [margin_augmented(b, 3.0, 2.0) for b in prof]
    return tuple(prof)


def preset_example6(variant: str = "base", gamma: float = 1.0, seed: int = 0,
                    a=(0.1, -2.0, -3.0), gphi=(0.1, 0.1, 0.1), augmented: bool | None = None,
                    alpha: float = 0.01, C: float = 1.0, disturbance: bool = True,
                    **overrides) -> Scenario:
    """Two-output sector plant under u = K1 y + gamma K2 eps.

    ``variant`` selects the initial state: ``base`` (5/3, 2/3, -1), ``margin``
    (10/3, -5/3, -1, with widened initial boundaries) or ``fig5`` (1, 1, 0).
    ``a`` and ``gphi`` are the last rows of A and G (robustness sweeps).
    """
    if variant not in EX6_X0:
        raise ValueError(f"unknown example6 variant {variant!r}")
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], list(a)], dtype=float)
    G = np.zeros((3, 3))
    G[2] = np.broadcast_to(np.asarray(gphi, dtype=float), (3,))
    plant = SectorPlant(LinearPlant(A, EX6["B"], EX6["D"], EX6["L"]), G, "sine", C)
    x0 = np.array(EX6_X0[variant])
    if augmented is None:
        augmented = variant == "margin"
    tr = Transform("logistic_between", example6_profiles(plant.L @ x0, augmented))
    gains = OutputFeedbackGain(EX6["K1"], EX6["K2"], gamma, EX6["T1"], EX6["T2"])
    dist = DisturbanceSpec("sine_noise_mix" if disturbance else "zero", seed=seed)
    gtag = "" if np.allclose(gphi, 0.1) else "_gphi" + "_".join(f"{g:g}" for g in np.atleast_1d(gphi))
    base = dict(name=f"example6_{variant}_gamma{gamma:g}{gtag}", plant=plant, transform=tr,
                controller=gains, disturbance=dist, x0=x0, horizon=10.0, alpha=alpha, C=C,
                description="sector-nonlinear plant, output feedback, logistic band per output")
    base.update(overrides)
    return Scenario(**base)


def preset_example7(nonhurwitz: bool = True, seed: int = 0, K: float = 3.0, mu: float = 0.01,
                    a: float = 0.1, alpha: float = 0.5, disturbance: bool = True,
                    **overrides) -> Scenario:
    """Relative-degree-three plant under the filtered law designed for Q = (p + 1)^3."""
    def plant_with(row):
        A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], row])
        return LinearPlant(A, [[0.0], [0.0], [1.0]], [[1.0], [1.0], [1.0]], [[1.0, 0.0, 0.0]])

    design = plant_with(EX7_ROW[False])
    tf = transfer_from_state_space(design)
    ctrl = build_filtered_controller(tf.Q, tf.R, K, mu, a)
    plant = plant_with(EX7_ROW[nonhurwitz])
    tr = Transform("logistic_between", (piecewise_freeze(2.0, 0.2, 2.0 * math.pi),))
    dist = DisturbanceSpec("sine_noise_mix" if disturbance else "zero", seed=seed)
    base = dict(name="example7_" + ("nonhurwitz" if nonhurwitz else "hurwitz"), plant=plant,
                transform=tr, controller=ctrl, disturbance=dist, x0=np.array([2.0, 1.0, 1.0]),
                horizon=12.0, alpha=alpha, design_plant=design,
                description="relative degree three, filtered law, band 2 cos t +- 0.2 then frozen")
    base.update(overrides)
    return Scenario(**base)


def open_loop_variant(s: Scenario) -> Scenario:
    """Same scenario with u = 0 (forced-violation reference)."""
    return replace(s, name=s.name + "_openloop", controller=OpenLoop(s.plant.m))


PRESETS = {
    "example5": (preset_example5, "state feedback, exponentially shrinking band (default)"),
    "example6": (preset_example6, "two-output output feedback; variants base, margin, fig5"),
    "example7": (preset_example7, "relative degree three filtered law (non-Hurwitz plant by default)"),
}

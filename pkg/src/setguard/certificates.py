"""Feasibility certificates for the three control laws.

* :func:`lmi_2x2` is the closed-form 2x2 test shared by the state-feedback
  and filtered laws.
* :func:`verify_extended` checks the extended-system matrix inequality of the
  output-feedback law at every vertex of the (capped) Jacobian-inverse box.

No semidefinite solver is used.  Candidate P matrices come from a Lyapunov
seed, a scale/beta search and, when that fails, a smoothed max-eigenvalue
descent; the final verdict is always a plain eigenvalue test.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from .controllers import OutputFeedbackGain, lbk2_hurwitz
from .errors import NonHurwitzNominal, NonPositiveP
from .plants import SectorPlant, is_hurwitz_matrix
from .transforms import Transform, phi_jacobian_diag

FEAS_TOL = 1e-9
DEFAULT_BETA_GRID = tuple(np.logspace(-2, 12, 57))


def sym_eig_max(M) -> float:
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-10 * max(1.0, np.max(np.abs(M)))):
        raise ValueError("matrix is not symmetric")
    return float(np.linalg.eigvalsh(0.5 * (M + M.T))[-1])


# ---------------------------------------------------------------- 2x2 LMI

@dataclass(frozen=True)
class LMIResult:
    feasible: bool
    beta_min: float | None
    alpha: float
    K: float


def lmi_2x2_matrix(alpha: float, K: float, beta: float) -> np.ndarray:
    return np.array([[alpha - K, 0.5], [0.5, -beta]])


def lmi_2x2(alpha: float, K: float) -> LMIResult:
    """[[alpha - K, 1/2], [1/2, -beta]] <= 0 is solvable iff K > alpha; beta_min = 1/(4 (K - alpha))."""
    if not (alpha > 0 and K > 0):
        raise ValueError("alpha and K must be positive")
    if K <= alpha:
        return LMIResult(False, None, alpha, K)
    return LMIResult(True, 0.25 / (K - alpha), alpha, K)


# ---------------------------------------------------------------- extended system

@dataclass(frozen=True)
class ExtendedSystem:
    """x_e' = A_e x_e + G_e phi + D_e f_e with x_e = (x, eps), f_e = (f, dPhi/dt, Phi)."""

    A_e: np.ndarray
    G_e: np.ndarray
    D_e: np.ndarray
    E: np.ndarray
    jac_inv: np.ndarray

    @property
    def size(self) -> int:
        return self.A_e.shape[0]


def build_extended_system(plant, gains: OutputFeedbackGain, jac_inv) -> ExtendedSystem:
    """Assemble the stacked (x, eps) blocks with (dPhi/deps)^-1 = diag(jac_inv).

    The gamma multiplier is folded into K2, so the blocks describe the law
    that is actually simulated.
    """
    base = plant.base if isinstance(plant, SectorPlant) else plant
    G = plant.G if isinstance(plant, SectorPlant) else np.zeros((base.n, 0))
    A, B, D, L = base.A, base.B, base.D, base.L
    n, v = base.n, base.v
    ji = np.asarray(jac_inv, dtype=float).reshape(-1)
    if ji.size != v:
        raise ValueError(f"jac_inv needs {v} entries")
    if np.any(~(ji > 0)):
        raise ValueError("jac_inv entries must be positive")
    K1 = gains.K1
    K2 = gains.gamma * gains.K2
    if K1.shape != (base.m, v):
        raise ValueError(f"gains must be {base.m} x {v}")
    T1 = gains.T1_for(n)
    T2 = gains.T2
    if T1.shape != (n, v):
        raise ValueError(f"T1 must be {n} x {v}")
    J = np.diag(ji)
    A_e = np.block([
        [A + B @ K1 @ L + T1 @ L, B @ K2],
        [J @ (L @ A + L @ B @ K1 @ L + T2 @ L), J @ L @ B @ K2],
    ])
    G_e = np.vstack([G, J @ L @ G])
    D_e = np.block([
        [D, np.zeros((n, v)), -T1],
        [J @ L @ D, -J, -J @ T2],
    ])
    E = np.hstack([np.eye(n), np.zeros((n, v))])
    return ExtendedSystem(A_e=A_e, G_e=G_e, D_e=D_e, E=E, jac_inv=ji)


def _check_P(P) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NonPositiveP("P must be square")
    if not np.allclose(P, P.T, rtol=1e-12, atol=1e-12 * max(1.0, np.max(np.abs(P)))):
        raise NonPositiveP("P must be symmetric")
    if not np.linalg.eigvalsh(0.5 * (P + P.T))[0] > 0:
        raise NonPositiveP("P is not positive definite")
    return 0.5 * (P + P.T)


def extended_block_matrix(sys: ExtendedSystem, P, alpha: float, beta: float, C: float) -> np.ndarray:
    """[[Psi11, P G_e, P D_e], [*, -I_k, 0], [*, *, -beta I]]."""
    P = _check_P(P)
    if P.shape[0] != sys.size:
        raise ValueError("P does not match the extended system")
    k = sys.G_e.shape[1]
    q = sys.D_e.shape[1]
    psi = sys.A_e.T @ P + P @ sys.A_e + alpha * P + C ** 2 * (sys.E.T @ sys.E)
    PG = P @ sys.G_e
    PD = P @ sys.D_e
    M = np.block([
        [psi, PG, PD],
        [PG.T, -np.eye(k), np.zeros((k, q))],
        [PD.T, np.zeros((q, k)), -beta * np.eye(q)],
    ])
    return 0.5 * (M + M.T)


def sprocedure_form(sys: ExtendedSystem, P, alpha: float, beta: float) -> np.ndarray:
    """Quadratic form whose sign encodes V' + alpha V - beta |f_e|^2 for z = (x_e, phi, f_e)."""
    P = np.asarray(P, dtype=float)
    k = sys.G_e.shape[1]
    q = sys.D_e.shape[1]
    core = sys.A_e.T @ P + P @ sys.A_e + alpha * P
    PG = P @ sys.G_e
    PD = P @ sys.D_e
    return np.block([
        [core, PG, PD],
        [PG.T, np.zeros((k, k)), np.zeros((k, q))],
        [PD.T, np.zeros((q, k)), -beta * np.eye(q)],
    ])


# ---------------------------------------------------------------- P search

@dataclass
class SearchResult:
    feasible: bool
    P: np.ndarray
    beta: float | None
    max_eig: float
    method: str


def _lyapunov_seed(sys: ExtendedSystem, alpha: float, C: float) -> np.ndarray:
    n = sys.size
    shifted = sys.A_e + 0.5 * alpha * np.eye(n)
    if not is_hurwitz_matrix(shifted, 0.0):
        raise NonHurwitzNominal("A_e + (alpha/2) I is not Hurwitz at the nominal vertex")
    Q0 = np.eye(n) + C ** 2 * (sys.E.T @ sys.E)
    P = scipy.linalg.solve_continuous_lyapunov(shifted.T, -Q0)
    return 0.5 * (P + P.T)


def _worst(P, systems, alpha, beta, C) -> float:
    return max(sym_eig_max(extended_block_matrix(s, P, alpha, beta, C)) for s in systems)


def _best_beta(P, systems, alpha, C, beta_grid):
    """Smallest grid beta certifying P, else (None, best max-eigenvalue)."""
    best = math.inf
    for beta in sorted(beta_grid):
        w = _worst(P, systems, alpha, beta, C)
        best = min(best, w)
        if w <= FEAS_TOL:
            return beta, w
    return None, best


class _Smoothed:
    """Log-sum-exp smoothing of the largest eigenvalue of the beta -> infinity block.

    With beta unbounded the full inequality reduces (Schur complement on the
    -beta I block) to [[Psi11, P G_e], [*, -I]] < 0, so the descent works on
    that smaller matrix and beta is fixed afterwards.
    """

    def __init__(self, systems, alpha, C):
        self.systems = systems
        self.alpha = alpha
        self.n = systems[0].size
        self.k = systems[0].G_e.shape[1]
        self.iu = np.triu_indices(self.n)
        self.CE = C ** 2 * (systems[0].E.T @ systems[0].E)

    def tomat(self, p):
        P = np.zeros((self.n, self.n))
        P[self.iu] = p
        return P + P.T - np.diag(np.diag(P))

    def reduced(self, P, s):
        psi = s.A_e.T @ P + P @ s.A_e + self.alpha * P + self.CE
        PG = P @ s.G_e
        return np.block([[psi, PG], [PG.T, -np.eye(self.k)]])

    def max_eig(self, P) -> float:
        return max(float(np.linalg.eigvalsh(self.reduced(P, s))[-1]) for s in self.systems)

    def __call__(self, p, mu):
        P = self.tomat(p)
        n = self.n
        spectra = [np.linalg.eigh(self.reduced(P, s)) for s in self.systems]
        top = max(w[-1] for w, _ in spectra)
        total = 0.0
        grad = np.zeros((n, n))
        for s, (w, V) in zip(self.systems, spectra):
            e = np.exp((w - top) / mu)
            total += e.sum()
            a = V[:n]
            b = V[n:]
            aw = a * e
            Aa = s.A_e @ a
            Gb = s.G_e @ b
            grad += Aa @ aw.T + aw @ Aa.T + self.alpha * (a @ aw.T) + aw @ Gb.T + (Gb * e) @ a.T
        grad /= total
        gv = 2.0 * grad - np.diag(np.diag(grad))
        return top + mu * math.log(total), gv[self.iu]


def _descend(P0, systems, alpha, C, mus=(1e-1, 1e-2, 1e-3), maxiter=3000):
    f = _Smoothed(systems, alpha, C)
    p = P0[f.iu].copy()
    for mu in mus:
        r = scipy.optimize.minimize(f, p, args=(mu,), jac=True, method="L-BFGS-B",
                                    options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-12})
        p = r.x
    P = f.tomat(p)
    return P, f.max_eig(P)


def search_P(nominal: ExtendedSystem, alpha: float, C: float, beta_grid=DEFAULT_BETA_GRID,
             vertices=None, ladder=None, refine: bool = True) -> SearchResult:
    """Find P (and beta) making the block matrix negative semidefinite.

    Stage 1 follows the Lyapunov heuristic: solve the alpha-shifted Lyapunov
    equation at ``nominal`` and search a scalar multiple of it together with
    beta.  Stage 2 (``refine``) runs a smoothed max-eigenvalue descent on P,
    optionally through a ``ladder`` of progressively larger vertex sets whose
    last entry should be ``vertices``.
    """
    systems = list(vertices) if vertices else [nominal]
    P0 = _lyapunov_seed(nominal, alpha, C)

    def scaled(logs):
        P = math.exp(logs) * P0
        return min(_worst(P, systems, alpha, b, C) for b in beta_grid)

    grid = np.linspace(math.log(1e-6), math.log(1e6), 49)
    vals = [scaled(s) for s in grid]
    i = int(np.argmin(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    # golden-section bisection of the bracketed scale
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    for _ in range(40):
        c1, c2 = b - g * (b - a), a + g * (b - a)
        if scaled(c1) <= scaled(c2):
            b = c2
        else:
            a = c1
    best_logs = min((grid[i], 0.5 * (a + b)), key=scaled)
    P = math.exp(best_logs) * P0
    beta, w = _best_beta(P, systems, alpha, C, beta_grid)
    if beta is not None:
        return SearchResult(True, P, beta, w, "lyapunov-scaled")
    if not refine:
        return SearchResult(False, P, None, w, "lyapunov-scaled")

    stages = list(ladder) if ladder else [systems]
    Pd = P
    for stage in stages:
        Pd, _ = _descend(Pd, list(stage), alpha, C)
    Pd = 0.5 * (Pd + Pd.T)
    if np.linalg.eigvalsh(Pd)[0] <= 0:
        return SearchResult(False, P, None, w, "descent (non-positive P)")
    beta, wd = _best_beta(Pd, systems, alpha, C, beta_grid)
    if beta is not None:
        return SearchResult(True, Pd, beta, wd, "descent")
    return (SearchResult(False, Pd, None, wd, "descent") if wd < w
            else SearchResult(False, P, None, w, "lyapunov-scaled"))


# ---------------------------------------------------------------- verification

@dataclass
class CertificateReport:
    feasible: bool
    beta: float | None
    max_eig_per_vertex: list
    P: np.ndarray | None
    hypothesis_flags: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    alpha: float | None = None
    C: float | None = None
    jac_inv_cap: float | None = None
    vertex_lower: list | None = None
    method: str = ""
    kind: str = "output-feedback extended system"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "feasible": bool(self.feasible),
            "beta": self.beta,
            "alpha": self.alpha,
            "C": self.C,
            "jac_inv_cap": self.jac_inv_cap,
            "vertex_lower": self.vertex_lower,
            "max_eig_per_vertex": [
                {"vertex": [float(x) for x in v], "max_eig": float(e)} for v, e in self.max_eig_per_vertex
            ],
            "P": None if self.P is None else self.P.tolist(),
            "P_eigenvalues": None if self.P is None else np.linalg.eigvalsh(self.P).tolist(),
            "hypothesis_flags": list(self.hypothesis_flags),
            "notes": list(self.notes),
            "method": self.method,
        }

    def to_text(self) -> str:
        lines = [f"certificate: {self.kind}",
                 f"  verdict: {'FEASIBLE' if self.feasible else 'INFEASIBLE'}"]
        if self.alpha is not None:
            lines.append(f"  alpha = {self.alpha:g}" + ("" if self.C is None else f", C = {self.C:g}"))
        if self.beta is not None:
            lines.append(f"  beta = {self.beta:.6g}")
        if self.method:
            lines.append(f"  P from: {self.method}")
        if self.P is not None:
            eig = ", ".join(f"{x:.6g}" for x in np.linalg.eigvalsh(self.P))
            lines.append(f"  eig(P) = [{eig}]")
        for v, e in self.max_eig_per_vertex:
            vs = ", ".join(f"{x:.6g}" for x in v)
            lines.append(f"  vertex ({vs}): max eig = {e:.6g}")
        for flag in self.hypothesis_flags:
            lines.append(f"  hypothesis flag: {flag}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        return "\n".join(lines)


def jac_inv_lower(transform: Transform, time_grid) -> np.ndarray:
    """Per output, the smallest (dPhi/deps)^-1 over the grid; the derivative peaks at eps = 0."""
    zero = np.zeros(transform.v)
    peak = np.array([np.abs(phi_jacobian_diag(transform, zero, float(t))) for t in time_grid])
    return 1.0 / peak.max(axis=0)


def _vertex_axes(lower, cap, intermediate):
    axes = []
    for lo in lower:
        pts = [lo] + list(np.geomspace(lo, cap, intermediate + 2)[1:-1]) + [cap]
        axes.append(pts)
    return axes


def verify_extended(plant, gains: OutputFeedbackGain, transform: Transform, alpha: float, C: float,
                    time_grid=None, jac_inv_cap: float = 1e3, P=None, beta=None,
                    beta_grid=DEFAULT_BETA_GRID, intermediate: int = 0, refine: bool = True,
                    horizon: float = 10.0, continuation_steps: int = 6) -> CertificateReport:
    """Check the extended-system inequality on the capped Jacobian-inverse box.

    With ``P`` given only verification happens (beta defaults to a grid search
    for that P).  ``intermediate`` inserts extra geometric points per axis.
    """
    if time_grid is None:
        time_grid = np.linspace(0.0, horizon, 2000)
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    lower = jac_inv_lower(transform, time_grid)
    flags, notes = [], []
    base = plant.base if isinstance(plant, SectorPlant) else plant
    if not lbk2_hurwitz(base, gains):
        flags.append("L B K2 is not Hurwitz")
    zero_eps = np.zeros(transform.v)
    if np.any(np.array([phi_jacobian_diag(transform, zero_eps, float(t)) for t in time_grid]) <= 0):
        flags.append("transform is not strictly increasing")
    if np.any(lower >= jac_inv_cap):
        flags.append("cap lies below the smallest Jacobian-inverse value; box is degenerate")
    cap = max(jac_inv_cap, float(lower.max()))
    notes.append(f"unbounded Jacobian-inverse polytope truncated at cap {jac_inv_cap:g}; "
                 "certificate holds only while every (dPhi/deps)^-1 stays below it")
    axes = _vertex_axes(lower, cap, intermediate)
    verts = [np.array(v) for v in itertools.product(*axes)]
    systems = [build_extended_system(plant, gains, v) for v in verts]
    nominal = systems[0]

    method = "user-supplied P"
    if P is None:
        ladder = None
        if refine and continuation_steps > 1 and cap > lower.max() * 1.5:
            caps = np.geomspace(max(lower.max() * 1.5, 1.0), cap, continuation_steps)
            ladder = [[build_extended_system(plant, gains, np.array(v))
                       for v in itertools.product(*_vertex_axes(lower, c, intermediate))]
                      for c in caps]
        try:
            res = search_P(nominal, alpha, C, beta_grid, vertices=systems, ladder=ladder,
                           refine=refine)
        except NonHurwitzNominal as exc:
            flags.append(str(exc))
            return CertificateReport(False, None, [], None, flags, notes, alpha, C, jac_inv_cap,
                                     lower.tolist(), "none")
        P, method = res.P, res.method
        if beta is None:
            beta = res.beta
    P = _check_P(P)
    if beta is None:
        beta, _ = _best_beta(P, systems, alpha, C, beta_grid)
    eval_beta = beta if beta is not None else max(beta_grid)
    per_vertex = [(tuple(float(x) for x in v),
                   sym_eig_max(extended_block_matrix(s, P, alpha, eval_beta, C)))
                  for v, s in zip(verts, systems)]
    feasible = beta is not None and all(e <= FEAS_TOL for _, e in per_vertex)
    if beta is None:
        notes.append(f"no beta in the grid works; eigenvalues shown at beta = {eval_beta:g}")
    return CertificateReport(feasible, beta, per_vertex, P, flags, notes,
                             alpha, C, jac_inv_cap, lower.tolist(), method)


def lmi_report(alpha: float, K: float, extra_flags=(), kind="relative-degree-one 2x2 LMI",
               checks=()) -> CertificateReport:
    """Wrap the closed-form 2x2 test (and extra boolean checks) as a report."""
    res = lmi_2x2(alpha, K)
    flags = list(extra_flags)
    notes = []
    ok = res.feasible
    if res.feasible:
        M = lmi_2x2_matrix(alpha, K, res.beta_min)
        per = [((alpha, K), sym_eig_max(M))]
    else:
        per = [((alpha, K), sym_eig_max(lmi_2x2_matrix(alpha, K, 1e12)))]
    for name, passed in checks:
        notes.append(f"{name}: {'yes' if passed else 'NO'}")
        ok = ok and passed
    return CertificateReport(ok, res.beta_min, per, None, flags, notes, alpha, None, None, None,
                             "closed form", kind)

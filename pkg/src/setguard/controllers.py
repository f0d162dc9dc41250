"""Control laws that keep the output inside the prescribed set, plus gain checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonHurwitzFilter, SingularLB
from .plants import (
    LinearPlant,
    SectorPlant,
    binomial_expand,
    is_hurwitz_matrix,
    poly_add,
    poly_mul,
    poly_trim,
    realize_siso,
)

HURWITZ_MARGIN = 1e-10
LB_TOL = 1e-12


def _base(p):
    return p.base if isinstance(p, SectorPlant) else p


def _lb(p: LinearPlant) -> np.ndarray:
    LB = p.L @ p.B
    if LB.shape[0] != LB.shape[1]:
        raise SingularLB(f"L B has shape {LB.shape}; the law needs as many inputs as outputs")
    if LB.shape == (1, 1):
        if abs(LB[0, 0]) <= LB_TOL:
            raise SingularLB(f"|L B| = {abs(LB[0, 0])!r} is below {LB_TOL}")
    elif np.linalg.cond(LB) > 1.0 / LB_TOL:
        raise SingularLB("L B is numerically singular")
    return LB


@dataclass(frozen=True)
class StateFeedbackGain:
    """u = -(LB)^-1 (LA x + K eps); T is the injection used in the stability argument."""

    K: float
    T: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.K) and self.K > 0):
            raise ValueError("K must be positive")
        T = np.asarray(self.T, dtype=float).reshape(-1)
        object.__setattr__(self, "T", T)

    def __eq__(self, other):
        return (isinstance(other, StateFeedbackGain) and self.K == other.K
                and np.array_equal(self.T, other.T))

    __hash__ = None


@dataclass(frozen=True)
class OutputFeedbackGain:
    """u = K1 y + gamma K2 eps; T1 (n x v) and T2 (v x v) only enter the certificate."""

    K1: np.ndarray
    K2: np.ndarray
    gamma: float = 1.0
    T1: np.ndarray | None = None
    T2: np.ndarray | None = None

    def __post_init__(self):
        K1 = np.atleast_2d(np.asarray(self.K1, dtype=float))
        K2 = np.atleast_2d(np.asarray(self.K2, dtype=float))
        if K1.shape != K2.shape:
            raise ValueError("K1 and K2 must have the same shape (m x v)")
        if not (np.all(np.isfinite(K1)) and np.all(np.isfinite(K2))):
            raise ValueError("gains must be finite")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be positive")
        m, v = K1.shape
        T1 = np.zeros((0, v)) if self.T1 is None else np.atleast_2d(np.asarray(self.T1, dtype=float))
        T2 = np.zeros((v, v)) if self.T2 is None else np.atleast_2d(np.asarray(self.T2, dtype=float))
        if T1.size and T1.shape[1] != v:
            raise ValueError(f"T1 must be n x {v}")
        if T2.shape != (v, v):
            raise ValueError(f"T2 must be {v} x {v}")
        for name, val in (("K1", K1), ("K2", K2), ("T1", T1), ("T2", T2)):
            object.__setattr__(self, name, val)

    def T1_for(self, n: int) -> np.ndarray:
        return np.zeros((n, self.K1.shape[1])) if self.T1.size == 0 else self.T1

    def __eq__(self, other):
        return (isinstance(other, OutputFeedbackGain) and self.gamma == other.gamma
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("K1", "K2", "T1", "T2")))

    __hash__ = None


@dataclass(frozen=True)
class FilteredController:
    """Dynamic law u = -K Q(p) / (R(p) Delta(p)) eps with Delta = p (mu p + 1)^(rho-1) + a mu.

    ``realization`` is (A_c, B_c, C_c, d_c) with input eps and output u.
    """

    K: float
    mu: float
    a: float
    rho: int
    Q: np.ndarray
    R: np.ndarray
    delta: np.ndarray
    realization: tuple = field(repr=False)

    @property
    def order(self) -> int:
        return self.realization[0].shape[0]

    def __eq__(self, other):
        return (isinstance(other, FilteredController)
                and (self.K, self.mu, self.a, self.rho) == (other.K, other.mu, other.a, other.rho)
                and np.array_equal(self.Q, other.Q) and np.array_equal(self.R, other.R))

    __hash__ = None


@dataclass(frozen=True)
class OpenLoop:
    """u = 0. Used for open-loop reference runs and forced-violation checks."""

    m: int = 1


# ---------------------------------------------------------------- laws

def state_feedback_u(g: StateFeedbackGain, p, x, eps) -> np.ndarray:
    """-(LB)^-1 (L A x + K eps)."""
    p = _base(p)
    LB = _lb(p)
    rhs = p.L @ (p.A @ np.asarray(x, dtype=float)) + g.K * np.atleast_1d(eps)
    return -np.linalg.solve(LB, rhs)


def output_feedback_u(g: OutputFeedbackGain, y, eps) -> np.ndarray:
    return g.K1 @ np.atleast_1d(y) + g.gamma * (g.K2 @ np.atleast_1d(eps))


def filter_polynomial(mu: float, a: float, rho: int) -> np.ndarray:
    """p (mu p + 1)^(rho-1) + a mu."""
    return poly_add(poly_mul([1.0, 0.0], binomial_expand(mu, rho - 1)), [a * mu])


def build_filtered_controller(Q, R, K: float, mu: float, a: float) -> FilteredController:
    for name, val in (("K", K), ("mu", mu), ("a", a)):
        if not (math.isfinite(val) and val > 0):
            raise ValueError(f"{name} must be positive")
    Q = poly_trim(Q)
    R = poly_trim(R)
    rho = len(Q) - len(R)
    if rho < 1:
        raise ValueError("relative degree must be at least 1")
    delta = filter_polynomial(mu, a, rho)
    if not hurwitz_poly(delta):
        raise NonHurwitzFilter(f"p(mu p + 1)^{rho - 1} + a mu is not Hurwitz for mu={mu}, a={a}")
    realization = realize_siso(-K * Q, poly_mul(R, delta))
    return FilteredController(K=K, mu=mu, a=a, rho=rho, Q=Q, R=R, delta=delta,
                              realization=realization)


# ---------------------------------------------------------------- checks

def hurwitz_poly(coeffs) -> bool:
    """True iff every root has real part below -1e-10 (companion-matrix eigenvalues)."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    if c.size == 0 or c[0] == 0.0:
        raise ValueError("leading coefficient must be non-zero")
    if c.size == 1:
        return True
    roots = np.roots(c)
    if roots.size < c.size - 1:  # trailing zeros mean roots at the origin
        return False
    return bool(np.max(roots.real) < -HURWITZ_MARGIN)


def closed_loop_T_matrix(p, T) -> np.ndarray:
    """A - B (LB)^-1 L A - T L."""
    p = _base(p)
    LB = _lb(p)
    T = np.asarray(T, dtype=float).reshape(p.n, -1)
    return p.A - p.B @ np.linalg.solve(LB, p.L @ p.A) - T @ p.L


def check_T_matrix(p, T) -> bool:
    return is_hurwitz_matrix(closed_loop_T_matrix(p, T), HURWITZ_MARGIN)


def lbk2_hurwitz(p, g: OutputFeedbackGain) -> bool:
    p = _base(p)
    return is_hurwitz_matrix(p.L @ p.B @ g.K2, HURWITZ_MARGIN)

"""Plant models and the polynomial machinery for transfer-operator plants.

Polynomials are dense coefficient arrays in descending powers, the same
convention as ``numpy.polyval``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateTransfer, ZeroDenominator

MAX_ORDER = 12
LEAD_TOL = 1e-10


def _matrix(a, rows=None, name="matrix") -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1) if rows is not None else m.reshape(1, -1)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} has non-finite entries")
    m.setflags(write=False)
    return m


def _rank(m: np.ndarray) -> int:
    s = np.linalg.svd(m, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > 1e-8 * s[0]))


def is_hurwitz_matrix(M, margin: float = 1e-10) -> bool:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return True
    return bool(np.max(np.linalg.eigvals(M).real) < -margin)


@dataclass(frozen=True)
class LinearPlant:
    """x' = A x + B u + D f,  y = L x."""

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    L: np.ndarray
    controllable: bool = field(init=False)
    observable: bool = field(init=False)

    def __post_init__(self):
        A = _matrix(self.A, name="A")
        n = A.shape[0]
        if A.shape != (n, n) or n == 0:
            raise ValueError("A must be square and non-empty")
        B = _matrix(self.B, rows=n, name="B")
        D = _matrix(self.D, rows=n, name="D")
        L = _matrix(self.L, name="L")
        if B.shape[0] != n or D.shape[0] != n or L.shape[1] != n:
            raise ValueError(f"inconsistent dimensions: A {A.shape}, B {B.shape}, D {D.shape}, L {L.shape}")
        for name, val in (("A", A), ("B", B), ("D", D), ("L", L)):
            object.__setattr__(self, name, val)
        ctrb = np.hstack([np.linalg.matrix_power(A, k) @ B for k in range(n)])
        obsv = np.vstack([L @ np.linalg.matrix_power(A, k) for k in range(n)])
        object.__setattr__(self, "controllable", _rank(ctrb) == n)
        object.__setattr__(self, "observable", _rank(obsv) == n)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.D.shape[1]

    @property
    def v(self) -> int:
        return self.L.shape[0]

    @property
    def hurwitz(self) -> bool:
        return is_hurwitz_matrix(self.A)

    def __eq__(self, other):
        if not isinstance(other, LinearPlant):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "ABDL")

    __hash__ = None


def _zero(x, t):
    return np.zeros(0)


def _sine(x, t):
    return np.sin(x)


NONLINEARITIES: dict[str, Callable] = {"zero": _zero, "sine": _sine}


@dataclass(frozen=True)
class SectorPlant:
    """x' = A x + G phi(x, t) + B u + D f with |phi(x, t)| <= C |x|.

    ``nonlinearity`` names a built-in: ``"sine"`` (elementwise, k = n) or
    ``"zero"`` (k = G.shape[1], output all zeros).
    """

    base: LinearPlant
    G: np.ndarray
    nonlinearity: str = "sine"
    C: float = 1.0
    sector_samples: int = 256

    def __post_init__(self):
        if self.nonlinearity not in NONLINEARITIES:
            raise ValueError(f"unknown nonlinearity {self.nonlinearity!r}")
        G = _matrix(self.G, rows=self.base.n, name="G")
        if G.shape[0] != self.base.n:
            raise ValueError("G must have n rows")
        if self.nonlinearity == "sine" and G.shape[1] != self.base.n:
            raise ValueError("elementwise sine needs G with n columns")
        object.__setattr__(self, "G", G)
        if not (math.isfinite(self.C) and self.C >= 0):
            raise ValueError("sector constant C must be finite and non-negative")
        rng = np.random.default_rng(12345)
        for scale in (1e-3, 1.0, 1e3):
            for x in rng.normal(scale=scale, size=(self.sector_samples // 3, self.base.n)):
                if np.linalg.norm(self.phi(x, 0.0)) > self.C * np.linalg.norm(x) * (1 + 1e-12):
                    raise ValueError(f"nonlinearity violates the sector bound C={self.C} at x={x}")

    @property
    def k(self) -> int:
        return self.G.shape[1]

    def phi(self, x, t) -> np.ndarray:
        if self.nonlinearity == "zero":
            return np.zeros(self.k)
        return NONLINEARITIES[self.nonlinearity](np.asarray(x, dtype=float), t)

    # delegate the linear part
    A = property(lambda self: self.base.A)
    B = property(lambda self: self.base.B)
    D = property(lambda self: self.base.D)
    L = property(lambda self: self.base.L)
    n = property(lambda self: self.base.n)
    m = property(lambda self: self.base.m)
    l = property(lambda self: self.base.l)  # noqa: E741
    v = property(lambda self: self.base.v)
    hurwitz = property(lambda self: self.base.hurwitz)

    def __eq__(self, other):
        if not isinstance(other, SectorPlant):
            return NotImplemented
        return (self.base == other.base and np.array_equal(self.G, other.G)
                and self.nonlinearity == other.nonlinearity and self.C == other.C)

    __hash__ = None


def linear_rhs(p, x, u, f, t=0.0) -> np.ndarray:
    """A x + B u + D f."""
    return p.A @ x + p.B @ np.atleast_1d(u) + p.D @ np.atleast_1d(f)


def sector_rhs(p: SectorPlant, x, u, f, t=0.0) -> np.ndarray:
    """A x + G phi(x, t) + B u + D f."""
    return linear_rhs(p.base, x, u, f, t) + p.G @ p.phi(x, t)


# ---------------------------------------------------------------- polynomials

def poly_trim(a, tol: float = 0.0) -> np.ndarray:
    """Drop leading coefficients with |c| <= tol * max|c| (exact zeros when tol=0)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale == 0.0:
        return np.zeros(1)
    nz = np.flatnonzero(np.abs(a) > tol * scale)
    return a[nz[0]:].copy()


def poly_mul(a, b) -> np.ndarray:
    return np.convolve(np.asarray(a, dtype=float), np.asarray(b, dtype=float))


def poly_add(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = max(a.size, b.size)
    return np.pad(a, (n - a.size, 0)) + np.pad(b, (n - b.size, 0))


def binomial_expand(mu: float, k: int) -> np.ndarray:
    """Coefficients of (mu p + 1)^k."""
    if k < 0:
        raise ValueError("power must be non-negative")
    return np.array([math.comb(k, j) * mu ** (k - j) for j in range(k + 1)], dtype=float)


def poly_eval(a, s):
    """Horner evaluation at a real or complex point."""
    acc = 0.0 + 0.0j if np.iscomplexobj(s) or isinstance(s, complex) else 0.0
    for c in np.asarray(a, dtype=float):
        acc = acc * s + c
    return acc


# ---------------------------------------------------------------- transfer form

def char_poly_adjugate(A):
    """Faddeev-LeVerrier recursion.

    Returns (q, Madj): q holds det(pI - A) in descending powers (monic), and
    Madj[j] is the matrix coefficient of p**j in adj(pI - A), j = 0..n-1.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("A must be square")
    if n > MAX_ORDER:
        raise ValueError(f"order {n} exceeds the supported maximum {MAX_ORDER}")
    q = np.zeros(n + 1)
    q[0] = 1.0
    Madj = [None] * n
    M = np.zeros((n, n))
    c = 1.0
    for k in range(1, n + 1):
        M = A @ M + c * np.eye(n)
        Madj[n - k] = M
        c = -np.trace(A @ M) / k
        q[k] = c
    return q, Madj


@dataclass(frozen=True)
class TransferForm:
    """Q(p) y = R(p) u + Dp(p) f for a SISO plant; rho = deg Q - deg R."""

    Q: np.ndarray
    R: np.ndarray
    Dp: np.ndarray
    rho: int

    def __post_init__(self):
        if abs(self.Q[0] - 1.0) > 1e-12:
            raise ValueError("Q must be monic")
        if not len(self.R) < len(self.Q):
            raise ValueError("deg R must be below deg Q")
        if self.rho != len(self.Q) - len(self.R) or self.rho < 1:
            raise ValueError("inconsistent relative degree")


def transfer_from_state_space(p) -> TransferForm:
    plant = p.base if isinstance(p, SectorPlant) else p
    if plant.m != 1 or plant.v != 1:
        raise ValueError("transfer extraction is single-input single-output only")
    if plant.l != 1:
        raise ValueError("transfer extraction needs a single disturbance channel")
    q, Madj = char_poly_adjugate(plant.A)
    n = plant.n
    # coefficient of p**j sits at descending index n-1-j
    R = np.array([(plant.L @ Madj[j] @ plant.B).item() for j in reversed(range(n))])
    Dp = np.array([(plant.L @ Madj[j] @ plant.D).item() for j in reversed(range(n))])
    if np.max(np.abs(R)) <= LEAD_TOL:
        raise DegenerateTransfer("L adj(pI - A) B is identically zero")
    R = poly_trim(R, LEAD_TOL)
    Dp = poly_trim(Dp, LEAD_TOL)
    return TransferForm(Q=q, R=R, Dp=Dp, rho=len(q) - len(R))


def realize_siso(num, den):
    """Controllable canonical realization (A_c, B_c, C_c, d_c) of num/den.

    A proper ratio (deg num == deg den) yields feedthrough lead(num)/lead(den);
    a constant denominator yields a zero-dimensional dynamic part.
    """
    den = np.atleast_1d(np.asarray(den, dtype=float))
    if den.size == 0 or not np.any(den != 0.0):
        raise ZeroDenominator("denominator polynomial is identically zero")
    den = poly_trim(den)
    num = poly_trim(np.atleast_1d(np.asarray(num, dtype=float)))
    if num.size > den.size:
        raise ValueError("improper ratio: deg num > deg den")
    lead = den[0]
    den = den / lead
    num = num / lead
    n = den.size - 1
    num = np.pad(num, (den.size - num.size, 0))
    d_c = float(num[0])
    rem = num - d_c * den  # rem[0] == 0
    A_c = np.zeros((n, n))
    if n:
        A_c[:-1, 1:] = np.eye(n - 1)
        A_c[-1, :] = -den[:0:-1]
    B_c = np.zeros((n, 1))
    if n:
        B_c[-1, 0] = 1.0
    C_c = rem[:0:-1].reshape(1, n).copy()
    return A_c, B_c, C_c, d_c


def realization_response(A_c, B_c, C_c, d_c, s) -> complex:
    """C (sI - A)^-1 B + d at a complex point."""
    n = A_c.shape[0]
    if n == 0:
        return complex(d_c)
    x = np.linalg.solve(s * np.eye(n) - A_c, B_c.astype(complex))
    return complex((C_c @ x).item() + d_c)

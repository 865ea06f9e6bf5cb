"""Potentials, Schrodinger transfer matrices, cocycle iterates and
Lyapunov exponents.

The cocycle over the circle rotation by alpha is (x, w) -> (x + alpha,
A(x) w) with the companion step A(x) = [[z - v(x), -1], [1, 0]].  Ordered
products A_n(x) = A(x+(n-1)alpha) ... A(x) are renormalised every 32
steps against overflow; every product-returning routine reports the
accumulated log scale, so the exact product is exp(log_scale) * matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

RESCALE_EVERY = 32


class Potential:
    """Real-analytic sampled potential on R/Z.

    Two variants: ``amo`` (2*lambda*cos(2 pi x)) and ``trigpoly`` (a finite
    set of Fourier modes with hermitian coefficients, so the function is
    real on the real axis).  The evaluator accepts complex arguments, so
    the function extends to any strip |Im x| <= band.
    """

    __slots__ = ("variant", "lam", "coeffs")

    def __init__(self, variant: str, lam: float = 0.0, coeffs: dict | None = None):
        self.variant = variant
        self.lam = float(lam)
        if variant == "amo":
            self.coeffs = {1: complex(lam), -1: complex(lam)}
        elif variant == "trigpoly":
            coeffs = {int(k): complex(c) for k, c in (coeffs or {}).items() if c != 0}
            for k, c in coeffs.items():
                if abs(coeffs.get(-k, 0).conjugate() - c) > 1e-13 * max(1.0, abs(c)):
                    raise ValueError("trig coefficients must satisfy v[-k] == conj(v[k])")
            self.coeffs = coeffs
        else:
            raise ValueError(f"unknown potential variant {variant!r}")

    @classmethod
    def amo(cls, lam: float) -> "Potential":
        return cls("amo", lam=lam)

    @classmethod
    def trig(cls, coeffs: dict) -> "Potential":
        return cls("trigpoly", coeffs=coeffs)

    @classmethod
    def zero(cls) -> "Potential":
        return cls("trigpoly", coeffs={})

    def __call__(self, x):
        if self.variant == "amo":
            if np.iscomplexobj(x) or isinstance(x, complex):
                return 2 * self.lam * np.cos(2 * np.pi * np.asarray(x, dtype=complex))
            return 2 * self.lam * np.cos(2 * np.pi * np.asarray(x, dtype=float)) if np.ndim(x) else 2 * self.lam * math.cos(2 * math.pi * x)
        if not self.coeffs:
            return np.zeros_like(np.asarray(x, dtype=float)) if np.ndim(x) else 0.0
        xs = np.asarray(x)
        out = np.zeros(xs.shape, dtype=complex)
        for k, c in sorted(self.coeffs.items()):
            out = out + c * np.exp(2j * np.pi * k * xs)
        if not np.iscomplexobj(xs):
            out = out.real
        return out if np.ndim(x) else out[()]

    def sup_bound(self, band: float = 0.0) -> float:
        """Coefficient majorant for sup of |v| on the strip |Im x| <= band."""
        return float(sum(abs(c) * math.exp(2 * math.pi * band * abs(k)) for k, c in self.coeffs.items()))

    def to_json(self) -> dict:
        if self.variant == "amo":
            return {"variant": "amo", "lambda": self.lam}
        return {"variant": "trigpoly", "coeffs": [[k, c.real, c.imag] for k, c in sorted(self.coeffs.items())]}

    @classmethod
    def from_json(cls, obj: dict) -> "Potential":
        if obj["variant"] == "amo":
            return cls.amo(obj["lambda"])
        return cls.trig({int(k): complex(re, im) for k, re, im in obj["coeffs"]})

    def __repr__(self):
        if self.variant == "amo":
            return f"Potential.amo({self.lam})"
        return f"Potential.trig({self.coeffs})"


def op_norm_2x2(m: np.ndarray) -> float:
    """Operator 2-norm of a 2x2 matrix from the closed-form singular values."""
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    t = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det = abs(a * d - b * c) ** 2
    disc = max(t * t - 4 * det, 0.0)
    return math.sqrt((t + math.sqrt(disc)) / 2)


def smallest_sv_2x2(m: np.ndarray) -> float:
    a, b, c, d = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    t = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    det = abs(a * d - b * c) ** 2
    disc = max(t * t - 4 * det, 0.0)
    return math.sqrt(max((t - math.sqrt(disc)) / 2, 0.0))


@dataclass(frozen=True)
class Mat2:
    """A 2x2 matrix value with its determinant tracked."""

    m: np.ndarray

    @property
    def det(self) -> complex:
        return self.m[0, 0] * self.m[1, 1] - self.m[0, 1] * self.m[1, 0]

    def norm(self) -> float:
        return op_norm_2x2(self.m)

    def smallest_sv(self) -> float:
        return smallest_sv_2x2(self.m)

    def adjugate(self) -> "Mat2":
        a, b, c, d = self.m[0, 0], self.m[0, 1], self.m[1, 0], self.m[1, 1]
        return Mat2(np.array([[d, -b], [-c, a]], dtype=self.m.dtype))

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(self.m @ other.m)


def step_matrix(z, v: Potential, x: float) -> Mat2:
    """Transfer step [[z - v(x), -1], [1, 0]]; det = 1 exactly."""
    e = z - v(x)
    dtype = complex if isinstance(e, complex) else float
    return Mat2(np.array([[e, -1.0], [1.0, 0.0]], dtype=dtype))


def iterate(z, v: Potential, alpha: float, x: float, n: int) -> tuple[Mat2, float]:
    """n-th cocycle iterate at x, rescaled to unit operator norm.

    Returns ``(mat, log_scale)`` with exact product exp(log_scale)*mat.
    Negative n is handled by multiplying the analytic step inverses
    [[0, 1], [-1, z - v]] in reverse order, per the cocycle power
    definition A_{-n}(x) = A_n(x - n alpha)^{-1}.
    """
    if n == 0:
        return Mat2(np.eye(2)), 0.0
    complex_case = isinstance(z, complex) and z.imag != 0.0
    dtype = complex if complex_case else float
    if not complex_case and isinstance(z, complex):
        z = z.real
    M = np.eye(2, dtype=dtype)
    log_scale = 0.0
    if n > 0:
        steps = range(n)
        build = lambda e: np.array([[e, -1.0], [1.0, 0.0]], dtype=dtype)
        phase = lambda j: x + j * alpha
    else:
        steps = range(-n)
        build = lambda e: np.array([[0.0, 1.0], [-1.0, e]], dtype=dtype)
        phase = lambda j: x - (j + 1) * alpha
    for j in steps:
        e = z - v(phase(j))
        M = build(e) @ M
        if (j + 1) % RESCALE_EVERY == 0:
            s = float(np.max(np.abs(M)))
            M /= s
            log_scale += math.log(s)
    nrm = op_norm_2x2(M)
    return Mat2(M / nrm), log_scale + math.log(nrm)


def product_log_det(mat: Mat2, log_scale: float) -> float:
    """log |det| of the unscaled product exp(log_scale)*mat."""
    return math.log(abs(mat.det)) + 2 * log_scale


def _phase_batch(x0: float, alpha: float, count: int, grid: str) -> np.ndarray:
    if grid == "orbit":
        return (x0 + alpha * np.arange(count)) % 1.0
    if grid == "uniform":
        return (x0 + np.arange(count) / count) % 1.0
    raise ValueError("grid must be 'orbit' or 'uniform'")


def _batched_log_norms(E, v, alpha, phases, n, keep_all=False):
    """Cumulative products over a batch of phases.

    Returns log ||A_s(x)|| for s = n only (shape (len(phases),)), or for
    every s = 1..n (shape (n, len(phases))) when keep_all is set.
    """
    m00 = np.ones_like(phases)
    m01 = np.zeros_like(phases)
    m10 = np.zeros_like(phases)
    m11 = np.ones_like(phases)
    logs = np.zeros_like(phases)
    hist = np.empty((n, len(phases))) if keep_all else None
    for s in range(n):
        e = E - v(phases + s * alpha)
        m00, m10 = e * m00 - m10, m00
        m01, m11 = e * m01 - m11, m01
        if keep_all:
            t = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
            det = (m00 * m11 - m01 * m10) ** 2
            disc = np.maximum(t * t - 4 * det, 0.0)
            hist[s] = logs + 0.5 * np.log((t + np.sqrt(disc)) / 2)
        if (s + 1) % RESCALE_EVERY == 0:
            scale = np.max(np.abs(np.stack([m00, m01, m10, m11])), axis=0)
            m00, m01, m10, m11 = m00 / scale, m01 / scale, m10 / scale, m11 / scale
            logs += np.log(scale)
    if keep_all:
        return hist
    t = m00 * m00 + m01 * m01 + m10 * m10 + m11 * m11
    det = (m00 * m11 - m01 * m10) ** 2
    disc = np.maximum(t * t - 4 * det, 0.0)
    return logs + 0.5 * np.log((t + np.sqrt(disc)) / 2)


def lyapunov(E: float, v: Potential, alpha: float, n: int, x_grid: int,
             x0: float = 0.0, grid: str = "orbit") -> float:
    """Finite-n Lyapunov estimate (1/n) <ln ||A_n(x)||> over a phase grid.

    The default grid is the Birkhoff orbit x_j = x0 + j*alpha mod 1;
    pass grid='uniform' for an equispaced grid.  The reduction order is
    fixed, so results are deterministic for a given grid specification.
    """
    if n < 1 or x_grid < 1:
        raise ValueError("n and x_grid must be >= 1")
    phases = _phase_batch(x0, alpha, x_grid, grid)
    logn = _batched_log_norms(float(E), v, alpha, phases, n)
    return float(np.mean(logn)) / n


@dataclass(frozen=True)
class GrowthProfile:
    """sup_x ||A_s(x)|| over a phase grid, for s = 1..s_max, in log form."""

    s: np.ndarray
    log_sup: np.ndarray
    phase_count: int

    @property
    def sup_norms(self) -> np.ndarray:
        return np.exp(self.log_sup)

    def loglog_slope(self, s_min: int = 16) -> float:
        """Slope of log sup||A_s|| against log s (polynomial growth rate)."""
        mask = self.s >= s_min
        return float(np.polyfit(np.log(self.s[mask]), self.log_sup[mask], 1)[0])

    def exp_rate(self, s_min: int = 16) -> float:
        """Slope of log sup||A_s|| against s (exponential growth rate)."""
        mask = self.s >= s_min
        return float(np.polyfit(self.s[mask], self.log_sup[mask], 1)[0])


def growth_profile(E: float, v: Potential, alpha: float, s_max: int,
                   phase_grid: int = 64, x0: float = 0.0) -> GrowthProfile:
    """Growth diagnostic: sup over ``phase_grid`` equispaced phases of
    ||A_s(x)|| for s = 1..s_max."""
    if s_max < 1:
        raise ValueError("s_max must be >= 1")
    phases = _phase_batch(x0, alpha, phase_grid, "uniform")
    hist = _batched_log_norms(float(E), v, alpha, phases, s_max, keep_all=True)
    return GrowthProfile(s=np.arange(1, s_max + 1), log_sup=hist.max(axis=1),
                         phase_count=phase_grid)


@dataclass(frozen=True)
class SolutionSeq:
    """A solution of H u = z u with rotated boundary pair at the origin:
    u_0 cos(beta) + u_1 sin(beta) = 0 and |u_0|^2 + |u_1|^2 = 1."""

    beta: float
    z: complex
    values: np.ndarray  # u_0 .. u_L

    def norm_upto(self, L: int) -> float:
        """(sum_{j=1}^{L} |u_j|^2)^{1/2}."""
        return float(np.sqrt(np.sum(np.abs(self.values[1:L + 1]) ** 2)))

    def boundary_pair(self) -> tuple:
        return self.values[0], self.values[1]


def solution(beta: float, z, v: Potential, alpha: float, x: float, L: int) -> SolutionSeq:
    """Generate u_0..u_L by transfer-matrix steps from the normalized
    boundary pair (u_0, u_1) = (-sin beta, cos beta)."""
    if L < 1:
        raise ValueError("L must be >= 1")
    complex_case = isinstance(z, complex) and z.imag != 0.0
    if not complex_case and isinstance(z, complex):
        z = z.real
    u = np.empty(L + 1, dtype=complex if complex_case else float)
    u[0] = -math.sin(beta)
    u[1] = math.cos(beta)
    for j in range(1, L):
        u[j + 1] = (z - v(x + j * alpha)) * u[j] - u[j - 1]
    return SolutionSeq(beta=beta, z=z, values=u)


def solution_norm_sq_batch(u0: np.ndarray, u1: np.ndarray, E: float, v: Potential,
                           alpha: float, x: float, L: int) -> np.ndarray:
    """sum_{j=1}^{L} u_j^2 for a batch of real boundary pairs at real energy."""
    prev = np.array(u0, dtype=float)
    cur = np.array(u1, dtype=float)
    acc = cur * cur
    for j in range(1, L):
        prev, cur = cur, (E - v(x + j * alpha)) * cur - prev
        acc += cur * cur
    return acc

"""Quantum side: projector operators, eigenvalue bounds, violation checks.

The largest eigenvalue of a functional's operator is its maximum over pure
states, the smallest is its minimum; a minimum above the classical bound means
every state violates the inequality.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .conversion import Inequality
from .expression import Expression, ExpressionError
from .rayset import Ray, RaySet, RaySetError

HERMITIAN_TOLERANCE = 1e-12
JACOBI_TOLERANCE = 1e-12
VIOLATION_MARGIN = 1e-9


class NotHermitianError(ValueError):
    pass


class LambdaOutsideIntervalWarning(UserWarning):
    pass


class Violation(str, Enum):
    NONE = "none"
    STATE_DEPENDENT = "state_dependent"
    STATE_INDEPENDENT = "state_independent"
    INCONCLUSIVE = "inconclusive"


def projector(ray: Ray | np.ndarray) -> np.ndarray:
    """``|v><v|`` for the normalised ray."""
    v = ray.vector if isinstance(ray, Ray) else np.asarray(ray, dtype=complex)
    norm = np.linalg.norm(v)
    if norm <= 1e-12:
        raise RaySetError("zero ray")
    v = v / norm
    return np.outer(v, v.conj())


def hermitian_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def expression_operator(expr: Expression, rayset: RaySet, lam=0.0) -> np.ndarray:
    """Operator of a P-expression at a fixed lambda.

    Products are symmetrised, ``(P_i P_j + P_j P_i) / 2``, which vanishes for
    orthogonal rays and keeps the result Hermitian under rounding.
    """
    if expr.variable != "P":
        raise ExpressionError("operators are built from P-expressions")
    rays = rayset.require_vectors()
    if expr.universe != rayset.mu:
        raise ExpressionError(
            f"expression universe {expr.universe} does not match {rayset.mu} rays"
        )
    lam = float(lam)
    n = rayset.dim
    proj = [projector(r) for r in rays]
    m = float(expr.constant.value(lam)) * np.eye(n, dtype=complex)
    for i, c in expr.linear.items():
        m += float(c.value(lam)) * proj[i]
    for (i, j), c in expr.quadratic.items():
        m += float(c.value(lam)) * 0.5 * (proj[i] @ proj[j] + proj[j] @ proj[i])
    return m


def jacobi_eigh(m: np.ndarray, tol: float = JACOBI_TOLERANCE, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Each rotation first removes the phase of ``a[p, q]`` and then applies the
    real symmetric rotation that zeroes it.  Stops once the off-diagonal
    Frobenius norm drops below ``tol``.  Returns ascending eigenvalues and the
    matching eigenvectors as columns.
    """
    a = np.array(m, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if hermitian_defect(a) > HERMITIAN_TOLERANCE:
        raise NotHermitianError(f"matrix is not Hermitian (defect {hermitian_defect(a):.3g})")
    a = 0.5 * (a + a.conj().T)
    v = np.eye(n, dtype=complex)

    def off(x):
        return math.sqrt(max(0.0, float(np.sum(np.abs(x) ** 2) - np.sum(np.abs(np.diag(x)) ** 2))))

    for _ in range(max_sweeps):
        if off(a) < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r < 1e-300:
                    continue
                phase = apq / r
                app, aqq = a[p, p].real, a[q, q].real
                theta = (aqq - app) / (2 * r)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                # u = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                u = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ u
                a[idx, :] = u.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0
                a[p, p], a[q, q] = a[p, p].real, a[q, q].real
                v[:, idx] = v[:, idx] @ u
    else:
        if off(a) >= tol:
            raise RuntimeError("Jacobi iteration did not converge")
    w = np.real(np.diag(a))
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


@dataclass(frozen=True)
class EigenBounds:
    min: float
    max: float
    eigvec_max: np.ndarray


def eigen_bounds(m: np.ndarray) -> EigenBounds:
    w, v = jacobi_eigh(m)
    top = v[:, -1]
    top = top / np.linalg.norm(top)
    # fix the global phase so the largest component is real and positive
    k = int(np.argmax(np.abs(top)))
    top = top * (abs(top[k]) / top[k])
    return EigenBounds(float(w[0]), float(w[-1]), top)


def _state_to_json(v: np.ndarray) -> list:
    if np.all(np.abs(v.imag) == 0):
        return [float(x) for x in v.real]
    return [[float(x.real), float(x.imag)] for x in v]


def _state_from_json(doc: list) -> np.ndarray:
    return np.array([complex(*x) if isinstance(x, list) else complex(x) for x in doc])


@dataclass(frozen=True)
class QuantumReport:
    lam: float
    max_value: float
    min_value: float
    optimal_state: tuple[complex, ...]
    classical_bound_at_lambda: float
    violation: Violation
    lambda_in_interval: bool = True

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "max_value": self.max_value,
            "min_value": self.min_value,
            "optimal_state": _state_to_json(np.array(self.optimal_state)),
            "classical_bound": self.classical_bound_at_lambda,
            "violation": self.violation.value,
            "lambda_in_interval": self.lambda_in_interval,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "QuantumReport":
        return cls(
            doc["lambda"],
            doc["max_value"],
            doc["min_value"],
            tuple(_state_from_json(doc["optimal_state"])),
            doc["classical_bound"],
            Violation(doc["violation"]),
            doc["lambda_in_interval"],
        )


def classify(min_value: float, max_value: float, bound: float,
             margin: float = VIOLATION_MARGIN) -> Violation:
    if max_value > bound + margin:
        if min_value > bound + margin:
            return Violation.STATE_INDEPENDENT
        if min_value >= bound - margin:
            return Violation.INCONCLUSIVE
        return Violation.STATE_DEPENDENT
    if max_value >= bound - margin:
        return Violation.INCONCLUSIVE
    return Violation.NONE


def verify_violation(inequality: Inequality, rayset: RaySet, lam) -> QuantumReport:
    """Compare the functional's eigenvalue range with the classical bound at ``lam``.

    A lambda outside the inequality's guaranteed interval is still evaluated,
    with a :class:`LambdaOutsideIntervalWarning`.
    """
    inside = inequality.lambda_interval.contains(lam)
    if not inside:
        warnings.warn(
            f"lambda={lam} lies outside the guaranteed interval {inequality.lambda_interval}",
            LambdaOutsideIntervalWarning,
            stacklevel=2,
        )
    m = expression_operator(inequality.functional, rayset, lam)
    eb = eigen_bounds(m)
    bound = float(inequality.bound(lam))
    return QuantumReport(
        float(lam),
        eb.max,
        eb.min,
        tuple(complex(x) for x in eb.eigvec_max),
        bound,
        classify(eb.min, eb.max, bound),
        inside,
    )


def violation_region(
    inequality: Inequality,
    rayset: RaySet,
    lam_max: float | None = None,
    state_independent: bool = False,
    margin: float = VIOLATION_MARGIN,
) -> list[tuple[float, float]]:
    """Lambda intervals on ``(0, lam_max]`` where some state violates the inequality.

    A lambda-free functional with a constant bound gives ``[(0, inf)]`` or ``[]``.

    With ``state_independent`` the smallest eigenvalue is used, so the result
    is where every state violates.  The gap between the extreme eigenvalue and
    the bound is convex in lambda between consecutive envelope breakpoints, so
    each piece has at most two sign changes, found by root bracketing.
    """
    lines = [(float(c.a), float(c.b)) for c in inequality.bound.lines]
    if inequality.functional.is_lambda_free and all(s == 0 for s, _ in lines):
        # nothing depends on lambda: the answer holds for every lambda or none
        w, _ = jacobi_eigh(expression_operator(inequality.functional, rayset))
        eig = w[0] if state_independent else w[-1]
        return [(0.0, math.inf)] if eig - max(b for _, b in lines) > margin else []
    breaks = [float(b) for b in inequality.bound.breakpoints()]
    if lam_max is None:
        upper = inequality.lambda_interval.upper
        anchors = breaks + ([float(upper)] if upper is not None else []) + [1.0]
        lam_max = 2 * max(anchors)
    a_op = expression_operator(inequality.functional.at_lambda(0), rayset)
    b_op = expression_operator(inequality.functional.at_lambda(1), rayset) - a_op

    def gap(lam: float) -> float:
        w, _ = jacobi_eigh(a_op + lam * b_op)
        eig = w[0] if state_independent else w[-1]
        return float(eig - max(s * lam + b for s, b in lines)) - margin

    edges = [0.0] + [b for b in breaks if 0 < b < lam_max] + [lam_max]
    pieces: list[tuple[float, float]] = []
    for lo, hi in zip(edges, edges[1:]):
        if hi <= lo:
            continue
        g_lo, g_hi = gap(lo), gap(hi)
        opt = minimize_scalar(gap, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12})
        x_min, g_min = float(opt.x), float(opt.fun)
        if min(g_lo, g_hi) < g_min:
            x_min, g_min = (lo, g_lo) if g_lo < g_hi else (hi, g_hi)
        if g_min > 0:
            pieces.append((lo, hi))
            continue
        if g_lo > 0:
            pieces.append((lo, brentq(gap, lo, x_min, xtol=1e-14)))
        if g_hi > 0:
            pieces.append((brentq(gap, x_min, hi, xtol=1e-14), hi))
    merged: list[tuple[float, float]] = []
    for lo, hi in pieces:
        if merged and abs(merged[-1][1] - lo) <= 1e-12:
            merged[-1] = (merged[-1][0], hi)
        else:
            merged.append((lo, hi))
    return merged

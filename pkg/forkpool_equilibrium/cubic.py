"""
Real roots of polynomials of degree at most three.

Closed-form roots (trigonometric when all three are real, Cardano otherwise)
are polished with Newton steps from scipy.optimize.root_scalar. Leading zero
coefficients fall back to the quadratic and linear formulas.
"""

import math
import warnings
from typing import List

from scipy import optimize

from forkpool_model.errors import DomainError

NEWTON_ITERATIONS = 50
NEWTON_XTOL = 1e-15
MERGE_TOL = 1e-9


def _cube_root(v: float) -> float:
    return math.copysign(abs(v) ** (1.0 / 3.0), v)


def polynomial_value(coeffs: List[float], r: float) -> float:
    """Evaluate a polynomial with coefficients in descending order (Horner)."""
    acc = 0.0
    for c in coeffs:
        acc = acc * r + c
    return acc


def polynomial_derivative(coeffs: List[float], r: float) -> float:
    """Evaluate the derivative of a descending-order polynomial."""
    n = len(coeffs) - 1
    acc = 0.0
    for k, c in enumerate(coeffs[:-1]):
        acc = acc * r + (n - k) * c
    return acc


def residual_bound(a: float, b: float, c: float, d: float) -> float:
    """Return 1e-12 times the largest coefficient magnitude."""
    return 1e-12 * max(abs(a), abs(b), abs(c), abs(d))


def _depressed_roots(p: float, q: float) -> List[float]:
    """Real roots of t^3 + p t + q = 0."""
    if p == 0.0:
        return [-_cube_root(q)]
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    if disc > 0.0:
        s = math.sqrt(disc)
        return [_cube_root(-q / 2.0 + s) + _cube_root(-q / 2.0 - s)]
    if disc == 0.0:
        return [3.0 * q / p, -1.5 * q / p]
    # three real roots; p < 0 here
    arg = max(-1.0, min(1.0, (3.0 * q / (2.0 * p)) * math.sqrt(-3.0 / p)))
    phi = math.acos(arg) / 3.0
    scale = 2.0 * math.sqrt(-p / 3.0)
    return [scale * math.cos(phi - 2.0 * math.pi * k / 3.0) for k in range(3)]


def _quadratic_roots(a: float, b: float, c: float) -> List[float]:
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return []
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    if q == 0.0:
        return [0.0]
    return [q / a, c / q]


def _polish(coeffs: List[float], r: float, bound: float) -> float:
    if abs(polynomial_value(coeffs, r)) <= bound:
        return r
    with warnings.catch_warnings():
        # zero slope: scipy warns and returns the last iterate
        warnings.simplefilter("ignore", RuntimeWarning)
        sol = optimize.root_scalar(
            lambda v: polynomial_value(coeffs, v),
            x0=r,
            fprime=lambda v: polynomial_derivative(coeffs, v),
            method="newton",
            xtol=NEWTON_XTOL,
            maxiter=NEWTON_ITERATIONS,
        )
    candidate = float(sol.root)
    # keep the closed-form estimate if Newton makes it worse
    if not math.isfinite(candidate):
        return r
    if abs(polynomial_value(coeffs, candidate)) >= abs(polynomial_value(coeffs, r)):
        return r
    return candidate


def cubic_real_roots(a: float, b: float, c: float, d: float) -> List[float]:
    """
    Real roots of a r^3 + b r^2 + c r + d = 0 in ascending order.

    Args:
        a, b, c, d: Coefficients; leading zeros reduce the degree

    Returns:
        List[float]: Distinct real roots after Newton polishing; empty when the
        equation reduces to a nonzero constant

    Raises:
        DomainError: If every coefficient is zero
    """
    if a == 0.0 and b == 0.0 and c == 0.0:
        if d == 0.0:
            raise DomainError("Every coefficient is zero; every r is a root")
        return []

    if a != 0.0:
        coeffs = [a, b, c, d]
        bn, cn, dn = b / a, c / a, d / a
        p = cn - bn * bn / 3.0
        q = 2.0 * bn ** 3 / 27.0 - bn * cn / 3.0 + dn
        raw = [t - bn / 3.0 for t in _depressed_roots(p, q)]
    elif b != 0.0:
        coeffs = [b, c, d]
        raw = _quadratic_roots(b, c, d)
    else:
        coeffs = [c, d]
        raw = [-d / c]

    bound = residual_bound(a, b, c, d)
    polished = sorted(_polish(coeffs, r, bound) for r in raw)

    roots: List[float] = []
    for r in polished:
        if roots and abs(r - roots[-1]) <= MERGE_TOL * (1.0 + abs(r)):
            continue
        roots.append(r)
    return roots

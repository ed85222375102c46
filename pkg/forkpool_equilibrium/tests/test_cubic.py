"""
Tests for the cubic root solver.
"""

import math
import warnings

import pytest

from forkpool_equilibrium.cubic import _polish, cubic_real_roots, polynomial_value, residual_bound
from forkpool_model.errors import DomainError


def assert_small_residuals(a, b, c, d, roots):
    bound = residual_bound(a, b, c, d)
    for r in roots:
        assert abs(polynomial_value([a, b, c, d], r)) <= bound


def test_three_real_roots():
    """Test a cubic with three distinct real roots."""
    roots = cubic_real_roots(1, -6, 11, -6)
    assert roots == pytest.approx([1.0, 2.0, 3.0], abs=1e-12)
    assert_small_residuals(1, -6, 11, -6, roots)

    roots = cubic_real_roots(2, -3, -11, 6)
    assert roots == pytest.approx([-2.0, 0.5, 3.0], abs=1e-12)
    assert_small_residuals(2, -3, -11, 6, roots)


def test_single_real_root():
    """Test a cubic with one real and two complex roots."""
    roots = cubic_real_roots(1, 0, 1, 1)
    assert len(roots) == 1
    assert roots[0] == pytest.approx(-0.6823278038280193, abs=1e-12)
    assert_small_residuals(1, 0, 1, 1, roots)


def test_multiple_roots_collapse():
    """Test that a triple root is reported once."""
    assert cubic_real_roots(1, -3, 3, -1) == pytest.approx([1.0], abs=1e-5)
    assert cubic_real_roots(1, 0, 0, 0) == [0.0]


def test_lower_degree_fallbacks():
    """Test the quadratic and linear fallbacks."""
    assert cubic_real_roots(0, 1, -1, 0) == pytest.approx([0.0, 1.0])
    assert cubic_real_roots(0, 1, 0, 1) == []
    assert cubic_real_roots(0, 0, 2, -1) == [0.5]


def test_degenerate_equations():
    """Test constant equations."""
    assert cubic_real_roots(0, 0, 0, 5) == []
    with pytest.raises(DomainError, match="Every coefficient is zero"):
        cubic_real_roots(0, 0, 0, 0)


def test_badly_scaled_coefficients():
    """Test roots of a cubic with large coefficients and a double root."""
    # -5e5 (r + 2)^2 (r - 0.4)
    a, b, c, d = -5e5, -1.8e6, -1.2e6, 8e5
    roots = cubic_real_roots(a, b, c, d)
    assert any(math.isclose(r, 0.4, abs_tol=1e-9) for r in roots)
    assert all(r == pytest.approx(-2.0, abs=1e-6) or r == pytest.approx(0.4, abs=1e-9) for r in roots)
    assert_small_residuals(a, b, c, d, roots)


def test_polish_refines_rough_estimate():
    """Test that Newton polishing pulls a perturbed root onto the exact one."""
    coeffs = [1.0, -6.0, 11.0, -6.0]
    bound = residual_bound(*coeffs)
    polished = _polish(coeffs, 2.001, bound)
    assert polished == pytest.approx(2.0, abs=1e-12)
    assert abs(polynomial_value(coeffs, polished)) <= bound


def test_polish_keeps_estimate_at_zero_slope():
    """Test that a start with zero derivative is returned unchanged and silently."""
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert _polish([1.0, 0.0, -1.0], 0.0, 1e-12) == 0.0

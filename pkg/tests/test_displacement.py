"""Displacement-vector solvers: exact affine route and fixed-point iteration."""

import numpy as np
import pytest

from mdvkit.displacement import (
    EXACT_AFFINE,
    NORMALIZED_ITERATE,
    RESIDUAL_ITERATION,
    DisplacementEstimate,
    displacement_exact_affine,
    displacement_iterative,
    displacement_range_affine,
    membership_in_displacement_range,
    minimal_displacement,
)
from mdvkit.errors import UnsupportedOperatorError, ValidationError
from mdvkit.operators import AffineMap, Composition, ConvexCombination, SetProjector
from mdvkit.sets import Ball, Box, Halfspace, Singleton


def _reflection(u):
    """x -> -x - u, the classic order-dependence building block."""
    dim = len(u)
    return AffineMap(-np.eye(dim), [-v for v in u])


# ---------------------------------------------------------------------------
# exact route


def test_translation_displacement_is_minus_offset():
    est = minimal_displacement(AffineMap.translation([0.3, -0.1]))
    assert est.method == EXACT_AFFINE and est.converged and est.iterations == 0
    np.testing.assert_allclose(est.vector, [-0.3, 0.1], atol=1e-15)
    assert est.norm == pytest.approx(np.hypot(0.3, 0.1))


def test_constant_map_has_zero_displacement():
    # T(x) = b has the fixed point b, so the smallest displacement is zero
    est = minimal_displacement(AffineMap(np.zeros((2, 2)), [1.0, 2.0]))
    np.testing.assert_allclose(est.vector, [0.0, 0.0], atol=1e-14)
    assert est.residual <= 1e-12  # attained


def test_two_reflections_compose_to_order_dependent_displacement():
    r1, r2 = _reflection([1.0, 0.0]), _reflection([0.0, 1.0])
    one_two = minimal_displacement(Composition([r1, r2]))
    two_one = minimal_displacement(Composition([r2, r1]))
    np.testing.assert_allclose(one_two.vector, [-1.0, 1.0], atol=1e-12)
    np.testing.assert_allclose(two_one.vector, [1.0, -1.0], atol=1e-12)


def test_range_of_reflection_is_everything():
    rng_space = displacement_range_affine(_reflection([0.5, 0.5]))
    assert rng_space.rank == 2
    assert rng_space.contains(np.array([17.0, -3.0]))


def test_combination_of_translations_range_collapses_to_point():
    # regression: weights summing to 1 +- ulp used to leave I - M full of
    # rounding noise and the range came out full-dimensional
    combo = ConvexCombination([1.0 / 3.0, 2.0 / 3.0],
                              [AffineMap.translation([0.3, 0.0]),
                               AffineMap.translation([0.0, 0.3])])
    rng_space = displacement_range_affine(combo)
    assert rng_space.rank == 0
    np.testing.assert_allclose(rng_space.base, [-0.1, -0.2], atol=1e-15)
    est = displacement_exact_affine(combo)
    np.testing.assert_allclose(est.vector, [-0.1, -0.2], atol=1e-15)


def test_exact_rejects_non_affine():
    proj = SetProjector(Ball([0.0, 0.0], 1.0))
    with pytest.raises(UnsupportedOperatorError):
        displacement_range_affine(proj)
    with pytest.raises(UnsupportedOperatorError):
        displacement_exact_affine(proj)


def test_membership_in_displacement_range():
    shift = AffineMap.translation([0.3, -0.1])
    assert membership_in_displacement_range(shift, [-0.3, 0.1])
    assert not membership_in_displacement_range(shift, [-0.3, 0.2])
    reflection = _reflection([1.0, 1.0])
    assert membership_in_displacement_range(reflection, [40.0, -2.0])  # full range


# ---------------------------------------------------------------------------
# iterative route


def test_residual_iteration_on_projector_composition():
    # ball projection then a big push; the push is absorbed radially, so a
    # fixed point exists and the displacement vector is zero
    comp = Composition([SetProjector(Ball([0.0, 0.0], 1.0)),
                        AffineMap.translation([3.0, 0.0])])
    est = displacement_iterative(comp)
    assert est.method == RESIDUAL_ITERATION and est.converged
    np.testing.assert_allclose(est.vector, [0.0, 0.0], atol=1e-9)


def test_residual_iteration_nonzero_displacement():
    # projecting onto a singleton then translating has no fixed point:
    # T(x) = p + u, displacement x - T x minimized at x = p + u with value -u?
    # no: T is constant, so x = T x is solvable; build a genuinely fixed-point
    # free map instead from two separated singetons via convex combination
    comp = Composition([SetProjector(Singleton([0.0, 0.0])),
                        AffineMap.translation([0.4, 0.0])])
    est = displacement_iterative(comp)
    np.testing.assert_allclose(est.vector, [0.0, 0.0], atol=1e-10)  # constant map
    combo = ConvexCombination([0.5, 0.5],
                              [AffineMap.translation([0.5, 0.0]),
                               SetProjector(Singleton([0.0, 0.0]))])
    # R(x) = (x + (0.5, 0))/2; fixed point (0.5, 0); displacement zero
    est2 = displacement_iterative(combo)
    np.testing.assert_allclose(est2.vector, [0.0, 0.0], atol=1e-8)


def test_plateau_does_not_stop_iteration_early():
    # iterates slide along the halfspace boundary with exactly constant
    # residual before reaching the ball; one quiet step must not terminate
    ops = [SetProjector(Ball([0.4, -0.3, 0.1, 0.0], 1.2)),
           AffineMap.translation([0.2, -0.1, 0.05, 0.0]),
           SetProjector(Halfspace([1.0, 1.0, 0.0, 0.0], 0.3))]
    norms = []
    for k in range(3):
        comp = Composition(ops[k:] + ops[:k])
        est = displacement_iterative(comp, max_iter=100_000)
        assert est.converged
        norms.append(est.norm)
    assert max(norms) - min(norms) <= 1e-5


def test_normalized_iterate_translation_is_exact_after_one_step():
    # merely nonexpansive composition flattening to a translation: -x_n/n is
    # exact from the first iterate and stays put for the patience window
    r1, r2 = _reflection([1.0, 0.0]), _reflection([0.0, 1.0])
    comp = Composition([r1, r2])
    est = displacement_iterative(comp)
    assert est.method == NORMALIZED_ITERATE and est.converged
    np.testing.assert_allclose(est.vector, [-1.0, 1.0], atol=1e-12)


def test_normalized_iterate_two_periodic_orbit():
    # T(x) = -x + c alternates between 0 and c from the origin; the averaged
    # estimate heads to the true displacement vector, zero, like 1/n
    T = AffineMap(-np.eye(2), [0.3, -0.2])
    est = displacement_iterative(T, max_iter=50_000, tol=1e-9)
    assert est.method == NORMALIZED_ITERATE
    assert est.norm <= 1e-3


def test_contractive_flatten_uses_residual_route():
    # orthogonal factor inside a strict contraction: not certified averaged,
    # but the flattened matrix has norm < 1 so the residual route is sound
    theta = 0.7
    rot = AffineMap(np.array([[np.cos(theta), -np.sin(theta)],
                              [np.sin(theta), np.cos(theta)]]), [0.1, 0.0])
    shrink = AffineMap(0.9 * np.eye(2), [0.0, 0.2])
    comp = Composition([rot, shrink])
    assert not comp.regularity().is_averaged
    est = displacement_iterative(comp, max_iter=10_000, tol=1e-10)
    assert est.method == RESIDUAL_ITERATION and est.converged
    exact = displacement_exact_affine(comp)
    np.testing.assert_allclose(est.vector, exact.vector, atol=1e-8)


def test_iterative_respects_x0_and_budget():
    comp = Composition([SetProjector(Box([-1.0, -1.0], [1.0, 1.0])),
                        AffineMap.translation([0.2, 0.0])])
    est = displacement_iterative(comp, x0=[5.0, -5.0], max_iter=50)
    assert est.iterations <= 50
    full = displacement_iterative(comp, x0=[5.0, -5.0])
    assert full.converged
    np.testing.assert_allclose(full.vector, [0.0, 0.0], atol=1e-9)


def test_minimal_displacement_dispatch():
    affine = AffineMap.translation([0.1, 0.2])
    assert minimal_displacement(affine).method == EXACT_AFFINE
    curved = SetProjector(Ball([2.0, 0.0], 1.0))
    assert minimal_displacement(curved).method == RESIDUAL_ITERATION


def test_iterative_argument_validation():
    op = AffineMap.identity(2)
    with pytest.raises(ValidationError):
        displacement_iterative(op, max_iter=0)
    with pytest.raises(ValidationError):
        displacement_iterative(op, tol=0.0)
    with pytest.raises(ValidationError):
        displacement_iterative("not an operator")


def test_estimate_container_invariants():
    with pytest.raises(ValidationError):
        DisplacementEstimate(np.zeros(2), 0.0, 3, EXACT_AFFINE, True)  # exact, iters
    with pytest.raises(ValidationError):
        DisplacementEstimate(np.zeros(2), -1.0, 3, RESIDUAL_ITERATION, True)
    with pytest.raises(ValidationError):
        DisplacementEstimate(np.zeros(2), 0.0, 3, "made_up_method", True)


def test_exact_vs_iterative_agree_on_random_contractions():
    rng = np.random.default_rng(21)
    for _ in range(10):
        raw = rng.standard_normal((4, 4))
        M = raw * (0.9 / np.linalg.norm(raw, 2))
        op = AffineMap(M, 0.2 * rng.standard_normal(4))
        exact = displacement_exact_affine(op)
        it = displacement_iterative(op, max_iter=20_000, tol=1e-11)
        assert np.linalg.norm(exact.vector - it.vector) <= 1e-6

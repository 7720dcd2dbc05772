import dataclasses

import numpy as np
import pytest

from subcellsbp.function_space import vandermonde, vandermonde_derivative
from subcellsbp.sbp_cell import (
    gauss_lobatto_operator,
    gauss_radau_operator,
    lobatto_nodes_weights,
    operator_dump,
    radau_nodes_weights,
    scale_operator,
    translate_operator,
    verify_cell_operator,
)


def lagrange_derivative_oracle(nodes):
    """Independent differentiation matrix: fit the cardinal polynomial
    through unit data and differentiate it (numpy polynomial arithmetic)."""
    n = len(nodes)
    d = np.zeros((n, n))
    for j in range(n):
        data = np.zeros(n)
        data[j] = 1.0
        poly = np.polynomial.Polynomial.fit(nodes, data, n - 1)
        d[:, j] = poly.deriv()(nodes)
    return d


def test_lobatto_degree_one_on_left_half():
    op = gauss_lobatto_operator(1, (-1.0, 0.0))
    assert np.allclose(op.x, [-1.0, 0.0])
    assert np.allclose(op.p, [0.5, 0.5])
    assert np.allclose(op.D, [[-1.0, 1.0], [-1.0, 1.0]])


def test_lobatto_degree_one_matches_lagrange_oracle():
    op = gauss_lobatto_operator(1, (-1.0, 1.0))
    assert np.allclose(op.D, [[-0.5, 0.5], [-0.5, 0.5]])
    assert np.allclose(op.D, lagrange_derivative_oracle(op.x), atol=1e-13)


def test_lobatto_three_point_weights_from_moment_equations():
    # oracle: solve the monomial moment system for the 3-point rule directly
    nodes, weights = lobatto_nodes_weights(3)
    vand = np.vander(nodes, 3, increasing=True).T
    moments = np.array([2.0, 0.0, 2.0 / 3.0])
    expected = np.linalg.solve(vand, moments)
    assert np.allclose(weights, expected, atol=1e-14)
    assert np.allclose(weights, [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0])


def test_radau_degree_one_weights_and_nodes():
    left = gauss_radau_operator(1, (-1.0, 0.0), "left")
    assert np.allclose(left.x, [-1.0, -1.0 / 3.0])
    assert np.allclose(left.p, [0.25, 0.75])
    right = gauss_radau_operator(1, (0.0, 1.0), "right")
    assert np.allclose(right.x, [1.0 / 3.0, 1.0])
    assert np.allclose(right.p, [0.75, 0.25])


def test_radau_boundary_operator_uses_extrapolation():
    left = gauss_radau_operator(1, (-1.0, 0.0), "left")
    assert np.allclose(left.B, 0.75 * np.array([[-1.0, -1.0], [-1.0, 3.0]]), atol=1e-14)


def test_radau_rejects_bad_end():
    with pytest.raises(ValueError):
        gauss_radau_operator(1, (-1.0, 0.0), "middle")
    with pytest.raises(ValueError):
        gauss_lobatto_operator(0)


@pytest.mark.parametrize("degree", range(1, 7))
def test_lobatto_diff_matrix_matches_oracle(degree):
    op = gauss_lobatto_operator(degree, (-0.4, 1.1))
    assert np.max(np.abs(op.D - lagrange_derivative_oracle(op.x))) < 1e-10


def test_verify_cell_operator_passes():
    assert verify_cell_operator(gauss_lobatto_operator(3, (-1.0, 1.0)), 1e-12).passed
    assert verify_cell_operator(gauss_radau_operator(4, (0.0, 1.0), "right"), 1e-12).passed


def test_verify_flags_injected_negative_weight():
    op = gauss_lobatto_operator(3, (-1.0, 1.0))
    bad = dataclasses.replace(op, p=op.p * np.array([1, -1, 1, 1]))
    report = verify_cell_operator(bad, 1e-12)
    assert not report.passed
    assert not report["P positive"].passed


@pytest.mark.parametrize("degree,family", [(d, f) for d in range(1, 7) for f in ("lobatto", "radau")])
def test_quadrature_exactness(degree, family):
    cell = (-0.7, 0.9)
    n = degree + 1
    if family == "lobatto":
        nodes, weights = lobatto_nodes_weights(n, cell)
        max_degree = 2 * n - 3
    else:
        nodes, weights = radau_nodes_weights(n, cell, "left")
        max_degree = 2 * n - 2
    for m in range(max_degree + 1):
        exact = (cell[1] ** (m + 1) - cell[0] ** (m + 1)) / (m + 1)
        assert abs(weights @ nodes**m - exact) < 1e-12 * max(1.0, abs(exact))


def test_affine_scaling_covariance():
    ref = gauss_lobatto_operator(4, (-1.0, 1.0))
    cell = (0.3, 0.85)
    direct = gauss_lobatto_operator(4, cell)
    ratio = (cell[1] - cell[0]) / 2.0
    assert np.max(np.abs(direct.p - ref.p * ratio)) < 1e-13
    assert np.max(np.abs(direct.D - ref.D / ratio)) < 1e-13 * np.max(np.abs(direct.D))
    scaled = scale_operator(ref, cell)
    assert np.max(np.abs(scaled.D - direct.D)) < 1e-11
    assert verify_cell_operator(scaled, 1e-12).passed


def test_translate_operator_shares_matrices():
    ref = gauss_lobatto_operator(3, (0.0, 0.25))
    moved = translate_operator(ref, (1.0, 1.25))
    assert moved.D is ref.D and moved.p is ref.p
    assert verify_cell_operator(moved, 1e-11).passed


def test_sbp_identity_on_basis():
    op = gauss_radau_operator(3, (-1.0, 0.2), "left")
    v = vandermonde(op.space, op.nodes)
    dv = vandermonde_derivative(op.space, op.nodes)
    assert np.max(np.abs(op.D @ v - dv)) < 1e-12
    lhs = v.T @ np.diag(op.p) @ (op.D @ v) + (op.D @ v).T @ np.diag(op.p) @ v
    assert np.max(np.abs(lhs - v.T @ op.B @ v)) < 1e-12


def test_operator_dump_has_full_precision():
    op = gauss_lobatto_operator(2, (-1.0, 1.0))
    dump = operator_dump(op)
    assert "nodes" in dump and "Q" in dump
    first_weight = dump.splitlines()[1].split()[1]
    assert float(first_weight) == op.p[0]

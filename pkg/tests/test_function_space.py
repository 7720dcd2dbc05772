import numpy as np
import pytest

from subcellsbp.function_space import NodeSet, polynomial_space, vandermonde, vandermonde_derivative
from subcellsbp.sbp_cell import lobatto_nodes_weights, radau_nodes_weights


def test_degree_one_spans_one_and_x():
    space = polynomial_space(1)
    assert space.dimension == 2
    x = np.linspace(-1, 1, 7)
    got = np.column_stack([f(x) for f in space.basis])
    assert np.allclose(got[:, 0], 1.0)
    assert np.allclose(got[:, 1], x)


def test_degree_zero_is_constants():
    space = polynomial_space(0)
    assert space.dimension == 1
    assert np.allclose(space.basis[0](np.linspace(-1, 1, 5)), 1.0)


def test_cubic_reproduced_by_least_squares_fit():
    # brute-force oracle: fit an arbitrary cubic in the basis on sample
    # nodes, then compare the fitted value at 0.5 with the cubic itself
    space = polynomial_space(3)
    q = np.polynomial.Polynomial([0.3, -1.2, 0.7, 2.5])
    nodes = np.linspace(-1, 1, 9)
    v = vandermonde(space, nodes)
    coeffs = np.linalg.lstsq(v, q(nodes), rcond=None)[0]
    fitted = vandermonde(space, np.array([0.5]))[0] @ coeffs
    assert abs(fitted - q(0.5)) < 1e-13


def test_vandermonde_span_one_x():
    space = polynomial_space(1)
    nodes = NodeSet(np.array([-1.0, 0.0]), (-1.0, 1.0))
    assert np.allclose(vandermonde(space, nodes), [[1.0, -1.0], [1.0, 0.0]])
    assert np.allclose(vandermonde_derivative(space, nodes), [[0.0, 1.0], [0.0, 1.0]])


def test_vandermonde_rank_on_lobatto_points():
    space = polynomial_space(2)
    nodes, _ = lobatto_nodes_weights(3)
    v = vandermonde(space, nodes)
    singular_values = np.linalg.svd(v, compute_uv=False)
    assert np.sum(singular_values > 1e-12 * singular_values[0]) == 3


@pytest.mark.parametrize("degree", range(1, 7))
@pytest.mark.parametrize("rule", ["lobatto", "radau"])
def test_full_rank_on_quadrature_nodes(degree, rule):
    space = polynomial_space(degree)
    for n in range(degree + 1, degree + 4):
        if rule == "lobatto":
            nodes, _ = lobatto_nodes_weights(n, (-0.3, 1.7))
        else:
            nodes, _ = radau_nodes_weights(n, (-0.3, 1.7), "left")
        v = vandermonde(space, nodes)
        assert np.linalg.matrix_rank(v, tol=1e-10) == space.dimension


def test_derivative_matches_node_perturbation():
    # move one node smoothly and difference the Vandermonde entries
    space = polynomial_space(4)
    base = np.array([-0.8, -0.2, 0.1, 0.6, 0.9])
    h = 1e-6
    dv = vandermonde_derivative(space, base)
    fd = (vandermonde(space, base + h) - vandermonde(space, base - h)) / (2 * h)
    assert np.max(np.abs(dv - fd)) / np.max(np.abs(dv)) < 1e-6


@pytest.mark.parametrize("degree", [2, 5])
def test_basis_derivative_is_second_order_in_fd(degree):
    space = polynomial_space(degree)
    probes = np.array([-0.61, 0.07, 0.53])
    for f, df in zip(space.basis, space.basis_derivatives):
        errs = []
        for h in (1e-3, 5e-4):
            errs.append(np.max(np.abs((f(probes + h) - f(probes - h)) / (2 * h) - df(probes))))
        # halving h must shrink the error by ~4 (allowing roundoff floors)
        assert errs[1] <= 0.3 * errs[0] + 1e-12


def test_node_set_rejects_bad_input():
    with pytest.raises(ValueError):
        NodeSet(np.array([0.0, 0.0, 1.0]), (0.0, 1.0))
    with pytest.raises(ValueError):
        NodeSet(np.array([0.0, 2.0]), (0.0, 1.0))
    with pytest.raises(ValueError):
        polynomial_space(-1)


def test_span_key_identifies_equal_spans():
    a = polynomial_space(3, (-1.0, 0.0))
    b = polynomial_space(3, (0.0, 1.0))
    c = polynomial_space(4)
    assert a.same_span(b)
    assert not a.same_span(c)
    assert a.with_interval((0.0, 2.0)).basis[1](np.array([1.0]))[0] == pytest.approx(0.0)

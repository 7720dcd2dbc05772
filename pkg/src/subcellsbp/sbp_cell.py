"""Classical SBP operators on a single cell, built from quadrature rules.

Each operator is the triple (P, Q, B) with derivative D = P^{-1} Q on the
nodes of a Gauss-Lobatto or Gauss-Radau rule, exact for polynomials up to
the requested degree.  These cells are the raw material for the sub-cell
assembly in :mod:`subcellsbp.subcell`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import roots_jacobi

from .function_space import FunctionSpace, NodeSet, polynomial_space, vandermonde, vandermonde_derivative
from .reports import VerificationReport

Interval = Tuple[float, float]


# ---------------------------------------------------------------------------
# quadrature rules
# ---------------------------------------------------------------------------

def _interpolatory_weights(nodes: np.ndarray, cell: Interval) -> np.ndarray:
    """Weights making the rule exact for all polynomials of degree < len(nodes).

    Solved from the moment equations in the Legendre basis of the cell, which
    stays well conditioned where a monomial Vandermonde would not.
    """
    space = polynomial_space(len(nodes) - 1, cell)
    v = vandermonde(space, nodes)
    length = cell[1] - cell[0]
    # Legendre moments: only the constant basis function has nonzero integral
    moments = np.zeros(len(nodes))
    moments[0] = length * space.basis[0](np.array([0.5 * (cell[0] + cell[1])]))[0]
    return np.linalg.solve(v.T, moments)


def _map_to_cell(ref_nodes: np.ndarray, cell: Interval) -> np.ndarray:
    x_l, x_r = cell
    return x_l + 0.5 * (ref_nodes + 1.0) * (x_r - x_l)


def lobatto_nodes_weights(n: int, cell: Interval = (-1.0, 1.0)) -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Lobatto rule on ``cell`` (exact through degree 2n-3)."""
    if n < 2:
        raise ValueError("Lobatto rule needs at least 2 points")
    interior = roots_jacobi(n - 2, 1.0, 1.0)[0] if n > 2 else np.array([])
    ref = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    nodes = _map_to_cell(ref, cell)
    nodes[0], nodes[-1] = cell  # pin endpoints exactly
    return nodes, _interpolatory_weights(nodes, cell)


def radau_nodes_weights(n: int, cell: Interval = (-1.0, 1.0), fixed_end: str = "left") -> Tuple[np.ndarray, np.ndarray]:
    """n-point Gauss-Radau rule on ``cell`` (exact through degree 2n-2).

    ``fixed_end`` selects which cell endpoint belongs to the node set.
    """
    if n < 2:
        raise ValueError("Radau rule needs at least 2 points")
    if fixed_end not in ("left", "right"):
        raise ValueError(f"fixed_end must be 'left' or 'right', got {fixed_end!r}")
    interior = roots_jacobi(n - 1, 0.0, 1.0)[0]
    if fixed_end == "left":
        ref = np.concatenate(([-1.0], np.sort(interior)))
    else:
        ref = np.concatenate((np.sort(-interior), [1.0]))
    nodes = _map_to_cell(ref, cell)
    if fixed_end == "left":
        nodes[0] = cell[0]
    else:
        nodes[-1] = cell[1]
    return nodes, _interpolatory_weights(nodes, cell)


# ---------------------------------------------------------------------------
# differentiation and projection
# ---------------------------------------------------------------------------

def barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    w = np.ones(len(nodes))
    for j in range(len(nodes)):
        w[j] = 1.0 / np.prod(nodes[j] - np.delete(nodes, j))
    return w


def lagrange_diff_matrix(nodes: np.ndarray) -> np.ndarray:
    """Derivative matrix of the Lagrange basis on ``nodes`` (barycentric form)."""
    n = len(nodes)
    w = barycentric_weights(nodes)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                d[i, j] = (w[j] / w[i]) / (nodes[i] - nodes[j])
        # negative-sum trick: constants are differentiated to exactly zero
        d[i, i] = -np.sum(d[i, np.arange(n) != i])
    return d


def lagrange_eval_vector(nodes: np.ndarray, point: float) -> np.ndarray:
    """Values of the Lagrange basis on ``nodes`` at ``point`` (extrapolation allowed)."""
    diffs = point - nodes
    exact = np.isclose(diffs, 0.0, atol=1e-14 * max(1.0, abs(point)))
    if np.any(exact):
        e = np.zeros(len(nodes))
        e[np.argmax(exact)] = 1.0
        return e
    w = barycentric_weights(nodes)
    terms = w / diffs
    return terms / np.sum(terms)


# ---------------------------------------------------------------------------
# cell operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellOperator:
    """SBP triple on one cell: D = P^{-1} Q with Q + Q^T = B.

    ``e_left``/``e_right`` project nodal values to the cell endpoints; for
    rules that exclude an endpoint they extrapolate within the exactness
    space.  ``p`` holds the diagonal of P.
    """

    nodes: NodeSet
    p: np.ndarray
    Q: np.ndarray
    B: np.ndarray
    D: np.ndarray
    space: FunctionSpace
    e_left: np.ndarray
    e_right: np.ndarray

    @property
    def cell(self) -> Interval:
        return self.nodes.interval

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def x(self) -> np.ndarray:
        return self.nodes.nodes

    @property
    def S(self) -> np.ndarray:
        """Skew part of Q (Q = S + B/2)."""
        return self.Q - 0.5 * self.B


def _cell_from_rule(nodes: np.ndarray, weights: np.ndarray, cell: Interval, degree: int) -> CellOperator:
    space = polynomial_space(degree, cell)
    d_mat = lagrange_diff_matrix(nodes)
    e_l = lagrange_eval_vector(nodes, cell[0])
    e_r = lagrange_eval_vector(nodes, cell[1])
    b_mat = np.outer(e_r, e_r) - np.outer(e_l, e_l)
    q_mat = np.diag(weights) @ d_mat
    return CellOperator(
        nodes=NodeSet(nodes, cell),
        p=weights,
        Q=q_mat,
        B=b_mat,
        D=d_mat,
        space=space,
        e_left=e_l,
        e_right=e_r,
    )


def gauss_lobatto_operator(degree: int, cell: Interval = (-1.0, 1.0)) -> CellOperator:
    """P_degree-exact SBP operator on degree+1 Gauss-Lobatto nodes."""
    if degree < 1:
        raise ValueError("gauss_lobatto_operator needs degree >= 1 (no 1-point Lobatto rule)")
    nodes, weights = lobatto_nodes_weights(degree + 1, cell)
    return _cell_from_rule(nodes, weights, cell, degree)


def gauss_radau_operator(degree: int, cell: Interval = (-1.0, 1.0), fixed_end: str = "left") -> CellOperator:
    """P_degree-exact SBP operator on degree+1 Gauss-Radau nodes.

    The endpoint excluded by the rule is reached by exact polynomial
    extrapolation in the boundary operator.
    """
    if degree < 1:
        raise ValueError("gauss_radau_operator needs degree >= 1")
    nodes, weights = radau_nodes_weights(degree + 1, cell, fixed_end)
    return _cell_from_rule(nodes, weights, cell, degree)


def scale_operator(ref: CellOperator, cell: Interval) -> CellOperator:
    """Affine image of a reference operator: P scales with the cell length,
    D inversely, B and the boundary projections are invariant."""
    x_l, x_r = cell
    ratio = (x_r - x_l) / (ref.cell[1] - ref.cell[0])
    nodes = x_l + (ref.x - ref.cell[0]) * ratio
    nodes[0], nodes[-1] = _pin_endpoints(ref, cell, nodes)
    return CellOperator(
        nodes=NodeSet(nodes, cell),
        p=ref.p * ratio,
        Q=ref.Q,
        B=ref.B,
        D=ref.D / ratio,
        space=ref.space.with_interval(cell),
        e_left=ref.e_left,
        e_right=ref.e_right,
    )


def _pin_endpoints(ref: CellOperator, cell: Interval, nodes):
    left = cell[0] if abs(ref.x[0] - ref.cell[0]) == 0 else nodes[0]
    right = cell[1] if abs(ref.x[-1] - ref.cell[1]) == 0 else nodes[-1]
    return left, right


def translate_operator(ref: CellOperator, cell: Interval) -> CellOperator:
    """Shift a reference operator to an equal-width cell, sharing its arrays.

    Element widths from a uniform partition agree with the reference only up
    to roundoff; sharing the matrices keeps same-size elements bitwise
    identical, which the solver exploits when batching volume terms.
    """
    nodes = cell[0] + (ref.x - ref.cell[0])
    nodes[0], nodes[-1] = _pin_endpoints(ref, cell, nodes)
    return CellOperator(
        nodes=NodeSet(nodes, cell),
        p=ref.p,
        Q=ref.Q,
        B=ref.B,
        D=ref.D,
        space=ref.space.with_interval(cell),
        e_left=ref.e_left,
        e_right=ref.e_right,
    )


def verify_cell_operator(op: CellOperator, tol: float = 1e-12) -> VerificationReport:
    """Check the SBP axioms; failures are report entries, not exceptions."""
    report = VerificationReport(f"cell operator on [{op.cell[0]:g}, {op.cell[1]:g}]")
    v = vandermonde(op.space, op.nodes)
    dv = vandermonde_derivative(op.space, op.nodes)

    min_p = float(np.min(op.p))
    report.add("P positive", 0.0 if min_p > 0 else abs(min_p) + 1.0, tol,
               detail=f"min weight {min_p:.3e}")
    report.add("Q + Q^T = B", np.max(np.abs(op.Q + op.Q.T - op.B)), tol)
    scale = max(1.0, np.max(np.abs(dv)))
    report.add("D exactness", np.max(np.abs(op.D @ v - dv)) / scale, tol)
    boundary = v.T @ op.B @ v
    f_r = vandermonde(op.space, np.array([op.cell[1]]))[0]
    f_l = vandermonde(op.space, np.array([op.cell[0]]))[0]
    exact = np.outer(f_r, f_r) - np.outer(f_l, f_l)
    report.add("B exactness", np.max(np.abs(boundary - exact)), tol)
    report.add("D = P^{-1} Q", np.max(np.abs(np.diag(op.p) @ op.D - op.Q)), tol)
    return report


def operator_dump(op: CellOperator) -> str:
    """Plain-text row-major dump (17 significant digits) for golden files."""
    parts = [f"nodes {_fmt_row(op.x)}", f"P {_fmt_row(op.p)}"]
    for name, mat in (("Q", op.Q), ("B", op.B), ("D", op.D)):
        for row in np.atleast_2d(mat):
            parts.append(f"{name} {_fmt_row(row)}")
    return "\n".join(parts)


def _fmt_row(row: np.ndarray) -> str:
    return " ".join(f"{val:.17g}" for val in np.asarray(row).ravel())

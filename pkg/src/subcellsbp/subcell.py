"""Sub-cell SBP operators: assembly, projection synthesis, and verification.

A sub-cell operator differentiates on a cell [w_L, w_R] while mimicking
integration by parts separately on the two sub-cells [w_L, w_M] and
[w_M, w_R].  It is assembled block-diagonally from two abutting cell
operators; the block structure is not a convenience but a necessity (any
sub-cell SBP operator decomposes this way), which the structural checker
asserts.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.linalg import block_diag

from .function_space import FunctionSpace, NodeSet, vandermonde, vandermonde_derivative
from .reports import VerificationReport
from .sbp_cell import CellOperator

Interval = Tuple[float, float]

ABUT_TOL = 1e-12


@dataclass(frozen=True)
class SubcellOperator:
    """Operator bundle on nodes x = [x_L; x_R] with N = N_L + N_R.

    P_L/P_R (diagonals ``pl``/``pr``) are supported on their sub-cell's nodes
    only; S_L/S_R carry the skew parts; B_L/B_R the boundary operators of the
    two sub-cells.  The projections pick out the four boundary/split values:
    ``e_left`` at w_L, ``e_mid_left``/``e_mid_right`` one-sided at w_M, and
    ``e_right`` at w_R.
    """

    cell: Interval
    split: float
    x: np.ndarray
    n_left: int
    D: np.ndarray
    p: np.ndarray
    pl: np.ndarray
    pr: np.ndarray
    S_L: np.ndarray
    S_R: np.ndarray
    B_L: np.ndarray
    B_R: np.ndarray
    e_left: np.ndarray
    e_mid_left: np.ndarray
    e_mid_right: np.ndarray
    e_right: np.ndarray
    space: FunctionSpace

    @property
    def n_nodes(self) -> int:
        return self.x.size

    @property
    def n_right(self) -> int:
        return self.n_nodes - self.n_left

    @property
    def B(self) -> np.ndarray:
        return self.B_L + self.B_R

    @property
    def S(self) -> np.ndarray:
        return self.S_L + self.S_R

    @property
    def Q(self) -> np.ndarray:
        return self.S + 0.5 * self.B

    @property
    def Q_L(self) -> np.ndarray:
        return self.S_L + 0.5 * self.B_L

    @property
    def Q_R(self) -> np.ndarray:
        return self.S_R + 0.5 * self.B_R

    def left_block(self) -> CellOperator:
        """Diagonal block on x_L, re-wrapped as a plain cell operator."""
        return self._block(slice(0, self.n_left), (self.cell[0], self.split))

    def right_block(self) -> CellOperator:
        return self._block(slice(self.n_left, self.n_nodes), (self.split, self.cell[1]))

    def _block(self, sl: slice, cell: Interval) -> CellOperator:
        if sl.start == 0:
            p_blk, q_blk, b_blk = self.pl[sl], self.Q_L[sl, sl], self.B_L[sl, sl]
            e_l, e_r = self.e_left[sl], self.e_mid_left[sl]
        else:
            p_blk, q_blk, b_blk = self.pr[sl], self.Q_R[sl, sl], self.B_R[sl, sl]
            e_l, e_r = self.e_mid_right[sl], self.e_right[sl]
        return CellOperator(
            nodes=NodeSet(self.x[sl], cell),
            p=p_blk,
            Q=q_blk,
            B=b_blk,
            D=self.D[sl, sl],
            space=self.space.with_interval(cell),
            e_left=e_l,
            e_right=e_r,
        )


def projection_vector(space: FunctionSpace, nodes, point: float, mode: str = "interpolation") -> np.ndarray:
    """Vector e with e^T f(nodes) = f(point) for every basis function f.

    ``interpolation`` requires exactly K nodes; ``min_norm_least_squares``
    picks the minimal-Euclidean-norm solution of the underdetermined
    exactness system when there are more.
    """
    x = nodes.nodes if isinstance(nodes, NodeSet) else np.asarray(nodes, dtype=float)
    v = vandermonde(space, x)
    if np.linalg.matrix_rank(v, tol=1e-10 * max(1.0, np.max(np.abs(v)))) < space.dimension:
        raise ValueError("space not unisolvent on nodes")
    target = vandermonde(space, np.array([point]))[0]
    if mode == "interpolation":
        if len(x) != space.dimension:
            raise ValueError("interpolation mode needs exactly K nodes")
        return np.linalg.solve(v.T, target)
    if mode == "min_norm_least_squares":
        if len(x) < space.dimension:
            raise ValueError("least-squares mode needs at least K nodes")
        return np.linalg.lstsq(v.T, target, rcond=None)[0]
    raise ValueError(f"unknown projection mode {mode!r}")


def assemble_subcell(left: CellOperator, right: CellOperator) -> SubcellOperator:
    """Block-diagonal assembly of two abutting cell operators.

    The shared endpoint becomes the split point w_M.  Both inputs must be
    exact for the same span; the result is exact for that span expressed on
    the union cell.
    """
    scale = max(1.0, abs(left.cell[1]))
    if abs(left.cell[1] - right.cell[0]) > ABUT_TOL * scale:
        raise ValueError("sub-cells do not abut")
    if not left.space.same_span(right.space):
        raise ValueError("sub-cell operators have mismatched exactness spaces")

    cell = (left.cell[0], right.cell[1])
    split = left.cell[1]
    n_l, n_r = left.n_nodes, right.n_nodes
    n = n_l + n_r
    space = left.space.with_interval(cell)

    zeros_l = np.zeros(n_l)
    zeros_r = np.zeros(n_r)
    e_left = np.concatenate([left.e_left, zeros_r])
    e_ml = np.concatenate([left.e_right, zeros_r])
    e_mr = np.concatenate([zeros_l, right.e_left])
    e_right = np.concatenate([zeros_l, right.e_right])

    return SubcellOperator(
        cell=cell,
        split=split,
        x=np.concatenate([left.x, right.x]),
        n_left=n_l,
        D=block_diag(left.D, right.D),
        p=np.concatenate([left.p, right.p]),
        pl=np.concatenate([left.p, zeros_r]),
        pr=np.concatenate([zeros_l, right.p]),
        S_L=block_diag(left.S, np.zeros((n_r, n_r))),
        S_R=block_diag(np.zeros((n_l, n_l)), right.S),
        B_L=block_diag(left.B, np.zeros((n_r, n_r))),
        B_R=block_diag(np.zeros((n_l, n_l)), right.B),
        e_left=e_left,
        e_mid_left=e_ml,
        e_mid_right=e_mr,
        e_right=e_right,
        space=space,
    )


def verify_subcell(op: SubcellOperator, tol: float = 1e-12) -> VerificationReport:
    """Check every defining condition, plus the sub-cell SBP identity itself."""
    report = VerificationReport(
        f"sub-cell operator on [{op.cell[0]:g}, {op.cell[1]:g}] split at {op.split:g}"
    )
    v = vandermonde(op.space, op.x)
    dv = vandermonde_derivative(op.space, op.x)
    n_l = op.n_left

    scale = max(1.0, np.max(np.abs(dv)))
    report.add("(i) derivative exactness", np.max(np.abs(op.D @ v - dv)) / scale, tol)

    left_mask = np.zeros(op.n_nodes, dtype=bool)
    left_mask[:n_l] = True
    pos_ok = np.all(op.pl[left_mask] > 0) and np.all(op.pr[~left_mask] > 0)
    support_ok = np.all(op.pl[~left_mask] == 0) and np.all(op.pr[left_mask] == 0)
    report.add("(ii) norm positivity/support", 0.0 if (pos_ok and support_ok) else 1.0, tol,
               detail="P_L/P_R positive on own nodes, zero elsewhere")

    for tag, p_diag, s_mat, b_mat in (("L", op.pl, op.S_L, op.B_L), ("R", op.pr, op.S_R, op.B_R)):
        q_mat = s_mat + 0.5 * b_mat
        report.add(f"(iii) P_{tag} D = S_{tag} + B_{tag}/2",
                   np.max(np.abs(np.diag(p_diag) @ op.D - q_mat)), tol)
        report.add(f"(iii) S_{tag} skew", np.max(np.abs(s_mat + s_mat.T)), tol)

    f_l = vandermonde(op.space, np.array([op.cell[0]]))[0]
    f_m = vandermonde(op.space, np.array([op.split]))[0]
    f_r = vandermonde(op.space, np.array([op.cell[1]]))[0]
    report.add("(iv) B_L exactness",
               np.max(np.abs(v.T @ op.B_L @ v - (np.outer(f_m, f_m) - np.outer(f_l, f_l)))), tol)
    report.add("(iv) B_R exactness",
               np.max(np.abs(v.T @ op.B_R @ v - (np.outer(f_r, f_r) - np.outer(f_m, f_m)))), tol)

    q_sum = np.max(np.abs(op.Q - (op.Q_L + op.Q_R)))
    p_sum = np.max(np.abs(op.p - (op.pl + op.pr)))
    b_sum = np.max(np.abs(op.B - (op.B_L + op.B_R)))
    report.add("(v) additivity", max(q_sum, p_sum, b_sum), tol)

    for tag, e_vec in (("e_L", op.e_left), ("e_ML", op.e_mid_left)):
        report.add(f"support {tag}", np.max(np.abs(e_vec[n_l:]), initial=0.0), tol)
    for tag, e_vec in (("e_MR", op.e_mid_right), ("e_R", op.e_right)):
        report.add(f"support {tag}", np.max(np.abs(e_vec[:n_l]), initial=0.0), tol)

    # discrete integration by parts on each sub-cell, sampled on all basis pairs
    for tag, p_diag, b_mat in (("L", op.pl, op.B_L), ("R", op.pr, op.B_R)):
        lhs = v.T @ np.diag(p_diag) @ (op.D @ v) + (op.D @ v).T @ np.diag(p_diag) @ v
        report.add(f"SBP identity on {tag}", np.max(np.abs(lhs - v.T @ b_mat @ v)), tol)

    return report


def existence_residuals(op: SubcellOperator) -> Tuple[np.ndarray, np.ndarray]:
    """Residual matrices of the two algebraic existence conditions.

    Both vanish exactly when the bundle is a valid sub-cell SBP operator:
    the first couples exactness to the decomposition, the second forces the
    norm/skew/boundary parts of the two sub-cells to be compatible.
    """
    v = vandermonde(op.space, op.x)
    dv = vandermonde_derivative(op.space, op.x)
    p_l, p_r = np.diag(op.pl), np.diag(op.pr)
    r1 = op.S_L @ v + op.S_R @ v - p_l @ dv - p_r @ dv + 0.5 * op.B @ v
    r2 = p_l @ op.S_R - p_r @ op.S_L + 0.5 * (p_l @ op.B_R - p_r @ op.B_L)
    return r1, r2


def structural_check(op: SubcellOperator) -> VerificationReport:
    """Assert the necessary block structure of S_L/S_R and one-sided projections."""
    report = VerificationReport("sub-cell structure")
    n_l = op.n_left
    blocks = {
        "S_L[1,2]": op.S_L[:n_l, n_l:],
        "S_L[2,1]": op.S_L[n_l:, :n_l],
        "S_L[2,2]": op.S_L[n_l:, n_l:],
        "S_R[1,1]": op.S_R[:n_l, :n_l],
        "S_R[1,2]": op.S_R[:n_l, n_l:],
        "S_R[2,1]": op.S_R[n_l:, :n_l],
    }
    for name, blk in blocks.items():
        report.add(f"{name} = 0", np.max(np.abs(blk), initial=0.0), 0.0)

    for name, e_vec, outside in (
        ("e_L", op.e_left, slice(n_l, None)),
        ("e_ML", op.e_mid_left, slice(n_l, None)),
        ("e_MR", op.e_mid_right, slice(0, n_l)),
        ("e_R", op.e_right, slice(0, n_l)),
    ):
        vals = np.abs(e_vec[outside])
        worst = float(np.max(vals, initial=0.0))
        detail = ""
        if worst > 0:
            offset = outside.start or 0
            detail = f"mass at node index {offset + int(np.argmax(vals))}"
        report.add(f"{name} one-sided", worst, 0.0, detail)
    return report

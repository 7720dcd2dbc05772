"""Overset element meshes with sub-cell operators at the cross-over points.

Two uniform element meshes cover [a, c] and [b, d].  In sub-cell coupling
mode the u-element containing b and the v-element containing c are split at
those points and carry sub-cell operators; every other element carries a
plain cell operator.  The baseline variant skips the splits and instead
stores donor-element interpolation vectors for the cross-grid values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from .sbp_cell import (CellOperator, gauss_lobatto_operator, gauss_radau_operator,
                       lagrange_eval_vector, translate_operator)
from .subcell import SubcellOperator, assemble_subcell

Interval = Tuple[float, float]

ALIGN_REL_TOL = 1e-12


@dataclass(frozen=True)
class OversetDomain:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        if not (self.a < self.b < self.c < self.d):
            raise ValueError("overset domain needs a < b < c < d")

    @property
    def omega_u(self) -> Interval:
        return (self.a, self.c)

    @property
    def omega_v(self) -> Interval:
        return (self.b, self.d)

    @property
    def overlap(self) -> Interval:
        return (self.b, self.c)


@dataclass
class Element:
    side: str
    index: int
    interval: Interval
    op: Union[CellOperator, SubcellOperator]
    offset: int  # first global node index

    @property
    def n_nodes(self) -> int:
        return self.op.x.size if isinstance(self.op, SubcellOperator) else self.op.n_nodes

    @property
    def x(self) -> np.ndarray:
        return self.op.x

    @property
    def p(self) -> np.ndarray:
        return self.op.p

    @property
    def is_split(self) -> bool:
        return isinstance(self.op, SubcellOperator)

    @property
    def e_left(self) -> np.ndarray:
        return self.op.e_left

    @property
    def e_right(self) -> np.ndarray:
        return self.op.e_right

    @property
    def slice(self) -> slice:
        return slice(self.offset, self.offset + self.n_nodes)


@dataclass(frozen=True)
class Projection:
    """Extraction of one point value from the global nodal state."""

    elem: Element
    vector: np.ndarray

    def apply(self, state2d: np.ndarray) -> np.ndarray:
        return self.vector @ state2d[self.elem.slice]

    def scatter(self, out2d: np.ndarray, value: np.ndarray) -> None:
        """Add ``vector * value / p`` into the element's rows (a SAT kick)."""
        out2d[self.elem.slice] += np.outer(self.vector / self.elem.p, value)


@dataclass
class OversetMesh:
    domain: OversetDomain
    degree: int
    family: str
    coupling: str
    u_elements: List[Element]
    v_elements: List[Element]
    u_split_index: Optional[int]
    v_split_index: Optional[int]
    # cross-grid donors (baseline mode only)
    u_donor_b: Optional[Projection] = None
    v_donor_c: Optional[Projection] = None
    _cache: dict = field(default_factory=dict, repr=False)

    # -- layout -----------------------------------------------------------
    @property
    def elements(self) -> List[Element]:
        return self.u_elements + self.v_elements

    @property
    def n_u_nodes(self) -> int:
        last = self.u_elements[-1]
        return last.offset + last.n_nodes

    @property
    def n_nodes(self) -> int:
        last = self.v_elements[-1]
        return last.offset + last.n_nodes

    @property
    def u_slice(self) -> slice:
        return slice(0, self.n_u_nodes)

    @property
    def v_slice(self) -> slice:
        return slice(self.n_u_nodes, self.n_nodes)

    @property
    def x(self) -> np.ndarray:
        if "x" not in self._cache:
            self._cache["x"] = np.concatenate([e.x for e in self.elements])
        return self._cache["x"]

    # -- quadrature -------------------------------------------------------
    @property
    def w_u(self) -> np.ndarray:
        """Full u-mesh quadrature weights (integrates over [a, c])."""
        if "w_u" not in self._cache:
            self._cache["w_u"] = np.concatenate([e.p for e in self.u_elements])
        return self._cache["w_u"]

    @property
    def w_v(self) -> np.ndarray:
        if "w_v" not in self._cache:
            self._cache["w_v"] = np.concatenate([e.p for e in self.v_elements])
        return self._cache["w_v"]

    @property
    def w_u_bar(self) -> np.ndarray:
        """u-mesh weights restricted to [a, b]: the non-overlap share.

        Full elements left of b keep their weights; the split element keeps
        only its left-block share; everything in the overlap gets zero.  For
        baseline meshes (no split) the b-element's weights are chopped by a
        node indicator, a diagnostics-only approximation.
        """
        if "w_u_bar" not in self._cache:
            parts = []
            b = self.domain.b
            for e in self.u_elements:
                if e.is_split:
                    w = np.concatenate([e.op.pl[: e.op.n_left], np.zeros(e.op.n_right)])
                elif e.interval[1] <= b + ALIGN_REL_TOL:
                    w = e.p.copy()
                elif e.interval[0] >= b - ALIGN_REL_TOL:
                    w = np.zeros(e.n_nodes)
                else:
                    w = np.where(e.x <= b, e.p, 0.0)
                parts.append(w)
            self._cache["w_u_bar"] = np.concatenate(parts)
        return self._cache["w_u_bar"]

    @property
    def w_u_overlap(self) -> np.ndarray:
        return self.w_u - self.w_u_bar

    # -- projections ------------------------------------------------------
    def projection(self, name: str) -> Projection:
        """Named boundary/split-point extraction.

        u-side: ``u_a``, ``u_b_left``, ``u_b_right``, ``u_c``;
        v-side: ``v_b``, ``v_c_left``, ``v_c_right``, ``v_d``.
        """
        if name in self._cache:
            return self._cache[name]
        proj = self._build_projection(name)
        self._cache[name] = proj
        return proj

    def _build_projection(self, name: str) -> Projection:
        if name == "u_a":
            e = self.u_elements[0]
            return Projection(e, _left_vector(e))
        if name == "u_c":
            e = self.u_elements[-1]
            return Projection(e, _right_vector(e))
        if name == "v_b":
            e = self.v_elements[0]
            return Projection(e, _left_vector(e))
        if name == "v_d":
            e = self.v_elements[-1]
            return Projection(e, _right_vector(e))
        if name in ("u_b_left", "u_b_right"):
            return self._split_point_projection("u", name.endswith("left"))
        if name in ("v_c_left", "v_c_right"):
            return self._split_point_projection("v", name.endswith("left"))
        raise KeyError(name)

    def _split_point_projection(self, side: str, left: bool) -> Projection:
        elems = self.u_elements if side == "u" else self.v_elements
        split_idx = self.u_split_index if side == "u" else self.v_split_index
        point = self.domain.b if side == "u" else self.domain.c
        if split_idx is not None:
            e = elems[split_idx]
            vec = e.op.e_mid_left if left else e.op.e_mid_right
            return Projection(e, vec)
        if self.coupling == "baseline":
            donor = self.u_donor_b if side == "u" else self.v_donor_c
            if donor is not None:
                return donor
        # point aligned with an element boundary: use the one-sided neighbor
        for j, e in enumerate(elems[:-1]):
            if abs(e.interval[1] - point) <= ALIGN_REL_TOL * _elem_len(e):
                target = e if left else elems[j + 1]
                vec = _right_vector(target) if left else _left_vector(target)
                return Projection(target, vec)
        raise ValueError(f"no split or aligned boundary at {point} on the {side}-mesh")

    # -- reporting --------------------------------------------------------
    def summary(self) -> str:
        lines = [
            f"overset mesh on [{self.domain.a:g}, {self.domain.d:g}]"
            f" (overlap [{self.domain.b:g}, {self.domain.c:g}]), degree {self.degree},"
            f" family {self.family}, coupling {self.coupling}",
        ]
        for side, elems in (("u", self.u_elements), ("v", self.v_elements)):
            lines.append(f"  {side}-mesh: {len(elems)} elements, {sum(e.n_nodes for e in elems)} nodes")
            for e in elems:
                kind = "sub-cell" if e.is_split else "cell"
                extra = f" split at {e.op.split:g}" if e.is_split else ""
                lines.append(f"    [{e.interval[0]: .6g}, {e.interval[1]: .6g}]  {kind}{extra}")
        return "\n".join(lines)


def _elem_len(e: Element) -> float:
    return e.interval[1] - e.interval[0]


def _left_vector(e: Element) -> np.ndarray:
    return e.op.e_left


def _right_vector(e: Element) -> np.ndarray:
    return e.op.e_right


def _cell_operator(degree: int, cell: Interval, family: str, part: str = "whole") -> CellOperator:
    if family == "lobatto":
        return gauss_lobatto_operator(degree, cell)
    if family == "radau":
        side = {"whole": "left", "left": "left", "right": "right"}[part]
        return gauss_radau_operator(degree, cell, side)
    raise ValueError(f"unknown operator family {family!r}")


def _partition(interval: Interval, n: int) -> np.ndarray:
    return np.linspace(interval[0], interval[1], n + 1)


def _build_side(side: str, interval: Interval, n: int, degree: int, family: str,
                split_point: Optional[float]) -> Tuple[List[Element], Optional[int]]:
    edges = _partition(interval, n)
    h = (interval[1] - interval[0]) / n
    split_index = None
    if split_point is not None:
        if not (interval[0] < split_point < interval[1]):
            raise ValueError(f"point {split_point} outside the {side}-mesh {interval}")
        j = int(np.searchsorted(edges, split_point) - 1)
        j = min(max(j, 0), n - 1)
        aligned = np.min(np.abs(edges - split_point)) <= ALIGN_REL_TOL * h
        if not aligned:
            split_index = j

    # one reference operator per side; equal-size elements share its scaled
    # matrices, which keeps them bitwise identical across the mesh
    reference = _cell_operator(degree, (0.0, h), family)
    elements: List[Element] = []
    offset = 0
    for j in range(n):
        cell = (float(edges[j]), float(edges[j + 1]))
        if split_index == j:
            left = _cell_operator(degree, (cell[0], split_point), family, "left")
            right = _cell_operator(degree, (split_point, cell[1]), family, "right")
            op: Union[CellOperator, SubcellOperator] = assemble_subcell(left, right)
        else:
            op = translate_operator(reference, cell)
        elem = Element(side=side, index=j, interval=cell, op=op, offset=offset)
        elements.append(elem)
        offset += elem.n_nodes
    return elements, split_index


def build_overset_mesh(domain: OversetDomain, n_u: int, n_v: int, degree: int,
                       family: str = "lobatto") -> OversetMesh:
    """Sub-cell coupled mesh: the elements containing b and c are split there."""
    if n_u < 1 or n_v < 1 or degree < 1:
        raise ValueError("need n_u, n_v >= 1 and degree >= 1")
    u_elements, u_split = _build_side("u", domain.omega_u, n_u, degree, family, domain.b)
    v_elements, v_split = _build_side("v", domain.omega_v, n_v, degree, family, domain.c)
    for e in v_elements:
        e.offset += u_elements[-1].offset + u_elements[-1].n_nodes
    return OversetMesh(
        domain=domain, degree=degree, family=family, coupling="subcell",
        u_elements=u_elements, v_elements=v_elements,
        u_split_index=u_split, v_split_index=v_split,
    )


def baseline_overset_mesh(domain: OversetDomain, n_u: int, n_v: int, degree: int) -> OversetMesh:
    """Interpolation-coupled mesh: plain operators, cross-grid donor vectors."""
    if n_u < 1 or n_v < 1 or degree < 1:
        raise ValueError("need n_u, n_v >= 1 and degree >= 1")
    u_elements, _ = _build_side("u", domain.omega_u, n_u, degree, "lobatto", None)
    v_elements, _ = _build_side("v", domain.omega_v, n_v, degree, "lobatto", None)
    for e in v_elements:
        e.offset += u_elements[-1].offset + u_elements[-1].n_nodes
    mesh = OversetMesh(
        domain=domain, degree=degree, family="lobatto", coupling="baseline",
        u_elements=u_elements, v_elements=v_elements,
        u_split_index=None, v_split_index=None,
    )
    mesh.u_donor_b = _donor(u_elements, domain.b)
    mesh.v_donor_c = _donor(v_elements, domain.c)
    return mesh


def _donor(elements: List[Element], point: float) -> Projection:
    """Full-element Lagrange interpolation at an interior cross-grid point.

    When the point sits on an element boundary the left neighbor donates
    (the vector degenerates to a unit vector there).
    """
    for e in elements:
        h = _elem_len(e)
        if e.interval[0] - ALIGN_REL_TOL * h <= point <= e.interval[1] + ALIGN_REL_TOL * h:
            return Projection(e, lagrange_eval_vector(e.x, point))
    raise ValueError(f"no donor element contains {point}")

"""Finite-dimensional exactness spaces and nodal (Vandermonde) evaluation.

A function space bundles K basis functions together with their exact
derivatives.  Operators elsewhere in the package are "exact" with respect
to such a space: they differentiate / integrate every member without error.
Only polynomial spaces are constructed here, but the container is generic
so that other C^1 spaces could be plugged in.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial.legendre import Legendre


@dataclass(frozen=True)
class FunctionSpace:
    """A K-dimensional space with evaluable basis and exact basis derivatives.

    ``span_key`` identifies the span independently of the concrete basis
    representation; two polynomial spaces of the same degree share one key
    even if their bases are conditioned on different intervals.
    """

    dimension: int
    basis: Tuple[Callable[[np.ndarray], np.ndarray], ...]
    basis_derivatives: Tuple[Callable[[np.ndarray], np.ndarray], ...]
    descriptor: str
    span_key: tuple = field(default=())

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("function space needs dimension >= 1")
        if len(self.basis) != self.dimension or len(self.basis_derivatives) != self.dimension:
            raise ValueError("basis lists must match the stated dimension")

    def same_span(self, other: "FunctionSpace") -> bool:
        return bool(self.span_key) and self.span_key == other.span_key

    def with_interval(self, interval: Tuple[float, float]) -> "FunctionSpace":
        """Re-express the space on another interval (same span)."""
        if self.span_key and self.span_key[0] == "poly":
            return polynomial_space(self.span_key[1], interval)
        return self


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing nodes contained in an interval."""

    nodes: np.ndarray
    interval: Tuple[float, float]

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", x)
        if x.ndim != 1 or x.size == 0:
            raise ValueError("nodes must be a nonempty 1D array")
        if np.any(np.diff(x) <= 0):
            raise ValueError("nodes must be strictly increasing")
        left, right = self.interval
        # tiny slack for roundoff in affinely mapped endpoints
        tol = 1e-12 * max(1.0, abs(left), abs(right))
        if x[0] < left - tol or x[-1] > right + tol:
            raise ValueError("nodes must lie inside the interval")

    def __len__(self) -> int:
        return self.nodes.size


def polynomial_space(degree: int, interval: Tuple[float, float] = (-1.0, 1.0)) -> FunctionSpace:
    """All polynomials up to ``degree``, in a Legendre basis scaled to ``interval``.

    The Legendre representation keeps Vandermonde matrices well conditioned
    for degrees beyond ~5, where raw monomials degrade; the span is the same.
    """
    if degree < 0:
        raise ValueError("degree must be >= 0")
    basis = []
    derivs = []
    for k in range(degree + 1):
        p = Legendre.basis(k, domain=list(interval))
        basis.append(p)
        derivs.append(p.deriv())
    return FunctionSpace(
        dimension=degree + 1,
        basis=tuple(basis),
        basis_derivatives=tuple(derivs),
        descriptor=f"polynomials degree <= {degree}",
        span_key=("poly", degree),
    )


def _node_array(nodes) -> np.ndarray:
    if isinstance(nodes, NodeSet):
        return nodes.nodes
    return np.asarray(nodes, dtype=float)


def vandermonde(space: FunctionSpace, nodes) -> np.ndarray:
    """N x K matrix of basis values, entry (n, k) = f_k(x_n)."""
    x = _node_array(nodes)
    return np.column_stack([f(x) for f in space.basis])


def vandermonde_derivative(space: FunctionSpace, nodes) -> np.ndarray:
    """N x K matrix of exact basis derivative values f_k'(x_n)."""
    x = _node_array(nodes)
    return np.column_stack([df(x) for df in space.basis_derivatives])

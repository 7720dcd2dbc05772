"""Spatial right-hand sides: sub-cell SBP-SAT schemes on overset meshes.

Three layers:

* ``rhs_single_block``: the two-domain scheme written directly in terms of
  one operator per domain and the eight projection values at a, b, c, d.
* ``Semidiscretization``: the multi-element engine.  Volume terms are the
  derivative form -D f(w) or flux differencing with a symmetric two-point
  volume flux; interfaces, the split points at b and c, the cross-grid
  couplings, and the physical/periodic boundaries are all weak SAT terms.
* ``rhs_multiblock`` / ``rhs_baseline``: thin functional wrappers.

The engine evaluates everything through projection vectors, which reduces
to plain nodal gathers on Gauss-Lobatto meshes; that nodal fast path is
vectorized across elements and interfaces.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .equations import (ConservationLaw, InvalidStateError, ec_volume_pair_grid, is_fully_upwind,
                        numerical_flux)
from .mesh import Element, OversetMesh, Projection
from .sbp_cell import CellOperator
from .subcell import SubcellOperator, projection_vector


@dataclass
class SolverConfig:
    """Which law, fluxes, volume form, and boundary closure to run."""

    law: ConservationLaw
    surface_flux: str = "upwind"
    subcell_flux: Optional[str] = None  # defaults to surface_flux
    volume: str = "derivative"  # "derivative" | "ec"
    periodic: bool = False
    g_left: Optional[Callable[[float], np.ndarray]] = None
    g_right: Optional[Callable[[float], np.ndarray]] = None
    source: Optional[Callable[[np.ndarray, float], np.ndarray]] = None

    def __post_init__(self):
        if self.subcell_flux is None:
            self.subcell_flux = self.surface_flux
        if self.volume not in ("derivative", "ec"):
            raise ValueError(f"unknown volume form {self.volume!r}")
        if self.periodic and (self.g_left is not None or self.g_right is not None):
            raise ValueError("periodic closure excludes boundary data")

    def coupling_is_fully_upwind(self, states) -> bool:
        return is_fully_upwind(self.subcell_flux, self.law, states)


def check_coupling(config: SolverConfig, states) -> bool:
    """Set off the sub-cell coupling warning when conservation is at risk.

    Returns True when the sub-cell-point flux is fully upwind on the given
    regime.  For nonlinear laws a False answer means the discrete
    conservation identity will not hold, and a warning is emitted.
    """
    ok = config.coupling_is_fully_upwind(states)
    if not ok and not config.law.is_linear:
        warnings.warn(
            f"sub-cell coupling flux {config.subcell_flux!r} is not fully upwind for "
            f"{config.law.name} on this data; discrete conservation will be violated",
            stacklevel=2,
        )
    return ok


# ---------------------------------------------------------------------------
# single-block scheme
# ---------------------------------------------------------------------------

def _v_projections(op_v: Union[CellOperator, SubcellOperator], point_c: float):
    if isinstance(op_v, SubcellOperator):
        return op_v.e_left, op_v.e_mid_left, op_v.e_mid_right, op_v.e_right
    # plain operator on [b, d]: the value at the interior point c comes from
    # a projection over all nodes (two-sided); only fluxes that ignore it
    # keep the single-block energy identity in its three-term form
    mode = "interpolation" if op_v.n_nodes == op_v.space.dimension else "min_norm_least_squares"
    e_c = projection_vector(op_v.space, op_v.nodes, point_c, mode)
    return op_v.e_left, e_c, e_c, op_v.e_right


def rhs_single_block(op_u: SubcellOperator, op_v: Union[CellOperator, SubcellOperator],
                     config: SolverConfig, state: np.ndarray, t: float = 0.0) -> np.ndarray:
    """Two-domain scheme with one (sub-cell) operator per domain.

    ``state`` holds the u nodal values followed by the v nodal values, one
    row per node.  The overlap is [b, c] with b = op_u.split and
    c = op_v's split (or op_u's right end when op_v is a plain operator).
    """
    law = config.law
    state2d = np.atleast_2d(np.asarray(state, dtype=float))
    if state2d.shape[0] == 1 and law.n_vars == 1:
        state2d = state2d.reshape(-1, 1)
    n_u = op_u.n_nodes
    u, v = state2d[:n_u], state2d[n_u:]
    f_u, f_v = law.flux(u), law.flux(v)

    e_a, e_bl, e_br, e_c = op_u.e_left, op_u.e_mid_left, op_u.e_mid_right, op_u.e_right
    e_b, e_cl, e_cr, e_d = _v_projections(op_v, op_u.cell[1])

    u_a, u_bl, u_br, u_c = e_a @ u, e_bl @ u, e_br @ u, e_c @ u
    v_b, v_cl, v_cr, v_d = e_b @ v, e_cl @ v, e_cr @ v, e_d @ v
    for name, val in (("u at a", u_a), ("u at b", u_bl), ("v at b", v_b), ("v at d", v_d)):
        try:
            law.check_state(val)
        except InvalidStateError as exc:
            raise InvalidStateError(f"{exc} (projected {name})") from exc

    surf = lambda wl, wr: numerical_flux(config.surface_flux, law, wl, wr)[0]
    subc = lambda wl, wr: numerical_flux(config.subcell_flux, law, wl, wr)[0]

    if config.periodic:
        f_ad = surf(v_d, u_a)
        sat_u = np.outer(e_a, f_ad - e_a @ f_u)
        sat_v = -np.outer(e_d, f_ad - e_d @ f_v)
    else:
        sat_u = np.zeros_like(u)
        sat_v = np.zeros_like(v)
        if config.g_left is not None:
            g_l = np.atleast_1d(config.g_left(t))
            sat_u += np.outer(e_a, surf(g_l, u_a) - e_a @ f_u)
        if config.g_right is not None:
            g_r = np.atleast_1d(config.g_right(t))
            sat_v -= np.outer(e_d, surf(v_d, g_r) - e_d @ f_v)

    f_b = subc(u_bl, u_br)
    sat_u += np.outer(e_br, f_b - e_br @ f_u) - np.outer(e_bl, f_b - e_bl @ f_u)
    sat_u -= np.outer(e_c, subc(u_c, v_cr) - e_c @ f_u)

    sat_v += np.outer(e_b, subc(u_bl, v_b) - e_b @ f_v)
    if isinstance(op_v, SubcellOperator):
        f_c = subc(v_cl, v_cr)
        sat_v += np.outer(e_cr, f_c - e_cr @ f_v) - np.outer(e_cl, f_c - e_cl @ f_v)

    du = -op_u.D @ f_u + sat_u / op_u.p[:, None]
    dv = -op_v.D @ f_v + sat_v / op_v.p[:, None]
    out = np.vstack([du, dv])
    if config.source is not None:
        x = np.concatenate([op_u.x, op_v.x])
        out += config.source(x, t)
    return out if np.asarray(state).ndim > 1 else out.ravel()


# ---------------------------------------------------------------------------
# multi-element engine
# ---------------------------------------------------------------------------

def _is_unit(vec: np.ndarray) -> bool:
    nz = np.nonzero(vec)[0]
    return nz.size == 1 and vec[nz[0]] == 1.0


def _unit_index(elem: Element, vec: np.ndarray) -> int:
    return elem.offset + int(np.nonzero(vec)[0][0])


@dataclass
class _Interface:
    left: Projection
    right: Projection
    kind: str  # "surface" | "subcell"


class Semidiscretization:
    """Compiled right-hand side for one mesh and solver configuration."""

    def __init__(self, mesh: OversetMesh, config: SolverConfig):
        self.mesh = mesh
        self.config = config
        self.law = config.law
        self.n_dof = mesh.n_nodes * self.law.n_vars
        self._compile()

    # -- compilation ------------------------------------------------------
    def _compile(self) -> None:
        mesh, dom = self.mesh, self.mesh.domain
        self._interfaces: List[_Interface] = []
        for side, elems, point in (("u", mesh.u_elements, dom.b), ("v", mesh.v_elements, dom.c)):
            for j in range(len(elems) - 1):
                left, right = elems[j], elems[j + 1]
                kind = "surface"
                if mesh.coupling == "subcell" and abs(left.interval[1] - point) <= 1e-12:
                    kind = "subcell"  # b or c sits exactly on this interface
                self._interfaces.append(_Interface(
                    Projection(left, left.e_right), Projection(right, right.e_left), kind))
            for e in elems:
                if e.is_split:
                    self._interfaces.append(_Interface(
                        Projection(e, e.op.e_mid_left), Projection(e, e.op.e_mid_right), "subcell"))

        if mesh.coupling == "subcell":
            self._cross_b_left = mesh.projection("u_b_left")
            self._cross_c_right = mesh.projection("v_c_right")
            self._cross_flux = self.config.subcell_flux
        else:
            self._cross_b_left = mesh.u_donor_b
            self._cross_c_right = mesh.v_donor_c
            self._cross_flux = self.config.surface_flux
        self._u_a = mesh.projection("u_a")
        self._u_c = mesh.projection("u_c")
        self._v_b = mesh.projection("v_b")
        self._v_d = mesh.projection("v_d")

        self._p_global = np.concatenate([e.p for e in mesh.elements])
        self._invp_global = 1.0 / self._p_global
        self._compile_volume()
        self._compile_fast_interfaces()

    def _compile_volume(self) -> None:
        groups: dict = {}
        for e in self.mesh.elements:
            key = (id(e.op.D), e.n_nodes)
            groups.setdefault(key, {"D": e.op.D, "elems": []})["elems"].append(e)
        # elements of equal size share one D; group by matrix content
        merged: dict = {}
        for g in groups.values():
            content = g["D"].tobytes()
            if content in merged:
                merged[content]["elems"].extend(g["elems"])
            else:
                merged[content] = g
        self._vol_groups = []
        for g in merged.values():
            gather = np.array([np.arange(e.offset, e.offset + e.n_nodes) for e in g["elems"]])
            self._vol_groups.append((g["D"], gather))

    def _compile_fast_interfaces(self) -> None:
        self._fast = all(_is_unit(i.left.vector) and _is_unit(i.right.vector) for i in self._interfaces)
        if not self._fast:
            return
        self._iface_fast = {}
        for kind in ("surface", "subcell"):
            ifs = [i for i in self._interfaces if i.kind == kind]
            if not ifs:
                continue
            left_idx = np.array([_unit_index(i.left.elem, i.left.vector) for i in ifs])
            right_idx = np.array([_unit_index(i.right.elem, i.right.vector) for i in ifs])
            self._iface_fast[kind] = (left_idx, right_idx)

    # -- evaluation -------------------------------------------------------
    def state2d(self, state: np.ndarray) -> np.ndarray:
        return np.asarray(state, dtype=float).reshape(self.mesh.n_nodes, self.law.n_vars)

    def rhs(self, t: float, state: np.ndarray) -> np.ndarray:
        return self.rhs2d(t, self.state2d(state)).ravel()

    def rhs2d(self, t: float, w: np.ndarray) -> np.ndarray:
        law = self.law
        try:
            f_all = law.flux(w)
        except InvalidStateError as exc:
            raise InvalidStateError(f"{exc} (nodal state)") from exc
        out = np.empty_like(w)

        if self.config.volume == "derivative":
            for d_mat, gather in self._vol_groups:
                out[gather] = -np.einsum("ij,ejc->eic", d_mat, f_all[gather])
        else:
            for d_mat, gather in self._vol_groups:
                pair = ec_volume_pair_grid(law, w[gather])
                out[gather] = -2.0 * np.einsum("ij,eijc->eic", d_mat, pair)

        if self._fast:
            for kind, (left_idx, right_idx) in self._iface_fast.items():
                flux_kind = self.config.surface_flux if kind == "surface" else self.config.subcell_flux
                fst = numerical_flux(flux_kind, law, w[left_idx], w[right_idx], check=False)
                invp = self._invp_global
                out[left_idx] -= (fst - f_all[left_idx]) * invp[left_idx, None]
                out[right_idx] += (fst - f_all[right_idx]) * invp[right_idx, None]
        else:
            for iface in self._interfaces:
                flux_kind = self.config.surface_flux if iface.kind == "surface" else self.config.subcell_flux
                wl = iface.left.apply(w)
                wr = iface.right.apply(w)
                fst = numerical_flux(flux_kind, law, wl, wr)[0]
                iface.left.scatter(out, -(fst - iface.left.apply(f_all)))
                iface.right.scatter(out, fst - iface.right.apply(f_all))

        self._couple_points(t, w, f_all, out)

        if self.config.source is not None:
            out += self.config.source(self.mesh.x, t)
        return out

    def _couple_points(self, t, w, f_all, out) -> None:
        """Cross-grid couplings at b and c plus the outer boundary closure."""
        law = self.law
        cfg = self.config
        names = ("u at a", "u at c", "v at b", "v at d", "u at b", "v at c")
        projs = (self._u_a, self._u_c, self._v_b, self._v_d,
                 self._cross_b_left, self._cross_c_right)
        vals = np.stack([p.apply(w) for p in projs])
        try:
            law.check_state(vals)
        except InvalidStateError:
            for name, val in zip(names, vals):
                try:
                    law.check_state(val)
                except InvalidStateError as exc:
                    raise InvalidStateError(f"{exc} (projected {name})") from exc
        u_a, u_c, v_b, v_d, u_bl, v_cr = vals

        if self.mesh.coupling == "baseline":
            # direction-agnostic data exchange: each overset boundary is
            # penalized with the flux of the interpolated donor state; this
            # is the coupling whose weak instability the sub-cell operators
            # remove
            fst = law.flux(np.stack([u_bl, v_cr]))
            fst_b, fst_c = fst[0], fst[1]
        else:
            fst = numerical_flux(self._cross_flux, law,
                                 np.stack([u_bl, u_c]), np.stack([v_b, v_cr]), check=False)
            fst_b, fst_c = fst[0], fst[1]
        self._v_b.scatter(out, fst_b - self._v_b.apply(f_all))
        self._u_c.scatter(out, -(fst_c - self._u_c.apply(f_all)))

        if cfg.periodic:
            fst = numerical_flux(cfg.surface_flux, law, v_d, u_a, check=False)[0]
            self._u_a.scatter(out, fst - self._u_a.apply(f_all))
            self._v_d.scatter(out, -(fst - self._v_d.apply(f_all)))
            return
        if cfg.g_left is not None:
            g_l = np.atleast_1d(cfg.g_left(t))
            fst = numerical_flux(cfg.surface_flux, law, g_l, u_a)[0]
            self._u_a.scatter(out, fst - self._u_a.apply(f_all))
        if cfg.g_right is not None:
            g_r = np.atleast_1d(cfg.g_right(t))
            fst = numerical_flux(cfg.surface_flux, law, v_d, g_r)[0]
            self._v_d.scatter(out, -(fst - self._v_d.apply(f_all)))


def rhs_multiblock(mesh: OversetMesh, config: SolverConfig, state: np.ndarray, t: float = 0.0) -> np.ndarray:
    if mesh.coupling != "subcell":
        raise ValueError("rhs_multiblock needs a sub-cell coupled mesh")
    return Semidiscretization(mesh, config).rhs(t, np.asarray(state, dtype=float).ravel())


def rhs_baseline(mesh: OversetMesh, config: SolverConfig, state: np.ndarray, t: float = 0.0) -> np.ndarray:
    if mesh.coupling != "baseline":
        raise ValueError("rhs_baseline needs a baseline mesh")
    return Semidiscretization(mesh, config).rhs(t, np.asarray(state, dtype=float).ravel())


# ---------------------------------------------------------------------------
# Jacobians and linear assembly
# ---------------------------------------------------------------------------

def jacobian(rhs: Callable[[float, np.ndarray], np.ndarray], state: np.ndarray,
             epsilon: float = 1e-7, t: float = 0.0, linear: bool = False) -> np.ndarray:
    """Jacobian of the right-hand side at ``state``.

    Central finite differences column by column with per-column step
    epsilon * (1 + |w_j|); for linear right-hand sides the exact matrix is
    assembled by applying the rhs to unit vectors instead.
    """
    state = np.asarray(state, dtype=float).ravel()
    n = state.size
    jac = np.empty((n, n))
    if linear:
        base = rhs(t, np.zeros(n))
        unit = np.zeros(n)
        for j in range(n):
            unit[j] = 1.0
            jac[:, j] = rhs(t, unit) - base
            unit[j] = 0.0
        return jac
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    for j in range(n):
        h = epsilon * (1.0 + abs(state[j]))
        wp = state.copy()
        wm = state.copy()
        wp[j] += h
        wm[j] -= h
        jac[:, j] = (rhs(t, wp) - rhs(t, wm)) / (2.0 * h)
    return jac


def linear_system(semi: Semidiscretization, t: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Exact (G, b) with rhs(t, w) = G w + b for a linear configuration.

    Integrating through G instead of the element loop is a large speed-up
    for the linear laws and bit-reproducible given the config.
    """
    if not semi.law.is_linear:
        raise ValueError(f"{semi.law.name} is not linear")
    b = semi.rhs(t, np.zeros(semi.n_dof))
    g_mat = jacobian(semi.rhs, np.zeros(semi.n_dof), t=t, linear=True)
    return g_mat, b

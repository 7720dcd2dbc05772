"""Discrete functionals over overset meshes: integrals, energy, entropy,
their time rates, solution errors, convergence orders, and spectra.

The overlap region is counted exactly once everywhere: the u-mesh
contributes its [a, b] share (full elements left of b plus the left-block
weights of the split element) and the v-mesh contributes fully.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .equations import ConservationLaw
from .mesh import OversetMesh


@dataclass
class DiagnosticsRecord:
    time: float
    integral: np.ndarray  # per conserved variable
    energy: Optional[float]
    energy_rate: Optional[float]
    entropy: float
    entropy_rate: float
    error_l2: Optional[np.ndarray] = None
    error_linf: Optional[np.ndarray] = None


def _split_state(mesh: OversetMesh, state2d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    return state2d[mesh.u_slice], state2d[mesh.v_slice]


def overset_integral(mesh: OversetMesh, state2d: np.ndarray) -> np.ndarray:
    """Per-variable integral over [a, d] counting the overlap once."""
    u, v = _split_state(mesh, state2d)
    return mesh.w_u_bar @ u + mesh.w_v @ v


def overset_integral_three_term(mesh: OversetMesh, state2d: np.ndarray) -> np.ndarray:
    """Equivalent full-u + full-v - overlap form (P_u = P_ubar + P_overlap)."""
    u, v = _split_state(mesh, state2d)
    return mesh.w_u @ u + mesh.w_v @ v - mesh.w_u_overlap @ u


def overset_energy(mesh: OversetMesh, state2d: np.ndarray, law: Optional[ConservationLaw] = None) -> float:
    """Quadratic energy with the law's component weights, overlap counted once."""
    weights = _energy_weights(law, state2d.shape[1])
    u, v = _split_state(mesh, state2d)
    return float(mesh.w_u_bar @ ((u**2) @ weights) + mesh.w_v @ ((v**2) @ weights))


def _energy_weights(law: Optional[ConservationLaw], n_vars: int) -> np.ndarray:
    if law is not None and law.energy_weights is not None:
        return law.energy_weights
    return np.ones(n_vars)


def integral_rate(mesh: OversetMesh, rhs2d: np.ndarray) -> np.ndarray:
    """d/dt of the overset integral by the chain rule."""
    du, dv = _split_state(mesh, rhs2d)
    return mesh.w_u_bar @ du + mesh.w_v @ dv


def energy_rate(mesh: OversetMesh, state2d: np.ndarray, rhs2d: np.ndarray,
                law: Optional[ConservationLaw] = None) -> float:
    weights = _energy_weights(law, state2d.shape[1])
    u, v = _split_state(mesh, state2d)
    du, dv = _split_state(mesh, rhs2d)
    return float(2.0 * (mesh.w_u_bar @ ((u * du) @ weights) + mesh.w_v @ ((v * dv) @ weights)))


def total_entropy(mesh: OversetMesh, state2d: np.ndarray, law: ConservationLaw) -> float:
    u, v = _split_state(mesh, state2d)
    return float(mesh.w_u_bar @ law.entropy(u) + mesh.w_v @ law.entropy(v))


def entropy_rate(mesh: OversetMesh, state2d: np.ndarray, rhs2d: np.ndarray, law: ConservationLaw) -> float:
    u, v = _split_state(mesh, state2d)
    du, dv = _split_state(mesh, rhs2d)
    wu = np.sum(law.entropy_variables(u) * du, axis=1)
    wv = np.sum(law.entropy_variables(v) * dv, axis=1)
    return float(mesh.w_u_bar @ wu + mesh.w_v @ wv)


def rate(functional: str, mesh: OversetMesh, state2d: np.ndarray, rhs2d: np.ndarray,
         law: Optional[ConservationLaw] = None):
    """Chain-rule time derivative of a named functional at a state."""
    if functional == "integral":
        return integral_rate(mesh, rhs2d)
    if functional == "energy":
        return energy_rate(mesh, state2d, rhs2d, law)
    if functional == "entropy":
        if law is None:
            raise ValueError("entropy rate needs the law")
        return entropy_rate(mesh, state2d, rhs2d, law)
    raise ValueError(f"unknown functional {functional!r}")


def solution_error(mesh: OversetMesh, state2d: np.ndarray,
                   reference: Callable[[np.ndarray], np.ndarray], norm: str = "L2") -> np.ndarray:
    """Per-variable error against ``reference(x)`` evaluated at all nodes.

    L2 uses the overlap-once quadrature; Linf is the nodal max over both
    meshes.
    """
    x = mesh.x
    ref = np.atleast_2d(np.asarray(reference(x), dtype=float))
    if ref.shape[0] == state2d.shape[1] and ref.shape[1] == x.size:
        ref = ref.T
    diff = state2d - ref
    if norm == "L2":
        u, v = _split_state(mesh, diff)
        return np.sqrt(mesh.w_u_bar @ u**2 + mesh.w_v @ v**2)
    if norm == "Linf":
        return np.max(np.abs(diff), axis=0)
    raise ValueError(f"unknown norm {norm!r}")


def eoc(errors: Sequence[float], resolutions: Sequence[float]) -> List[Optional[float]]:
    """Experimental orders of convergence; first entry undefined (None)."""
    if len(errors) != len(resolutions) or len(errors) < 2:
        raise ValueError("need matching error/resolution lists of length >= 2")
    orders: List[Optional[float]] = [None]
    for i in range(1, len(errors)):
        if errors[i] <= 0 or errors[i - 1] <= 0:
            orders.append(None)
        else:
            orders.append(float(np.log(errors[i - 1] / errors[i]) / np.log(resolutions[i] / resolutions[i - 1])))
    return orders


def spectrum(matrix: np.ndarray) -> Tuple[np.ndarray, float]:
    """All eigenvalues plus the spectral abscissa (max real part)."""
    try:
        eigvals = np.linalg.eigvals(np.asarray(matrix, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise RuntimeError(f"eigenvalue solver failed: {exc}") from exc
    return eigvals, float(np.max(eigvals.real))


def record(mesh: OversetMesh, law: ConservationLaw, t: float, state2d: np.ndarray, rhs2d: np.ndarray,
           reference: Optional[Callable[[np.ndarray, float], np.ndarray]] = None) -> DiagnosticsRecord:
    """One diagnostics row at a sampled state."""
    quad_energy = law.energy_weights is not None
    err_l2 = err_linf = None
    if reference is not None:
        ref_t = lambda x: reference(x, t)
        err_l2 = solution_error(mesh, state2d, ref_t, "L2")
        err_linf = solution_error(mesh, state2d, ref_t, "Linf")
    return DiagnosticsRecord(
        time=t,
        integral=overset_integral(mesh, state2d),
        energy=overset_energy(mesh, state2d, law) if quad_energy else None,
        energy_rate=energy_rate(mesh, state2d, rhs2d, law) if quad_energy else None,
        entropy=total_entropy(mesh, state2d, law),
        entropy_rate=entropy_rate(mesh, state2d, rhs2d, law),
        error_l2=err_l2,
        error_linf=err_linf,
    )

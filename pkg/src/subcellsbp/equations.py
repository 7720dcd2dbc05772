"""Conservation laws and the numerical-flux catalog.

All operations are vectorized over a leading axis of states: a state batch
has shape (m, n_vars).  Scalar laws still use n_vars = 1 so the solver can
stay shape-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np


class InvalidStateError(ValueError):
    pass


@dataclass(frozen=True)
class ConservationLaw:
    """Flux, wave speeds, and entropy pair of one hyperbolic system."""

    name: str
    n_vars: int
    is_linear: bool
    flux: Callable[[np.ndarray], np.ndarray]
    max_wave_speed: Callable[[np.ndarray, np.ndarray], np.ndarray]
    entropy: Callable[[np.ndarray], np.ndarray]
    entropy_variables: Callable[[np.ndarray], np.ndarray]
    # component weights of the quadratic energy; None if the law's entropy
    # is not quadratic (Euler)
    energy_weights: Optional[np.ndarray] = None
    validate: Callable[[np.ndarray], None] = lambda w: None
    params: dict = field(default_factory=dict)

    def check_state(self, w: np.ndarray) -> None:
        self.validate(np.atleast_2d(w))


def _as_batch(w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.ndim == 0:
        return w.reshape(1, 1)
    if w.ndim == 1:
        return w.reshape(-1, 1) if w.size > 1 else w.reshape(1, -1)
    return w


# ---------------------------------------------------------------------------
# the four laws
# ---------------------------------------------------------------------------

def advection(alpha: float = 1.0) -> ConservationLaw:
    a = float(alpha)
    return ConservationLaw(
        name="advection",
        n_vars=1,
        is_linear=True,
        flux=lambda w: a * w,
        max_wave_speed=lambda wl, wr: np.full(np.atleast_2d(wl).shape[0], abs(a)),
        entropy=lambda w: 0.5 * np.atleast_2d(w)[:, 0] ** 2,
        entropy_variables=lambda w: np.atleast_2d(w).copy(),
        energy_weights=np.array([1.0]),
        params={"alpha": a},
    )


def burgers() -> ConservationLaw:
    return ConservationLaw(
        name="burgers",
        n_vars=1,
        is_linear=False,
        flux=lambda w: 0.5 * w**2,
        max_wave_speed=lambda wl, wr: np.maximum(
            np.abs(np.atleast_2d(wl)[:, 0]), np.abs(np.atleast_2d(wr)[:, 0])
        ),
        entropy=lambda w: 0.5 * np.atleast_2d(w)[:, 0] ** 2,
        entropy_variables=lambda w: np.atleast_2d(w).copy(),
        energy_weights=np.array([1.0]),
    )


def maxwell(c: float = 1.0) -> ConservationLaw:
    """1D Maxwell system for (E, B) with wave speeds +-c."""
    c = float(c)

    def flux(w):
        w = np.asarray(w, dtype=float)
        return np.stack([c**2 * w[..., 1], w[..., 0]], axis=-1)

    def ent(w):
        w = np.atleast_2d(w)
        return 0.5 * (w[:, 0] ** 2 + c**2 * w[:, 1] ** 2)

    def ent_vars(w):
        w = np.atleast_2d(w)
        return np.column_stack([w[:, 0], c**2 * w[:, 1]])

    return ConservationLaw(
        name="maxwell",
        n_vars=2,
        is_linear=True,
        flux=flux,
        max_wave_speed=lambda wl, wr: np.full(np.atleast_2d(wl).shape[0], c),
        entropy=ent,
        entropy_variables=ent_vars,
        energy_weights=np.array([1.0, c**2]),
        params={"c": c},
    )


def euler(gamma: float = 1.4) -> ConservationLaw:
    g = float(gamma)

    def primitive(w):
        w = np.asarray(w, dtype=float)
        rho, mom, erg = w[..., 0], w[..., 1], w[..., 2]
        vel = mom / rho
        p = (g - 1.0) * (erg - 0.5 * mom * vel)
        return rho, vel, p

    def validate(w):
        rho, _, p = primitive(w)
        if np.any(rho <= 0) or np.any(p <= 0):
            raise InvalidStateError("invalid thermodynamic state (rho or p <= 0)")

    def flux(w):
        w = np.asarray(w, dtype=float)
        validate(w)
        rho, vel, p = primitive(w)
        return np.stack([w[..., 1], w[..., 1] * vel + p, (w[..., 2] + p) * vel], axis=-1)

    def max_speed(wl, wr):
        rl, vl, pl = primitive(np.atleast_2d(wl))
        rr, vr, pr = primitive(np.atleast_2d(wr))
        cl = np.sqrt(g * pl / rl)
        cr = np.sqrt(g * pr / rr)
        return np.maximum(np.abs(vl) + cl, np.abs(vr) + cr)

    def ent(w):
        rho, _, p = primitive(w)
        s = np.log(p) - g * np.log(rho)
        return -rho * s / (g - 1.0)

    def ent_vars(w):
        rho, vel, p = primitive(w)
        s = np.log(p) - g * np.log(rho)
        return np.column_stack([
            (g - s) / (g - 1.0) - 0.5 * rho * vel**2 / p,
            rho * vel / p,
            -rho / p,
        ])

    return ConservationLaw(
        name="euler",
        n_vars=3,
        is_linear=False,
        flux=flux,
        max_wave_speed=max_speed,
        entropy=ent,
        entropy_variables=ent_vars,
        energy_weights=None,
        validate=validate,
        params={"gamma": g},
    )


_LAW_FACTORIES = {
    "advection": advection,
    "burgers": burgers,
    "maxwell": maxwell,
    "euler": euler,
}


def make_law(name: str, **params) -> ConservationLaw:
    if name not in _LAW_FACTORIES:
        raise ValueError(f"unknown conservation law {name!r}")
    return _LAW_FACTORIES[name](**params)


def physical_flux(law: ConservationLaw, state) -> np.ndarray:
    return law.flux(np.atleast_2d(np.asarray(state, dtype=float)))


def entropy(law: ConservationLaw, state) -> np.ndarray:
    return law.entropy(np.atleast_2d(np.asarray(state, dtype=float)))


def entropy_variables(law: ConservationLaw, state) -> np.ndarray:
    return law.entropy_variables(np.atleast_2d(np.asarray(state, dtype=float)))


def entropy_potential(law: ConservationLaw, state) -> np.ndarray:
    """Flux potential psi = v . f - q; tests the entropy condition of EC fluxes."""
    w = np.atleast_2d(np.asarray(state, dtype=float))
    if law.name == "euler":
        return w[:, 1]  # rho * v
    if law.name == "burgers":
        return w[:, 0] ** 3 / 6.0
    if law.name == "advection":
        return 0.5 * law.params["alpha"] * w[:, 0] ** 2
    if law.name == "maxwell":
        c = law.params["c"]
        return c**2 * w[:, 0] * w[:, 1]
    raise ValueError(f"no entropy potential for {law.name}")


# ---------------------------------------------------------------------------
# numerical surface fluxes
# ---------------------------------------------------------------------------

def log_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Logarithmic mean with a series branch for nearly equal arguments."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    avg = 0.5 * (a + b)
    near = np.abs(a - b) < 1e-4 * np.maximum(np.abs(a), np.abs(b))
    u = ((a - b) / (a + b)) ** 2
    series = avg / (1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u / 7.0)))
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (a - b) / (np.log(a) - np.log(b))
    return np.where(near, series, direct)


def _upwind(law, wl, wr):
    if law.name != "advection":
        raise ValueError(f"upwind flux not defined for {law.name}")
    a = law.params["alpha"]
    return law.flux(wl) if a >= 0 else law.flux(wr)


def _godunov(law, wl, wr):
    if law.name == "advection":
        return _upwind(law, wl, wr)
    if law.name != "burgers":
        raise ValueError(f"godunov flux not defined for {law.name}")
    # exact Riemann flux of the convex scalar flux w^2/2
    left = np.maximum(wl, 0.0)
    right = np.minimum(wr, 0.0)
    return np.maximum(0.5 * left**2, 0.5 * right**2)


def _rusanov(law, wl, wr):
    lam = law.max_wave_speed(wl, wr)[:, None]
    return 0.5 * (law.flux(wl) + law.flux(wr)) - 0.5 * lam * (wr - wl)


def _central(law, wl, wr):
    return 0.5 * (law.flux(wl) + law.flux(wr))


def hll_wave_speeds(law, wl, wr) -> Tuple[np.ndarray, np.ndarray]:
    """Two-wave estimates s_min, s_max (simple bounds with sound speed)."""
    if law.name != "euler":
        raise ValueError(f"hll flux not defined for {law.name}")
    g = law.params["gamma"]
    rl, ml, el = wl[:, 0], wl[:, 1], wl[:, 2]
    rr, mr, er = wr[:, 0], wr[:, 1], wr[:, 2]
    vl, vr = ml / rl, mr / rr
    pl = (g - 1.0) * (el - 0.5 * ml * vl)
    pr = (g - 1.0) * (er - 0.5 * mr * vr)
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    return np.minimum(vl - cl, vr - cr), np.maximum(vl + cl, vr + cr)


def _hll(law, wl, wr):
    g = law.params["gamma"]
    rl, vl_ = wl[:, 0], wl[:, 1] / wl[:, 0]
    rr, vr_ = wr[:, 0], wr[:, 1] / wr[:, 0]
    pl = (g - 1.0) * (wl[:, 2] - 0.5 * wl[:, 1] * vl_)
    pr = (g - 1.0) * (wr[:, 2] - 0.5 * wr[:, 1] * vr_)
    cl = np.sqrt(g * pl / rl)
    cr = np.sqrt(g * pr / rr)
    s_min = np.minimum(vl_ - cl, vr_ - cr)
    s_max = np.maximum(vl_ + cl, vr_ + cr)
    fl = np.stack([wl[:, 1], wl[:, 1] * vl_ + pl, (wl[:, 2] + pl) * vl_], axis=-1)
    fr = np.stack([wr[:, 1], wr[:, 1] * vr_ + pr, (wr[:, 2] + pr) * vr_], axis=-1)
    sl = s_min[:, None]
    sr = s_max[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        middle = (sr * fl - sl * fr + sl * sr * (wr - wl)) / (sr - sl)
    return np.where(sl >= 0, fl, np.where(sr <= 0, fr, middle))


_FLUXES = {
    "upwind": _upwind,
    "godunov": _godunov,
    "rusanov": _rusanov,
    "central": _central,
    "hll": _hll,
}

FLUX_KINDS = tuple(_FLUXES)


_TRIU_CACHE: dict = {}


def _triu_cache(n: int):
    if n not in _TRIU_CACHE:
        _TRIU_CACHE[n] = np.triu_indices(n, 1)
    return _TRIU_CACHE[n]


def ec_volume_pair_grid(law: ConservationLaw, wg: np.ndarray) -> np.ndarray:
    """All-pairs entropy-conservative volume fluxes within elements.

    ``wg`` has shape (E, n, 3); the result (E, n, n, 3) matches
    ``volume_flux_ec(law, wg[:, :, None], wg[:, None, :])`` but evaluates
    the logarithms once per node and each symmetric pair once.
    """
    if law.name != "euler":
        raise ValueError(f"entropy-conservative volume flux not defined for {law.name}")
    g = law.params["gamma"]
    n_elem, n, _ = wg.shape
    rho = wg[..., 0]
    vel = wg[..., 1] / rho
    p = (g - 1.0) * (wg[..., 2] - 0.5 * wg[..., 1] * vel)
    log_rho = np.log(rho)
    log_rho_p = np.log(rho / p)
    rho_p = rho / p

    def pair_log_mean(a, b, la, lb):
        avg = 0.5 * (a + b)
        u = ((a - b) / (a + b)) ** 2
        series = avg / (1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u / 7.0)))
        with np.errstate(divide="ignore", invalid="ignore"):
            direct = (a - b) / (la - lb)
        return np.where(np.abs(a - b) < 1e-4 * np.maximum(np.abs(a), np.abs(b)), series, direct)

    def flux_terms(idx_l, idx_r):
        rl, rr = rho[:, idx_l], rho[:, idx_r]
        vl, vr = vel[:, idx_l], vel[:, idx_r]
        pl, pr = p[:, idx_l], p[:, idx_r]
        rho_log = pair_log_mean(rl, rr, log_rho[:, idx_l], log_rho[:, idx_r])
        rho_over_p_log = pair_log_mean(rho_p[:, idx_l], rho_p[:, idx_r],
                                       log_rho_p[:, idx_l], log_rho_p[:, idx_r])
        v_avg = 0.5 * (vl + vr)
        f1 = rho_log * v_avg
        f2 = f1 * v_avg + 0.5 * (pl + pr)
        f3 = f1 * (1.0 / ((g - 1.0) * rho_over_p_log) + 0.5 * vl * vr) + 0.5 * (pl * vr + pr * vl)
        return f1, f2, f3

    iu, ju = _triu_cache(n)
    upper = flux_terms(iu, ju)
    diag = flux_terms(np.arange(n), np.arange(n))
    out = np.empty((n_elem, n, n, 3))
    for c in range(3):
        out[:, iu, ju, c] = upper[c]
        out[:, ju, iu, c] = upper[c]
        out[:, np.arange(n), np.arange(n), c] = diag[c]
    return out


def numerical_flux(kind: str, law: ConservationLaw, wl, wr, check: bool = True) -> np.ndarray:
    """Two-point surface flux f*(w_L, w_R), batched over the leading axis.

    ``check=False`` skips state validation when the caller has already
    validated both sides (the solver's hot path).
    """
    if kind not in _FLUXES:
        raise ValueError(f"unknown numerical flux kind {kind!r}")
    wl = np.atleast_2d(np.asarray(wl, dtype=float))
    wr = np.atleast_2d(np.asarray(wr, dtype=float))
    if kind == "hll" and law.name != "euler":
        raise ValueError(f"hll flux not defined for {law.name}")
    if check:
        law.check_state(wl)
        law.check_state(wr)
    return _FLUXES[kind](law, wl, wr)


def is_fully_upwind(kind: str, law: ConservationLaw, states=None) -> bool:
    """Whether f*(w_L, w_R) = f(w_L) throughout the given regime.

    The regime is a batch of representative states (e.g. the initial
    condition); for godunov/hll the answer depends on it.  Full upwinding at
    the sub-cell coupling points is what makes the overset scheme
    conservative, so the solver warns when this returns False for a
    nonlinear law.
    """
    if kind in ("rusanov", "central"):
        return False
    if kind == "upwind":
        return law.name == "advection" and law.params["alpha"] > 0
    if kind == "godunov":
        if law.name == "advection":
            return law.params["alpha"] > 0
        if law.name != "burgers" or states is None:
            return False
        return bool(np.all(np.atleast_2d(states) > 0))
    if kind == "hll":
        if law.name != "euler" or states is None:
            return False
        w = np.atleast_2d(states)
        s_min, s_max = hll_wave_speeds(law, w, w)
        return bool(np.all(s_min > 0) and np.all(s_max > 0))
    return False


def volume_flux_ec(law: ConservationLaw, wl, wr) -> np.ndarray:
    """Entropy-conservative two-point volume flux for the Euler system.

    Symmetric, consistent, and satisfying the entropy condition
    (v_R - v_L) . f* = psi_R - psi_L with the logarithmic-mean construction.
    """
    if law.name != "euler":
        raise ValueError(f"entropy-conservative volume flux not defined for {law.name}")
    g = law.params["gamma"]
    wl = np.atleast_2d(np.asarray(wl, dtype=float))
    wr = np.atleast_2d(np.asarray(wr, dtype=float))
    if wl.ndim <= 2:
        # broadcast pair grids in the volume loop are validated upstream
        law.check_state(wl)
        law.check_state(wr)
    rl, ml, el = wl[..., 0], wl[..., 1], wl[..., 2]
    rr, mr, er = wr[..., 0], wr[..., 1], wr[..., 2]
    vl, vr = ml / rl, mr / rr
    pl = (g - 1.0) * (el - 0.5 * ml * vl)
    pr = (g - 1.0) * (er - 0.5 * mr * vr)

    rho_log = log_mean(rl, rr)
    rho_over_p_log = log_mean(rl / pl, rr / pr)
    v_avg = 0.5 * (vl + vr)
    p_avg = 0.5 * (pl + pr)

    f1 = rho_log * v_avg
    f2 = f1 * v_avg + p_avg
    f3 = f1 * (1.0 / ((g - 1.0) * rho_over_p_log) + 0.5 * vl * vr) + 0.5 * (pl * vr + pr * vl)
    return np.stack([f1, f2, f3], axis=-1)

"""Scalar diagnostics on states and trajectories.

Every integral is taken over the odd extension of the stored field on
``[-L, L]``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import Iterable, Optional, Sequence

import numpy as np

from .domain import DomainError, PhysParams, State
from .nonlinear import potential_energy
from .transform import derivative_nodes, homogeneous_norm, sobolev_norm

CSV_FIELDS = ("t", "mass", "e_kin", "e_pot", "e_total", "h1", "hsc", "l2_local", "linf_local", "morawetz")

#: observable selectors accepted by :func:`observe`
SELECTORS = ("mass", "energy", "h1", "hsc", "local", "morawetz")

DEFAULT_INTERVAL = (-1.0, 1.0)


@dataclass(frozen=True)
class ObservableSample:
    t: float
    mass: float = math.nan
    e_kin: float = math.nan
    e_pot: float = math.nan
    e_total: float = math.nan
    h1: float = math.nan
    hsc: float = math.nan
    l2_local: float = math.nan
    linf_local: float = math.nan
    morawetz: float = math.nan

    def row(self) -> list[float]:
        return [getattr(self, name) for name in CSV_FIELDS]

    def check(self) -> None:
        """Raise if a computed quantity violates its sign/sum constraints."""
        for name in ("mass", "e_kin", "e_pot", "e_total", "h1", "hsc", "l2_local", "linf_local"):
            v = getattr(self, name)
            if not math.isnan(v) and v < 0:
                raise ValueError(f"{name}={v} is negative")
        if not math.isnan(self.e_total):
            tol = 1e-12 * max(1.0, abs(self.e_total))
            if abs(self.e_total - self.e_kin - self.e_pot) > tol:
                raise ValueError("e_total != e_kin + e_pot")

    @classmethod
    def from_row(cls, row: Sequence) -> "ObservableSample":
        return cls(*(float(v) for v in row))

    def to_dict(self) -> dict:
        return asdict(self)


def mass(state: State) -> float:
    v = state.values
    return float(2.0 * state.grid.dx * np.sum(v.real**2 + v.imag**2))


def energy(state: State, params: PhysParams) -> tuple[float, float, float]:
    """``(kinetic, potential, total)``; kinetic is half the squared
    spectral H1-seminorm."""
    kin = 0.5 * homogeneous_norm(state, 1.0) ** 2
    pot = potential_energy(state, params)
    return kin, pot, kin + pot


def local_norms(state: State, interval: Sequence[float]) -> tuple[float, float]:
    """L2 and max-modulus of the odd extension over ``[a1, a2]``.

    Both are computed on the nodes ``+-x_j`` falling inside the interval.
    The whole domain ``[-L, L]`` reproduces :func:`mass` exactly.
    """
    a1, a2 = map(float, interval)
    L = state.grid.L
    if not (-L <= a1 < a2 <= L):
        raise DomainError(f"interval [{a1}, {a2}] must satisfy -L <= a1 < a2 <= L (L={L})")
    x = state.grid.x
    mod2 = state.values.real**2 + state.values.imag**2
    inside = ((x >= a1) & (x <= a2)).astype(float) + ((-x >= a1) & (-x <= a2)).astype(float)
    l2 = math.sqrt(state.grid.dx * float(np.sum(inside * mod2)))
    hit = inside > 0
    linf = math.sqrt(float(mod2[hit].max())) if hit.any() else 0.0
    return l2, linf


def morawetz_weight(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.abs(x))


def morawetz(state: State) -> float:
    r"""``Im \int phi u conj(u_x) dx`` with ``phi(x) = x / (1 + |x|)``.

    ``phi u conj(u_x)`` is even for odd ``u``, so the integral is twice
    the half-line sum; the endpoint terms vanish since ``u(0) = u(L) = 0``.
    """
    grid = state.grid
    du = derivative_nodes(state)[1:-1]
    integrand = morawetz_weight(grid.x) * state.values * np.conj(du)
    return float(2.0 * grid.dx * np.sum(integrand).imag)


def derivative_l2(state: State) -> float:
    return homogeneous_norm(state, 1.0)


def observe(
    state: State,
    params: PhysParams,
    interval: Sequence[float] = DEFAULT_INTERVAL,
    selectors: Optional[Iterable[str]] = None,
) -> ObservableSample:
    """Evaluate the selected observables; unselected fields stay NaN."""
    chosen = set(SELECTORS if selectors is None else selectors)
    unknown = chosen - set(SELECTORS)
    if unknown:
        raise DomainError(f"unknown observable selectors {sorted(unknown)}")
    out = {"t": state.t}
    if "mass" in chosen:
        out["mass"] = mass(state)
    if "energy" in chosen:
        out["e_kin"], out["e_pot"], out["e_total"] = energy(state, params)
    if "h1" in chosen:
        out["h1"] = sobolev_norm(state, 1.0, "inhomogeneous")
    if "hsc" in chosen:
        # s_c can be negative (mass-subcritical); the multiplier stays finite
        out["hsc"] = homogeneous_norm(state, params.s_c)
    if "local" in chosen:
        L = state.grid.L
        a1, a2 = (max(-L, interval[0]), min(L, interval[1]))
        out["l2_local"], out["linf_local"] = local_norms(state, (a1, a2))
    if "morawetz" in chosen:
        out["morawetz"] = morawetz(state)
    return ObservableSample(**out)


def max_relative_drift(samples: Sequence[ObservableSample], name: str) -> float:
    """``max_t |q(t) - q(0)| / |q(0)|`` for one recorded quantity."""
    values = np.array([getattr(s, name) for s in samples], dtype=float)
    if values.size == 0:
        return 0.0
    ref = values[0]
    dev = np.abs(values - ref).max()
    if ref == 0:
        return float(dev)
    return float(dev / abs(ref))


# --- admissible pairs and discrete Strichartz norms --------------------------------


@dataclass(frozen=True)
class AdmissiblePair:
    """``(q, r)`` with ``2/q = 1/2 - 1/r - s``; ``q = inf`` when the
    right-hand side vanishes."""

    s: float
    q: float
    r: float

    def residual(self) -> float:
        inv_q = 0.0 if math.isinf(self.q) else 1.0 / self.q
        return 2.0 * inv_q + 1.0 / self.r + self.s - 0.5


def admissible_pair(s: float, r: float) -> AdmissiblePair:
    if not (-0.5 < s < 0.5):
        raise DomainError(f"admissible pairs need s in (-1/2, 1/2), got {s}")
    r_min = 2.0 / (1.0 - 2.0 * s)
    if not (r_min - 1e-14 <= r < math.inf):
        raise DomainError(f"r={r} outside [{r_min:.6g}, inf) for s={s}")
    two_over_q = 0.5 - 1.0 / r - s
    if abs(two_over_q) <= 1e-15:
        return AdmissiblePair(s, math.inf, float(r))
    return AdmissiblePair(s, 2.0 / two_over_q, float(r))


def admissible_pairs(s: float, r_values: Iterable[float]) -> list[AdmissiblePair]:
    return [admissible_pair(s, r) for r in r_values]


def lebesgue_norm(state: State, r: float) -> float:
    """``||u||_{L^r}`` of the odd extension (rectangle rule on the nodes)."""
    mod = np.abs(state.values)
    return float((2.0 * state.grid.dx * np.sum(mod**r)) ** (1.0 / r))


def sobolev_lebesgue_norm(state: State, r: float) -> float:
    """``(||u||_r^r + ||u_x||_r^r)^{1/r}``; ``u_x`` uses trapezoid weights
    because it does not vanish at the origin or the walls."""
    du = np.abs(derivative_nodes(state))
    weights = np.full(du.size, 2.0 * state.grid.dx)
    weights[[0, -1]] *= 0.5
    d_r = float(np.sum(weights * du**r))
    return (lebesgue_norm(state, r) ** r + d_r) ** (1.0 / r)


def strichartz_norm(trajectory, pair: AdmissiblePair, derivative: bool = False) -> float:
    """Discrete ``L^q_t L^r_x`` norm over the stored states of a trajectory.

    Left-endpoint Riemann sum in time; ``q = inf`` takes the max over
    samples.  The trajectory must hold a state at every sample.
    """
    states = trajectory.states()
    if len(states) != len(trajectory.samples) or not states:
        raise DomainError("strichartz_norm needs a trajectory storing every state")
    space = sobolev_lebesgue_norm if derivative else lebesgue_norm
    values = np.array([space(st, pair.r) for st in states])
    if math.isinf(pair.q):
        return float(values.max())
    t = np.array([st.t for st in states])
    if len(t) < 2:
        return 0.0
    steps = np.abs(np.diff(t))
    return float(np.sum(values[:-1] ** pair.q * steps) ** (1.0 / pair.q))

"""Singular weight ``|x|^{-b}``, the exact nonlinear phase flow and the
potential part of the energy.

The origin is never a stored node.  For odd data the products that
appear (``|x|^{-b}|u|^alpha`` and ``|x|^{-b}|u|^{alpha+2}``) tend to 0 at
``x = 0`` whenever ``alpha > b``, so the unstored origin value is 0.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .domain import DomainError, Grid, PhysParams, State


@dataclass(frozen=True, eq=False)
class PotentialWeights:
    grid: Grid
    b: float
    weights: np.ndarray


@lru_cache(maxsize=32)
def _weights(grid: Grid, b: float) -> np.ndarray:
    w = grid.x ** (-b)
    w.flags.writeable = False
    return w


def potential_weight(grid: Grid, b: float) -> PotentialWeights:
    if not (0 < b < 1):
        raise DomainError(f"b must lie in (0, 1), got {b}")
    return PotentialWeights(grid, float(b), _weights(grid, float(b)))


def _modulus_power(values: np.ndarray, alpha: float) -> np.ndarray:
    mod2 = values.real**2 + values.imag**2
    if alpha == 2.0:
        return mod2
    if alpha == 4.0:
        return mod2 * mod2
    return mod2 ** (0.5 * alpha)


def phase_increment(state: State, dt: float, params: PhysParams) -> np.ndarray:
    """Per-node rotation angle ``dt |x_j|^{-b} |u_j|^alpha`` of one phase step."""
    if params.linear_only:
        return np.zeros(state.grid.size)
    w = _weights(state.grid, params.b)
    return dt * w * _modulus_power(state.values, params.alpha)


def rotate(values: np.ndarray, theta: np.ndarray) -> np.ndarray:
    return values * (np.cos(theta) - 1j * np.sin(theta))


def phase_step(state: State, dt: float, params: PhysParams, max_phase: float | None = None) -> State:
    """Exact flow of ``du/dt = -i |x|^{-b} |u|^alpha u`` over ``dt``.

    ``|u_j|`` is invariant, so the flow is a pointwise rotation.  With
    ``max_phase`` the per-node angle is clipped to ``[-max_phase, max_phase]``;
    the integrator uses this only when ``alpha <= b``.
    """
    if dt == 0 or params.linear_only:
        return state.replace(t=state.t + dt)
    theta = phase_increment(state, dt, params)
    if max_phase is not None:
        theta = np.clip(theta, -max_phase, max_phase)
    return State(state.grid, state.t + dt, rotate(state.values, theta))


def potential_energy(state: State, params: PhysParams) -> float:
    r"""``1/(alpha+2) \int |x|^{-b} |u|^{alpha+2} dx`` over the odd extension.

    Trapezoid rule on the uniform grid.  The origin term is dropped
    (the integrand behaves like ``|x|^{alpha+2-b}``), which is where the
    leading quadrature error sits.
    """
    if params.linear_only:
        return 0.0
    grid = state.grid
    w = _weights(grid, params.b)
    dens = w * _modulus_power(state.values, params.alpha + 2.0)
    return float(2.0 * grid.dx * dens.sum() / (params.alpha + 2.0))

"""Sine-I transform, exact free propagator and spectral Sobolev norms.

Coefficients are normalised so that a state sampling ``sin(k_m x)``
has ``c_m = 1`` and every other coefficient zero::

    u_j = sum_m c_m sin(m pi j / N)

All norms refer to the odd extension on ``[-L, L]``, i.e. they are twice
the half-line integrals and directly comparable with norms on R.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .domain import DomainError, Grid, State


@dataclass(frozen=True, eq=False)
class SpectralState:
    grid: Grid
    t: float
    coeffs: np.ndarray


def dst_forward(values: np.ndarray, N: int) -> np.ndarray:
    return scipy.fft.dst(values, type=1) / N


def dst_inverse(coeffs: np.ndarray) -> np.ndarray:
    return scipy.fft.dst(coeffs, type=1) * 0.5


def to_spectral(state: State) -> SpectralState:
    return SpectralState(state.grid, state.t, dst_forward(state.values, state.grid.N))


def from_spectral(sp: SpectralState) -> State:
    return State(sp.grid, sp.t, dst_inverse(sp.coeffs))


def derivative_nodes(state: State) -> np.ndarray:
    """Spectral ``du/dx`` on the closed node set ``x_j, j = 0..N``.

    Differentiating the sine series gives a cosine series, which is
    nonzero at the origin and at the wall, hence the two extra nodes.
    """
    grid = state.grid
    c = dst_forward(state.values, grid.N)
    padded = np.zeros(grid.N + 1, dtype=np.complex128)
    padded[1:-1] = c * grid.k
    return scipy.fft.dct(padded, type=1) * 0.5


def evaluate_series(state: State, x: np.ndarray, chunk: int = 512) -> np.ndarray:
    """Evaluate the sine series of ``state`` at arbitrary points.

    Points outside ``[-L, L]`` return 0 (beyond the walls the field is
    not defined; the caller is responsible for support checks).
    """
    grid = state.grid
    x = np.asarray(x, dtype=float)
    c = dst_forward(state.values, grid.N)
    k = grid.k
    out = np.zeros(x.shape, dtype=np.complex128)
    flat = x.ravel()
    res = out.ravel()
    for start in range(0, flat.size, chunk):
        xs = flat[start:start + chunk]
        res[start:start + chunk] = np.sin(np.outer(xs, k)) @ c
    res[np.abs(flat) > grid.L] = 0.0
    return res.reshape(x.shape)


def free_multiplier(grid: Grid, dt: float) -> np.ndarray:
    return np.exp(-1j * grid.k**2 * dt)


def free_propagate(state: State, dt: float) -> State:
    """Apply ``e^{i dt Delta}``: ``c_m -> exp(-i k_m^2 dt) c_m``."""
    if dt == 0:
        return state
    grid = state.grid
    c = dst_forward(state.values, grid.N) * free_multiplier(grid, dt)
    return State(grid, state.t + dt, dst_inverse(c))


def _spectral_weight(grid: Grid) -> float:
    # sum_j |u_j|^2 * 2 dx == L * sum_m |c_m|^2 on the odd extension
    return grid.L


def homogeneous_norm(state: State, s: float) -> float:
    """``||u||_{H^s-dot}`` for any real ``s`` (``k_m >= pi/L > 0``)."""
    grid = state.grid
    c = dst_forward(state.values, grid.N)
    dens = np.abs(c) ** 2
    if s != 0:
        dens = dens * grid.k ** (2.0 * s)
    return float(np.sqrt(_spectral_weight(grid) * dens.sum()))


def sobolev_norm(state: State, s: float, kind: str = "homogeneous") -> float:
    """Spectral Sobolev norm of order ``s`` in ``[0, 1]``.

    ``kind='inhomogeneous'`` returns ``sqrt(||u||_2^2 + ||u||_{H^s-dot}^2)``;
    for ``s = 0`` both kinds give the L2 norm.
    """
    if not (0.0 <= s <= 1.0):
        raise DomainError(f"Sobolev order must lie in [0, 1], got {s}")
    if kind not in ("homogeneous", "inhomogeneous"):
        raise DomainError(f"unknown norm kind {kind!r}")
    hom = homogeneous_norm(state, s)
    if kind == "homogeneous" or s == 0:
        return hom
    l2 = homogeneous_norm(state, 0.0)
    return float(np.hypot(l2, hom))

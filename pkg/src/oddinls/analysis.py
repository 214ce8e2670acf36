"""Certificates checked against simulated runs: the odd Hardy inequality,
scaling symmetry, scattering via the interaction picture, the wave
operator round trip and the small-data Strichartz bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from .domain import DomainError, Grid, PhysParams, State
from .integrator import Sample, Schedule, Trajectory, evolve
from .observables import AdmissiblePair, mass, strichartz_norm
from .nonlinear import potential_energy
from .transform import derivative_nodes, evaluate_series, free_propagate, homogeneous_norm, sobolev_norm


# --- Hardy inequality -----------------------------------------------------------


@dataclass(frozen=True)
class HardyReport:
    p: float
    lhs: float
    rhs: float

    @property
    def sharp_constant(self) -> float:
        return (self.p / (self.p - 1.0)) ** self.p

    @property
    def ratio(self) -> float:
        return 0.0 if self.rhs == 0 else self.lhs / self.rhs

    @property
    def holds(self) -> bool:
        return self.ratio <= self.sharp_constant

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "sharp_constant": self.sharp_constant,
            "ratio": self.ratio,
        }


def _trapezoid(y: np.ndarray, dx: float) -> float:
    return float(dx * (y.sum() - 0.5 * (y[0] + y[-1])))


def _hardy_grid(state: State, p: float) -> HardyReport:
    grid = state.grid
    du = np.abs(derivative_nodes(state))
    quotient = np.empty(grid.N + 1)
    quotient[1:-1] = np.abs(state.values) / grid.x
    quotient[0] = du[0]  # u(r)/r -> u'(0) at the origin
    quotient[-1] = 0.0
    return HardyReport(p, _trapezoid(quotient**p, grid.dx), _trapezoid(du**p, grid.dx))


def _hardy_analytic(f: Callable, df: Optional[Callable], p: float, upper: float) -> HardyReport:
    if df is None:
        def df(r, h=1e-6):
            return (f(r + h) - f(r - h)) / (2 * h)
    opts = dict(epsabs=1e-14, epsrel=1e-12, limit=400)
    lhs = integrate.quad(lambda r: abs(f(r) / r) ** p, 0.0, upper, **opts)[0]
    rhs = integrate.quad(lambda r: abs(df(r)) ** p, 0.0, upper, **opts)[0]
    return HardyReport(p, lhs, rhs)


def hardy_ratio(
    u: Union[State, Callable],
    p: float,
    derivative: Optional[Callable] = None,
    upper: float = math.inf,
) -> HardyReport:
    """Both sides of ``int_0^inf |u/r|^p dr <= (p/(p-1))^p int_0^inf |u'|^p dr``.

    ``u`` is either a :class:`State` (trapezoid rule on ``[0, L]`` with
    the spectral derivative) or a callable odd function, integrated
    adaptively on ``[0, upper]``.  ``derivative`` defaults to a central
    difference when a callable is given.
    """
    if not p > 1:
        raise DomainError(f"Hardy's inequality needs p > 1, got {p}")
    if isinstance(u, State):
        return _hardy_grid(u, float(p))
    return _hardy_analytic(u, derivative, float(p), upper)


# --- scaling ----------------------------------------------------------------------


def scale_state(state: State, lam: float, params: PhysParams, grid: Optional[Grid] = None) -> State:
    """``u_lam(x) = lam^{(2-b)/alpha} u(lam x)``, time relabelled ``t / lam^2``.

    With the default grid ``(L / lam, N)`` the scaled nodes coincide with
    the original ones and the map is exact.  For any other target grid
    the sine series is evaluated at ``lam * x'``.  When ``lam * L' < L``
    the part of the field beyond ``lam * L'`` would be cut off, so that
    is refused unless it carries negligible mass.
    """
    if not lam > 0:
        raise DomainError(f"scaling factor must be positive, got {lam}")
    factor = lam ** ((2.0 - params.b) / params.alpha)
    t_new = state.t / lam**2
    if grid is None:
        new_grid = Grid(state.grid.L / lam, state.grid.N)
        return State(new_grid, t_new, factor * state.values)
    reach = lam * grid.L
    if reach < state.grid.L * (1 - 1e-12):
        inside = state.grid.x <= reach
        outside_mass = np.sum(np.abs(state.values[~inside]) ** 2)
        if outside_mass > 1e-24 * max(np.sum(np.abs(state.values) ** 2), 1e-300):
            raise DomainError("scaled support overflows the target grid")
    return State(grid, t_new, factor * evaluate_series(state, lam * grid.x))


# --- scattering -------------------------------------------------------------------


def interaction_picture(state: State) -> State:
    """``v(t) = e^{-it Delta} u(t)``; the time label is kept."""
    return free_propagate(state, -state.t).replace(t=state.t)


def _h1_distance(a: State, b: State) -> float:
    return sobolev_norm(a.replace(values=a.values - b.values), 1.0, "inhomogeneous")


@dataclass
class ScatteringReport:
    times: list
    residuals: list
    u_plus: State
    final_mismatch: float
    tol: float
    verdict: str

    def to_dict(self) -> dict:
        return {
            "times": list(self.times),
            "residuals": list(self.residuals),
            "final_mismatch": self.final_mismatch,
            "u_plus_h1": sobolev_norm(self.u_plus, 1.0, "inhomogeneous"),
            "u_plus_mass": mass(self.u_plus),
            "tol": self.tol,
            "verdict": self.verdict,
        }


def scattering_verdict(residuals: Sequence[float], tol: float, floor: float = 0.0) -> str:
    """'scattered' iff the last three residuals are below ``tol`` and
    non-increasing.  Increases smaller than ``floor`` (round-off) are ignored."""
    tail = list(residuals)[-3:]
    if len(tail) < 3:
        return "undecided"
    small = all(r < tol for r in tail)
    monotone = all(b <= a + floor for a, b in zip(tail, tail[1:]))
    return "scattered" if small and monotone else "undecided"


def scattering_report(trajectory: Trajectory, window: Sequence[float], tol: float) -> ScatteringReport:
    """Interaction-picture residuals ``||v(t_{i+1}) - v(t_i)||_{H^1}`` over
    the window times; ``u_plus`` is ``v`` at the last window time."""
    times = sorted(float(t) for t in window)
    if len(times) < 2:
        raise DomainError("need at least two window times")
    try:
        states = [trajectory.state_at(t) for t in times]
    except DomainError as exc:
        raise DomainError(f"trajectory lacks a stored state at a window time: {exc}") from exc
    vs = [interaction_picture(s) for s in states]
    residuals = [_h1_distance(b, a) for a, b in zip(vs, vs[1:])]
    u_plus = vs[-1].replace(t=0.0)
    T = times[-1]
    mismatch = _h1_distance(states[-1], free_propagate(u_plus, T))
    floor = 1e-13 * sobolev_norm(u_plus, 1.0, "inhomogeneous")
    verdict = scattering_verdict(residuals, tol, floor)
    return ScatteringReport(times, residuals, u_plus, mismatch, tol, verdict)


# --- wave operator ----------------------------------------------------------------


@dataclass
class WaveOperatorReport:
    T_back: float
    mismatch: float
    mass_defect: float
    energy_defect: float
    u0_plus: State
    window: tuple

    def to_dict(self) -> dict:
        return {
            "T_back": self.T_back,
            "mismatch": self.mismatch,
            "mass_defect": self.mass_defect,
            "energy_defect": self.energy_defect,
            "window": list(self.window),
        }


def wave_operator_roundtrip(
    phi: State,
    T_back: float,
    schedule: Schedule,
    params: PhysParams,
    window_fraction: float = 0.5,
    on_wall: str = "warn",
) -> WaveOperatorReport:
    """Build ``u0+`` by evolving ``e^{i T Delta} phi`` back from ``T`` to 0,
    then run forward again and report ``sup ||u(t) - e^{it Delta} phi||_{H^1}``
    over ``t in [window_fraction * T, T]``.

    Also returns ``|M[u] - M[phi]|`` and ``|E[u] - ||phi_x||^2 / 2|``,
    both conserved-quantity identities of the wave operator.  The free
    reference flow uses the same walls as the solver, so reflections
    affect both sides alike.
    """
    if not T_back > 0:
        raise DomainError("T_back must be positive")
    back = Schedule(schedule.dt, T_back, output_every=0)
    start = free_propagate(phi.replace(t=0.0), T_back)
    u0 = evolve(start, back, params, observers=(), backward=True, on_wall=on_wall).final
    u0 = u0.replace(t=0.0)

    stride = max(schedule.output_every, 1)
    forward = Schedule(schedule.dt, T_back, output_every=stride)
    traj = evolve(u0, forward, params, observers=(), store_states=True, on_wall=on_wall)
    t_lo = window_fraction * T_back
    worst = 0.0
    for st in traj.states():
        if st.t >= t_lo - 1e-12:
            free = free_propagate(phi.replace(t=0.0), st.t)
            worst = max(worst, _h1_distance(st, free))
    kin = 0.5 * homogeneous_norm(u0, 1.0) ** 2
    e_u = kin + potential_energy(u0, params)
    e_phi = 0.5 * homogeneous_norm(phi, 1.0) ** 2
    return WaveOperatorReport(
        T_back=T_back,
        mismatch=worst,
        mass_defect=abs(mass(u0) - mass(phi)),
        energy_defect=abs(e_u - e_phi),
        u0_plus=u0,
        window=(t_lo, T_back),
    )


# --- small data -------------------------------------------------------------------


@dataclass
class SmallDataReport:
    pairs: list
    nonlinear: list
    linear: list
    ratios: list
    max_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "pairs": [[p.q, p.r] for p in self.pairs],
            "s": self.pairs[0].s if self.pairs else None,
            "nonlinear": self.nonlinear,
            "linear": self.linear,
            "ratios": self.ratios,
            "max_ratio": self.max_ratio,
            "passed": self.passed,
        }


def linear_companion(u0: State, trajectory: Trajectory) -> Trajectory:
    """Free evolution of ``u0`` sampled at the trajectory's stored times."""
    samples = []
    for st in trajectory.states():
        samples.append(Sample(st.t, free_propagate(u0, st.t - u0.t)))
    return Trajectory(samples, trajectory.grid, trajectory.params, trajectory.schedule, samples[-1].state)


def small_data_certificate(
    u0: State,
    trajectory: Trajectory,
    pairs: Sequence[AdmissiblePair],
    linear: Optional[Trajectory] = None,
) -> SmallDataReport:
    """Check ``||u||_S <= 2 ||e^{it Delta} u0||_S`` pair by pair.

    ``linear`` defaults to the exact free evolution of ``u0`` sampled at
    the same times as ``trajectory``.
    """
    s_c = trajectory.params.s_c
    for pair in pairs:
        if abs(pair.s - s_c) > 1e-12:
            raise DomainError(f"pair {pair} is not H^{s_c}-admissible")
    if linear is None:
        linear = linear_companion(u0, trajectory)
    nl, lin, ratios = [], [], []
    for pair in pairs:
        a = strichartz_norm(trajectory, pair)
        b = strichartz_norm(linear, pair)
        nl.append(a)
        lin.append(b)
        ratios.append(0.0 if b == 0 else a / b)
    max_ratio = max(ratios) if ratios else 0.0
    return SmallDataReport(list(pairs), nl, lin, ratios, max_ratio, max_ratio <= 2.0)

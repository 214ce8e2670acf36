"""Strang split-step evolution.

One step is ``phase(dt/2) o free(dt) o phase(dt/2)``.  Both subflows are
solved exactly, so the scheme is unitary in L2, time-reversible and has
no CFL restriction.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
import scipy.fft

from .domain import DomainError, Grid, PhysParams, State
from .nonlinear import _modulus_power, _weights, rotate
from .observables import DEFAULT_INTERVAL, ObservableSample, observe
from .transform import dst_forward

log = logging.getLogger(__name__)

#: number of nodes next to x = L watched by the wall-reflection alarm
WALL_NODES = 5
WALL_THRESHOLD = 1e-8
#: per-node phase cap used when alpha <= b
ORIGIN_PHASE_CAP = math.pi / 4


class NumericalFault(RuntimeError):
    """A non-finite value appeared; ``last_good`` is the last finite state."""

    def __init__(self, message: str, last_good: State):
        super().__init__(message)
        self.last_good = last_good


class WallReflectionWarning(UserWarning):
    pass


class DomainSizeWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Schedule:
    dt: float
    t_max: float
    output_every: int = 1
    checkpoint_every: int = 0

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise DomainError(f"dt must be positive, got {self.dt}")
        if self.t_max != 0 and self.t_max < self.dt:
            raise DomainError(f"t_max={self.t_max} must be 0 or at least dt={self.dt}")
        if self.t_max < 0:
            raise DomainError("t_max must be non-negative")
        if self.output_every < 0 or self.checkpoint_every < 0:
            raise DomainError("strides must be non-negative")

    @property
    def n_steps(self) -> int:
        return math.ceil(self.t_max / self.dt - 1e-9)

    def step_of(self, t: float) -> int:
        """Index of the step landing on time ``t`` (must be a multiple of dt)."""
        n = round(t / self.dt)
        if abs(n * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise DomainError(f"time {t} is not a multiple of dt={self.dt}")
        return n


@dataclass
class Sample:
    t: float
    state: Optional[State] = None
    obs: Optional[ObservableSample] = None


@dataclass
class Trajectory:
    """Samples of one run in time order (decreasing for backward runs)."""

    samples: list
    grid: Grid
    params: PhysParams
    schedule: Schedule
    final: State
    flags: dict = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def states(self) -> list:
        return [s.state for s in self.samples if s.state is not None]

    def observables(self) -> list:
        return [s.obs for s in self.samples if s.obs is not None]

    def state_at(self, t: float, tol: float = 1e-9) -> State:
        for s in self.samples:
            if s.state is not None and abs(s.t - t) <= tol * max(1.0, abs(t)):
                return s.state
        raise DomainError(f"no stored state at t={t}")


class _Stepper:
    """Raw-array Strang stepper with precomputed multipliers."""

    def __init__(self, grid: Grid, params: PhysParams, dt: float):
        self.grid = grid
        self.params = params
        self.dt = dt
        # free multiplier folded together with the DST-I normalisation
        self.kinetic = np.exp(-1j * grid.k**2 * dt) * (0.5 / grid.N)
        self.nonlinear = not params.linear_only
        self.w_half = 0.5 * dt * _weights(grid, params.b) if self.nonlinear else None
        self.cap = ORIGIN_PHASE_CAP if params.origin_resolution_limited else None
        self.capped = False

    def _half(self, u: np.ndarray) -> np.ndarray:
        theta = self.w_half * _modulus_power(u, self.params.alpha)
        if self.cap is not None:
            over = np.abs(theta) > self.cap
            if over.any():
                self.capped = True
                theta = np.clip(theta, -self.cap, self.cap)
        return rotate(u, theta)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        if self.nonlinear:
            u = self._half(u)
        u = scipy.fft.dst(scipy.fft.dst(u, type=1) * self.kinetic, type=1)
        if self.nonlinear:
            u = self._half(u)
        return u


@lru_cache(maxsize=16)
def _stepper(grid: Grid, params: PhysParams, dt: float) -> _Stepper:
    return _Stepper(grid, params, dt)


def strang_step(state: State, dt: float, params: PhysParams) -> State:
    """One symmetric split step ``phase(dt/2) o free(dt) o phase(dt/2)``."""
    if dt == 0:
        return state
    values = _stepper(state.grid, params, float(dt))(state.values)
    return State(state.grid, state.t + dt, values)


def wall_fraction(values: np.ndarray) -> float:
    """Share of the discrete mass sitting on the last ``WALL_NODES`` nodes."""
    mod2 = values.real**2 + values.imag**2
    total = mod2.sum()
    if total == 0:
        return 0.0
    return float(mod2[-WALL_NODES:].sum() / total)


def _quantile_position(weights: np.ndarray, positions: np.ndarray, level: float) -> float:
    cum = np.cumsum(weights)
    if cum[-1] == 0:
        return 0.0
    idx = int(np.searchsorted(cum, level * cum[-1]))
    return float(positions[min(idx, positions.size - 1)])


def domain_requirement(state: State, t_max: float, level: float = 0.999) -> float:
    """Rule-of-thumb half-length ``x_support + 2 k_eff t_max``.

    ``x_support`` and ``k_eff`` are the positions holding ``level`` of the
    mass in physical and sine space; ``2k`` is the group velocity.
    """
    grid = state.grid
    mod2 = np.abs(state.values) ** 2
    x_support = _quantile_position(mod2, grid.x, level)
    c2 = np.abs(dst_forward(state.values, grid.N)) ** 2
    k_eff = _quantile_position(c2, grid.k, level)
    return x_support + 2.0 * k_eff * t_max


def evolve(
    state: State,
    schedule: Schedule,
    params: PhysParams,
    observers: Optional[Iterable[str]] = None,
    *,
    interval: Sequence[float] = DEFAULT_INTERVAL,
    store_states: bool = False,
    store_times: Sequence[float] = (),
    backward: bool = False,
    checkpoint: Optional[Callable[[State], None]] = None,
    on_wall: str = "warn",
) -> Trajectory:
    """Integrate from ``state`` for ``schedule.n_steps`` Strang steps.

    Observables named by ``observers`` are recorded at t = 0, every
    ``output_every`` steps and at the final step (``observers=()``
    records none; ``None`` records all).  Full states are kept at those
    samples when ``store_states`` is set, and always at ``store_times``
    (offsets from the initial time).

    ``on_wall`` controls the wall-reflection alarm, raised when more than
    ``WALL_THRESHOLD`` of the mass sits on the last nodes before ``x = L``:
    ``'warn'`` records the first alarm time in ``flags`` and warns once,
    ``'raise'`` aborts, ``'ignore'`` only records.

    Raises :class:`NumericalFault` carrying the last finite state if the
    field stops being finite.
    """
    if on_wall not in ("warn", "raise", "ignore"):
        raise ValueError(f"on_wall must be 'warn', 'raise' or 'ignore', got {on_wall!r}")
    grid = state.grid
    sign = -1.0 if backward else 1.0
    dt = sign * schedule.dt
    n_steps = schedule.n_steps
    t0 = state.t
    record_obs = observers is None or bool(list(observers))
    selectors = None if observers is None else list(observers)

    store_steps = {schedule.step_of(t) for t in store_times}
    if any(s < 0 or s > n_steps for s in store_steps):
        raise DomainError("store_times must lie within [0, t_max]")
    stride = schedule.output_every
    flags: dict = {"wall_alarm_time": None, "origin_resolution_limited": False}

    needed = domain_requirement(state, schedule.t_max)
    if needed > grid.L:
        flags["domain_rule_of_thumb"] = needed
        warnings.warn(
            f"L={grid.L} is below the dispersion estimate {needed:.3g} for t_max={schedule.t_max}; "
            "waves may reach the wall",
            DomainSizeWarning,
            stacklevel=2,
        )

    stepper = _Stepper(grid, params, dt)
    samples: list = []

    def take(step: int, values: np.ndarray) -> None:
        wanted = step == 0 or step == n_steps or bool(stride and step % stride == 0)
        keep_state = step in store_steps or (store_states and wanted)
        if not (wanted or keep_state):
            return
        t = t0 + step * dt
        st = State(grid, t, values)
        if flags["wall_alarm_time"] is None and wall_fraction(values) > WALL_THRESHOLD:
            flags["wall_alarm_time"] = t
            msg = f"wall-reflection alarm at t={t:.6g}: mass reaches the last {WALL_NODES} nodes"
            if on_wall == "raise":
                raise NumericalFault(msg, st)
            if on_wall == "warn":
                warnings.warn(msg, WallReflectionWarning, stacklevel=3)
        obs = observe(st, params, interval, selectors) if (record_obs and wanted) else None
        samples.append(Sample(t, st if keep_state else None, obs))

    u = state.values
    take(0, u)
    for step in range(1, n_steps + 1):
        # overflow shows up as non-finite values and is reported below
        with np.errstate(over="ignore", invalid="ignore"):
            u_new = stepper(u)
        if not np.isfinite(u_new).all():
            last_good = State(grid, t0 + (step - 1) * dt, u)
            raise NumericalFault(
                f"non-finite field at step {step} (last good t={last_good.t:.6g})", last_good
            )
        u = u_new
        if checkpoint is not None and schedule.checkpoint_every and step % schedule.checkpoint_every == 0:
            checkpoint(State(grid, t0 + step * dt, u))
        take(step, u)

    flags["origin_resolution_limited"] = stepper.capped
    final = State(grid, t0 + n_steps * dt, u)
    if stepper.capped:
        log.warning("phase increments were capped near the origin (alpha <= b)")
    return Trajectory(samples, grid, params, schedule, final, flags)


# --- convergence ----------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceStudy:
    dt_list: tuple
    errors: tuple
    reference_dt: float
    order: float


def _run_to(initial: State, params: PhysParams, t_final: float, dt: float) -> State:
    sched = Schedule(dt, t_final, output_every=0)
    return evolve(initial, sched, params, observers=(), on_wall="ignore").final


def _check_divides(t_final: float, dt: float) -> None:
    n = t_final / dt
    if abs(n - round(n)) > 1e-9 * max(1.0, n):
        raise DomainError(f"dt={dt} does not divide t_final={t_final}")


def convergence_study(
    initial: State,
    params: PhysParams,
    t_final: float,
    dt_list: Sequence[float],
    refine: int = 8,
) -> ConvergenceStudy:
    """Self-convergence against a reference run at ``min(dt_list)/refine``.

    The order is the least-squares slope of ``log(error)`` against
    ``log(dt)``; it is ``inf`` when every error is at roundoff level.
    """
    dts = [float(d) for d in dt_list]
    if len(dts) < 3:
        raise DomainError("need at least 3 step sizes")
    if len(set(dts)) != len(dts) or any(d <= 0 for d in dts):
        raise DomainError("step sizes must be distinct and positive")
    for d in dts:
        _check_divides(t_final, d)
    ref_dt = min(dts) / refine
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DomainSizeWarning)
        ref = _run_to(initial, params, t_final, ref_dt).values
        errs = []
        for d in dts:
            u = _run_to(initial, params, t_final, d).values
            errs.append(math.sqrt(2.0 * initial.grid.dx * float(np.sum(np.abs(u - ref) ** 2))))
    scale = math.sqrt(2.0 * initial.grid.dx * float(np.sum(np.abs(ref) ** 2)))
    floor = 1e-13 * max(scale, 1e-300)
    if all(e <= floor for e in errs):
        order = math.inf
    else:
        if any(e <= floor for e in errs):
            raise DomainError("some errors are at roundoff level; cannot fit an order")
        order = float(np.polyfit(np.log(dts), np.log(errs), 1)[0])
    return ConvergenceStudy(tuple(dts), tuple(errs), ref_dt, order)


def convergence_order(initial: State, params: PhysParams, t_final: float, dt_list: Sequence[float]) -> float:
    return convergence_study(initial, params, t_final, dt_list).order

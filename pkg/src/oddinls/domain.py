"""Core value types: the half-line grid, physical parameters, states and
the catalogue of odd initial conditions.

Only the half line ``(0, L)`` is stored.  A field on the grid stands for
its odd extension to ``[-L, L]``, which vanishes at ``x = 0`` and at the
Dirichlet walls ``x = +-L``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

#: relative tail level at x = L that a sampled packet must decay below
TAIL_TOLERANCE = 1e-12

INITIAL_KINDS = ("odd_gaussian", "sine_packet", "sine_mode", "file")


class DomainError(ValueError):
    """Raised for invalid grids, parameters or initial data."""


class ScatteringRegimeWarning(UserWarning):
    """Parameters lie outside the range where scattering is guaranteed."""


@dataclass(frozen=True)
class Grid:
    """Interior nodes ``x_j = j L / N`` (``j = 1..N-1``) of a sine-I grid.

    Use :func:`make_grid` to build one with validation.  ``N`` does not
    have to be a power of two, but transforms are fastest when it is.
    """

    L: float
    N: int

    def __post_init__(self):
        if not np.isfinite(self.L) or self.L <= 0:
            raise DomainError(f"grid half-length must be positive, got L={self.L}")
        if int(self.N) != self.N or self.N < 8:
            raise DomainError(f"need an integer N >= 8 spectral modes, got N={self.N}")
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "N", int(self.N))

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def size(self) -> int:
        """Number of stored values, ``N - 1``."""
        return self.N - 1

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.N) * self.dx

    @property
    def k(self) -> np.ndarray:
        """Sine wavenumbers ``k_m = m pi / L`` for ``m = 1..N-1``."""
        return np.arange(1, self.N) * (np.pi / self.L)

    def to_dict(self) -> dict:
        return {"L": self.L, "N": self.N}


def make_grid(L: float, N: int) -> Grid:
    return Grid(L, N)


@dataclass(frozen=True)
class PhysParams:
    """Exponents of the nonlinearity ``|x|^{-b} |u|^alpha u``.

    ``linear_only`` switches the nonlinear subflow off.  It exists as a
    test hook for checks against the exact free evolution.
    """

    alpha: float
    b: float
    linear_only: bool = False

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise DomainError(f"alpha must be positive, got {self.alpha}")
        if not (0 < self.b < 1):
            raise DomainError(f"b must lie in (0, 1), got {self.b}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "b", float(self.b))

    @property
    def s_c(self) -> float:
        """Critical regularity ``1/2 - (2 - b)/alpha``; always below 1/2."""
        return 0.5 - (2.0 - self.b) / self.alpha

    @property
    def mass_critical_alpha(self) -> float:
        return 4.0 - 2.0 * self.b

    @property
    def scattering_regime(self) -> bool:
        """True in the mass-supercritical range ``alpha > 4 - 2b``."""
        return self.alpha > self.mass_critical_alpha

    @property
    def origin_resolution_limited(self) -> bool:
        # |x|^{-b}|u|^alpha ~ |x|^{alpha-b} near 0 only vanishes for alpha > b
        return self.alpha <= self.b

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "b": self.b}


def make_params(alpha: float, b: float, linear_only: bool = False) -> PhysParams:
    """Validate ``(alpha, b)``.

    Outside ``alpha > 4 - 2b`` a :class:`ScatteringRegimeWarning` is
    issued and ``params.scattering_regime`` is False; the object is
    still returned since local well-posedness holds for every alpha > 0.
    """
    params = PhysParams(alpha, b, linear_only)
    if not params.scattering_regime:
        warnings.warn(
            f"alpha={params.alpha} <= 4-2b={params.mass_critical_alpha}: "
            "scattering certificates have no theoretical backing here",
            ScatteringRegimeWarning,
            stacklevel=2,
        )
    return params


@dataclass(frozen=True, eq=False)
class State:
    """Complex field at the interior nodes of ``grid`` at time ``t``."""

    grid: Grid
    t: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.complex128)
        if v.shape != (self.grid.size,):
            raise DomainError(
                f"expected {self.grid.size} node values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise DomainError("state contains NaN or Inf")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "t", float(self.t))

    def replace(self, values=None, t=None) -> "State":
        return State(
            self.grid,
            self.t if t is None else t,
            self.values if values is None else values,
        )

    @classmethod
    def zeros(cls, grid: Grid, t: float = 0.0) -> "State":
        return cls(grid, t, np.zeros(grid.size, dtype=np.complex128))


@dataclass(frozen=True)
class InitialSpec:
    """One entry of the initial-condition catalogue.

    ``odd_gaussian``  ``A x exp(-width x^2)``
    ``sine_packet``   ``f(x) - f(-x)`` with ``f = A sin(k x) exp(-width (x - center)^2)``
    ``sine_mode``     ``A sin(k_m x)`` for the grid wavenumber of index ``mode``
    ``file``          node data read from ``path`` (see :func:`load_profile`)
    """

    kind: str
    amplitude: float = 1.0
    width: float = 1.0
    center: float = 0.0
    wavenumber: float = 1.0
    mode: int = 1
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise DomainError(f"unknown initial kind {self.kind!r}; choose from {INITIAL_KINDS}")
        if self.kind in ("odd_gaussian", "sine_packet") and not self.width > 0:
            raise DomainError(f"width must be positive, got {self.width}")
        if self.kind == "sine_mode" and (int(self.mode) != self.mode or self.mode < 1):
            raise DomainError(f"mode index must be a positive integer, got {self.mode}")
        if self.kind == "file" and not self.path:
            raise DomainError("kind 'file' needs a path")

    def analytic(self) -> Callable[[np.ndarray], np.ndarray]:
        """The odd generator ``f`` on all of R (not available for files)."""
        A, s = self.amplitude, self.width
        if self.kind == "odd_gaussian":
            return lambda x: A * x * np.exp(-s * x**2)
        if self.kind == "sine_packet":
            k, x0 = self.wavenumber, self.center

            def f(x):
                x = np.asarray(x, dtype=float)
                one = np.sin(k * x) * np.exp(-s * (x - x0) ** 2)
                other = np.sin(-k * x) * np.exp(-s * (-x - x0) ** 2)
                return A * (one - other)

            return f
        if self.kind == "sine_mode":
            raise DomainError("sine_mode depends on the grid; use sample_initial")
        raise DomainError("file data has no analytic generator")

    def envelope(self, x: float) -> float:
        """Upper bound of ``|f|`` at ``x`` used by the domain-size guard."""
        A, s = abs(self.amplitude), self.width
        if self.kind == "odd_gaussian":
            return A * abs(x) * np.exp(-s * x * x)
        if self.kind == "sine_packet":
            x0 = self.center
            return A * (np.exp(-s * (x - x0) ** 2) + np.exp(-s * (x + x0) ** 2))
        return 0.0


def load_profile(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``(x, u)`` from ``.npz`` (arrays ``x`` and ``u``) or from a
    whitespace/comma separated text file with columns ``x re im``."""
    path = Path(path)
    try:
        if path.suffix == ".npz":
            with np.load(path) as data:
                x = np.asarray(data["x"], dtype=float)
                u = np.asarray(data["u"], dtype=np.complex128)
        else:
            text = path.read_text().replace(",", " ")
            rows = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
            table = np.array([[float(v) for v in ln.split()] for ln in rows])
            if table.ndim != 2 or table.shape[1] not in (2, 3):
                raise ValueError("expected 2 or 3 columns: x re [im]")
            x = table[:, 0]
            u = table[:, 1] + (1j * table[:, 2] if table.shape[1] == 3 else 0)
    except (OSError, KeyError, ValueError) as exc:
        raise DomainError(f"cannot read initial profile {path}: {exc}") from exc
    if x.ndim != 1 or x.shape != u.shape or x.size < 2:
        raise DomainError(f"profile {path} needs matching 1-D x and u with >= 2 points")
    if np.any(np.diff(x) <= 0):
        raise DomainError(f"profile {path}: x must be strictly increasing")
    return x, u


def _sample_file(spec: InitialSpec, grid: Grid) -> np.ndarray:
    x, u = load_profile(spec.path)
    scale = np.abs(u).max()
    if scale == 0:
        return np.zeros(grid.size, dtype=np.complex128)
    if np.any(x < 0):
        neg = x < 0
        mirrored = -np.interp(-x[neg], x, u.real) - 1j * np.interp(-x[neg], x, u.imag)
        if np.abs(u[neg] - mirrored).max() > 1e-6 * scale:
            raise DomainError(f"profile {spec.path} is not odd: u(-x) != -u(x)")
        x, u = x[~neg], u[~neg]
    if x.size < 2:
        raise DomainError(f"profile {spec.path} has fewer than two points with x >= 0")
    # linear extrapolation to the origin must land on zero
    u0 = u[0] - x[0] * (u[1] - u[0]) / (x[1] - x[0])
    if abs(u0) > 1e-6 * scale:
        raise DomainError(
            f"profile {spec.path} is not odd: extrapolated |u(0)|={abs(u0):.3g}"
        )
    xs = grid.x
    re = np.interp(xs, np.r_[0.0, x], np.r_[0.0, u.real], right=0.0)
    im = np.interp(xs, np.r_[0.0, x], np.r_[0.0, u.imag], right=0.0)
    return re + 1j * im


def sample_initial(spec: InitialSpec, grid: Grid) -> State:
    """Sample an initial condition on ``grid`` at ``t = 0``.

    Raises :class:`DomainError` if the packet has not decayed below
    ``TAIL_TOLERANCE`` of its peak at ``x = L``.
    """
    if spec.kind == "sine_mode":
        if spec.mode > grid.N - 1:
            raise DomainError(f"mode {spec.mode} exceeds grid resolution N-1={grid.N - 1}")
        k = spec.mode * np.pi / grid.L
        values = spec.amplitude * np.sin(k * grid.x)
        return State(grid, 0.0, values)

    if spec.kind == "file":
        values = _sample_file(spec, grid)
        peak = np.abs(values).max()
        tail = np.abs(values[-1])
    else:
        values = spec.analytic()(grid.x)
        peak = np.abs(values).max()
        tail = spec.envelope(grid.L)
    if peak > 0 and tail > TAIL_TOLERANCE * peak:
        raise DomainError(
            f"domain too small: |u(L)|/peak = {tail / peak:.3g} exceeds {TAIL_TOLERANCE:g} "
            f"(L={grid.L})"
        )
    return State(grid, 0.0, values)

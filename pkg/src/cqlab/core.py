"""Periodic grids, field containers, and pseudospectral calculus.

Conventions
-----------
Position grids are uniform and periodic: node i sits at origin + i*spacing,
the last node being one spacing short of origin + extent.  Natural units
hbar = m = e = 1 are the defaults; every routine takes explicit parameters so
other unit choices work unchanged.

The momentum representation of a state psi is

    psi_hat(p) = (2*pi*hbar)**(-d/2) * integral exp(-i p.q / hbar) psi(q) dq

so the conjugate grid has spacing 2*pi*hbar/extent per axis and is centred on
zero.  Plancherel's identity holds to round-off under this pairing.

Spectral derivatives are exact for band-limited fields; the Nyquist line is
zeroed for odd-order derivatives so real fields stay real.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline, RegularGridInterpolator

from .errors import ValidationError

__all__ = [
    "GridSpec",
    "RealField",
    "ComplexField",
    "PhysicalParams",
    "integrate",
    "spectral_gradient",
    "spectral_laplacian",
    "fourier_shift",
    "to_momentum_space",
    "from_momentum_space",
    "periodic_interpolator",
    "edge_mass_fraction",
]


def _as_tuple(x, dims: int, kind=float) -> tuple:
    if np.isscalar(x):
        return tuple(kind(x) for _ in range(dims))
    t = tuple(kind(v) for v in x)
    if len(t) != dims:
        raise ValidationError(f"expected {dims} entries, got {len(t)}")
    return t


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid on a box [origin, origin + extent) per axis."""

    extents: tuple[float, ...]
    points: tuple[int, ...]
    origins: tuple[float, ...] = ()

    def __post_init__(self):
        extents = tuple(float(e) for e in self.extents)
        points = tuple(int(n) for n in self.points)
        if not 1 <= len(extents) <= 2:
            raise ValidationError("only 1D and 2D grids are supported")
        if len(points) != len(extents):
            raise ValidationError("extents and points must have equal length")
        if any(e <= 0 for e in extents):
            raise ValidationError("grid extents must be positive")
        if any(n < 4 for n in points):
            raise ValidationError("need at least 4 points per axis")
        origins = self.origins or tuple(0.0 for _ in extents)
        origins = tuple(float(o) for o in origins)
        if len(origins) != len(extents):
            raise ValidationError("origins must match the number of axes")
        object.__setattr__(self, "extents", extents)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "origins", origins)

    @classmethod
    def line(cls, extent: float, points: int, origin: float = 0.0) -> "GridSpec":
        return cls((float(extent),), (int(points),), (float(origin),))

    @classmethod
    def square(cls, extent, points, origin=0.0) -> "GridSpec":
        ext = _as_tuple(extent, 2, float)
        pts = _as_tuple(points, 2, int)
        org = _as_tuple(origin, 2, float)
        return cls(ext, pts, org)

    @property
    def dims(self) -> int:
        return len(self.extents)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.points

    @property
    def spacings(self) -> tuple[float, ...]:
        return tuple(e / n for e, n in zip(self.extents, self.points))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacings))

    @property
    def node_count(self) -> int:
        return int(np.prod(self.points))

    def axis(self, i: int) -> np.ndarray:
        return self.origins[i] + np.arange(self.points[i]) * self.spacings[i]

    def axes(self) -> tuple[np.ndarray, ...]:
        return tuple(self.axis(i) for i in range(self.dims))

    def meshes(self) -> tuple[np.ndarray, ...]:
        if self.dims == 1:
            return (self.axis(0),)
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def momentum_grid(self, hbar: float = 1.0) -> "GridSpec":
        """Conjugate grid: spacing 2*pi*hbar/extent per axis, centred on zero."""
        dps = tuple(2.0 * np.pi * hbar / e for e in self.extents)
        exts = tuple(dp * n for dp, n in zip(dps, self.points))
        orgs = tuple(-(n // 2) * dp for dp, n in zip(dps, self.points))
        return GridSpec(exts, self.points, orgs)

    def integer_wavenumbers(self, axis: int) -> np.ndarray:
        """FFT-ordered integer mode numbers [0, 1, ..., -N/2, ..., -1]."""
        n = self.points[axis]
        return ((np.arange(n) + n // 2) % n) - n // 2

    def angular_wavenumbers(self, axis: int) -> np.ndarray:
        """FFT-ordered angular wavenumbers 2*pi*k/extent along one axis."""
        return self.integer_wavenumbers(axis) * (2.0 * np.pi / self.extents[axis])


def _check_samples(grid: GridSpec, samples: np.ndarray, dtype) -> np.ndarray:
    arr = np.array(samples, dtype=dtype, copy=True)
    if arr.shape != grid.shape:
        raise ValidationError(f"samples shape {arr.shape} != grid shape {grid.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("field samples must be finite")
    arr.flags.writeable = False
    return arr


class _FieldArithmetic:
    """Pointwise arithmetic; field values are immutable after construction."""

    def _wrap(self, values: np.ndarray):
        if np.iscomplexobj(values):
            return ComplexField(self.grid, values)
        return RealField(self.grid, values)

    def _other_samples(self, other):
        if isinstance(other, _FieldArithmetic):
            if other.grid != self.grid:
                raise ValidationError("field arithmetic requires a shared grid")
            return other.samples
        return other

    def __add__(self, other):
        return self._wrap(self.samples + self._other_samples(other))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.samples - self._other_samples(other))

    def __rsub__(self, other):
        return self._wrap(self._other_samples(other) - self.samples)

    def __mul__(self, other):
        return self._wrap(self.samples * self._other_samples(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.samples / self._other_samples(other))

    def __neg__(self):
        return self._wrap(-self.samples)


@dataclass(frozen=True, eq=False)
class RealField(_FieldArithmetic):
    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        if np.iscomplexobj(self.samples):
            raise ValidationError("RealField requires real samples")
        object.__setattr__(self, "samples", _check_samples(self.grid, self.samples, np.float64))

    @classmethod
    def zeros(cls, grid: GridSpec) -> "RealField":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "RealField":
        return cls(grid, np.asarray(fn(*grid.meshes()), dtype=np.float64))


@dataclass(frozen=True, eq=False)
class ComplexField(_FieldArithmetic):
    grid: GridSpec
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", _check_samples(self.grid, self.samples, np.complex128))

    @classmethod
    def from_function(cls, grid: GridSpec, fn: Callable) -> "ComplexField":
        return cls(grid, np.asarray(fn(*grid.meshes()), dtype=np.complex128))

    def conj(self) -> "ComplexField":
        return ComplexField(self.grid, np.conj(self.samples))


@dataclass(frozen=True)
class PhysicalParams:
    """Global constants; natural units by default."""

    hbar: float = 1.0
    mass: float = 1.0
    charge: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.hbar <= 0 or self.mass <= 0:
            raise ValidationError("hbar and mass must be positive")
        if self.beta < 0:
            raise ValidationError("beta must be non-negative")


def integrate(field) -> float | complex:
    """Rectangle rule; spectrally accurate for smooth periodic integrands."""
    total = field.samples.sum() * field.grid.cell_volume
    if isinstance(field, RealField):
        return float(total)
    return complex(total)


def _derivative_spectrum(samples: np.ndarray, grid: GridSpec, axis: int) -> np.ndarray:
    k = grid.angular_wavenumbers(axis)
    shape = [1] * grid.dims
    shape[axis] = grid.points[axis]
    spec = np.fft.fft(samples, axis=axis)
    spec *= 1j * k.reshape(shape)
    n = grid.points[axis]
    if n % 2 == 0:
        idx = [slice(None)] * grid.dims
        idx[axis] = n // 2
        spec[tuple(idx)] = 0.0
    return spec


def spectral_gradient(field, axis: int = 0):
    """d/dq along one axis via FFT; exact for band-limited periodic fields."""
    grid = field.grid
    if not 0 <= axis < grid.dims:
        raise ValidationError(f"axis {axis} out of range for {grid.dims}D grid")
    out = np.fft.ifft(_derivative_spectrum(field.samples, grid, axis), axis=axis)
    if isinstance(field, RealField):
        return RealField(grid, out.real)
    return ComplexField(grid, out)


def spectral_laplacian(field):
    grid = field.grid
    spec = np.fft.fftn(field.samples)
    for axis in range(grid.dims):
        k = grid.angular_wavenumbers(axis)
        shape = [1] * grid.dims
        shape[axis] = grid.points[axis]
        spec_axis = spec * (-(k ** 2)).reshape(shape)
        if axis == 0:
            acc = spec_axis
        else:
            acc = acc + spec_axis
    out = np.fft.ifftn(acc)
    if isinstance(field, RealField):
        return RealField(grid, out.real)
    return ComplexField(grid, out)


def fourier_shift(field, shifts):
    """Translate a periodic field: output(q) = input(q - shift)."""
    grid = field.grid
    shifts = _as_tuple(shifts, grid.dims, float)
    spec = np.fft.fftn(field.samples)
    for axis in range(grid.dims):
        k = grid.angular_wavenumbers(axis)
        shape = [1] * grid.dims
        shape[axis] = grid.points[axis]
        spec *= np.exp(-1j * k * shifts[axis]).reshape(shape)
    out = np.fft.ifftn(spec)
    if isinstance(field, RealField):
        return RealField(grid, out.real)
    return ComplexField(grid, out)


def to_momentum_space(psi: ComplexField, hbar: float = 1.0) -> ComplexField:
    """Unitary map onto the conjugate grid (see module docstring for phases)."""
    grid = psi.grid
    d = grid.dims
    spec = np.fft.fftn(psi.samples) * grid.cell_volume * (2.0 * np.pi * hbar) ** (-d / 2.0)
    # fft order -> ascending momentum order
    spec = np.fft.fftshift(spec)
    phase = _origin_phase(grid, hbar)
    return ComplexField(grid.momentum_grid(hbar), spec * phase)


def from_momentum_space(psi_hat: ComplexField, position_grid: GridSpec, hbar: float = 1.0) -> ComplexField:
    grid = position_grid
    d = grid.dims
    expected = grid.momentum_grid(hbar)
    if psi_hat.grid != expected:
        raise ValidationError("momentum field does not live on the conjugate grid")
    spec = np.fft.ifftshift(psi_hat.samples / _origin_phase(grid, hbar))
    out = np.fft.ifftn(spec) * (2.0 * np.pi * hbar) ** (d / 2.0) / grid.cell_volume
    return ComplexField(grid, out)


def _origin_phase(grid: GridSpec, hbar: float) -> np.ndarray:
    """Phase factor exp(-i p.origin / hbar) on the shifted momentum grid.

    The FFT references node 0; a nonzero box origin shifts every momentum
    component's phase by exp(-i p q0 / hbar).
    """
    mom = grid.momentum_grid(hbar)
    out = np.ones(grid.shape, dtype=np.complex128)
    for axis in range(grid.dims):
        p = mom.axis(axis)
        shape = [1] * grid.dims
        shape[axis] = grid.points[axis]
        out = out * np.exp(-1j * p * grid.origins[axis] / hbar).reshape(shape)
    return out


def periodic_interpolator(field: RealField) -> Callable[[np.ndarray], np.ndarray]:
    """Cubic interpolation with periodic wrap-around.

    Returns a callable taking positions of shape (M,) in 1D or (M, 2) in 2D.
    """
    grid = field.grid
    if grid.dims == 1:
        x = np.append(grid.axis(0), grid.origins[0] + grid.extents[0])
        y = np.append(field.samples, field.samples[0])
        spline = CubicSpline(x, y, bc_type="periodic")

        def eval1d(points: np.ndarray) -> np.ndarray:
            pts = np.asarray(points, dtype=float).reshape(-1)
            wrapped = grid.origins[0] + np.mod(pts - grid.origins[0], grid.extents[0])
            return spline(wrapped)

        return eval1d

    # 2D: pad three wrap columns so cubic stencils never leave the table
    pad = 3
    ax0 = grid.axis(0)
    ax1 = grid.axis(1)
    x0 = np.concatenate([ax0, grid.origins[0] + grid.extents[0] + np.arange(pad) * grid.spacings[0]])
    x1 = np.concatenate([ax1, grid.origins[1] + grid.extents[1] + np.arange(pad) * grid.spacings[1]])
    vals = np.pad(field.samples, ((0, pad), (0, pad)), mode="wrap")
    interp = RegularGridInterpolator((x0, x1), vals, method="cubic")

    def eval2d(points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        wrapped = np.empty_like(pts)
        for i in range(2):
            wrapped[:, i] = grid.origins[i] + np.mod(pts[:, i] - grid.origins[i], grid.extents[i])
        return interp(wrapped)

    return eval2d


def edge_mass_fraction(density: RealField, cells: int = 2) -> float:
    """Fraction of integrated mass within `cells` nodes of the box boundary."""
    n = density.samples
    mask = np.zeros(n.shape, dtype=bool)
    for axis in range(density.grid.dims):
        idx_lo = [slice(None)] * density.grid.dims
        idx_hi = [slice(None)] * density.grid.dims
        idx_lo[axis] = slice(0, cells)
        idx_hi[axis] = slice(-cells, None)
        mask[tuple(idx_lo)] = True
        mask[tuple(idx_hi)] = True
    total = float(np.abs(n).sum())
    if total == 0.0:
        return 0.0
    return float(np.abs(n[mask]).sum() / total)

"""Scalar and vector potential specifications.

A potential is stored as an exact polynomial part

    V(q) = 1/2 q . quad . q + lin . q + const

plus an optional periodic remainder sampled on a grid.  The split matters:
field solvers evolve the polynomial action coefficients by ordinary
differential equations (exact on the torus) and only the periodic remainder
through spectral calculus, so confining and uniform-force potentials work on
periodic boxes without Gibbs artifacts.

The optional vector potential A is carried as a callable returning per-axis
samples; most solvers require A = 0 and accept gauge-reduced problems only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import GridSpec, RealField, periodic_interpolator, spectral_gradient
from .errors import ValidationError

__all__ = ["PotentialSpec"]


def _poly_values(coords: tuple[np.ndarray, ...], quad: np.ndarray, lin: np.ndarray, const: float) -> np.ndarray:
    d = len(coords)
    out = np.full(np.shape(coords[0]), const, dtype=float)
    for i in range(d):
        out += lin[i] * coords[i]
        for j in range(d):
            out += 0.5 * quad[i, j] * coords[i] * coords[j]
    return out


def _poly_gradient(coords: tuple[np.ndarray, ...], quad: np.ndarray, lin: np.ndarray) -> list[np.ndarray]:
    d = len(coords)
    return [lin[i] + sum(quad[i, j] * coords[j] for j in range(d)) for i in range(d)]


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    """V = polynomial + periodic remainder, with optional vector potential."""

    tag: str
    dims: int
    quad: np.ndarray
    lin: np.ndarray
    const: float = 0.0
    periodic: Callable[[GridSpec, float], np.ndarray] | None = None
    periodic_gradient: Callable[[np.ndarray, float], np.ndarray] | None = None
    vector: Callable[[GridSpec, float], tuple[np.ndarray, ...]] | None = None
    static: bool = True

    def __post_init__(self):
        quad = np.array(self.quad, dtype=float)
        lin = np.array(self.lin, dtype=float)
        if quad.shape != (self.dims, self.dims):
            raise ValidationError(f"quad must be ({self.dims},{self.dims})")
        if not np.allclose(quad, quad.T):
            raise ValidationError("quad must be symmetric")
        if lin.shape != (self.dims,):
            raise ValidationError(f"lin must have shape ({self.dims},)")
        quad.flags.writeable = False
        lin.flags.writeable = False
        object.__setattr__(self, "quad", quad)
        object.__setattr__(self, "lin", lin)
        object.__setattr__(self, "const", float(self.const))

    # -- constructors ------------------------------------------------------

    @classmethod
    def free(cls, dims: int = 1) -> "PotentialSpec":
        return cls("free", dims, np.zeros((dims, dims)), np.zeros(dims), 0.0)

    @classmethod
    def uniform_field(cls, slope) -> "PotentialSpec":
        """V = slope . q  (constant force -slope)."""
        lin = np.atleast_1d(np.asarray(slope, dtype=float))
        d = lin.size
        return cls("uniform_field", d, np.zeros((d, d)), lin, 0.0)

    @classmethod
    def harmonic(cls, omega: float, center, mass: float = 1.0) -> "PotentialSpec":
        """V = (m omega^2 / 2) |q - center|^2, isotropic."""
        c = np.atleast_1d(np.asarray(center, dtype=float))
        d = c.size
        k = mass * float(omega) ** 2
        return cls(
            "harmonic",
            d,
            k * np.eye(d),
            -k * c,
            0.5 * k * float(c @ c),
        )

    @classmethod
    def from_table(cls, table: RealField, tag: str = "table") -> "PotentialSpec":
        """Periodic potential sampled on a grid; forces by cubic interpolation."""
        d = table.grid.dims
        grads = [spectral_gradient(table, axis) for axis in range(d)]
        interps = [periodic_interpolator(g) for g in grads]

        def values(grid: GridSpec, t: float) -> np.ndarray:
            if grid != table.grid:
                raise ValidationError("tabulated potential queried on a different grid")
            return table.samples

        def gradient(points: np.ndarray, t: float) -> np.ndarray:
            pts = np.asarray(points, dtype=float)
            flat = pts.reshape(-1, d) if d > 1 else pts.reshape(-1)
            cols = [interp(flat) for interp in interps]
            return np.stack(cols, axis=-1)

        return cls(
            tag,
            d,
            np.zeros((d, d)),
            np.zeros(d),
            0.0,
            periodic=values,
            periodic_gradient=gradient,
        )

    # -- composition -------------------------------------------------------

    def with_extra(
        self,
        tag: str,
        extra_periodic: Callable[[GridSpec, float], np.ndarray] | None = None,
        extra_vector: Callable[[GridSpec, float], tuple[np.ndarray, ...]] | None = None,
        static: bool | None = None,
    ) -> "PotentialSpec":
        """New spec with additional periodic scalar / vector contributions."""
        base_periodic = self.periodic
        base_vector = self.vector

        periodic = base_periodic
        if extra_periodic is not None:
            if base_periodic is None:
                periodic = extra_periodic
            else:
                def periodic(grid, t, _a=base_periodic, _b=extra_periodic):
                    return _a(grid, t) + _b(grid, t)

        vector = base_vector
        if extra_vector is not None:
            if base_vector is None:
                vector = extra_vector
            else:
                def vector(grid, t, _a=base_vector, _b=extra_vector):
                    va = _a(grid, t)
                    vb = _b(grid, t)
                    return tuple(a + b for a, b in zip(va, vb))

        return PotentialSpec(
            tag,
            self.dims,
            self.quad,
            self.lin,
            self.const,
            periodic=periodic,
            periodic_gradient=self.periodic_gradient,
            vector=vector,
            static=self.static if static is None else static,
        )

    # -- evaluation --------------------------------------------------------

    @property
    def has_vector(self) -> bool:
        return self.vector is not None

    @property
    def confining(self) -> bool:
        """True when the polynomial part has positive curvature on every axis."""
        if np.allclose(self.quad, 0.0):
            return False
        return bool(np.all(np.linalg.eigvalsh(self.quad) > 0.0))

    def values_on(self, grid: GridSpec, t: float = 0.0) -> RealField:
        """Pointwise V on a grid.

        The returned samples include the polynomial part, so they are a value
        table, not a periodic field; do not differentiate them spectrally.
        """
        coords = grid.meshes()
        vals = _poly_values(coords, self.quad, self.lin, self.const)
        if self.periodic is not None:
            vals = vals + self.periodic(grid, t)
        return RealField(grid, vals)

    def periodic_values(self, grid: GridSpec, t: float = 0.0) -> np.ndarray | None:
        if self.periodic is None:
            return None
        return np.asarray(self.periodic(grid, t), dtype=float)

    def gradient_on(self, grid: GridSpec, t: float = 0.0) -> list[np.ndarray]:
        coords = grid.meshes()
        grads = _poly_gradient(coords, self.quad, self.lin)
        if self.periodic is not None:
            table = RealField(grid, self.periodic(grid, t))
            for axis in range(self.dims):
                grads[axis] = grads[axis] + spectral_gradient(table, axis).samples
        return grads

    def gradient_at(self, points: np.ndarray, t: float = 0.0) -> np.ndarray:
        """grad V at arbitrary positions, shape (M,) in 1D or (M, d)."""
        pts = np.asarray(points, dtype=float)
        if self.dims == 1:
            flat = pts.reshape(-1)
            out = self.lin[0] + self.quad[0, 0] * flat
            if self.periodic_gradient is not None:
                out = out + self.periodic_gradient(flat, t)[..., 0]
            return out.reshape(pts.shape)
        flat = pts.reshape(-1, self.dims)
        out = flat @ self.quad.T + self.lin
        if self.periodic_gradient is not None:
            out = out + self.periodic_gradient(flat, t)
        return out.reshape(pts.shape)

    def vector_values(self, grid: GridSpec, t: float = 0.0) -> tuple[np.ndarray, ...] | None:
        if self.vector is None:
            return None
        vals = self.vector(grid, t)
        return tuple(np.asarray(v, dtype=float) for v in vals)

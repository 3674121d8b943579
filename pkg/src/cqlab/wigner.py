"""Phase-space distribution of a wavefunction and compatibility diagnostics.

The transform implemented here is

    W(q, p) = (2 pi hbar)^(-d) integral dz exp(i p.z / hbar)
              conj(psi)(q + z/2) psi(q - z/2)

evaluated on the original position grid times its conjugate momentum grid.
Chord midpoints q +- z/2 land on a twice-refined grid, so psi is first
band-limit upsampled by two; chords are restricted to one period per axis
(half-weighted at the edge pair for even point counts), which makes both
discrete marginals reproduce |psi|^2 and |psi_hat|^2 exactly for
band-limited states.

The local chord ratio conj(psi)(q + hbar xi/2) psi(q - hbar xi/2) / n(q) is
the conditional characteristic function of the conjugate variable.  For an
exactly classical pair it equals exp(-i xi . grad S); comparing the two at
finite xi, and comparing their second xi-derivatives, quantifies how far a
wavefunction is from carrying any classical conditional distribution.  The
second-order comparison has a closed form: the conditional variance is
-(hbar^2/4) times the log-density curvature, which is not sign-definite.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .bridge import WaveFunction
from .core import (
    ComplexField,
    GridSpec,
    PhysicalParams,
    RealField,
    integrate,
    spectral_gradient,
)
from .errors import ValidationError

__all__ = [
    "WignerField",
    "wigner_transform",
    "characteristic_local_solution",
    "characteristic_deterministic",
    "compatibility_residual",
    "XiExpansionReport",
    "xi_expansion_check",
]

SIZE_WARNING_CELLS = 2**22
REALITY_TOLERANCE = 1e-10
DEFAULT_DENSITY_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class WignerField:
    """W sampled on position_grid x momentum_grid (momentum ascending)."""

    position_grid: GridSpec
    momentum_grid: GridSpec
    samples: np.ndarray
    params: PhysicalParams
    time: float = 0.0

    def __post_init__(self):
        expected = self.position_grid.shape + self.momentum_grid.shape
        if self.samples.shape != expected:
            raise ValidationError(f"samples shape {self.samples.shape} != {expected}")
        if abs(self.total_mass() - 1.0) > 1e-8:
            raise ValidationError(
                f"phase-space mass {self.total_mass()!r} is not 1 within 1e-8"
            )

    def position_marginal(self) -> RealField:
        d = self.position_grid.dims
        out = self.samples.sum(axis=tuple(range(d, 2 * d))) * self.momentum_grid.cell_volume
        return RealField(self.position_grid, out)

    def momentum_marginal(self) -> RealField:
        d = self.position_grid.dims
        out = self.samples.sum(axis=tuple(range(d))) * self.position_grid.cell_volume
        return RealField(self.momentum_grid, out)

    def total_mass(self) -> float:
        return float(
            self.samples.sum() * self.position_grid.cell_volume * self.momentum_grid.cell_volume
        )


# ---------------------------------------------------------------------------
# band-limited upsampling


def _upsample_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    n = arr.shape[axis]
    spec = np.fft.fft(arr, axis=axis)
    shape = list(arr.shape)
    shape[axis] = 2 * n

    def sl(a, b):
        idx = [slice(None)] * arr.ndim
        idx[axis] = slice(a, b)
        return tuple(idx)

    padded = np.zeros(shape, dtype=np.complex128)
    half = n // 2
    if n % 2 == 0:
        padded[sl(0, half)] = spec[sl(0, half)]
        nyq = spec[sl(half, half + 1)] * 0.5
        padded[sl(half, half + 1)] = nyq
        padded[sl(2 * n - half, 2 * n - half + 1)] = nyq
        padded[sl(2 * n - half + 1, 2 * n)] = spec[sl(half + 1, n)]
    else:
        padded[sl(0, half + 1)] = spec[sl(0, half + 1)]
        padded[sl(2 * n - half, 2 * n)] = spec[sl(half + 1, n)]
    return np.fft.ifft(padded, axis=axis) * 2.0


def _upsample_double(samples: np.ndarray) -> np.ndarray:
    """Trigonometric interpolation onto a grid refined by two per axis.

    Even-size spectra split their Nyquist line symmetrically, so original
    nodes keep their exact values.
    """
    out = np.asarray(samples, dtype=np.complex128)
    for axis in range(out.ndim):
        out = _upsample_axis(out, axis)
    return out


# ---------------------------------------------------------------------------
# the transform


def _chord_1d(f: np.ndarray, k_values: np.ndarray) -> np.ndarray:
    n2 = f.shape[0]
    j = 2 * np.arange(n2 // 2)
    ip = (j[:, None] + k_values[None, :]) % n2
    im = (j[:, None] - k_values[None, :]) % n2
    return np.conj(f[ip]) * f[im]


def _chord_2d(f: np.ndarray, k0: np.ndarray, k1: np.ndarray) -> np.ndarray:
    n0, n1 = f.shape[0] // 2, f.shape[1] // 2
    j0 = 2 * np.arange(n0)
    j1 = 2 * np.arange(n1)
    i0p = (j0[:, None] + k0[None, :]) % (2 * n0)
    i0m = (j0[:, None] - k0[None, :]) % (2 * n0)
    i1p = (j1[:, None] + k1[None, :]) % (2 * n1)
    i1m = (j1[:, None] - k1[None, :]) % (2 * n1)
    a = f[i0p[:, None, :, None], i1p[None, :, None, :]]
    b = f[i0m[:, None, :, None], i1m[None, :, None, :]]
    return np.conj(a) * b


def wigner_transform(psi: WaveFunction) -> WignerField:
    """Wigner distribution on the grid's own phase space."""
    grid = psi.grid
    d = grid.dims
    if d == 2 and grid.node_count**2 > SIZE_WARNING_CELLS:
        warnings.warn(
            f"full 2D phase space needs {grid.node_count**2} cells; "
            "consider a coarser grid",
            stacklevel=2,
        )
    f = _upsample_double(psi.samples)
    hbar = psi.params.hbar

    if d == 1:
        n = grid.points[0]
        kvec = grid.integer_wavenumbers(0)
        c = _chord_1d(f, kvec)
        if n % 2 == 0:
            plus = _chord_1d(f, np.array([n // 2]))
            c[:, n // 2] = 0.5 * (c[:, n // 2] + plus[:, 0])
        w = grid.cell_volume / (2.0 * np.pi * hbar) * n * np.fft.ifft(c, axis=1)
        w = np.fft.fftshift(w, axes=1)
    else:
        n0, n1 = grid.points
        k0 = grid.integer_wavenumbers(0)
        k1 = grid.integer_wavenumbers(1)
        c = _chord_2d(f, k0, k1)
        if n0 % 2 == 0:
            plus = _chord_2d(f, np.array([n0 // 2]), k1)[:, :, 0, :]
            c[:, :, n0 // 2, :] = 0.5 * (c[:, :, n0 // 2, :] + plus)
        if n1 % 2 == 0:
            col = _chord_2d(f, k0, np.array([n1 // 2]))[:, :, :, 0]
            if n0 % 2 == 0:
                corner = _chord_2d(f, np.array([n0 // 2]), np.array([n1 // 2]))[:, :, 0, 0]
                col[:, :, n0 // 2] = 0.5 * (col[:, :, n0 // 2] + corner)
            c[:, :, :, n1 // 2] = 0.5 * (c[:, :, :, n1 // 2] + col)
        w = (
            grid.cell_volume
            / (2.0 * np.pi * hbar) ** 2
            * n0
            * n1
            * np.fft.ifft2(c, axes=(2, 3))
        )
        w = np.fft.fftshift(w, axes=(2, 3))

    scale = float(np.max(np.abs(w.real))) or 1.0
    worst = float(np.max(np.abs(w.imag)))
    if worst > REALITY_TOLERANCE * max(scale, 1.0):
        raise AssertionError(
            f"transform produced imaginary part {worst:.3e}; input is inconsistent"
        )
    return WignerField(grid, grid.momentum_grid(hbar), w.real, psi.params, psi.time)


# ---------------------------------------------------------------------------
# conditional characteristic functions


def _as_cell_steps(grid: GridSpec, xi, hbar: float) -> tuple[int, ...]:
    """xi must put hbar*xi on the grid lattice: one integer step per axis."""
    xivec = np.atleast_1d(np.asarray(xi, dtype=float))
    if xivec.shape != (grid.dims,):
        raise ValidationError(f"xi must have {grid.dims} component(s)")
    steps = []
    for axis in range(grid.dims):
        m = hbar * xivec[axis] / grid.spacings[axis]
        if abs(m - round(m)) > 1e-9:
            raise ValidationError(
                f"xi component {axis} is not a multiple of spacing/hbar "
                f"({grid.spacings[axis] / hbar:.6g})"
            )
        steps.append(int(round(m)))
    return tuple(steps)


def _chord_values(psi: WaveFunction, xi) -> np.ndarray:
    """conj(psi)(q + hbar xi/2) psi(q - hbar xi/2) at the original grid nodes."""
    grid = psi.grid
    steps = _as_cell_steps(grid, xi, psi.params.hbar)
    f = _upsample_double(psi.samples)
    shifted_plus = np.roll(f, tuple(-s for s in steps), axis=tuple(range(grid.dims)))
    shifted_minus = np.roll(f, steps, axis=tuple(range(grid.dims)))
    take = tuple(slice(0, 2 * n, 2) for n in grid.points)
    return np.conj(shifted_plus[take]) * shifted_minus[take]


def characteristic_local_solution(
    psi: WaveFunction,
    xi,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> ComplexField:
    """conj(psi)(q + hbar xi/2) psi(q - hbar xi/2) / n(q); zero where n is floored."""
    grid = psi.grid
    numer = _chord_values(psi, xi)
    n = np.abs(psi.samples) ** 2
    safe = n >= floor_rel * float(n.max())
    out = np.zeros(grid.shape, dtype=np.complex128)
    out[safe] = numer[safe] / n[safe]
    return ComplexField(grid, out)


def characteristic_deterministic(
    psi: WaveFunction,
    xi,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> ComplexField:
    """exp(-i xi . v) with v = hbar Im(conj(psi) grad psi)/n; zero where floored."""
    grid = psi.grid
    xivec = np.atleast_1d(np.asarray(xi, dtype=float))
    if xivec.shape != (grid.dims,):
        raise ValidationError(f"xi must have {grid.dims} component(s)")
    hbar = psi.params.hbar
    n = np.abs(psi.samples) ** 2
    safe = n >= floor_rel * float(n.max())
    phase = np.zeros(grid.shape)
    for axis in range(grid.dims):
        g = spectral_gradient(psi.field, axis).samples
        v = np.zeros(grid.shape)
        v[safe] = hbar * np.imag(np.conj(psi.samples[safe]) * g[safe]) / n[safe]
        phase += xivec[axis] * v
    out = np.exp(-1j * phase)
    out[~safe] = 0.0
    return ComplexField(grid, out)


def compatibility_residual(
    psi: WaveFunction,
    xi_values,
    model: str = "local",
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> np.ndarray:
    """| integral chi_model n dq - integral chord dq |, one value per xi.

    The chord integral is the exact characteristic function of the conjugate
    marginal.  The local model satisfies the identity by construction (up to
    floored cells); the deterministic model exp(-i xi . grad S) generically
    does not, which is the point of the comparison.
    """
    grid = psi.grid
    n = np.abs(psi.samples) ** 2
    if model == "local":
        field_for = lambda arg: characteristic_local_solution(psi, arg, floor_rel)
    elif model == "deterministic":
        field_for = lambda arg: characteristic_deterministic(psi, arg, floor_rel)
    else:
        raise ValidationError("model must be 'local' or 'deterministic'")
    out = []
    for xi in np.atleast_1d(np.asarray(xi_values, dtype=float)).reshape(-1, grid.dims):
        arg = xi if grid.dims > 1 else xi[0]
        chi = field_for(arg).samples
        model_int = complex(np.sum(chi * n) * grid.cell_volume)
        chord_int = complex(np.sum(_chord_values(psi, arg)) * grid.cell_volume)
        out.append(abs(model_int - chord_int))
    return np.asarray(out)


# ---------------------------------------------------------------------------
# small-xi expansion


@dataclass(frozen=True, eq=False)
class XiExpansionReport:
    """First- and second-order comparison of the local and classical-sheet models.

    mean_gradient is the conditional first moment hbar Im(conj(psi) grad
    psi)/n (identically zero for real psi).  local_tensor is the conditional
    second moment read from the wavefunction; model_tensor is the
    classical-sheet prediction grad S x grad S + (hbar^2/4) grad n x grad n
    / n^2 (the beta bookkeeping cancels between the two sides and is
    omitted).  Their difference has the closed form -(hbar^2/4) d2_ij n / n;
    its n-weighted integral vanishes, and the conditional variance
    -(hbar^2/4) d2 ln n can be negative, which is the pointwise
    incompatibility signal.
    """

    mean_gradient: np.ndarray
    local_tensor: np.ndarray
    model_tensor: np.ndarray
    discrepancy: np.ndarray
    curvature_reference: np.ndarray
    integrated_discrepancy: np.ndarray
    conditional_variance_trace: RealField
    min_variance_trace: float
    sign_indefinite: bool
    mask: np.ndarray


def xi_expansion_check(
    psi: WaveFunction,
    floor_rel: float = DEFAULT_DENSITY_FLOOR,
) -> XiExpansionReport:
    grid = psi.grid
    d = grid.dims
    hbar = psi.params.hbar
    vals = psi.samples
    n = np.abs(vals) ** 2
    nf = RealField(grid, n)
    safe = n >= floor_rel * float(n.max())

    gpsi = [spectral_gradient(psi.field, a).samples for a in range(d)]
    gn = [spectral_gradient(nf, a).samples for a in range(d)]
    v = []
    for a in range(d):
        va = np.zeros(grid.shape)
        va[safe] = hbar * np.imag(np.conj(vals[safe]) * gpsi[a][safe]) / n[safe]
        v.append(va)

    local = np.zeros((d, d) + grid.shape)
    model = np.zeros((d, d) + grid.shape)
    curvature = np.zeros((d, d) + grid.shape)
    integrated = np.zeros((d, d))
    for i in range(d):
        gij = [spectral_gradient(ComplexField(grid, gpsi[i]), j).samples for j in range(d)]
        gnij = [spectral_gradient(RealField(grid, gn[i]), j).samples for j in range(d)]
        for j in range(d):
            loc = np.zeros(grid.shape)
            loc[safe] = (
                0.25
                * hbar**2
                * (
                    2.0 * np.real(np.conj(gpsi[i][safe]) * gpsi[j][safe])
                    - 2.0 * np.real(np.conj(vals[safe]) * gij[j][safe])
                )
                / n[safe]
            )
            local[i, j] = loc
            mod = v[i] * v[j]
            corr = np.zeros(grid.shape)
            corr[safe] = 0.25 * hbar**2 * gn[i][safe] * gn[j][safe] / n[safe] ** 2
            model[i, j] = mod + corr
            ref = np.zeros(grid.shape)
            ref[safe] = -0.25 * hbar**2 * gnij[j][safe] / n[safe]
            curvature[i, j] = ref
            integrated[i, j] = float(
                integrate(RealField(grid, n * (local[i, j] - model[i, j])))
            )

    variance_trace = np.zeros(grid.shape)
    for a in range(d):
        variance_trace += local[a, a] - v[a] * v[a]
    trace_field = RealField(grid, variance_trace)
    scale = float(np.max(np.abs(variance_trace))) or 1.0
    min_trace = float(variance_trace[safe].min()) if safe.any() else 0.0
    return XiExpansionReport(
        mean_gradient=np.stack(v),
        local_tensor=local,
        model_tensor=model,
        discrepancy=local - model,
        curvature_reference=curvature,
        integrated_discrepancy=integrated,
        conditional_variance_trace=trace_field,
        min_variance_trace=min_trace,
        sign_indefinite=bool(min_trace < -1e-10 * scale),
        mask=safe,
    )

"""Scenario execution: build states from a config, evolve, write artifacts.

A run produces a directory of plain files:

    observables.csv       time series; classical columns end in _C, quantum in _Q
    marginals_0000.csv    position and momentum densities per snapshot
    wigner_0000.bin/.json phase-space distribution (flat float64) plus sidecar
    trajectories.csv      characteristic curves (q-stochastic family only)
    report.json           config digest, invariant outcomes, wall time

Floats in CSV files are printed with 17 significant digits so that a rerun of
the same config is byte-identical; report.json carries the wall time and is
the one file allowed to differ between reruns.

Grid convention: the [grid] section always describes the position box.  The
p-stochastic family lives on its conjugate momentum grid, so state centers
and widths for that family are momentum-space quantities.
"""

from __future__ import annotations

import json
import time as _time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .bridge import WaveFunction, madelung_forward, madelung_forward_p
from .classical import (
    ActionField,
    ParticleEnsemble,
    PStochasticState,
    QStochasticState,
    classical_trajectories,
    evolve_p_state,
    evolve_q_state,
    liouville_evolve_ensemble,
    normalized_density,
    sample_ensemble_from_state,
)
from .config import MixtureComponent, ScenarioConfig, StateConfig
from .core import GridSpec, PhysicalParams, RealField, from_momentum_space, integrate
from .errors import ValidationError
from .observables import (
    DensityMatrix,
    MarginalPair,
    Observable,
    expect_classical,
    expect_classical_p,
    expect_ensemble,
    expect_quantum,
    marginals_classical,
    marginals_classical_p,
    marginals_ensemble,
    marginals_quantum,
    mixture_expectation,
)
from .potentials import PotentialSpec
from .quantum import split_step_propagate
from .wigner import WignerField, wigner_transform

__all__ = [
    "InvariantCheck",
    "RunReport",
    "build_grid",
    "build_params",
    "build_potential",
    "initial_q_state",
    "initial_p_state",
    "initial_wavefunction",
    "initial_mixture",
    "run_scenario",
]

ENERGY_DRIFT_TOLERANCE = 1e-3  # coarse stability bound, not an accuracy claim
MASS_DRIFT_TOLERANCE = 1e-10
NORM_DRIFT_TOLERANCE = 1e-12
WEIGHT_SUM_TOLERANCE = 1e-12


@dataclass(frozen=True)
class InvariantCheck:
    name: str
    value: float
    tolerance: float
    passed: bool

    def __post_init__(self):
        # numpy scalars must not leak into the JSON report
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "passed", bool(self.passed))


@dataclass(frozen=True)
class RunReport:
    label: str
    family: str
    digest: str
    snapshot_times: tuple[float, ...]
    invariants: tuple[InvariantCheck, ...]
    files: tuple[str, ...]
    wall_time_s: float

    @property
    def all_passed(self) -> bool:
        return all(chk.passed for chk in self.invariants)


# ---------------------------------------------------------------------------
# builders


def build_grid(cfg: ScenarioConfig) -> GridSpec:
    g = cfg.grid
    return GridSpec(g.extents, g.points, g.origins)


def build_params(cfg: ScenarioConfig) -> PhysicalParams:
    ph = cfg.physics
    return PhysicalParams(hbar=ph.hbar, mass=ph.mass, charge=ph.charge, beta=ph.beta)


def build_potential(cfg: ScenarioConfig, params: PhysicalParams) -> PotentialSpec:
    pc = cfg.potential
    dims = cfg.grid.dims
    if pc.kind == "free":
        return PotentialSpec.free(dims)
    if pc.kind == "uniform":
        return PotentialSpec.uniform_field(pc.slope)
    center = pc.center if pc.center is not None else tuple(0.0 for _ in range(dims))
    return PotentialSpec.harmonic(pc.omega, center, mass=params.mass)


def _gaussian_parts(grid: GridSpec, center, width, slope, chirp):
    """Density exp(-sum (x-c)^2/(2w^2)) and action sum s_i x_i + chirp_i (x_i-c_i)^2 / 2."""
    coords = grid.meshes()
    logn = np.zeros(grid.shape)
    for i in range(grid.dims):
        logn = logn - (coords[i] - center[i]) ** 2 / (2.0 * width[i] ** 2)
    n = normalized_density(grid, np.exp(logn))
    quad = np.diag(np.asarray(chirp, dtype=float))
    lin = np.array([slope[i] - chirp[i] * center[i] for i in range(grid.dims)])
    const = float(sum(0.5 * chirp[i] * center[i] ** 2 for i in range(grid.dims)))
    S = ActionField.from_parts(grid, quad=quad, lin=lin, const=const)
    return n, S


def initial_q_state(grid: GridSpec, sc: StateConfig) -> QStochasticState:
    n, S = _gaussian_parts(grid, sc.center, sc.width, sc.momentum, sc.chirp)
    return QStochasticState(n, S, 0.0)


def initial_p_state(
    position_grid: GridSpec, params: PhysicalParams, sc: StateConfig
) -> PStochasticState:
    mom_grid = position_grid.momentum_grid(params.hbar)
    n, S = _gaussian_parts(mom_grid, sc.center, sc.width, sc.momentum, sc.chirp)
    return PStochasticState(n, S, 0.0)


def initial_wavefunction(
    grid: GridSpec, params: PhysicalParams, sc: StateConfig
) -> WaveFunction:
    return madelung_forward(initial_q_state(grid, sc), params)


def initial_mixture(
    grid: GridSpec, params: PhysicalParams, comps: tuple[MixtureComponent, ...]
) -> DensityMatrix:
    members = []
    for comp in comps:
        sc = StateConfig("gaussian", comp.center, comp.width, comp.momentum, comp.chirp)
        members.append(initial_wavefunction(grid, params, sc))
    return DensityMatrix(tuple(members), tuple(c.weight for c in comps))


# ---------------------------------------------------------------------------
# formatting helpers


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_marginals(path: Path, pair: MarginalPair) -> None:
    qg = pair.position.grid
    pg = pair.momentum.grid
    if qg.dims == 1:
        rows = zip(qg.axis(0), pair.position.samples, pg.axis(0), pair.momentum.samples)
        _write_csv(path, ["q", "mu", "p", "nu"], rows)
        return
    q0, q1 = qg.meshes()
    p0, p1 = pg.meshes()
    mu = pair.position.samples
    nu = pair.momentum.samples
    rows = []
    for i in range(qg.points[0]):
        for j in range(qg.points[1]):
            rows.append(
                (i, j, q0[i, j], q1[i, j], mu[i, j], p0[i, j], p1[i, j], nu[i, j])
            )
    _write_csv(path, ["i0", "i1", "q0", "q1", "mu", "p0", "p1", "nu"], rows)


def _axes_meta(grid: GridSpec) -> list[dict]:
    return [
        {
            "origin": grid.origins[i],
            "spacing": grid.spacings[i],
            "points": grid.points[i],
        }
        for i in range(grid.dims)
    ]


def _write_wigner(stem: Path, w: WignerField) -> list[str]:
    data = np.ascontiguousarray(w.samples, dtype="<f8")
    bin_path = stem.with_suffix(".bin")
    bin_path.write_bytes(data.tobytes())
    sidecar = {
        "dtype": "<f8",
        "order": "C",
        "shape": list(data.shape),
        "time": w.time,
        "position_axes": _axes_meta(w.position_grid),
        "momentum_axes": _axes_meta(w.momentum_grid),
    }
    json_path = stem.with_suffix(".json")
    json_path.write_text(json.dumps(sidecar, indent=2) + "\n")
    return [bin_path.name, json_path.name]


# ---------------------------------------------------------------------------
# family drivers; each returns (snapshots, expectation fn, marginal fn, psi fn)


def _parse_observables(cfg: ScenarioConfig) -> list[Observable]:
    return [Observable.parse(name) for name in cfg.observables]


def _run_q_stochastic(cfg, grid, params, pot):
    st0 = initial_q_state(grid, cfg.state)
    snaps: list[QStochasticState] = []
    evolve_q_state(
        st0, pot, params, cfg.evolution.dt, cfg.evolution.steps, snaps.append, cfg.evolution.stride
    )

    def expect(st, obs):
        c = expect_classical(st, obs, params, pot, use_sigma=cfg.use_sigma)
        q = expect_quantum(madelung_forward(st, params), obs, params, pot)
        return {"C": c, "Q": q}

    return snaps, expect, lambda st: marginals_classical(st, params), lambda st: madelung_forward(st, params)


def _run_p_stochastic(cfg, grid, params, pot):
    st0 = initial_p_state(grid, params, cfg.state)
    snaps: list[PStochasticState] = []
    evolve_p_state(
        st0, pot, params, cfg.evolution.dt, cfg.evolution.steps, snaps.append, cfg.evolution.stride
    )

    def to_position_psi(st):
        # the config grid is exactly conjugate to the state grid by construction
        hat = madelung_forward_p(st, params)
        field = from_momentum_space(hat.field, grid, params.hbar)
        return WaveFunction(field, params, st.time)

    def expect(st, obs):
        c = expect_classical_p(st, obs, params, pot, use_sigma=cfg.use_sigma)
        q = expect_quantum(to_position_psi(st), obs, params, pot)
        return {"C": c, "Q": q}

    return (
        snaps,
        expect,
        lambda st: marginals_classical_p(st, params, grid),
        to_position_psi,
    )


def _run_wavefunction(cfg, grid, params, pot):
    psi0 = initial_wavefunction(grid, params, cfg.state)
    snaps: list[WaveFunction] = []
    split_step_propagate(
        psi0, pot, params, cfg.evolution.dt, cfg.evolution.steps, snaps.append, cfg.evolution.stride
    )

    def expect(psi, obs):
        return {"Q": expect_quantum(psi, obs, params, pot)}

    return snaps, expect, marginals_quantum, lambda psi: psi


def _run_ensemble(cfg, grid, params, pot, seed):
    st0 = initial_q_state(grid, cfg.state)
    ens = sample_ensemble_from_state(st0, cfg.ensemble_count, seed)
    snaps = [ens]
    blocks = cfg.evolution.steps // cfg.evolution.stride
    for _ in range(blocks):
        ens = liouville_evolve_ensemble(
            ens, pot, params, cfg.evolution.dt, cfg.evolution.stride, box=grid
        )
        snaps.append(ens)

    def expect(e, obs):
        return {"C": expect_ensemble(e, obs, params, pot)}

    return snaps, expect, lambda e: marginals_ensemble(e, grid, params), None


def _run_mixture(cfg, grid, params, pot):
    dm0 = initial_mixture(grid, params, cfg.mixture)
    member_snaps: list[list[WaveFunction]] = []
    for psi in dm0.members:
        series: list[WaveFunction] = []
        split_step_propagate(
            psi, pot, params, cfg.evolution.dt, cfg.evolution.steps, series.append, cfg.evolution.stride
        )
        member_snaps.append(series)
    snaps = [
        DensityMatrix(tuple(col), dm0.weights)
        for col in zip(*member_snaps)
    ]

    def expect(dm, obs):
        return {"Q": mixture_expectation(dm, obs, params, pot)}

    def mixture_marginals(dm):
        pairs = [marginals_quantum(psi) for psi in dm.members]
        w = dm.weights
        pos = sum(wk * pk.position.samples for wk, pk in zip(w, pairs))
        mom = sum(wk * pk.momentum.samples for wk, pk in zip(w, pairs))
        return MarginalPair(
            position=RealField(pairs[0].position.grid, pos),
            momentum=RealField(pairs[0].momentum.grid, mom),
        )

    def mixture_wigner(dm):
        fields = [wigner_transform(psi) for psi in dm.members]
        total = sum(wk * f.samples for wk, f in zip(dm.weights, fields))
        first = fields[0]
        return WignerField(first.position_grid, first.momentum_grid, total, params, first.time)

    return snaps, expect, mixture_marginals, mixture_wigner


# ---------------------------------------------------------------------------
# invariants


def _snapshot_time(snap) -> float:
    if isinstance(snap, DensityMatrix):
        return snap.members[0].time
    return snap.time


def _mass_invariants(cfg, snaps) -> list[InvariantCheck]:
    out = []
    family = cfg.family
    if family in ("q-stochastic", "p-stochastic"):
        drift = max(abs(float(integrate(st.n)) - 1.0) for st in snaps)
        out.append(
            InvariantCheck("mass_drift", drift, MASS_DRIFT_TOLERANCE, drift <= MASS_DRIFT_TOLERANCE)
        )
    elif family == "wavefunction":
        drift = max(abs(float(integrate(psi.density())) - 1.0) for psi in snaps)
        out.append(
            InvariantCheck("norm_drift", drift, NORM_DRIFT_TOLERANCE, drift <= NORM_DRIFT_TOLERANCE)
        )
    elif family == "ensemble":
        drift = max(abs(float(e.w.sum()) - 1.0) for e in snaps)
        out.append(
            InvariantCheck("weight_sum_drift", drift, WEIGHT_SUM_TOLERANCE, drift <= WEIGHT_SUM_TOLERANCE)
        )
    else:
        drift = max(
            abs(float(integrate(psi.density())) - 1.0) for dm in snaps for psi in dm.members
        )
        out.append(
            InvariantCheck("norm_drift", drift, NORM_DRIFT_TOLERANCE, drift <= NORM_DRIFT_TOLERANCE)
        )
        wsum = abs(sum(snaps[0].weights) - 1.0)
        out.append(
            InvariantCheck("weight_sum_drift", wsum, WEIGHT_SUM_TOLERANCE, wsum <= WEIGHT_SUM_TOLERANCE)
        )
    return out


def _energy_invariant(cfg, snaps, params, pot) -> list[InvariantCheck]:
    """Drift of the flow's conserved energy between first and last snapshot.

    Classical families monitor the bare transport energy: the noise-scalar
    overlay is a reporting convention, not a constant of this motion, so it
    must stay out of the solver-health check.
    """
    if not pot.static or len(snaps) < 2:
        return []
    energy = Observable.energy()
    family = cfg.family

    def value(snap) -> float:
        if family == "q-stochastic":
            return expect_classical(snap, energy, params, pot, use_sigma=False)
        if family == "p-stochastic":
            return expect_classical_p(snap, energy, params, pot, use_sigma=False)
        if family == "ensemble":
            return expect_ensemble(snap, energy, params, pot)
        if family == "mixture":
            return mixture_expectation(snap, energy, params, pot)
        return expect_quantum(snap, energy, params, pot)

    e0, e1 = value(snaps[0]), value(snaps[-1])
    drift = abs(e1 - e0) / max(abs(e0), 1.0)
    return [
        InvariantCheck(
            "energy_drift_rel", drift, ENERGY_DRIFT_TOLERANCE, drift <= ENERGY_DRIFT_TOLERANCE
        )
    ]


# ---------------------------------------------------------------------------
# entry point


def run_scenario(cfg: ScenarioConfig, outdir, seed: int | None = None) -> RunReport:
    """Execute one configured scenario and write its artifact directory."""
    started = _time.perf_counter()
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    grid = build_grid(cfg)
    params = build_params(cfg)
    pot = build_potential(cfg, params)
    effective_seed = cfg.seed if seed is None else seed

    family = cfg.family
    wigner_fn = None
    if family == "q-stochastic":
        snaps, expect, marg_fn, psi_fn = _run_q_stochastic(cfg, grid, params, pot)
    elif family == "p-stochastic":
        snaps, expect, marg_fn, psi_fn = _run_p_stochastic(cfg, grid, params, pot)
    elif family == "wavefunction":
        snaps, expect, marg_fn, psi_fn = _run_wavefunction(cfg, grid, params, pot)
    elif family == "ensemble":
        snaps, expect, marg_fn, psi_fn = _run_ensemble(cfg, grid, params, pot, effective_seed)
    elif family == "mixture":
        snaps, expect, marg_fn, wigner_fn = _run_mixture(cfg, grid, params, pot)
        psi_fn = None
    else:  # pragma: no cover - config validation rejects other families
        raise ValidationError(f"unknown family {family!r}")

    files: list[str] = []
    observables = _parse_observables(cfg)
    sides = {
        "q-stochastic": ("C", "Q"),
        "p-stochastic": ("C", "Q"),
        "wavefunction": ("Q",),
        "ensemble": ("C",),
        "mixture": ("Q",),
    }[family]

    header = ["time"]
    for obs in observables:
        header.extend(f"{obs.name}_{side}" for side in sides)
    table = []
    for snap in snaps:
        values = [_snapshot_time(snap)]
        for obs in observables:
            result = expect(snap, obs)
            values.extend(result[side] for side in sides)
        table.append(values)
    obs_path = out / "observables.csv"
    _write_csv(obs_path, header, table)
    files.append(obs_path.name)

    if cfg.output.marginals:
        for k, snap in enumerate(snaps):
            path = out / f"marginals_{k:04d}.csv"
            _write_marginals(path, marg_fn(snap))
            files.append(path.name)

    if cfg.output.wigner:
        for k, snap in enumerate(snaps):
            if wigner_fn is not None:
                w = wigner_fn(snap)
            else:
                w = wigner_transform(psi_fn(snap))
            files.extend(_write_wigner(out / f"wigner_{k:04d}", w))

    if cfg.output.trajectories:
        st0 = initial_q_state(grid, cfg.state)
        bundle = classical_trajectories(
            st0, pot, params, list(cfg.output.trajectories), cfg.evolution.dt, cfg.evolution.steps
        )
        header = ["time"]
        m = bundle.positions.shape[1]
        d = bundle.positions.shape[2]
        for j in range(m):
            for a in range(d):
                header.append(f"q{j}_{a}")
            for a in range(d):
                header.append(f"p{j}_{a}")
        rows = []
        for k, t in enumerate(bundle.times):
            row = [t]
            for j in range(m):
                row.extend(bundle.positions[k, j])
                row.extend(bundle.momenta[k, j])
            rows.append(row)
        traj_path = out / "trajectories.csv"
        _write_csv(traj_path, header, rows)
        files.append(traj_path.name)

    invariants = _mass_invariants(cfg, snaps)
    invariants.extend(_energy_invariant(cfg, snaps, params, pot))

    wall = _time.perf_counter() - started
    report = RunReport(
        label=cfg.label,
        family=family,
        digest=cfg.digest,
        snapshot_times=tuple(_snapshot_time(s) for s in snaps),
        invariants=tuple(invariants),
        files=tuple(files),
        wall_time_s=wall,
    )
    payload = {
        "label": report.label,
        "family": report.family,
        "config_sha256": report.digest,
        "tool": {"name": "cqlab", "version": __version__},
        "seed": effective_seed,
        "snapshot_times": list(report.snapshot_times),
        "invariants": [
            {
                "name": c.name,
                "value": c.value,
                "tolerance": c.tolerance,
                "passed": c.passed,
            }
            for c in report.invariants
        ],
        "files": list(report.files),
        "wall_time_s": report.wall_time_s,
    }
    (out / "report.json").write_text(json.dumps(payload, indent=2) + "\n")
    return report

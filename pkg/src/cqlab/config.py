"""Declarative scenario configuration: strict TOML surface.

A scenario file has sections [run], [grid], [physics], [potential], [state],
[evolution], [observables], [output], plus [ensemble] or [[mixture.components]]
for those families.  Unknown keys anywhere are errors, reported with their
dotted path, so typos cannot silently fall back to defaults.  Scalars are
broadcast across axes; lists must match the grid dimensionality.

The SHA-256 of the raw file bytes is kept as the provenance digest; outputs
of a run quote it so result files can be traced to the exact input text.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

try:
    import tomllib as _toml  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as _toml

from .errors import ValidationError

__all__ = [
    "ScenarioConfig",
    "GridConfig",
    "PhysicsConfig",
    "PotentialConfig",
    "StateConfig",
    "EvolutionConfig",
    "OutputConfig",
    "MixtureComponent",
    "load_config",
    "parse_config",
]

FAMILIES = ("q-stochastic", "p-stochastic", "wavefunction", "ensemble", "mixture")
POTENTIAL_KINDS = ("free", "uniform", "harmonic")

_SCHEMA: dict[str, set[str]] = {
    "run": {"family", "label", "seed"},
    "grid": {"extent", "points", "origin"},
    "physics": {"hbar", "mass", "charge", "beta"},
    "potential": {"kind", "slope", "omega", "center"},
    "state": {"kind", "center", "width", "momentum", "position", "chirp"},
    "evolution": {"dt", "steps", "stride"},
    "observables": {"names", "use_sigma"},
    "output": {"marginals", "wigner", "trajectories"},
    "ensemble": {"count"},
    "mixture": {"components"},
}
_COMPONENT_KEYS = {"weight", "center", "width", "momentum", "chirp"}


def _err(path: str, message: str) -> ValidationError:
    return ValidationError(f"[{path}] {message}")


def _require_section(raw: dict, name: str) -> dict:
    if name not in raw:
        raise _err(name, "required section is missing")
    sec = raw[name]
    if not isinstance(sec, dict):
        raise _err(name, "must be a table")
    return sec


def _check_keys(sec: dict, name: str, allowed: set[str]) -> None:
    for key in sec:
        if key not in allowed:
            raise _err(f"{name}.{key}", "unknown key")


def _get(sec: dict, name: str, key: str, kind, default=None, required: bool = False):
    if key not in sec:
        if required:
            raise _err(f"{name}.{key}", "required key is missing")
        return default
    value = sec[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is not None and not isinstance(value, kind):
        raise _err(f"{name}.{key}", f"expected {getattr(kind, '__name__', kind)}")
    return value


def _vector(sec: dict, name: str, key: str, dims: int, default=None) -> tuple[float, ...] | None:
    if key not in sec:
        if default is None:
            return None
        return tuple(float(default) for _ in range(dims))
    value = sec[key]
    if isinstance(value, bool):
        raise _err(f"{name}.{key}", "expected number or list of numbers")
    if isinstance(value, (int, float)):
        return tuple(float(value) for _ in range(dims))
    if isinstance(value, list):
        if len(value) != dims:
            raise _err(f"{name}.{key}", f"needs {dims} component(s), got {len(value)}")
        try:
            return tuple(float(v) for v in value)
        except (TypeError, ValueError):
            raise _err(f"{name}.{key}", "list entries must be numbers") from None
    raise _err(f"{name}.{key}", "expected number or list of numbers")


@dataclass(frozen=True)
class GridConfig:
    extents: tuple[float, ...]
    points: tuple[int, ...]
    origins: tuple[float, ...]

    @property
    def dims(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class PhysicsConfig:
    hbar: float = 1.0
    mass: float = 1.0
    charge: float = 1.0
    beta: float = 0.0


@dataclass(frozen=True)
class PotentialConfig:
    kind: str
    slope: tuple[float, ...] | None = None
    omega: float | None = None
    center: tuple[float, ...] | None = None


@dataclass(frozen=True)
class StateConfig:
    kind: str
    center: tuple[float, ...]
    width: tuple[float, ...]
    momentum: tuple[float, ...]  # conjugate-variable mean (key 'position' for p-family)
    chirp: tuple[float, ...]


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    steps: int
    stride: int


@dataclass(frozen=True)
class OutputConfig:
    marginals: bool = False
    wigner: bool = False
    trajectories: tuple[tuple[float, ...], ...] = ()


@dataclass(frozen=True)
class MixtureComponent:
    weight: float
    center: tuple[float, ...]
    width: tuple[float, ...]
    momentum: tuple[float, ...]
    chirp: tuple[float, ...]


@dataclass(frozen=True)
class ScenarioConfig:
    family: str
    label: str
    seed: int
    grid: GridConfig
    physics: PhysicsConfig
    potential: PotentialConfig
    state: StateConfig | None
    evolution: EvolutionConfig
    observables: tuple[str, ...]
    use_sigma: bool
    output: OutputConfig
    ensemble_count: int | None = None
    mixture: tuple[MixtureComponent, ...] = ()
    digest: str = field(default="", compare=False)


def _parse_grid(raw: dict) -> GridConfig:
    sec = _require_section(raw, "grid")
    _check_keys(sec, "grid", _SCHEMA["grid"])
    points_raw = sec.get("points")
    if points_raw is None:
        raise _err("grid.points", "required key is missing")
    if isinstance(points_raw, bool):
        raise _err("grid.points", "expected integer or list of integers")
    if isinstance(points_raw, int):
        points = (points_raw,)
    elif isinstance(points_raw, list) and all(isinstance(p, int) for p in points_raw):
        points = tuple(points_raw)
    else:
        raise _err("grid.points", "expected integer or list of integers")
    dims = len(points)
    if dims not in (1, 2):
        raise _err("grid.points", "only 1D and 2D grids are supported")
    if any(p < 4 for p in points):
        raise _err("grid.points", "need at least 4 points per axis")
    extents = _vector(sec, "grid", "extent", dims)
    if extents is None:
        raise _err("grid.extent", "required key is missing")
    if any(e <= 0 for e in extents):
        raise _err("grid.extent", "extents must be positive")
    origins = _vector(sec, "grid", "origin", dims)
    if origins is None:
        origins = tuple(-0.5 * e for e in extents)
    return GridConfig(extents, points, origins)


def _parse_state(raw: dict, dims: int, family: str) -> StateConfig | None:
    if family == "mixture":
        if "state" in raw:
            raise _err("state", "mixture scenarios define components, not a single state")
        return None
    sec = _require_section(raw, "state")
    _check_keys(sec, "state", _SCHEMA["state"])
    kind = _get(sec, "state", "kind", str, default="gaussian")
    if kind != "gaussian":
        raise _err("state.kind", f"unknown state kind {kind!r}")
    conj_key = "position" if family == "p-stochastic" else "momentum"
    wrong_key = "momentum" if family == "p-stochastic" else "position"
    if wrong_key in sec:
        raise _err(f"state.{wrong_key}", f"the {family} family uses key '{conj_key}'")
    center = _vector(sec, "state", "center", dims, default=0.0)
    width = _vector(sec, "state", "width", dims, default=1.0)
    if any(w <= 0 for w in width):
        raise _err("state.width", "widths must be positive")
    conj = _vector(sec, "state", conj_key, dims, default=0.0)
    chirp = _vector(sec, "state", "chirp", dims, default=0.0)
    return StateConfig(kind, center, width, conj, chirp)


def _parse_mixture(raw: dict, dims: int, family: str) -> tuple[MixtureComponent, ...]:
    if family != "mixture":
        if "mixture" in raw:
            raise _err("mixture", f"not allowed for the {family} family")
        return ()
    sec = _require_section(raw, "mixture")
    _check_keys(sec, "mixture", _SCHEMA["mixture"])
    comps = sec.get("components")
    if not isinstance(comps, list) or not comps:
        raise _err("mixture.components", "need a non-empty array of component tables")
    out = []
    total = 0.0
    for i, comp in enumerate(comps):
        path = f"mixture.components[{i}]"
        if not isinstance(comp, dict):
            raise _err(path, "must be a table")
        _check_keys(comp, path, _COMPONENT_KEYS)
        weight = _get(comp, path, "weight", float, required=True)
        if weight <= 0:
            raise _err(f"{path}.weight", "weights must be positive")
        total += weight
        out.append(
            MixtureComponent(
                weight=weight,
                center=_vector(comp, path, "center", dims, default=0.0),
                width=_vector(comp, path, "width", dims, default=1.0),
                momentum=_vector(comp, path, "momentum", dims, default=0.0),
                chirp=_vector(comp, path, "chirp", dims, default=0.0),
            )
        )
    if abs(total - 1.0) > 1e-12:
        raise _err("mixture.components", f"weights sum to {total!r}, expected 1")
    return tuple(out)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario TOML text."""
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ValidationError(f"config is not valid TOML: {exc}") from exc
    for section in raw:
        if section not in _SCHEMA:
            raise _err(section, "unknown section")

    run = _require_section(raw, "run")
    _check_keys(run, "run", _SCHEMA["run"])
    family = _get(run, "run", "family", str, required=True)
    if family not in FAMILIES:
        raise _err("run.family", f"unknown family {family!r}; choose from {FAMILIES}")
    label = _get(run, "run", "label", str, default="")
    seed = _get(run, "run", "seed", int, default=0)
    if isinstance(seed, bool) or seed < 0:
        raise _err("run.seed", "seed must be a non-negative integer")

    grid = _parse_grid(raw)
    dims = grid.dims

    phys_sec = raw.get("physics", {})
    _check_keys(phys_sec, "physics", _SCHEMA["physics"])
    physics = PhysicsConfig(
        hbar=_get(phys_sec, "physics", "hbar", float, default=1.0),
        mass=_get(phys_sec, "physics", "mass", float, default=1.0),
        charge=_get(phys_sec, "physics", "charge", float, default=1.0),
        beta=_get(phys_sec, "physics", "beta", float, default=0.0),
    )
    if physics.hbar <= 0 or physics.mass <= 0:
        raise _err("physics", "hbar and mass must be positive")

    pot_sec = raw.get("potential", {"kind": "free"})
    _check_keys(pot_sec, "potential", _SCHEMA["potential"])
    kind = _get(pot_sec, "potential", "kind", str, default="free")
    if kind not in POTENTIAL_KINDS:
        raise _err("potential.kind", f"unknown kind {kind!r}; choose from {POTENTIAL_KINDS}")
    slope = _vector(pot_sec, "potential", "slope", dims)
    omega = _get(pot_sec, "potential", "omega", float)
    center = _vector(pot_sec, "potential", "center", dims)
    if kind == "uniform" and slope is None:
        raise _err("potential.slope", "uniform potential needs a slope")
    if kind == "harmonic" and omega is None:
        raise _err("potential.omega", "harmonic potential needs omega")
    if kind != "uniform" and slope is not None:
        raise _err("potential.slope", f"not a parameter of the {kind} potential")
    if kind != "harmonic" and (omega is not None or center is not None):
        raise _err("potential", f"omega/center are not parameters of the {kind} potential")
    potential = PotentialConfig(kind, slope, omega, center)

    state = _parse_state(raw, dims, family)
    mixture = _parse_mixture(raw, dims, family)

    evo = _require_section(raw, "evolution")
    _check_keys(evo, "evolution", _SCHEMA["evolution"])
    dt = _get(evo, "evolution", "dt", float, required=True)
    steps = _get(evo, "evolution", "steps", int, required=True)
    stride = _get(evo, "evolution", "stride", int, default=max(steps, 1))
    if dt <= 0:
        raise _err("evolution.dt", "dt must be positive")
    if steps < 0:
        raise _err("evolution.steps", "steps must be non-negative")
    if stride < 1:
        raise _err("evolution.stride", "stride must be at least 1")
    if steps % stride != 0:
        raise _err("evolution.stride", f"stride {stride} does not divide steps {steps}")
    evolution = EvolutionConfig(dt, steps, stride)

    obs_sec = raw.get("observables", {})
    _check_keys(obs_sec, "observables", _SCHEMA["observables"])
    names_raw = obs_sec.get("names", [])
    if not isinstance(names_raw, list) or not all(isinstance(s, str) for s in names_raw):
        raise _err("observables.names", "expected a list of strings")
    if len(set(names_raw)) != len(names_raw):
        raise _err("observables.names", "duplicate observable names")
    use_sigma = _get(obs_sec, "observables", "use_sigma", bool, default=True)

    out_sec = raw.get("output", {})
    _check_keys(out_sec, "output", _SCHEMA["output"])
    marginals = _get(out_sec, "output", "marginals", bool, default=False)
    wigner = _get(out_sec, "output", "wigner", bool, default=False)
    traj_raw = out_sec.get("trajectories", [])
    if not isinstance(traj_raw, list):
        raise _err("output.trajectories", "expected a list of start positions")
    starts = []
    for i, item in enumerate(traj_raw):
        if isinstance(item, (int, float)) and not isinstance(item, bool):
            if dims != 1:
                raise _err(f"output.trajectories[{i}]", f"needs {dims} components")
            starts.append((float(item),))
        elif isinstance(item, list) and len(item) == dims:
            starts.append(tuple(float(v) for v in item))
        else:
            raise _err(f"output.trajectories[{i}]", f"needs {dims} components")
    if starts and family not in ("q-stochastic",):
        raise _err("output.trajectories", "trajectories require the q-stochastic family")
    if wigner and family in ("ensemble",):
        raise _err("output.wigner", "the ensemble family has no wavefunction to transform")
    output = OutputConfig(marginals, wigner, tuple(starts))

    ensemble_count = None
    if family == "ensemble":
        ens = _require_section(raw, "ensemble")
        _check_keys(ens, "ensemble", _SCHEMA["ensemble"])
        ensemble_count = _get(ens, "ensemble", "count", int, required=True)
        if isinstance(ensemble_count, bool) or ensemble_count < 1:
            raise _err("ensemble.count", "count must be a positive integer")
    elif "ensemble" in raw:
        raise _err("ensemble", f"not allowed for the {family} family")

    return ScenarioConfig(
        family=family,
        label=label,
        seed=seed,
        grid=grid,
        physics=physics,
        potential=potential,
        state=state,
        evolution=evolution,
        observables=tuple(names_raw),
        use_sigma=use_sigma,
        output=output,
        ensemble_count=ensemble_count,
        mixture=mixture,
        digest=hashlib.sha256(text.encode("utf-8")).hexdigest(),
    )


def load_config(path) -> ScenarioConfig:
    """Read and validate a scenario file."""
    with open(path, "rb") as fh:
        data = fh.read()
    return parse_config(data.decode("utf-8"))

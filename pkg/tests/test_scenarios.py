"""End-to-end scenario runs: artifacts, determinism, provenance."""

import hashlib
import json
import textwrap

import pytest

from cqlab.config import parse_config
from cqlab.scenarios import run_scenario

Q_STATE = textwrap.dedent(
    """
    [run]
    family = "q-stochastic"
    label = "tiny-q"

    [grid]
    extent = 20.0
    points = 64

    [potential]
    kind = "harmonic"
    omega = 1.0

    [state]
    center = 1.0
    width = 1.0
    momentum = 0.5

    [evolution]
    dt = 1e-3
    steps = 20
    stride = 10

    [observables]
    names = ["q0", "p0", "energy"]

    [output]
    marginals = true
    trajectories = [0.5, -1.0]
    """
)

P_STATE = textwrap.dedent(
    """
    [run]
    family = "p-stochastic"

    [grid]
    extent = 24.0
    points = 64

    [potential]
    kind = "uniform"
    slope = 0.4

    [state]
    center = 0.0
    width = 1.0
    position = 0.5

    [evolution]
    dt = 1e-3
    steps = 20
    stride = 20

    [observables]
    names = ["p0", "q0"]
    """
)

WAVEFUNCTION = textwrap.dedent(
    """
    [run]
    family = "wavefunction"

    [grid]
    extent = 20.0
    points = 64

    [state]
    center = -1.0
    width = 1.0
    momentum = 0.8

    [evolution]
    dt = 2e-3
    steps = 20
    stride = 10

    [observables]
    names = ["q0", "p0", "kinetic", "energy"]

    [output]
    marginals = true
    wigner = true
    """
)

ENSEMBLE = textwrap.dedent(
    """
    [run]
    family = "ensemble"
    seed = 42

    [grid]
    extent = 16.0
    points = 64

    [potential]
    kind = "harmonic"
    omega = 1.0

    [state]
    center = 0.5
    width = 1.0
    momentum = 0.0

    [evolution]
    dt = 1e-3
    steps = 20
    stride = 10

    [observables]
    names = ["q0", "energy"]

    [ensemble]
    count = 500
    """
)

MIXTURE = textwrap.dedent(
    """
    [run]
    family = "mixture"

    [grid]
    extent = 20.0
    points = 64

    [evolution]
    dt = 1e-3
    steps = 10
    stride = 10

    [observables]
    names = ["q0", "p0"]

    [[mixture.components]]
    weight = 0.4
    center = -1.5
    momentum = 0.5

    [[mixture.components]]
    weight = 0.6
    center = 1.5
    momentum = -0.5
    """
)

FAMILY_TEXTS = {
    "q-stochastic": Q_STATE,
    "p-stochastic": P_STATE,
    "wavefunction": WAVEFUNCTION,
    "ensemble": ENSEMBLE,
    "mixture": MIXTURE,
}


@pytest.mark.parametrize("family", sorted(FAMILY_TEXTS))
def test_each_family_runs_and_reports(family, tmp_path):
    cfg = parse_config(FAMILY_TEXTS[family])
    report = run_scenario(cfg, tmp_path / family)
    assert report.family == family
    assert report.all_passed, [c for c in report.invariants if not c.passed]
    assert (tmp_path / family / "observables.csv").is_file()
    assert (tmp_path / family / "report.json").is_file()
    expected_snaps = cfg.evolution.steps // cfg.evolution.stride + 1
    assert len(report.snapshot_times) == expected_snaps
    assert report.snapshot_times[0] == 0.0


def test_observable_columns_carry_side_suffixes(tmp_path):
    cfg = parse_config(Q_STATE)
    run_scenario(cfg, tmp_path)
    lines = (tmp_path / "observables.csv").read_text().splitlines()
    assert lines[0] == "time,q0_C,q0_Q,p0_C,p0_Q,energy_C,energy_Q"
    cells = lines[1].split(",")
    assert len(cells) == 7
    for cell in cells:
        # full round-trip precision: the text is the shortest 17-digit form
        assert cell == format(float(cell), ".17g")


def test_wavefunction_only_quantum_columns(tmp_path):
    cfg = parse_config(WAVEFUNCTION)
    run_scenario(cfg, tmp_path)
    header = (tmp_path / "observables.csv").read_text().splitlines()[0]
    assert header == "time,q0_Q,p0_Q,kinetic_Q,energy_Q"


def test_artifact_inventory_matches_report(tmp_path):
    cfg = parse_config(WAVEFUNCTION)
    report = run_scenario(cfg, tmp_path)
    listed = set(report.files)
    assert "observables.csv" in listed
    assert "marginals_0000.csv" in listed and "marginals_0002.csv" in listed
    assert "wigner_0000.bin" in listed and "wigner_0000.json" in listed
    for name in listed:
        assert (tmp_path / name).is_file()
    meta = json.loads((tmp_path / "wigner_0000.json").read_text())
    assert meta["dtype"] == "<f8" and meta["order"] == "C"
    assert meta["shape"] == [64, 64]


def test_trajectory_artifact_for_q_family(tmp_path):
    cfg = parse_config(Q_STATE)
    run_scenario(cfg, tmp_path)
    lines = (tmp_path / "trajectories.csv").read_text().splitlines()
    assert lines[0] == "time,q0_0,p0_0,q1_0,p1_0"
    assert len(lines) == 2 + 20  # header + initial row + one row per step


def test_reruns_are_byte_identical(tmp_path):
    cfg = parse_config(ENSEMBLE)
    a = tmp_path / "a"
    b = tmp_path / "b"
    run_scenario(cfg, a)
    run_scenario(cfg, b)
    for name in ("observables.csv",):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    ra = json.loads((a / "report.json").read_text())
    rb = json.loads((b / "report.json").read_text())
    # wall time may differ; everything content-bearing must not
    for key in ("label", "family", "config_sha256", "seed", "snapshot_times", "invariants", "files"):
        assert ra[key] == rb[key]


def test_report_provenance_and_seed_override(tmp_path):
    text = ENSEMBLE
    cfg = parse_config(text)
    run_scenario(cfg, tmp_path / "x", seed=99)
    payload = json.loads((tmp_path / "x" / "report.json").read_text())
    assert payload["config_sha256"] == hashlib.sha256(text.encode("utf-8")).hexdigest()
    assert payload["seed"] == 99
    assert payload["tool"]["name"] == "cqlab"
    assert all(item["passed"] for item in payload["invariants"])
    names = {item["name"] for item in payload["invariants"]}
    assert "weight_sum_drift" in names
    assert "energy_drift_rel" in names


def test_seed_changes_sampled_artifacts(tmp_path):
    cfg = parse_config(ENSEMBLE)
    run_scenario(cfg, tmp_path / "a", seed=1)
    run_scenario(cfg, tmp_path / "b", seed=2)
    assert (tmp_path / "a" / "observables.csv").read_bytes() != (
        tmp_path / "b" / "observables.csv"
    ).read_bytes()

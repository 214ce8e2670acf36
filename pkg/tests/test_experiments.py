import json
import struct

import numpy as np
import pytest

from conftest import random_state
from oddinls import make_grid
from oddinls.domain import PhysParams, State
from oddinls.experiments.cli import main
from oddinls.experiments.config import ConfigError, parse_config
from oddinls.experiments.io import (
    CheckpointConsistencyError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    load_checkpoint,
    read_observables_csv,
    save_checkpoint,
)
from oddinls.observables import CSV_FIELDS

HEADER = "t,mass,e_kin,e_pot,e_total,h1,hsc,l2_local,linf_local,morawetz"


def base_config(**over):
    cfg = {
        "grid": {"L": 20, "N": 256},
        "params": {"alpha": 4, "b": 0.5},
        "time": {"dt": 0.01, "t_max": 0.5, "output_every": 10},
        "initial": {"kind": "odd_gaussian", "amplitude": 1, "width": 1},
    }
    cfg.update(over)
    return cfg


def write_cfg(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


# --- config ---------------------------------------------------------------------


def test_config_roundtrip():
    cfg = parse_config(base_config(seed=7, interval=[-2, 3]))
    assert cfg.grid.N == 256 and cfg.seed == 7 and cfg.interval == (-2.0, 3.0)
    assert cfg.make_schedule().n_steps == 50


@pytest.mark.parametrize(
    "mutate",
    [
        lambda c: c.update(bogus=1),
        lambda c: c["grid"].update(M=3),
        lambda c: c["initial"].update(colour="red"),
        lambda c: c.pop("time"),
        lambda c: c["grid"].update(N=4),
        lambda c: c["grid"].update(N=256.5),
        lambda c: c["grid"].update(L=-1),
        lambda c: c["params"].update(b=1.2),
        lambda c: c["params"].update(alpha="four"),
        lambda c: c["time"].update(dt=0),
        lambda c: c.update(interval=[1, -1]),
        lambda c: c.update(hardy={"p_values": [1.0]}),
        lambda c: c.update(sweep={"experiment": "sweep"}),
        lambda c: c.update(seed=-1),
        lambda c: c.update(linear_only="yes"),
        lambda c: c["initial"].update(kind="square"),
    ],
)
def test_config_rejects(mutate):
    cfg = base_config()
    mutate(cfg)
    with pytest.raises(ConfigError):
        parse_config(cfg)


# --- checkpoints ----------------------------------------------------------------


def test_checkpoint_bitwise(tmp_path, rng):
    g = make_grid(20.0, 512)
    st = random_state(g, rng, 1.0).replace(t=1.25)
    path = save_checkpoint(st, tmp_path / "a.inls", PhysParams(4, 0.5))
    back = load_checkpoint(path, grid=g, params=PhysParams(4, 0.5))
    assert back.values.tobytes() == st.values.tobytes()
    assert back.t == st.t and back.grid == g


def test_checkpoint_layout(tmp_path):
    g = make_grid(10.0, 16)
    vals = np.arange(g.size) + 1j * np.arange(g.size)[::-1]
    raw = save_checkpoint(State(g, 0.5, vals), tmp_path / "b.inls").read_bytes()
    magic, version, n = struct.unpack_from("<4sII", raw)
    assert magic == b"INLS" and version == 1
    meta = json.loads(raw[12:12 + n])
    assert meta == {"grid": {"L": 10.0, "N": 16}, "t": 0.5}
    body = np.frombuffer(raw[12 + n:], dtype="<f8")
    np.testing.assert_array_equal(body[0::2], vals.real)
    np.testing.assert_array_equal(body[1::2], vals.imag)


def test_checkpoint_errors(tmp_path, rng):
    g = make_grid(20.0, 64)
    path = save_checkpoint(random_state(g, rng, 1.0), tmp_path / "c.inls")
    raw = path.read_bytes()

    bad = tmp_path / "magic.inls"
    bad.write_bytes(b"NOPE" + raw[4:])
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(bad)
    bad.write_bytes(raw[:4] + struct.pack("<I", 9) + raw[8:])
    with pytest.raises(CheckpointVersionError):
        load_checkpoint(bad)
    bad.write_bytes(raw[:-5])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(bad)
    bad.write_bytes(raw[:6])
    with pytest.raises(CheckpointTruncatedError):
        load_checkpoint(bad)
    with pytest.raises(CheckpointConsistencyError):
        load_checkpoint(path, grid=make_grid(20.0, 128))
    with pytest.raises(CheckpointConsistencyError):
        load_checkpoint(save_checkpoint(State.zeros(g), tmp_path / "d.inls", PhysParams(4, 0.5)),
                        params=PhysParams(5, 0.5))


# --- CLI ------------------------------------------------------------------------


def test_cli_evolve_t0_single_row(tmp_path):
    cfg = base_config(time={"dt": 0.01, "t_max": 0})
    out = tmp_path / "out"
    assert main(["evolve", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    lines = (out / "observables.csv").read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 2
    assert float(lines[1].split(",")[0]) == 0.0


def test_cli_evolve_csv_parse_back(tmp_path):
    cfg = base_config(time={"dt": 0.01, "t_max": 0.5, "output_every": 5, "checkpoint_every": 20})
    out = tmp_path / "out"
    assert main(["evolve", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 0
    assert tuple(HEADER.split(",")) == CSV_FIELDS
    rows = read_observables_csv(out / "observables.csv")
    assert len(rows) == 11
    for r in rows:
        r.check()
    body = (out / "observables.csv").read_text().splitlines()[1:]
    for line in body:
        for tok in line.split(","):
            assert float(format(float(tok), ".17g")) == float(tok)
    report = json.loads((out / "report.json").read_text())
    assert report["mass_drift"] < 1e-12 and report["morawetz_bound_ok"]
    ck = load_checkpoint(out / "checkpoints" / "last_good.inls", grid=make_grid(20.0, 256))
    assert ck.t == pytest.approx(0.4)


def test_cli_reproducible(tmp_path):
    path = write_cfg(tmp_path, base_config())
    for name in ("a", "b"):
        assert main(["evolve", "--config", path, "--out", str(tmp_path / name)]) == 0
    for f in ("observables.csv", "report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_cli_hardy_deterministic(tmp_path):
    cfg = base_config(grid={"L": 40, "N": 2048}, hardy={"samples": 200})
    path = write_cfg(tmp_path, cfg)
    for name in ("a", "b"):
        assert main(["hardy", "--config", path, "--seed", "11", "--out", str(tmp_path / name)]) == 0
    a = (tmp_path / "a" / "report.json").read_bytes()
    assert a == (tmp_path / "b" / "report.json").read_bytes()
    rep = json.loads(a)
    assert rep["seed"] == 11 and all(len(d["ratios"]) == 200 and d["all_hold"] for d in rep["by_p"])
    assert main(["hardy", "--config", path, "--seed", "12", "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "report.json").read_bytes() != a


def test_cli_sweep(tmp_path):
    cfg = base_config(time={"dt": 0.01, "t_max": 0.2, "output_every": 10})
    path = write_cfg(tmp_path, cfg)
    assert main(["sweep", "--config", path, "--out", str(tmp_path / "s1")]) == 0
    assert main(["sweep", "--config", path, "--workers", "3", "--out", str(tmp_path / "s3")]) == 0
    dirs = sorted(p.name for p in (tmp_path / "s1").iterdir() if p.is_dir())
    assert len(dirs) == 9 and "alpha3.5_b0.25" in dirs
    summary = json.loads((tmp_path / "s1" / "summary.json").read_text())
    assert len(summary["runs"]) == 9 and all(r["status"] == "ok" for r in summary["runs"])
    # parallelism must not change any artefact
    for d in dirs:
        for f in ("observables.csv", "report.json"):
            assert (tmp_path / "s1" / d / f).read_bytes() == (tmp_path / "s3" / d / f).read_bytes()


def test_cli_linear_only(tmp_path):
    out = tmp_path / "lin"
    assert main(["evolve", "--config", write_cfg(tmp_path, base_config()), "--out", str(out), "--linear-only"]) == 0
    rows = read_observables_csv(out / "observables.csv")
    assert all(r.e_pot == 0.0 for r in rows)


def test_cli_config_error(tmp_path, capsys):
    out = tmp_path / "bad"
    code = main(["evolve", "--config", write_cfg(tmp_path, base_config(extra=1)), "--out", str(out)])
    assert code == 2
    record = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert record["error"] == "ConfigError" and record["exit_code"] == 2
    assert json.loads((out / "error.json").read_text()) == record
    assert main(["evolve", "--config", str(tmp_path / "missing.json"), "--out", str(out)]) == 2


def test_cli_domain_error_exit_2(tmp_path):
    # packet too wide for the box
    cfg = base_config(initial={"kind": "odd_gaussian", "width": 0.01})
    assert main(["evolve", "--config", write_cfg(tmp_path, cfg), "--out", str(tmp_path / "o")]) == 2


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_cli_numeric_fault(tmp_path):
    g = make_grid(20.0, 256)
    x = np.linspace(0.0, 20.0, 257)
    u = np.zeros_like(x)
    u[100] = 1e80  # |u|^4 overflows in the phase step
    np.savez(tmp_path / "spike.npz", x=x, u=u)
    cfg = base_config(initial={"kind": "file", "path": str(tmp_path / "spike.npz")})
    out = tmp_path / "nan"
    assert main(["evolve", "--config", write_cfg(tmp_path, cfg), "--out", str(out)]) == 3
    assert json.loads((out / "error.json").read_text())["error"] == "NumericalFault"
    good = load_checkpoint(out / "last_good.inls", grid=g)
    assert good.t == 0.0 and np.isfinite(good.values).all()


@pytest.mark.slow
def test_cli_convergence_and_scatter(tmp_path):
    cfg = base_config(
        grid={"L": 40, "N": 1024},
        time={"dt": 0.01, "t_max": 1.0, "output_every": 10},
        convergence={"dt_list": [0.02, 0.01, 0.005], "refine": 4},
        scatter={"window": [0.25, 0.5, 1.0], "tol": 1.0, "wave_operator": {"T_back": 1.0}},
    )
    path = write_cfg(tmp_path, cfg)
    assert main(["convergence", "--config", path, "--out", str(tmp_path / "c")]) == 0
    rep = json.loads((tmp_path / "c" / "report.json").read_text())
    assert rep["order"] == pytest.approx(2.0, abs=0.1)
    assert main(["scatter", "--config", path, "--out", str(tmp_path / "s")]) == 0
    rep = json.loads((tmp_path / "s" / "report.json").read_text())
    assert set(rep) >= {"scattering", "local_decay", "small_data", "wave_operator"}
    assert len(rep["scattering"]["residuals"]) == 2


@pytest.mark.parametrize("name", ["evolve", "convergence", "hardy", "scatter", "sweep"])
def test_demo_configs_parse(name):
    from pathlib import Path

    from oddinls.experiments.config import load_config

    path = Path(__file__).resolve().parents[1] / "demos" / "configs" / f"{name}.json"
    assert load_config(path).grid.N >= 2048

import csv
import json

import pytest

from cppok import __version__
from cppok.cli import main
from cppok.config import ConfigError, load_config, parse_config, parse_jump
from cppok.jumps import Dirac, DiscretePmf, Exponential
from cppok.timechange import InverseMtssClock, MtssClock

BASE = """
[process]
k = 2
lambda = 1.0
[process.jump]
law = "exponential"
mu = 1.0
{clock}
[monte_carlo]
replicates = 3000
seed = 5
grid = {grid}
workers = {workers}
[output]
format = "{fmt}"
"""

CLOCK = """
[clock]
type = "{kind}"
c1 = 0.6
c2 = 0.4
alpha1 = 0.5
alpha2 = 0.7
mu1 = 1.0
mu2 = {mu2}
"""


def write(tmp_path, name="c.toml", clock="", grid="[0.5, 1.0, 2.0]", workers=1, fmt="summary"):
    path = tmp_path / name
    path.write_text(BASE.format(clock=clock, grid=grid, workers=workers, fmt=fmt))
    return str(path)


def data_rows(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))


def test_parse_jump_strings():
    assert isinstance(parse_jump("dirac:1"), Dirac)
    assert parse_jump("exponential:2").mu == 2.0
    assert isinstance(parse_jump("discrete:0.2,0.5,0.3"), DiscretePmf)
    with pytest.raises(ConfigError, match="process.jump.law"):
        parse_jump("gamma:2")
    with pytest.raises(ConfigError, match="process.jump"):
        parse_jump("discrete:0.2,0.2")


def test_config_round_trip(tmp_path):
    cfg = load_config(write(tmp_path, clock=CLOCK.format(kind="inverse_mtss", mu2=2.0)))
    assert isinstance(cfg.clock, InverseMtssClock)
    assert isinstance(cfg.law, Exponential)
    assert cfg.monte_carlo.replicates == 3000
    plain = load_config(write(tmp_path, "d.toml", clock=CLOCK.format(kind="mtss", mu2=2.0)))
    assert isinstance(plain.clock, MtssClock)


def test_config_errors_name_the_field(tmp_path):
    with pytest.raises(ConfigError, match="process.k"):
        parse_config({"process": {"lambda": 1.0, "jump": "dirac:1"}})
    with pytest.raises(ConfigError, match="monte_carlo"):
        parse_config({"process": {"k": 1, "lambda": 1.0, "jump": "dirac:1"}})
    with pytest.raises(ConfigError, match="monte_carlo.grid"):
        parse_config({"process": {"k": 1, "lambda": 1.0, "jump": "dirac:1"},
                      "monte_carlo": {"replicates": 1, "seed": 1, "grid": []}})
    with pytest.raises(ConfigError, match="clock"):
        load_config(write(tmp_path, clock=CLOCK.format(kind="mtss", mu2=-1.0)))
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(str(tmp_path / "missing.toml"))


def test_digest_ignores_workers_and_output_path(tmp_path):
    a = load_config(write(tmp_path, "a.toml", workers=1))
    b = load_config(write(tmp_path, "b.toml", workers=4))
    c = load_config(write(tmp_path, "c.toml", grid="[1.0]"))
    assert a.digest == b.digest != c.digest


def test_pmf_command(capsys):
    assert main(["pmf", "--k", "3", "--lambda", "0.5", "--t", "2", "--oracle"]) == 0
    out = capsys.readouterr().out
    assert out.startswith(f"# cppok {__version__}")
    rows = data_rows(out)
    assert rows[0] == ["n", "p_n", "p_n_enum", "abs_diff"]
    assert all(float(r[3]) < 1e-12 for r in rows[1:])
    assert sum(float(r[1]) for r in rows[1:]) == pytest.approx(1.0, abs=1e-10)


def test_pmf_usage_errors():
    assert main(["pmf", "--k", "0", "--lambda", "1", "--t", "1"]) == 2
    assert main(["pmf", "--k", "2", "--lambda", "1", "--t", "-1"]) == 2
    assert main(["pmf", "--k", "2"]) == 2
    assert main(["pmf", "--k", "6", "--lambda", "8", "--t", "10", "--oracle"]) == 2


def test_simulate_summary_has_theory_columns(tmp_path, capsys):
    assert main(["simulate", write(tmp_path)]) == 0
    rows = data_rows(capsys.readouterr().out)
    assert rows[0][-2:] == ["theory_mean", "theory_variance"]
    assert [float(r[5]) for r in rows[1:]] == pytest.approx([1.5, 3.0, 6.0])
    assert len(rows[1][1].replace("-", "").replace(".", "")) > 12


def test_simulate_formats(tmp_path, capsys):
    assert main(["simulate", write(tmp_path, fmt="json")]) == 0
    blob = json.loads(capsys.readouterr().out)
    assert blob["seed"] == 5 and len(blob["mean"]) == 3
    out = tmp_path / "paths.csv"
    assert main(["simulate", write(tmp_path, "p.toml", fmt="paths"), "--output", str(out)]) == 0
    assert len(data_rows(out.read_text())) == 1 + 3000 * 3


def test_simulate_is_byte_deterministic(tmp_path):
    outs = []
    for i, w in enumerate((1, 1, 4)):
        out = tmp_path / f"o{i}.csv"
        assert main(["simulate", write(tmp_path, f"c{i}.toml", workers=w), "--output", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_simulate_clocks(tmp_path, capsys):
    assert main(["simulate", write(tmp_path, clock=CLOCK.format(kind="mtss", mu2=2.0))]) == 0
    assert "Z1" in capsys.readouterr().out
    assert main(["simulate", write(tmp_path, "z2.toml", clock=CLOCK.format(kind="inverse_mtss", mu2=2.0))]) == 0
    assert "asymptote" in capsys.readouterr().out
    with pytest.warns(UserWarning, match="infinite"):
        assert main(["simulate", write(tmp_path, "st.toml", clock=CLOCK.format(kind="mtss", mu2=0.0))]) == 0
    assert "nan" in capsys.readouterr().out


def test_simulate_rejects_empty_grid(tmp_path):
    assert main(["simulate", write(tmp_path, grid="[]")]) == 2


def test_dispersion_command(tmp_path, capsys):
    assert main(["dispersion", "--k", "1", "--lambda", "1", "--jump", "exponential:1", "--t", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["class"] == "over"
    assert main(["dispersion", "--k", "1", "--lambda", "1", "--jump", "exponential:3", "--t", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["class"] == "under"
    assert main(["dispersion", "--k", "1", "--lambda", "1", "--jump", "exponential:1", "--t", "0"]) == 2
    assert main(["dispersion", "--k", "1", "--t", "1"]) == 2
    inverse = write(tmp_path, clock=CLOCK.format(kind="inverse_mtss", mu2=2.0))
    assert main(["dispersion", "--config", inverse, "--t", "1"]) == 2
    assert "--empirical" in capsys.readouterr().err
    assert main(["dispersion", "--config", inverse, "--t", "1", "--empirical", "--replicates", "2000"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["mode"] == "empirical" and report["class"] == "over"


def test_lrd_command(tmp_path, capsys):
    cfg = write(tmp_path)
    assert main(["lrd", "--config", cfg, "--points", "4"]) == 2
    assert main(["lrd", "--config", cfg, "--points", "5"]) == 0
    out = capsys.readouterr().out
    assert "# verdict:" in out
    table = tmp_path / "corr.csv"
    table.write_text("t,corr\n" + "".join(f"{t},{t ** -0.5}\n" for t in (10, 30, 100, 300, 1000)))
    assert main(["lrd", "--from-csv", str(table)]) == 0
    out = capsys.readouterr().out
    assert "# verdict: LRD" in out and "# exponent: -0.5" in out


def test_verify_command(capsys):
    assert main(["verify", "--suite", "nope"]) == 2
    assert "pmf" in capsys.readouterr().err
    assert main(["verify", "--suite", "dispersion"]) == 0
    record = json.loads(capsys.readouterr().out.splitlines()[0])
    assert record["criterion"] == "dispersion" and record["passed"] is True

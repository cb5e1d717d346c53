import json

from click.testing import CliRunner

from cagb import __version__
from cagb.cli import main

runner = CliRunner()


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def lcg_doc(**overrides):
    doc = {
        "scenario": "lcg",
        "n_players": 6,
        "area": [40, 40],
        "radius": 15.0,
        "channels": 3,
        "seeds": [0, 1],
    }
    doc.update(overrides)
    return doc


def caching_doc(**overrides):
    doc = {
        "scenario": "caching",
        "n_players": 4,
        "area": [100, 100],
        "radius": 70.0,
        "catalog_size": 6,
        "demand_per_player": 3,
        "c_bs": 1.0,
        "order": ["pareto", "none"],
        "seeds": [0],
    }
    doc.update(overrides)
    return doc


def test_version_flag():
    result = runner.invoke(main, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_run_writes_csv(tmp_path):
    cfg = write_config(tmp_path, lcg_doc())
    out = tmp_path / "metrics.csv"
    result = runner.invoke(main, ["run", cfg, "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0] == "seed,K,iterations,final_potential,collision_free"
    assert len(lines) == 3


def test_run_rejects_invalid_config(tmp_path):
    cfg = write_config(tmp_path, lcg_doc(back_channel=9))
    result = runner.invoke(main, ["run", cfg])
    assert result.exit_code == 2
    assert "back_channel" in result.output


def test_run_rejects_missing_file(tmp_path):
    result = runner.invoke(main, ["run", str(tmp_path / "nope.json")])
    assert result.exit_code == 2
    assert "cannot read" in result.output


def test_run_twice_byte_identical(tmp_path):
    cfg = write_config(tmp_path, caching_doc())
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert runner.invoke(main, ["run", cfg, "--out", str(a)]).exit_code == 0
    assert runner.invoke(main, ["run", cfg, "--out", str(b), "--jobs", "3"]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_jsonl_flag(tmp_path):
    cfg = write_config(tmp_path, lcg_doc(seeds=[5]))
    out = tmp_path / "rows.jsonl"
    result = runner.invoke(main, ["run", cfg, "--out", str(out), "--jsonl"])
    assert result.exit_code == 0
    row = json.loads(out.read_text().splitlines()[0])
    assert row["seed"] == 5


def test_run_reports_unwritable_output(tmp_path):
    cfg = write_config(tmp_path, lcg_doc(seeds=[0]))
    target = tmp_path / "blocked"
    target.write_text("a file, not a directory")
    result = runner.invoke(main, ["run", cfg, "--out", str(target / "x.csv")])
    assert result.exit_code == 2
    assert "cannot write output" in result.output


def test_run_uses_config_out_key(tmp_path):
    out = tmp_path / "from_config.csv"
    cfg = write_config(tmp_path, lcg_doc(out=str(out)))
    result = runner.invoke(main, ["run", cfg])
    assert result.exit_code == 0
    assert out.exists()


def test_verify_passes_clean_config(tmp_path):
    cfg = write_config(tmp_path, caching_doc(order=["pareto", "selfish"],
                                             seeds=[0, 1]))
    result = runner.invoke(main, ["verify", cfg])
    assert result.exit_code == 0, result.output
    assert "PASS" in result.output


def test_verify_fails_with_counterexample(tmp_path, monkeypatch):
    import cagb.harness.runner as runner_mod
    from cagb.engine import Trace
    from cagb.partition import Partition

    def corrupted(game, graph, order, dynamics, seed, max_iters):
        return (Partition.singletons(game.n_players),
                Trace(entries=[], status="stable", iterations=1))

    monkeypatch.setattr(runner_mod, "run_until_stable", corrupted)
    cfg = write_config(tmp_path, caching_doc(
        radius=200.0, catalog_size=3, c_share=0.0, order="pareto"))
    result = runner.invoke(main, ["verify", cfg])
    assert result.exit_code == 1
    assert "counterexample" in result.output
    assert "witness=move:" in result.output


def test_verify_refuses_large_n(tmp_path):
    cfg = write_config(tmp_path, caching_doc(n_players=9))
    result = runner.invoke(main, ["verify", cfg])
    assert result.exit_code == 2
    assert "too large" in result.output


def test_sweep_concatenates(tmp_path):
    cfg = write_config(tmp_path, lcg_doc())
    out = tmp_path / "sweep.csv"
    result = runner.invoke(main, ["sweep", cfg, "--key", "channels",
                                  "--values", "2,3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert lines[0].endswith(",sweep_value")
    assert len(lines) == 1 + 2 * 2


def test_sweep_rejects_non_numeric_values(tmp_path):
    cfg = write_config(tmp_path, lcg_doc())
    result = runner.invoke(main, ["sweep", cfg, "--key", "channels",
                                  "--values", "many"])
    assert result.exit_code == 2
    assert "channels" in result.output


def test_sweep_rejects_unknown_key(tmp_path):
    cfg = write_config(tmp_path, lcg_doc())
    result = runner.invoke(main, ["sweep", cfg, "--key", "zzz",
                                  "--values", "1"])
    assert result.exit_code == 2
    assert "zzz" in result.output


def test_cli_matches_direct_runner(tmp_path):
    # the thin client round-trips rows through JSON without changing bytes
    from cagb.harness.config import parse_config
    from cagb.harness.runner import execute_config, render_csv

    doc = caching_doc(seeds=[0, 1])
    cfg = write_config(tmp_path, doc)
    out = tmp_path / "cli.csv"
    assert runner.invoke(main, ["run", cfg, "--out", str(out)]).exit_code == 0
    columns, rows = execute_config(parse_config(doc))
    assert out.read_bytes() == render_csv(columns, rows).encode()

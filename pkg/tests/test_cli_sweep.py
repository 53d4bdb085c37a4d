import csv
import json
import math

import pytest

from boltzbound import cli, graphs
from boltzbound import model as M
from boltzbound import sweep as S


@pytest.fixture
def network(tmp_path):
    path = tmp_path / "net.json"
    M.save_network(M.sk_random(8, 1.0, 0.2, seed=5), path)
    return path


def test_catalog_command(tmp_path, capsys):
    assert cli.main(["catalog", "--order", "2-5", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "11 (4+7)" in out
    for n in range(2, 6):
        text = (tmp_path / graphs.catalog_path(n).name).read_text()
        assert text == graphs.dumps_catalog(graphs.packaged_catalog(n))


def test_catalog_rejects_unsupported_order(tmp_path, capsys):
    assert cli.main(["catalog", "--order", "10", "--out", str(tmp_path)]) == 2
    assert "unsupported order" in capsys.readouterr().err


def test_bound_command_json(network, capsys):
    assert cli.main(["bound", str(network), "--order", "6", "--json"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["K"] == 6 and rep["path"] == "graph"
    assert rep["log_bound"] <= rep["log_z_exact"] + 1e-9
    assert len(rep["mus"]) == 3


def test_bound_command_brute(network, capsys):
    assert cli.main(["bound", str(network), "--order", "12", "--path", "brute"]) == 0
    assert "log_bound" in capsys.readouterr().out


def test_bound_missing_catalog(network, tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert cli.main(["bound", str(network), "--catalog-dir", str(empty)]) == 2
    assert "missing partition catalog for order 2" in capsys.readouterr().err


def test_bound_config_errors(network, tmp_path, capsys):
    assert cli.main(["bound", str(network), "--order", "12"]) == 2
    assert cli.main(["bound", str(network), "--order", "5", "--path", "brute"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert cli.main(["bound", str(bad)]) == 2


def small_config(**kw):
    d = dict(
        N=6,
        sigma_w_grid=[0.3, 1.0],
        orders=[2, 4, 6],
        networks_per_point=4,
        group_size=2,
        seed=3,
    )
    d.update(kw)
    return S.SweepConfig.from_dict(d)


def test_sweep_rows_and_aggregate():
    cfg = small_config(mf_start=["standard", "zero"])
    rows = S.run_sweep(cfg)
    assert len(rows) == 2 * 4 * 2 * 3
    assert all(not r["error"] for r in rows)
    for r in rows:
        assert r["log_bound"] <= r["log_z_exact"] + 1e-9
    agg = S.aggregate(rows, cfg.group_size)
    assert len(agg) == 2 * 2 * 3
    assert all(a["networks"] == 4 for a in agg)
    assert all(math.isfinite(a["sd_of_means_rel_error"]) for a in agg)


def test_sweep_is_deterministic_and_parallel_safe():
    cfg = small_config()
    a = S.rows_to_csv(S.run_sweep(cfg), cfg)
    b = S.rows_to_csv(S.run_sweep(cfg, workers=2), cfg)
    assert a == b


def test_sweep_csv_is_self_describing():
    cfg = small_config(networks_per_point=2)
    text = S.rows_to_csv(S.run_sweep(cfg), cfg)
    first, rest = text.split("\n", 1)
    meta = json.loads(first.split("sweep ", 1)[1])
    assert meta["config"]["sigma_theta"] == 0.2
    assert meta["rng"] == M.RNG_NAME
    rows = list(csv.DictReader(rest.splitlines()))
    assert list(rows[0]) == S.COLUMNS
    assert len(rows) == 2 * 2 * 3


def test_sweep_config_validation():
    with pytest.raises(S.SweepConfigError):
        S.SweepConfig.from_dict({"sigma_w_grid": []})
    with pytest.raises(S.SweepConfigError):
        S.SweepConfig.from_dict({"orders": [3]})
    with pytest.raises(S.SweepConfigError):
        S.SweepConfig.from_dict({"colour": "blue"})
    with pytest.raises(S.SweepConfigError):
        S.SweepConfig.from_json("[1, 2]")


def test_sweep_command(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"N": 5, "sigma_w_grid": [0.5], "orders": [2, 4], "networks_per_point": 2}))
    out = tmp_path / "s.csv"
    assert cli.main(["sweep", str(cfg), "--out", str(out), "--path", "graph", "--seed", "9"]) == 0
    assert out.exists() and (tmp_path / "s_aggregate.csv").exists()
    assert '"seed": 9' in out.read_text().splitlines()[0]
    bad = tmp_path / "bad.json"
    bad.write_text('{"sigma_w_grid": []}')
    assert cli.main(["sweep", str(bad), "--out", str(out)]) == 2

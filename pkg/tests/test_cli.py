import json

from flexauc.cli import main


def test_full_pipeline(tmp_path, capsys):
    cfg = tmp_path / "gen.json"
    cfg.write_text(json.dumps({"n_wsps": 5, "users_min": 20, "users_max": 40}))
    sc = tmp_path / "s.json"
    assert main(["gen-scenario", "--config", str(cfg), "--seed", "4", "--out", str(sc)]) == 0
    assert json.loads(sc.read_text())["seed"] == 4

    out = tmp_path / "o.json"
    assert main(["run-auction", "--scenario", str(sc), "--channels", "3",
                 "--mechanism", "partial-uniform", "--out", str(out)]) == 0
    o = json.loads(out.read_text())
    assert sum(o["allocation"]) == 3
    assert o["revenue"] <= o["indicator"] * (1 + 1e-9)

    res = tmp_path / "c.json"
    assert main(["optimize-channels", "--scenario", str(sc), "--guard-band-mhz", "1",
                 "--out", str(res)]) == 0
    assert 1 <= json.loads(res.read_text())["best_C"] <= 49


def test_uniform_undefined_reports_error(tmp_path, capsys):
    sc = tmp_path / "s.json"
    main(["gen-scenario", "--seed", "0", "--out", str(sc)])
    rc = main(["run-auction", "--scenario", str(sc), "--channels", "12",
               "--mechanism", "uniform", "--out", str(tmp_path / "o.json")])
    assert rc == 2
    assert "C < N" in capsys.readouterr().err


def test_verify(capsys):
    assert main(["verify", "--scale", "0.01"]) in (0, 1)
    out = capsys.readouterr().out
    assert "welfare-maximization" in out
    assert sum(line.startswith(("PASS", "FAIL")) for line in out.splitlines()) == 5


def test_experiment(tmp_path, capsys):
    cfg = tmp_path / "e.json"
    cfg.write_text(json.dumps({"scenario": {"n_wsps": 4, "users_min": 10, "users_max": 20},
                               "channels": [1, 2]}))
    assert main(["experiment", "--name", "onebid-comparison", "--config", str(cfg), "--trials", "2",
                 "--seed", "1", "--out-dir", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "onebid-comparison.csv").exists()
    assert "ir_violations=0" in capsys.readouterr().out

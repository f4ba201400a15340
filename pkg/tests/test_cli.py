import csv
import json

import jsonschema
import pytest

from chronocast import cli
from chronocast.benchmark import ARTIFACT_FILES, report_schema
from chronocast.models import Forecaster
from chronocast.pipeline import load_bundle

SMALL = ["--n-hours", "960", "--seed", "5"]
FAST = ["--hidden", "4", "--max-epochs", "2", "--batch-size", "128"]


def run(capsys, *args, environ=None):
    code = cli.main(list(args), environ=environ or {})
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert cli.main(["generate", "--out", str(d), *SMALL], environ={}) == 0
    assert cli.main(["prepare", "--out", str(d)], environ={}) == 0
    return d


def test_generate_outputs(workdir):
    rows = (workdir / "dataset.csv").read_text().splitlines()
    assert rows[0] == "timestamp,consumption_kwh,temperature_c,humidity_pct,wind_speed_ms"
    assert len(rows) == 961
    stats = json.loads((workdir / "dataset_stats.json").read_text())
    assert set(stats["statistics"]) == {"consumption", "temperature", "humidity", "wind_speed"}


def test_generate_deterministic(tmp_path, capsys):
    for name in ("a", "b"):
        assert run(capsys, "generate", "--out", str(tmp_path / name), *SMALL)[0] == 0
    for f in ("dataset.csv", "dataset_stats.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_generate_too_short(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--out", str(tmp_path), "--n-hours", "100")
    assert code == 1 and "169" in err


def test_prepare_bundle(workdir, tmp_path, capsys):
    manifest = json.loads((workdir / "split.json").read_text())
    assert manifest["rows"] == 792
    assert manifest["train"] == [0, 554]
    code, _, _ = run(capsys, "prepare", "--out", str(tmp_path), "--data", str(workdir / "dataset.csv"))
    assert code == 0
    for name in ("features.csv", "scaler.json", "split.json"):
        assert (tmp_path / name).read_bytes() == (workdir / name).read_bytes()


def test_prepare_missing_column(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("timestamp,consumption_kwh,temperature_c,wind_speed_ms\n2017-01-01T00:00:00Z,1,2,3\n")
    code, _, err = run(capsys, "prepare", "--out", str(tmp_path), "--data", str(path))
    assert code == 2 and "humidity_pct" in err


def test_prepare_missing_file(tmp_path, capsys):
    code, _, err = run(capsys, "prepare", "--out", str(tmp_path), "--data", str(tmp_path / "nope.csv"))
    assert code == 2 and "nope.csv" in err


def test_train_evaluate_forecast(workdir, capsys):
    out = str(workdir)
    code, _, _ = run(capsys, "train", "--out", out, "--model", "gru", *FAST)
    assert code == 0
    doc = json.loads((workdir / "checkpoint_gru.json").read_text())
    assert doc["model_kind"] == "gru" and doc["hyperparameters"]["hidden"] == 4
    assert doc["hyperparameters"]["dropout"] == 0.2
    history = list(csv.reader((workdir / "history_gru.csv").open()))
    assert history[0] == ["epoch", "train_loss", "val_loss"] and len(history) == 3

    assert run(capsys, "evaluate", "--out", out, "--model", "gru")[0] == 0
    target = workdir / "eval_gru"
    for name in ARTIFACT_FILES:
        assert (target / name).exists(), name
    metrics = json.loads((target / "metrics.json").read_text())
    assert {"mae", "rmse", "mape_percent", "pearson_r", "r_squared"} <= set(metrics)
    preds = list(csv.reader((target / "predictions.csv").open()))
    assert preds[0] == ["timestamp", "actual_kwh", "predicted_kwh"]
    assert len(preds) - 1 == len(load_bundle(workdir).windows("test"))

    args = ("forecast", "--out", out, "--model", "gru", "--at", "2015-02-09T23:00:00Z", "--format", "json")
    code, first, _ = run(capsys, *args)
    assert code == 0
    result = json.loads(first)
    assert result["timestamp"] == "2015-02-10T00:00:00Z"
    assert 0 <= result["predicted_kwh"] <= 1000
    assert run(capsys, *args)[1] == first

    code, _, err = run(capsys, "forecast", "--out", out, "--model", "gru", "--at", "2015-01-01T09:00:00Z")
    assert code == 2 and "192" in err


def test_train_lstm_defaults(workdir, tmp_path, capsys):
    ck = tmp_path / "lstm.json"
    code, _, _ = run(capsys, "train", "--out", str(workdir), "--model", "lstm", "--max-epochs", "1",
                     "--checkpoint", str(ck))
    assert code == 0
    hp = json.loads(ck.read_text())["hyperparameters"]
    assert (hp["hidden"], hp["dropout"]) == (50, 0.2)


def test_train_arima(workdir, capsys):
    code, out, _ = run(capsys, "train", "--out", str(workdir), "--model", "arima")
    assert code == 0 and out.startswith("ARIMA(")
    doc = json.loads((workdir / "checkpoint_arima.json").read_text())
    assert set(doc["params"]) >= {"order", "ar", "ma", "intercept"}
    assert run(capsys, "evaluate", "--out", str(workdir), "--model", "arima")[0] == 0
    code, out, _ = run(capsys, "forecast", "--out", str(workdir), "--model", "arima", "--at", "2015-02-09T23:00:00Z")
    assert code == 0 and "predicted" in out


def test_train_grid_table(workdir, tmp_path, capsys):
    space = json.dumps({"hidden": [2, 3], "lr": [1e-3, 3e-4]})
    code, _, _ = run(capsys, "train", "--out", str(workdir), "--model", "fnn", "--grid", "--grid-space", space,
                     "--max-epochs", "1", "--checkpoint", str(tmp_path / "g.json"))
    assert code == 0
    rows = list(csv.reader((workdir / "grid_fnn.csv").open()))
    assert rows[0] == ["hidden", "lr", "val_loss", "best_epoch", "status"]
    assert len(rows) == 5


@pytest.mark.parametrize("kind", ["lstm", "fnn"])
def test_train_default_grid_has_24_rows(workdir, tmp_path, capsys, kind):
    code, _, _ = run(capsys, "train", "--out", str(workdir), "--model", kind, "--grid", "--max-epochs", "1",
                     "--checkpoint", str(tmp_path / "g.json"))
    assert code == 0
    rows = list(csv.reader((workdir / f"grid_{kind}.csv").open()))
    assert len(rows) == 25
    statuses = {r[-1] for r in rows[1:]}
    assert statuses == ({"ok"} if kind == "lstm" else {"ok", "invalid"})


def test_train_divergence_exit_code(workdir, tmp_path, capsys):
    code, _, err = run(capsys, "train", "--out", str(workdir), "--model", "fnn", "--lr", "1e6",
                       "--checkpoint", str(tmp_path / "d.json"), *FAST)
    assert code == 3 and "epoch" in err


def test_evaluate_perfect_oracle(workdir, tmp_path, monkeypatch, capsys):
    ck = tmp_path / "oracle.json"
    assert run(capsys, "train", "--out", str(workdir), "--model", "fnn", "--checkpoint", str(ck), *FAST)[0] == 0
    targets = load_bundle(workdir).windows("test").targets
    monkeypatch.setattr(Forecaster, "predict", lambda self, windows, **kw: targets.copy())
    code, _, _ = run(capsys, "evaluate", "--out", str(workdir), "--model", "fnn", "--checkpoint", str(ck))
    assert code == 0
    m = json.loads((workdir / "eval_fnn" / "metrics.json").read_text())
    assert m["mae"] == m["rmse"] == m["mape_percent"] == 0.0
    assert m["pearson_r"] == pytest.approx(1.0, abs=1e-12) and m["r_squared"] == 1.0


def test_evaluate_incompatible_checkpoint(workdir, tmp_path, capsys):
    ck = tmp_path / "fresh.json"
    assert run(capsys, "train", "--out", str(workdir), "--model", "gru", "--checkpoint", str(ck), *FAST)[0] == 0
    doc = json.loads(ck.read_text())
    doc["scaler"]["digest"] = "0" * 64
    (tmp_path / "stale.json").write_text(json.dumps(doc))
    code, _, err = run(capsys, "evaluate", "--out", str(workdir), "--checkpoint", str(tmp_path / "stale.json"))
    assert code == 2 and "digest" in err


def test_report_json_schema_and_partial(workdir, capsys):
    code, out, _ = run(capsys, "report", "--out", str(workdir), "--epoch-cap", "1", "--lr", "1e6",
                       "--format", "json", *FAST)
    assert code == 3
    doc = json.loads(out)
    jsonschema.validate(doc, report_schema())
    status = {m["model"]: m["status"] for m in doc["models"]}
    assert status == {"arima": "ok", "fnn": "failed", "gru": "failed", "lstm": "failed"}


def test_report_complete(workdir, capsys):
    code, out, _ = run(capsys, "report", "--out", str(workdir), "--epoch-cap", "1", *FAST)
    assert code == 0
    assert "ARIMA(" in out and "LSTM" in out and "epoch cap 1" in out
    doc = json.loads((workdir / "report.json").read_text())
    jsonschema.validate(doc, report_schema())
    assert [m["model"] for m in doc["models"]] == ["arima", "fnn", "gru", "lstm"]
    for kind in ("arima", "fnn", "gru", "lstm"):
        assert (workdir / "report" / kind / "metrics.json").exists()
        assert (workdir / "report" / kind / "checkpoint.json").exists()


# ---------------------------------------------------------------- config handling

def _resolve(argv, environ=None):
    return cli.resolve_config(cli.build_parser().parse_args(argv), environ or {})


def test_config_precedence(tmp_path):
    assert _resolve(["train"])["seed"] == 42
    assert _resolve(["train"], {"CHRONOCAST_SEED": "7"})["seed"] == 7
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"seed": 9, "hidden": 16}))
    cfg = _resolve(["train", "--config", str(cfg_file)], {"CHRONOCAST_SEED": "7"})
    assert (cfg["seed"], cfg["hidden"]) == (9, 16)
    cfg = _resolve(["train", "--config", str(cfg_file), "--seed", "11"], {"CHRONOCAST_SEED": "7"})
    assert (cfg["seed"], cfg["hidden"]) == (11, 16)


def test_every_key_has_a_flag():
    parser = cli.build_parser()
    for key in cli.KEYS:
        flag = "--" + key.replace("_", "-")
        args = [flag] if cli.KEYS[key][1] is bool else [flag, "1"]
        ns = parser.parse_args(["train", *args])
        assert key in vars(ns)


def test_unknown_config_key(tmp_path, capsys):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"sed": 1}))
    code, _, err = run(capsys, "train", "--config", str(cfg_file))
    assert code == 1 and "sed" in err


def test_usage_errors(capsys):
    assert run(capsys, "train", "--bogus")[0] == 1
    assert run(capsys)[0] == 1
    assert run(capsys, "train", "--seed", "abc")[0] == 1
    assert run(capsys, "forecast", "--out", "/nonexistent")[0] == 1


def test_missing_bundle_is_data_error(tmp_path, capsys):
    assert run(capsys, "train", "--out", str(tmp_path))[0] == 2

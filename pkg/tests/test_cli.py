import csv

import numpy as np
import pytest

from yieldseq import cli
from yieldseq.config import ConfigError, RunConfig, default_config_text, load_config
from yieldseq.datapipe import CSV_COLUMNS, ingest_csv
from yieldseq.models import ModelKind, load_model

SMALL = """
[data]
input = {input}
[model]
hidden_neurons = 6
epochs = 2
[grid]
hidden_layers = 1, 2
hidden_neurons = 3, 4
[run]
seed = 3
out = {out}
[synth]
companies = 12
quarters = 14
"""


@pytest.fixture
def small(tmp_path):
    out = tmp_path / "out"
    cfg = tmp_path / "run.ini"
    cfg.write_text(SMALL.format(input=out / "synth.csv", out=out))
    assert cli.main(["synth", "--config", str(cfg)]) == 0
    return cfg, out


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


class TestConfig:
    def test_defaults(self):
        cfg = load_config()
        assert cfg.hp.hidden_neurons == 76 and cfg.hp.epochs == 200 and cfg.split_ratio == 0.8
        assert cfg.top_n == 3000 and cfg.excluded_sectors == ("Financials",)

    def test_default_text_round_trips(self):
        cfg = load_config(text=default_config_text())
        assert cfg.hp == RunConfig().hp
        assert cfg.grid == {"hidden_layers": (1, 2, 3), "hidden_neurons": (40, 50, 60)}
        assert cfg.kinds == (ModelKind.FNN, ModelKind.LSTM, ModelKind.GRU)

    @pytest.mark.parametrize("text", ["[model]\ndropout = 0.5\n", "[extra]\nx = 1\n",
                                      "[grid]\nmomentum = 1, 2\n", "[model]\nepochs = many\n",
                                      "[model]\nlearning_rate = -1\n", "no section\n",
                                      "[data]\nsplit_ratio = 1.5\n"])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            load_config(text=text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / "nope.ini")


def test_synth_writes_valid_csv(small):
    _, out = small
    res = ingest_csv(out / "synth.csv")
    assert len(res.records) == 12 * 14 and res.rejected == 0
    assert (out / "synth.csv").read_text().splitlines()[0] == ",".join(CSV_COLUMNS)


def test_prepare_on_short_fixture(tmp_path):
    src = tmp_path / "fixture.csv"
    rows = [",".join(CSV_COLUMNS)]
    for q in (1, 2, 3):
        rows.append(",".join(["ACME", "Industrials", f"2018-Q{q}", "50", "100"] + ["1"] * 14))
    rows.append(",".join(["ACME", "Industrials", "2018-Q4", "50", "0"] + ["1"] * 14))
    src.write_text("\n".join(rows) + "\n")
    out = tmp_path / "out"
    assert cli.main(["prepare", "--input", str(src), "--out", str(out)]) == 0
    assert read_csv(out / "dataset.csv") == []
    assert read_csv(out / "rejections.csv") == [{"reason": "zero_ev", "count": "1"}]


def test_prepare_writes_split_dataset(small):
    cfg, out = small
    assert cli.main(["prepare", "--config", str(cfg)]) == 0
    rows = read_csv(out / "dataset.csv")
    n = 12 * (14 - 8)
    assert len(rows) == n
    assert sum(r["split"] == "train" for r in rows) == int(np.floor(0.8 * n))
    assert len(rows[0]) == 5 + 8 * 14
    assert len(read_csv(out / "scaler.csv")) == 14


def test_train_then_rank(small, capsys):
    cfg, out = small
    assert cli.main(["train", "--config", str(cfg), "--model", "gru", "--loss-csv"]) == 0
    net = load_model(out / "model_gru.txt")
    assert net.kind is ModelKind.GRU and net.hidden == 6
    assert len(read_csv(out / "train_losses.csv")) == 2
    assert (out / "train_losses.png").exists() and (out / "train.png").exists()
    assert cli.main(["rank", "--config", str(cfg), "--model", "gru"]) == 0
    ranking = read_csv(out / "ranking.csv")
    assert len(ranking) == 12
    preds = [float(r["predicted_ebit_ev"]) for r in ranking]
    assert preds == sorted(preds, reverse=True)
    assert (out / "ranking.png").exists()


def test_compare_three_rows(small):
    cfg, out = small
    assert cli.main(["compare", "--config", str(cfg), "--no-figures"]) == 0
    rows = read_csv(out / "compare.csv")
    assert sorted(r["model"] for r in rows) == ["fnn", "gru", "lstm"]
    assert [r["best"] for r in rows] == ["yes", "", ""]
    assert not (out / "compare.png").exists()
    for kind in ("fnn", "lstm", "gru"):
        assert (out / f"model_{kind}.txt").exists()


def test_gridsearch(small):
    cfg, out = small
    assert cli.main(["gridsearch", "--config", str(cfg), "--model", "fnn"]) == 0
    rows = read_csv(out / "grid.csv")
    assert len(rows) == 4
    scores = [float(r["mape_percent"]) for r in rows]
    assert [r["best"] for r in rows].index("yes") == scores.index(min(scores))
    assert (out / "grid.png").exists()


def test_gradcheck(tmp_path, capsys):
    assert cli.main(["gradcheck", "--out", str(tmp_path), "--cases", "3"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split("\t")[0] for ln in lines] == ["fnn", "lstm", "gru"]
    assert all(float(ln.split("\t")[1]) < 1e-5 for ln in lines)


class TestErrors:
    def one_line(self, capsys):
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1
        return err[0].split("\t")

    def test_missing_input(self, tmp_path, capsys):
        code = cli.main(["train", "--input", str(tmp_path / "none.csv"), "--out", str(tmp_path)])
        assert code == 2
        assert self.one_line(capsys)[:2] == ["error", "input_missing"]

    def test_bad_config(self, tmp_path, capsys):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[model]\nmystery = 1\n")
        assert cli.main(["compare", "--config", str(cfg)]) == 2
        assert self.one_line(capsys)[:2] == ["error", "bad_config"]

    def test_bad_header(self, tmp_path, capsys):
        src = tmp_path / "x.csv"
        src.write_text("a,b,c\n")
        assert cli.main(["prepare", "--input", str(src), "--out", str(tmp_path)]) == 2
        assert self.one_line(capsys)[:2] == ["error", "bad_input"]

    def test_rank_without_model(self, small, capsys):
        cfg, _ = small
        assert cli.main(["rank", "--config", str(cfg)]) == 2
        assert self.one_line(capsys)[:2] == ["error", "artifact_missing"]


def test_outputs_stay_in_out_dir(small, tmp_path):
    cfg, out = small
    before = {p for p in tmp_path.rglob("*")}
    cli.main(["compare", "--config", str(cfg)])
    new = {p for p in tmp_path.rglob("*")} - before
    assert new and all(out in p.parents for p in new)

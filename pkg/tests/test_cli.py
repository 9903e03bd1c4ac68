import csv
import json
import subprocess
import sys

import pytest

from artikit.cli import main


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """synth + prepare + a short train shared across CLI tests."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    prep = root / "prep"
    run = root / "run"
    assert main(["synth", "--out", str(corpus), "--speakers", "3", "--utterances", "2",
                 "--phones", "5", "--scanlines", "20", "--echoes", "32",
                 "--fps", "100", "--seed", "5"]) == 0
    assert main(["prepare", "--corpus", str(corpus), "--out", str(prep),
                 "--cap", "12", "--seed", "1"]) == 0
    assert main(["train", "--train", str(prep / "train.samples"),
                 "--val", str(prep / "val.samples"), "--out", str(run),
                 "--epochs", "2", "--lr", "0.02", "--l2", "0.001",
                 "--minibatch", "32", "--conv1-filters", "4", "--conv2-filters", "6",
                 "--audio-fc-width", "16", "--hidden-width", "24",
                 "--seed", "2"]) == 0
    return {"root": root, "corpus": corpus, "prep": prep, "run": run}


def test_synth_outputs(workspace):
    corpus = workspace["corpus"]
    assert (corpus / "alignments.tsv").exists()
    assert (corpus / "classmap.tsv").exists()
    assert (corpus / "truth.tsv").exists()
    assert (corpus / "config.json").exists()
    assert len(list(corpus.glob("spk*/**/*.wav"))) == 6


def test_prepare_outputs(workspace):
    prep = workspace["prep"]
    for name in ("train.samples", "val.samples", "test.samples", "counts.json"):
        assert (prep / name).exists()
    counts = json.loads((prep / "counts.json").read_text())
    assert counts["speakers"]["test"] == ["spk02"]
    assert sum(counts["val"].values()) == 10


def test_train_outputs(workspace):
    run = workspace["run"]
    assert (run / "model.ckpt").exists()
    lines = (run / "epochs.csv").read_text().strip().splitlines()
    assert lines[0] == "epoch,train_loss,val_accuracy"
    assert len(lines) == 3


def test_score_and_evaluate(workspace):
    root, prep, run = workspace["root"], workspace["prep"], workspace["run"]
    scored = root / "scored"
    assert main(["score", "--checkpoint", str(run / "model.ckpt"),
                 "--samples", str(prep / "test.samples"), "--expected", "velar",
                 "--competing", "alveolar", "--out", str(scored)]) == 0
    rows = list(csv.DictReader(open(scored / "scores.csv")))
    assert rows and all(r["expected"] == "velar" for r in rows)

    evald = root / "eval"
    assert main(["evaluate", "--checkpoint", str(run / "model.ckpt"),
                 "--samples", str(prep / "test.samples"), "--expected", "velar",
                 "--competing", "alveolar", "--truth", str(workspace["corpus"] / "truth.tsv"),
                 "--out", str(evald)]) == 0
    for name in ("classification.json", "classification.txt", "detection.json",
                 "per_speaker.json", "per_speaker.txt", "scores.csv", "summary.json"):
        assert (evald / name).exists(), name
    report = json.loads((evald / "classification.json").read_text())
    assert 0.0 <= report["global_accuracy"] <= 1.0


def test_evaluate_with_ratings_export(workspace, tmp_path):
    # expert side supplied as a clear-case binary export instead of a manifest
    root, prep, run = workspace["root"], workspace["prep"], workspace["run"]
    truth_lines = (workspace["corpus"] / "truth.tsv").read_text().strip().splitlines()
    rows = ["annotator,item,value,occurrence"]
    flip = 0
    for line in truth_lines:
        utt, idx, labeled, rendered = line.split("\t")
        if labeled != "velar":
            continue
        flip += 1
        rows.append(f"slt1,{utt}:{idx},{1 if flip % 3 == 0 else 0},1")
    ratings = tmp_path / "clear.csv"
    ratings.write_text("\n".join(rows) + "\n")
    out = tmp_path / "eval_ratings"
    assert main(["evaluate", "--checkpoint", str(run / "model.ckpt"),
                 "--samples", str(prep / "test.samples"), "--expected", "velar",
                 "--competing", "alveolar", "--ratings", str(ratings),
                 "--out", str(out)]) == 0
    det = json.loads((out / "detection.json").read_text())
    assert set(det["confusion"]) == {"tp", "fp", "fn", "tn"}
    scored = list(csv.DictReader(open(out / "scores.csv")))
    assert scored and all(r["b_expert"] in ("0", "1") for r in scored)


def test_sweep_csv(workspace):
    root, prep, run = workspace["root"], workspace["prep"], workspace["run"]
    out = root / "sweep"
    assert main(["sweep", "--checkpoint", str(run / "model.ckpt"),
                 "--samples", str(prep / "test.samples"), "--expected", "velar",
                 "--competing", "alveolar", "--truth", str(workspace["corpus"] / "truth.tsv"),
                 "--k-min", "-1", "--k-max", "1", "--k-steps", "5",
                 "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().strip().splitlines()
    assert lines[0] == "k,precision,recall,f1,accuracy"
    assert len(lines) == 6


def test_agreement_command(workspace, tmp_path):
    ratings = tmp_path / "ratings.csv"
    ratings.write_text("annotator,item,value,occurrence\n"
                       "a1,i1,1,1\na1,i2,0,1\na1,i1,1,2\n"
                       "a2,i1,1,1\na2,i2,0,1\n")
    out = tmp_path / "agr"
    assert main(["agreement", "--ratings", str(ratings), "--scale", "nominal",
                 "--out", str(out)]) == 0
    report = json.loads((out / "agreement.json").read_text())
    assert report["alpha"]["value"] == 1.0
    assert report["kappa_grid"]["cells"]["a1|a2"]["kappa"] == 1.0


def test_unknown_flag_is_usage_error(workspace):
    prep = workspace["prep"]
    with pytest.raises(SystemExit) as exc:
        main(["train", "--train", str(prep / "train.samples"),
              "--val", str(prep / "val.samples"), "--out", "/tmp/x",
              "--mode", "scratch", "--checkpoint", "whatever"])
    assert exc.value.code == 2


def test_missing_input_is_usage_error(workspace, tmp_path):
    code = main(["prepare", "--corpus", str(tmp_path / "nope"),
                 "--out", str(tmp_path / "out")])
    assert code == 2


def test_refuses_nonempty_out_without_force(workspace, tmp_path):
    out = tmp_path / "occupied"
    out.mkdir()
    (out / "junk.txt").write_text("x")
    code = main(["synth", "--out", str(out), "--seed", "0"])
    assert code == 1
    assert main(["synth", "--out", str(out), "--seed", "0", "--force",
                 "--speakers", "1", "--utterances", "1", "--phones", "2",
                 "--scanlines", "8", "--echoes", "12"]) == 0


def test_invalid_spec_is_failure(tmp_path):
    code = main(["synth", "--out", str(tmp_path / "bad"), "--error-rate", "2.0"])
    assert code == 1


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "artikit.cli", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout and "agreement" in proc.stdout


def test_env_var_default_data_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("ARTIKIT_DATA_DIR", str(tmp_path))
    assert main(["synth", "--out", "env_corpus", "--speakers", "1", "--utterances", "1",
                 "--phones", "2", "--scanlines", "8", "--echoes", "12",
                 "--seed", "0"]) == 0
    assert (tmp_path / "env_corpus" / "classmap.tsv").exists()


def test_reports_byte_identical_across_runs(workspace, tmp_path):
    corpus = workspace["corpus"]
    args_template = ["prepare", "--corpus", str(corpus), "--cap", "10", "--seed", "4"]
    outs = []
    for name in ("r1", "r2"):
        out = tmp_path / name
        assert main(args_template + ["--out", str(out)]) == 0
        outs.append(out)
    for fname in ("train.samples", "val.samples", "test.samples", "counts.json"):
        assert (outs[0] / fname).read_bytes() == (outs[1] / fname).read_bytes(), fname

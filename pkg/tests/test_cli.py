"""End-to-end command-line flows on a small geography graph."""

import contextlib
import io
import os

import pytest

from pathnli.cli import entry

COUNTRIES = [
    ("Italy", "Rome"), ("France", "Paris"), ("Spain", "Madrid"),
    ("Portugal", "Lisbon"), ("Germany", "Berlin"), ("Austria", "Vienna"),
    ("Poland", "Warsaw"), ("Norway", "Oslo"), ("Sweden", "Stockholm"),
    ("Finland", "Helsinki"), ("Greece", "Athens"), ("Ireland", "Dublin"),
]


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = entry([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def ok(argv):
    code, out, err = run(argv)
    assert code == 0, err
    return out


@pytest.fixture(scope="module")
def geo(tmp_path_factory):
    """A capitals-and-borders graph with a trained pipeline around it.

    Questions about every country except Italy form the training set, so
    "what is the capital of [Italy]" exercises a held-out entity.
    """
    d = tmp_path_factory.mktemp("geo")
    kg = d / "kg.txt"
    lines = [f"{c}|has_capital|{k}" for c, k in COUNTRIES]
    n = len(COUNTRIES)
    for i in range(n):
        lines.append(f"{COUNTRIES[i][0]}|borders|{COUNTRIES[(i + 1) % n][0]}")
        lines.append(f"{COUNTRIES[i][0]}|borders|{COUNTRIES[(i + 2) % n][0]}")
    kg.write_text("\n".join(lines) + "\n")
    qa = d / "qa.txt"
    qa.write_text("".join(f"what is the capital of [{c}]\t{k}\n"
                          for c, k in COUNTRIES[1:]))
    emb = d / "emb.txt"
    ok(["train-embeddings", "--kg", kg, "--out", emb, "--dim", "16",
        "--embed-epochs", "40", "--batch", "8"])
    phl = d / "train.phl"
    ok(["gen-phl", "--kg", kg, "--qa", qa, "--out", phl,
        "--n-candidates", "4", "--hop", "1", "--max-len", "2", "--seed", "0"])
    model = d / "model.bin"
    train_flags = ["--kg", kg, "--embeddings", emb, "--phl", phl,
                   "--hidden", "16", "--epochs", "20", "--lr", "0.01",
                   "--batch", "8", "--dropout", "0.1", "--quiet",
                   "--seed", "0"]
    ok(["train", "--out", model] + train_flags)
    stub = d / "stub.bin"
    ok(["train", "--out", stub, "--kg", kg, "--embeddings", emb,
        "--phl", phl, "--hidden", "16", "--epochs", "1", "--lr", "1e-6",
        "--batch", "8", "--quiet", "--seed", "0"])
    return {"dir": d, "kg": kg, "qa": qa, "emb": emb, "phl": phl,
            "model": model, "stub": stub, "train_flags": train_flags}


def test_build_kg_prints_graph_stats(geo):
    out = ok(["build-kg", "--kg", geo["kg"]])
    assert out.strip() == "entities=24 relations=2 triples=36"


def test_gen_phl_reports_drop_accounting(geo):
    out = ok(["gen-phl", "--kg", geo["kg"], "--qa", geo["qa"],
              "--out", geo["dir"] / "again.phl", "--n-candidates", "4",
              "--hop", "1", "--max-len", "2", "--seed", "0"])
    assert "questions: 11 read, 11 kept, 0 dropped" in out
    assert "entail=11" in out


def test_eval_writes_the_report_csv(geo):
    report = geo["dir"] / "report.csv"
    out = ok(["eval", "--kg", geo["kg"], "--embeddings", geo["emb"],
              "--phl", geo["phl"], "--model", geo["model"],
              "--hop", "1", "--max-len", "2", "--report", report,
              "--split", "train"])
    lines = report.read_text().splitlines()
    assert lines[0] == "split,n_candidates,cls_acc,qa_acc,n_questions,n_instances"
    assert lines[1] == "train,4,1.0000,1.0000,11,44"
    assert "train" in out
    hit1 = ok(["eval", "--kg", geo["kg"], "--embeddings", geo["emb"],
               "--phl", geo["phl"], "--model", geo["model"], "--hop", "1",
               "--max-len", "2", "--qa-mode", "hit1"])
    assert "1.0000" in hit1


def test_answer_held_out_question(geo):
    base = ["answer", "--kg", geo["kg"], "--embeddings", geo["emb"],
            "--model", geo["model"], "--hop", "1", "--max-len", "2",
            "--question", "what is the capital of [Italy]"]
    assert ok(base) == "Rome\n"
    explained = ok(base + ["--explain"])
    first, second = explained.splitlines()[:2]
    assert first.startswith("Rome\t0.9")
    assert second.strip() == "Italy has capital Rome"


def test_answer_below_threshold_says_no_answer(geo):
    out = ok(["answer", "--kg", geo["kg"], "--embeddings", geo["emb"],
              "--model", geo["stub"], "--hop", "1", "--max-len", "2",
              "--threshold", "0.9",
              "--question", "what is the capital of [Italy]"])
    assert out == "no answer\n"


def test_answer_with_no_linkable_entity_is_a_data_error(geo):
    code, out, err = run(["answer", "--kg", geo["kg"], "--embeddings",
                          geo["emb"], "--model", geo["model"],
                          "--question", "what is the capital of nowhere"])
    assert code == 3
    assert "no entities linked" in err


def test_exit_codes_map_the_error_hierarchy(geo):
    absent = geo["dir"] / "absent.txt"
    # 2: invalid value, and a required input missing from config and flags
    assert run(["train", "--kg", geo["kg"], "--embeddings", geo["emb"],
                "--phl", geo["phl"], "--out", geo["dir"] / "x.bin",
                "--dropout", "1.5"])[0] == 2
    code, _, err = run(["build-kg"])
    assert code == 2 and "--kg" in err
    # 3: unreadable and malformed data files
    assert run(["build-kg", "--kg", absent])[0] == 3
    bad = geo["dir"] / "bad.txt"
    bad.write_text("just one field\n")
    assert run(["build-kg", "--kg", bad])[0] == 3
    # 4: unreadable and corrupt model checkpoints
    q = ["--question", "what is the capital of [Italy]"]
    assert run(["answer", "--kg", geo["kg"], "--embeddings", geo["emb"],
                "--model", absent] + q)[0] == 4
    junk = geo["dir"] / "junk.bin"
    junk.write_bytes(b"JUNKJUNK")
    assert run(["answer", "--kg", geo["kg"], "--embeddings", geo["emb"],
                "--model", junk] + q)[0] == 4


def test_config_file_supplies_paths_and_flags_win(geo):
    cfg = geo["dir"] / "run.cfg"
    cfg.write_text(f"kg={geo['kg']}\nembeddings={geo['emb']}\n")
    out = ok(["build-kg", "--config", cfg])
    assert "entities=24" in out
    # The explicit flag overrides the config file's path.
    code, _, err = run(["build-kg", "--config", cfg,
                        "--kg", geo["dir"] / "absent.txt"])
    assert code == 3 and "absent.txt" in err


def test_training_is_byte_identical_across_runs(geo):
    again = geo["dir"] / "model2.bin"
    ok(["train", "--out", again] + geo["train_flags"])
    assert again.read_bytes() == geo["model"].read_bytes()


def test_ablation_command_writes_requested_sizes(geo):
    report = geo["dir"] / "ablate.csv"
    ok(["ablate", "--kg", geo["kg"], "--embeddings", geo["emb"],
        "--qa-train", geo["qa"], "--qa-eval", geo["qa"],
        "--sizes", "2,3", "--hop", "1", "--max-len", "2",
        "--hidden", "8", "--epochs", "2", "--report", report])
    lines = report.read_text().splitlines()
    assert len(lines) == 3
    assert lines[1].startswith("n=2,2,")
    assert lines[2].startswith("n=3,3,")


def test_adapt_command_reports_both_starts(geo):
    anchors = geo["dir"] / "anchors.tsv"
    names = [n for pair in COUNTRIES for n in pair]
    anchors.write_text("".join(f"{n}\t{n}\n" for n in names))
    out = ok(["adapt", "--src-triples", geo["kg"], "--src-embeddings",
              geo["emb"], "--src-model", geo["model"], "--tgt-triples",
              geo["kg"], "--tgt-embeddings", geo["emb"], "--tgt-qa-train",
              geo["qa"], "--tgt-qa-eval", geo["qa"], "--anchors", anchors,
              "--hop", "1", "--max-len", "2", "--epochs", "2"])
    assert "anchor map rmse" in out
    assert "warm start" in out and "cold start" in out


def test_synthetic_fixture_generation(tmp_path):
    out = ok(["fixtures", "gen-synthetic", "--out-dir", tmp_path / "synth",
              "--hops", "2", "--questions-per-hop", "20"])
    assert "entities=" in out
    assert (tmp_path / "synth" / "kg.txt").exists()
    assert (tmp_path / "synth" / "qa_2hop.txt").exists()
    assert run(["fixtures", "gen-synthetic", "--out-dir", tmp_path / "s2",
                "--hops", "x"])[0] == 2

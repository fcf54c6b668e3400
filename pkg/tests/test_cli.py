import json
import subprocess
import sys

import numpy as np

from schmidt_compressor import cli
from conftest import ghz, random_state


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_cost(capsys):
    code, out, _ = run(capsys, "cost", "3", "3", "3")
    assert code == 0
    report = json.loads(out)
    assert report["total_ceil"] == 43 and report["case"] == "uni-uni"


def test_cost_invalid(capsys):
    code, _, err = run(capsys, "cost", "2", "3", "1")
    assert code == 1 and "n_b" in err


def test_prep_verify_formats(tmp_path, capsys, rng):
    psi = random_state(rng, 4)
    np.save(tmp_path / "s.npy", psi)
    (tmp_path / "s.json").write_text(json.dumps([[z.real, z.imag] for z in psi]))
    (tmp_path / "s.txt").write_text("\n".join(str(z) for z in psi))
    for name in ("s.npy", "s.json", "s.txt"):
        code, out, _ = run(capsys, "prep-verify", str(tmp_path / name))
        assert code == 0
        report = json.loads(out)
        assert report["fidelity"] > 1 - 1e-10
        assert report["rank"] == 4


def test_prep_verify_finds_ghz_split():
    report = cli.prep_verify(ghz(4), 2)
    assert report["rank"] == 2 and report["measure"] == 1
    assert report["cost"]["m"] == 1


def test_prep_verify_errors(tmp_path, capsys):
    code, _, err = run(capsys, "prep-verify", str(tmp_path / "missing.npy"))
    assert code == 2
    np.save(tmp_path / "bad.npy", np.ones(4))
    code, _, err = run(capsys, "prep-verify", str(tmp_path / "bad.npy"))
    assert code == 1 and "normalized" in err


def test_missing_dataset(tmp_path, capsys):
    code, _, err = run(capsys, "fidelity-bench", "--dataset", str(tmp_path / "none.csv"))
    assert code == 2 and "--dataset" in err


def test_fidelity_bench_outputs_are_reproducible(tmp_path, capsys):
    args = ["fidelity-bench", "--labels", "0,9", "--seeds", "2"]
    names = ("fidelity.csv", "fidelity.json", "config.json")
    code, first, _ = run(capsys, *args, "--out", str(tmp_path / "a"))
    assert code == 0
    before = [(tmp_path / "a" / name).read_bytes() for name in names]
    run(capsys, *args, "--out", str(tmp_path / "a"))
    assert before == [(tmp_path / "a" / name).read_bytes() for name in names]
    assert first.splitlines()[0] == "Label,SQC Avg,SQC Std,Opt1 Avg,Opt1 Std,Opt2 Avg,Opt2 Std"
    config = json.loads((tmp_path / "a" / "config.json").read_text())
    assert config["seeds"] == 2 and config["labels"] == [0, 9]


def test_fidelity_bench_policy_and_shots(capsys):
    code, out, _ = run(capsys, "fidelity-bench", "--labels", "3", "--seeds", "1",
                       "--policy", "opt1", "--shots", "2000")
    assert code == 0
    assert out.splitlines()[0] == "Label,Opt1 Avg,Opt1 Std"


def test_workers_give_same_table(capsys):
    args = ["fidelity-bench", "--labels", "0,1", "--seeds", "1"]
    _, serial, _ = run(capsys, *args)
    _, parallel, _ = run(capsys, *args, "--workers", "2")
    assert serial == parallel


def test_classify_and_qae_small(tmp_path, capsys):
    code, out, _ = run(capsys, "classify", "--labels", "0", "--repetitions", "1", "--iterations", "20",
                       "--out", str(tmp_path))
    assert code == 0 and out.startswith("Label,Avg,Std\n0,")
    assert (tmp_path / "classify.json").exists()
    code, out, _ = run(capsys, "qae-bench", "--labels", "0", "--qae-budget", "10")
    assert code == 0 and out.startswith("Label,QAE Avg,QAE Std,SQC Avg,SQC Std\n0,")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "schmidt_compressor.cli", "cost", "3", "3", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["case"] == "iso-iso"

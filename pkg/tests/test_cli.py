import json

import pytest

from dfsdd.cli import main, preset, split_run_config
from dfsdd.errors import ValidationError


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sequence_optimal(capsys):
    code, out, _ = run(capsys, "sequence", "--n", "4", "--cycle", "optimal")
    assert code == 0
    assert "steps parallel=4 two_qubit=8" in out


def test_sequence_cyclic(capsys):
    code, out, _ = run(capsys, "sequence", "--n", "4", "--cycle", "cyclic")
    assert code == 0
    assert "controller=9" in out


def test_sequence_odd_notes_ancilla(capsys):
    code, out, _ = run(capsys, "sequence", "--n", "5")
    assert code == 0
    assert "ancilla site 6" in out and "parallel=6" in out


def test_sequence_dump_timeline(capsys):
    code, out, _ = run(capsys, "sequence", "--n", "2", "--mode", "finite", "--tau", "0.25", "--dump-timeline")
    assert code == 0
    assert "0 control 1-2" in out and out.rstrip().endswith("0.5 boundary")


def test_sequence_bad_config_exits_2(capsys):
    code, _, err = run(capsys, "sequence", "--n", "6", "--cycle", "original4")
    assert code == 2 and "error" in err


def test_verify_all_pass(capsys):
    code, out, _ = run(capsys, "verify", "--n", "4", "--seed", "7")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines and all(line.startswith("PASS ") for line in lines)
    assert len(lines[0].split()) == 4


def test_verify_odd(capsys):
    code, out, _ = run(capsys, "verify", "--n", "3", "--suite", "collectivity")
    assert code == 0 and "PASS collectivity_n3" in out


def test_verify_bch(capsys):
    code, out, _ = run(capsys, "verify", "--n", "2", "--suite", "bch")
    assert code == 0
    ratios = [float(line.split()[2]) for line in out.splitlines()]
    assert all(7.2 <= r <= 8.8 for r in ratios)


def test_dfs(capsys):
    code, out, _ = run(capsys, "dfs", "--n", "2")
    assert code == 0 and "dimension=1" in out


def test_simulate_csv_is_deterministic(tmp_path, capsys):
    args = ["simulate", "--set", "t_final=0.5", "--set", "samples=5", "--set", "tau=0.25"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--output", str(a)]) == 0
    assert main(args + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("t,fidelity\n")
    assert "final_fidelity" in capsys.readouterr().out


def test_simulate_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n_qubits": 2, "cycle": "none", "t_final": 0.5, "samples": 4,
                               "baths": [{"axis": "z", "strength": 0.0, "site": 1}]}))
    out = tmp_path / "trace.csv"
    code = main(["simulate", "--config", str(cfg), "--output", str(out), "--dump-timeline"])
    assert code == 0
    rows = out.read_text().splitlines()[1:]
    assert all(float(r.split(",")[1]) == 1.0 for r in rows)
    assert out.with_suffix(".timeline").exists()


def test_simulate_unknown_key_exits_2(capsys):
    code, _, err = run(capsys, "simulate", "--set", "colour=blue")
    assert code == 2 and "colour" in err


def test_simulate_bad_horizon_exits_2(capsys):
    code, _, _ = run(capsys, "simulate", "--set", "t_final=0.3")
    assert code == 2


def test_unknown_preset_rejected():
    with pytest.raises(ValidationError):
        preset("fig9")
    assert main(["simulate", "--preset", "fig9"]) == 2


def test_presets_are_valid_configs():
    for name in ("fig3a", "fig4", "fig5", "table1"):
        for entry in preset(name):
            split_run_config(entry)


def test_table1_small(capsys):
    code, out, _ = run(capsys, "table1", "--set", "taus=[0.05]", "--set", "n_qubits=2", "--set", 'initial_state="psi1"')
    assert "tau periodic concatenated" in out
    assert "floor_tau0.05" in out
    assert code in (0, 1)

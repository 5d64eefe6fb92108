"""Tests for the command-line front end."""

import json

import numpy as np
import pytest

from qchancap.cli import (
    RunReport,
    emit_csv,
    fig1_rows,
    load_ensemble,
    load_povm,
    main,
)
from qchancap.core import binary_entropy, channel_ensemble, DensityMatrix
from qchancap.info import accessible_information_given, holevo_chi, quantum_mutual_information


def run_text(capsys, argv):
    code = main(argv)
    out = capsys.readouterr().out
    fields = {}
    for line in out.strip().splitlines():
        key, _, value = line.partition(": ")
        fields[key] = value
    return code, fields


def test_chi_trine(capsys):
    code, fields = run_text(capsys, ["chi", "--channel", "trine.qch"])
    assert code == 0
    assert float(fields["value_bits"]) == pytest.approx(1.0, abs=1e-9)


def test_accinfo_roundtrip(capsys):
    code, fields = run_text(capsys, ["accinfo", "--channel", "trine.qch", "--seed", "5"])
    assert code == 0
    value = float(fields["value_bits"])
    assert value == pytest.approx(np.log2(3) - 1, abs=1e-4)
    # the dumped ensemble and POVM reproduce the reported value
    ens = load_ensemble(json.loads(fields["ensemble"]), 2)
    povm = load_povm(json.loads(fields["povm"]))
    from qchancap.channels import parse_channel

    out_ens = channel_ensemble(parse_channel("trine.qch").channel, ens)
    assert accessible_information_given(out_ens, povm) == pytest.approx(value, abs=1e-7)


def test_c1inf_roundtrip(capsys):
    code, fields = run_text(capsys, ["c1inf", "--channel", "bsc_0.11.qch", "--seed", "1"])
    assert code == 0
    value = float(fields["value_bits"])
    assert value == pytest.approx(1 - binary_entropy(0.11), abs=1e-5)
    ens = load_ensemble(json.loads(fields["ensemble"]), 2)
    from qchancap.channels import parse_channel

    out_ens = channel_ensemble(parse_channel("bsc_0.11.qch").channel, ens)
    assert holevo_chi(out_ens) == pytest.approx(value, abs=1e-7)


def test_cea_roundtrip(capsys):
    code, fields = run_text(capsys, ["cea", "--channel", "identity.qch"])
    assert code == 0
    value = float(fields["value_bits"])
    assert value == pytest.approx(2.0, abs=1e-6)
    arr = np.asarray(json.loads(fields["rho"]), dtype=float)
    rho = DensityMatrix(arr[..., 0] + 1j * arr[..., 1])
    from qchancap.channels import parse_channel

    ch = parse_channel("identity.qch").channel
    assert quantum_mutual_information(ch, rho) == pytest.approx(value, abs=1e-7)


def test_c11_roundtrip(capsys):
    code, fields = run_text(
        capsys, ["c11", "--channel", "two_state_pi3.qch", "--restarts", "2", "--seed", "4"]
    )
    assert code == 0
    value = float(fields["value_bits"])
    ens = load_ensemble(json.loads(fields["ensemble"]), 2)
    povm = load_povm(json.loads(fields["povm"]))
    from qchancap.channels import parse_channel

    out_ens = channel_ensemble(parse_channel("two_state_pi3.qch").channel, ens)
    assert accessible_information_given(out_ens, povm) == pytest.approx(value, abs=1e-7)
    assert value == pytest.approx(1 - binary_entropy(0.5 - np.sin(np.pi / 3) / 2), abs=5e-4)


def test_coherent_report(capsys):
    code, fields = run_text(capsys, ["coherent", "--channel", "dephasing_0.25.qch"])
    assert code == 0
    assert float(fields["value_bits"]) == pytest.approx(0.188722, abs=1e-4)


def test_arimoto_blahut_cli(capsys):
    code, fields = run_text(
        capsys, ["arimoto-blahut", "--channel", "bsc_0.11_classical.qch", "--tol", "1e-11"]
    )
    assert code == 0
    assert float(fields["value_bits"]) == pytest.approx(1 - binary_entropy(0.11), abs=1e-9)


def test_arimoto_blahut_rejects_quantum_file(capsys):
    assert main(["arimoto-blahut", "--channel", "identity.qch"]) == 1
    assert "transition" in capsys.readouterr().err


def test_missing_channel_is_error(capsys):
    assert main(["chi", "--channel", "nowhere.qch"]) == 1
    assert "not found" in capsys.readouterr().err


def test_unknown_flag_maps_to_error_code(capsys):
    assert main(["chi", "--channel", "trine.qch", "--bogus"]) == 1


def test_chi_requires_signals(capsys):
    assert main(["chi", "--channel", "identity.qch"]) == 1
    assert "signal set" in capsys.readouterr().err


def test_oracle_subcommand(capsys):
    code, fields = run_text(
        capsys,
        ["oracle", "--channel", "trine.qch", "--name", "simplex-chi", "--step", "0.01"],
    )
    assert code == 0
    assert float(fields["value_bits"]) == pytest.approx(1.0, abs=1e-3)


def test_limited_ea_cli(capsys):
    code, fields = run_text(
        capsys, ["limited-ea", "--channel", "identity.qch", "--B", "0.5"]
    )
    assert code == 0
    value = float(fields["value_bits"])
    assert 1.0 - 1e-6 <= value <= 2.0 + 1e-6
    assert fields["experimental"] == "true"
    ens = load_ensemble(json.loads(fields["ensemble"]), 2)
    from qchancap.channels import parse_channel
    from qchancap.info import limited_ea_objective

    got, _ = limited_ea_objective(parse_channel("identity.qch").channel, ens)
    assert got == pytest.approx(value, abs=1e-7)


def test_round_limit_exit_code(capsys):
    # a one-round cap on a channel that needs several rounds reports status
    # round-limit and exits 2
    code, fields = run_text(
        capsys, ["c1inf", "--channel", "amplitude_damping_0.3.qch", "--max-rounds", "1"]
    )
    assert fields["status"] == "round-limit"
    assert code == 2


def test_emit_csv_empty_rows(tmp_path):
    path = tmp_path / "empty.csv"
    with open(path, "w", newline="") as fh:
        emit_csv(("a", "b"), [], fh)
    assert path.read_bytes() == b"a,b\r\n"


def test_emit_csv_float_format(tmp_path):
    path = tmp_path / "row.csv"
    with open(path, "w", newline="") as fh:
        emit_csv(("x",), [(np.pi,)], fh)
    assert path.read_bytes() == b"x\r\n3.14159265359\r\n"


def test_sweep_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sweep", "--curve", "fig1", "--steps", "5", "--seed", "3", "--out", str(a)]) == 0
    assert main(["sweep", "--curve", "fig1", "--steps", "5", "--seed", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_fig1_endpoints():
    rows = fig1_rows(5)
    theta0, i0, h0 = rows[0]
    assert theta0 == 0.0 and i0 == pytest.approx(0.0, abs=1e-9) and h0 == pytest.approx(0.0, abs=1e-12)
    theta_end, i_end, h_end = rows[-1]
    assert theta_end == pytest.approx(np.pi / 2)
    assert i_end == pytest.approx(1.0, abs=1e-6)
    assert h_end == pytest.approx(1.0, abs=1e-12)


def test_report_csv_row(tmp_path, capsys):
    code = main(["cea", "--channel", "identity.qch", "--format", "csv",
                 "--out", str(tmp_path / "r.csv")])
    assert code == 0
    text = (tmp_path / "r.csv").read_bytes().decode()
    lines = text.strip().split("\r\n")
    assert lines[0].startswith("capacity,value_bits,status")
    assert lines[1].startswith("cea,2,converged")


def test_run_report_text_fields():
    rep = RunReport(capacity="demo", value_bits=0.5, status="converged", seed=3)
    text = rep.to_text()
    assert "capacity: demo" in text
    assert "value_bits: 0.5" in text
    assert "version:" in text

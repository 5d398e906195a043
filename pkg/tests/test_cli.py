import subprocess
import sys

from nemsent.cli import EXIT_PHYSICALITY, main
from nemsent.io import read_csv

CONFIG = """\
model.n_qubits = 1
model.nu = 10
model.v_gate = 1
model.e_j = 10
dissipation.kappa = 0.1
numerics.n_max = 6
numerics.t_max = 2
numerics.n_points = 41
initial.qubits = e
initial.resonator = vacuum
output.csv = {out}/run.csv
output.svg = {out}/run.svg
"""


def write_config(tmp_path, **extra):
    text = CONFIG.format(out=tmp_path) + "".join(f"{k} = {v}\n" for k, v in extra.items())
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return path


def test_run_command(tmp_path, capsys):
    assert main(["run", "--config", str(write_config(tmp_path))]) == 0
    assert (tmp_path / "run.csv").exists() and (tmp_path / "run.svg").exists()
    assert "max_trace_dev" in capsys.readouterr().out


def test_sweep_command(tmp_path):
    cfg = write_config(tmp_path)
    assert main(["sweep", "--config", str(cfg), "--param", "dissipation.kappa", "--values", "0.01,0.1,1.0"]) == 0
    names = sorted(p.name for p in tmp_path.glob("run_kappa*.csv"))
    assert names == ["run_kappa0.01.csv", "run_kappa0.1.csv", "run_kappa1.csv"]
    assert read_csv(tmp_path / "run_kappa1.csv").footer[6] == "config dissipation.kappa = 1.0"
    assert (tmp_path / "run_kappa_sweep.svg").exists()


def test_oracle_command(tmp_path, capsys):
    assert main(["oracle", "--compare", str(write_config(tmp_path))]) == 0
    out = capsys.readouterr().out
    dev = float(out.split("=")[1].split()[0])
    assert dev < 1e-6


def test_physicality_abort_exit_code(tmp_path, capsys):
    cfg = write_config(tmp_path, **{"numerics.atol": "1e-1", "dissipation.kappa": "3"})
    code = main(["run", "--config", str(cfg)])
    assert code == EXIT_PHYSICALITY
    assert "physicality abort" in capsys.readouterr().err


def test_bad_config_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.cfg"
    path.write_text("model.nope = 1\n")
    assert main(["run", "--config", str(path)]) == 1
    assert "unknown key" in capsys.readouterr().err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "nemsent", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "preset" in out.stdout

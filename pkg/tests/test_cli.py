# External Libraries
import pytest

# Local Libraries
from robustw1.cli import main
from robustw1.errors import IO_EXIT_CODE
from robustw1.models.config import ExperimentConfig
from robustw1.runner import ExperimentRunner
from robustw1.utils.io_utils import read_measure

STUDY = """\
mode: convergence
payoff: clamp
atoms: [0.5, -0.7]
weights: [0.5, 0.5]
box: [[-2, 2]]
theta: 0.3
levels: [2, 8]
reference_level: 11
"""


def run_cli(tmp_path, text: str, *flags: str) -> int:
    path = tmp_path / "config.yaml"
    path.write_text(text)
    return main(["--config", str(path), "--out", str(tmp_path / "out"), *flags])


def record_value(tmp_path) -> float:
    record = (tmp_path / "out" / "solution.txt").read_text()
    fields = dict(
        line.split("=", 1) for line in record.splitlines() if "=" in line and " " not in line
    )
    return float(fields["value"])


def test_w1_prints_the_distance(tmp_path, capsys):
    status = run_cli(tmp_path, "mode: w1\natoms: [0.0]\ntarget_atoms: [5.0]\n")
    assert status == 0
    assert capsys.readouterr().out == "5.0\n"
    assert (tmp_path / "out" / "w1.txt").read_text() == "5.0\n"


def test_w1_dumps_the_coupling(tmp_path):
    text = "mode: w1\natoms: [[0, 0], [1, 0]]\ntarget_atoms: [[0, 1]]\n"
    assert run_cli(tmp_path, text, "--dump-coupling") == 0
    rows = (tmp_path / "out" / "coupling.csv").read_text().splitlines()
    assert rows[0] == "i,j,flow,cost"
    assert len(rows) == 3


def test_solve_writes_a_solution_record(tmp_path, capsys):
    text = "mode: solve\npayoff: clamp\natoms: [0.0]\nbox: [[-1, 1]]\nlevel: 2\ntheta: 0.3\n"
    assert run_cli(tmp_path, text) == 0
    assert record_value(tmp_path) == pytest.approx(-0.3, abs=1e-9)
    assert capsys.readouterr().out.startswith("payoff=clamp\n")


def test_solve_maximum(tmp_path):
    text = (
        "mode: solve\natoms: [0.0]\nsupport_atoms: [-1, 1]\ntheta: 0.3\n"
        "maximize: true\n"
    )
    assert run_cli(tmp_path, text) == 0
    assert record_value(tmp_path) == pytest.approx(0.3, abs=1e-9)


def test_center_file_round_trips(tmp_path):
    text = (
        "mode: perturbation\nrandom_atoms: 6\nbox: [[-1, 1]]\nlevel: 4\n"
        "thetas: [0.1, 0.2]\nseed: 11\n"
    )
    assert run_cli(tmp_path, text) == 0
    config = ExperimentConfig.from_yaml(tmp_path / "config.yaml")
    center = ExperimentRunner(config).center()
    assert read_measure(tmp_path / "out" / "center.txt") == center
    table = (tmp_path / "out" / "perturbation.csv").read_text().splitlines()
    assert table[0] == "theta,value"
    assert len(table) == 3


def test_missing_theta_exits_with_config_status(tmp_path, capsys):
    status = run_cli(tmp_path, "mode: solve\natoms: [0.0]\nsupport_atoms: [-1, 1]\n")
    assert status == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) >= 1
    assert "theta" in err[-1]


def test_input_errors_exit_with_config_status(tmp_path, capsys):
    text = "mode: w1\natoms: [0.0]\nweights: [0.9]\ntarget_atoms: [1.0]\n"
    assert run_cli(tmp_path, text) == 2
    assert "MassNotOne" in capsys.readouterr().err


def test_missing_measure_file_is_an_io_error(tmp_path):
    text = "mode: w1\nmeasure_file: nowhere.txt\ntarget_atoms: [1.0]\n"
    assert run_cli(tmp_path, text) == IO_EXIT_CODE


def test_missing_config_is_an_io_error(tmp_path):
    assert main(["--config", str(tmp_path / "absent.yaml")]) == IO_EXIT_CODE


def test_study_outputs_are_deterministic(tmp_path):
    first, second = tmp_path / "first", tmp_path / "second"
    first.mkdir()
    second.mkdir()
    assert run_cli(first, STUDY, "--seed", "5") == 0
    assert run_cli(second, STUDY, "--seed", "5", "--threads", "2") == 0
    for name in ("convergence.csv", "plotdata.csv"):
        assert (first / "out" / name).read_bytes() == (second / "out" / name).read_bytes()
    header = (first / "out" / "convergence.csv").read_text().splitlines()[0]
    assert header == "level,mesh,center_error,value,gap_to_reference,solver_gap"
    assert (first / "out" / "study.json").exists()


@pytest.mark.parametrize(
    "text, error",
    [
        (
            "mode: w1\natoms: [[0, 0], [1]]\ntarget_atoms: [[0, 1]]\n",
            "DimensionMismatch",
        ),
        (
            "mode: solve\natoms: [[0, 0]]\nsupport_atoms: [[0, 0], [1]]\n"
            "theta: 0.1\npayoff_params: {a: [1, 0]}\n",
            "DimensionMismatch",
        ),
        (
            "mode: solve\npayoff: bump\npayoff_params: {height: .nan}\n"
            "atoms: [0.0]\nsupport_atoms: [-1, 1]\ntheta: 0.1\n",
            "InstanceError",
        ),
    ],
)
def test_malformed_values_exit_with_config_status(tmp_path, capsys, text, error):
    assert run_cli(tmp_path, text) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert error in err[-1]
    assert not any("Traceback" in line for line in err)

# External Libraries
import numpy as np
import pytest

# Python Standard Libraries
import json

# Local Libraries
from robustw1.core.dro import make_instance, solve_primal
from robustw1.core.measures import dirac, make_measure, random_measure
from robustw1.core.payoffs import clamp
from robustw1.errors import MeasureFormatError
from robustw1.models.config import ExperimentConfig
from robustw1.models.measures import Box
from robustw1.models.results import (
    ConvergenceRow,
    ConvergenceStudy,
    PerturbationRow,
)
from robustw1.utils.io_utils import (
    convergence_csv,
    convergence_plotdata,
    coupling_to_csv,
    format_float,
    json_envelope,
    measure_to_text,
    parse_measure_text,
    perturbation_csv,
    perturbation_plotdata,
    read_measure,
    solution_record,
    write_measure,
    write_text,
)


def test_format_float_uses_17_digits():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(5.0) == "5"
    assert float(format_float(1 / 3)) == 1 / 3


def test_measure_text_layout():
    mu = make_measure([[3.0, 4.0], [0.0, 0.0]], [0.25, 0.75])
    assert measure_to_text(mu) == "dim=2 n=2\n0.75 0 0\n0.25 3 4\n"


def test_measure_file_round_trip(tmp_path, rng):
    mu = random_measure(rng, 9, Box(lower=(-1.0, 0.0), upper=(1.0, 5.0)))
    path = tmp_path / "mu.txt"
    write_measure(mu, path)
    parsed = read_measure(path)
    assert np.array_equal(parsed.atoms, mu.atoms)
    assert np.allclose(parsed.weights, mu.weights, rtol=0, atol=1e-15)


def test_parse_measure_ignores_comments():
    text = "# two atoms\n\ndim=1 n=2\n0.5 1.0\n# mid\n0.5 -1.0\n"
    mu = parse_measure_text(text)
    assert mu.atoms[:, 0].tolist() == [-1.0, 1.0]


@pytest.mark.parametrize(
    "text, line",
    [
        ("dims=1 n=1\n1.0 0.0\n", 1),
        ("dim=1 n=2\n1.0 0.0\n", 1),
        ("dim=2 n=1\n1.0 0.0\n", 2),
        ("dim=1 n=1\n1.0 zero\n", 2),
        ("\n\ndim=1 n=1\n1.0 0.0 0.0\n", 4),
    ],
)
def test_parse_measure_reports_the_line(text, line):
    with pytest.raises(MeasureFormatError) as info:
        parse_measure_text(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_parse_measure_rejects_empty_file():
    with pytest.raises(MeasureFormatError):
        parse_measure_text("# nothing\n")


def test_solution_record_and_coupling_csv():
    instance = make_instance(clamp(), dirac([0.0]), 0.3, [[-1.0], [1.0]])
    solution = solve_primal(instance)
    record = solution_record(solution)
    lines = record.splitlines()
    assert lines[0] == "payoff=clamp"
    assert lines[1] == "theta=0.29999999999999999"
    assert float(lines[2].split("=")[1]) == pytest.approx(-0.3, abs=1e-9)
    assert lines[7] == "minimizer:"
    assert parse_measure_text("\n".join(lines[8:])) == solution.minimizer

    csv_text = coupling_to_csv(solution.coupling)
    header, *rows = csv_text.splitlines()
    assert header == "i,j,flow,cost"
    assert len(rows) == len(solution.coupling.nonzero())


def test_tables_have_fixed_headers():
    rows = [
        ConvergenceRow(
            level=2,
            mesh=1.0,
            center_error=0.1,
            value=-0.3,
            gap_to_reference=0.1,
            solver_gap=0.0,
        )
    ]
    assert convergence_csv(rows) == (
        "level,mesh,center_error,value,gap_to_reference,solver_gap\n"
        "2,1,0.10000000000000001,-0.29999999999999999,0.10000000000000001,0\n"
    )
    assert perturbation_csv([PerturbationRow(theta=0.5, value=-0.5)]) == (
        "theta,value\n0.5,-0.5\n"
    )


def test_plotdata():
    study = ConvergenceStudy(
        rows=[
            ConvergenceRow(
                level=1,
                mesh=2.0,
                center_error=0.5,
                value=0.0,
                gap_to_reference=0.25,
                solver_gap=0.0,
            )
        ],
        reference_level=4,
        reference_value=-0.25,
        budgets=[1.5],
    )
    assert convergence_plotdata(study).splitlines() == [
        "level,mesh,gap_to_reference,budget,reference_value",
        "1,2,0.25,1.5,-0.25",
    ]
    scan = perturbation_plotdata([PerturbationRow(theta=0.5, value=-0.5)], 0.0, 1.0)
    assert scan.splitlines() == ["theta,value,lower_bound,nominal", "0.5,-0.5,-0.5,0"]


def test_json_envelope_and_write_text(tmp_path):
    config = ExperimentConfig(mode="w1", atoms=[0.0], target_atoms=[5.0])
    path = write_text(tmp_path / "nested" / "run.json", json_envelope(config, {"w1": 5.0}))
    document = json.loads(path.read_text())
    assert document["config"]["mode"] == "w1"
    assert document["results"] == {"w1": 5.0}

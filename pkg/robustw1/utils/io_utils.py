"""
This module contains the text codecs: the measure format, coupling CSV, solution records, experiment CSV tables and the JSON envelope. All floats are written with 17 significant digits so output is byte-reproducible.
"""

# External Libraries
from pydantic import BaseModel

# Python Standard Libraries
import csv
import io
import json
from pathlib import Path
from typing import Any, Iterable

# Local Libraries
from robustw1.core.measures import make_measure
from robustw1.errors import MeasureFormatError
from robustw1.models.measures import DiscreteMeasure
from robustw1.models.results import (
    ConvergenceRow,
    ConvergenceStudy,
    PerturbationRow,
    Solution,
    TransportPlan,
)

CONVERGENCE_HEADER = [
    "level",
    "mesh",
    "center_error",
    "value",
    "gap_to_reference",
    "solver_gap",
]
PERTURBATION_HEADER = ["theta", "value"]
COUPLING_HEADER = ["i", "j", "flow", "cost"]


def format_float(x: float) -> str:
    """
    Format a float with 17 significant digits.

    Args:
        x (float): The value.

    Returns:
        str: The formatted value.
    """
    return f"{float(x):.17g}"


def measure_to_text(measure: DiscreteMeasure) -> str:
    """
    Serialize a measure: a `dim=<d> n=<count>` header, then one `w x1 ... xd` row per atom.

    Args:
        measure (DiscreteMeasure): The measure.

    Returns:
        str: The text form.
    """
    lines = [f"dim={measure.dim} n={measure.size}"]
    for w, atom in zip(measure.weights, measure.atoms):
        lines.append(" ".join(format_float(v) for v in (w, *atom)))
    return "\n".join(lines) + "\n"


def _parse_header(line: str, lineno: int) -> tuple[int, int]:
    fields = dict(
        part.split("=", 1) for part in line.split() if "=" in part
    )
    try:
        dim, count = int(fields["dim"]), int(fields["n"])
    except (KeyError, ValueError):
        raise MeasureFormatError(
            f"expected header 'dim=<d> n=<count>', got '{line}'", line=lineno
        )
    if dim < 1 or count < 1:
        raise MeasureFormatError("dim and n must be positive", line=lineno)
    return dim, count


def parse_measure_text(text: str) -> DiscreteMeasure:
    """
    Parse the measure text format. Blank lines and lines starting with '#' are ignored.

    Args:
        text (str): The text form.

    Returns:
        DiscreteMeasure: The canonical measure.
    """
    rows = [
        (lineno, line.strip())
        for lineno, line in enumerate(text.splitlines(), start=1)
        if line.strip() and not line.strip().startswith("#")
    ]
    if not rows:
        raise MeasureFormatError("empty measure file")
    dim, count = _parse_header(rows[0][1], rows[0][0])
    if len(rows) - 1 != count:
        raise MeasureFormatError(
            f"header announces {count} atoms, found {len(rows) - 1}",
            line=rows[0][0],
        )
    weights, atoms = [], []
    for lineno, line in rows[1:]:
        parts = line.split()
        if len(parts) != dim + 1:
            raise MeasureFormatError(
                f"expected {dim + 1} numbers, got {len(parts)}", line=lineno
            )
        try:
            values = [float(p) for p in parts]
        except ValueError as e:
            raise MeasureFormatError(str(e), line=lineno)
        weights.append(values[0])
        atoms.append(values[1:])
    return make_measure(atoms, weights)


def read_measure(path: str | Path) -> DiscreteMeasure:
    """
    Read a measure file.
    """
    return parse_measure_text(Path(path).read_text())


def write_measure(measure: DiscreteMeasure, path: str | Path) -> None:
    """
    Write a measure file.
    """
    Path(path).write_text(measure_to_text(measure))


def _csv_text(header: list[str], rows: Iterable[Iterable[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, float) else v for v in row]
        )
    return buffer.getvalue()


def coupling_to_csv(plan: TransportPlan) -> str:
    """
    The positive entries of a plan as `i,j,flow,cost` rows.
    """
    return _csv_text(
        COUPLING_HEADER,
        ((i, j, flow, cost) for i, j, flow, cost in plan.nonzero()),
    )


def solution_record(solution: Solution) -> str:
    """
    Structured text record of a solution, ending with the minimizer in the measure format.

    Args:
        solution (Solution): The solution.

    Returns:
        str: The record.
    """
    lines = [
        f"payoff={solution.payoff_name}",
        f"theta={format_float(solution.radius)}",
        f"value={format_float(solution.value)}",
        f"dual_lambda={format_float(solution.dual_lambda)}",
        f"dual_value={format_float(solution.dual_value)}",
        f"gap={format_float(solution.gap)}",
        f"coupling_cost={format_float(solution.coupling.total_cost)}",
        "minimizer:",
    ]
    return "\n".join(lines) + "\n" + measure_to_text(solution.minimizer)


def convergence_csv(rows: list[ConvergenceRow]) -> str:
    """
    The convergence table with header `level,mesh,center_error,value,gap_to_reference,solver_gap`.
    """
    return _csv_text(
        CONVERGENCE_HEADER,
        ([getattr(row, key) for key in CONVERGENCE_HEADER] for row in rows),
    )


def perturbation_csv(rows: list[PerturbationRow]) -> str:
    """
    The perturbation table with header `theta,value`.
    """
    return _csv_text(
        PERTURBATION_HEADER, ([row.theta, row.value] for row in rows)
    )


def convergence_plotdata(study: ConvergenceStudy) -> str:
    """
    Plot series for a study: gap and a-priori budget against the mesh.
    """
    return _csv_text(
        ["level", "mesh", "gap_to_reference", "budget", "reference_value"],
        (
            [row.level, row.mesh, row.gap_to_reference, budget, study.reference_value]
            for row, budget in zip(study.rows, study.budgets)
        ),
    )


def perturbation_plotdata(
    rows: list[PerturbationRow], nominal: float, lipschitz_K: float
) -> str:
    """
    Plot series for a scan: m(theta) with the a-priori lower bound F(mu) - K * theta.
    """
    return _csv_text(
        ["theta", "value", "lower_bound", "nominal"],
        (
            [row.theta, row.value, nominal - lipschitz_K * row.theta, nominal]
            for row in rows
        ),
    )


def json_envelope(config: BaseModel, results: dict[str, Any]) -> str:
    """
    JSON document holding the full run configuration next to its results.
    """
    return (
        json.dumps(
            {
                "config": config.model_dump(mode="json"),
                "results": results,
            },
            indent=2,
            sort_keys=True,
        )
        + "\n"
    )


def write_text(path: Path, text: str) -> Path:
    """
    Write text to path, creating parent directories.

    Args:
        path (Path): Destination.
        text (str): Content.

    Returns:
        Path: The written path.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path

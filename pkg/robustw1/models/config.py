"""
This module contains the experiment configuration model and the response returned by the experiment runner.
"""

# External Libraries
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

# Python Standard Libraries
import re
from pathlib import Path
from typing import Any, Literal

# Local Libraries
from robustw1.errors import ConfigParseError


class RunResponse(BaseModel):
    """
    This class represents the outcome of one run. It contains an exit status, a message, and any data the run produced.
    """

    status: int = Field(
        default=0,
        description="The process exit status of the run.",
    )
    message: str = Field(
        default="",
        description="The message of the run; a single diagnostic line on failure.",
    )
    data: Any = Field(
        default=None,
        description="The data of the run, e.g. written output paths.",
    )


class ExperimentConfig(BaseModel):
    """
    This class represents a flat experiment configuration. The mode decides which of the other keys are required.
    """

    model_config = ConfigDict(extra="forbid")

    mode: Literal["solve", "convergence", "perturbation", "w1"] = Field(
        description="The experiment to run.",
    )
    payoff: str = Field(
        default="clamp",
        description="Registry name of the payoff.",
    )
    payoff_params: list[Any] | dict[str, Any] | None = Field(
        default=None,
        description="Payoff parameters, positional (list) or by keyword (mapping).",
    )
    atoms: list[list[float]] | list[float] | None = Field(
        default=None,
        description="Inline atoms of the center measure.",
    )
    weights: list[float] | None = Field(
        default=None,
        description="Inline weights of the center measure; uniform when omitted.",
    )
    measure_file: str | None = Field(
        default=None,
        description="Path of the center measure in the measure text format.",
    )
    random_atoms: int | None = Field(
        default=None,
        gt=0,
        description="Draw a random center with this many atoms in the box.",
    )
    target_atoms: list[list[float]] | list[float] | None = Field(
        default=None,
        description="Inline atoms of the second measure (w1 mode).",
    )
    target_weights: list[float] | None = Field(
        default=None,
        description="Inline weights of the second measure (w1 mode).",
    )
    target_file: str | None = Field(
        default=None,
        description="Path of the second measure (w1 mode).",
    )
    box: list[list[float]] | None = Field(
        default=None,
        description="Filtration box as [[lo, hi], ...].",
    )
    level: int | None = Field(
        default=None,
        ge=0,
        description="Filtration level whose cell centers form the candidate support.",
    )
    support_atoms: list[list[float]] | list[float] | None = Field(
        default=None,
        description="Explicit candidate support.",
    )
    theta: float | None = Field(
        default=None,
        ge=0.0,
        description="Ball radius.",
    )
    thetas: list[float] | None = Field(
        default=None,
        description="Ascending radii for a perturbation scan.",
    )
    levels: list[int] | None = Field(
        default=None,
        description="Inclusive level range [first, last] of a convergence study.",
    )
    reference_level: int | None = Field(
        default=None,
        description="Reference level of a convergence study.",
    )
    maximize: bool = Field(
        default=False,
        description="Solve the robust maximum instead of the minimum.",
    )
    seed: int = Field(
        default=0,
        ge=0,
        lt=2**64,
        description="Seed for generated instances.",
    )
    threads: int | None = Field(
        default=None,
        gt=0,
        description="Worker threads for independent solves.",
    )
    dump_coupling: bool = Field(
        default=False,
        description="Also write the coupling as CSV.",
    )
    out: str = Field(
        default="out",
        description="Output directory.",
    )

    @model_validator(mode="after")
    def check_mode_fields(self) -> "ExperimentConfig":
        def require(name: str) -> None:
            if getattr(self, name) is None:
                raise ConfigParseError(
                    f"missing required field for mode '{self.mode}'", field=name
                )

        has_center = (
            self.atoms is not None
            or self.measure_file is not None
            or self.random_atoms is not None
        )
        if not has_center:
            raise ConfigParseError(
                f"mode '{self.mode}' needs a center measure "
                "(atoms, measure_file or random_atoms)",
                field="atoms",
            )
        if self.random_atoms is not None:
            require("box")
        if self.mode == "w1":
            if self.target_atoms is None and self.target_file is None:
                raise ConfigParseError(
                    "mode 'w1' needs target_atoms or target_file",
                    field="target_atoms",
                )
        if self.mode in ("solve", "perturbation") and self.support_atoms is None:
            require("box")
            require("level")
        if self.mode == "solve":
            require("theta")
        if self.mode == "perturbation":
            require("thetas")
        if self.mode == "convergence":
            for name in ("box", "theta", "levels", "reference_level"):
                require(name)
            if len(self.levels) != 2 or self.levels[0] > self.levels[1]:
                raise ConfigParseError(
                    "levels must be an inclusive range [first, last]",
                    field="levels",
                )
        return self

    @property
    def level_range(self) -> range:
        first, last = self.levels
        return range(first, last + 1)

    @classmethod
    def from_yaml(cls, path: str | Path, **overrides: Any) -> "ExperimentConfig":
        """
        Load and validate a YAML config; non-None overrides replace file keys.

        Args:
            path (str | Path): Config file path.
            overrides: Values taken from command-line flags.

        Returns:
            ExperimentConfig: The validated config.
        """
        text = Path(path).read_text()
        try:
            raw = yaml.safe_load(text) or {}
        except yaml.YAMLError as e:
            mark = getattr(e, "problem_mark", None)
            raise ConfigParseError(
                f"invalid YAML: {getattr(e, 'problem', e)}",
                line=mark.line + 1 if mark is not None else None,
            )
        if not isinstance(raw, dict):
            raise ConfigParseError("config must be a mapping of keys to values")
        raw.update({k: v for k, v in overrides.items() if v is not None})
        try:
            return cls(**raw)
        except ValidationError as e:
            error = e.errors()[0]
            field = str(error["loc"][0]) if error["loc"] else None
            raise ConfigParseError(
                error["msg"],
                field=field,
                line=_field_line(text, field) if field else None,
            )
        except ConfigParseError as e:
            if e.field is not None and e.line is None:
                raise ConfigParseError(
                    str(e).split(": ", 1)[-1],
                    field=e.field,
                    line=_field_line(text, e.field),
                )
            raise


def _field_line(text: str, field: str) -> int | None:
    pattern = re.compile(rf"^\s*{re.escape(field)}\s*:")
    for lineno, line in enumerate(text.splitlines(), start=1):
        if pattern.match(line):
            return lineno
    return None

#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""A Pydantic model of the tunable settings of an analysis run."""

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, NonNegativeInt, PositiveFloat, PositiveInt
from ruamel.yaml import YAML
from typing_extensions import Self

from locc_oneway.hermspace import DEFAULT_RETRIES, DEFAULT_TOL
from locc_oneway.protocol import DEFAULT_TRIALS
from locc_oneway.states import Side


class AnalysisSettingsModel(BaseModel):
    """A Pydantic model for the tolerances, seeds and switches of a run."""

    model_config = ConfigDict(extra="forbid")

    side: Literal["A", "B", "both"] = "both"
    tol: PositiveFloat = DEFAULT_TOL
    seed: NonNegativeInt = 0
    trials: NonNegativeInt = DEFAULT_TRIALS
    retries: NonNegativeInt = DEFAULT_RETRIES
    oracle_attempts: NonNegativeInt = 0
    simulate: bool = False
    workers: PositiveInt = 1

    @property
    def sides(self) -> tuple[Side, ...]:
        """Get the initiating parties to analyse."""
        if self.side == "both":
            return (Side.A, Side.B)
        return (Side(self.side),)

    def updated(self, overrides: dict[str, Any]) -> Self:
        """Get a copy with the given non-None values replaced, re-validated."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return self.model_validate({**self.model_dump(), **changes})

    @classmethod
    def from_yaml(cls, file: Path) -> Self:
        """Construct the model from a YAML file."""
        with file.open(encoding="utf-8") as handle:
            return cls.model_validate(YAML(typ="safe").load(handle) or {})

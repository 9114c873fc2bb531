"""
Machine-readable reports printed by the CLI with --json.

Each command has one model; `report_schemas()` returns their JSON schemas.
"""

from typing import Dict, List, Optional, Type

from pydantic import BaseModel, Field


class NormEntry(BaseModel):
    nonterminal: str
    norm: Optional[int] = Field(None, description="None stands for omega")


class NormsReport(BaseModel):
    command: str = "norms"
    norms: List[NormEntry]
    normed: bool


class ConstantsReport(BaseModel):
    command: str = "constants"
    M: int
    M_rhs: int
    S_rhs: int
    E: int
    nonterminal_count: int
    decomposition_threshold: int
    prover_pair_space: int


class CanonReport(BaseModel):
    command: str = "canon"
    prefix: List[str]
    cycle: List[str]
    text: str


class StepEntry(BaseModel):
    action: str
    target: str
    rule: Optional[str] = None


class StepReport(BaseModel):
    command: str = "step"
    source: str
    transitions: List[StepEntry]


class PathReport(BaseModel):
    command: str = "path"
    source: str
    actions: List[str]
    states: List[str]


class EqLevelReport(BaseModel):
    command: str = "eqlevel"
    left: str
    right: str
    depth: int
    kind: str = Field(..., description="Exact or AtLeast")
    level: int
    verdict: str


class DecideNormedReport(BaseModel):
    command: str = "decide-normed"
    left: str
    right: str
    bound: int
    depth: int
    bisimilar: bool
    eqlevel: Optional[int] = None
    verdict: str


class MoveEntry(BaseModel):
    phase: int
    mover: str
    move: str
    pair_before: List[str]
    pair_after: List[str]


class GameReport(BaseModel):
    command: str = "game"
    initial_pair: List[str]
    pair_space: int
    free_space: int
    moves: List[MoveEntry]
    outcome: str
    phases: int
    reason: str = ""
    verdict: str


class SolveReport(BaseModel):
    command: str = "solve"
    verdict: str
    configurations: int
    attractor_size: int
    pair_space: int
    free_space: int
    reason: str = ""


class CheckDecompReport(BaseModel):
    command: str = "check-decomp"
    target: List[str]
    generators: List[List[str]]
    valid: bool
    footprint: int
    reason: Optional[str] = None
    verdict: str


REPORT_MODELS: Dict[str, Type[BaseModel]] = {
    "norms": NormsReport,
    "constants": ConstantsReport,
    "canon": CanonReport,
    "step": StepReport,
    "path": PathReport,
    "eqlevel": EqLevelReport,
    "decide-normed": DecideNormedReport,
    "game": GameReport,
    "solve": SolveReport,
    "check-decomp": CheckDecompReport,
}


def report_schemas() -> Dict[str, dict]:
    return {name: model.model_json_schema() for name, model in REPORT_MODELS.items()}


def render(report: BaseModel) -> str:
    """Compact JSON in field order."""
    return report.model_dump_json()

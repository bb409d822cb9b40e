"""Row-level run records shared by the solvers and the harness."""

import math

from dataclasses import dataclass, field


@dataclass
class MetricRow:
    """One progress sample. subopt stays NaN until a reference is known."""

    solver: str
    epoch: int
    t: int
    gqo: int
    fqo: int
    lo: int
    elapsed_ns: int
    objective: float
    subopt: float = math.nan
    flag: int = 0


@dataclass
class RunRecord:
    """All rows of one solver run, in emission order."""

    solver: str
    rows: list = field(default_factory=list)

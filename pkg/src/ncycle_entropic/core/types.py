from __future__ import annotations

from typing import Literal

PresetName = Literal[
    "pr4",
    "prN",
    "classical",
    "white",
    "iso",
    "emax4",
]

OutputFormat = Literal["table", "csv", "json"]

InequalityFamily = Literal["C", "BC"]

VerdictMethod = Literal["facet-check", "lp-decomposition"]

SolveStatus = Literal["feasible", "infeasible", "inconclusive"]

AtomKind = Literal["output-flip", "cyclic-shift", "edge-double-flip"]

EdgeSide = Literal["left", "right"]

# Process exit codes of the command-line front end
ExitCode = Literal[0, 2, 3, 64, 65]

EXIT_OK: ExitCode = 0
EXIT_LOCAL: ExitCode = 2
EXIT_NOT_ACTIVATED: ExitCode = 3
EXIT_USAGE: ExitCode = 64
EXIT_DATA: ExitCode = 65

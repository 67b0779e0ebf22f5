"""Solver verdicts shared by the dense and block SDP paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

EPS_VERDICT = 1e-7

GME = "gme"
PPT_MIXTURE = "ppt-mixture"
BOUNDARY = "boundary"


def verdict_for(s_opt: float, eps: float = EPS_VERDICT) -> str:
    if math.isnan(s_opt):
        return BOUNDARY
    if s_opt < -eps:
        return GME
    if s_opt > eps:
        return PPT_MIXTURE
    return BOUNDARY


@dataclass
class SdpReport:
    status: str
    s_opt: float
    verdict: str
    residuals: dict
    wall_time: float
    n_qubits: int
    solver_status: str = ""
    field: str = "complex"
    primal: object = dc_field(default=None, repr=False)

    def to_json(self) -> dict:
        return {
            "n": self.n_qubits,
            "s_opt": None if math.isnan(self.s_opt) else self.s_opt,
            "verdict": self.verdict,
            "status": self.status,
            "residuals": self.residuals,
            "wall_time_s": self.wall_time,
        }

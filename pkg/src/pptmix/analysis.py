"""Single-state verdicts, noise-tolerance bisection, plane scans and the three-qubit certificate."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .block_sdp import BipartiteQ, block_ppt_mixture_sdp
from .config import Settings, default_settings
from .dense_oracle import dense_ppt_mixture_sdp, embed_bipartite_blocks, permutation_operator, pi_average
from .errors import InvalidArgumentError, PreconditionError, ResourceLimitError, SolverError
from .pi_state import PIState, StateSpec, check_simplex, expand_dense, ghz_w_noise, mix, white_noise
from .report import PPT_MIXTURE, SdpReport


def _check_size(n_qubits: int, limit: int, key: str):
    if n_qubits > limit:
        raise ResourceLimitError(
            f"N={n_qubits} exceeds the configured limit {key}={limit}; raise it with --config"
        )


def solve_state(state: PIState, settings: Settings | None = None, method: str = "block") -> SdpReport:
    """s_opt of ``state`` with the block SDP, or the dense one for ``method='dense'``."""
    settings = settings or default_settings()
    if method == "block":
        _check_size(state.n_qubits, settings.max_qubits, "max_qubits")
        return block_ppt_mixture_sdp(state, field=settings.field, backend=settings.solver,
                                     settings=settings.solver_settings,
                                     eps_verdict=settings.eps_verdict)
    if method == "dense":
        _check_size(state.n_qubits, settings.dense_max_qubits, "dense_max_qubits")
        return dense_ppt_mixture_sdp(expand_dense(state), field=settings.field,
                                     backend=settings.dense_solver,
                                     settings=settings.solver_settings,
                                     eps_verdict=settings.eps_verdict)
    raise InvalidArgumentError(f"method must be 'block' or 'dense', got {method!r}")


def analyze(spec: StateSpec, settings: Settings | None = None) -> SdpReport:
    settings = settings or default_settings()
    _check_size(spec.n_qubits, settings.max_qubits, "max_qubits")
    return solve_state(spec.build(), settings)


# --- white-noise tolerance ---------------------------------------------------


@dataclass
class NoiseToleranceResult:
    """Bisection outcome for ``p rho + (1 - p) 1/2^N``; detected (GME) for ``p > p_star``."""

    state_spec: StateSpec
    p_star: float
    lo: float
    hi: float
    bracket_width: float
    solve_count: int
    detected: bool
    s_lo: float = float("nan")
    s_hi: float = float("nan")

    @property
    def tolerance(self) -> float:
        return 1.0 - self.p_star

    def to_dict(self) -> dict:
        return {
            "state": self.state_spec.to_dict(),
            "p_star": self.p_star,
            "noise_tolerance": self.tolerance,
            "bracket": [self.lo, self.hi],
            "bracket_width": self.bracket_width,
            "solve_count": self.solve_count,
            "detected": self.detected,
        }


def noise_tolerance(spec: StateSpec, tol: float | None = None, settings: Settings | None = None,
                    method: str = "block") -> NoiseToleranceResult:
    """Critical purity of the spec's state under white noise.

    The PPT mixtures form a convex set containing the maximally mixed
    state, so along the segment the sign of s_opt changes at most once.
    """
    settings = settings or default_settings()
    tol = settings.bisection_tol if tol is None else float(tol)
    if not 1e-6 <= tol <= 1e-2:
        raise InvalidArgumentError(f"tol must lie in [1e-6, 1e-2], got {tol}")
    _check_size(spec.n_qubits, settings.max_qubits, "max_qubits")
    target = spec.build()
    noise = white_noise(spec.n_qubits)

    def s_at(p: float) -> float:
        report = solve_state(mix([(p, target), (1.0 - p, noise)]), settings, method)
        if math.isnan(report.s_opt):
            raise SolverError(f"solver failed at p={p} ({report.solver_status})")
        return report.s_opt

    # s(1) within eps of zero is not a detection (e.g. pure product states, s = 0 exactly)
    s_one = s_at(1.0)
    if s_one >= -settings.eps_verdict:
        return NoiseToleranceResult(spec, 1.0, 1.0, 1.0, 0.0, 1, False, s_one, s_one)
    lo, hi, s_lo, s_hi, count = 0.0, 1.0, float("nan"), s_one, 1
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        s_mid = s_at(mid)
        count += 1
        if s_mid < 0:
            hi, s_hi = mid, s_mid
        else:
            lo, s_lo = mid, s_mid
    return NoiseToleranceResult(spec, 0.5 * (lo + hi), lo, hi, hi - lo, count, True, s_lo, s_hi)


# --- (p1, p2) plane ----------------------------------------------------------

CSV_HEADER = "p1,p2,s_opt,verdict,solve_seconds,status"


@dataclass(frozen=True)
class PlanePoint:
    p1: float
    p2: float
    s_opt: float
    verdict: str
    solve_seconds: float
    status: str

    def csv_row(self, timing: bool = True) -> str:
        secs = f"{self.solve_seconds:.12g}" if timing else ""
        return f"{self.p1:.12g},{self.p2:.12g},{self.s_opt:.12g},{self.verdict},{secs},{self.status}"


@dataclass
class PlaneScanResult:
    n_qubits: int
    grid_step: float
    grid: list[PlanePoint] = field(default_factory=list)

    def to_csv(self, timing: bool = True) -> str:
        """CSV text; ``timing=False`` blanks the wall-clock column so output is reproducible."""
        return "\n".join([CSV_HEADER] + [p.csv_row(timing) for p in self.grid]) + "\n"

    def point(self, p1: float, p2: float) -> PlanePoint:
        for p in self.grid:
            if abs(p.p1 - p1) < 1e-12 and abs(p.p2 - p2) < 1e-12:
                return p
        raise KeyError((p1, p2))


def simplex_grid(grid_step: float) -> list[tuple[float, float]]:
    """Points ``(i h, j h)`` with ``i, j >= 0`` and ``(i + j) h <= 1``, p1 varying slowest."""
    if not 0 < grid_step <= 0.1:
        raise InvalidArgumentError(f"grid step must lie in (0, 0.1], got {grid_step}")
    steps = int(math.floor(1.0 / grid_step + 1e-9))
    out = []
    for i in range(steps + 1):
        for j in range(steps + 1 - i):
            p1, p2 = round(i * grid_step, 12), round(j * grid_step, 12)
            if p1 + p2 <= 1.0 + 1e-12:
                out.append((p1, min(p2, 1.0 - p1)))
    return out


def _plane_state(n_qubits: int, p1: float, p2: float) -> PIState:
    check_simplex(p1, p2, atol=1e-12)
    return ghz_w_noise(n_qubits, p1, max(0.0, p2))


def _scan_point(args) -> PlanePoint:
    n_qubits, p1, p2, settings = args
    start = time.perf_counter()
    report = solve_state(_plane_state(n_qubits, p1, p2), settings)
    return PlanePoint(p1, p2, report.s_opt, report.verdict, time.perf_counter() - start, report.status)


def scan_plane(n_qubits: int, grid_step: float, settings: Settings | None = None) -> PlaneScanResult:
    """s_opt over the GHZ/W/noise simplex; rows come back in grid order."""
    settings = settings or default_settings()
    if n_qubits < 2:
        raise InvalidArgumentError("the GHZ/W plane needs N >= 2")
    _check_size(n_qubits, settings.max_qubits, "max_qubits")
    jobs = [(n_qubits, p1, p2, settings) for p1, p2 in simplex_grid(grid_step)]
    if settings.workers > 1:
        with ProcessPoolExecutor(max_workers=settings.workers) as pool:
            points = list(pool.map(_scan_point, jobs, chunksize=4))
    else:
        points = [_scan_point(job) for job in jobs]
    return PlaneScanResult(n_qubits, grid_step, points)


# --- three-qubit biseparability certificate ---------------------------------

_SYM_BASIS = np.zeros((4, 3))
_SYM_BASIS[0, 0] = 1.0  # |00>
_SYM_BASIS[[1, 2], 1] = 1 / np.sqrt(2)  # psi+
_SYM_BASIS[3, 2] = 1.0  # |11>
_PSI_MINUS = np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2)


@dataclass
class BiseparabilityCertificate:
    """``Q_{A|BC} = q sigma_{A|Sym(BC)} + (1 - q) omega_A (x) |psi-><psi-|`` with diagnostics.

    ``valid`` means sigma (a qubit x qutrit state) and omega are PSD, sigma
    has a PSD partial transpose (hence is separable), and both residuals
    are within tolerance: the state is then biseparable.
    """

    q_extracted: BipartiteQ | None
    q: float
    antisymmetric_weight: float
    sigma: np.ndarray | None
    omega: np.ndarray | None
    symmetric_part_min_eig: float
    symmetric_part_min_pt_eig: float
    omega_min_eig: float
    decomposition_residual: float
    reconstruction_residual: float
    valid: bool
    verdict_only: bool = False
    diagnostics: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "verdict_only": self.verdict_only,
            "q": self.q,
            "antisymmetric_weight": self.antisymmetric_weight,
            "symmetric_part_min_eig": self.symmetric_part_min_eig,
            "symmetric_part_min_pt_eig": self.symmetric_part_min_pt_eig,
            "omega_min_eig": self.omega_min_eig,
            "decomposition_residual": self.decomposition_residual,
            "reconstruction_residual": self.reconstruction_residual,
            "diagnostics": self.diagnostics,
        }


def _qubit_qutrit_pt(mat: np.ndarray) -> np.ndarray:
    return mat.reshape(2, 3, 2, 3).transpose(2, 1, 0, 3).reshape(6, 6)


def _min_eig(mat: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))[0])


def build_certificate(report: SdpReport, target: PIState,
                      settings: Settings | None = None) -> BiseparabilityCertificate:
    """Decompose the optimal ``Q_{A|BC}`` of a three-qubit block SDP and check it.

    Works for any verdict; for a GME state no decomposition passes.
    """
    settings = settings or default_settings()
    nan = float("nan")
    if target.n_qubits != 3:
        raise InvalidArgumentError("the biseparability certificate is defined for N=3 only")
    if report.primal is None:
        return BiseparabilityCertificate(
            None, nan, nan, None, None, nan, nan, nan, nan, nan,
            valid=report.verdict == PPT_MIXTURE, verdict_only=True,
            diagnostics=["solver returned no primal values; validity follows the verdict only"],
        )
    (qa,) = [q for q in report.primal if q.k == 1]
    sym_block = qa.blocks[(1, 2)]
    anti_block = qa.blocks[(1, 0)]
    tr_sym, tr_anti = float(np.trace(sym_block).real), float(np.trace(anti_block).real)
    total = tr_sym + tr_anti
    q = tr_sym / total
    sigma = sym_block / tr_sym if tr_sym != 0 else sym_block
    omega = anti_block / tr_anti if tr_anti != 0 else anti_block

    # dense Q_{A|BC}, with the B<->C exchange averaged in explicitly
    q_dense = embed_bipartite_blocks(3, 1, qa.blocks).matrix
    swap = permutation_operator(3, (0, 2, 1)).matrix
    q_dense = 0.5 * (q_dense + swap @ q_dense @ swap.T)
    iso_sym = np.kron(np.eye(2), _SYM_BASIS)
    # q sigma = sym_block / tr Q and (1 - q) omega = anti_block / tr Q
    parts = iso_sym @ sym_block @ iso_sym.T + np.kron(anti_block, np.outer(_PSI_MINUS, _PSI_MINUS))
    decomposition = float(np.max(np.abs(q_dense - parts)))
    rho = expand_dense(target).matrix
    reconstruction = float(np.max(np.abs(rho - pi_average(q_dense).matrix)))

    eig_sigma = _min_eig(sigma)
    eig_pt = _min_eig(_qubit_qutrit_pt(sigma))
    eig_omega = _min_eig(omega)
    eig_tol = settings.certificate_eig_tol
    diagnostics = []
    if min(tr_sym, tr_anti) < -eig_tol:
        diagnostics.append(f"negative component trace ({tr_sym:.3g}, {tr_anti:.3g})")
    if eig_sigma < -eig_tol:
        diagnostics.append(f"sigma not PSD (min eig {eig_sigma:.3g})")
    if eig_pt < -eig_tol:
        diagnostics.append(f"sigma not PPT (min eig of partial transpose {eig_pt:.3g})")
    if eig_omega < -eig_tol:
        diagnostics.append(f"omega not PSD (min eig {eig_omega:.3g})")
    if decomposition > settings.certificate_residual:
        diagnostics.append(f"decomposition residual {decomposition:.3g}")
    if reconstruction > settings.certificate_residual:
        diagnostics.append(f"reconstruction residual {reconstruction:.3g}")
    return BiseparabilityCertificate(
        qa, q, 1 - q, sigma, omega, eig_sigma, eig_pt, eig_omega,
        decomposition, reconstruction, valid=not diagnostics, diagnostics=diagnostics,
    )


def certify_biseparable_3q(state: PIState, settings: Settings | None = None,
                           report: SdpReport | None = None) -> BiseparabilityCertificate:
    settings = settings or default_settings()
    if state.n_qubits != 3:
        raise InvalidArgumentError(f"certify needs N=3, got N={state.n_qubits}")
    report = report or solve_state(state, settings)
    if report.verdict != PPT_MIXTURE:
        raise PreconditionError(
            f"state is not a PPT mixture (verdict {report.verdict}, s_opt={report.s_opt:.3g}); "
            "nothing to certify"
        )
    return build_certificate(report, state, settings)

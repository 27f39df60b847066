"""Run the benchmark examples and tabulate majorants with efficiency indices."""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

from .majorants import (
    StabilityConstants,
    cost_majorant,
    efficiency_index,
    majorant_full_norm,
    majorant_seminorm,
    modal_residuals,
    per_mode_majorant,
)
from .mesh import build_uniform_mesh
from .problems import get_example, reference_solution
from .solver import SolverError, evaluate_cost, mode_cost, solve_all_modes
from .verification import exact_mode_error, overall_exact_error_sq, reference_mode_error

__all__ = [
    "SCHEMA",
    "CSV_COLUMNS",
    "RunConfig",
    "ReportRow",
    "MajorantReport",
    "evaluate_grid",
    "run",
    "format_value",
]

SCHEMA = "mhfem-report/1"
CSV_COLUMNS = (
    "example", "k", "grid", "majorant_semi", "ieff_m", "j_oplus", "ieff_j",
    "remainder", "alpha", "beta", "iters", "seconds",
)


def format_value(x) -> str:
    """Six significant digits for floats, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.6g}"
    return str(x)


@dataclass
class RunConfig:
    example: int
    grids: tuple
    N: Optional[int] = None
    tol: float = 1e-10
    workers: int = 1
    out: Optional[str] = None
    format: str = "table"
    overall: bool = False
    denominator: str = "h1semi"
    ref_factor: int = 2
    timing: bool = False

    def __post_init__(self):
        if self.example not in (1, 2, 3):
            raise ValueError("example must be 1, 2 or 3")
        self.grids = tuple(int(n) for n in self.grids)
        if not self.grids:
            raise ValueError("at least one grid is required")
        for n in self.grids:
            if n < 2 or n & (n - 1):
                raise ValueError(f"grid sizes must be powers of two >= 2, got {n}")
        if self.N is not None and self.N < 0:
            raise ValueError("the truncation index must be nonnegative")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.workers < 1:
            raise ValueError("need at least one worker")
        if self.format not in ("table", "csv", "jsonl"):
            raise ValueError("format must be table, csv or jsonl")
        if self.denominator not in ("h1semi", "weighted"):
            raise ValueError("denominator must be h1semi or weighted")
        if self.ref_factor < 2:
            raise ValueError("the reference mesh must be finer (ref_factor >= 2)")


@dataclass
class ReportRow:
    """One table line; ``k == "all"`` marks the aggregate over all modes."""

    example: int
    k: object
    grid: int
    majorant_semi: Optional[float]
    ieff_m: Optional[float]
    j_oplus: Optional[float]
    ieff_j: Optional[float]
    remainder: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    iters: Optional[int] = None
    seconds: Optional[float] = None
    extras: dict = field(default_factory=dict)

    def csv_fields(self) -> list:
        return [format_value(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass
class MajorantReport:
    example: int
    N: int
    rows: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    def to_jsonl(self) -> str:
        """One JSON object per row with the CSV values plus extras, all at 6 digits."""
        lines = [json.dumps({"schema": SCHEMA, "example": self.example, "N": self.N,
                             "failures": self.failures})]
        for r in self.rows:
            rec = {"schema": SCHEMA}
            rec.update({c: format_value(getattr(r, c)) for c in CSV_COLUMNS})
            rec["extras"] = {key: format_value(v) for key, v in sorted(r.extras.items())}
            lines.append(json.dumps(rec))
        return "\n".join(lines) + "\n"

    def to_table(self) -> str:
        head = ("grid", "k", "t_sec", "M+", "Ieff_M", "J+", "Ieff_J", "E_N", "iters")
        body = [
            (str(r.grid), str(r.k), format_value(r.seconds), format_value(r.majorant_semi),
             format_value(r.ieff_m), format_value(r.j_oplus), format_value(r.ieff_j),
             format_value(r.remainder), format_value(r.iters))
            for r in self.rows
        ]
        widths = [max(len(x) for x in col) for col in zip(head, *body)]
        fmt = "  ".join(f"{{:>{w}}}" for w in widths)
        lines = [f"Example {self.example}, N = {self.N}", fmt.format(*head)]
        lines += [fmt.format(*b) for b in body]
        for f in self.failures:
            lines.append(f"FAILED: {f['message']}")
        return "\n".join(lines) + "\n"


def _safe(x):
    return None if x is None or not math.isfinite(x) else float(x)


def evaluate_grid(example_id: int, n: int, N: Optional[int] = None, tol: float = 1e-10,
                  workers: int = 1, denominator: str = "h1semi", overall: bool = False,
                  ref_factor: int = 2, timing: bool = False, modes=None) -> tuple:
    """Solve one example on one grid and build its report rows.

    Returns ``(rows, failures)``. Non-converged modes are kept (flagged as
    failures) so that partial results remain available.
    """
    ex = get_example(example_id)
    spec = ex.spec(N)
    N = spec.N
    start = time.perf_counter()
    mesh = build_uniform_mesh(n)
    sol = solve_all_modes(spec, mesh, tol=tol, workers=workers, modes=modes, strict=False)
    failures = [
        {"example": example_id, "k": k, "grid": n,
         "message": f"MINRES did not converge for mode k={k} on the {n}x{n} grid"}
        for k, m in sorted(sol.modes.items()) if not m.converged
    ]
    ref = None
    if not ex.has_exact_solution:
        ref = reference_solution(example_id, mesh, ref_factor, tol=tol, N=N, modes=modes, workers=workers)
    consts = StabilityConstants.from_spec(spec)
    res = modal_residuals(sol)
    E_N = spec.desired_state.remainder(N)
    cm = cost_majorant(sol, consts, res, E_N)
    elapsed = time.perf_counter() - start

    rows = []
    for k in sorted(sol.modes):
        if ref is None:
            err = exact_mode_error(ex, sol, k)
            j_ref = ex.exact_mode_cost(k)
        else:
            err = reference_mode_error(sol, ref, k)
            j_ref = mode_cost(ref, k)
        m_tab = per_mode_majorant(res, k, consts, "table")
        m_theory = per_mode_majorant(res, k, consts, "theory")
        den = err.denominator(spec.omega, denominator)
        i = res.index(k)
        rows.append(ReportRow(
            example=example_id, k=k, grid=n,
            majorant_semi=m_tab,
            ieff_m=efficiency_index(m_tab, den),
            j_oplus=cm.per_mode[k],
            ieff_j=efficiency_index(cm.per_mode[k], j_ref),
            alpha=_safe(cm.young.alpha[k]),
            beta=_safe(cm.young.beta[k]),
            iters=sol.modes[k].iterations,
            seconds=elapsed if timing else None,
            extras={
                "majorant_theory": m_theory,
                "error": den,
                "error_h1semi": err.denominator(spec.omega, "h1semi"),
                "error_weighted": err.denominator(spec.omega, "weighted"),
                "j_reference": j_ref,
                "r1": math.sqrt(res.r1[i]), "r2": math.sqrt(res.r2[i]),
                "r3": math.sqrt(res.r3[i]), "r4": math.sqrt(res.r4[i]),
            },
        ))
    if overall:
        semi = majorant_seminorm(res, consts, E_N)
        full = majorant_full_norm(res, consts, E_N)
        if ref is None:
            err_sq = overall_exact_error_sq(ex, sol)
            j_ref = ex.exact_cost()
        else:
            # the reference carries modes 0..N only; its cost adds the same data tail
            err_sq = sum(
                (ex.T if k == 0 else 0.5 * ex.T)
                * (e.grad_sq + k * ex.omega * e.l2_sq)
                for k in sorted(sol.modes)
                for e in [reference_mode_error(sol, ref, k)]
            )
            j_ref = evaluate_cost(ref.spec, ref)
        a = semi.A
        table_scaled = math.sqrt(2.0) * (consts.C_F * (a[0] + a[2]) + a[1] + a[3])
        rows.append(ReportRow(
            example=example_id, k="all", grid=n,
            majorant_semi=semi.value,
            ieff_m=efficiency_index(semi.value, math.sqrt(err_sq)),
            j_oplus=cm.value,
            ieff_j=efficiency_index(cm.value, j_ref),
            remainder=E_N,
            alpha=cm.young.alpha_tail,
            iters=sum(m.iterations for m in sol.modes.values()),
            seconds=elapsed if timing else None,
            extras={
                "majorant_full": full,
                "majorant_table_scaling": table_scaled,
                "error": math.sqrt(err_sq),
                "j_reference": j_ref,
            },
        ))
    return rows, failures


def run(config: RunConfig) -> MajorantReport:
    """Evaluate all requested grids; solver failures are recorded, not raised."""
    ex = get_example(config.example)
    N = ex.default_N if config.N is None else config.N
    report = MajorantReport(config.example, N)
    for n in config.grids:
        try:
            rows, failures = evaluate_grid(
                config.example, n, N, config.tol, config.workers, config.denominator,
                config.overall, config.ref_factor, config.timing,
            )
        except (SolverError, MemoryError, ValueError) as exc:
            report.failures.append({"example": config.example, "k": getattr(exc, "k", None),
                                    "grid": n, "message": f"{n}x{n} grid: {exc}"})
            continue
        report.rows.extend(rows)
        report.failures.extend(failures)
    return report

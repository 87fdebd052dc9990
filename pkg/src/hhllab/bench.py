"""Operation-count bookkeeping for HHL against classical solvers.

All formulas use unit constants: they show how costs scale, not how long
anything takes.

    hhl                   log2(N) * s^2 * k^2 / eps
    conjugate_gradient    N * s * sqrt(k) * ln(1/eps)
    gaussian_elimination  N^3
    block_krylov          N^2.33

``N`` is the dimension, ``s`` the row sparsity, ``k`` the condition number
and ``eps`` the target accuracy.  A sparsity-free HHL estimate,
``k^2 log2(N) / eps``, is the ``s = 1`` case.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable

from .errors import InvalidParameter
from .linalg import SolverRun

METHODS = ("hhl", "conjugate_gradient", "gaussian_elimination", "block_krylov")
_ALIASES = {
    "hhl": "hhl",
    "cg": "conjugate_gradient",
    "conjugate_gradient": "conjugate_gradient",
    "gauss": "gaussian_elimination",
    "gaussian_elimination": "gaussian_elimination",
    "krylov": "block_krylov",
    "block_krylov": "block_krylov",
}
KRYLOV_EXPONENT = 2.33


@dataclass(frozen=True)
class CostEstimate:
    method: str
    N: int
    s: int
    k: float
    eps: float
    ops: float


def _check(N, s, k, eps) -> None:
    if int(N) != N or N < 2:
        raise InvalidParameter(f"N must be an integer >= 2, got {N}")
    if int(s) != s or s < 1:
        raise InvalidParameter(f"s must be an integer >= 1, got {s}")
    if not k >= 1:
        raise InvalidParameter(f"k must be >= 1, got {k}")
    if not 0 < eps < 1:
        raise InvalidParameter(f"eps must lie in (0, 1), got {eps}")


def complexity_estimate(method: str, N: int, s: int = 1, k: float = 1.0, eps: float = 0.1) -> CostEstimate:
    name = _ALIASES.get(method)
    if name is None:
        raise InvalidParameter(f"unknown method {method!r}; expected one of {METHODS}")
    _check(N, s, k, eps)
    if name == "hhl":
        ops = math.log2(N) * s * s * k * k / eps
    elif name == "conjugate_gradient":
        ops = N * s * math.sqrt(k) * math.log(1 / eps)
    elif name == "gaussian_elimination":
        ops = float(N) ** 3
    else:
        ops = float(N) ** KRYLOV_EXPONENT
    return CostEstimate(name, int(N), int(s), float(k), float(eps), ops)


@dataclass(frozen=True)
class CrossoverRow:
    N: int
    hhl_ops: float
    cg_ops: float
    gauss_ops: float
    krylov_ops: float

    @property
    def ratio(self) -> float:
        """``cg_ops / hhl_ops``; above 1 the HHL estimate is the smaller one."""
        return self.cg_ops / self.hhl_ops

    @property
    def hhl_below_cg(self) -> bool:
        return self.hhl_ops < self.cg_ops

    @property
    def hhl_below_gauss(self) -> bool:
        return self.hhl_ops < self.gauss_ops


@dataclass(frozen=True)
class CrossoverTable:
    s: int
    k: float
    eps: float
    rows: tuple[CrossoverRow, ...]

    def first_below(self, column: str) -> int | None:
        """Smallest N where the HHL estimate drops below ``cg`` or ``gauss``."""
        attr = {"cg": "hhl_below_cg", "gauss": "hhl_below_gauss"}[column]
        for r in self.rows:
            if getattr(r, attr):
                return r.N
        return None

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            f"# unit-constant operation estimates (scaling only, not timings); "
            f"s={self.s} k={self.k:.12g} eps={self.eps:.12g}\n"
        )
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["N", "hhl_ops", "cg_ops", "gauss_ops", "krylov_ops", "ratio_cg_hhl", "hhl_below_cg", "hhl_below_gauss"])
        for r in self.rows:
            w.writerow([
                r.N,
                f"{r.hhl_ops:.12g}",
                f"{r.cg_ops:.12g}",
                f"{r.gauss_ops:.12g}",
                f"{r.krylov_ops:.12g}",
                f"{r.ratio:.12g}",
                int(r.hhl_below_cg),
                int(r.hhl_below_gauss),
            ])
        return buf.getvalue()


def crossover_table(s: int, k: float, eps: float, N_grid: Iterable[int]) -> CrossoverTable:
    rows = []
    for N in N_grid:
        rows.append(CrossoverRow(
            int(N),
            complexity_estimate("hhl", N, s, k, eps).ops,
            complexity_estimate("cg", N, s, k, eps).ops,
            complexity_estimate("gauss", N, s, k, eps).ops,
            complexity_estimate("krylov", N, s, k, eps).ops,
        ))
    return CrossoverTable(int(s), float(k), float(eps), tuple(rows))


def measured_ops(run: SolverRun) -> int:
    """Multiply-add count recorded by an instrumented classical solve."""
    return int(run.ops)

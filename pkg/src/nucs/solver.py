"""Equality-constrained L1 minimization over complex signals.

``solve_l1`` runs ADMM (Douglas-Rachford) splitting between the affine
constraint set and the complex L1 norm, with residual-balancing penalty
updates during the first iterations. The constraint rows are orthonormal
DFT rows, so projecting onto ``{u : A u = b}`` is a transform, an overwrite
of the constrained coefficients, and an inverse transform. The returned
point is always a projected iterate, hence feasible to rounding error.

``solve_l0_bruteforce`` enumerates supports and is only meant as an oracle
for tiny problems.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .projection import ProjectionOperator
from .spectral import ComplexSignal, dft_matrix

__all__ = [
    "BasisPursuitProblem",
    "SolverConfig",
    "SolutionReport",
    "soft_threshold",
    "solve_l1",
    "solve_l0_bruteforce",
    "support_of",
]

SparsityDomain = Literal["time", "frequency"]

# Residual balancing: rescale the threshold by _STEP every _ADAPT_EVERY
# iterations while one residual exceeds the other by _BALANCE.
_BALANCE = 10.0
_STEP = 2.0
_ADAPT_EVERY = 10
_ADAPT_UNTIL = 2000


@dataclass(frozen=True)
class BasisPursuitProblem:
    """``min ||T s||_1  s.t.  (selected and suppressed DFT rows of s) = measurements``.

    T is the identity for ``sparsity_domain="time"`` and the unitary DFT for
    ``"frequency"``. The suppressed block of `measurements` must be zero.
    """

    operator: ProjectionOperator
    measurements: np.ndarray
    sparsity_domain: SparsityDomain = "time"

    def __post_init__(self):
        b = self.measurements
        if isinstance(b, ComplexSignal):
            b = b.values
        b = np.array(b, dtype=complex).reshape(-1)
        if b.size != self.operator.n_rows:
            raise ValueError(
                f"{b.size} measurements for an operator with {self.operator.n_rows} rows")
        if np.any(b[len(self.operator.selected):] != 0):
            raise ValueError("suppressed block of the measurements must be exactly zero")
        if self.sparsity_domain not in ("time", "frequency"):
            raise ValueError(f"unknown sparsity domain {self.sparsity_domain!r}")
        b.setflags(write=False)
        object.__setattr__(self, "measurements", b)

    @property
    def N(self) -> int:
        return self.operator.N

    def scaled(self, c: complex) -> "BasisPursuitProblem":
        return BasisPursuitProblem(self.operator, c * self.measurements, self.sparsity_domain)


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-7
    max_iterations: int = 5000
    penalty: float = 1.0
    relaxation: float = 1.0

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.penalty <= 0:
            raise ValueError("penalty must be positive")
        if not 0 < self.relaxation < 2:
            raise ValueError("relaxation must lie in (0, 2)")


@dataclass(frozen=True)
class SolutionReport:
    solution: ComplexSignal
    iterations_used: int
    final_residual: float
    objective: float
    converged: bool
    support: tuple[int, ...] | None = None
    history: np.ndarray = field(default_factory=lambda: np.empty(0), repr=False)
    status: str = ""


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    """Complex soft-thresholding: shrink moduli by `t`, keep phases."""
    mag = np.abs(v)
    scale = np.maximum(1.0 - t / np.maximum(mag, np.finfo(float).tiny), 0.0)
    return v * scale


def solve_l1(problem: BasisPursuitProblem, config: SolverConfig | None = None) -> SolutionReport:
    """Basis pursuit with complex L1 (sum of moduli) in the chosen domain.

    The reported `final_residual` is the larger of the primal gap
    ``||x - y||`` between the feasible and the shrunk iterate and the dual
    step ``||y_k - y_(k-1)||``, both relative to ``||b||``; it vanishes
    exactly at a minimizer. The returned solution is the lowest-objective
    feasible iterate, so it satisfies the constraints to rounding error
    whether or not the run converged.
    """
    config = config or SolverConfig()
    op, b = problem.operator, problem.measurements
    N, rows = op.N, op.rows
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        zero = ComplexSignal(np.zeros(N, dtype=complex), "time")
        return SolutionReport(zero, 0, 0.0, 0.0, True, history=np.zeros(0), status="converged")

    if problem.sparsity_domain == "time":
        def project(u):
            U = np.fft.fft(u, norm="ortho")
            U[rows] = b
            return np.fft.ifft(U, norm="ortho")
    else:
        def project(u):
            u = u.copy()
            u[rows] = b
            return u

    # Threshold proportional to the data scale keeps the iteration 1-homogeneous.
    t0 = bnorm / np.sqrt(N)
    t = t0 / config.penalty
    lam = config.relaxation
    y = project(np.zeros(N, dtype=complex))
    u = np.zeros(N, dtype=complex)
    history = np.empty(config.max_iterations)
    residual = np.inf
    best, best_obj = y, np.inf
    it = 0
    for it in range(1, config.max_iterations + 1):
        x = project(y - u)
        xr = lam * x + (1 - lam) * y
        y_new = soft_threshold(xr + u, t)
        u = u + xr - y_new
        r = np.linalg.norm(x - y_new)
        dual = np.linalg.norm(y_new - y)
        y = y_new
        residual = max(r, dual) / bnorm
        # Every x is feasible, so the incumbent is the best feasible point seen;
        # the raw splitting objective is not monotone.
        obj = np.abs(x).sum()
        if obj <= best_obj:
            best, best_obj = x, obj
        history[it - 1] = best_obj
        if residual <= config.tolerance:
            break
        if it <= _ADAPT_UNTIL and it % _ADAPT_EVERY == 0:
            rp, rd = r / t0, dual / t
            if rp > _BALANCE * rd:
                t /= _STEP
                u /= _STEP
            elif rd > _BALANCE * rp:
                t *= _STEP
                u *= _STEP
    history = history[:it]

    x = best
    s = x if problem.sparsity_domain == "time" else np.fft.ifft(x, norm="ortho")
    converged = bool(residual <= config.tolerance)
    return SolutionReport(
        solution=ComplexSignal(s, "time"),
        iterations_used=it,
        final_residual=float(residual),
        objective=float(best_obj),
        converged=converged,
        history=history,
        status="converged" if converged else "max_iterations",
    )


def support_of(values: np.ndarray, rel_tol: float = 1e-4) -> tuple[int, ...]:
    """Indices whose modulus exceeds `rel_tol` times the largest modulus."""
    mag = np.abs(np.asarray(values))
    if mag.size == 0 or mag.max() == 0:
        return ()
    return tuple(int(i) for i in np.flatnonzero(mag > rel_tol * mag.max()))


def solve_l0_bruteforce(problem: BasisPursuitProblem, k_max: int,
                        tolerance: float = 1e-9) -> SolutionReport:
    """Sparsest exactly-consistent solution by exhaustive support search.

    Supports are tried in order of size, and lexicographically within a size.
    Among feasible supports of the smallest size the one with the smallest L1
    norm wins; exact L1 ties keep the lexicographically first support.
    """
    N = problem.N
    if N > 24 or k_max > 3:
        raise ValueError("brute force is limited to N <= 24 and k_max <= 3")
    b = problem.measurements
    bnorm = np.linalg.norm(b)
    rows = problem.operator.rows
    # Columns of the constraint matrix in the sparsity domain.
    if problem.sparsity_domain == "time":
        C = dft_matrix(N)[rows]
    else:
        C = np.eye(N, dtype=complex)[rows]

    def to_time(u):
        return u if problem.sparsity_domain == "time" else np.fft.ifft(u, norm="ortho")

    if bnorm == 0:
        zero = np.zeros(N, dtype=complex)
        return SolutionReport(ComplexSignal(zero, "time"), 0, 0.0, 0.0, True, support=(),
                              status="converged")

    tried = 0
    for k in range(1, k_max + 1):
        best = None
        for supp in itertools.combinations(range(N), k):
            tried += 1
            sub = C[:, supp]
            coef, *_ = np.linalg.lstsq(sub, b, rcond=None)
            res = np.linalg.norm(sub @ coef - b) / bnorm
            if res > tolerance:
                continue
            l1 = float(np.abs(coef).sum())
            if best is None or l1 < best[0] * (1 - 1e-12):
                best = (l1, supp, coef, res)
        if best is not None:
            l1, supp, coef, res = best
            u = np.zeros(N, dtype=complex)
            u[list(supp)] = coef
            return SolutionReport(ComplexSignal(to_time(u), "time"), tried, float(res), l1,
                                  True, support=tuple(supp), status="converged")
    zero = np.zeros(N, dtype=complex)
    return SolutionReport(ComplexSignal(zero, "time"), tried, 1.0, 0.0, False,
                          status=f"infeasible up to sparsity {k_max}")

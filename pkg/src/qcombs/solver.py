"""Maximization of Tr[R Omega] over deterministic combs.

The feasible set is the intersection of the positive cone with the affine
causality set, and the objective is linear, so this is a semidefinite
program.  The default backend is an operator-splitting method (ADMM on the
consensus form X = Z) whose two half-steps are exactly the two cheap
projections already available: the closed-form affine projection and the
eigenvalue clip onto the positive cone.

Reported values are never read off a possibly-infeasible iterate.  At
regular checkpoints the affine-exact iterate is mixed toward the maximally
mixed comb just enough to clear its most negative eigenvalue, which yields
an exactly feasible point; the running best of these is the certified
value, so the (value, residual) trace is non-decreasing in value by
construction.

A matching upper bound comes from the dual side.  Functionals of the form
X -> Tr[X (alpha I + sum_n kron(Z_n, I))], with Z_n traceless over the
tooth-n output wire, are constant on the comb set (equal to alpha times
the fixed trace), so any such T with T - Omega >= 0 certifies
optimum <= alpha * trace_value.  The scaled ADMM dual variable converges
to Omega - T for the optimal T; projecting it back into the constraint
range and shifting along the identity until T - Omega is positive repairs
it into a valid certificate at any accuracy.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .comb import (
    CombStructure,
    ProbabilisticComb,
    QuantumComb,
    _affine_projection,
    _fresh_label,
    verify_causality,
)
from .errors import (
    BoundUnavailableError,
    DimOverflowError,
    InvalidBranchSumError,
    LabelMismatchError,
)
from .labeled import LabeledOperator, Wire
from .objective import PerformanceOperator

# Dense ADMM with one eigendecomposition per iteration; past this the
# iteration cost, not correctness, becomes the problem.
SOLVE_DIM_CAP = 1024

_OVER_RELAXATION = 1.6
_POLISH_EVERY = 10
_BALANCE_EVERY = 100
_WINDOW = 50


@dataclass(frozen=True)
class SdpProblem:
    """A linear objective over the combs of a fixed structure.

    seed is stored for interface stability; the splitting backend is
    deterministic and does not consume randomness.
    """

    omega: PerformanceOperator
    structure: CombStructure
    tol_feas: float = 1e-6
    tol_gap: float = 1e-6
    max_iters: int = 50000
    seed: int = 0

    def __post_init__(self):
        _check_wires(self.omega, self.structure)
        if not (self.tol_feas > 0 and self.tol_gap > 0):
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True, eq=False)
class SdpSolution:
    """Outcome of a solve run.

    R_star is exactly feasible (it passes verify_causality far inside
    tol_feas); value = Tr[R_star Omega].  gap_bound, when present, is the
    difference between a verified dual upper bound and value, so the true
    optimum lies in [value, value + gap_bound].  trace_log holds one
    (best feasible value, relative primal residual) row per iteration.
    """

    R_star: QuantumComb
    value: float
    feas_residual: float
    gap_bound: float | None
    iterations: int
    converged: bool
    trace_log: tuple[tuple[float, float], ...]
    dual_certificate: np.ndarray | None = None

    def __repr__(self):
        tag = "converged" if self.converged else "not converged"
        gap = "n/a" if self.gap_bound is None else f"{self.gap_bound:.2e}"
        return (
            f"SdpSolution(value={self.value:.9f}, gap_bound={gap}, "
            f"iters={self.iterations}, {tag})"
        )


def _check_wires(omega: PerformanceOperator, structure: CombStructure) -> None:
    got = set(omega.omega.labels)
    want = set(structure.labels)
    if got != want:
        raise LabelMismatchError(
            f"objective wires {sorted(got)} do not match the structure wires "
            f"{sorted(want)}"
        )
    for w in structure.wires:
        if omega.omega.wire(w.label).dim != w.dim:
            raise LabelMismatchError(
                f"wire {w.label!r} has dim {omega.omega.wire(w.label).dim} on "
                f"the objective but {w.dim} in the structure"
            )


def _pair(a: np.ndarray, b: np.ndarray) -> float:
    """Tr[a b] for Hermitian a, b."""
    return float(np.einsum("ij,ji->", a, b).real)


def _psd_part(mat: np.ndarray) -> np.ndarray:
    h = (mat + mat.conj().T) / 2.0
    w, v = np.linalg.eigh(h)
    return (v * np.clip(w, 0.0, None)) @ v.conj().T


def _polish(x: np.ndarray, mixed: np.ndarray, floor: float) -> np.ndarray:
    """Mix an affine-exact iterate toward the maximally mixed comb until
    positive.  Affine combinations stay on the affine set, and the mixing
    weight is the smallest that lifts the most negative eigenvalue to zero.
    """
    lo = float(np.linalg.eigvalsh(x)[0])
    if lo >= 0.0:
        return x
    beta = -lo / (floor - lo)
    return (1.0 - beta) * x + beta * mixed


def _dual_range_projection(mat: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    """Project onto the span of the causality constraint functionals.

    That span is the identity line plus the ranges of the mutually
    orthogonal projectors G_n subtracted inside _affine_projection, so it
    is the orthogonal complement of the affine set's direction space.
    """
    D = mat.shape[0]
    tr = float(np.trace(mat).real)
    centered = _affine_projection(mat, dims, tr)
    return mat - centered + (tr / D) * np.eye(D)


def _build_certificate(
    om: np.ndarray, u_scaled: np.ndarray, dims: Sequence[int], trace_value: float
):
    """Repair the ADMM dual variable into a valid upper-bound certificate.

    Returns (T, bound) with T in the constraint range and T - Omega >= 0,
    or (None, None) if the arithmetic degenerated.
    """
    D = om.shape[0]
    cand = om - u_scaled
    cand = _dual_range_projection((cand + cand.conj().T) / 2.0, dims)
    lo = float(np.linalg.eigvalsh(cand - om)[0])
    if lo < 0.0:
        cand = cand + (-lo) * np.eye(D)
    bound = float(np.trace(cand).real) * trace_value / D

    # The flat certificate lambda_max(Omega) * I is always valid; keep
    # whichever is tighter.
    flat = float(np.linalg.eigvalsh(om)[-1])
    if flat * trace_value < bound:
        cand = flat * np.eye(D)
        bound = flat * trace_value
    if not np.isfinite(bound):
        return None, None
    return cand, bound


def solve(p: SdpProblem) -> SdpSolution:
    """Maximize Tr[R Omega] over deterministic combs on p.structure.

    Deterministic: identical problems produce identical trace logs.  On
    hitting max_iters the best feasible iterate is still returned, with
    converged = False.
    """
    structure = p.structure
    D = structure.dim
    if D > SOLVE_DIM_CAP:
        raise DimOverflowError(
            f"solve supports dimension up to {SOLVE_DIM_CAP}, got {D}"
        )
    dims = structure.dims
    tv = float(structure.trace_value)
    om = p.omega.omega.permuted(structure.labels).matrix
    om = (om + om.conj().T) / 2.0

    eye = np.eye(D)
    mixed = (tv / D) * eye
    floor = tv / D

    x = mixed.copy()
    z = mixed.copy()
    u = np.zeros((D, D), dtype=complex)
    rho = 1.0

    best_mat = mixed
    best_val = _pair(mixed, om)
    best_vals: list[float] = []
    trace_log: list[tuple[float, float]] = []
    converged = False
    k = 0

    for k in range(1, p.max_iters + 1):
        w_in = z - u + om / rho
        w_in = (w_in + w_in.conj().T) / 2.0
        x = _affine_projection(w_in, dims, tv)

        xh = _OVER_RELAXATION * x + (1.0 - _OVER_RELAXATION) * z
        z_prev = z
        z = _psd_part(xh + u)
        u = u + xh - z

        r = float(np.linalg.norm(x - z))
        s = rho * float(np.linalg.norm(z - z_prev))
        scale = 1.0 + max(float(np.linalg.norm(x)), float(np.linalg.norm(z)))
        r_rel = r / scale
        s_rel = s / (1.0 + rho * float(np.linalg.norm(u)))

        if k == 1 or k % _POLISH_EVERY == 0 or k == p.max_iters:
            cand = _polish(x, mixed, floor)
            val = _pair(cand, om)
            if val > best_val:
                best_val = val
                best_mat = cand
        best_vals.append(best_val)
        trace_log.append((best_val, r_rel))

        if (
            k > _WINDOW
            and r_rel <= p.tol_feas
            and s_rel <= p.tol_feas
            and best_vals[-1] - best_vals[-1 - _WINDOW]
            <= p.tol_gap * (1.0 + abs(best_vals[-1]))
        ):
            converged = True
            break

        if k % _BALANCE_EVERY == 0:
            if r > 10.0 * s and rho < 1e4:
                rho *= 2.0
                u /= 2.0
            elif s > 10.0 * r and rho > 1e-4:
                rho /= 2.0
                u *= 2.0

    cand = _polish(x, mixed, floor)
    val = _pair(cand, om)
    if val > best_val:
        best_val = val
        best_mat = cand

    cert, bound = _build_certificate(om, rho * u, dims, tv)
    gap = None if bound is None else max(bound - best_val, 0.0)

    R_star = QuantumComb(LabeledOperator(structure.wires, best_mat), structure)
    report = verify_causality(R_star.op, structure)
    feas = max(
        max(report.residuals),
        max(0.0, -report.min_eigenvalue),
        report.hermiticity,
    )
    return SdpSolution(
        R_star=R_star,
        value=best_val,
        feas_residual=feas,
        gap_bound=gap,
        iterations=k,
        converged=converged,
        trace_log=tuple(trace_log),
        dual_certificate=cert,
    )


def dual_bound(p: SdpProblem, candidate: SdpSolution) -> float:
    """Verified upper bound on the optimum of p from a solved candidate.

    Re-checks, independently of the solve run, that the stored certificate
    T lies in the constraint range and dominates Omega; only then is
    Tr[T] * trace_value / D a sound bound.  Raises BoundUnavailableError
    when no certificate is stored or it fails either check.
    """
    cert = candidate.dual_certificate
    if cert is None:
        raise BoundUnavailableError("the candidate carries no dual certificate")
    if not np.all(np.isfinite(cert)):
        raise BoundUnavailableError("the dual certificate is not finite")
    structure = p.structure
    D = structure.dim
    om = p.omega.omega.permuted(structure.labels).matrix
    om = (om + om.conj().T) / 2.0
    scale = 1.0 + float(np.linalg.norm(cert))
    tol = 1e-8 * scale
    if float(np.linalg.norm(cert - cert.conj().T)) > tol:
        raise BoundUnavailableError("the dual certificate is not Hermitian")
    if float(np.linalg.norm(cert - _dual_range_projection(cert, structure.dims))) > tol:
        raise BoundUnavailableError(
            "the dual certificate leaves the constraint range, so it is not "
            "constant on the comb set"
        )
    lo = float(np.linalg.eigvalsh(cert - om)[0])
    if lo < -tol:
        raise BoundUnavailableError(
            f"the dual certificate does not dominate the objective "
            f"(min eigenvalue {lo:.3e})"
        )
    return float(np.trace(cert).real) * structure.trace_value / D


def solve_probabilistic(
    omegas: Sequence[PerformanceOperator],
    structure: CombStructure,
    tol_feas: float = 1e-6,
    tol_gap: float = 1e-6,
    max_iters: int = 50000,
    seed: int = 0,
) -> ProbabilisticComb:
    """Maximize sum_i Tr[R_i Omega_i] over comb-shaped instruments.

    The branches are bundled into one deterministic comb whose last output
    carries an orthogonal outcome register (the register_comb layout), the
    block-diagonal objective sum_i Omega_i (x) |i><i| is solved as a single
    deterministic problem, and the register blocks of the optimizer are the
    optimal branches.
    """
    omegas = list(omegas)
    if not omegas:
        raise InvalidBranchSumError("need at least one branch objective")
    for po in omegas:
        _check_wires(po, structure)
    k = len(omegas)

    last_in, last_out = structure.teeth[-1]
    reg = Wire(_fresh_label("reg", set(structure.labels)), k)
    merged_wire = Wire(last_out.label, last_out.dim * k)

    acc = None
    for i, po in enumerate(omegas):
        proj = np.zeros((k, k), dtype=complex)
        proj[i, i] = 1.0
        term = po.omega.permuted(structure.labels).tensor(
            LabeledOperator((reg,), proj)
        )
        acc = term if acc is None else acc + term
    merged = acc.merge_wires([last_out.label, reg.label], merged_wire)

    big_structure = CombStructure(structure.teeth[:-1] + ((last_in, merged_wire),))
    problem = SdpProblem(
        PerformanceOperator(merged.permuted(big_structure.labels), big_structure),
        big_structure,
        tol_feas=tol_feas,
        tol_gap=tol_gap,
        max_iters=max_iters,
        seed=seed,
    )
    sol = solve(problem)

    mat = sol.R_star.op.matrix
    rest = structure.dim // last_out.dim
    x6 = mat.reshape(rest, last_out.dim, k, rest, last_out.dim, k)
    branches = []
    for i in range(k):
        block = x6[:, :, i, :, :, i].reshape(structure.dim, structure.dim)
        branches.append((str(i), LabeledOperator(structure.wires, block)))
    return ProbabilisticComb(branches, structure, tol=10.0 * tol_feas)

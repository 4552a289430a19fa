"""Haar-averaged performance operators for gate cloning and gate learning.

Every figure of merit in this package has the shape

    F(R) = E_U ⟨Psi_U| R |Psi_U⟩ / prefactor,

a Haar average of a sandwich between product vectors built from |U⟩⟩ and
|U*⟩⟩ blocks.  Averaging commutes with the sandwich, so F(R) = Tr[R Omega]
for a fixed Hermitian operator Omega, and maximizing F over causal combs
is a linear objective over a convex set.

The average is computed exactly, never by Monte-Carlo: the integrand is a
balanced polynomial of degree t in the entries of U and of its conjugate,
so averaging over any unitary t-design equals the Haar average.  For
qubits with t <= 3 the single-qubit Clifford group (24 elements, a
3-design) is summed directly; for every other case the twirl is evaluated
as the orthogonal projection onto the span of (partially transposed)
permutation operators, which is the image of the Haar twirl in any
dimension and degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import Sequence

import numpy as np

from .comb import MAX_DIM, CombStructure
from .errors import (
    DesignInsufficientError,
    DimOverflowError,
    LabelMismatchError,
    NotHermitianError,
    UnsupportedError,
)
from .labeled import LabeledOperator, LabeledVector, Wire

TAGS = ("U", "U*", "none")


# ---------------------------------------------------------------------------
# Averaging designs


@lru_cache(maxsize=None)
def clifford_group() -> tuple[np.ndarray, ...]:
    """The 24 single-qubit Clifford unitaries, one per phase class.

    Generated by breadth-first products of the Hadamard and phase gates,
    deduplicated after fixing the global phase against the first entry of
    largest magnitude.
    """
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    s = np.array([[1, 0], [0, 1j]], dtype=complex)

    def canon(u: np.ndarray) -> bytes:
        k = int(np.argmax(np.abs(u).ravel() > 0.1))
        i, j = divmod(k, 2)
        v = np.round(u / (u[i, j] / abs(u[i, j])), 6) + (0.0 + 0.0j)
        return v.tobytes()

    found = {canon(np.eye(2)): np.eye(2, dtype=complex)}
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        fresh = []
        for g in frontier:
            for gen in (h, s):
                cand = gen @ g
                key = canon(cand)
                if key not in found:
                    found[key] = cand
                    fresh.append(cand)
        frontier = fresh
    group = tuple(found.values())
    assert len(group) == 24
    return group


def _permutation_operator(perm: Sequence[int], d: int) -> np.ndarray:
    """Operator permuting t tensor factors: |i_1..i_t> -> factor k of the
    output takes factor perm[k] of the input."""
    t = len(perm)
    p = np.eye(d**t).reshape((d,) * (2 * t))
    p = np.transpose(p, axes=list(perm) + list(range(t, 2 * t)))
    return p.reshape(d**t, d**t)


def _partial_transpose(mat: np.ndarray, positions: Sequence[int], t: int, d: int) -> np.ndarray:
    x = mat.reshape((d,) * (2 * t))
    for p in positions:
        x = np.swapaxes(x, p, t + p)
    return x.reshape(d**t, d**t)


def _cycle_count(perm: Sequence[int]) -> int:
    seen = [False] * len(perm)
    cycles = 0
    for start in range(len(perm)):
        if seen[start]:
            continue
        cycles += 1
        j = start
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return cycles


@lru_cache(maxsize=None)
def _commutant_basis(d: int, t: int, conj_positions: tuple[int, ...]):
    """Spanning set of the fixed-point algebra of the mixed twirl, plus the
    pseudo-inverse of its Gram matrix.

    The twirl by U applied at every position (conjugated at conj_positions)
    is the orthogonal projection onto the span of the permutation operators
    partially transposed at those positions; partial transposition is a
    Hilbert-Schmidt isometry, so the Gram matrix keeps the plain form
    d^(number of cycles).
    """
    perms = list(permutations(range(t)))
    basis = tuple(
        _partial_transpose(_permutation_operator(p, d), conj_positions, t, d)
        for p in perms
    )
    gram = np.empty((len(perms), len(perms)))
    for i, pi in enumerate(perms):
        inv = [0] * t
        for k, v in enumerate(pi):
            inv[v] = k
        for j, pj in enumerate(perms):
            composed = tuple(inv[pj[k]] for k in range(t))
            gram[i, j] = float(d) ** _cycle_count(composed)
    return basis, np.linalg.pinv(gram)


# ---------------------------------------------------------------------------
# Twirl specification and exact averaging


@dataclass(frozen=True)
class TwirlSpec:
    """Which factor of U^(x)a (x) conj(U)^(x)b acts on each wire.

    pattern lists (wire label, tag, copies) for the twirled wires; a tag of
    "U" or "U*" applies the unitary or its entrywise conjugate as a
    copies-fold tensor power on that wire (whose dimension must then be
    d**copies).  Wires absent from the pattern, or tagged "none", are left
    alone.  design selects the averaging scheme: "clifford" (qubits, degree
    at most 3), "commutant" (any dimension and degree), or "auto".
    """

    d: int
    pattern: tuple[tuple[str, str, int], ...]
    design: str = "auto"

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"dimension must be at least 2, got {self.d}")
        seen = set()
        for label, tag, copies in self.pattern:
            if tag not in TAGS:
                raise ValueError(f"unknown tag {tag!r} on wire {label!r}")
            if copies < 1:
                raise ValueError(f"copies must be >= 1 on wire {label!r}")
            if label in seen:
                raise ValueError(f"wire {label!r} repeats in the pattern")
            seen.add(label)
        if self.design not in ("auto", "clifford", "commutant"):
            raise ValueError(f"unknown design {self.design!r}")

    @property
    def degree(self) -> int:
        """Total polynomial degree t = a + b of the twirl."""
        return sum(c for _, tag, c in self.pattern if tag != "none")

    def resolved_design(self) -> str:
        if self.design == "auto":
            return "clifford" if (self.d == 2 and self.degree <= 3) else "commutant"
        if self.design == "clifford":
            if self.d != 2:
                raise DesignInsufficientError(
                    f"the Clifford design averages qubits only, got d = {self.d}"
                )
            if self.degree > 3:
                raise DesignInsufficientError(
                    f"the Clifford group is a 3-design; degree {self.degree} "
                    "needs the commutant scheme"
                )
        return self.design


@dataclass(frozen=True)
class PerformanceOperator:
    """Hermitian operator Omega with F(R) = Tr[R Omega], prefactors included,
    and, when produced for a concrete task, the comb wire layout it scores."""

    omega: LabeledOperator
    structure: CombStructure | None = None

    def __post_init__(self):
        if not self.omega.is_hermitian():
            raise NotHermitianError("a performance operator must be Hermitian")
        if self.structure is not None and set(self.omega.labels) != set(
            self.structure.labels
        ):
            raise LabelMismatchError(
                f"operator wires {sorted(self.omega.labels)} do not match the "
                f"structure wires {sorted(self.structure.labels)}"
            )

    def value(self, R: LabeledOperator) -> float:
        """Tr[R Omega] as a real number."""
        aligned = R.permuted(self.omega.labels)
        return float(np.trace(aligned.matrix @ self.omega.matrix).real)


def _split_pattern_wires(base: LabeledOperator, spec: TwirlSpec):
    """Split copies-fold wires into unit factors of dimension d.

    Returns the split operator, the list of (unit label, conjugated?) in
    order, and instructions to undo the split.
    """
    op = base
    units: list[tuple[str, bool]] = []
    merges: list[tuple[list[str], Wire]] = []
    for label, tag, copies in spec.pattern:
        if tag == "none":
            continue
        wire = op.wire(label)
        if wire.dim != spec.d**copies:
            raise LabelMismatchError(
                f"wire {label!r} has dim {wire.dim}, but the pattern promises "
                f"{spec.d}**{copies}"
            )
        if copies == 1:
            units.append((label, tag == "U*"))
            continue
        parts = [Wire(f"{label}#{i}", spec.d) for i in range(copies)]
        op = op.split_wire(label, parts)
        units.extend((p.label, tag == "U*") for p in parts)
        merges.append(([p.label for p in parts], wire))
    return op, units, merges


def haar_average(spec: TwirlSpec, base: LabeledOperator) -> PerformanceOperator:
    """E_U[ W(U) base W(U)^dagger ] with W(U) the per-wire action of spec.

    The average is exact (design summation or commutant projection, chosen
    by spec.design) and fixes precisely the operators commuting with every
    W(U); in particular it is idempotent and Hermiticity-preserving.
    """
    for label, _, _ in spec.pattern:
        if label not in base.labels:
            raise LabelMismatchError(f"pattern wire {label!r} not on the operator")
    if not base.is_hermitian():
        raise NotHermitianError("twirl input must be Hermitian")

    design = spec.resolved_design()
    op, units, merges = _split_pattern_wires(base, spec)
    if not units:
        return PerformanceOperator(base.hermitized())

    unit_labels = [lbl for lbl, _ in units]
    rest_labels = [lbl for lbl in op.labels if lbl not in set(unit_labels)]
    op = op.permuted(unit_labels + rest_labels)

    d = spec.d
    t = len(units)
    dt = d**t
    dr = op.dim // dt
    x4 = op.matrix.reshape(dt, dr, dt, dr)

    if design == "clifford":
        acc = np.zeros_like(op.matrix)
        for g in clifford_group():
            w = np.ones((1, 1), dtype=complex)
            for _, conj in units:
                w = np.kron(w, g.conj() if conj else g)
            rot = np.kron(w, np.eye(dr))
            acc += rot @ op.matrix @ rot.conj().T
        avg = acc / len(clifford_group())
    else:
        conj_positions = tuple(i for i, (_, c) in enumerate(units) if c)
        basis, gram_pinv = _commutant_basis(d, t, conj_positions)
        overlaps = [np.einsum("ji,jaib->ab", b.conj(), x4) for b in basis]
        avg = np.zeros_like(op.matrix)
        for i, b in enumerate(basis):
            coeff = sum(gram_pinv[i, j] * overlaps[j] for j in range(len(basis)))
            avg += np.kron(b, coeff)

    out = LabeledOperator(op.wires, avg).hermitized()
    for labels, wire in merges:
        first = out.labels.index(labels[0])
        order = list(out.labels[:first]) + labels + [
            lbl for lbl in out.labels[first:] if lbl not in labels
        ]
        out = out.permuted(order).merge_wires(labels, wire)
    return PerformanceOperator(out.permuted(base.labels))


# ---------------------------------------------------------------------------
# Task objectives


def _max_entangled_vec(out_wire: Wire, in_wire: Wire) -> LabeledVector:
    return LabeledVector((out_wire, in_wire), np.eye(out_wire.dim).reshape(-1))


@lru_cache(maxsize=None)
def cloning_objective(N: int, M: int, d: int) -> PerformanceOperator:
    """Operator scoring N -> M gate cloning boards.

    The board has N + 1 teeth: wire 0 (dim d^M) and wire 2N+1 (dim d^M) are
    the outer input and output, and the N slots in between each consume one
    use of the unknown gate U.  F(R) = Tr[R Omega] is the Haar-averaged
    fidelity between the M-fold output and U^(x)M applied to the outer
    wires, normalized so that a board reproducing U^(x)M exactly scores 1;
    with a single slot and a single target copy the pass-through board
    achieves that maximum.
    """
    if N < 1 or M < 1:
        raise ValueError(f"need N, M >= 1, got N={N}, M={M}")
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    D = d ** (2 * (M + N))
    if D > MAX_DIM:
        raise DimOverflowError(f"objective dimension {D} exceeds the cap {MAX_DIM}")

    dims = [d**M] + [d] * (2 * N) + [d**M]
    structure = CombStructure.standard(dims)
    w = structure.wires

    vec = _max_entangled_vec(w[2 * N + 1], w[0])
    for k in range(1, N + 1):
        vec = vec.tensor(_max_entangled_vec(w[2 * k], w[2 * k - 1]))
    base = vec.permuted(structure.labels).outer()

    pattern = [(w[2 * N + 1].label, "U", M)]
    pattern += [(w[2 * k].label, "U*", 1) for k in range(1, N + 1)]
    averaged = haar_average(TwirlSpec(d, tuple(pattern)), base).omega
    omega = (averaged * (1.0 / d ** (2 * M))).hermitized()
    return PerformanceOperator(omega, structure)


@lru_cache(maxsize=None)
def learning_objective(N: int, d: int) -> PerformanceOperator:
    """Operator scoring boards that learn a gate from N uses and replay it.

    The board's first N + 1 teeth bracket the N slots consuming the uses of
    U; the outer wires of those teeth are trivial (dimension 1).  The final
    tooth receives the replay input on wire 2N+2 and answers on wire 2N+3.
    F(R) = Tr[R Omega] is the Haar-averaged channel fidelity between the
    induced replay channel and U itself, normalized to 1 for a perfect
    replay.
    """
    if N < 1:
        raise ValueError(f"need N >= 1, got N={N}")
    if d < 2:
        raise ValueError(f"dimension must be at least 2, got {d}")
    D = d ** (2 * (N + 1))
    if D > MAX_DIM:
        raise DimOverflowError(f"objective dimension {D} exceeds the cap {MAX_DIM}")

    dims = [1] + [d] * (2 * N) + [1, d, d]
    structure = CombStructure.standard(dims)
    w = structure.wires

    vec = LabeledVector((w[0], w[2 * N + 1]), np.ones(1))
    for k in range(1, N + 1):
        vec = vec.tensor(_max_entangled_vec(w[2 * k], w[2 * k - 1]))
    vec = vec.tensor(_max_entangled_vec(w[2 * N + 3], w[2 * N + 2]))
    base = vec.permuted(structure.labels).outer()

    pattern = [(w[2 * k].label, "U*", 1) for k in range(1, N + 1)]
    pattern.append((w[2 * N + 3].label, "U", 1))
    averaged = haar_average(TwirlSpec(d, tuple(pattern)), base).omega
    omega = (averaged * (1.0 / d**2)).hermitized()
    return PerformanceOperator(omega, structure)


def estimation_reference(N: int, M: int, d: int) -> float:
    """Best cloning fidelity reachable by estimate-then-prepare strategies.

    Stored reference constants for the 1 -> 2 task only; used to report how
    far a coherent board beats the classical measure-and-rebuild bound.
    """
    if (N, M) != (1, 2):
        raise UnsupportedError(
            f"reference value known for (N, M) = (1, 2) only, got ({N}, {M})"
        )
    if d < 2:
        raise UnsupportedError(f"dimension must be at least 2, got {d}")
    if d == 2:
        return 5.0 / 16.0
    return 6.0 / d**4

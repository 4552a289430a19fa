"""Shared generators and independent oracles for the test suite.

Everything here deliberately avoids the code paths it is used to check:
the Monte-Carlo fidelity oracle composes circuits through link_product
and plain matrix sandwiches (never through the twirl construction), and
the brute-force channel search parameterizes Stinespring isometries
directly (never through the solver).
"""

from __future__ import annotations

from functools import reduce

import numpy as np
from scipy.optimize import minimize

from qcombs import (
    CombStructure,
    DimMismatchError,
    DimOverflowError,
    LabeledOperator,
    QuantumComb,
    Wire,
    ginibre,
    haar_isometry,
    haar_unitary,
    link_product,
    random_comb,
)


def rand_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = ginibre(dim, dim, rng)
    return (a + a.conj().T) / 2.0


def rand_kraus(d_in: int, d_out: int, rank: int, rng: np.random.Generator):
    """Kraus operators of a Haar-random channel of the given Kraus rank."""
    v = haar_isometry(d_out * rank, d_in, rng)
    return [v[e * d_out : (e + 1) * d_out, :] for e in range(rank)]


def sample_sequential_network(rng: np.random.Generator) -> QuantumComb:
    """A random 1-3 tooth comb with wire dims 2-3 and memory dims 2-4.

    Resamples combinations whose intermediate dimensions overflow the
    dense cap or whose memory is too small to carry the tooth isometry.
    """
    while True:
        n_teeth = int(rng.integers(1, 4))
        dims = [int(rng.integers(2, 4)) for _ in range(2 * n_teeth)]
        memory = [int(rng.integers(2, 5)) for _ in range(n_teeth - 1)]
        try:
            return random_comb(
                CombStructure.standard(dims), memory, seed=int(rng.integers(2**31))
            )
        except (DimOverflowError, DimMismatchError):
            continue


def learning_memory(n_uses: int) -> list[int]:
    """Memory dims that make random_comb feasible on the learning layout."""
    return [2] * n_uses + [4]


def conjugation_operator(base: LabeledOperator, mats: dict) -> LabeledOperator:
    """kron of per-wire unitaries (identity where unspecified), in base order."""
    factors = [
        mats.get(w.label, np.eye(w.dim)) for w in base.wires
    ]
    return LabeledOperator(base.wires, reduce(np.kron, factors))


def cloning_conjugation(base: LabeledOperator, U: np.ndarray, n: int, m: int):
    """The symmetry W(U) of the cloning figure of merit: U^(x)m on the final
    output, U-conjugate on each returned slot wire."""
    mats = {str(2 * n + 1): reduce(np.kron, [U] * m)}
    for k in range(1, n + 1):
        mats[str(2 * k)] = U.conj()
    return conjugation_operator(base, mats)


def learning_conjugation(base: LabeledOperator, U: np.ndarray, n: int):
    """The symmetry W(U) of the learning figure of merit."""
    mats = {str(2 * n + 3): U}
    for k in range(1, n + 1):
        mats[str(2 * k)] = U.conj()
    return conjugation_operator(base, mats)


def mc_gate_fidelity(
    comb: QuantumComb,
    n_uses: int,
    d: int,
    n_samples: int,
    seed: int,
):
    """Monte-Carlo estimate of the learning fidelity of a storage comb.

    For each Haar sample U the N uses are plugged into the first N slots
    through link_product, the retrieved operator is read off the last
    tooth, and the gate fidelity <<U| C'_U |U>> / d^2 is taken as a plain
    matrix sandwich.  Returns (mean, standard error).
    """
    rng = np.random.default_rng(seed)
    op = comb.op
    wires = []
    for k in range(n_uses):
        wires.append(Wire(str(2 * k + 2), d))
        wires.append(Wire(str(2 * k + 1), d))
    keep = [str(2 * n_uses + 2), str(2 * n_uses + 3)]
    out_dim = d * d  # retrieval tooth (in 2N+2, out 2N+3)
    vals = np.empty(n_samples)
    for s in range(n_samples):
        u = haar_unitary(d, rng)
        # Choi vector of one use of U on slot k lives on (out 2k+2, in 2k+1),
        # out-major, so it is just U.ravel(); N uses tensor together.
        ins = reduce(np.kron, [u.ravel()] * n_uses)
        inserted = LabeledOperator(tuple(wires), np.outer(ins, ins.conj()))
        res = link_product(op, inserted)
        # trailing wires all have dim 1, so the matrix stays out_dim x out_dim
        res = res.permuted(keep + [l for l in res.labels if l not in keep])
        # Sandwich vector on (in 2N+2, out 2N+3) wire order is U^T.ravel().
        t = u.T.ravel()
        vals[s] = np.einsum(
            "a,ab,b->", t.conj(), res.matrix.reshape(out_dim, out_dim), t
        ).real / d**2
    return float(vals.mean()), float(vals.std(ddof=1) / np.sqrt(n_samples))


def brute_force_channel_value(
    om: np.ndarray, d: int, seed: int, n_starts: int = 16
) -> float:
    """Best Tr[R om] over channel Chois on (in, out), via multistart search
    over Stinespring isometries of Kraus rank d (extreme points of the
    channel set have Kraus rank at most d, and a linear objective is
    maximized at an extreme point)."""
    rank = d
    half = rank * d * d
    rng = np.random.default_rng(seed)

    def value(x: np.ndarray) -> float:
        a = (x[:half] + 1j * x[half:]).reshape(rank * d, d)
        q, _ = np.linalg.qr(a)
        k = q.reshape(rank, d, d)
        choi = np.einsum("eai,ebj->iajb", k, k.conj()).reshape(d * d, d * d)
        return float(np.einsum("ij,ji->", choi, om).real)

    best = -np.inf
    for _ in range(n_starts):
        x0 = rng.standard_normal(2 * half)
        res = minimize(lambda x: -value(x), x0, method="L-BFGS-B")
        best = max(best, -res.fun)
    return best

"""Composition of labeled operators by contraction over shared wires.

Two operators compose by tracing out the wires they share, with a partial
transpose applied to the first operator's copy of the shared wires.  With
Choi operators this reproduces channel composition: connecting an output
wire of one circuit fragment to the equally labeled input wire of another
yields the fragment obtained by plugging them together.

The contraction is symmetric (up to wire reordering) and associative over
networks where every label occurs in at most two parts, so a network of
fragments can be assembled pairwise in any order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimMismatchError, TripleLabelError
from .labeled import LabeledOperator


def _shared_labels(a: LabeledOperator, b: LabeledOperator) -> list[str]:
    shared = [lbl for lbl in a.labels if lbl in set(b.labels)]
    for lbl in shared:
        if a.wire(lbl).dim != b.wire(lbl).dim:
            raise DimMismatchError(
                f"shared wire {lbl!r} has dimension {a.wire(lbl).dim} on one "
                f"side and {b.wire(lbl).dim} on the other"
            )
    return shared


def link_product(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    """Contract two labeled operators over their shared wires.

    Disjoint label sets degenerate to the tensor product; fully shared
    label sets produce a scalar operator (empty wire tuple).

    The result carries the surviving wires in the order: wires only on
    ``a``, then wires only on ``b``.
    """
    shared = _shared_labels(a, b)
    a_only = [lbl for lbl in a.labels if lbl not in shared]
    b_only = [lbl for lbl in b.labels if lbl not in shared]

    # Pad each side with identities on the other's private wires, align the
    # wire order, transpose the first factor's shared wires, multiply, and
    # trace the shared wires out.
    order = a_only + shared + b_only
    b_pad_wires = tuple(a.wire(lbl) for lbl in a_only)
    a_pad_wires = tuple(b.wire(lbl) for lbl in b_only)
    a_full = a if not a_pad_wires else a.tensor(LabeledOperator.identity(a_pad_wires))
    b_full = b if not b_pad_wires else LabeledOperator.identity(b_pad_wires).tensor(b)
    a_full = a_full.permuted(order).ptranspose(shared)
    b_full = b_full.permuted(order)
    prod = a_full @ b_full
    return prod.ptrace(shared)


def _link_einsum(a: LabeledOperator, b: LabeledOperator) -> LabeledOperator:
    """Same contraction as :func:`link_product` without identity padding.

    Internal alternative used to cross-check the padded route; contracts
    the shared wires directly.
    """
    shared = _shared_labels(a, b)
    a_only = [lbl for lbl in a.labels if lbl not in shared]
    b_only = [lbl for lbl in b.labels if lbl not in shared]

    na = len(a.wires)
    nb = len(b.wires)
    a_view = a.matrix.reshape(a.dims + a.dims)
    b_view = b.matrix.reshape(b.dims + b.dims)

    # Subscript plan: every wire slot gets an integer axis id.  For a wire j
    # shared between the factors, the transpose-then-trace rule contracts
    # a's row index of j with b's column index of j, and a's column index
    # of j with b's row index of j.
    next_id = 0

    def fresh():
        nonlocal next_id
        next_id += 1
        return next_id - 1

    a_row = {}
    a_col = {}
    for w in a.wires:
        a_row[w.label] = fresh()
        a_col[w.label] = fresh()
    b_row = {}
    b_col = {}
    for w in b.wires:
        if w.label in shared:
            b_row[w.label] = a_col[w.label]
            b_col[w.label] = a_row[w.label]
        else:
            b_row[w.label] = fresh()
            b_col[w.label] = fresh()

    a_subs = [a_row[w.label] for w in a.wires] + [a_col[w.label] for w in a.wires]
    b_subs = [b_row[w.label] for w in b.wires] + [b_col[w.label] for w in b.wires]
    out_rows = [a_row[lbl] for lbl in a_only] + [b_row[lbl] for lbl in b_only]
    out_cols = [a_col[lbl] for lbl in a_only] + [b_col[lbl] for lbl in b_only]

    res = np.einsum(a_view, a_subs, b_view, b_subs, out_rows + out_cols)
    wires = tuple(a.wire(lbl) for lbl in a_only) + tuple(b.wire(lbl) for lbl in b_only)
    d = int(np.prod([w.dim for w in wires], dtype=np.int64)) if wires else 1
    return LabeledOperator(wires, res.reshape(d, d))


@dataclass(frozen=True)
class Network:
    """An unordered collection of labeled operators to be contracted.

    Every label may occur in at most two parts; a label occurring twice is
    an internal wire, a label occurring once stays open.
    """

    parts: tuple[LabeledOperator, ...]

    def __init__(self, parts: Sequence[LabeledOperator]):
        parts = tuple(parts)
        counts: dict[str, int] = {}
        for p in parts:
            for lbl in p.labels:
                counts[lbl] = counts.get(lbl, 0) + 1
        bad = sorted(lbl for lbl, c in counts.items() if c > 2)
        if bad:
            raise TripleLabelError(
                f"labels {bad} occur in more than two parts"
            )
        # Dimensions of internal wires must agree; checked pairwise here so
        # assembly cannot fail halfway through.
        for i, p in enumerate(parts):
            for q in parts[i + 1 :]:
                _shared_labels(p, q)
        object.__setattr__(self, "parts", parts)

    @property
    def open_labels(self) -> tuple[str, ...]:
        counts: dict[str, int] = {}
        for p in self.parts:
            for lbl in p.labels:
                counts[lbl] = counts.get(lbl, 0) + 1
        out = []
        for p in self.parts:
            for lbl in p.labels:
                if counts[lbl] == 1:
                    out.append(lbl)
        return tuple(out)


def assemble(net: Network) -> LabeledOperator:
    """Contract all parts of a network into a single labeled operator.

    Folds :func:`link_product` over the parts from the left; by
    associativity and symmetry of the contraction the part order does not
    change the result beyond wire ordering.
    """
    if not net.parts:
        return LabeledOperator.scalar(1.0)
    acc = net.parts[0]
    for p in net.parts[1:]:
        acc = link_product(acc, p)
    return acc

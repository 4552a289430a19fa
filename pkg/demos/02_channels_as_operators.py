"""Channels as positive operators.

A channel becomes an operator on (out, in) by acting on half of a
maximally entangled pair.  Once in that form, feeding a state through the
channel, composing two channels, or plugging the channel into a larger
network are all the same operation: a link product.
"""

import numpy as np

from qcombs import (
    KrausMap,
    Wire,
    apply_choi,
    choi_to_kraus,
    haar_isometry,
    is_channel,
    kraus_to_choi,
    link_product,
    LabeledOperator,
)

rng = np.random.default_rng(11)

# An amplitude-damping qubit channel, written with two Kraus operators.
gamma = 0.3
k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]])
k1 = np.array([[0, np.sqrt(gamma)], [0, 0]])
damp = KrausMap(Wire("in", 2), Wire("out", 2), [k0, k1])

choi = kraus_to_choi(damp)
print("operator form lives on", choi.op.labels)
ok, deviation = is_channel(choi)
print(f"is a channel: {ok} (deviation {deviation:.2e})")

rho = np.array([[0.25, 0.1j], [-0.1j, 0.75]])
via_choi = apply_choi(choi, rho)
via_kraus = k0 @ rho @ k0.conj().T + k1 @ rho @ k1.conj().T
print("action agreement:", np.linalg.norm(via_choi - via_kraus))

# The same action as a link product: put the state on "in" and contract.
state = LabeledOperator((Wire("in", 2),), rho)
pushed = link_product(state, choi.op).permuted(("out",))
print("link-product action gap:", np.linalg.norm(pushed.matrix - via_kraus))

# Composition is a link product over the shared wire.
v = haar_isometry(2, 2, rng)
second = kraus_to_choi(KrausMap(Wire("out", 2), Wire("final", 2), [v]))
composed = link_product(choi.op, second.op)
print("composed channel lives on", sorted(composed.labels))

# Kraus operators can be recovered from the operator form (up to the usual
# unitary freedom); rebuilding the operator from them is exact.
recovered = choi_to_kraus(choi)
print("recovered", len(recovered.kraus), "Kraus operators")
print("roundtrip gap:", (kraus_to_choi(recovered).op - choi.op).norm())

"""How the see-saw search hunts for a negative product-state expectation.

Block positivity cannot be decided in general, so the library only refutes it
by exhibiting a product state.  This script shows the individual restarts on
the two-step operator and the final verdict, then a block-positive primitive
where the search finds nothing and the registry has to step in.
"""

import numpy as np

from seqlocc import (
    ConeParams,
    analyze_cone,
    example1_witness_operator,
    known_primitive_bp,
)
from seqlocc.cone import seesaw_descent
from seqlocc.operators import ProductPureState, as_party_major, expectation

op = as_party_major(example1_witness_operator(2, 2))
rng = np.random.default_rng(1)
print("restart  first value  final value  party updates")
for k in range(6):
    start = ProductPureState.normalized(
        [rng.standard_normal(n) + 1j * rng.standard_normal(n) for n in op.structure.local_dims]
    )
    _, history = seesaw_descent(op, start, iters=200)
    print(f"{k:7d}  {history[0]:+.8f}  {history[-1]:+.8f}  {len(history):6d}")

verdict = analyze_cone(op)
print(f"\nverdict {verdict.status.value} with witness value {verdict.witness_value:+.10f}")
print(f"recomputed from the witness: {expectation(op, verdict.witness):+.10f}")

prim = known_primitive_bp(2, 2)
for allow in (False, True):
    v = analyze_cone(prim, ConeParams(allow_primitives=allow))
    print(f"identity minus 2 GHZ, primitives {'on ' if allow else 'off'}: {v.status.value} (best found {v.best_found})")

"""A sequence that factorizes even though LOCC is strictly worse than global.

Four states per step: two product basis states, the GHZ state and the
complement of the GHZ-plus-basis space.  A local measurement that reads every
party in the computational basis gets D/(D+d) per step.  An explicit separable
dual certificate shows that the L-fold value is exactly the L-th power, while
the global optimum stays strictly above and the best prior strictly below.
"""

from seqlocc import (
    SequenceEnsemble,
    build_example2_certificate,
    example2_ensemble,
    example2_measurement,
    max_prior,
    product_measurement,
    solve_pg,
    success_probability,
    verify_theorem4_certificate,
)

m, d, L = 2, 2, 2
D = d**m
step = example2_ensemble(m, d)
local = success_probability(step, example2_measurement(m, d))
print(f"one step: max prior {max_prior(step)[0]:.6f} < p_L {local:.6f} < p_G {solve_pg(step).value:.6f}")

se = SequenceEnsemble.copies(step, L)
cert = build_example2_certificate(d, m, L)
result = verify_theorem4_certificate(se, cert)
print(f"\n{L} steps: separable certificate {result.status.value}")
print(f"  trace(H) = {cert.H.trace():.6f} = (D/(D+d))^L = {(D / (D + d)) ** L:.6f}")
print(f"  largest slackness residual {max(abs(r) for r in cert.residuals.values()):.1e}")
counts = {}
for c, t in cert.ghz_counts.items():
    counts[t] = counts.get(t, 0) + 1
print(f"  indices by number of GHZ labels: {dict(sorted(counts.items()))}")
seq = success_probability(se, product_measurement(cert.measurements))
print(f"  per-step local measurement on the sequence achieves {seq:.6f}")

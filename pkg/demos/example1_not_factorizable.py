"""Two GHZ-mixture steps whose LOCC guessing probability does not factorize.

Each step mixes the GHZ state with white noise.  One step on its own is
discriminated optimally by just guessing the likelier state, and the
identity-minus-GHZ primitive proves it.  Two copies are different: a product
state across the two steps (a GHZ pair per party) makes the relevant operator
negative, so guessing is no longer optimal and the product of step values
undercuts the sequence value.
"""

from seqlocc import (
    ConeParams,
    ReportOptions,
    SequenceEnsemble,
    assemble_report,
    check_theorem1,
    example1_ensemble,
    example1_sigma,
    example1_witness_operator,
    solve_pg,
)

m, d = 2, 2
D = d**m
step = example1_ensemble(m, d)
print(f"priors {step.priors}, parties {step.structure.party_dims}")

single = check_theorem1(step, 1, ConeParams())
print(f"one step: guessing is LOCC-optimal? {single.status.value}")
print(f"  p_L = {single.values['p_L']:.6f}  (2D/(d+3D) = {2 * D / (d + 3 * D):.6f})")
print(f"  p_G = {solve_pg(step).value:.6f}  (global optimum, strictly larger)")

sigma = example1_sigma(m, d)
w = example1_witness_operator(m, d)
print(f"\nGHZ-pair product state against the two-step operator: {sigma.inner(w):+.6f}")

se = SequenceEnsemble.copies(step, 2)
report = assemble_report(se, ReportOptions(exhaustive=True))
t2 = report.conditions["theorem2"]
print(f"two steps: guessing optimal? {t2.status.value}; refuted at {t2.evidence['refuted']}")
b = report.bounds
print(f"  product of step p_L = {b.step_product_lower:.6f}")
print(f"  sequence p_L lies in ({b.step_product_lower:.6f}, {b.p_L_upper:.6f}]")
print(f"factorizable: {report.factorizable.value}")

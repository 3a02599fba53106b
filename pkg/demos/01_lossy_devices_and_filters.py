"""A lossy detector is a filter followed by a measurement that always fires.

This walkthrough builds a finite-efficiency qubit device, looks at its raw
and post-selected statistics, and then splits it into its canonical
filter / lossless-measurement decomposition, checking that the two-stage
picture reproduces the original device exactly.
"""

import numpy as np

from fairsamp import (
    canonical_decomposition,
    projective_qubit_device,
    verify_recomposition,
)

# A polarization-style qubit measurement that only clicks 40% of the time.
dev = projective_qubit_device({"z": 0.0, "x": np.pi / 2.0}, efficiency=0.4)
print("settings:", dev.settings, "| outcomes:", dev.outcomes, "+ noclick")

rho = np.array([[0.75, 0.25], [0.25, 0.25]], dtype=complex)
print("\nraw statistics at setting 'z':")
for outcome, p in dev.outcome_distribution("z", rho).items():
    print(f"  {outcome:8s} {p:.6f}")

print("\nafter discarding the no-click rounds:")
for outcome, p in dev.postselected_distribution("z", rho).items():
    print(f"  {outcome:8s} {p:.6f}")

# The same device as a two-stage process: a probabilistic filter that accepts
# or rejects, then a measurement acting only on accepted states.
decomp = canonical_decomposition(dev)
f = decomp.filters["z"]
print("\naccepting Kraus operator at 'z' (sqrt of the click element):")
print(np.round(f.kraus_click.real, 6))
print("filter acceptance on our state:", round(f.acceptance(rho), 6))

print("\nlossless measurement elements at 'z':")
for outcome in dev.outcomes:
    print(f"  {outcome}:")
    print(np.round(decomp.lossless.element("z", outcome).real, 6))

worst = verify_recomposition(dev, decomp, trials=200, seed=0)
print(f"\nmax |recomposed - direct| probability over 200 random states: {worst:.2e}")
assert worst <= 1e-9
print("the two descriptions are operationally identical")

"""When is it safe to throw away the no-click rounds?

Post-selection is harmless exactly when the device's click elements are
proportional across settings: losses then factor into a setting-dependent
coin flip and a state filter that does not care about the setting.  This
script classifies a few devices, shows the quantities extracted by the
verdict, and demonstrates the efficiency consistency checks that can be run
on observed data alone.
"""

import numpy as np

from fairsamp import (
    approximate_epsilon,
    check_exact,
    default_mq,
    necessary_conditions,
    projective_qubit_device,
    single_photon_analyser,
    tv_bound,
)


def show(name, verdict):
    print(f"{name:34s} weak={verdict.weak!s:5s} strong={verdict.strong!s:5s} "
          f"homogeneous={verdict.homogeneous!s:5s} epsilon={verdict.epsilon:.4g}")


# A flat 60%-efficiency measurement: losses ignore both setting and state.
flat = projective_qubit_device({"a": 0.0, "b": 1.1}, efficiency=0.6)
show("flat 60% qubit device", check_exact(flat))

# Equal detectors inside a polarization analyser: the click element is the
# same operator for every angle.
equal = single_photon_analyser(0.8, 0.0, [0.0, np.pi / 4.0])
show("analyser, matched detectors", check_exact(equal))

# Mismatched detectors: the click element now leans toward the measured
# angle, so the sampling is only approximately fair.
skewed = single_photon_analyser(0.8, 0.1, [0.0, np.pi / 4.0])
show("analyser, 10% detector mismatch", check_exact(skewed))
eps = approximate_epsilon(skewed, np.eye(2))
print(f"\ndeviation against the identity reference: epsilon = {eps:.6f}")
print(f"worst-case post-selection bias (total variation): {tv_bound(eps):.6f}")
print("reference operator chosen automatically:")
print(np.round(default_mq(skewed).real, 4))

# Efficiency tables measured against remote settings/outcomes must factorize
# under fair sampling.  Necessary, not sufficient.
print("\nconsistency of observed efficiency tables:")
factorizing = {x: {r: g * h for r, h in {"r0": 0.9, "r1": 0.5}.items()}
               for x, g in {"0": 0.5, "1": 0.3}.items()}
print("  factorizing table: ", necessary_conditions(factorizing, tol=1e-9))
generic = {"0": {"r0": 0.50, "r1": 0.40}, "1": {"r0": 0.30, "r1": 0.45}}
print("  non-factorizing:   ", necessary_conditions(generic, tol=1e-9))

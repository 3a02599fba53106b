"""Threshold detectors behind a polarizing beam splitter, photon by photon.

On the truncated two-mode Fock space the analyser's no-click element is a
product of per-detector miss probabilities, so everything is exact: no
truncation error, no sampling.  Matched detectors sample fairly at every
photon number; mismatched ones deviate by exactly (1 - eta) * delta / eta,
attained in the one-photon sector.
"""

import numpy as np

from fairsamp import (
    AnalyserSpec,
    TwoModeFock,
    analyser_device,
    analyser_epsilon_closed_form,
    analyser_mq,
    approximate_epsilon,
    check_exact,
    filtered_state,
    tv_bound,
)
from fairsamp.optics import sector_deviation_profile
from fairsamp.sampling import random_density

n_max = 4
fock = TwoModeFock(n_max)
print(f"truncation at {n_max} photons -> dimension {fock.dim}; vacuum is index 0")

spec = AnalyserSpec(eta1=0.8, eta2=0.8, angles=(0.0, np.pi / 8.0, np.pi / 4.0), n_max=n_max)
verdict = check_exact(analyser_device(spec))
print(f"matched detectors: weak={verdict.weak}, homogeneous={verdict.homogeneous}, "
      f"acceptance scale {verdict.classical_eff[next(iter(verdict.classical_eff))]:.4f}")

print("\ndetector mismatch sweep (numeric epsilon vs closed form):")
print(f"{'eta':>6} {'delta':>7} {'numeric':>12} {'closed form':>12} {'tv bound':>10}")
for eta in (0.5, 0.8, 0.95):
    for delta in (0.01, 0.1):
        eta1 = 1.0 - (1.0 - eta) * (1.0 + delta)
        dev = analyser_device(AnalyserSpec(eta1=eta1, eta2=eta, angles=(0.0, np.pi / 4.0), n_max=n_max))
        eps = approximate_epsilon(dev, analyser_mq(eta, n_max))
        closed = analyser_epsilon_closed_form(eta, delta)
        print(f"{eta:6.2f} {delta:7.2f} {eps:12.3e} {closed:12.3e} {tv_bound(eps):10.3e}")
        assert abs(eps - closed) <= 1e-9

profile = sector_deviation_profile(AnalyserSpec(eta1=0.79, eta2=0.8, angles=(0.0,), n_max=n_max))
print("\nper-photon-number deviation profile (single photons dominate):")
for n, value in profile.items():
    print(f"  n={n}: {value:.6f}")

# Post-selecting on a click is the same as measuring a filtered state with no
# vacuum component.
rng = np.random.default_rng(7)
rho = random_density(fock.dim, rng)
filtered, acceptance = filtered_state(analyser_mq(0.8, n_max), rho)
print(f"\nrandom input state: vacuum weight {rho[0, 0].real:.4f}, acceptance {acceptance:.4f}")
print(f"filtered state vacuum weight: {abs(filtered[0, 0]):.2e}")

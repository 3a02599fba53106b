"""Filter / lossless-measurement decomposition of a lossy device.

Any lossy device factors as a two-flag probabilistic filter followed by a
measurement that always fires on filtered states.  The canonical gauge uses
the symmetric square root of the click element, which makes the construction
deterministic; classical filters that scramble the setting can be brought to
a diagonal normal form without changing the composed statistics.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .device import NOCLICK, LossyDevice, LosslessDevice, ZeroAcceptanceError
from .linalg import as_operator, dagger, expect, sqrt_pinv_sqrt
from .sampling import verification_states

KRAUS_TOL = 1e-9


@dataclass(frozen=True)
class QuantumFilter:
    """Two-outcome Kraus pair: kraus_click fires on acceptance, kraus_noclick on loss."""

    kraus_click: np.ndarray
    kraus_noclick: np.ndarray

    def __post_init__(self):
        fc = as_operator(self.kraus_click)
        fn = as_operator(self.kraus_noclick)
        res = np.max(np.abs(dagger(fc) @ fc + dagger(fn) @ fn - np.eye(fc.shape[0])))
        if res > KRAUS_TOL:
            raise ValueError(f"Kraus completeness violated by {float(res):.3e}")

    @property
    def dim(self) -> int:
        return self.kraus_click.shape[0]

    def click_branch(self, rho: np.ndarray) -> np.ndarray:
        """Unnormalized post-filter state on acceptance."""
        return self.kraus_click @ rho @ dagger(self.kraus_click)

    def acceptance(self, rho: np.ndarray) -> float:
        return float(np.trace(self.click_branch(rho)).real)


@dataclass(frozen=True)
class ClassicalFilter:
    """Stochastic filter on the setting register.

    ``transition`` maps a requested setting to a sub-normalized distribution
    over actually-used settings; ``accept_prob`` gives the total acceptance
    per setting.  A diagonal filter has transition None.
    """

    accept_prob: Mapping[str, float]
    transition: Mapping[str, Mapping[str, float]] | None = None

    def __post_init__(self):
        for x, p in self.accept_prob.items():
            if not -1e-12 <= p <= 1.0 + 1e-12:
                raise ValueError(f"accept_prob[{x!r}] = {p!r} outside [0, 1]")
        if self.transition is not None:
            for x, row in self.transition.items():
                total = sum(row.values())
                if total > 1.0 + 1e-9 or any(p < -1e-12 for p in row.values()):
                    raise ValueError(f"transition row {x!r} is not sub-normalized")
                if abs(total - self.accept_prob[x]) > 1e-9:
                    raise ValueError(f"accept_prob[{x!r}] inconsistent with transition row sum")


@dataclass(frozen=True)
class FilterDecomposition:
    """Per-setting quantum filters plus the lossless device they feed."""

    filters: Mapping[str, QuantumFilter]
    lossless: LosslessDevice

    def probability(self, x: str, a: str, rho: np.ndarray) -> float:
        """Outcome probability of the recomposed device (filter, then measurement)."""
        filt = self.filters[x]
        branch = filt.click_branch(rho)
        if a == NOCLICK:
            return 1.0 - float(np.trace(branch).real)
        return expect(self.lossless.element(x, a), branch)


def canonical_decomposition(dev: LossyDevice) -> FilterDecomposition:
    """Split a device into sqrt-click filters and a unit-efficiency measurement.

    For each setting the filter's accepting Kraus operator is sqrt of the
    click element and the lossless POVM conjugates every good element by the
    pseudo-inverse square root, so the good outcomes sum to the click
    element's support projector.
    """
    filters: dict[str, QuantumFilter] = {}
    lossless_povm: dict[str, dict[str, np.ndarray]] = {}
    for x in dev.settings:
        m_click = dev.click_element(x)
        m_noclick = dev.noclick_element(x)
        sq_click, pinv_click = sqrt_pinv_sqrt(m_click)
        sq_noclick, _ = sqrt_pinv_sqrt(m_noclick)
        filters[x] = QuantumFilter(sq_click, sq_noclick)
        lossless_povm[x] = {
            a: pinv_click @ dev.element(x, a) @ pinv_click for a in dev.outcomes
        }
    lossless = LosslessDevice(dev.dim, dev.settings, dev.outcomes, lossless_povm)
    return FilterDecomposition(filters, lossless)


def verify_recomposition(
    dev: LossyDevice, decomp: FilterDecomposition, trials: int = 100, seed: int = 0
) -> float:
    """Max |recomposed - direct| outcome probability over random input states."""
    rng = np.random.default_rng(seed)
    labels = (*dev.outcomes, NOCLICK)
    worst = 0.0
    for rho in verification_states(dev.dim, trials, rng):
        for x in dev.settings:
            direct = {a: expect(dev.element(x, a), rho) for a in labels}
            for a in labels:
                worst = max(worst, abs(decomp.probability(x, a, rho) - direct[a]))
    return worst


def classical_normal_form(
    fc: ClassicalFilter, lossless: LosslessDevice
) -> tuple[ClassicalFilter, LosslessDevice]:
    """Push a setting-scrambling classical filter into the measurement.

    Returns a diagonal filter that only damps each setting by its total
    acceptance, together with a reweighted device mixing the original POVMs
    by the transition probabilities.  The composed statistics are unchanged.
    """
    if fc.transition is None:
        return fc, lossless

    accept: dict[str, float] = {}
    povm: dict[str, dict[str, np.ndarray]] = {}
    kept: list[str] = []
    for x, row in fc.transition.items():
        acc = sum(row.values())
        if acc <= 1e-12:
            warnings.warn(f"setting {x!r} has zero acceptance and is erased", stacklevel=2)
            continue
        kept.append(x)
        accept[x] = acc
        povm[x] = {
            a: sum((p / acc) * lossless.element(xp, a) for xp, p in row.items())
            for a in lossless.outcomes
        }
    if not kept:
        raise ZeroAcceptanceError("all settings have zero acceptance")
    device = LosslessDevice(lossless.dim, kept, lossless.outcomes, povm)
    return ClassicalFilter(accept_prob=accept), device


def composed_probability(
    fc: ClassicalFilter, lossless: LosslessDevice, x: str, a: str, rho: np.ndarray
) -> float:
    """Unnormalized Pr(a, accept | x) of a classical filter followed by a device."""
    if fc.transition is None:
        return fc.accept_prob[x] * expect(lossless.element(x, a), rho)
    return sum(p * expect(lossless.element(xp, a), rho) for xp, p in fc.transition[x].items())

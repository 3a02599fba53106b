"""Lossy measurement devices as POVMs over settings and outcomes.

A device maps each (setting, outcome) pair to a POVM element; the reserved
outcome label ``"noclick"`` stands for a failed detection.  Raw and
post-selected outcome statistics are evaluated by trace rules against a
density matrix.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from .linalg import PSD_TOL, as_operator, assert_density, eigh_psd, expect, projector

#: Reserved label for the failed-detection outcome.
NOCLICK = "noclick"

#: Completeness residual allowed when summing a setting's POVM elements.
COMPLETENESS_TOL = 1e-9

#: Acceptance probabilities at or below this are treated as "setting erased".
ZERO_ACCEPTANCE = 1e-12


class ZeroAcceptanceError(ValueError):
    """Acceptance probability vanished; the setting must be erased, not renormalized."""


def total_variation(p: Mapping, q: Mapping) -> float:
    """Total variation distance between two distributions given as mappings."""
    keys = set(p) | set(q)
    return 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys)


class LossyDevice:
    """POVM-described measurement device with a no-click outcome.

    ``povm`` maps setting -> outcome -> matrix.  The no-click element may be
    omitted, in which case it is reconstructed from completeness; if present,
    the full sum must equal the identity within COMPLETENESS_TOL.
    """

    def __init__(
        self,
        dim: int,
        settings: Sequence[str],
        outcomes: Sequence[str],
        povm: Mapping[str, Mapping[str, np.ndarray]],
        completeness_tol: float = COMPLETENESS_TOL,
        psd_tol: float = PSD_TOL,
    ):
        self.dim = int(dim)
        self.settings = tuple(str(x) for x in settings)
        self.outcomes = tuple(str(a) for a in outcomes)
        if NOCLICK in self.outcomes:
            raise ValueError(f"{NOCLICK!r} is reserved and cannot be a good outcome")
        if len(set(self.settings)) != len(self.settings):
            raise ValueError("duplicate setting labels")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise ValueError("duplicate outcome labels")

        eye = np.eye(self.dim, dtype=complex)
        table: dict[str, dict[str, np.ndarray]] = {}
        for x in self.settings:
            if x not in povm:
                raise ValueError(f"missing POVM entries for setting {x!r}")
            row: dict[str, np.ndarray] = {}
            for a in self.outcomes:
                if a not in povm[x]:
                    raise ValueError(f"missing POVM element for ({x!r}, {a!r})")
                m = as_operator(povm[x][a])
                if m.shape[0] != self.dim:
                    raise ValueError(f"element ({x!r}, {a!r}) has dimension {m.shape[0]}, expected {self.dim}")
                eigh_psd(m, psd_tol=psd_tol, name=f"POVM element ({x!r}, {a!r})")
                row[a] = m
            good_sum = sum(row.values())
            if NOCLICK in povm[x]:
                row[NOCLICK] = as_operator(povm[x][NOCLICK])
                res = float(np.max(np.abs(good_sum + row[NOCLICK] - eye)))
                if res > completeness_tol:
                    raise ValueError(f"setting {x!r} violates completeness by {res:.3e}")
            else:
                row[NOCLICK] = eye - good_sum
            eigh_psd(row[NOCLICK], psd_tol=psd_tol, name=f"POVM element ({x!r}, noclick)")
            for m in row.values():
                m.setflags(write=False)
            table[x] = row
        self.povm = table

    def element(self, x: str, a: str) -> np.ndarray:
        return self.povm[x][a]

    def click_element(self, x: str) -> np.ndarray:
        """Sum of the good-outcome elements for setting x."""
        if x not in self.povm:
            raise KeyError(f"unknown setting {x!r}")
        return sum(self.povm[x][a] for a in self.outcomes)

    def noclick_element(self, x: str) -> np.ndarray:
        if x not in self.povm:
            raise KeyError(f"unknown setting {x!r}")
        return self.povm[x][NOCLICK]

    def efficiency(self, x: str, rho: np.ndarray) -> float:
        """Probability of any good outcome for setting x on state rho."""
        rho = assert_density(rho)
        if rho.shape[0] != self.dim:
            raise ValueError(f"state dimension {rho.shape[0]} does not match device dimension {self.dim}")
        return min(1.0, max(0.0, expect(self.click_element(x), rho)))

    def outcome_distribution(self, x: str, rho: np.ndarray) -> dict[str, float]:
        """Raw distribution over good outcomes plus noclick."""
        rho = assert_density(rho)
        if rho.shape[0] != self.dim:
            raise ValueError(f"state dimension {rho.shape[0]} does not match device dimension {self.dim}")
        probs = {a: max(0.0, expect(self.povm[x][a], rho)) for a in (*self.outcomes, NOCLICK)}
        total = sum(probs.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"distribution for setting {x!r} sums to {total!r}")
        return probs

    def postselected_distribution(self, x: str, rho: np.ndarray) -> dict[str, float]:
        """Distribution over good outcomes conditioned on a click."""
        raw = self.outcome_distribution(x, rho)
        acc = sum(raw[a] for a in self.outcomes)
        if acc <= ZERO_ACCEPTANCE:
            raise ZeroAcceptanceError(
                f"setting {x!r} has acceptance {acc:.3e}; erase it from the allowed settings"
            )
        return {a: raw[a] / acc for a in self.outcomes}


class LosslessDevice:
    """Device whose good outcomes sum to a projector for every setting.

    Acting on a state supported inside that projector it always produces a
    good outcome.  ``support`` maps each setting to its projector; it is
    validated to be idempotent and to match the outcome sum.
    """

    def __init__(
        self,
        dim: int,
        settings: Sequence[str],
        outcomes: Sequence[str],
        povm: Mapping[str, Mapping[str, np.ndarray]],
        sum_tol: float = COMPLETENESS_TOL,
        psd_tol: float = PSD_TOL,
    ):
        self.dim = int(dim)
        self.settings = tuple(str(x) for x in settings)
        self.outcomes = tuple(str(a) for a in outcomes)
        table: dict[str, dict[str, np.ndarray]] = {}
        supports: dict[str, np.ndarray] = {}
        for x in self.settings:
            row = {}
            for a in self.outcomes:
                m = as_operator(povm[x][a])
                eigh_psd(m, psd_tol=psd_tol, name=f"element ({x!r}, {a!r})")
                m.setflags(write=False)
                row[a] = m
            s = sum(row.values())
            res = float(np.max(np.abs(s @ s - s)))
            if res > sum_tol:
                raise ValueError(f"outcome sum for setting {x!r} is not a projector (residual {res:.3e})")
            table[x] = row
            supports[x] = s
        self.povm = table
        self.support = supports

    def element(self, x: str, a: str) -> np.ndarray:
        return self.povm[x][a]

    def common_support(self, tol: float = COMPLETENESS_TOL) -> np.ndarray | None:
        """The shared support projector, or None if it differs across settings."""
        first = self.support[self.settings[0]]
        for x in self.settings[1:]:
            if np.max(np.abs(self.support[x] - first)) > tol:
                return None
        return first

    def to_lossy(self) -> LossyDevice:
        """Complete each setting with a noclick element 1 - support."""
        eye = np.eye(self.dim, dtype=complex)
        povm = {
            x: {**{a: self.povm[x][a] for a in self.outcomes}, NOCLICK: eye - self.support[x]}
            for x in self.settings
        }
        return LossyDevice(self.dim, self.settings, self.outcomes, povm)


def projective_qubit_device(
    angles: Mapping[str, float], efficiency: float = 1.0, outcomes: tuple[str, str] = ("+", "-")
) -> LossyDevice:
    """Qubit device measuring cos(t)Z + sin(t)X per setting, damped by a flat efficiency.

    ``angles`` maps setting labels to Bloch angles t in the X-Z plane; both
    projective outcomes are scaled by the same efficiency, so the click
    element is efficiency times the identity (strong fair sampling).
    """
    if not 0.0 < efficiency <= 1.0:
        raise ValueError("efficiency must lie in (0, 1]")
    plus, minus = outcomes
    povm = {}
    for x, t in angles.items():
        up = np.array([np.cos(t / 2.0), np.sin(t / 2.0)], dtype=complex)
        down = np.array([-np.sin(t / 2.0), np.cos(t / 2.0)], dtype=complex)
        povm[str(x)] = {plus: efficiency * projector(up), minus: efficiency * projector(down)}
    return LossyDevice(2, list(povm), [plus, minus], povm)

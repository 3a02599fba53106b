"""Fair-sampling verdicts, approximate deviations and single-device bounds.

A device samples fairly when its click elements are proportional across
settings: the common quantum part filters the state independently of the
setting, so post-selected data is reproduced by a unit-efficiency device
measuring the filtered state.  This module decides that property exactly,
quantifies near-misses by an operator-norm epsilon, constructs the ideal
device and filtered state realizing the bound, and evaluates the companion
bounds for imperfectly prepared states.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .device import LossyDevice, LosslessDevice, ZeroAcceptanceError, total_variation
from .linalg import (
    as_operator,
    dagger,
    eigh_psd,
    expect,
    operator_norm,
    sqrt_pinv_sqrt,
    support_projector,
    trace_norm,
)

#: Default tolerance for exact fair-sampling verdicts.
VERDICT_TOL = 1e-8

SUPPORT_TOL = 1e-8


@dataclass
class FairSamplingVerdict:
    """Classification of a device plus the extracted filter data.

    For a device passing the weak test, ``quantum_elem`` is the shared click
    element normalized to unit operator norm and ``classical_eff`` collects
    the per-setting acceptance scales; ``epsilon`` is 0.  Otherwise epsilon
    quantifies the best approximate-fair-sampling deviation found for
    ``quantum_elem`` (the default reference unless one was supplied).
    """

    weak: bool
    strong: bool
    homogeneous: bool
    classical_eff: dict[str, float]
    quantum_elem: np.ndarray
    support: np.ndarray
    epsilon: float


class NecessaryConditions(NamedTuple):
    weak_consistent: bool
    strong_consistent: bool


@dataclass
class ImperfectStateReport:
    """Post-selection bound for a state with weight outside the calibrated space."""

    eps_prime: float
    coherence_trace_norm: float
    tv_bound: float
    tv_measured: float


@dataclass
class StateDependentResult:
    holds: bool
    psi_click: np.ndarray | None
    eq: dict[str, float] = field(default_factory=dict)


def _pairwise_proportional(mats: Sequence[np.ndarray], tol: float) -> bool:
    """Norm-scaled residual test: ||A s_B - B s_A|| <= tol * max(s_A, s_B)."""
    norms = [operator_norm(m) for m in mats]
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            residual = operator_norm(mats[i] * norms[j] - mats[j] * norms[i])
            if residual > tol * max(norms[i], norms[j]):
                return False
    return True


def check_exact(dev: LossyDevice, tol: float = VERDICT_TOL) -> FairSamplingVerdict:
    """Decide weak / strong / homogeneous fair sampling at the given tolerance.

    Weak holds iff all click elements are pairwise proportional; strong
    additionally requires the common element to be proportional to the
    identity on the full space; homogeneous requires the per-setting scales
    to coincide.  For devices failing the weak test, epsilon reports the
    approximate deviation with respect to the uniform-average reference.
    """
    clicks = [dev.click_element(x) for x in dev.settings]
    norms = [operator_norm(m) for m in clicks]
    if max(norms) <= 0.0:
        raise ValueError("all click elements vanish; the device never accepts")
    classical_eff = dict(zip(dev.settings, norms))

    weak = _pairwise_proportional(clicks, tol)
    if weak:
        i0 = next(i for i, s in enumerate(norms) if s > 0.0)
        mq = clicks[i0] / norms[i0]
        epsilon = 0.0
    else:
        mq = default_mq(dev)
        # Settings that never accept are erased from post-selected data, so they
        # do not contribute to the reported deviation.
        live = [x for x, s in zip(dev.settings, norms) if s > 0.0]
        sub = dev if len(live) == len(dev.settings) else LossyDevice(
            dev.dim, live, dev.outcomes, {x: dev.povm[x] for x in live}
        )
        epsilon = approximate_epsilon(sub, mq)
    strong = weak and operator_norm(mq - np.eye(dev.dim)) <= tol
    homogeneous = weak and (max(norms) - min(norms)) <= tol
    return FairSamplingVerdict(
        weak=weak,
        strong=strong,
        homogeneous=homogeneous,
        classical_eff=classical_eff,
        quantum_elem=mq,
        support=support_projector(mq),
        epsilon=epsilon,
    )


def default_mq(dev: LossyDevice) -> np.ndarray:
    """Uniform average of the norm-scaled click elements.

    Settings whose click element vanishes carry no shape information (they
    are erased from post-selected data anyway) and are skipped.
    """
    scaled = []
    for x in dev.settings:
        m = dev.click_element(x)
        s = operator_norm(m)
        if s > 0.0:
            scaled.append(m / s)
    if not scaled:
        raise ValueError("all click elements vanish; no reference operator exists")
    return sum(scaled) / len(scaled)


def _conjugated_clicks(dev: LossyDevice, mq: np.ndarray, support_tol: float):
    """Yield (setting, conjugated click element, its norm) after the support check."""
    mq = as_operator(mq)
    eigh_psd(mq, name="reference operator")
    pi = support_projector(mq)
    _, pinv = sqrt_pinv_sqrt(mq)
    for x in dev.settings:
        mc = dev.click_element(x)
        res = operator_norm(pi @ mc @ pi - mc)
        if res > support_tol * max(1.0, operator_norm(mc)):
            raise ValueError(
                f"click element for setting {x!r} leaks outside the reference support "
                f"(residual {res:.3e})"
            )
        mt = pinv @ mc @ pinv
        yield x, pi, mt, operator_norm(mt)


def approximate_epsilon(dev: LossyDevice, mq: np.ndarray, support_tol: float = SUPPORT_TOL) -> float:
    """Operator-norm deviation of the normalized conjugated click elements.

    For each setting, conjugate the click element by the pseudo-inverse
    square root of ``mq``, normalize, and measure the distance to the
    support projector; the maximum over settings is the epsilon of
    approximate fair sampling.
    """
    eps = 0.0
    for x, pi, mt, s in _conjugated_clicks(dev, mq, support_tol):
        if s <= 0.0:
            raise ZeroAcceptanceError(f"setting {x!r} has a vanishing conjugated click element")
        eps = max(eps, operator_norm(pi - mt / s))
    return eps


def ideal_device_from(dev: LossyDevice, mq: np.ndarray, support_tol: float = SUPPORT_TOL) -> LosslessDevice:
    """Unit-efficiency device reproducing post-selected statistics up to the epsilon bound.

    Each good element is conjugated and normalized like the click element,
    and the per-setting deficit from the support projector is spread
    uniformly over the outcomes so completeness holds exactly.
    """
    epsilon = approximate_epsilon(dev, mq, support_tol)
    if epsilon >= 1.0:
        raise ValueError(f"approximate deviation {epsilon:.3f} >= 1; no ideal device exists")
    _, pinv = sqrt_pinv_sqrt(mq)
    pi = support_projector(mq)
    n_out = len(dev.outcomes)
    povm: dict[str, dict[str, np.ndarray]] = {}
    for x in dev.settings:
        mt_click = pinv @ dev.click_element(x) @ pinv
        s = operator_norm(mt_click)
        deficit = (pi - mt_click / s) / n_out
        povm[x] = {
            a: pinv @ dev.element(x, a) @ pinv / s + deficit for a in dev.outcomes
        }
    return LosslessDevice(dev.dim, dev.settings, dev.outcomes, povm)


def filtered_state(
    mq: np.ndarray, rho: np.ndarray, threshold: float = 1e-12
) -> tuple[np.ndarray, float]:
    """Conjugate a state by sqrt(mq) and renormalize; returns (state, acceptance)."""
    sq, _ = sqrt_pinv_sqrt(mq)
    rho = as_operator(rho)
    branch = sq @ rho @ sq
    eq = float(np.trace(branch).real)
    if eq <= threshold:
        raise ZeroAcceptanceError(f"filter acceptance {eq:.3e} vanishes for this state")
    return branch / eq, eq


def tv_bound(epsilon: float) -> float:
    """Total-variation bound epsilon / (1 - epsilon) for post-selected statistics."""
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon!r}")
    return epsilon / (1.0 - epsilon)


def imperfect_state_bound(
    dev_hat: LossyDevice, rho_hat: np.ndarray, good_dim: int, x: str
) -> ImperfectStateReport:
    """Bound the post-selection error caused by weight outside the calibrated block.

    ``rho_hat`` is block-structured with the leading ``good_dim`` rows and
    columns spanning the calibrated space.  The report contains the weight
    on the orthogonal block, the trace norm of the coherence block, the
    resulting bound and the actually measured total-variation distance
    between the two post-selected distributions.
    """
    rho_hat = as_operator(rho_hat)
    d = rho_hat.shape[0]
    g = int(good_dim)
    if not 0 < g < d:
        raise ValueError(f"good_dim must lie strictly between 0 and {d}")
    if dev_hat.dim != d:
        raise ValueError("device and state dimensions differ")

    eps_prime = float(np.trace(rho_hat[g:, g:]).real)
    coherence = rho_hat[:g, g:]
    c_norm = trace_norm(coherence) if coherence.size else 0.0
    if eps_prime >= 1.0:
        raise ValueError("the state has no weight on the calibrated block")

    # Normalized good-block state, embedded in the full space.
    rho_good = np.zeros_like(rho_hat)
    rho_good[:g, :g] = rho_hat[:g, :g] / (1.0 - eps_prime)

    def projected(m: np.ndarray) -> np.ndarray:
        out = np.zeros_like(m)
        out[:g, :g] = m[:g, :g]
        return out

    f_acc = expect(dev_hat.click_element(x), rho_hat)
    g_acc = expect(projected(dev_hat.click_element(x)), rho_good)
    denom = max(f_acc, g_acc)
    if denom <= 0.0:
        raise ZeroAcceptanceError("both acceptance probabilities vanish")
    bound = 2.0 * (c_norm + eps_prime) / denom

    if f_acc <= 0.0 or g_acc <= 0.0:
        raise ZeroAcceptanceError("one of the post-selected distributions is undefined")
    p_hat = {a: expect(dev_hat.element(x, a), rho_hat) / f_acc for a in dev_hat.outcomes}
    p_good = {
        a: expect(projected(dev_hat.element(x, a)), rho_good) / g_acc for a in dev_hat.outcomes
    }
    measured = total_variation(p_hat, p_good)
    return ImperfectStateReport(
        eps_prime=eps_prime, coherence_trace_norm=c_norm, tv_bound=bound, tv_measured=measured
    )


def necessary_conditions(
    eff_table: Mapping[str, Mapping[str, float]], tol: float = 1e-8
) -> NecessaryConditions:
    """Consistency checks on observed efficiencies versus remote configurations.

    ``eff_table[x][r]`` is the acceptance probability of the local device at
    setting x given remote configuration r.  Fair sampling forces the table
    to factorize (rank one, tested through the second singular value);
    strong fair sampling forces every row to be constant.  These are
    necessary conditions only.
    """
    settings = list(eff_table)
    if not settings:
        raise ValueError("empty efficiency table")
    remotes = list(eff_table[settings[0]])
    matrix = np.array([[eff_table[x][r] for r in remotes] for x in settings], dtype=float)
    svals = np.linalg.svd(matrix, compute_uv=False)
    scale = svals[0] if svals[0] > 0.0 else 1.0
    weak_ok = bool(len(svals) < 2 or svals[1] <= tol * scale)
    strong_ok = bool(np.max(matrix.max(axis=1) - matrix.min(axis=1)) <= tol)
    return NecessaryConditions(weak_consistent=weak_ok, strong_consistent=strong_ok)


def state_dependent_check(
    filter_click: Mapping[str, Sequence[np.ndarray]],
    psi: np.ndarray,
    party_dims: Sequence[int],
    party: int,
    tol: float = VERDICT_TOL,
) -> StateDependentResult:
    """Test whether per-setting local filters act identically on this specific state.

    ``filter_click`` maps each setting to the Kraus operators of the
    accepting branch on the chosen party's factor.  The check passes when
    the filtered (unnormalized) global states are pairwise proportional, in
    which case the common normalized state and the per-setting acceptance
    scalars are returned.
    """
    psi = as_operator(psi)
    dims = [int(d) for d in party_dims]
    if int(np.prod(dims)) != psi.shape[0]:
        raise ValueError("party dimensions do not match the state")
    before = int(np.prod(dims[:party])) if party else 1
    after = int(np.prod(dims[party + 1:])) if party + 1 < len(dims) else 1

    def embed(k: np.ndarray) -> np.ndarray:
        return np.kron(np.kron(np.eye(before), k), np.eye(after))

    sigmas: dict[str, np.ndarray] = {}
    for x, kraus_list in filter_click.items():
        sigma = np.zeros_like(psi)
        for k in kraus_list:
            ke = embed(as_operator(k))
            sigma = sigma + ke @ psi @ dagger(ke)
        sigmas[x] = sigma

    traces = {x: float(np.trace(s).real) for x, s in sigmas.items()}
    if max(traces.values(), default=0.0) <= 0.0:
        raise ZeroAcceptanceError("every setting filters the state to zero")
    if not _pairwise_proportional(list(sigmas.values()), tol):
        return StateDependentResult(holds=False, psi_click=None, eq=traces)
    x0 = next(x for x, t in traces.items() if t > 0.0)
    return StateDependentResult(holds=True, psi_click=sigmas[x0] / traces[x0], eq=traces)

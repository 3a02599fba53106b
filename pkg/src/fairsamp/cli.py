"""Command-line entry points: check, decompose, simulate, bound, demo.

Every command reads and writes UTF-8 JSON.  ``check`` exits 0 when the
device passes the weak fair-sampling test, 2 when it fails (with the
deviation reported), and 1 on input errors.  Reports always carry both the
theoretical bound and the measured quantity so the inequalities can be
audited externally.  The FAIRSAMP_THREADS environment variable caps the
worker threads used by demo sweeps.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import adversary, serialize
from .analysis import approximate_epsilon, check_exact, tv_bound
from .bell import (
    BellScenario,
    beta_max,
    bell_value,
    deviation_bound,
    epsilon_total,
    ideal_scenario,
    postselected_vs_ideal_deviation,
    validate_coefficients,
)
from .device import ZeroAcceptanceError, projective_qubit_device
from .filters import canonical_decomposition, verify_recomposition
from .linalg import projector
from .optics import AnalyserSpec, analyser_device, analyser_epsilon_closed_form, analyser_mq
from .sampling import random_fair_sampling_device

DEMOS = ("makarov", "analyser", "chsh-singlet", "prop2-random")


def _threads() -> int:
    raw = os.environ.get("FAIRSAMP_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _emit(payload, out_path: str | None) -> None:
    text = serialize.dump_json(payload, out_path)
    if out_path is None:
        sys.stdout.write(text + "\n")


def _fail(message: str) -> int:
    sys.stderr.write(message.rstrip() + "\n")
    return 1


def cmd_check(args) -> int:
    try:
        dev = serialize.device_from_json(serialize.load_json(args.device))
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"error: cannot load device: {exc}")
    try:
        verdict = check_exact(dev, tol=args.tol)
        if args.mq is not None:
            mq = serialize.matrix_from_json(serialize.load_json(args.mq))
            verdict.quantum_elem = mq
            verdict.epsilon = approximate_epsilon(dev, mq)
    except (OSError, ValueError, np.linalg.LinAlgError) as exc:
        return _fail(f"error: {exc}")
    payload = serialize.verdict_to_json(verdict)
    if verdict.epsilon < 1.0:
        payload["tv_bound"] = serialize.sig15(tv_bound(verdict.epsilon))
    _emit(payload, args.output)
    return 0 if verdict.weak else 2


def cmd_decompose(args) -> int:
    try:
        dev = serialize.device_from_json(serialize.load_json(args.device))
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"error: cannot load device: {exc}")
    try:
        decomp = canonical_decomposition(dev)
        max_dev = verify_recomposition(dev, decomp, trials=args.trials, seed=args.seed)
    except ValueError as exc:
        return _fail(f"error: {exc}")
    out_dir = Path(args.output or (Path(args.device).stem + ".decomposition"))
    out_dir.mkdir(parents=True, exist_ok=True)
    filters_json, lossless_json = serialize.decomposition_to_json(decomp)
    serialize.dump_json(filters_json, out_dir / "filter.json")
    serialize.dump_json(lossless_json, out_dir / "lossless.json")
    serialize.dump_json(
        {"max_deviation": serialize.sig15(max_dev), "trials": args.trials, "seed": args.seed},
        out_dir / "verification.json",
    )
    sys.stdout.write(f"{out_dir}\n")
    return 0


def _scenario_report(sc: BellScenario, postselect: bool) -> dict:
    report: dict = {"raw": {}, "acceptance": {}}
    if postselect:
        report["postselected"] = {}
        report["erased"] = []
    for xs in sc.setting_tuples():
        label = ",".join(xs)
        report["raw"][label] = serialize.distribution_to_json(sc.joint_raw(xs))
        report["acceptance"][label] = serialize.sig15(sc.all_click_probability(xs))
        if postselect:
            try:
                report["postselected"][label] = serialize.distribution_to_json(
                    sc.joint_postselected(xs)
                )
            except ZeroAcceptanceError:
                report["erased"].append(label)
    if sc.bell_coeffs is not None:
        needed = {xs for (xs, _) in sc.bell_coeffs}
        if postselect:
            dists = {}
            usable = True
            for xs in needed:
                try:
                    dists[xs] = sc.joint_postselected(xs)
                except ZeroAcceptanceError:
                    usable = False
            if usable:
                report["bell_value_postselected"] = serialize.sig15(
                    bell_value(dists, sc.bell_coeffs)
                )
        raw_good = {}
        for xs in needed:
            dist = sc.joint_raw(xs)
            raw_good[xs] = dist
        report["bell_value_raw"] = serialize.sig15(bell_value(raw_good, sc.bell_coeffs))
    return report


def cmd_simulate(args) -> int:
    try:
        sc = serialize.scenario_from_json(
            serialize.load_json(args.scenario), base_dir=Path(args.scenario).parent
        )
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"error: cannot load scenario: {exc}")
    try:
        report = _scenario_report(sc, postselect=args.postselect)
    except ValueError as exc:
        return _fail(f"error: {exc}")
    try:
        verdicts = [check_exact(dev, tol=args.tol) for dev in sc.devices]
        if all(v.weak for v in verdicts):
            ideal = ideal_scenario(sc, [v.quantum_elem for v in verdicts])
            report["ideal_deviation"] = serialize.sig15(postselected_vs_ideal_deviation(sc, ideal))
    except ValueError:
        pass  # dead settings or vanishing acceptance: no ideal experiment to compare against
    _emit(report, args.output)
    return 0


def cmd_bound(args) -> int:
    try:
        sc = serialize.scenario_from_json(
            serialize.load_json(args.scenario), base_dir=Path(args.scenario).parent
        )
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"error: cannot load scenario: {exc}")
    try:
        if args.mq is not None:
            shared = serialize.matrix_from_json(serialize.load_json(args.mq))
            mqs = [shared for _ in sc.devices]
        else:
            mqs = [check_exact(dev, tol=args.tol).quantum_elem for dev in sc.devices]
        eps = [approximate_epsilon(dev, mq) for dev, mq in zip(sc.devices, mqs)]
        eps_tot = epsilon_total(eps)
        report = {
            "per_party": [
                {"epsilon": serialize.sig15(e), "tv_bound": serialize.sig15(tv_bound(e))}
                for e in eps
            ],
            "epsilon_total": serialize.sig15(eps_tot),
            "joint_tv_bound": serialize.sig15(tv_bound(eps_tot)),
        }
        ideal = ideal_scenario(sc, mqs)
        report["measured_joint_deviation"] = serialize.sig15(
            postselected_vs_ideal_deviation(sc, ideal)
        )
        if sc.bell_coeffs is not None:
            validate_coefficients(sc, sc.bell_coeffs)
            beta = beta_max(sc.bell_coeffs)
            needed = {xs for (xs, _) in sc.bell_coeffs}
            ps = {xs: sc.joint_postselected(xs) for xs in needed}
            ideal_dists = {xs: ideal.joint_raw(xs) for xs in needed}
            measured = abs(
                bell_value(ps, sc.bell_coeffs) - bell_value(ideal_dists, sc.bell_coeffs)
            )
            report["beta_max"] = serialize.sig15(beta)
            report["bell_deviation_bound"] = serialize.sig15(deviation_bound(eps_tot, beta))
            report["measured_bell_deviation"] = serialize.sig15(measured)
    except (OSError, ValueError, KeyError) as exc:
        return _fail(f"error: {exc}")
    _emit(report, args.output)
    return 0


def chsh_coefficients() -> dict:
    """CHSH weights (-1)^(xy) * a * b over settings {0,1} and outcomes {+,-}."""
    coeffs = {}
    for x in "01":
        for y in "01":
            for a in "+-":
                for b in "+-":
                    sign = (-1.0) ** (int(x) * int(y))
                    val = (1.0 if a == "+" else -1.0) * (1.0 if b == "+" else -1.0)
                    coeffs[((x, y), (a, b))] = sign * val
    return coeffs


def singlet_state() -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[1] = 1.0 / np.sqrt(2.0)
    v[2] = -1.0 / np.sqrt(2.0)
    return projector(v)


def chsh_singlet_scenario(efficiency: float = 0.25) -> BellScenario:
    """Singlet measured by quarter-efficiency analysers at the Tsirelson angles."""
    dev_a = projective_qubit_device({"0": 0.0, "1": np.pi / 2.0}, efficiency)
    dev_b = projective_qubit_device(
        {"0": -3.0 * np.pi / 4.0, "1": 3.0 * np.pi / 4.0}, efficiency
    )
    return BellScenario([dev_a, dev_b], singlet_state(), chsh_coefficients())


def _demo_makarov(args) -> dict:
    hv = adversary.makarov_branches()
    traced = check_exact(hv.traced(), tol=args.tol)
    full = check_exact(hv.adversary_device(), tol=args.tol)
    result = adversary.run_faked_chsh(noise=args.noise, seed=args.seed)
    return {
        "traced_verdict": serialize.verdict_to_json(traced),
        "adversary_verdict": serialize.verdict_to_json(full),
        "chsh": serialize.sig15(result.chsh),
        "detection_rate": serialize.sig15(result.detection_rate),
        "correlators": {f"{x},{y}": serialize.sig15(v) for (x, y), v in result.correlators.items()},
    }


def _analyser_row(eta: float, delta: float, n_max: int) -> dict:
    eta1 = 1.0 - (1.0 - eta) * (1.0 + delta)
    spec = AnalyserSpec(eta1=eta1, eta2=eta, angles=(0.0, np.pi / 4.0), n_max=n_max)
    dev = analyser_device(spec)
    eps = approximate_epsilon(dev, analyser_mq(eta, n_max))
    closed = analyser_epsilon_closed_form(eta, delta)
    return {
        "eta": eta,
        "delta": delta,
        "n_max": n_max,
        "epsilon_numeric": serialize.sig15(eps),
        "epsilon_closed_form": serialize.sig15(closed),
        "tv_bound": serialize.sig15(tv_bound(eps)),
    }


def _demo_analyser(args) -> dict:
    if args.eta2 is not None or args.eta1 is not None or args.delta is not None:
        eta = args.eta2 if args.eta2 is not None else 0.8
        if args.eta1 is not None:
            spec = AnalyserSpec(eta1=args.eta1, eta2=eta, angles=(0.0,), n_max=args.nmax)
            delta = spec.delta
            eta = spec.eta2
        else:
            delta = args.delta or 0.0
        rows = [_analyser_row(eta, delta, args.nmax)]
    else:
        grid = [(eta, delta) for eta in (0.5, 0.8, 0.95) for delta in (0.0, 0.01, 0.1)]
        with ThreadPoolExecutor(max_workers=_threads()) as pool:
            rows = list(pool.map(lambda p: _analyser_row(p[0], p[1], args.nmax), grid))
    return {"sweep": rows}


def _demo_chsh_singlet(args) -> dict:
    sc = chsh_singlet_scenario()
    report = _scenario_report(sc, postselect=True)
    verdicts = [check_exact(dev, tol=args.tol) for dev in sc.devices]
    ideal = ideal_scenario(sc, [v.quantum_elem for v in verdicts])
    report["ideal_deviation"] = serialize.sig15(postselected_vs_ideal_deviation(sc, ideal))
    report["strong_fair_sampling"] = all(v.strong for v in verdicts)
    return report


def _demo_prop2_random(args) -> dict:
    rng = np.random.default_rng(args.seed)
    cases = []
    for _ in range(args.count):
        n_parties = int(rng.integers(1, 4))
        dims = [int(rng.integers(2, 5)) for _ in range(n_parties)]
        devices = [
            random_fair_sampling_device(d, int(rng.integers(2, 4)), int(rng.integers(2, 4)), rng)
            for d in dims
        ]
        g = rng.normal(size=(int(np.prod(dims)),) * 2) + 1j * rng.normal(size=(int(np.prod(dims)),) * 2)
        psi = g @ g.conj().T
        psi /= np.trace(psi).real
        cases.append(BellScenario(devices, psi))

    def deviation(sc: BellScenario) -> float:
        verdicts = [check_exact(dev) for dev in sc.devices]
        return postselected_vs_ideal_deviation(
            sc, ideal_scenario(sc, [v.quantum_elem for v in verdicts])
        )

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        devs = list(pool.map(deviation, cases))
    return {
        "scenarios": args.count,
        "seed": args.seed,
        "max_deviation": serialize.sig15(max(devs)),
        "deviations": [serialize.sig15(d) for d in devs],
    }


def cmd_demo(args) -> int:
    try:
        if args.name == "makarov":
            payload = _demo_makarov(args)
        elif args.name == "analyser":
            payload = _demo_analyser(args)
        elif args.name == "chsh-singlet":
            payload = _demo_chsh_singlet(args)
        else:
            payload = _demo_prop2_random(args)
    except (ValueError, KeyError) as exc:
        return _fail(f"error: {exc}")
    _emit(payload, args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairsamp",
        description="Fair-sampling analysis of lossy measurement devices and Bell experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=1e-8, help="decision tolerance")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized checks")
        p.add_argument("-o", "--output", default=None, help="output path (default stdout)")

    p = sub.add_parser("check", help="fair-sampling verdict for a device file")
    p.add_argument("device")
    p.add_argument("--mq", default=None, help="reference operator JSON for the epsilon report")
    common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("decompose", help="canonical filter/lossless decomposition")
    p.add_argument("device")
    p.add_argument("--trials", type=int, default=100, help="random states for verification")
    common(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("simulate", help="joint statistics of a Bell scenario file")
    p.add_argument("scenario")
    p.add_argument("--postselect", action="store_true", help="include post-selected statistics")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("bound", help="deviation bounds and measured deviations for a scenario")
    p.add_argument("scenario")
    p.add_argument("--mq", default=None, help="reference operator JSON used for every party")
    common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("demo", help="reproducible built-in demonstrations")
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--noise", type=float, default=0.0, help="outcome noise for the makarov demo")
    p.add_argument("--nmax", type=int, default=4, help="photon-number truncation")
    p.add_argument("--eta1", type=float, default=None, help="first detector efficiency")
    p.add_argument("--eta2", type=float, default=None, help="second detector efficiency")
    p.add_argument("--delta", type=float, default=None, help="relative miss-probability excess")
    p.add_argument("--count", type=int, default=20, help="scenario count for prop2-random")
    common(p)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

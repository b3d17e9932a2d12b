"""Batch command-line front door.

Each command ingests JSON problem files, dispatches to the library, writes a
JSON (or CSV) report and exits with a meaningful status:

* 0: all assertions of the dispatched verification passed,
* 1: the verification ran and failed,
* 2: malformed input (unknown keys, bad matrices, missing files),
* 3: a solver stopped before certifying (a bounded result is still emitted).

Reports are deterministic for a fixed config and seed: timestamps live in a
separate ``metadata`` field, everything else is byte-stable. Files are
written atomically (temp file plus rename).
"""

from __future__ import annotations

import argparse
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .catalysis import (
    CatalysisScenario,
    correlation_balance,
    find_intertwiner,
    rank_condition_counterexample,
    regular_rep_channel,
    state_swap_channel,
    verify_scenario,
)
from .channels import Channel, is_covariant
from .linalg import DimensionError, DomainError, max_norm, tensor
from .refframe import (
    FrameScenario,
    catalytic_channel,
    degradation_sweep,
    phase_reference_scenario,
    sweep_to_csv,
)
from .serialize import (
    FormatError,
    channel_from_json,
    check_keys,
    dump_json,
    load_json,
    matrices_from_json,
    matrix_from_json,
    rep_from_json,
    write_json_atomic,
)
from .symmetry import FiniteGroup, FiniteGroupRep, left_regular_representation, tensor_rep
from .words import (
    EquivalenceConfig,
    find_simultaneous_unitary,
    wiegmann_equivalent,
)

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_MALFORMED_INPUT = 2
EXIT_SOLVER = 3


def _rep_from_spec(obj, where: str):
    check_keys(obj, ["type"], optional=["group", "images", "generators"], where=where)
    kind = obj["type"]
    if kind == "finite":
        check_keys(obj, ["type", "group", "images"], where=where)
        return rep_from_json({"group": obj["group"], "images": obj["images"]})
    if kind == "lie":
        check_keys(obj, ["type", "generators"], where=where)
        return matrices_from_json(obj["generators"], where=f"{where}.generators")
    raise FormatError(f"{where}: type must be 'finite' or 'lie', got {kind!r}")


def _cmd_check_covariance(args) -> tuple[dict, bool, bool]:
    obj = load_json(args.input)
    check_keys(obj, ["channel", "rep_in", "rep_out"], where="input")
    channel = channel_from_json(obj["channel"])
    rep_in = _rep_from_spec(obj["rep_in"], "rep_in")
    rep_out = _rep_from_spec(obj["rep_out"], "rep_out")
    report = is_covariant(channel, rep_in, rep_out, tol=args.tol)
    result = {"covariant": report.covariant, "worst_violation": report.worst_violation,
              "tol": args.tol}
    return result, report.covariant, True


def _cmd_wiegmann_equiv(args) -> tuple[dict, bool, bool]:
    obj = load_json(args.input)
    check_keys(obj, ["tuple_a", "tuple_b"], optional=["config"], where="input")
    tuple_a = matrices_from_json(obj["tuple_a"], "tuple_a")
    tuple_b = matrices_from_json(obj["tuple_b"], "tuple_b")
    cfg_obj = obj.get("config", {})
    check_keys(cfg_obj, [], optional=["max_length", "max_exponent", "num_random_words",
                                     "seed", "tol"], where="config")
    config = EquivalenceConfig(
        max_length=cfg_obj.get("max_length", 6),
        max_exponent=cfg_obj.get("max_exponent", 3),
        num_random_words=cfg_obj.get("num_random_words", 1000),
        seed=cfg_obj.get("seed", args.seed),
        tol=cfg_obj.get("tol", args.tol),
    )
    verdict = wiegmann_equivalent(tuple_a, tuple_b, config)
    return verdict.to_json(), True, True  # either verdict is a successful run


def _cmd_find_intertwiner(args) -> tuple[dict, bool, bool]:
    sc = CatalysisScenario.from_json(load_json(args.input))
    scenario_report = verify_scenario(sc)
    if not scenario_report.admissible:
        return ({"scenario": scenario_report.to_json()}, False, True)
    result = find_intertwiner(sc, seed=args.seed)
    payload = {"scenario": scenario_report.to_json(), "intertwiner": result.to_json()}
    return payload, result.success, result.success


def _cmd_catalysis_verify(args) -> tuple[dict, bool, bool]:
    sc = CatalysisScenario.from_json(load_json(args.input))
    scenario_report = verify_scenario(sc)
    payload: dict = {"scenario": scenario_report.to_json()}
    if not scenario_report.admissible:
        return payload, False, True
    result = find_intertwiner(sc, seed=args.seed)
    payload["intertwiner"] = result.to_json()
    balance = correlation_balance(sc.unitary, sc.rho_s, sc.sigma_c)
    payload["correlation"] = balance.to_json()
    passed = (result.success and balance.catalyst_preserved
              and balance.identity_residual <= 1e-8
              and balance.rank_after >= balance.rank_before)
    return payload, passed, result.success


def _frame_scenario_from_json(obj) -> FrameScenario:
    check_keys(obj, ["unitary", "sigma_c", "target", "gens_s", "gens_c"],
               optional=["gens_e", "omega_e"], where="frame scenario")
    gens_e = matrices_from_json(obj["gens_e"], "gens_e") if obj.get("gens_e") else []
    omega_e = matrix_from_json(obj["omega_e"], "omega_e") if "omega_e" in obj else None
    return FrameScenario(
        unitary=matrix_from_json(obj["unitary"], "unitary"),
        sigma_c=matrix_from_json(obj["sigma_c"], "sigma_c"),
        target=matrix_from_json(obj["target"], "target"),
        gens_s=matrices_from_json(obj["gens_s"], "gens_s"),
        gens_c=matrices_from_json(obj["gens_c"], "gens_c"),
        gens_e=gens_e,
        omega_e=omega_e,
    )


def _cmd_recovery_verify(args) -> tuple[dict, bool, bool]:
    if args.input:
        sc = _frame_scenario_from_json(load_json(args.input))
        config = {"source": args.input}
    else:
        sc = phase_reference_scenario(args.levels, args.theta)
        config = {"N": args.levels, "theta": args.theta}
    _, report = catalytic_channel(sc, samples=args.samples, seed=args.seed)
    payload = {"scenario": config, "report": report.to_json()}
    converged = report.epsilon_result.status == "converged"
    return payload, report.passed, converged


def _cmd_refframe_sweep(args) -> tuple[dict, bool, bool]:
    n_values = [int(tok) for tok in args.levels_list.split(",") if tok]
    if not n_values:
        raise FormatError("--Ns must list at least one ladder size")
    rows = degradation_sweep(n_values, args.theta, samples=args.samples, seed=args.seed)
    csv_text = sweep_to_csv(rows)
    if args.output:
        _write_text_atomic(args.output, csv_text)
    payload = {"rows": [r.to_csv_row() for r in rows], "csv": csv_text,
               "output": args.output}
    passed = all(r.status != "FAILED" for r in rows)
    converged = all(r.status != "bounds" for r in rows)
    return payload, passed, converged


def _cmd_demo_appendix(args) -> tuple[dict, bool, bool]:
    fx = rank_condition_counterexample()
    expected_gap = 2.0 * np.sqrt(3.0)
    gap_ok = abs(fx.gap - expected_gap) <= 1e-9
    verdict = wiegmann_equivalent(list(fx.a), list(fx.b),
                                  EquivalenceConfig(num_random_words=0, seed=args.seed))
    triple_distinguished = (not verdict.equivalent_up_to_bound
                            and str(verdict.witness) == "x0 x1 x2")
    pair_results = {}
    pairs_ok = True
    for name, idx in (("pair_12", (0, 1)), ("pair_23", (1, 2)), ("pair_31", (2, 0))):
        ta = [fx.a[i] for i in idx]
        tb = [fx.b[i] for i in idx]
        res = find_simultaneous_unitary(ta, tb, seed=args.seed)
        pair_results[name] = {"success": res.success, "residual": res.residual,
                              "stage": res.stage}
        pairs_ok = pairs_ok and res.success and res.residual < 1e-6
    big = find_simultaneous_unitary(list(fx.tensored_a()), list(fx.tensored_b()),
                                    seed=args.seed)
    big_ok = big.success and big.residual < 1e-6
    passed = gap_ok and triple_distinguished and pairs_ok and big_ok
    payload = {
        "gap": fx.gap,
        "expected_gap": expected_gap,
        "triple_verdict": verdict.to_json(),
        "pairwise": pair_results,
        "tensored_9x9": {"success": big.success, "residual": big.residual,
                         "stage": big.stage},
    }
    print(f"trace gap |Tr[b1 b2 b3] - Tr[a1 a2 a3]| = {fx.gap:.10f} "
          f"(expected {expected_gap:.10f})")
    print(f"triple distinguished by word: {verdict.witness}")
    for name, res in pair_results.items():
        print(f"{name}: {'SUCCESS' if res['success'] else 'FAILURE'} "
              f"residual {res['residual']:.2e}")
    print(f"tensored 9x9 instance: {'SUCCESS' if big_ok else 'FAILURE'} "
          f"residual {big.residual:.2e}")
    return payload, passed, True


def _cmd_demo_finite_group(args) -> tuple[dict, bool, bool]:
    rng = np.random.default_rng(args.seed)
    payload = {}
    passed = True
    for label, group, images in (
        ("Z2", FiniteGroup.cyclic(2),
         [np.eye(2, dtype=complex), np.diag([1.0, -1.0]).astype(complex)]),
        ("S3", FiniteGroup.symmetric(3), None),
    ):
        if images is None:
            images = _standard_s3_images(group)
        rep_s = FiniteGroupRep(group, images)
        reg = left_regular_representation(group)
        comp = tensor_rep(rep_s, reg)
        # random target channel via Haar isometry
        d = rep_s.dim
        g = rng.standard_normal((2 * d, d)) + 1j * rng.standard_normal((2 * d, d))
        q, _ = np.linalg.qr(g)
        target = Channel([q[:d], q[d:]])
        lifted = regular_rep_channel(group, rep_s, target)
        cov = is_covariant(lifted, comp, comp)
        rho = _random_density(d, rng)
        pointer = np.zeros((group.order, group.order), dtype=complex)
        pointer[group.identity, group.identity] = 1.0
        action_defect = max_norm(lifted.apply(tensor(rho, pointer))
                                 - tensor(target.apply(rho), pointer))
        entry = {"covariant": cov.covariant,
                 "covariance_violation": cov.worst_violation,
                 "pointer_action_defect": action_defect}
        ok = cov.covariant and action_defect <= 1e-10
        if label == "Z2":
            swap = state_swap_channel(group, rep_s,
                                      np.diag([1.0, 0.0]).astype(complex),
                                      np.diag([0.0, 1.0]).astype(complex), x=1)
            px = np.zeros((2, 2), dtype=complex)
            px[1, 1] = 1.0
            swap_defect = max_norm(swap.apply(tensor(np.diag([1.0, 0.0]), px))
                                   - tensor(np.diag([0.0, 1.0]), px))
            swap_cov = is_covariant(swap, comp, comp)
            entry["state_swap_defect"] = swap_defect
            entry["state_swap_covariant"] = swap_cov.covariant
            ok = ok and swap_defect <= 1e-10 and swap_cov.covariant
        payload[label] = entry
        passed = passed and ok
        print(f"{label}: covariant={cov.covariant} "
              f"(violation {cov.worst_violation:.2e}), "
              f"pointer action defect {action_defect:.2e}")
    return payload, passed, True


def _standard_s3_images(group: FiniteGroup):
    """Two-dimensional images of S3: permutation matrices restricted to the
    plane orthogonal to (1, 1, 1), which is invariant under every
    permutation, so the restriction is an exact homomorphism."""
    import itertools
    perms = list(itertools.permutations(range(3)))
    ones = np.ones((3, 1)) / np.sqrt(3)
    q, _ = np.linalg.qr(np.concatenate([ones, np.eye(3)[:, :2]], axis=1))
    plane = q[:, 1:3]
    images = []
    for p in perms:
        perm_matrix = np.zeros((3, 3))
        for j in range(3):
            perm_matrix[p[j], j] = 1.0
        images.append((plane.T @ perm_matrix @ plane).astype(complex))
    return images


def _random_density(d: int, rng) -> np.ndarray:
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def _write_text_atomic(path: str, text: str) -> None:
    import os
    import tempfile
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


TOL_UNSET = -1.0

HANDLERS = {
    "check-covariance": _cmd_check_covariance,
    "wiegmann-equiv": _cmd_wiegmann_equiv,
    "find-intertwiner": _cmd_find_intertwiner,
    "catalysis-verify": _cmd_catalysis_verify,
    "recovery-verify": _cmd_recovery_verify,
    "refframe-sweep": _cmd_refframe_sweep,
    "demo-appendix": _cmd_demo_appendix,
    "demo-finite-group": _cmd_demo_finite_group,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covcat",
        description="Covariant-channel toolbox: catalysis checks, trace-fingerprint "
                    "equivalence and reference-frame degradation bounds.")
    parser.add_argument("--version", action="version", version=f"covcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_input=False):
        p.add_argument("--input", required=needs_input, default=None,
                       help="input problem JSON")
        p.add_argument("--output", default=None, help="report destination")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=TOL_UNSET,
                       help="tolerance override where applicable")

    p = sub.add_parser("check-covariance", help="test a channel against representations")
    common(p, needs_input=True)
    p = sub.add_parser("wiegmann-equiv", help="trace-fingerprint tuple comparison")
    common(p, needs_input=True)
    p = sub.add_parser("find-intertwiner", help="construct the intertwining unitary")
    common(p, needs_input=True)
    p = sub.add_parser("catalysis-verify", help="full catalysis scenario verification")
    common(p, needs_input=True)
    p = sub.add_parser("recovery-verify", help="back-action bound verification")
    common(p)
    p.add_argument("--N", dest="levels", type=int, default=8,
                   help="ladder size for the built-in phase-reference scenario")
    p.add_argument("--theta", type=float, default=np.pi / 2)
    p.add_argument("--samples", type=int, default=100)
    p = sub.add_parser("refframe-sweep", help="degradation sweep over ladder sizes")
    common(p)
    p.add_argument("--Ns", dest="levels_list", default="2,4,8,16",
                   help="comma-separated ladder sizes")
    p.add_argument("--theta", type=float, default=np.pi / 2)
    p.add_argument("--samples", type=int, default=100)
    p = sub.add_parser("demo-appendix", help="run the bundled counterexample fixture")
    common(p)
    p = sub.add_parser("demo-finite-group", help="regular-representation constructions")
    common(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol == TOL_UNSET:
        args.tol = 1e-9
    handler = HANDLERS[args.command]
    try:
        result, passed, solver_ok = handler(args)
    except (FormatError, DomainError, DimensionError, FileNotFoundError) as exc:
        report = {"command": args.command, "error": str(exc), "passed": False}
        sys.stderr.write(f"error: {exc}\n")
        if args.output and args.command != "refframe-sweep":
            write_json_atomic(args.output, report)
        return EXIT_MALFORMED_INPUT
    report = {
        "command": args.command,
        "config": {"input": args.input, "seed": args.seed, "tol": args.tol},
        "result": result,
        "passed": passed,
        "metadata": {"timestamp_utc": datetime.now(timezone.utc).isoformat(),
                     "version": __version__},
    }
    if args.output and args.command != "refframe-sweep":
        write_json_atomic(args.output, report)
    elif not args.output:
        sys.stdout.write(dump_json(report))
    if not solver_ok:
        return EXIT_SOLVER  # bounded/uncertified result was still emitted
    if not passed:
        return EXIT_VERIFICATION_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

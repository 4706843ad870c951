import argparse
import os
import sys
import time

repo_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))
sys.path[:0] = [repo_root, os.path.join(repo_root, "src")]

from benchmarks.acceptance import config as bench  # noqa: E402
from benchmarks.acceptance.helpers import (  # noqa: E402
    check_determinism,
    check_inversion,
    check_links_from_cap,
    check_oracle,
    check_tail_sandwich,
    check_trickle_down,
    format_seconds,
    report_checks,
    run_once,
)


def criterion_1(failures):
    return [check_tail_sandwich(bench.tail_d_grid, bench.tail_t_grid, failures)]


def criterion_2(failures):
    return [check_inversion(bench.tail_d_grid, bench.inversion_p_grid, bench.inversion_tolerance, failures)]


def criterion_3(failures):
    return [check_oracle(bench.oracle_graphs, bench.oracle_max_n, bench.oracle_tolerance, failures)]


def criterion_4(failures):
    return check_trickle_down(bench.trickle_down_sizes, bench.trickle_down_eps, bench.trickle_down_tolerance,
                              failures)


def criterion_5(failures):
    return [check_links_from_cap(failures=failures, **bench.link_check)]


def criterion_6(failures):
    manifest = run_once("sphere-spectrum", bench.spectrum)
    return report_checks(manifest, ["lambda2_near_tau"], failures)


def criterion_7(failures):
    manifest = run_once("mixing", bench.mixing)
    return report_checks(manifest, ["decay_signal", "tv_decay"], failures)


def criterion_8(failures):
    manifest = run_once("mixing", bench.mixing)
    return report_checks(manifest, ["bm_", "martingale_tails"], failures)


def criterion_9(failures):
    manifest = run_once("walk-combinatorics", bench.walks)
    return report_checks(manifest, ["enumeration_complete", "shape_invariants", "class_count_bound"], failures)


def criterion_10(failures):
    manifest = run_once("walk-combinatorics", bench.walks)
    return report_checks(manifest, ["forest_probabilities", "triangle_window", "trace_markov_bound"], failures)


def criterion_11(failures):
    manifest = run_once("shell-analysis", bench.shells)
    return report_checks(manifest, ["shell_matrix_invariants", "spectral_gap", "typical_rows", "outlier_mass",
                                    "outlier_ratio", "ratio_claims", "squared_chain",
                                    "link_degree_concentration"], failures)


def criterion_12(failures):
    manifest = run_once("tightness", bench.tightness)
    return report_checks(manifest, ["skeleton_connected", "skeleton_lambda2", "link_upper"], failures)


def criterion_13(failures):
    return check_determinism(bench.determinism_runs, failures)


CRITERIA = {
    1: ("Beta_d tails lie in the analytic sandwich", criterion_1),
    2: ("tau_of inverts the tail", criterion_2),
    3: ("Lanczos agrees with dense eigenvalues", criterion_3),
    4: ("trickle-down holds on sampled complexes", criterion_4),
    5: ("cap links are two-sided expanders", criterion_5),
    6: ("lambda_2 of Geo_d(n, p) concentrates at tau", criterion_6),
    7: ("cap-walk TV decays at rate tau", criterion_7),
    8: ("Brownian motion concentrates", criterion_8),
    9: ("closed-walk shapes are consistent", criterion_9),
    10: ("subgraph probabilities match", criterion_10),
    11: ("shell matrices behave", criterion_11),
    12: ("trickle-down is tight at lambda = 1/3", criterion_12),
    13: ("runs are byte-identical", criterion_13),
}

parser = argparse.ArgumentParser(description="Run the hdxgeo acceptance benchmarks")
parser.add_argument(
    "criteria",
    nargs="*",
    type=int,
    choices=sorted(CRITERIA),
    help="criteria to run; all of them when omitted",
)
args = parser.parse_args()

try:
    selected = args.criteria or sorted(CRITERIA)
    total_checks = 0
    failures = []
    slow = []

    for number in selected:
        title, criterion = CRITERIA[number]
        print(f"[{number}] {title}")
        start = time.perf_counter()
        lines = criterion(failures)
        elapsed = time.perf_counter() - start
        for line in lines:
            print(f"    {line}")
        total_checks += sum(1 for line in lines if not line.startswith("SKIP"))
        budget = bench.time_budgets.get(number)
        if budget is not None and elapsed > budget:
            slow.append(f"[{number}] took {format_seconds(elapsed)}, budget {budget}s")
        print(f"    ({format_seconds(elapsed)})")

    passed = total_checks - len(failures)
    print(f"\n{passed} / {total_checks} Benchmarks passed")

    if slow:
        print("\nOver time budget:")
        for line in slow:
            print(line)

    if failures:
        print("\nFailures:")
        for failure in failures:
            print(failure)
        sys.exit(2)

except Exception as e:
    print(f"Unexpected error: {e}")
    sys.exit(1)

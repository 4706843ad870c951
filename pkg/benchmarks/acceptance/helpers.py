import filecmp
import math
import os
import tempfile

import numpy as np
from scipy import sparse

from benchmarks.acceptance.config import master_seed, output_dir, workers
from experiments.src.config import Config
from experiments.src.runners.hdx_verify import hdx_verify
from experiments.src.runners.tails import inversion_rows, tail_rows
from experiments.src.settings import ExperimentConfig, validate_parameters
from experiments.src.tools import run
from geo_complex.src.tools import WeightedGraph
from shell_analysis.src.tools import link_spectrum, sample_link_from_cap
from spectral.src.report import Method
from spectral.src.tools import normalized_adjacency, second_abs_eigenvalue

_manifests = {}


def experiment_config(name, overrides, out=None, seed=master_seed):
    parameters = dict(Config.experiment_info(name)["defaults"])
    parameters.update(validate_parameters(name, overrides))
    return ExperimentConfig(experiment=name, parameters=parameters, master_seed=seed,
                            output_dir=out or os.path.join(output_dir, name), workers=workers)


def run_once(name, overrides):
    """Run an experiment at most once per benchmark session; criteria sharing a run reuse its manifest."""
    if name not in _manifests:
        _manifests[name] = run(experiment_config(name, overrides))
    return _manifests[name]


def report_checks(manifest, prefixes, failures):
    """PASS/FAIL line for every manifest check whose name starts with one of the prefixes."""
    lines = []
    if manifest.error:
        result = f"FAIL {manifest.experiment}: {manifest.error}"
        failures.append(result)
        return [result]
    for check in manifest.checks:
        if not check.name.startswith(tuple(prefixes)):
            continue
        detail = f"{check.name}: measured {check.measured}, threshold {check.threshold}"
        if check.passed:
            lines.append(f"PASS {detail}")
        else:
            lines.append(f"FAIL {detail}")
            failures.append(f"FAIL {manifest.experiment} {detail}")
    if not lines:
        result = f"FAIL {manifest.experiment}: none of {prefixes} was recorded"
        failures.append(result)
        lines.append(result)
    return lines


def compare_values(label, measured, threshold, ok, failures):
    result = f"{'PASS' if ok else 'FAIL'} {label}: measured {measured}, threshold {threshold}"
    if not ok:
        failures.append(result)
    return result


def check_tail_sandwich(d_grid, t_grid, failures):
    rows = tail_rows(d_grid, t_grid)
    outside = [(d, t) for d, t, _, _, _, inside in rows if not inside]
    return compare_values("tail sandwich", f"{len(outside)} of {len(rows)} outside {outside}", 0, not outside,
                          failures)


def check_inversion(d_grid, p_grid, tolerance, failures):
    worst = max(row[3] for row in inversion_rows(d_grid, p_grid))
    return compare_values("tau_of round trip", worst, tolerance, worst <= tolerance, failures)


def random_weighted_graph(n, rng):
    density = rng.uniform(0.05, 0.3)
    upper = sparse.random(n, n, density=density, random_state=rng, data_rvs=lambda k: rng.uniform(0.1, 2.0, k))
    upper = sparse.triu(upper, k=1)
    weights = (upper + upper.T).tocsr()
    return WeightedGraph(labels=np.arange(n), weights=weights).without_isolated()


def check_oracle(count, max_n, tolerance, failures):
    rng = np.random.default_rng(master_seed)
    worst = 0.0
    for _ in range(count):
        graph = random_weighted_graph(int(rng.integers(16, max_n + 1)), rng)
        op = normalized_adjacency(graph)
        dense = second_abs_eigenvalue(op, method=Method.DENSE)
        iterative = second_abs_eigenvalue(op, tol=1e-12, method=Method.ITERATIVE)
        worst = max(worst, abs(dense.second_abs_eigenvalue - iterative.second_abs_eigenvalue))
    return compare_values(f"lanczos vs dense on {count} graphs", worst, tolerance, worst <= tolerance, failures)


def check_trickle_down(sizes, eps, tolerance, failures):
    lines = []
    for i, n in enumerate(sizes):
        report = hdx_verify(n, eps, 2.0, seed=master_seed + i, tol=tolerance, workers=workers)
        label = f"trickle-down n={n} d={report.d}"
        if not report.connected:
            lines.append(f"SKIP {label}: 1-skeleton has {report.component_count} components")
        elif report.trickle_down is None:
            lines.append(f"SKIP {label}: vacuous, max link |lambda|_2 = {report.link_lambda_max:.4f}")
        else:
            result = report.trickle_down
            lines.append(compare_values(label, result.skeleton_value, result.bound, result.passed, failures))
    return lines


def check_links_from_cap(d, tau, m, links, window, failures):
    target = tau / (1.0 + tau)
    low, high = target - window, target + window
    rng = np.random.default_rng(master_seed)
    values = []
    for i in range(links):
        sample = sample_link_from_cap(m, tau, d, rng)
        try:
            values.append(link_spectrum(sample).second_abs_eigenvalue)
        except ValueError as e:
            result = f"FAIL link {i}: {e}"
            failures.append(result)
            return result
    outside = [v for v in values if not low <= v <= high]
    return compare_values(f"{links} cap links at d={d}", f"[{min(values):.4f}, {max(values):.4f}]",
                          f"[{low:.4f}, {high:.4f}]", not outside, failures)


def check_determinism(runs, failures):
    lines = []
    with tempfile.TemporaryDirectory() as scratch:
        for name, overrides in runs.items():
            first = run(experiment_config(name, overrides, out=os.path.join(scratch, name, "a")))
            second = run(experiment_config(name, overrides, out=os.path.join(scratch, name, "b")))
            _, mismatch, errors = filecmp.cmpfiles(os.path.join(scratch, name, "a"), os.path.join(scratch, name, "b"),
                                                   first.artifacts, shallow=False)
            ok = not mismatch and not errors and first.artifacts == second.artifacts
            lines.append(compare_values(f"{name} re-run", f"{len(mismatch) + len(errors)} differing files", 0, ok,
                                        failures))
    return lines


def format_seconds(seconds):
    return f"{seconds:.1f}s" if math.isfinite(seconds) else "n/a"

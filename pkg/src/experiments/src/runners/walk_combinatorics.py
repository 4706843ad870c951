import logging
import math
from collections import Counter

import networkx as nx

from experiments.src.runners.base import ExperimentRunner
from walk_combinatorics.src.tools import ClassRow, PatternRow, check_shape_invariants, count_bound, \
    enumerate_shapes, judge_triangle, random_forest, subgraph_probability_mc, trace_power_mc, triangle_window, \
    write_class_table, write_pattern_table

logger = logging.getLogger(__name__)


def closed_walk_count(ell, n):
    """Closed walks of length ell on K_n: (n-1)^ell + (-1)^ell (n-1)."""
    return (n - 1) ** ell + (-1) ** ell * (n - 1)


def markov_limit(trace):
    """Markov bound on the norm-violation rate plus three Monte Carlo standard errors."""
    bound = trace.violation_bound
    return bound + 3.0 * math.sqrt(bound * (1.0 - bound) / trace.trials)


def exhaustive_walks(ell_max, n_labels):
    """
    Class rows, invariant violations and walk totals for every length 2..ell_max.

    Violations are keyed by invariant name and weighted by the number of labeled
    walks that share the offending shape.
    """
    rows, violations, totals = [], Counter(), {}
    for ell in range(2, ell_max + 1):
        counts = Counter()
        total = 0
        for shape, multiplicity in enumerate_shapes(ell, n_labels):
            counts[shape.walk_class] += multiplicity
            total += multiplicity
            for name in check_shape_invariants(shape):
                violations[name] += multiplicity
        totals[ell] = total
        rows.extend(
            ClassRow(ell=ell, a=a, b=b, c=c, true_count=count, bound=count_bound(ell, n_labels, a, b, c))
            for (a, b, c), count in sorted(counts.items())
        )
    return rows, violations, totals


class WalkCombinatoricsExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        ell_max, n_labels = config["ell_max"], config["n_labels"]
        with recorder.phase("enumeration"):
            rows, violations, totals = exhaustive_walks(ell_max, n_labels)
        write_class_table(recorder.path("classes.csv"), rows)
        recorder.adopt("classes.csv")

        missing = {ell: closed_walk_count(ell, n_labels) - total for ell, total in totals.items()}
        recorder.check("enumeration_complete", not any(missing.values()), missing, 0)
        recorder.check("shape_invariants", not violations, dict(violations), 0)
        over = [(r.ell, r.a, r.b, r.c) for r in rows if r.true_count > r.bound]
        recorder.check("class_count_bound", not over, len(over), 0,
                       note=f"classes over the bound: {over}" if over else "")

        patterns = []
        p = config["forest_p"]
        k = config["forest_vertices"]
        failures = 0
        with recorder.phase("forests"):
            for i in range(config["forests"]):
                forest = random_forest(k, recorder.rng("forest", i))
                e = forest.number_of_edges()
                reference = p ** e
                sigma = math.sqrt(reference * (1.0 - reference) / config["forest_trials"])
                for d in config["forest_d_grid"]:
                    est = subgraph_probability_mc(forest, k, d, p, config["forest_trials"],
                                                  recorder.rng(f"forest_mc_d{d}", i))
                    patterns.append(PatternRow(pattern_id=f"forest{i}_e{e}_d{d}", estimate=est.estimate,
                                               ci_low=est.ci_low, ci_high=est.ci_high, analytic_reference=reference))
                    if abs(est.estimate - reference) > 3.0 * sigma:
                        failures += 1
        recorder.check("forest_probabilities", failures == 0, failures, 0, note="|estimate - p^E| <= 3 sigma")

        with recorder.phase("triangle"):
            d, tp = config["triangle_d"], config["triangle_p"]
            est = subgraph_probability_mc(nx.complete_graph(3), 3, d, tp, config["triangle_trials"],
                                          recorder.rng("triangle"))
            low, high = triangle_window(tp, d)
        patterns.append(PatternRow(pattern_id=f"triangle_d{d}", estimate=est.estimate, ci_low=est.ci_low,
                                   ci_high=est.ci_high, analytic_reference=low))
        verdict = judge_triangle(est, low, high)
        recorder.derive("triangle_window", [low, high])
        recorder.derive("triangle_status", verdict.status)
        recorder.check("triangle_window", verdict.passed, est.estimate, [low, high],
                       note=f"{verdict.status}; Wilson interval [{est.ci_low:.3g}, {est.ci_high:.3g}]")
        write_pattern_table(recorder.path("patterns.csv"), patterns)
        recorder.adopt("patterns.csv")

        with recorder.phase("trace"):
            trace = trace_power_mc(config["trace_n"], config["trace_d"], config["trace_p"], config["trace_ell"],
                                   config["trace_trials"], recorder.rng("trace"))
        recorder.derive("trace", {"mean": trace.mean, "ci_half_width": trace.ci_half_width,
                                  "mean_norm": trace.mean_norm, "violation_rate": trace.violation_rate,
                                  "violation_bound": trace.violation_bound})
        limit = markov_limit(trace)
        recorder.check("trace_markov_bound", trace.violation_rate <= limit, trace.violation_rate, limit,
                       note=f"E tr M^{config['trace_ell']} = {trace.mean:.6g} +- {trace.ci_half_width:.3g}")
        logger.info("Walk combinatorics: %d classes, %d patterns", len(rows), len(patterns))

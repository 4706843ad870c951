import logging

import numpy as np

from cap_walks.src.tools import InsufficientSignalError, bm_concentration_check, fit_decay_rate, \
    martingale_tail_check, write_tv_table
from experiments.src.runners.base import ExperimentRunner
from experiments.src.runners.sphere_spectrum import resolve_density

logger = logging.getLogger(__name__)


def judged_ratios(fit):
    """(k, TV_{k+1} / TV_k) over every pair of consecutive steps that both clear the noise floor."""
    profile = [row.tv_estimate for row in fit.rows]
    usable = set(fit.usable_steps)
    return [(k, profile[k + 1] / profile[k]) for k in sorted(usable) if k + 1 in usable]


def saturated_steps(fit, saturation):
    return [k for k in fit.usable_steps if fit.rows[k].tv_estimate > saturation]


def decay_verdict(fit, limit):
    """
    (passed, worst ratio, judged steps) of the decay-ratio check.

    Fewer than two usable steps leave nothing to judge and fail the check.
    """
    ratios = judged_ratios(fit)
    if not ratios:
        return False, None, []
    worst = max(r for _, r in ratios)
    return worst <= limit, worst, [k for k, _ in ratios]


def tail_table(t, report):
    return [(t, row.x, row.empirical, row.bound, row.mc_error, row.ok) for row in report.rows]


class MixingExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        d = config["d"]
        p, tau = resolve_density(d, config["p"], config["tau"])
        recorder.derive("p", p)
        recorder.derive("tau", tau)
        x0 = np.zeros(d)
        x0[0] = 1.0

        with recorder.phase("cap_walk"):
            try:
                fit = fit_decay_rate(x0, p, config["k_max"], config["trials"], recorder.rng("cap_walk"),
                                     bins=config["bins"])
            except InsufficientSignalError as e:
                fit = None
                recorder.check("decay_signal", False, str(e), None)
        if fit is not None:
            write_tv_table(recorder.path("tv_table.csv"), fit.rows)
            recorder.adopt("tv_table.csv")
            recorder.derive("noise_floor", fit.noise_floor)
            recorder.derive("decay_slope", fit.slope)
            recorder.derive("decay_rate", fit.rate)
            recorder.derive("usable_steps", fit.usable_steps)
            recorder.derive("decay_references", fit.references)
            limit = config["decay_slack"] * tau
            recorder.derive("saturated_steps", saturated_steps(fit, config["tv_saturation"]))
            passed, worst, judged = decay_verdict(fit, limit)
            recorder.check("tv_decay_ratio", passed, worst, limit,
                           note=f"judged steps {judged}" if judged else "fewer than two steps clear the noise floor")

        bm_d, grid, trials = config["bm_d"], config["bm_t_grid"], config["bm_trials"]

        def concentration(index, rng):
            return bm_concentration_check(bm_d, grid[index], trials, rng)

        def martingale(index, rng):
            return martingale_tail_check(bm_d, grid[index], trials, rng)

        reports = recorder.map(concentration, len(grid), "bm")
        martingales = recorder.map(martingale, len(grid), "bm_martingale")
        recorder.write_csv("bm_tails.csv", self.columns("bm_tails.csv"),
                           [row for t, r in zip(grid, reports) for row in tail_table(t, r)])
        recorder.write_csv("bm_means.csv", self.columns("bm_means.csv"),
                           [(t, r.mean, r.expected_mean, r.mean_ci) for t, r in zip(grid, reports)])
        recorder.write_csv("bm_martingale.csv", self.columns("bm_martingale.csv"),
                           [row for t, r in zip(grid, martingales) for row in tail_table(t, r)])
        for t, r, mg in zip(grid, reports, martingales):
            recorder.check(f"bm_mean[t={t}]", r.mean_within_ci, r.mean, r.expected_mean,
                           note=f"3 sigma = {r.mean_ci:.3g}")
            recorder.check(f"bm_tails[t={t}]", r.passed, sum(not row.ok for row in r.rows), 0)
            recorder.check(f"martingale_tails[t={t}]", mg.passed, sum(not row.ok for row in mg.rows), 0)
        logger.info("Mixing: %d BM times checked at d=%d", len(grid), bm_d)

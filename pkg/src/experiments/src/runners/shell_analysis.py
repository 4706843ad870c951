import logging
import math
from dataclasses import dataclass

import numpy as np

from experiments.src.runners.base import ExperimentRunner
from shell_analysis.src.tools import base_edge_prob, build_shell_matrices, check_shell_matrices, classify_shells, \
    degree_concentration_check, degree_concentration_frequency, link_spectrum, outlier_ratio_quadrature, ratio_claims_check, row_similarity_check, \
    sample_link_from_cap, sample_shells, shell_spectral_check, squared_chain_check

logger = logging.getLogger(__name__)

QUADRATURE_POINTS = 5


@dataclass(frozen=True)
class ResampleResult:
    resample: int
    kappas: np.ndarray
    n_typical: int
    n_outlier: int
    alpha: float
    eta: float
    lambda_max_deflated: float
    max_row_l1: float
    outlier_mass_max: float
    row_stochastic_error: float
    violations: tuple
    row_ok: bool
    outlier_ok: bool


def analyse_resample(index, kappa, gamma, row_slack, outlier_slack) -> ResampleResult:
    mats = build_shell_matrices(kappa)
    classification = classify_shells(kappa, gamma)
    spectral = shell_spectral_check(mats)
    if classification.typical_indices.shape[0] >= 2:
        rows = row_similarity_check(mats, classification, slack=row_slack, outlier_slack=outlier_slack)
        max_row, outlier_mass = rows.max_row_l1, rows.outlier_mass_max
        row_ok, outlier_ok = rows.row_ok, rows.outlier_ok
    else:
        logger.warning("Resample %d has fewer than two typical shells", index)
        max_row, outlier_mass, row_ok, outlier_ok = math.nan, math.nan, False, False
    return ResampleResult(
        resample=index,
        kappas=kappa.kappas,
        n_typical=int(classification.typical.sum()),
        n_outlier=int((~classification.typical).sum()),
        alpha=classification.alpha,
        eta=classification.eta,
        lambda_max_deflated=spectral.second_abs_eigenvalue,
        max_row_l1=max_row,
        outlier_mass_max=outlier_mass,
        row_stochastic_error=float(np.abs(mats.Qbar.sum(axis=1) - 1.0).max()),
        violations=tuple(check_shell_matrices(mats)),
        row_ok=row_ok,
        outlier_ok=outlier_ok,
    )


def _fraction_check(recorder, name, flags, pass_fraction, threshold):
    fraction = sum(flags) / len(flags)
    recorder.check(name, fraction >= pass_fraction, fraction, pass_fraction,
                   note=f"{sum(flags)}/{len(flags)} resamples within {threshold:.4g}")


class ShellAnalysisExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        d, m, tau, gamma = config["d"], config["m"], config["tau"], config["gamma"]
        recorder.derive("tau", tau)
        recorder.derive("q", base_edge_prob(tau, d))

        def one_resample(index, rng):
            kappa = sample_shells(m, tau, d, rng)
            return analyse_resample(index, kappa, gamma, config["row_slack"], config["outlier_slack"])

        results = recorder.map(one_resample, config["resamples"], "shells")
        alpha, eta = results[0].alpha, results[0].eta
        recorder.derive("alpha", alpha)
        recorder.derive("eta", eta)
        recorder.write_csv("shells.csv", self.columns("shells.csv"), [
            (r.resample, r.n_typical, r.n_outlier, r.lambda_max_deflated, r.max_row_l1, r.outlier_mass_max,
             r.row_stochastic_error) for r in results
        ])
        if config["raw_samples"]:
            recorder.write_npz("samples.npz", kappas=np.stack([r.kappas for r in results]))

        violated = sorted({name for r in results for name in r.violations})
        recorder.check("shell_matrix_invariants", not violated, violated, [])
        spectral_threshold = config["spectral_slack"] * math.sqrt(math.log(d) ** 2 / d)
        _fraction_check(recorder, "spectral_gap", [r.lambda_max_deflated <= spectral_threshold for r in results],
                        config["pass_fraction"], spectral_threshold)
        _fraction_check(recorder, "typical_rows", [r.row_ok for r in results], config["pass_fraction"],
                        config["row_slack"] * math.log(d) ** 2 / d)
        _fraction_check(recorder, "outlier_mass", [r.outlier_ok for r in results], config["pass_fraction"],
                        config["outlier_slack"] / d)

        with recorder.phase("quadrature"):
            upper = min(tau * (1.0 + alpha), 1.0 - 1e-9)
            xs = np.linspace(tau, upper, QUADRATURE_POINTS)
            ratios = [outlier_ratio_quadrature(float(x), tau, d, alpha).ratio for x in xs]
        limit = config["quadrature_slack"] / d
        recorder.derive("outlier_ratios", ratios)
        recorder.check("outlier_ratio", max(ratios) <= limit, max(ratios), limit)

        self._ratio_claims(config, recorder, results[0], alpha)
        self._squared_chain(config, recorder)
        self._link_degrees(config, recorder)

    def _ratio_claims(self, config, recorder, first, alpha):
        d, tau = config["d"], config["tau"]
        kappas = first.kappas[first.kappas <= tau * (1.0 + alpha)]
        rng = recorder.rng("ratio_triples")
        worst, failed = 0.0, 0
        for _ in range(config["ratio_triples"] if kappas.shape[0] else 0):
            ki, kj, kl = rng.choice(kappas, size=3, replace=kappas.shape[0] < 3)
            claims = ratio_claims_check(float(ki), float(kj), float(kl), tau, d, alpha=alpha,
                                        slack=config["ratio_slack"])
            worst = max(worst, claims.h_ratio_deviation, claims.ab_ratio_deviation)
            failed += not claims.passed
        recorder.check("ratio_claims", failed == 0, worst, config["ratio_slack"] * alpha * alpha)

    def _squared_chain(self, config, recorder):
        # one small instance; the eigendecomposition of the square is dense
        m = min(config["m"], 400)
        kappa = sample_shells(m, config["tau"], config["d"], recorder.rng("squared_chain"))
        chain = squared_chain_check(build_shell_matrices(kappa))
        recorder.check("squared_chain", chain.consistent and chain.chain_holds, chain.lambda_squared_chain,
                       chain.max_squared_row_l1)

    def _link_degrees(self, config, recorder):
        tau, m, alpha = config["tau"], config["m"], config["degree_alpha"]
        link_d = config["link_d"] or config["d"]

        def one_link(index, rng):
            sample = sample_link_from_cap(m, tau, link_d, rng)
            return degree_concentration_check(sample.graph, build_shell_matrices(sample.shells), alpha=alpha)

        reports = recorder.map(one_link, config["degree_resamples"], "link")
        frequency = degree_concentration_frequency(reports, tolerance=1.0 - config["pass_fraction"])
        recorder.derive("link_d", link_d)
        recorder.derive("link_q", base_edge_prob(tau, link_d))
        recorder.derive("link_degree_failure_bound", frequency.predicted_failure)
        recorder.derive("link_degree_failure_rate", frequency.failure_rate)
        recorder.derive("link_zero_degree_resamples", frequency.zero_degree)
        note = f"{frequency.failures}/{frequency.resamples} links over 1/(1 - {alpha})"
        if frequency.vacuous:
            note += "; Bernstein bound vacuous at this q(m - 1)"
        recorder.check("link_degree_concentration", frequency.passed, frequency.failure_rate, frequency.allowed,
                       note=note)

        with recorder.phase("link_spectrum"):
            sample = sample_link_from_cap(m, tau, link_d, recorder.rng("link_spectrum"))
            if np.all(sample.graph.degrees > 0.0):
                recorder.derive("link_abs_lambda2", link_spectrum(sample).second_abs_eigenvalue)

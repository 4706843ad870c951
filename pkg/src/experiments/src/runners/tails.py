import logging

from experiments.src.runners.base import ExperimentRunner
from sphere_core.src.tools import BetaDist, beta_tail, tail_sandwich, tau_of

logger = logging.getLogger(__name__)


def tail_rows(d_grid, t_grid):
    rows = []
    for d in d_grid:
        dist = BetaDist(d)
        for t in t_grid:
            tail = beta_tail(dist, t)
            bounds = tail_sandwich(t, d)
            inside = tail <= bounds.upper and (bounds.lower is None or bounds.lower <= tail)
            rows.append((d, t, tail, bounds.lower, bounds.upper, inside))
    return rows


def inversion_rows(d_grid, p_grid):
    rows = []
    for d in d_grid:
        dist = BetaDist(d)
        for p in p_grid:
            tau = tau_of(p, d)
            rows.append((d, p, tau, abs(beta_tail(dist, tau) - p)))
    return rows


class TailsExperiment(ExperimentRunner):
    def execute(self, config, recorder):
        with recorder.phase("sandwich"):
            tails = tail_rows(config["d_grid"], config["t_grid"])
        outside = [(d, t) for d, t, _, _, _, inside in tails if not inside]
        recorder.write_csv("tails.csv", self.columns("tails.csv"), tails)
        recorder.check("tail_sandwich", not outside, len(outside), 0,
                       note=f"grid points outside the sandwich: {outside}" if outside else "")
        recorder.derive("sandwich_lower_vacuous", sum(1 for row in tails if row[3] is None))

        with recorder.phase("inversion"):
            inversion = inversion_rows(config["d_grid"], config["p_grid"])
        recorder.write_csv("inversion.csv", self.columns("inversion.csv"), inversion)
        worst = max(row[3] for row in inversion)
        recorder.check("inversion_round_trip", worst <= config["roundtrip_tol"], worst, config["roundtrip_tol"])
        logger.info("Tails: %d sandwich rows, worst round trip %.3g", len(tails), worst)

import logging
from dataclasses import dataclass
from typing import Optional

# Logging configuration
logging.basicConfig(level=logging.INFO)


@dataclass(frozen=True)
class Param:
    kind: str  # "int", "float", "bool", "int_list", "float_list"
    low: Optional[float] = None
    high: Optional[float] = None
    low_open: bool = False
    high_open: bool = False
    nullable: bool = False


_T_GRID = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9]


# Configuration object
class Config:

    DEFAULT_RESAMPLES = 100

    # keys accepted by the config file besides experiment parameters
    RESERVED_KEYS = ("master_seed", "output_dir", "workers")

    PARAMETER_SCHEMA = {
        # shared
        "n": Param("int", low=3),
        "d": Param("int", low=2, nullable=True),
        "p": Param("float", low=0.0, high=1.0, low_open=True, nullable=True),
        "tau": Param("float", low=-1.0, high=1.0, high_open=True, nullable=True),
        "trials": Param("int", low=1),
        "resamples": Param("int", low=1),
        "pass_fraction": Param("float", low=0.0, high=1.0),
        "raw_samples": Param("bool"),
        "tol": Param("float", low=0.0, low_open=True),
        # tails
        "d_grid": Param("int_list", low=2),
        "t_grid": Param("float_list", low=0.0, high=1.0, low_open=True, high_open=True),
        "p_grid": Param("float_list", low=0.0, high=1.0, low_open=True, high_open=True),
        "roundtrip_tol": Param("float", low=0.0, low_open=True),
        # sphere-spectrum
        "seeds": Param("int", low=1),
        "lambda_window": Param("float", low=0.0),
        # hdx-verify
        "eps": Param("float", low=0.0, high=1.0, low_open=True, high_open=True),
        "eta_param": Param("float", low=0.0, low_open=True),
        "link_slack": Param("float", low=0.0),
        "min_pn": Param("float", low=0.0),
        "min_qpn": Param("float", low=0.0),
        # tightness
        "lambda_target": Param("float", low=0.05, high=0.5, high_open=True),
        "attempts": Param("int", low=1),
        "skeleton_slack": Param("float", low=0.0),
        "tv_threshold": Param("float", low=0.0, high=1.0),
        # mixing
        "k_max": Param("int", low=2),
        "bins": Param("int", low=10),
        "decay_slack": Param("float", low=0.0, low_open=True),
        "tv_saturation": Param("float", low=0.0, high=1.0, low_open=True),
        "bm_d": Param("int", low=2),
        "bm_t_grid": Param("float_list", low=0.0),
        "bm_trials": Param("int", low=1),
        # walk-combinatorics
        "ell_max": Param("int", low=2, high=8),
        "n_labels": Param("int", low=2),
        "forests": Param("int", low=0),
        "forest_vertices": Param("int", low=2, high=8),
        "forest_d_grid": Param("int_list", low=2),
        "forest_p": Param("float", low=0.0, high=1.0, low_open=True),
        "forest_trials": Param("int", low=1),
        "triangle_d": Param("int", low=2),
        "triangle_p": Param("float", low=0.0, high=1.0, low_open=True, high_open=True),
        "triangle_trials": Param("int", low=1),
        "trace_n": Param("int", low=2, high=64),
        "trace_d": Param("int", low=2),
        "trace_p": Param("float", low=0.0, high=1.0, low_open=True, high_open=True),
        "trace_ell": Param("int", low=2, high=8),
        "trace_trials": Param("int", low=2),
        # shell-analysis
        "m": Param("int", low=2),
        "gamma": Param("float", low=0.0, low_open=True),
        "spectral_slack": Param("float", low=0.0, low_open=True),
        "row_slack": Param("float", low=0.0, low_open=True),
        "outlier_slack": Param("float", low=0.0, low_open=True),
        "quadrature_slack": Param("float", low=0.0, low_open=True),
        "ratio_slack": Param("float", low=0.0, low_open=True),
        "ratio_triples": Param("int", low=0),
        "link_d": Param("int", low=4, nullable=True),
        "degree_resamples": Param("int", low=1),
        "degree_alpha": Param("float", low=0.0, high=1.0, low_open=True, high_open=True),
    }

    EXPERIMENTS = {
        "experiments": [
            {
                "path": "experiments.src.runners.tails",
                "class": "TailsExperiment",
                "name": "tails",
                "description": "Beta_d tails against their analytic sandwich, and tau_of round trips.",
                "defaults": {
                    "d_grid": [20, 50, 100, 200, 500],
                    "t_grid": _T_GRID,
                    "p_grid": [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9],
                    "roundtrip_tol": 1e-10,
                },
                "columns": {
                    "tails.csv": ["d", "t", "tail", "lower", "upper", "in_sandwich"],
                    "inversion.csv": ["d", "p", "tau", "roundtrip_error"],
                },
            },
            {
                "path": "experiments.src.runners.sphere_spectrum",
                "class": "SphereSpectrumExperiment",
                "name": "sphere-spectrum",
                "description": "lambda_2 of the normalized adjacency of Geo_d(n, p) over independent seeds.",
                "defaults": {
                    "n": 3000, "d": 60, "p": 0.1, "tau": None, "seeds": 20,
                    "lambda_window": 0.1, "pass_fraction": 0.9, "tol": 1e-10, "raw_samples": False,
                },
                "columns": {
                    "spectrum.csv": ["seed_index", "n", "d", "p", "tau", "lambda2", "abs_lambda2",
                                     "rayleigh_lower", "isolated", "method"],
                },
            },
            {
                "path": "experiments.src.runners.hdx_verify",
                "class": "HdxVerifyExperiment",
                "name": "hdx-verify",
                "description": "Sample the geometric 2-complex and check its links, 1-skeleton and trickle-down.",
                "defaults": {
                    "n": 300, "eps": 0.8, "eta_param": 2.0, "d": None, "link_slack": 0.1,
                    "min_pn": 10.0, "min_qpn": 1.0, "tol": 1e-9, "raw_samples": False,
                },
                "columns": {
                    "links.csv": ["vertex", "link_size", "raw_neighbor_count", "abs_lambda2", "lambda2", "method"],
                },
            },
            {
                "path": "experiments.src.runners.tightness",
                "class": "TightnessExperiment",
                "name": "tightness",
                "description": "Complex with tau = lambda/(1-lambda): skeleton lambda_2 against the link bound.",
                "defaults": {
                    "lambda_target": 1.0 / 3.0, "n": 3000, "d": 10, "attempts": 3,
                    "skeleton_slack": 0.1, "link_slack": 0.1, "tv_threshold": 0.05, "raw_samples": False,
                },
                "columns": {
                    "tightness_links.csv": ["vertex", "link_size", "abs_lambda2"],
                },
            },
            {
                "path": "experiments.src.runners.mixing",
                "class": "MixingExperiment",
                "name": "mixing",
                "description": "Cap-walk TV decay and Brownian motion concentration on the sphere.",
                "defaults": {
                    "d": 100, "p": None, "tau": 0.5, "k_max": 5, "trials": 100000, "bins": 100,
                    "decay_slack": 1.25, "tv_saturation": 0.5,
                    "bm_d": 50, "bm_t_grid": [0.005, 0.01, 0.02], "bm_trials": 10000,
                },
                "columns": {
                    "tv_table.csv": ["k", "tv_estimate", "noise_floor", "trials"],
                    "bm_tails.csv": ["t", "x", "empirical", "bound", "mc_error", "ok"],
                    "bm_means.csv": ["t", "mean", "expected", "ci"],
                    "bm_martingale.csv": ["t", "x", "empirical", "bound", "mc_error", "ok"],
                },
            },
            {
                "path": "experiments.src.runners.walk_combinatorics",
                "class": "WalkCombinatoricsExperiment",
                "name": "walk-combinatorics",
                "description": "Exhaustive closed-walk shape invariants and Monte Carlo subgraph probabilities.",
                "defaults": {
                    "ell_max": 6, "n_labels": 5, "forests": 20, "forest_vertices": 5,
                    "forest_d_grid": [20, 80], "forest_p": 0.3, "forest_trials": 20000,
                    "triangle_d": 80, "triangle_p": 0.05, "triangle_trials": 1000000,
                    "trace_n": 32, "trace_d": 20, "trace_p": 0.3, "trace_ell": 4, "trace_trials": 20,
                },
                "columns": {
                    "classes.csv": ["ell", "a", "b", "c", "true_count", "paper_bound"],
                    "patterns.csv": ["pattern_id", "estimate", "ci_low", "ci_high", "analytic_reference"],
                },
            },
            {
                "path": "experiments.src.runners.shell_analysis",
                "class": "ShellAnalysisExperiment",
                "name": "shell-analysis",
                "description": "Shell matrices Q and Qbar over resampled shells, with per-instance structural checks.",
                "defaults": {
                    "d": 400, "m": 1500, "tau": 0.5, "gamma": 1.0, "resamples": DEFAULT_RESAMPLES,
                    "pass_fraction": 0.95, "spectral_slack": 3.0, "row_slack": 3.0, "outlier_slack": 3.0,
                    "quadrature_slack": 5.0, "ratio_slack": 10.0, "ratio_triples": 20, "link_d": None,
                    "degree_resamples": 100, "degree_alpha": 0.3, "raw_samples": False,
                },
                "columns": {
                    "shells.csv": ["resample", "n_typical", "n_outlier", "lambda_max_deflated",
                                   "max_row_l1", "outlier_mass_max", "row_stochastic_error"],
                },
            },
        ]
    }

    @classmethod
    def experiment_info(cls, name):
        for info in cls.EXPERIMENTS["experiments"]:
            if info["name"] == name:
                return info
        return None

    @classmethod
    def experiment_names(cls):
        return [info["name"] for info in cls.EXPERIMENTS["experiments"]]

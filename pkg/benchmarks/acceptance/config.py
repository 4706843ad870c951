import os

repo_root = os.path.dirname(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

output_dir = os.path.join(repo_root, "runs", "acceptance")
master_seed = 20240917
workers = os.cpu_count() or 1

# wall-clock budget per criterion, seconds; exceeding it is reported, not failed
time_budgets = {
    1: 10, 2: 5, 3: 60, 4: 600, 5: 600, 6: 1200, 7: 300,
    8: 300, 9: 120, 10: 300, 11: 900, 12: 900, 13: 60,
}

tail_d_grid = [20, 50, 100, 200, 500]
tail_t_grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9]
inversion_p_grid = [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9]
inversion_tolerance = 1e-10

oracle_graphs = 50
oracle_max_n = 256
oracle_tolerance = 1e-8

trickle_down_sizes = [300, 600, 1000]
trickle_down_eps = 0.8
trickle_down_tolerance = 1e-9

link_check = {"d": 200, "tau": 0.5, "m": 1500, "links": 20, "window": 0.1}

spectrum = {"n": 3000, "d": 60, "p": 0.1, "seeds": 20, "lambda_window": 0.1, "pass_fraction": 0.9}

mixing = {"d": 100, "tau": 0.5, "trials": 100000, "decay_slack": 1.25,
          "bm_d": 50, "bm_t_grid": [0.005, 0.01, 0.02], "bm_trials": 10000}

walks = {"ell_max": 6, "n_labels": 5, "forests": 20, "triangle_d": 80, "triangle_p": 0.05,
         "triangle_trials": 1000000}

shells = {"d": 400, "m": 1500, "tau": 0.5, "gamma": 1.0, "resamples": 100}

tightness = {"lambda_target": 1.0 / 3.0}

# small configs re-run twice for the byte-identity check
determinism_runs = {
    "tails": {"d_grid": [20, 100], "t_grid": [0.1, 0.5]},
    "walk-combinatorics": {"ell_max": 4, "n_labels": 4, "forests": 3, "forest_trials": 2000,
                           "triangle_trials": 20000, "trace_trials": 3},
    "sphere-spectrum": {"n": 300, "d": 20, "p": 0.1, "seeds": 3},
}

# Configuration object
class Config:

    # enumerate_shapes refuses n_labels ** ell above this
    ENUMERATION_BUDGET = 10 ** 7

    MAX_PATTERN_VERTICES = 8
    MAX_TRACE_N = 64
    MAX_TRACE_ELL = 8

    # two-sided Wilson interval level, about 3 sigma
    CI_LEVEL = 0.997
    MC_CHUNK = 5000

    # Markov step: Pr[|M| >= e^eps (E tr M^l)^{1/l}] <= e^{-eps l}
    MARKOV_EPSILON = 0.5

    # analytic triangle window: p^2 (p + TRIANGLE_SLACK * tau * sqrt(log(1/p) / 2))
    TRIANGLE_SLACK = 1.5
    TRIANGLE_INSIDE = "inside"
    TRIANGLE_OUTSIDE = "outside"
    TRIANGLE_UPPER_BOUND_ONLY = "upper_bound_only"

# Configuration object
class Config:

    # Euler-Maruyama stability requirement dt * (d - 1) <= STABILITY_LIMIT
    STABILITY_LIMIT = 0.1
    # default step: dt = BM_DT_FACTOR / (d - 1); keeps discretization bias below MC error at 1e4 paths
    BM_DT_FACTOR = 0.002

    DEFAULT_BINS = 100
    MIN_BINS = 10

    MC_SIGMAS = 3.0
    DEFAULT_TAIL_GRID = (0.02, 0.05, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5)

    # decay fits keep only estimates >= NOISE_MULTIPLIER * noise floor
    NOISE_MULTIPLIER = 2.0

    DKW_ALPHA = 0.01
    MIN_DOMINANCE_SAMPLES = 10_000
    DOMINANCE_GRID = 201

    NORMALIZATION_TOL = 1e-8

    # walkers advanced per block
    BATCH_SIZE = 20000

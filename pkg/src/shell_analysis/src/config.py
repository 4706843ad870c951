# Configuration object
class Config:

    # dense eigensolver up to this many shells, Lanczos above; Q itself is always materialized
    DENSE_MAX_M = 2048

    DEFAULT_GAMMA = 1.0
    # alpha = ALPHA_CONSTANT * log d / (tau^2 (d - 3) (1 - eta))
    ALPHA_CONSTANT = 36.0
    ETA_TOL = 1e-12

    # slack constants for the per-instance shell checks
    SPECTRAL_SLACK = 3.0
    ROW_SLACK = 3.0
    OUTLIER_MASS_SLACK = 3.0
    OUTLIER_RATIO_SLACK = 5.0
    RATIO_CLAIM_SLACK = 10.0
    DEFAULT_DEGREE_ALPHA = 0.3

    QUAD_EPSREL = 1e-8
    QUAD_LIMIT = 200
    PEAK_GRID = 257

    ROW_STOCHASTIC_TOL = 1e-12
    BALANCE_TOL = 1e-12
    CONSISTENCY_TOL = 1e-9

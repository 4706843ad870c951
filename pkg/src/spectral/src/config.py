# Configuration object
class Config:

    DEFAULT_TOL = 1e-10

    # dense LAPACK path up to this many vertices
    DENSE_MAX_N = 512

    # Lanczos budget: ITERATION_FACTOR * sqrt(n) * log(1/tol) restarts
    ITERATION_FACTOR = 50
    ARPACK_TOL_FACTOR = 1e-2
    START_VECTOR_SEED = 0x5EED

    # the known top eigenvector is moved to -/+ DEFLATION_SHIFT, outside [-1, 1]
    DEFLATION_SHIFT = 2.0

    SYMMETRY_TOL = 1e-12
    DEGENERATE_EMBEDDING_TOL = 1e-14
    STATIONARY_SUM_TOL = 1e-9
    RANK_TOL = 1e-9

    HISTOGRAM_BINS = 50

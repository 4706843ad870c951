# Configuration object
class Config:

    # Adaptive quadrature (scipy QUADPACK, Gauss-Kronrod 21)
    QUAD_EPSREL = 1e-12
    QUAD_LIMIT = 200

    # Integrand cutoff: cos^(d-2) is truncated once it falls below exp(-TAIL_CUTOFF)
    # of its value at the threshold
    TAIL_CUTOFF = 45.0

    # Fixed-order Gauss-Legendre rule used for vectorized tails
    GL_ORDER = 32
    GL_PANELS = 4

    BISECTION_TOL = 1e-12
    BISECTION_MAX_ITER = 200

    NORM_TOL = 1e-12

    # Inverse-CDF sampler for Beta_d restricted to [tau, 1]
    SAMPLER_GRID = 2049
    NEWTON_STEPS = 6

    # slack in nu = tau + slack / sqrt(d)
    COMBO_SLACK = 4.0

    # rows generated per block by the batched samplers
    BATCH_SIZE = 20000

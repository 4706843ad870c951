# Configuration object
class Config:

    # resource guard on n(n-1)/2 inner products in sample_geo_graph
    MAX_PAIR_EVALUATIONS = 50_000_000

    # rows of the Gram matrix materialized at once
    GRAM_BLOCK_ROWS = 1024

    # closing edges expanded per pass of triangle enumeration
    CLOSING_EDGE_BATCH = 65536

    SERIAL_FORMAT = "hdxgeo-complex"
    SERIAL_VERSION = 1

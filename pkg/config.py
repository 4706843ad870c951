import os

repo_root = os.path.dirname(os.path.abspath(__file__))


class HdxgeoConfig:
    CODE_VERSION = "hdxgeo-0.3.0"
    MANIFEST_SCHEMA_VERSION = 2

    ENV_PREFIX = "HDXGEO_"
    DEFAULT_OUTPUT_DIR = os.path.join(repo_root, "runs")
    DEFAULT_MASTER_SEED = 20240917
    DEFAULT_WORKERS = 1

    # Exit codes of `hdxgeo <experiment>`
    EXIT_OK = 0
    EXIT_ERROR = 1
    EXIT_CHECK_FAILED = 2

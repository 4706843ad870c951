"""
Portable JSON format for a sampled graph and its 2-complex.

    {"edges": [[i, j], ...],                  sorted pairs, i < j
     "format": "hdxgeo-complex",
     "header": {"d": .., "n": .., "p": .., "seed": .., "tau": ..},
     "triangles": [[i, j, k], ...],           sorted triples, i < j < k
     "version": 1}

Keys are sorted, separators compact, one trailing newline. Floats use
Python's shortest round-trip repr, so write -> read -> write is byte-identical.
Latent points are not stored; a graph read back has ``cloud=None``.
"""
import json
import logging
import math

import numpy as np

from geo_complex.src.config import Config
from geo_complex.src.tools import build_two_complex, complex_from_triangles, graph_from_edges

logger = logging.getLogger(__name__)


class SerializationError(ValueError):
    pass


def _float_or_none(x):
    return None if x is None or math.isnan(x) else float(x)


def dumps_complex(g, c=None) -> str:
    if c is None:
        c = build_two_complex(g)
    payload = {
        "format": Config.SERIAL_FORMAT,
        "version": Config.SERIAL_VERSION,
        "header": {
            "n": g.n,
            "d": g.d,
            "p": _float_or_none(g.p),
            "tau": _float_or_none(g.tau),
            "seed": g.seed,
        },
        "edges": g.edges().tolist(),
        "triangles": c.triangles.tolist(),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def loads_complex(text):
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise SerializationError(f"not a JSON document: {e}") from e
    if payload.get("format") != Config.SERIAL_FORMAT or payload.get("version") != Config.SERIAL_VERSION:
        raise SerializationError(
            f"unsupported format {payload.get('format')!r} version {payload.get('version')!r}"
        )
    header = payload["header"]
    p = math.nan if header["p"] is None else header["p"]
    tau = math.nan if header["tau"] is None else header["tau"]
    g = graph_from_edges(header["n"], np.asarray(payload["edges"], dtype=np.int64),
                         tau=tau, p=p, d=header["d"], seed=header["seed"])
    c = complex_from_triangles(header["n"], np.asarray(payload["triangles"], dtype=np.int64))
    return g, c


def write_complex(path, g, c=None):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(dumps_complex(g, c))
    logger.info("Wrote complex with %d vertices to %s", g.n, path)


def read_complex(path):
    with open(path, "r", encoding="utf-8") as f:
        return loads_complex(f.read())

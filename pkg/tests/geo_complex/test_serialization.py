import json

import numpy as np
import pytest

from geo_complex.src.serialization import SerializationError, dumps_complex, loads_complex, read_complex, \
    write_complex
from geo_complex.src.tools import build_two_complex, sample_geo_graph


@pytest.fixture(scope="module")
def sampled():
    g = sample_geo_graph(60, 6, 0.3, seed=11)
    return g, build_two_complex(g)


def test_write_read_write_is_byte_identical(sampled, tmp_path):
    g, c = sampled
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    write_complex(first, g, c)
    g2, c2 = read_complex(first)
    write_complex(second, g2, c2)
    assert first.read_bytes() == second.read_bytes()


def test_loaded_graph_matches(sampled):
    g, c = sampled
    g2, c2 = loads_complex(dumps_complex(g, c))
    assert np.array_equal(g.edges(), g2.edges())
    assert np.array_equal(c.triangles, c2.triangles)
    assert g2.cloud is None
    assert g2.tau == g.tau and g2.p == g.p and g2.seed == 11 and g2.d == 6


def test_document_layout(sampled):
    g, c = sampled
    text = dumps_complex(g)
    assert text.endswith("\n")
    payload = json.loads(text)
    assert list(payload) == sorted(payload)
    assert payload["header"]["n"] == 60
    assert payload["triangles"] == c.triangles.tolist()


def test_rejects_foreign_documents():
    with pytest.raises(SerializationError):
        loads_complex("not json")
    with pytest.raises(SerializationError):
        loads_complex(json.dumps({"format": "other", "version": 1}))

import json

import numpy as np
import pytest

from cepde import bundled_corpus_path, parse
from cepde.expr import JetPoint, hessian_pairs


@pytest.fixture(scope="session")
def corpus_entries():
    with open(bundled_corpus_path(), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture(scope="session")
def corpus_exprs(corpus_entries):
    """name -> (Expr, n) for the bundled corpus."""
    return {e["name"]: (parse(e["expression"], e["n"]), e["n"])
            for e in corpus_entries}


def random_jetpoint(rng, n: int, lo: float = -2.0, hi: float = 2.0) -> JetPoint:
    m = len(hessian_pairs(n))
    return JetPoint(tuple(rng.uniform(lo, hi, size=n)),
                    float(rng.uniform(lo, hi)),
                    tuple(rng.uniform(lo, hi, size=n)),
                    tuple(rng.uniform(lo, hi, size=m)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)

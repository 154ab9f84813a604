import numpy as np
import pytest

from phonoscript import DistributionVector, Sentence, SentencePool, UnitInventory


@pytest.fixture
def toy_pool():
    """Eight handmade sentences over a ten-unit inventory."""
    labels = ["ma1", "ma3", "de5", "shi4", "bu4", "ni3", "hao3", "ta1", "le5", "zai4"]
    inv = UnitInventory(labels)
    unit_rows = [
        (0, 0, 2),
        (1, 2, 2, 3),
        (3, 4, 5),
        (5, 6, 6, 0),
        (7, 8, 2),
        (9, 1, 4, 4),
        (2, 3, 7, 9),
        (6, 8, 5, 1),
    ]
    sentences = [
        Sentence(id=i, text=f"sent{i}", units=row) for i, row in enumerate(unit_rows)
    ]
    return SentencePool(inv, sentences)


@pytest.fixture
def toy_d_real(toy_pool):
    rng = np.random.default_rng(5)
    return DistributionVector(rng.integers(1, 40, size=toy_pool.inventory.s).astype(float))

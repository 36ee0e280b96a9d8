import random

import pytest

from errorscope_adapter.pipelines import StubPipeline

WORDS = [
    "card", "balance", "transfer", "weather", "forecast", "route", "distance",
    "airport", "alert", "travel", "warning", "hello", "morning", "schedule",
]


def toy_dataset(n_train=30, n_eval=20, seed=7):
    rng = random.Random(seed)
    classes = StubPipeline().class_names

    def rows(n, offset):
        out = []
        for i in range(n):
            text = " ".join(rng.choice(WORDS) for _ in range(rng.randint(2, 9)))
            label = rng.choice(classes + ["oos"] * 1)
            out.append({"id": i, "text": f"{text} v{offset + i}", "label": label})
        return out

    return {"train": rows(n_train, 0), "eval": rows(n_eval, 1000)}


@pytest.fixture
def dataset():
    return toy_dataset()


@pytest.fixture
def stub():
    return StubPipeline()

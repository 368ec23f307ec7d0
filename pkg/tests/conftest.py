import pytest

from christoffel import alpha_ball_body, disk, evaluator_for_body

ALPHAS = (1.2, 1.5, 1.8)


def body_for(key):
    if key == "disk":
        return disk()
    if isinstance(key, tuple) and key[0] == "alpha":
        return alpha_ball_body(key[1])
    raise KeyError(key)


@pytest.fixture(scope="session")
def ev_cache():
    """Session-wide evaluator cache; factorizations dominate runtime."""
    cache = {}

    def get(body_key, n):
        k = (body_key, n)
        if k not in cache:
            cache[k] = evaluator_for_body(body_for(body_key), n)
        return cache[k]

    return get

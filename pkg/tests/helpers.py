import numpy as np
from hypothesis import strategies as st

from caldist.core import Instance, Partition


def random_instance(rng, n, uniform=False, noiseless=False, zero_mass=False):
    mass = np.full(n, 1.0 / n) if uniform else rng.dirichlet(np.ones(n))
    if zero_mass and n > 1:
        mass[rng.integers(n)] = 0.0
        mass = mass / mass.sum()
    mu = rng.integers(0, 2, n).astype(float) if noiseless else rng.random(n)
    return Instance.from_arrays(mass, mu, rng.random(n))


def pool_instance(rng, n, k):
    """Instance whose (mass, mu) pairs come from a pool of ``k`` types."""
    pool_mu = rng.random(k)
    pool_w = rng.random(k) + 0.2
    t = rng.integers(0, k, n)
    w = pool_w[t]
    return Instance.from_arrays(w / w.sum(), pool_mu[t], rng.random(n))


@st.composite
def instances(draw, min_n=1, max_n=6):
    n = draw(st.integers(min_n, max_n))
    w = draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n))
    mu = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    f = draw(st.lists(st.floats(0.0, 1.0), min_size=n, max_size=n))
    w = np.array(w)
    return Instance.from_arrays(w / w.sum(), mu, f)


@st.composite
def instance_and_partition(draw, min_n=1, max_n=6):
    inst = draw(instances(min_n, max_n))
    labels = draw(st.lists(st.integers(0, len(inst) - 1), min_size=len(inst), max_size=len(inst)))
    return inst, Partition(inst.ids, tuple(labels))

import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from caldist.core import Instance, Partition, Predictor, cost_of_partition, induced_predictor, is_calibrated
from caldist.errors import StateSpaceTooLarge
from caldist.generators import gen_bghn
from caldist.oracle import oracle_caldist
from caldist.typesparse import build_type_index, typesparse_caldist

from helpers import pool_instance, random_instance


def test_type_counts():
    assert build_type_index(Instance.from_arrays([0.25] * 4, [0, 1, 1, 0], [0.1, 0.2, 0.3, 0.4])).k == 2
    assert build_type_index(Instance.from_arrays([0.25] * 4, [0.3] * 4, [0.1, 0.2, 0.3, 0.4])).k == 1
    inst = Instance.from_arrays([0.1, 0.2, 0.3, 0.15, 0.25], [0.5] * 5, [0.5] * 5)
    assert build_type_index(inst).k == 5


def test_members_sorted_by_prediction():
    rng = np.random.default_rng(3)
    tix = build_type_index(pool_instance(rng, 12, 3))
    assert sorted(np.concatenate(tix.members).tolist()) == list(range(12))
    for fs in tix.f_sorted:
        assert np.all(np.diff(fs) >= 0)


def test_near_equal_types_not_merged():
    inst = Instance.from_arrays([0.5, 0.5], [0.3, 0.3 + 1e-10], [0.1, 0.9])
    assert build_type_index(inst).k == 2


def test_worked_four():
    res = typesparse_caldist(Instance.from_arrays([0.25] * 4, [0, 0, 1, 1], [0.1, 0.4, 0.6, 0.9]))
    assert res.value == pytest.approx(0.1, abs=1e-9)
    assert res.details["k"] == 2


def test_bghn():
    assert typesparse_caldist(gen_bghn(0.01)).value == pytest.approx(0.01, abs=1e-9)


def test_single_type_is_one_part_cost():
    rng = np.random.default_rng(8)
    for n in (2, 5, 9):
        inst = Instance.from_arrays([1 / n] * n, [0.35] * n, rng.random(n))
        res = typesparse_caldist(inst)
        assert res.value == pytest.approx(cost_of_partition(inst, Partition.single(inst)), abs=1e-12)
        assert res.value == pytest.approx(oracle_caldist(inst).value, abs=1e-12)


def test_state_guard():
    inst = Instance.from_arrays([0.25] * 4, [0, 0, 1, 1], [0.1, 0.4, 0.6, 0.9])
    with pytest.raises(StateSpaceTooLarge) as exc:
        typesparse_caldist(inst, max_states=8)
    assert exc.value.limit == 8 and exc.value.requested == 9


@pytest.mark.parametrize("seed", range(40))
def test_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 10))
    inst = pool_instance(rng, n, int(rng.integers(1, 4)))
    res = typesparse_caldist(inst)
    assert res.value == pytest.approx(oracle_caldist(inst).value, abs=1e-9)
    assert cost_of_partition(inst, res.witness) == pytest.approx(res.value, abs=1e-9)


@pytest.mark.parametrize("n", range(1, 11))
def test_uniform_noiseless_matches_oracle(n):
    rng = np.random.default_rng(100 + n)
    inst = random_instance(rng, n, uniform=True, noiseless=True)
    assert typesparse_caldist(inst).value == pytest.approx(oracle_caldist(inst).value, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_witness_contiguous_per_type(seed):
    rng = np.random.default_rng(seed)
    inst = pool_instance(rng, 10, 3)
    labels = np.array(typesparse_caldist(inst).witness.labels)
    for members in build_type_index(inst).members:
        seq = labels[members]
        # each part shows up as one run along the f-sorted order
        runs = [seq[0]] + [b for a, b in zip(seq, seq[1:]) if a != b]
        assert len(runs) == len(set(runs))


def test_uniform_noiseless_64_under_a_second():
    rng = np.random.default_rng(64)
    inst = random_instance(rng, 64, uniform=True, noiseless=True)
    t0 = time.perf_counter()
    typesparse_caldist(inst)
    assert time.perf_counter() - t0 < 1.0


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_swapping_same_type_predictions_keeps_calibration(seed):
    rng = np.random.default_rng(seed)
    inst = pool_instance(rng, 7, 2)
    g = induced_predictor(inst, Partition(inst.ids, tuple(rng.integers(0, 4, 7))))
    assert is_calibrated(inst, g)
    tix = build_type_index(inst)
    for members in tix.members:
        if len(members) < 2:
            continue
        a, b = rng.choice(members, 2, replace=False)
        v = list(g.values)
        v[a], v[b] = v[b], v[a]
        assert is_calibrated(inst, Predictor(inst.ids, tuple(v)))

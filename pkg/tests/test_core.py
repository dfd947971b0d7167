import numpy as np
import pytest
from hypothesis import given

from caldist.core import (
    Element,
    Instance,
    Partition,
    Predictor,
    cost_of_partition,
    cost_of_subset,
    induced_predictor,
    is_calibrated,
    l1_distance,
    mu_of_subset,
    tv_distance,
)
from caldist.errors import DomainMismatch, EmptySubset, InvalidInstance, PartitionMismatch, ZeroMass
from caldist.generators import gen_bghn

from helpers import instance_and_partition, instances


def two(m1, u1, f1, m2, u2, f2):
    return Instance((Element("a", m1, u1, f1), Element("b", m2, u2, f2)))


@pytest.fixture
def four():
    return Instance.from_arrays([0.25] * 4, [0, 0, 1, 1], [0.1, 0.4, 0.6, 0.9])


class TestInstance:
    def test_rejects_bad_mass_sum(self):
        with pytest.raises(InvalidInstance):
            Instance.from_arrays([0.5, 0.4], [0, 1], [0, 1])

    def test_rejects_duplicate_ids(self):
        with pytest.raises(InvalidInstance):
            Instance((Element("a", 0.5, 0, 0), Element("a", 0.5, 1, 1)))

    @pytest.mark.parametrize("field", ["mu", "f"])
    def test_rejects_out_of_range(self, field):
        kw = {"mu": [0.5, 0.5], "f": [0.5, 0.5]}
        kw[field] = [0.5, 1.5]
        with pytest.raises(InvalidInstance):
            Instance.from_arrays([0.5, 0.5], **kw)

    def test_rejects_empty(self):
        with pytest.raises(InvalidInstance):
            Instance(())

    def test_predicates(self, four):
        assert four.is_uniform() and four.is_noiseless()
        assert not gen_bghn(0.01).with_mu([0.5, 1, 0, 1]).is_noiseless()

    def test_zero_mass_allowed(self):
        inst = Instance.from_arrays([1.0, 0.0], [0.3, 0.9], [0.3, 0.1])
        assert cost_of_partition(inst, Partition.single(inst)) == pytest.approx(0.0)


class TestSubsets:
    def test_constant_mu(self):
        inst = Instance.from_arrays([0.2, 0.3, 0.5], [0.7] * 3, [0, 0.5, 1])
        assert mu_of_subset(inst, ["x0", "x2"]) == pytest.approx(0.7)

    def test_symmetric(self):
        assert mu_of_subset(two(0.5, 1, 0, 0.5, 0, 0), ["a", "b"]) == pytest.approx(0.5)

    def test_weighted(self):
        assert mu_of_subset(two(0.75, 0.2, 0, 0.25, 1.0, 0), ["a", "b"]) == pytest.approx(0.4)

    def test_singleton_calibrated(self):
        assert cost_of_subset(two(0.5, 0.3, 0.3, 0.5, 0, 1), ["a"]) == pytest.approx(0.0)

    def test_bghn_one_part(self):
        inst = gen_bghn(0.01)
        assert cost_of_subset(inst, inst.ids) == pytest.approx(0.01, abs=1e-12)

    def test_two_point(self):
        assert cost_of_subset(two(0.5, 1, 0.2, 0.5, 0, 0.9), ["a", "b"]) == pytest.approx(0.35)

    def test_errors(self):
        inst = Instance.from_arrays([1.0, 0.0], [0.3, 0.9], [0.3, 0.1])
        with pytest.raises(EmptySubset):
            mu_of_subset(inst, [])
        with pytest.raises(ZeroMass):
            mu_of_subset(inst, ["x1"])


class TestPartition:
    def test_canonical_form(self):
        p = Partition(("a", "b", "c"), (5, 2, 5))
        assert p.labels == (0, 1, 0)
        assert p.num_parts == 2
        assert p.parts() == [("a", "c"), ("b",)]

    def test_from_parts_round_trip(self, four):
        p = Partition.from_parts(four, [["x0"], ["x1", "x2"], ["x3"]])
        assert Partition.from_assignment(p.assignment) == p

    def test_mismatch(self, four):
        p = Partition(("a", "b", "c", "d"), (0, 0, 0, 0))
        with pytest.raises(PartitionMismatch):
            cost_of_partition(four, p)

    def test_singletons_calibrated(self):
        inst = Instance.from_arrays([0.1, 0.2, 0.7], [0.2, 0.5, 0.9], [0.2, 0.5, 0.9])
        assert cost_of_partition(inst, Partition.singletons(inst)) == pytest.approx(0.0)

    def test_bghn_single(self):
        inst = gen_bghn(0.01)
        assert cost_of_partition(inst, Partition.single(inst)) == pytest.approx(0.01, abs=1e-12)

    def test_worked_four(self, four):
        p = Partition.from_parts(four, [["x0"], ["x1", "x2"], ["x3"]])
        assert cost_of_partition(four, p) == pytest.approx(0.1)


class TestInducedPredictor:
    def test_single_part_is_positive_rate(self, four):
        g = induced_predictor(four, Partition.single(four))
        assert np.allclose(g.values, four.positive_rate)

    def test_bghn_halves(self):
        inst = gen_bghn(0.01)
        p = Partition.from_parts(inst, [["x0-", "x1-"], ["x0+", "x1+"]])
        assert np.allclose(induced_predictor(inst, p).values, 0.5)

    def test_singletons_give_mu(self):
        inst = Instance.from_arrays([0.1, 0.2, 0.7], [0.2, 0.5, 0.9], [0, 0, 0])
        assert np.allclose(induced_predictor(inst, Partition.singletons(inst)).values, inst.mu)


class TestCalibrationCheck:
    def test_mu_itself(self):
        inst = Instance.from_arrays([0.1, 0.2, 0.7], [0.2, 0.5, 0.9], [0, 0, 0])
        assert is_calibrated(inst, Predictor(inst.ids, tuple(inst.mu)))

    def test_wrong_constant(self, four):
        g = Predictor(four.ids, (0.7,) * 4)
        assert not is_calibrated(four, g, tol=0.1)

    def test_bghn_half(self):
        inst = gen_bghn(0.01)
        assert is_calibrated(inst, Predictor(inst.ids, (0.5,) * 4))


class TestDistances:
    def test_l1_same(self, four):
        assert l1_distance(four, four.predictor(), four.predictor()) == 0.0

    def test_l1_max(self):
        inst = Instance.from_arrays([0.5, 0.5], [0, 1], [0, 1])
        assert l1_distance(inst, Predictor(inst.ids, (0, 1)), Predictor(inst.ids, (1, 0))) == pytest.approx(1.0)

    def test_l1_weighted(self):
        inst = Instance.from_arrays([0.25, 0.75], [0, 1], [0.1, 0.5])
        g = Predictor(inst.ids, (0.3, 0.9))
        assert l1_distance(inst, inst.predictor(), g) == pytest.approx(0.35)

    def test_l1_domain_mismatch(self, four):
        with pytest.raises(DomainMismatch):
            l1_distance(four, four.predictor(), Predictor(("a",), (0.5,)))

    def test_tv_same(self, four):
        assert tv_distance(four, four) == 0.0

    def test_tv_single_shift(self):
        a = Instance.from_arrays([0.4, 0.6], [0.2, 0.5], [0, 0])
        b = a.with_mu([0.25, 0.5])
        assert tv_distance(a, b) == pytest.approx(0.4 * 0.05)

    def test_tv_uniform_pair(self):
        a = Instance.from_arrays([0.5, 0.5], [0.3, 0.7], [0, 0])
        assert tv_distance(a, a.with_mu([0.4, 0.7])) == pytest.approx(0.05)

    def test_tv_disjoint_support(self):
        a = Instance.from_arrays([1.0], [0.5], [0.5], ids=["a"])
        b = Instance.from_arrays([1.0], [0.5], [0.5], ids=["b"])
        assert tv_distance(a, b) == pytest.approx(1.0)


@given(instance_and_partition())
def test_cost_is_distance_to_induced(ip):
    inst, p = ip
    g = induced_predictor(inst, p)
    assert cost_of_partition(inst, p) == pytest.approx(l1_distance(inst, inst.predictor(), g), abs=1e-9)


@given(instance_and_partition())
def test_induced_is_calibrated(ip):
    inst, p = ip
    assert is_calibrated(inst, induced_predictor(inst, p), tol=1e-9)


@given(instance_and_partition())
def test_cost_invariant_under_relabeling(ip):
    inst, p = ip
    order = np.arange(len(inst))[::-1]
    renamed = Instance(tuple(Element(f"r{i}", inst.mass[i], inst.mu[i], inst.f[i]) for i in order))
    labels = tuple(p.labels[i] for i in order)
    q = Partition(renamed.ids, labels)
    assert cost_of_partition(renamed, q) == pytest.approx(cost_of_partition(inst, p), abs=1e-12)


@given(instances())
def test_tv_symmetric_and_bounded(inst):
    other = inst.with_mu(1.0 - inst.mu)
    d = tv_distance(inst, other)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(tv_distance(other, inst))

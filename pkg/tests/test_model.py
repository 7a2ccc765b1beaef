import numpy as np
import pytest

from dualbca.model import (GraphicalModel, Reparametrization, check_feasible,
                           dual_value, energy, pairwise_costs, primal_round,
                           reparametrized_pairwise, reparametrized_unary,
                           unary_costs)
from dualbca.generate import random_model, random_phi
from dualbca.oracle import brute_force_min


def two_node_model():
    # theta_1=(1,0), theta_2=(0,0), theta_12=[[0,2],[3,1]]
    return GraphicalModel([2, 2], [(0, 1)],
                          [np.array([1.0, 0.0]), np.zeros(2)],
                          [np.array([[0.0, 2.0], [3.0, 1.0]])])


class TestConstruction:
    def test_basic_fields(self):
        m = two_node_model()
        assert m.n_nodes == 2
        assert m.n_edges == 1
        assert m.labels == (2, 2)
        assert m.neighbors(0) == (1,)

    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2], [(0, 0)], [np.zeros(2)], [np.zeros((2, 2))])

    def test_duplicate_edge_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2, 2], [(0, 1), (1, 0)],
                           [np.zeros(2), np.zeros(2)],
                           [np.zeros((2, 2)), np.zeros((2, 2))])

    def test_negative_cost_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2], [], [np.array([-1.0, 0.0])], [])

    def test_nonfinite_cost_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2], [], [np.array([np.inf, 0.0])], [])

    def test_wrong_table_shape_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2, 3], [(0, 1)], [np.zeros(2), np.zeros(3)],
                           [np.zeros((2, 2))])

    def test_out_of_range_endpoint_rejected(self):
        with pytest.raises(ValueError):
            GraphicalModel([2, 2], [(0, 2)], [np.zeros(2), np.zeros(2)],
                           [np.zeros((2, 2))])

    def test_adjacency_sorted(self):
        m = GraphicalModel([2] * 4, [(2, 3), (0, 3), (1, 3)],
                           [np.zeros(2)] * 4, [np.zeros((2, 2))] * 3)
        assert m.neighbors(3) == (0, 1, 2)


class TestReparametrizedCosts:
    def test_zero_phi_is_identity(self):
        m = GraphicalModel([2], [], [np.array([3.0, 5.0])], [])
        phi = Reparametrization(m)
        assert reparametrized_unary(m, phi, 0, 0) == 3.0
        assert reparametrized_unary(m, phi, 0, 1) == 5.0

    def test_single_edge_unary(self):
        m = GraphicalModel([2, 2], [(0, 1)],
                           [np.array([1.0, 2.0]), np.zeros(2)],
                           [np.zeros((2, 2))])
        phi = Reparametrization(m)
        phi[0, 1] += np.array([1.0, 1.0])
        assert reparametrized_unary(m, phi, 0, 0) == 0.0
        assert reparametrized_unary(m, phi, 0, 1) == 1.0

    def test_two_neighbor_unary(self):
        m = GraphicalModel([2, 2, 2], [(0, 1), (0, 2)],
                           [np.array([5.0, 5.0]), np.zeros(2), np.zeros(2)],
                           [np.zeros((2, 2)), np.zeros((2, 2))])
        phi = Reparametrization(m)
        phi[0, 1] += np.array([1.0, 0.0])
        phi[0, 2] += np.array([2.0, 0.0])
        assert unary_costs(m, phi, 0).tolist() == [2.0, 5.0]

    def test_pairwise_shift(self):
        m = two_node_model()
        phi = Reparametrization(m)
        phi[0, 1][0] = 1.0
        phi[1, 0][0] = -2.0
        assert reparametrized_pairwise(m, phi, 0, 1, 0, 0) == -1.0

    def test_pairwise_orientation_symmetry(self):
        rng = np.random.default_rng(0)
        m = random_model(rng, n_nodes=4)
        phi = random_phi(rng, m)
        for (u, v) in m.edges:
            for s in range(m.labels[u]):
                for t in range(m.labels[v]):
                    assert reparametrized_pairwise(m, phi, u, v, s, t) == \
                        reparametrized_pairwise(m, phi, v, u, t, s)

    def test_out_of_range_label_rejected(self):
        m = two_node_model()
        phi = Reparametrization(m)
        with pytest.raises((ValueError, IndexError)):
            reparametrized_unary(m, phi, 0, 5)


class TestEnergy:
    def test_zero_costs(self):
        m = GraphicalModel([2, 2], [(0, 1)], [np.zeros(2), np.zeros(2)],
                           [np.zeros((2, 2))])
        for y in ([0, 0], [0, 1], [1, 0], [1, 1]):
            assert energy(m, y) == 0.0

    def test_hand_sum(self):
        assert energy(two_node_model(), [0, 0]) == 1.0

    def test_invariance_under_phi(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m = random_model(rng, n_nodes=4)
            phi = random_phi(rng, m)
            shape = tuple(m.labels)
            for flat in range(int(np.prod(shape))):
                y = np.unravel_index(flat, shape)
                assert energy(m, y, phi) == pytest.approx(energy(m, y),
                                                          abs=1e-9)


class TestDualValue:
    def test_zero(self):
        m = GraphicalModel([2, 2], [(0, 1)], [np.zeros(2), np.zeros(2)],
                           [np.zeros((2, 2))])
        assert dual_value(m, Reparametrization(m)) == 0.0

    def test_edgeless(self):
        m = GraphicalModel([2], [], [np.array([3.0, 5.0])], [])
        assert dual_value(m, Reparametrization(m)) == 3.0

    def test_lower_bound(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            m = random_model(rng, n_nodes=4)
            phi = random_phi(rng, m)
            opt, _ = brute_force_min(m)
            assert dual_value(m, phi) <= opt + 1e-9


class TestFeasibility:
    def test_zero_phi_feasible(self):
        m = two_node_model()
        assert check_feasible(m, Reparametrization(m))

    def test_overshoot_infeasible(self):
        m = two_node_model()
        phi = Reparametrization(m)
        phi[0, 1][0] = m.unary[0][0] + 1.0
        assert not check_feasible(m, phi)


class TestPrimalRound:
    def test_argmin(self):
        m = GraphicalModel([2], [], [np.array([3.0, 5.0])], [])
        assert primal_round(m, Reparametrization(m)).tolist() == [0]

    def test_tie_breaks_low(self):
        m = GraphicalModel([2], [], [np.array([2.0, 2.0])], [])
        assert primal_round(m, Reparametrization(m)).tolist() == [0]


def test_pairwise_costs_oriented_view():
    m = two_node_model()
    phi = Reparametrization(m)
    t01 = pairwise_costs(m, phi, 0, 1)
    t10 = pairwise_costs(m, phi, 1, 0)
    assert np.array_equal(t01, t10.T)

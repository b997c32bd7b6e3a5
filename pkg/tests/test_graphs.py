import numpy as np
import pytest

from cwdiff import (
    ComplexWeightedGraph,
    Graph,
    complex_degrees,
    hermitian_check,
    laplacian_complement,
    normalized_laplacian,
    rw_laplacian,
    transition_matrix,
)
from cwdiff.errors import DegenerateDegreeError, GraphFormatError, ShapeError

from conftest import complete_graph, cycle_graph, random_weighted_graph
from oracles import power_iteration_radius


def two_node(weight, loops=None):
    return ComplexWeightedGraph.from_edges(2, [(0, 1)], [weight], self_loops=loops)


class TestHermitianCheck:
    def test_conjugate_pair_passes(self):
        w = np.array([[0, 1 + 1j], [1 - 1j, 0]])
        assert hermitian_check(w)

    def test_equal_offdiagonal_fails(self):
        w = np.array([[0, 1 + 1j], [1 + 1j, 0]])
        assert not hermitian_check(w)

    def test_zero_matrix_passes(self):
        assert hermitian_check(np.zeros((3, 3), dtype=complex))

    def test_non_square_raises(self):
        with pytest.raises(ShapeError):
            hermitian_check(np.zeros((2, 3)))

    def test_sparse_input(self):
        g = two_node(1 + 1j)
        assert hermitian_check(g.to_sparse())


class TestComplexDegrees:
    def test_unit_imaginary_weight(self):
        assert np.allclose(complex_degrees(two_node(1j)), [1.0, 1.0])

    def test_negative_weight_with_loops(self):
        g = two_node(-1.0, loops=[1.0, 1.0])
        assert np.allclose(complex_degrees(g), [2.0, 2.0])

    def test_isolated_node(self):
        g = ComplexWeightedGraph.from_edges(1, [], [])
        assert np.allclose(complex_degrees(g), [0.0])


class TestTransitionMatrix:
    def test_unit_imaginary(self):
        p = transition_matrix(two_node(1j))
        assert np.allclose(p.toarray(), [[0, 1j], [-1j, 0]])

    def test_negative_weight_with_loops(self):
        p = transition_matrix(two_node(-1.0, loops=[1.0, 1.0]))
        assert np.allclose(p.toarray(), [[0.5, -0.5], [-0.5, 0.5]])

    def test_isolated_node_zero_floor_raises(self):
        g = ComplexWeightedGraph.from_edges(1, [], [])
        with pytest.raises(DegenerateDegreeError) as exc:
            transition_matrix(g)
        assert 0 in exc.value.nodes

    def test_floor_marks_degenerate_instead(self):
        g = ComplexWeightedGraph.from_edges(3, [(0, 1)], [1.0])
        p = transition_matrix(g, degree_floor=1e-8)
        assert p.degenerate.tolist() == [False, False, True]


class TestRwLaplacian:
    def test_antisymmetric_imaginary(self):
        p = transition_matrix(two_node(1j))
        assert np.allclose(rw_laplacian(p).toarray(), [[1, -1j], [1j, 1]])

    def test_identity_transition_gives_zero(self):
        g = ComplexWeightedGraph.from_edges(2, [], [], self_loops=[1.0, 1.0])
        p = transition_matrix(g)
        assert np.allclose(p.toarray(), np.eye(2))
        assert np.allclose(rw_laplacian(p).toarray(), np.zeros((2, 2)))

    def test_balanced_two_node(self):
        p = transition_matrix(two_node(-1.0, loops=[1.0, 1.0]))
        assert np.allclose(rw_laplacian(p).toarray(), [[0.5, 0.5], [0.5, 0.5]])


class TestNormalizedLaplacian:
    def test_triangle_offdiagonals(self):
        lap = normalized_laplacian(complete_graph(3))
        comp = laplacian_complement(lap).toarray()
        off = comp[~np.eye(3, dtype=bool)]
        assert np.allclose(off, 0.5)

    def test_single_node_augmented(self):
        lap = normalized_laplacian(Graph.from_edges(1, []), augmented=True)
        assert lap.toarray().shape == (1, 1)
        assert np.allclose(lap.toarray(), 0.0)

    def test_two_node_path_augmented(self):
        # Hand-computed: D~ = diag(2, 2), A~ = all-ones, so I - Lap = A~/2.
        lap = normalized_laplacian(Graph.from_edges(2, [(0, 1)]), augmented=True)
        assert np.allclose(laplacian_complement(lap).toarray(), [[0.5, 0.5], [0.5, 0.5]])

    def test_zero_degree_unaugmented_raises(self):
        with pytest.raises(DegenerateDegreeError):
            normalized_laplacian(Graph.from_edges(2, []), augmented=False)


class TestGraphConstruction:
    def test_duplicate_edge_rejected(self):
        with pytest.raises(GraphFormatError):
            Graph.from_edges(3, [(0, 1), (1, 0)])

    def test_out_of_range_rejected(self):
        with pytest.raises(GraphFormatError):
            Graph.from_edges(2, [(0, 5)])

    def test_reversed_weight_stored_conjugated(self):
        g = ComplexWeightedGraph.from_edges(2, [(1, 0)], [1 - 2j])
        assert g.weight(0, 1) == (1 + 2j)
        assert g.weight(1, 0) == (1 - 2j)

    def test_complex_self_loop_rejected(self):
        with pytest.raises(GraphFormatError):
            ComplexWeightedGraph.from_edges(2, [(0, 1)], [1.0], self_loops=[1j, 0.0])

    def test_connectivity_flag(self):
        assert cycle_graph(5).is_connected()
        assert not Graph.from_edges(3, [(0, 1)]).is_connected()


class TestInvariants:
    def test_constructed_graphs_are_hermitian(self, rng):
        for _ in range(20):
            g = random_weighted_graph(rng, int(rng.integers(3, 15)))
            assert hermitian_check(g.to_sparse())

    def test_rows_of_transition_normalize(self, rng):
        for _ in range(20):
            g = random_weighted_graph(rng, int(rng.integers(3, 15)))
            p = transition_matrix(g)
            mags = np.hypot(p.p_re, p.p_im)
            sums = np.bincount(p.rows, weights=mags, minlength=p.n)
            assert np.abs(sums - 1.0).max() <= 1e-12

    def test_laplacian_roundtrip(self, rng):
        for _ in range(10):
            g = random_weighted_graph(rng, int(rng.integers(3, 12)))
            p = transition_matrix(g)
            lap = rw_laplacian(p)
            assert np.abs((np.eye(p.n) - lap.toarray()) - p.toarray()).max() <= 1e-15

    @pytest.mark.parametrize("builder,sizes", [(cycle_graph, range(3, 11)), (complete_graph, range(2, 11))])
    def test_regular_graph_spectrum_bounded(self, builder, sizes):
        for n in sizes:
            comp = laplacian_complement(normalized_laplacian(builder(n))).toarray()
            oracle = float(np.abs(np.linalg.eigvalsh(comp)).max())
            estimate = power_iteration_radius(comp, iters=500)
            assert abs(estimate - oracle) <= 1e-6
            assert estimate <= 1.0 + 1e-12

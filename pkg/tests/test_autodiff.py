import numpy as np
import pytest

from cwdiff import autodiff as ad
from cwdiff.errors import ShapeError
from cwdiff.gradcheck import central_difference, max_relative_error


def numeric_vs_analytic(build, params, step=1e-5):
    """Run one tape forward/backward and compare against central differences.

    ``build(tape, vars) -> scalar Var`` defines the function under test.
    """
    tape = ad.Tape()
    tape_vars = {name: tape.param(name, v) for name, v in params.items()}
    loss = build(tape, tape_vars)
    analytic = tape.backward(loss)

    def fn(p):
        t = ad.Tape()
        vs = {name: t.param(name, v) for name, v in p.items()}
        return float(build(t, vs).value)

    numeric = central_difference(fn, {k: v.copy() for k, v in params.items()}, step=step)
    return max_relative_error(analytic, numeric)


class TestScalarExamples:
    def test_tanh_at_zero(self):
        tape = ad.Tape()
        x = tape.param("x", np.zeros(()))
        y = ad.tanh(x)
        assert y.value == 0.0
        grads = tape.backward(y)
        assert grads["x"] == 1.0

    def test_uniform_softmax_cross_entropy(self):
        tape = ad.Tape()
        logits = tape.param("logits", np.zeros((1, 2)))
        loss = ad.softmax_cross_entropy(logits, np.array([0]), np.array([True]))
        assert loss.value == pytest.approx(np.log(2.0))
        grads = tape.backward(loss)
        assert np.allclose(grads["logits"], [[-0.5, 0.5]])

    def test_constant_loss_gives_zero_grads(self):
        tape = ad.Tape()
        tape.param("unused", np.ones((2, 2)))
        c = tape.constant(np.array(3.0))
        loss = ad.scale(c, 1.0)
        grads = tape.backward(loss)
        assert np.allclose(grads["unused"], 0.0)

    def test_sum_of_entries_gives_ones(self):
        tape = ad.Tape()
        x = tape.param("x", np.arange(6.0).reshape(2, 3))
        grads = tape.backward(ad.total(x))
        assert np.allclose(grads["x"], 1.0)

    def test_backward_requires_scalar(self):
        tape = ad.Tape()
        x = tape.param("x", np.ones((2, 2)))
        with pytest.raises(ShapeError):
            tape.backward(ad.tanh(x))

    def test_one_backward_per_tape(self):
        tape = ad.Tape()
        x = tape.param("x", np.ones(()))
        y = ad.tanh(x)
        tape.backward(y)
        with pytest.raises(RuntimeError):
            tape.backward(y)


class TestPrimitiveGradients:
    def test_matmul(self, rng):
        params = {"a": rng.standard_normal((3, 4)), "b": rng.standard_normal((4, 2))}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.tanh(v["a"] @ v["b"])), params
        )
        assert err < 1e-7

    def test_add_sub_mul_scale(self, rng):
        params = {"a": rng.standard_normal((3, 3)), "b": rng.standard_normal((3, 3))}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.scale((v["a"] + v["b"]) * (v["a"] - v["b"]), 0.7)),
            params,
        )
        assert err < 1e-6

    def test_row_bias_broadcast(self, rng):
        params = {"x": rng.standard_normal((4, 3)), "b": rng.standard_normal(3)}
        err = numeric_vs_analytic(lambda t, v: ad.total(ad.elu(v["x"] + v["b"])), params)
        assert err < 1e-6

    def test_concat_and_slice(self, rng):
        params = {"a": rng.standard_normal((3, 2)), "b": rng.standard_normal((3, 3))}

        def build(t, v):
            joined = ad.concat_cols(v["a"], v["b"])
            return ad.total(ad.tanh(ad.slice_cols(joined, 1, 4)))

        assert numeric_vs_analytic(build, params) < 1e-6

    def test_elu_and_tanh(self, rng):
        params = {"x": rng.standard_normal((5, 4))}
        err = numeric_vs_analytic(lambda t, v: ad.total(ad.elu(ad.tanh(v["x"]))), params)
        assert err < 1e-6

    def test_dropout_mask(self, rng):
        mask = (rng.random((4, 3)) > 0.3) / 0.7
        params = {"x": rng.standard_normal((4, 3))}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.apply_dropout_mask(v["x"], mask) * v["x"]), params
        )
        assert err < 1e-6

    def test_row_gather(self, rng):
        idx = np.array([0, 2, 2, 1])
        params = {"x": rng.standard_normal((3, 3))}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.tanh(ad.row_gather(v["x"], idx))), params
        )
        assert err < 1e-6

    def test_batchnorm_through_batch_statistics(self, rng):
        params = {
            "x": rng.standard_normal((6, 3)),
            "g": rng.uniform(0.5, 1.5, size=3),
            "b": rng.standard_normal(3),
        }
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.tanh(ad.batchnorm(v["x"], v["g"], v["b"]))), params
        )
        assert err < 1e-6

    def test_batchnorm_frozen_stats(self, rng):
        stats = (rng.standard_normal(3), rng.uniform(0.5, 2.0, size=3))
        params = {
            "x": rng.standard_normal((5, 3)),
            "g": rng.uniform(0.5, 1.5, size=3),
            "b": rng.standard_normal(3),
        }
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.batchnorm(v["x"], v["g"], v["b"], stats=stats)),
            params,
        )
        assert err < 1e-6

    def test_softmax_cross_entropy_masked(self, rng):
        labels = np.array([0, 2, 1, 2, 0])
        mask = np.array([True, False, True, True, False])
        params = {"logits": rng.standard_normal((5, 3))}
        err = numeric_vs_analytic(
            lambda t, v: ad.softmax_cross_entropy(v["logits"], labels, mask), params
        )
        assert err < 1e-6

    def test_channel_pair_transform(self, rng):
        params = {"x": rng.standard_normal((5, 6)), "m": rng.standard_normal((2, 2))}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.tanh(ad.channel_pair_transform(v["x"], v["m"]))),
            params,
        )
        assert err < 1e-6

    def test_block_scale(self, rng):
        params = {"x": rng.standard_normal((4, 6)), "s": rng.standard_normal(2)}
        err = numeric_vs_analytic(
            lambda t, v: ad.total(ad.tanh(ad.block_scale(v["x"], ad.tanh(v["s"])))),
            params,
        )
        assert err < 1e-6


def random_pattern(rng, n, extra_edges=2):
    """Connected random pattern: a spanning tree plus a few chords."""
    edges = {(int(rng.integers(0, k)), k) for k in range(1, n)}
    while len(edges) < n - 1 + extra_edges:
        i, j = rng.integers(0, n, size=2)
        if i != j:
            edges.add((min(int(i), int(j)), max(int(i), int(j))))
    ei = np.array(sorted(edges))[:, 0]
    ej = np.array(sorted(edges))[:, 1]
    return ad.PropagatePattern.build(ei, ej, n)


class TestSparseOps:
    def test_edge_degrees_match_direct_sum(self, rng):
        pattern = random_pattern(rng, 6)
        w = rng.standard_normal((pattern.num_edges, 2))
        tape = ad.Tape()
        wv = tape.param("w", w)
        src = pattern.rows[pattern.signs > 0]
        dst = pattern.cols[pattern.signs > 0]
        q = ad.edge_degrees(wv, src, dst, pattern.n)
        dense = np.zeros((pattern.n, pattern.n), dtype=complex)
        dense[src, dst] = w[:, 0] + 1j * w[:, 1]
        dense[dst, src] = w[:, 0] - 1j * w[:, 1]
        assert np.allclose(q.value, np.abs(dense).sum(axis=1))

    def test_edge_degrees_gradient(self, rng):
        pattern = random_pattern(rng, 5)
        src = pattern.rows[pattern.signs > 0]
        dst = pattern.cols[pattern.signs > 0]
        params = {"w": rng.uniform(0.3, 1.0, size=(pattern.num_edges, 2))}

        def build(t, v):
            return ad.total(ad.tanh(ad.edge_degrees(v["w"], src, dst, pattern.n)))

        assert numeric_vs_analytic(build, params) < 1e-6

    def test_propagate_forward_matches_dense(self, rng):
        pattern = random_pattern(rng, 6)
        src = pattern.rows[pattern.signs > 0]
        dst = pattern.cols[pattern.signs > 0]
        w = rng.standard_normal((pattern.num_edges, 2))
        x = rng.standard_normal((6, 4))
        tape = ad.Tape()
        wv = tape.param("w", w)
        xv = tape.param("x", x)
        q = ad.edge_degrees(wv, src, dst, pattern.n)
        y = ad.complex_propagate(wv, q, xv, pattern, degree_floor=1e-8)

        dense = np.zeros((6, 6), dtype=complex)
        dense[src, dst] = w[:, 0] + 1j * w[:, 1]
        dense[dst, src] = w[:, 0] - 1j * w[:, 1]
        denom = np.maximum(np.abs(dense).sum(axis=1), 1e-8)
        xc = x[:, :2] + 1j * x[:, 2:]
        expect = xc - (dense / denom[:, None]) @ xc
        assert np.allclose(y.value[:, :2] + 1j * y.value[:, 2:], expect, atol=1e-12)

    def test_propagate_annihilates_steady_state(self, rng):
        # (I - P) applied to the steady state of a balanced graph is zero.
        from conftest import er_connected, random_partition
        from cwdiff import construct_balanced_weights, steady_state_closed_form

        g = er_connected(rng, 8, 0.4)
        part = random_partition(rng, 8, 3)
        cw = construct_balanced_weights(g, part)
        x0 = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        ss = steady_state_closed_form(cw, part, x0)
        pattern = ad.PropagatePattern.build(cw.edge_i, cw.edge_j, cw.n)
        tape = ad.Tape()
        w = tape.constant(np.column_stack([cw.w_re, cw.w_im]))
        x = tape.constant(np.column_stack([ss.values.real, ss.values.imag]))
        # Self-loops contribute max 1 to each degree and (I - P) must still
        # annihilate the steady state; fold them in as explicit raw degrees.
        q_val = np.asarray(
            [sum(abs(cw.weight(i, j)) for j in range(cw.n)) for i in range(cw.n)]
        )
        q = tape.constant(q_val)
        y = ad.complex_propagate(w, q, x, pattern, degree_floor=0.0)
        # Without the self-loop entries in the pattern, (I - P)x gains back
        # loop/denominator mass: ((q - loops)/q) x != 0. Rebuild including loops.
        loops = np.flatnonzero(cw.self_loops != 0)
        ei = np.concatenate([cw.edge_i, loops])
        ej = np.concatenate([cw.edge_j, loops])
        full = ad.PropagatePattern.build(ei, ej, cw.n)
        w_full = tape.constant(
            np.vstack([
                np.column_stack([cw.w_re, cw.w_im]),
                np.column_stack([cw.self_loops[loops], np.zeros(len(loops))]),
            ])
        )
        y_full = ad.complex_propagate(w_full, q, x, full, degree_floor=0.0)
        assert np.abs(y_full.value).max() < 1e-12
        assert np.abs(y.value).max() > 1e-3  # loop-less pattern really differs

    def test_zero_weights_with_floor_pass_features_through(self, rng):
        pattern = random_pattern(rng, 5)
        src = pattern.rows[pattern.signs > 0]
        dst = pattern.cols[pattern.signs > 0]
        tape = ad.Tape()
        w = tape.param("w", np.zeros((pattern.num_edges, 2)))
        x = tape.constant(rng.standard_normal((5, 2)))
        q = ad.edge_degrees(w, src, dst, pattern.n)
        y = ad.complex_propagate(w, q, x, pattern, degree_floor=1e-8)
        assert np.allclose(y.value, x.value)

    def test_propagate_full_gradient(self, rng):
        pattern = random_pattern(rng, 6)
        src = pattern.rows[pattern.signs > 0]
        dst = pattern.cols[pattern.signs > 0]
        params = {
            "w": rng.uniform(0.2, 1.0, size=(pattern.num_edges, 2))
            * rng.choice([-1.0, 1.0], size=(pattern.num_edges, 2)),
            "x": rng.standard_normal((6, 4)),
        }

        def build(t, v):
            q = ad.edge_degrees(v["w"], src, dst, pattern.n)
            y = ad.complex_propagate(v["w"], q, v["x"], pattern, degree_floor=1e-8)
            return ad.total(y * y)

        assert numeric_vs_analytic(build, params) < 1e-5

    def test_single_edge_gradient_example(self, rng):
        # One stored edge: gradient of ||(I - P)X||^2 w.r.t. both weight parts.
        pattern = ad.PropagatePattern.build([0], [1], 2)
        params = {"w": np.array([[0.4, -0.8]]), "x": rng.standard_normal((2, 2))}

        def build(t, v):
            q = ad.edge_degrees(v["w"], np.array([0]), np.array([1]), 2)
            y = ad.complex_propagate(v["w"], q, v["x"], pattern, degree_floor=1e-8)
            return ad.total(y * y)

        assert numeric_vs_analytic(build, params) < 1e-5


class TestEngineProperties:
    def test_determinism(self, rng):
        params = {"a": rng.standard_normal((4, 4)), "b": rng.standard_normal((4, 4))}

        def run():
            tape = ad.Tape()
            v = {k: tape.param(k, p) for k, p in params.items()}
            loss = ad.total(ad.tanh(v["a"] @ v["b"]))
            return loss.value.copy(), tape.backward(loss)

        l1, g1 = run()
        l2, g2 = run()
        assert np.array_equal(l1, l2)
        for k in g1:
            assert np.array_equal(g1[k], g2[k])

    def test_linearity_of_backward(self, rng):
        a_val = rng.standard_normal((3, 3))
        alpha, beta = 0.3, -1.7

        def grad_of(which):
            tape = ad.Tape()
            a = tape.param("a", a_val)
            l1 = ad.total(ad.tanh(a))
            l2 = ad.total(a * a)
            if which == "l1":
                loss = l1
            elif which == "l2":
                loss = l2
            else:
                loss = ad.scale(l1, alpha) + ad.scale(l2, beta)
            return tape.backward(loss)["a"]

        combined = grad_of("combo")
        expected = alpha * grad_of("l1") + beta * grad_of("l2")
        assert np.abs(combined - expected).max() < 1e-12

    def test_shape_mismatch_raises_at_record_time(self):
        tape = ad.Tape()
        a = tape.param("a", np.ones((2, 3)))
        b = tape.param("b", np.ones((3, 2)))
        with pytest.raises(ShapeError):
            ad.add(a, b)
        with pytest.raises(ShapeError):
            ad.matmul(a, a)

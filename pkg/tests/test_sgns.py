import numpy as np
import pytest
from scipy import stats

from driftlab import _kernels, sgns
from driftlab.corpus import corpus_from_sentences
from driftlab.sgns import EmbeddingSpace, Hyperparams, NegativeSampler, TrainingError
from driftlab.corpus import Vocabulary


def pair_loss(v, u_ctx, u_negs):
    """Independent evaluation of -log s(u_c.v) - sum log s(-u_n.v)."""
    loss = np.logaddexp(0.0, -(u_ctx @ v))
    for u in u_negs:
        loss += np.logaddexp(0.0, u @ v)
    return loss


def working_space(n, d, rng, scale=0.5):
    vocab = Vocabulary.from_keys_counts([f"w{i}" for i in range(n)], [1] * n)
    return EmbeddingSpace(vocab, rng.normal(scale=scale, size=(n, d)), rng.normal(scale=scale, size=(n, d)))


def numeric_grads(space, center, context, negatives, h=1e-5):
    syn0, syn1 = space.input_vectors, space.output_vectors

    def f():
        return pair_loss(syn0[center], syn1[context], [syn1[n] for n in negatives])

    rows = sorted({context, *negatives})
    g_v = np.zeros(syn0.shape[1])
    for j in range(syn0.shape[1]):
        old = syn0[center, j]
        syn0[center, j] = old + h
        up = f()
        syn0[center, j] = old - h
        down = f()
        syn0[center, j] = old
        g_v[j] = (up - down) / (2 * h)
    g_u = {}
    for r in rows:
        g = np.zeros(syn1.shape[1])
        for j in range(syn1.shape[1]):
            old = syn1[r, j]
            syn1[r, j] = old + h
            up = f()
            syn1[r, j] = old - h
            down = f()
            syn1[r, j] = old
            g[j] = (up - down) / (2 * h)
        g_u[r] = g
    return g_v, g_u


def analytic_grads(space, center, context, negatives, lr=1.0):
    before0 = space.input_vectors.copy()
    before1 = space.output_vectors.copy()
    loss = sgns.sgns_pair_step(center, context, negatives, lr, space)
    g_v = (before0[center] - space.input_vectors[center]) / lr
    g_u = {r: (before1[r] - space.output_vectors[r]) / lr for r in {context, *negatives}}
    space.input_vectors[:] = before0
    space.output_vectors[:] = before1
    return loss, g_v, g_u


def max_relative_error(a, n):
    return np.max(np.abs(a - n) / np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-6))


class TestPairStep:
    def test_all_zero_vectors(self):
        vocab = Vocabulary.from_keys_counts(["a", "b", "c"], [1, 1, 1])
        space = EmbeddingSpace(vocab, np.zeros((3, 4)), np.zeros((3, 4)))
        loss = sgns.sgns_pair_step(0, 1, [2], 0.1, space)
        assert loss == pytest.approx(2 * np.log(2), abs=1e-12)
        # gradient on v is (s(0)-1) u_c + s(0) u_n = 0
        np.testing.assert_array_equal(space.input_vectors[0], 0.0)

    def test_saturation(self):
        vocab = Vocabulary.from_keys_counts(["a", "b", "c"], [1, 1, 1])
        v = np.array([[10.0, 0], [0, 0], [0, 0]])
        u = np.array([[0.0, 0], [10.0, 0], [-10.0, 0]])
        space = EmbeddingSpace(vocab, v, u)
        assert sgns.sgns_pair_step(0, 1, [2], 1e-3, space) < 1e-40

    def test_loss_matches_oracle(self, rng):
        space = working_space(6, 5, rng)
        expected = pair_loss(space.input_vectors[0], space.output_vectors[1], space.output_vectors[[2, 3]])
        assert sgns.sgns_pair_step(0, 1, [2, 3], 0.01, space) == pytest.approx(expected, rel=1e-12)

    def test_gradient_finite_differences(self, rng):
        for _ in range(25):
            space = working_space(8, 5, rng)
            center, context = rng.integers(0, 8, size=2)
            negatives = list(rng.integers(0, 8, size=3))
            _, a_v, a_u = analytic_grads(space, int(center), int(context), negatives)
            n_v, n_u = numeric_grads(space, int(center), int(context), negatives)
            assert max_relative_error(a_v, n_v) < 1e-4
            for r in a_u:
                assert max_relative_error(a_u[r], n_u[r]) < 1e-4

    def test_duplicate_negatives(self, rng):
        space = working_space(4, 3, rng)
        _, a_v, a_u = analytic_grads(space, 0, 1, [2, 2, 1])
        n_v, n_u = numeric_grads(space, 0, 1, [2, 2, 1])
        assert max_relative_error(a_v, n_v) < 1e-4
        assert max_relative_error(a_u[2], n_u[2]) < 1e-4
        assert max_relative_error(a_u[1], n_u[1]) < 1e-4

    def test_out_of_range_rejected(self, rng):
        space = working_space(4, 3, rng)
        with pytest.raises(IndexError):
            sgns.sgns_pair_step(0, 4, [1], 0.1, space)

    def test_numpy_path_matches(self, rng):
        a = working_space(6, 5, rng)
        b = EmbeddingSpace(a.vocab, a.input_vectors.copy(), a.output_vectors.copy())
        la = _kernels.pair_update_jit(a.input_vectors, a.output_vectors, 0, np.array([1, 2, 2]), 3, 0.3, np.empty(3), np.empty(5))
        lb = _kernels.pair_update_numpy(b.input_vectors, b.output_vectors, 0, [1, 2, 2], 0.3)
        assert la == pytest.approx(lb, rel=1e-12)
        np.testing.assert_allclose(a.input_vectors, b.input_vectors, rtol=1e-12)
        np.testing.assert_allclose(a.output_vectors, b.output_vectors, rtol=1e-12)


class TestSchedules:
    def test_window_one(self, rng):
        assert {sgns.dynamic_window(1, rng) for _ in range(100)} == {1}

    def test_window_two(self, rng):
        assert {sgns.dynamic_window(2, rng) for _ in range(500)} == {1, 2}

    def test_window_uniform(self, rng):
        draws = np.array([sgns.dynamic_window(4, rng) for _ in range(100_000)])
        freq = np.bincount(draws, minlength=5)[1:] / len(draws)
        assert np.all(np.abs(freq - 0.25) < 0.01)
        assert stats.chisquare(freq * len(draws)).pvalue > 1e-3

    def test_kernel_window_uniform(self):
        state = _kernels.seed_state(7)
        draws = []
        for _ in range(100_000):
            state, b = _kernels.lcg_window(state, 4)
            draws.append(b)
        freq = np.bincount(draws, minlength=5)[1:] / len(draws)
        assert set(draws) == {1, 2, 3, 4}
        assert np.all(np.abs(freq - 0.25) < 0.01)

    @pytest.mark.parametrize("progress,expected", [(0.0, 0.02), (0.5, 0.01), (1.0, 0.02 * 1e-4)])
    def test_lr(self, progress, expected):
        assert sgns.lr_schedule(0.02, progress) == pytest.approx(expected, rel=1e-12)

    def test_lr_rejects_progress(self):
        with pytest.raises(ValueError):
            sgns.lr_schedule(0.02, 1.5)


class TestNegativeSampler:
    def test_distribution(self):
        counts = np.random.default_rng(0).integers(1, 1000, size=100)
        sampler = NegativeSampler(counts, seed=1)
        target = counts**0.75 / np.sum(counts**0.75)
        draws = sampler.draw(1_000_000)
        emp = np.bincount(draws, minlength=100) / len(draws)
        assert 0.5 * np.abs(emp - target).sum() < 0.01

    def test_exclusion(self):
        sampler = NegativeSampler([1000, 1, 1], seed=0)
        assert not np.any(sampler.draw(10_000, exclude=0) == 0)

    def test_kernel_table_matches(self):
        counts = np.array([50, 20, 5, 1])
        table = sgns.make_cum_table(counts)
        state = _kernels.seed_state(3)
        draws = []
        for _ in range(200_000):
            state = _kernels.lcg_next(state)
            draws.append(int(np.searchsorted(table, (state >> 16) % table[-1], side="right")))
        emp = np.bincount(draws, minlength=4) / len(draws)
        target = counts**0.75 / np.sum(counts**0.75)
        np.testing.assert_allclose(emp, target, atol=0.005)


class TestHyperparams:
    def test_defaults_match_table(self):
        hp = Hyperparams()
        assert (hp.vector_size, hp.window, hp.negative, hp.sample, hp.alpha, hp.epochs) == (300, 4, 5, 1e-5, 0.02, 5)

    @pytest.mark.parametrize("field,value", [("epochs", 0), ("alpha", 0.0), ("vector_size", 0), ("window", 0), ("negative", -1)])
    def test_invalid(self, field, value):
        with pytest.raises(ValueError):
            Hyperparams(**{field: value})


def repeated_corpus():
    return corpus_from_sentences([["a", "b"]] * 500 + [["c", "d"]] * 500 + [["e", "f"]] * 500)


class TestTrain:
    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_repeated_pair(self, seed):
        c = repeated_corpus()
        space = sgns.train(c, Hyperparams(vector_size=8, sample=0, seed=seed))
        idx = c.vocab.index
        v_a = space.input_vectors[idx["a"]]

        def cos(u, w):
            return u @ w / np.linalg.norm(u) / np.linalg.norm(w)

        for other in ("c", "d", "e", "f"):
            assert cos(v_a, space.output_vectors[idx["b"]]) > cos(v_a, space.output_vectors[idx[other]])

    def test_deterministic_single_worker(self):
        c = repeated_corpus()
        hp = Hyperparams(vector_size=8, sample=0, seed=5, epochs=2)
        a = sgns.train(c, hp)
        b = sgns.train(c, hp)
        assert a.input_vectors.tobytes() == b.input_vectors.tobytes()

    def test_numba_and_numpy_paths_agree(self):
        c = corpus_from_sentences([["a", "b", "c", "a", "d"], ["b", "d", "e"]] * 40)
        hp = Hyperparams(vector_size=6, sample=0, seed=2, epochs=2)
        fast = sgns.train(c, hp, use_numba=True)
        slow = sgns.train(c, hp, use_numba=False)
        np.testing.assert_allclose(fast.input_vectors, slow.input_vectors, atol=1e-5)
        np.testing.assert_allclose(fast.epoch_losses, slow.epoch_losses, rtol=1e-5)

    def test_initialization(self):
        c = repeated_corpus()
        space = sgns.train(c, Hyperparams(vector_size=10, epochs=1, alpha=1e-12, sample=0))
        assert np.abs(space.input_vectors).max() <= 0.5 / 10
        assert space.input_vectors.dtype == np.float32

    def test_multi_worker_runs(self):
        c = corpus_from_sentences([["a", "b", "c"], ["c", "d", "a"]] * 300)
        space = sgns.train(c, Hyperparams(vector_size=8, sample=0, workers=3))
        assert np.isfinite(space.input_vectors).all()
        assert space.input_vectors.shape == (len(c.vocab), 8)

    def test_single_word_vocabulary(self):
        c = corpus_from_sentences([["a", "a", "a"]] * 10)
        space = sgns.train(c, Hyperparams(vector_size=4, sample=0))
        assert np.isfinite(space.input_vectors).all()

    def test_nonfinite_is_an_error(self):
        c = repeated_corpus()
        with pytest.raises(TrainingError, match="epoch 1"):
            sgns.train(c, Hyperparams(vector_size=4, sample=0, alpha=1e30))

    def test_empty_corpus(self):
        c = corpus_from_sentences([["a"]])
        empty = type(c)(0, c.vocab, np.zeros(0, dtype=np.int32), np.zeros(1, dtype=np.int64))
        with pytest.raises(TrainingError):
            sgns.train(empty, Hyperparams(vector_size=4))

    def test_trained_space_is_read_only(self):
        space = sgns.train(repeated_corpus(), Hyperparams(vector_size=4, epochs=1))
        with pytest.raises(ValueError):
            space.input_vectors[0, 0] = 1.0

    def test_loss_non_increasing(self, mini_run):
        for space in mini_run["spaces"]:
            losses = space.epoch_losses
            assert losses[-1] < losses[0]
            for a, b in zip(losses, losses[1:]):
                assert b <= a * 1.05

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_two_clusters(self, seed):
        from driftlab import corpus, synth

        spec = synth.DriftSpec(vocab_size=40, n_topics=2, sentences_per_period=3000, n_periods=1, seed=seed)
        (c,), _ = corpus.ingest(synth.records(spec), spec.periods())
        space = sgns.train(c, Hyperparams(vector_size=16, sample=0, seed=seed))
        m = space.input_vectors / np.linalg.norm(space.input_vectors, axis=1, keepdims=True)
        topic = np.array([int(k[1:5]) % 2 for k in c.vocab.keys])
        sims = m @ m.T
        same = topic[:, None] == topic[None, :]
        off_diag = ~np.eye(len(topic), dtype=bool)
        within = sims[same & off_diag].mean()
        between = sims[~same].mean()
        assert within - between >= 0.2


@pytest.mark.parametrize("flag,expected", [("1", "False"), ("0", "True")])
def test_env_flag_selects_path(flag, expected):
    import os
    import subprocess
    import sys

    env = {**os.environ, "DRIFTLAB_DISABLE_NUMBA": flag}
    out = subprocess.run(
        [sys.executable, "-c", "from driftlab import _accel; print(_accel.HAVE_NUMBA)"],
        env=env, capture_output=True, text=True, check=True,
    ).stdout.strip()
    assert out == expected

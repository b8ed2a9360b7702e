import numpy as np
import pytest

from relcast.decode import DecodeConfig, decode
from relcast.graph import Document, Edge, FlatModel, joint_features, score
from relcast.perceptron import TrainConfig, hinge_loss, train_spr, train_weighted
from relcast.synth import SynthSpec, generate_corpus

from conftest import make_document, random_labels, random_model


def single_edge_doc(value=1.0):
    return Document("d", ("A", "B"), (Edge("A", "B", [value]),))


class TestHingeLoss:
    def test_zero_weights_zero_loss(self):
        rng = np.random.default_rng(0)
        doc = make_document(rng, max_chars=5, max_edges=8, dim=3)
        model = FlatModel(np.zeros(3), np.zeros(4))
        assert hinge_loss(model, doc, random_labels(rng, len(doc.edges))) == 0.0

    def test_gold_at_argmax_gives_zero(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            doc = make_document(rng, max_chars=5, max_edges=10, dim=3)
            model = random_model(rng, dim=3)
            best, _ = decode(model, doc)
            assert hinge_loss(model, doc, best) == pytest.approx(0.0, abs=1e-12)

    def test_single_edge_worked_example(self):
        # text score 2, gold -1: max_y y*2 - (-2) = 4
        model = FlatModel([2.0], np.zeros(4))
        assert hinge_loss(model, single_edge_doc(), [-1]) == pytest.approx(4.0)

    def test_never_negative(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            doc = make_document(rng, max_chars=6, max_edges=12, dim=3)
            model = random_model(rng, dim=3)
            gold = random_labels(rng, len(doc.edges))
            assert hinge_loss(model, doc, gold) >= -1e-9


class TestTrainSpr:
    def corpus(self, rng, n_docs=6):
        return [
            (doc, random_labels(rng, len(doc.edges)))
            for doc in (make_document(rng, max_chars=5, max_edges=8, dim=3, doc_id=f"d{i}")
                        for i in range(n_docs))
        ]

    def test_tie_breaking_keeps_gold_and_skips_update(self):
        # decode of the zero model labels the single edge +1 (tie rule), which
        # matches gold, so no update ever fires and the model stays zero
        corpus = [(single_edge_doc(), np.array([1]))]
        model = train_spr(corpus, TrainConfig(num_epochs=3, seed=0))
        np.testing.assert_array_equal(model.text_weights, [0.0])
        np.testing.assert_array_equal(model.struct_weights, np.zeros(4))
        assert model.meta["mistakes_per_epoch"] == [0, 0, 0]

    def test_deterministic_given_seed(self):
        rng = np.random.default_rng(3)
        corpus = self.corpus(rng)
        cfg = TrainConfig(num_epochs=4, seed=9)
        a = train_spr(corpus, cfg)
        b = train_spr(corpus, cfg)
        np.testing.assert_array_equal(a.text_weights, b.text_weights)
        np.testing.assert_array_equal(a.struct_weights, b.struct_weights)

    def test_separable_corpus_reaches_zero_mistakes(self):
        corpus = generate_corpus(SynthSpec(
            num_docs=12, chars_range=(3, 5), edge_density=0.6,
            text_dim=4, text_signal=1.0, text_noise=0.0, seed=4,
        ))
        model = train_spr(corpus, TrainConfig(num_epochs=50, seed=4))
        assert model.meta["mistakes_per_epoch"][-1] == 0

    def test_update_log_replays_final_raw_weights(self):
        rng = np.random.default_rng(5)
        corpus = self.corpus(rng)
        log = []
        cfg = TrainConfig(num_epochs=4, seed=2, averaging=False)
        model = train_spr(corpus, cfg, update_log=log)
        replayed = np.zeros(3 + 4)
        for _, delta in log:
            replayed += delta
        np.testing.assert_allclose(
            np.concatenate([model.text_weights, model.struct_weights]),
            replayed, rtol=1e-12, atol=1e-12,
        )

    def test_standardization_baked_into_model(self):
        rng = np.random.default_rng(6)
        corpus = self.corpus(rng)
        model = train_spr(corpus, TrainConfig(num_epochs=1, seed=0))
        stacked = np.vstack([doc.feature_matrix for doc, _ in corpus if doc.edges])
        np.testing.assert_allclose(model.feature_means, stacked.mean(axis=0))
        np.testing.assert_allclose(model.feature_stds, np.maximum(stacked.std(axis=0), 1e-8))

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            train_spr([], TrainConfig())


class TestTrainWeighted:
    def corpus(self, rng, n_docs=4):
        return [
            (doc, random_labels(rng, len(doc.edges)))
            for doc in (make_document(rng, max_chars=5, max_edges=8, dim=3, doc_id=f"d{i}")
                        for i in range(n_docs))
        ]

    def test_unit_weights_reduce_to_train_spr(self):
        rng = np.random.default_rng(7)
        corpus = self.corpus(rng)
        cfg = TrainConfig(num_epochs=3, seed=11)
        a = train_spr(corpus, cfg)
        b = train_weighted(corpus, np.ones(len(corpus)), cfg)
        np.testing.assert_array_equal(a.text_weights, b.text_weights)
        np.testing.assert_array_equal(a.struct_weights, b.struct_weights)

    def test_zero_weights_give_zero_model(self):
        rng = np.random.default_rng(8)
        corpus = self.corpus(rng)
        model = train_weighted(corpus, np.zeros(len(corpus)), TrainConfig(num_epochs=2, seed=0))
        np.testing.assert_array_equal(model.text_weights, np.zeros(3))
        np.testing.assert_array_equal(model.struct_weights, np.zeros(4))

    def test_zeroed_documents_drop_from_the_pool(self):
        rng = np.random.default_rng(9)
        corpus = self.corpus(rng, n_docs=2)
        cfg = TrainConfig(num_epochs=3, seed=13)
        both = train_weighted(corpus, np.array([1.0, 0.0]), cfg)
        alone = train_spr(corpus[:1], cfg)
        np.testing.assert_array_equal(both.text_weights, alone.text_weights)
        np.testing.assert_array_equal(both.struct_weights, alone.struct_weights)

    def test_fractional_weights_scale_update_steps(self):
        rng = np.random.default_rng(10)
        corpus = self.corpus(rng, n_docs=3)
        cfg = TrainConfig(num_epochs=2, seed=3, averaging=False)
        log = []
        train_weighted(corpus, np.array([0.5, 1.0, 0.25]), cfg, update_log=log)
        full = []
        train_weighted(corpus, np.ones(3), cfg, update_log=full)
        # same decode trajectory on the first update, scaled step
        if log and full:
            i, delta = log[0]
            j, ref = full[0]
            assert i == j
            weight = [0.5, 1.0, 0.25][i]
            np.testing.assert_allclose(delta, weight * ref)

    def test_bad_weights_rejected(self):
        rng = np.random.default_rng(11)
        corpus = self.corpus(rng, n_docs=2)
        with pytest.raises(ValueError):
            train_weighted(corpus, np.array([1.0]), TrainConfig())
        with pytest.raises(ValueError):
            train_weighted(corpus, np.array([1.0, -0.5]), TrainConfig())


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(num_epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(eta=0.0)
    with pytest.raises(ValueError):
        TrainConfig(sampling="bogus")

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hemignn.encoders import NodeEmbeddings
from hemignn.errors import ConfigError, MetricUndefinedError, ShapeError
from hemignn.model import init_model
from hemignn.numerics import Parameter, SeedFanout, constant, vstack
from hemignn.numerics.rng import named_stream
from hemignn.prediction import (
    MLPParams,
    ReadoutParams,
    ce_loss,
    compute_metrics,
    finetune,
    mann_whitney_auc,
    predict,
    readout,
)
from hemignn.config import RunConfig
from hemignn.datagen import GenConfig, generate_dataset, split


def emb_from_rows(z_rows, h_rows):
    return NodeEmbeddings(z=constant(z_rows), h_phi=constant(h_rows))


class TestReadout:
    def test_identity_projection(self):
        emb = emb_from_rows([[2.0], [3.0]], [[4.0], [5.0]])
        p = ReadoutParams(w=Parameter([[1.0]]), b=Parameter([[0.0]]))
        out = readout(emb, p)
        assert np.array_equal(out.data, [[2.0], [3.0], [4.0], [5.0]])

    def test_zero_weight_constant_bias(self, rng):
        emb = emb_from_rows(rng.standard_normal((3, 4)), rng.standard_normal((3, 4)))
        p = ReadoutParams(w=Parameter(np.zeros((4, 1))), b=Parameter([[2.5]]))
        assert np.allclose(readout(emb, p).data, 2.5)

    def test_matches_row_loop_oracle(self, rng):
        z = rng.standard_normal((4, 3))
        h = rng.standard_normal((4, 3))
        w = rng.standard_normal((3, 1))
        b = 0.7
        out = readout(emb_from_rows(z, h), ReadoutParams(w=Parameter(w), b=Parameter([[b]])))
        stacked = np.vstack([z, h])
        for i in range(8):
            expected = sum(stacked[i, k] * w[k, 0] for k in range(3)) + b
            assert abs(out.data[i, 0] - expected) < 1e-12

    def test_width_mismatch(self, rng):
        emb = emb_from_rows(rng.standard_normal((2, 3)), rng.standard_normal((2, 3)))
        p = ReadoutParams(w=Parameter(np.zeros((5, 1))), b=Parameter([[0.0]]))
        with pytest.raises(ShapeError):
            readout(emb, p)


class TestPredict:
    def test_zero_weights_give_even_split(self):
        mlp = MLPParams(layers=[(Parameter(np.zeros((6, 2))), Parameter(np.zeros((1, 2))))])
        probs = predict(constant(np.ones((6, 1))), mlp)
        assert np.allclose(probs.data, [[0.5, 0.5]])

    def test_equal_logits_give_even_split(self):
        w = np.ones((4, 2)) * 1.7  # identical columns -> identical logits
        mlp = MLPParams(layers=[(Parameter(w), Parameter(np.full((1, 2), 3.0)))])
        probs = predict(constant(np.arange(4.0).reshape(4, 1)), mlp)
        assert np.allclose(probs.data, [[0.5, 0.5]])

    def test_matches_affine_softmax_oracle(self, rng):
        gh = rng.standard_normal((5, 1))
        w = rng.standard_normal((5, 2))
        b = rng.standard_normal((1, 2))
        probs = predict(constant(gh), MLPParams(layers=[(Parameter(w), Parameter(b))]))
        logits = gh[:, 0] @ w + b[0]
        e = np.exp(logits - logits.max())
        assert np.abs(probs.data[0] - e / e.sum()).max() < 1e-12
        assert abs(probs.data.sum() - 1.0) < 1e-12


class TestCELoss:
    def test_even_probability_gives_log2(self):
        probs = constant([[0.5, 0.5]])
        assert abs(ce_loss(probs, [1]).item() - math.log(2.0)) < 1e-12

    def test_perfect_prediction_near_zero(self):
        probs = constant([[0.0, 1.0], [1.0, 0.0]])
        assert ce_loss(probs, [1, 0]).item() < 2e-7

    def test_hand_computed_batch(self):
        rows = [[0.8, 0.2], [0.3, 0.7], [0.5, 0.5]]
        labels = [0, 1, 1]
        expected = -(math.log(0.8) + math.log(0.7) + math.log(0.5)) / 3.0
        assert abs(ce_loss(constant(rows), labels).item() - expected) < 1e-12

    def test_bad_label_rejected(self):
        with pytest.raises(ConfigError):
            ce_loss(constant([[0.5, 0.5]]), [2])


class TestMetrics:
    def test_perfectly_separated(self):
        m = compute_metrics([0.9, 0.1], [1, 0])
        assert (m.accuracy, m.f1, m.auc, m.sensitivity) == (1.0, 1.0, 1.0, 1.0)

    def test_balanced_confusion(self):
        m = compute_metrics([0.9, 0.8, 0.2, 0.1], [1, 0, 1, 0])
        assert m.accuracy == 0.5
        assert m.f1 == 0.5
        assert m.sensitivity == 0.5
        assert m.auc == 0.75

    def test_auc_matches_pairwise_oracle(self, rng):
        for _ in range(30):
            n = int(rng.integers(5, 40))
            scores = np.round(rng.random(n), 2)  # induce ties
            labels = rng.integers(0, 2, size=n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            pos = scores[labels == 1]
            neg = scores[labels == 0]
            oracle = sum(
                1.0 if p > q else (0.5 if p == q else 0.0) for p in pos for q in neg
            ) / (pos.size * neg.size)
            assert mann_whitney_auc(scores, labels) == oracle

    @settings(deadline=None, max_examples=60)
    @given(
        data=st.lists(
            st.tuples(st.floats(0.01, 0.99), st.integers(0, 1)), min_size=4, max_size=30
        )
    )
    def test_auc_invariant_under_monotone_transform(self, data):
        scores = np.array([s for s, _ in data])
        labels = np.array([y for _, y in data])
        if labels.min() == labels.max():
            labels[0] = 1 - labels[0]
        base = mann_whitney_auc(scores, labels)
        transformed = np.exp(3.0 * scores) + 1.0
        assert abs(mann_whitney_auc(transformed, labels) - base) < 1e-12

    def test_label_swap_maps_sensitivity_to_specificity(self, rng):
        scores = rng.random(40)
        labels = rng.integers(0, 2, size=40)
        labels[0], labels[1] = 0, 1
        pred = (scores >= 0.5).astype(int)
        tn = int(((pred == 0) & (labels == 0)).sum())
        fp = int(((pred == 1) & (labels == 0)).sum())
        specificity = tn / (tn + fp)
        swapped = compute_metrics(1.0 - scores, 1 - labels)
        assert abs(swapped.sensitivity - specificity) < 1e-12

    def test_single_class_raises(self):
        with pytest.raises(MetricUndefinedError):
            compute_metrics([0.2, 0.4], [0, 0])

    def test_single_class_allow_undefined(self):
        m = compute_metrics([0.2, 0.4], [0, 0], allow_undefined=True)
        assert m.auc is None and m.sensitivity is None
        assert m.accuracy == 1.0

    def test_empty_rejected(self):
        with pytest.raises(MetricUndefinedError):
            compute_metrics([], [])


def tiny_setup(seed=6, n_subjects=12, dropout=0.0):
    ds = generate_dataset(GenConfig(n_nodes=8, n_subjects=n_subjects, seed=3))
    train, test = split(ds, 0.7, seed)
    g = ds.subjects[0][0]
    model = init_model(
        named_stream(seed, "init"),
        n_nodes=g.n_nodes, feature_dim=g.features.shape[1], hidden_dim=4,
        hbn_layers=1, sgc_k=1, edge_types=g.edge_types, dropout=dropout,
    )
    return train, test, model


class TestFinetune:
    def test_zero_lr_constant_metrics(self):
        train, test, model = tiny_setup()
        cfg = RunConfig(lr_finetune=0.0, epochs_finetune=3, batch_size=8,
                        dropout=0.0, seeds=[1])
        rows, _ = finetune(train, test, model, cfg, SeedFanout(2))
        test_rows = [r for r in rows if r["split"] == "test"]
        assert len(test_rows) == 3
        assert all(r["accuracy"] == test_rows[0]["accuracy"] for r in test_rows)
        assert all(r["ce_loss"] == test_rows[0]["ce_loss"] for r in test_rows)

    def test_same_seed_identical_traces(self):
        traces = []
        for _ in range(2):
            train, test, model = tiny_setup(dropout=0.4)
            cfg = RunConfig(lr_finetune=0.01, epochs_finetune=4, batch_size=4,
                            dropout=0.4, seeds=[1])
            rows, _ = finetune(train, test, model, cfg, SeedFanout(5))
            traces.append(rows)
        assert traces[0] == traces[1]

    def test_empty_training_split_rejected(self):
        train, test, model = tiny_setup()
        empty = object.__new__(type(train))
        object.__setattr__(empty, "subjects", [])
        object.__setattr__(empty, "manifest", {})
        object.__setattr__(empty, "subject_ids", ())
        cfg = RunConfig(seeds=[1])
        with pytest.raises(ConfigError):
            finetune(empty, test, model, cfg, SeedFanout(1))

    def test_ce_decreases_monotonically_on_separable_toy(self):
        # trivially separable: class fully determined by one strong feature
        ds = generate_dataset(
            GenConfig(n_nodes=8, n_subjects=16, seed=9, signal_strength=3.0,
                      feature_noise=0.01)
        )
        train, test = split(ds, 0.75, 1)
        g = ds.subjects[0][0]
        model = init_model(
            named_stream(3, "init"), n_nodes=8, feature_dim=8, hidden_dim=4,
            hbn_layers=1, sgc_k=1, edge_types=g.edge_types, dropout=0.0,
        )
        cfg = RunConfig(lr_finetune=5e-4, epochs_finetune=25, batch_size=16,
                        dropout=0.0, seeds=[1])
        rows, _ = finetune(train, test, model, cfg, SeedFanout(4))
        train_ce = [r["ce_loss"] for r in rows if r["split"] == "train"]
        for prev, cur in zip(train_ce, train_ce[1:]):
            assert cur <= prev + 1e-6

    def test_lr_decay_schedule_applied(self):
        train, test, model = tiny_setup()
        cfg = RunConfig(lr_finetune=0.01, epochs_finetune=8, batch_size=8, dropout=0.0,
                        decay_after=4, decay_every=2, lr_decay_multiplier=0.5, seeds=[1])
        rows, _ = finetune(train, test, model, cfg, SeedFanout(2))
        assert len(rows) == 16  # 8 epochs x 2 splits


class TestEmbeddingStack:
    def test_probs_row_is_distribution(self, rng):
        train, test, model = tiny_setup()
        from hemignn.model import subject_probs

        probs = vstack([subject_probs(g, model) for g, _ in test.subjects])
        assert np.allclose(probs.data.sum(axis=1), 1.0, atol=1e-12)

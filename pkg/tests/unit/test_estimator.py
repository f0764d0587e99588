import numpy as np
import pytest

from src.device.mapping import Mapping, Placement
from src.device.modes import default_mode_lut
from src.estimator.buckets import QuantileBuckets, fit_buckets, rank_labels
from src.estimator.dataset import generate_dataset
from src.estimator.encoding import encode, feature_names, mapping_features, summarize
from src.estimator.model import ClassPrediction, evaluate, feasibility_safety, train
from src.utils.errors import ConfigurationError, InsufficientDataError
from tests.conftest import make_model


@pytest.fixture(scope="module")
def small_dataset():
    return generate_dataset(default_mode_lut(), 30, 7, dnn_range=(2, 4), max_partitions=2)


@pytest.fixture(scope="module")
def small_estimator(small_dataset):
    return train(small_dataset, n_classes=4, seed=3, min_per_class=5)


class TestBuckets:
    def test_rank_labels_are_balanced(self):
        values = np.random.default_rng(0).normal(size=103)
        counts = np.bincount(rank_labels(values, 10), minlength=10)
        assert counts.max() - counts.min() <= 1

    def test_fit_buckets_split_evenly(self):
        values = np.arange(100, dtype=float)
        buckets = fit_buckets(values, 10)
        assert buckets.n_classes == 10
        counts = np.bincount(buckets.classify_many(values), minlength=10)
        assert counts.tolist() == [10] * 10

    def test_ties_keep_edges_increasing(self):
        buckets = fit_buckets([1.0, 1.0, 1.0, 2.0, 3.0, 4.0], 3)
        assert all(b > a for a, b in zip(buckets.edges, buckets.edges[1:]))

    def test_too_few_distinct_values(self):
        with pytest.raises(InsufficientDataError):
            fit_buckets([1.0, 1.0, 2.0], 3)

    def test_edges_must_increase(self):
        with pytest.raises(ConfigurationError):
            QuantileBuckets(edges=(2.0, 1.0))

    def test_highest_class_below(self):
        buckets = QuantileBuckets(edges=(1.0, 2.0, 3.0))
        assert buckets.highest_class_below(2.5) == 1
        assert buckets.highest_class_below(0.5) == -1
        assert buckets.classify(2.0) == 2


class TestEncoding:
    def test_one_token_per_layer(self, device, mode_1, small_model):
        other = make_model("other", [10.0, 20.0])
        mapping = Mapping(
            (
                Placement("a", small_model, (1,), ("gpu", "cpu0")),
                Placement("b", other, (), ("cpu1",)),
            )
        )
        sequence = encode(mapping, mode_1, device)
        assert len(sequence) == 5
        assert sequence == encode(mapping, mode_1, device)

    def test_summary_features(self, device, mode_1, small_model):
        mapping = Mapping((Placement("a", small_model, (1,), ("gpu", "cpu0")),))
        names = feature_names(device)
        row = summarize(encode(mapping, mode_1, device), mode_1, device)
        assert row.shape == (len(names),)
        features = dict(zip(names, row))
        assert features["gpu_demand_mflops"] == pytest.approx(300.0)
        assert features["cpu0_demand_mflops"] == pytest.approx(300.0)
        assert features["crossing_volume_mb"] == pytest.approx(2.0)
        assert features["gpu_partitions"] == 1
        assert features["n_services"] == 1
        assert features["power_cap_w"] == pytest.approx(30.0)

    def test_summary_of_unsplit_mapping_has_no_crossing(self, device, mode_1, small_model):
        mapping = Mapping((Placement("a", small_model, (1,), ("gpu", "gpu")),))
        features = dict(zip(feature_names(device), mapping_features(mapping, mode_1, device)))
        assert features["crossing_volume_mb"] == 0.0
        assert features["gpu_partitions"] == 1


class TestDataset:
    def test_counts_per_mode(self, small_dataset):
        assert len(small_dataset) == 8 * 30
        assert small_dataset.counts_per_mode() == {mode_id: 30 for mode_id in range(1, 9)}

    def test_frame_has_labels(self, small_dataset):
        frame = small_dataset.to_frame()
        assert len(frame) == len(small_dataset)
        assert {"mode_id", "latency_ms", "power_w", "n_tokens"} <= set(frame.columns)
        assert (frame["power_w"] > 0).all()

    def test_same_seed_same_labels(self, small_dataset):
        again = generate_dataset(default_mode_lut(), 30, 7, dnn_range=(2, 4), max_partitions=2)
        np.testing.assert_array_equal(again.latencies, small_dataset.latencies)
        np.testing.assert_array_equal(again.features, small_dataset.features)

    def test_per_mode_count_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            generate_dataset(default_mode_lut(), 0, 1)


class TestTraining:
    def test_held_out_metrics(self, small_estimator):
        metrics = small_estimator.metrics
        assert metrics.n_train == 192
        assert metrics.n_test == 48
        assert 0.0 <= metrics.latency_accuracy <= 1.0
        assert 0.0 <= metrics.feasibility_safety <= 1.0
        assert -1.0 <= metrics.power_spearman <= 1.0

    def test_training_labels_are_balanced(self, small_estimator):
        assert small_estimator.n_classes == 4
        assert len(small_estimator.power_buckets.edges) == 3

    def test_evaluate_on_full_dataset(self, small_estimator, small_dataset):
        metrics = evaluate(small_estimator, small_dataset)
        assert metrics.n_test == len(small_dataset)

    def test_predictions_are_valid_classes(self, small_estimator, mode_1, small_model):
        mapping = Mapping((Placement("a", small_model, (), ("gpu",)),))
        prediction = small_estimator.predict(mapping, mode_1)
        assert 0 <= prediction.latency_class < 4
        assert 0 <= prediction.power_class < 4

    def test_empty_workload_predicts_lowest_classes(self, small_estimator, mode_1):
        assert small_estimator.predict(Mapping(), mode_1) == ClassPrediction(0, 0)

    def test_not_enough_samples(self, small_dataset):
        with pytest.raises(InsufficientDataError):
            train(small_dataset, n_classes=10)

    def test_minimum_applies_to_the_training_split(self, small_dataset):
        # 240 samples cover 4 x 55 but the 0.8 split keeps only 192 for training
        with pytest.raises(InsufficientDataError):
            train(small_dataset, n_classes=4, seed=3, min_per_class=55)

    def test_split_fraction_is_checked(self, small_dataset):
        with pytest.raises(ConfigurationError):
            train(small_dataset, n_classes=4, split_fraction=1.0, min_per_class=5)


def test_feasibility_safety_counts_accepted_predictions():
    buckets = QuantileBuckets(edges=(1.0, 2.0, 3.0))
    predicted = np.array([0, 1, 1, 3])
    measured = np.array([0.5, 1.5, 2.5, 3.5])
    # cap 2.0 -> threshold class 1 accepts three predictions, two measured under the cap
    assert feasibility_safety(predicted, measured, buckets, [2.0]) == pytest.approx(2 / 3)
    assert feasibility_safety(predicted, measured, buckets, [0.1]) == 1.0


@pytest.mark.slow
class TestFullSizeTraining:
    @pytest.fixture(scope="class")
    def full_dataset(self):
        return generate_dataset(default_mode_lut(), 1000, 0)

    def test_held_out_rank_correlation(self, full_dataset):
        estimator = train(full_dataset, seed=0)
        metrics = estimator.metrics
        assert metrics.n_train == 6400
        assert metrics.latency_spearman >= 0.80
        assert metrics.power_spearman >= 0.80

    def test_rank_labels_balance_the_training_targets(self, full_dataset):
        for targets in (full_dataset.latencies, full_dataset.powers):
            counts = np.bincount(rank_labels(targets, 10), minlength=10)
            assert counts.max() - counts.min() <= 1

import math
import random

import pytest

from svcompose.automl.learners import (
    DecisionStump,
    GaussianNaiveBayes,
    MajorityClass,
    MinMaxScaler,
    OneNearestNeighbor,
    PipelineService,
    ThreeNearestNeighbors,
    VarianceFilter,
    identity_transform,
)
from svcompose.runtime.errors import ConflictError


def random_dataset(rng, n=12, d=3, classes=("a", "b")):
    features = [[round(rng.uniform(-2, 2), 3) for _ in range(d)] for _ in range(n)]
    labels = [rng.choice(classes) for _ in range(n)]
    if len(set(labels)) < 2:
        labels[0], labels[1] = classes[0], classes[1]
    return features, labels


class TestScaler:
    def test_known_values(self):
        s = MinMaxScaler()
        s.fit([[0.0, 10.0], [4.0, 30.0]])
        assert s.transform([[2.0, 20.0], [0.0, 30.0]]) == [[0.5, 0.5], [0.0, 1.0]]

    def test_constant_attribute_maps_to_zero(self):
        s = MinMaxScaler()
        s.fit([[5.0], [5.0]])
        assert s.transform([[5.0], [7.0]]) == [[0.0], [0.0]]

    def test_transform_before_fit_conflicts(self):
        with pytest.raises(ConflictError):
            MinMaxScaler().transform([[1.0]])

    def test_output_in_unit_interval_on_training_data(self):
        rng = random.Random(0)
        features, _ = random_dataset(rng, n=20)
        s = MinMaxScaler()
        s.fit(features)
        for row in s.transform(features):
            assert all(0.0 <= x <= 1.0 for x in row)


class TestVarianceFilter:
    def test_drops_constant_columns(self):
        v = VarianceFilter()
        v.fit([[1.0, 5.0, 2.0], [2.0, 5.0, 2.0], [3.0, 5.0, 2.0]])
        assert v.keep == [0]
        assert v.transform([[7.0, 5.0, 2.0]]) == [[7.0]]

    def test_matches_recomputed_oracle(self):
        rng = random.Random(1)
        features = [[rng.choice([1.0, 2.0]) for _ in range(4)] for _ in range(10)]
        v = VarianceFilter()
        v.fit(features)
        oracle = [j for j in range(4) if len({row[j] for row in features}) > 1]
        assert v.keep == oracle

    def test_dimension_mismatch_fails(self):
        v = VarianceFilter()
        v.fit([[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(ValueError):
            v.transform([[1.0]])


class TestMajority:
    def test_predicts_most_frequent(self):
        m = MajorityClass()
        m.train([[0.0], [1.0], [2.0]], ["a", "a", "b"])
        assert m.predict([[9.0], [-3.0]]) == ["a", "a"]

    def test_tie_breaks_by_training_order(self):
        m = MajorityClass()
        m.train([[0.0], [1.0], [2.0], [3.0]], ["b", "a", "a", "b"])
        assert m.predict([[0.0]]) == ["b"]

    def test_predict_before_train(self):
        with pytest.raises(ConflictError):
            MajorityClass().predict([[0.0]])


class TestKnn1:
    def test_training_point_predicts_its_own_label(self):
        features = [[0.0, 0.0], [3.0, 3.0], [6.0, 0.0]]
        labels = ["a", "b", "c"]
        k = OneNearestNeighbor()
        k.train(features, labels)
        assert k.predict(features) == labels

    def test_distance_tie_takes_lowest_index(self):
        k = OneNearestNeighbor()
        k.train([[1.0], [-1.0]], ["a", "b"])
        assert k.predict([[0.0]]) == ["a"]

    def test_matches_brute_force_oracle(self):
        rng = random.Random(2)
        features, labels = random_dataset(rng, n=15, d=2)
        queries = [[rng.uniform(-2, 2), rng.uniform(-2, 2)] for _ in range(10)]
        k = OneNearestNeighbor()
        k.train(features, labels)
        got = k.predict(queries)
        for q, predicted in zip(queries, got):
            dists = [sum((a - b) ** 2 for a, b in zip(q, row)) for row in features]
            assert predicted == labels[dists.index(min(dists))]


class TestKnn3:
    def test_majority_of_three(self):
        k = ThreeNearestNeighbors()
        k.train([[0.0], [0.1], [0.2], [5.0]], ["a", "a", "b", "b"])
        assert k.predict([[0.05]]) == ["a"]

    def test_vote_tie_takes_nearest_label(self):
        # neighbors: b at 0.9, a at 1.0, a at 5 -> a wins 2:1; flip one to tie
        k = ThreeNearestNeighbors()
        k.train([[0.9], [-1.0], [5.0]], ["b", "a", "b"])
        # neighbors of 0: b(0.81), a(1.0), b(25) -> b wins
        assert k.predict([[0.0]]) == ["b"]
        k2 = ThreeNearestNeighbors()
        k2.train([[0.9], [-1.0], [1.1]], ["b", "a", "a"])
        # votes a=2 b=1
        assert k2.predict([[0.0]]) == ["a"]

    def test_fewer_than_three_training_points(self):
        k = ThreeNearestNeighbors()
        k.train([[0.0], [1.0]], ["a", "b"])
        assert k.predict([[0.1]]) == ["a"]

    def test_matches_brute_force_oracle(self):
        rng = random.Random(3)
        features, labels = random_dataset(rng, n=20, d=2, classes=("a", "b", "c"))
        queries = [[rng.uniform(-2, 2), rng.uniform(-2, 2)] for _ in range(12)]
        k = ThreeNearestNeighbors()
        k.train(features, labels)
        for q, predicted in zip(queries, k.predict(queries)):
            order = sorted(range(len(features)),
                           key=lambda i: (sum((a - b) ** 2 for a, b in zip(q, features[i])), i))[:3]
            votes = {}
            for i in order:
                votes[labels[i]] = votes.get(labels[i], 0) + 1
            top = max(votes.values())
            expected = next(labels[i] for i in order if votes[labels[i]] == top)
            assert predicted == expected


class TestStump:
    def test_separable_one_dimensional(self):
        s = DecisionStump()
        s.train([[0.0], [1.0], [2.0], [3.0]], ["a", "a", "b", "b"])
        assert s.attribute == 0
        assert 1.0 < s.threshold < 2.0
        assert s.predict([[0.5], [2.5]]) == ["a", "b"]
        # training accuracy is perfect
        assert s.predict([[0.0], [1.0], [2.0], [3.0]]) == ["a", "a", "b", "b"]

    def test_matches_brute_force_over_all_thresholds(self):
        rng = random.Random(4)
        features, labels = random_dataset(rng, n=14, d=3)
        s = DecisionStump()
        s.train(features, labels)
        n = len(labels)

        def accuracy(j, theta):
            left = [labels[i] for i in range(n) if features[i][j] <= theta]
            right = [labels[i] for i in range(n) if features[i][j] > theta]

            def maj(side):
                counts = {}
                for y in side:
                    counts[y] = counts.get(y, 0) + 1
                best = None
                for y in side:
                    if best is None or counts[y] > counts[best]:
                        best = y
                return best if best is not None else maj(labels)

            ll, rl = maj(left), maj(right)
            return sum(
                1 for i in range(n)
                if (ll if features[i][j] <= theta else rl) == labels[i]
            ) / n

        candidates = []
        for j in range(3):
            values = sorted({row[j] for row in features})
            candidates += [(j, (a + b) / 2) for a, b in zip(values, values[1:])]
        best_acc = max(accuracy(j, t) for j, t in candidates)
        got_acc = accuracy(s.attribute, s.threshold)
        assert got_acc == best_acc

    def test_degenerate_data_falls_back_to_majority(self):
        s = DecisionStump()
        s.train([[1.0], [1.0], [1.0]], ["a", "b", "a"])
        assert s.predict([[0.0], [5.0]]) == ["a", "a"]


class TestGaussianNB:
    def test_hand_computed_two_class_case(self):
        g = GaussianNaiveBayes()
        g.train([[0.0], [2.0], [10.0], [12.0]], ["lo", "lo", "hi", "hi"])
        assert g.classes == ["lo", "hi"]
        assert g.priors == [0.5, 0.5]
        assert g.means == [[1.0], [11.0]]
        assert g.variances == [[1.0], [1.0]]
        assert g.predict([[0.5], [11.5], [6.1]]) == ["lo", "hi", "hi"]

    def test_log_joint_matches_formula(self):
        g = GaussianNaiveBayes()
        g.train([[0.0], [2.0], [10.0], [12.0]], ["lo", "hi", "lo", "hi"])
        x = [3.0]
        for c in range(2):
            mu = g.means[c][0]
            var = g.variances[c][0]
            expected = math.log(g.priors[c]) - 0.5 * math.log(2 * math.pi * var) \
                - (x[0] - mu) ** 2 / (2 * var)
            assert g._log_joint(x, c) == pytest.approx(expected, rel=1e-12)

    def test_variance_floor_on_constant_attribute(self):
        g = GaussianNaiveBayes()
        g.train([[5.0, 0.0], [5.0, 1.0], [5.0, 10.0], [5.0, 11.0]], ["a", "a", "b", "b"])
        assert g.variances[0][0] == 1e-9
        assert g.predict([[5.0, 0.5]]) == ["a"]

    def test_prediction_tie_takes_first_seen_class(self):
        g = GaussianNaiveBayes()
        g.train([[1.0], [-1.0]], ["b", "a"])
        # perfectly symmetric around 0: scores tie, first-seen class wins
        assert g.predict([[0.0]]) == ["b"]


class TestStateCodecs:
    @pytest.mark.parametrize("cls,train_args", [
        (MajorityClass, ([[0.0], [1.0], [2.0]], ["a", "a", "b"])),
        (OneNearestNeighbor, ([[0.0], [1.0]], ["a", "b"])),
        (ThreeNearestNeighbors, ([[0.0], [1.0], [2.0]], ["a", "b", "a"])),
        (DecisionStump, ([[0.0], [1.0], [2.0], [3.0]], ["a", "a", "b", "b"])),
        (GaussianNaiveBayes, ([[0.0], [2.0], [10.0]], ["a", "a", "b"])),
    ])
    def test_predictions_survive_encode_decode(self, cls, train_args):
        model = cls()
        model.train(*train_args)
        queries = [[0.3], [1.7], [9.0]]
        revived = cls.decode_state(model.encode_state())
        assert revived.predict(queries) == model.predict(queries)

    def test_preprocessor_codecs(self):
        s = MinMaxScaler()
        s.fit([[0.0], [4.0]])
        assert MinMaxScaler.decode_state(s.encode_state()).transform([[2.0]]) == [[0.5]]
        v = VarianceFilter()
        v.fit([[1.0, 5.0], [2.0, 5.0]])
        assert VarianceFilter.decode_state(v.encode_state()).transform([[3.0, 5.0]]) == [[3.0]]

    def test_pipeline_codec(self):
        p = PipelineService()
        p.set_preprocessor("http://h:1/scaler/0")
        p.set_classifier("http://h:1/knn1/2")
        revived = PipelineService.decode_state(p.encode_state())
        assert revived.preprocessor == "http://h:1/scaler/0"
        assert revived.classifier == "http://h:1/knn1/2"


def test_identity_transform_is_identity():
    m = [[1.0, 2.0], [3.0, 4.0]]
    assert identity_transform(m) == m


def test_pipeline_requires_configuration():
    p = PipelineService()
    with pytest.raises(ConflictError):
        p.train([[1.0]], ["a"])
    with pytest.raises(ConflictError):
        p.predict([[1.0]])

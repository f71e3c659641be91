import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dyadic_probs, random_records
from scaleplan.errors import ConfigError, DataError
from scaleplan.metrics import (
    PredictionRecord,
    VarianceGrouping,
    accuracy_by_resolution,
    delta_cell,
    delta_table,
    ece,
    embedding_variance,
    entropy,
    entropy_stats,
    skewness,
    skewness_curve,
)


def rec(probs, label=0, image_id="x", res=(224, 224), embedding=None, epoch=None):
    return PredictionRecord(
        image_id=image_id, label=label, probs=np.asarray(probs, dtype=np.float64),
        eval_height=res[0], eval_width=res[1], embedding=embedding, epoch=epoch,
    )


def brute_force_ece(records, num_bins):
    """Independent reference: per-bin linear scans over (conf, correct) pairs
    with right-closed edge comparisons on the canonical i/num_bins edges."""
    edges = [i / num_bins for i in range(num_bins + 1)]
    rows = []
    for r in records:
        pred = int(np.argmax(r.probs))
        rows.append((float(r.probs[pred]), pred == r.label))
    total = len(rows)
    terms, bins = [], []
    for k in range(num_bins):
        if k == 0:
            sel = [(c, ok) for c, ok in rows if c <= edges[1]]
        else:
            sel = [(c, ok) for c, ok in rows if edges[k] < c <= edges[k + 1]]
        if sel:
            acc = sum(ok for _, ok in sel) / len(sel)
            conf = math.fsum(c for c, _ in sel) / len(sel)
            terms.append((len(sel) / total) * abs(acc - conf))
            bins.append((len(sel), acc, conf))
        else:
            bins.append((0, 0.0, 0.0))
    return math.fsum(terms), bins


class TestEntropy:
    def test_uniform_is_log_k(self):
        assert entropy([0.25] * 4) == pytest.approx(math.log(4), abs=1e-12)
        assert entropy([1 / 1000] * 1000) == pytest.approx(math.log(1000), abs=1e-9)

    def test_one_hot_is_zero(self):
        assert entropy([0.0, 1.0, 0.0]) == 0.0

    def test_zero_terms_ignored(self):
        assert entropy([0.5, 0.5, 0.0]) == entropy([0.5, 0.5])

    def test_negative_rejected(self):
        with pytest.raises(DataError):
            entropy([0.5, -0.1, 0.6])

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            entropy([])


class TestSkewness:
    def test_hand_value(self):
        assert skewness([0, 0, 3]) == pytest.approx(math.sqrt(2) / 2, abs=1e-12)

    def test_symmetric_is_zero(self):
        assert skewness([-2, -1, 0, 1, 2]) == pytest.approx(0.0, abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(DataError) as err:
            skewness([1.0, 1.0, 1.0])
        assert err.value.code == "skewness.zero_variance"

    @given(
        values=st.lists(st.floats(-100, 100), min_size=3, max_size=40),
        scale=st.floats(0.1, 50),
        shift=st.floats(-100, 100),
    )
    @settings(max_examples=100, deadline=None)
    def test_affine_invariance(self, values, scale, shift):
        x = np.asarray(values)
        if float(np.sqrt(np.mean((x - x.mean()) ** 2))) < 1e-6:
            return
        base = skewness(x)
        assert skewness(x * scale + shift) == pytest.approx(base, abs=1e-6, rel=1e-6)
        assert skewness(x * -scale + shift) == pytest.approx(-base, abs=1e-6, rel=1e-6)


class TestEntropyStats:
    def test_matches_parts(self):
        records = [rec([0.5, 0.5]), rec([0.9, 0.1]), rec([0.7, 0.3])]
        stats = entropy_stats(records)
        ents = [entropy(r.probs) for r in records]
        assert stats.entropies == tuple(ents)
        assert stats.mean == pytest.approx(np.mean(ents))
        assert stats.skewness == pytest.approx(skewness(ents))

    def test_constant_entropies_give_none_skewness(self):
        stats = entropy_stats([rec([0.5, 0.5]), rec([0.5, 0.5])])
        assert stats.skewness is None
        assert stats.std == 0.0


class TestSkewnessCurve:
    def test_mapping_input(self):
        dumps = {
            1: [rec([0.9, 0.1]), rec([0.5, 0.5]), rec([0.6, 0.4])],
            0: [rec([0.8, 0.2]), rec([0.7, 0.3]), rec([0.2, 0.8])],
        }
        curve = skewness_curve(dumps)
        assert [e for e, _ in curve] == [0, 1]
        assert all(s is not None for _, s in curve)

    def test_flat_records_grouped_by_epoch_tag(self):
        records = [
            rec([0.9, 0.1], epoch=0), rec([0.5, 0.5], epoch=0), rec([0.7, 0.3], epoch=0),
            rec([0.6, 0.4], epoch=2), rec([0.8, 0.2], epoch=2), rec([0.3, 0.7], epoch=2),
        ]
        curve = skewness_curve(records)
        assert [e for e, _ in curve] == [0, 2]

    def test_untagged_record_rejected(self):
        with pytest.raises(DataError) as err:
            skewness_curve([rec([0.9, 0.1])])
        assert err.value.code == "dump.epoch"

    def test_empty_epoch_rejected(self):
        with pytest.raises(DataError) as err:
            skewness_curve({0: []})
        assert err.value.code == "dump.epoch_empty"

    def test_zero_variance_epoch_leaves_gap(self):
        curve = skewness_curve({0: [rec([0.5, 0.5]), rec([0.5, 0.5])],
                                1: [rec([0.9, 0.1]), rec([0.5, 0.5]), rec([0.6, 0.4])]})
        assert curve[0] == (0, None)
        assert curve[1][1] is not None


class TestEce:
    def test_hand_example(self):
        records = [rec([0.9, 0.1], label=0), rec([0.6, 0.4], label=1)]
        report = ece(records, num_bins=10)
        assert report.ece == 0.35

    def test_single_bin_collapses_to_gap(self):
        records = [rec([0.9, 0.1], label=0), rec([0.6, 0.4], label=1),
                   rec([0.7, 0.3], label=0)]
        report = ece(records, num_bins=1)
        confs = [0.9, 0.6, 0.7]
        expected = abs(2 / 3 - math.fsum(confs) / 3)
        assert report.ece == pytest.approx(expected, abs=1e-15)

    def test_boundary_confidence_falls_in_lower_bin(self):
        report = ece([rec([0.5, 0.5], label=0)], num_bins=10)
        # conf exactly 0.5 belongs to (0.4, 0.5], bin index 4
        assert report.bins[4].count == 1
        assert report.bins[5].count == 0

    def test_argmax_breaks_ties_toward_lowest_index(self):
        report = ece([rec([0.5, 0.5], label=1)], num_bins=1)
        assert report.bins[0].accuracy == 0.0  # predicted class 0, label 1

    def test_calibrated_dump_near_zero(self):
        rng = np.random.default_rng(0)
        records = []
        for i in range(4000):
            conf = 0.5 + 0.5 * float(rng.integers(1, 2**10)) / 2**10
            correct = bool(rng.random() < conf)
            label = 0 if correct else 1
            records.append(rec([conf, 1.0 - conf], label=label, image_id=str(i)))
        report = ece(records, num_bins=10)
        assert report.ece < 0.03

    def test_matches_brute_force_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(30):
            k = int(rng.integers(2, 12))
            bins = int(rng.integers(1, 25))
            records = random_records(rng, 300, k)
            report = ece(records, num_bins=bins)
            oracle_value, oracle_bins = brute_force_ece(records, bins)
            assert report.ece == oracle_value  # exact, including the last bit
            for b, (count, acc, conf) in zip(report.bins, oracle_bins):
                assert (b.count, b.accuracy, b.mean_confidence) == (count, acc, conf)

    def test_order_independent_to_the_last_bit(self):
        rng = np.random.default_rng(3)
        records = random_records(rng, 500, 7)
        report = ece(records, num_bins=15)
        for _ in range(5):
            rng.shuffle(records)
            assert ece(records, num_bins=15).ece == report.ece

    def test_streaming_equals_in_memory(self):
        rng = np.random.default_rng(4)
        records = random_records(rng, 200, 5)
        assert ece(iter(records), num_bins=15) == ece(records, num_bins=15)

    def test_bin_structure(self):
        report = ece([rec([0.9, 0.1])], num_bins=4)
        assert [(b.lower, b.upper) for b in report.bins] == [
            (0.0, 0.25), (0.25, 0.5), (0.5, 0.75), (0.75, 1.0)
        ]
        assert report.total == 1

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            ece([], num_bins=10)

    def test_bad_bins_rejected(self):
        with pytest.raises(ConfigError):
            ece([rec([0.9, 0.1])], num_bins=0)


class TestEmbeddingVariance:
    def test_per_resolution(self):
        records = [
            rec([1, 0], image_id="a", res=(160, 160), embedding=np.array([0.0, 0.0])),
            rec([1, 0], image_id="b", res=(160, 160), embedding=np.array([2.0, 2.0])),
            rec([1, 0], image_id="a", res=(224, 224), embedding=np.array([1.0, 1.0])),
        ]
        out = embedding_variance(records, VarianceGrouping.PER_RESOLUTION)
        assert out[(160, 160)] == pytest.approx(1.0)  # var per dim = 1.0
        assert out[(224, 224)] == 0.0

    def test_per_image(self):
        records = [
            rec([1, 0], image_id="a", res=(160, 160), embedding=np.array([0.0, 0.0])),
            rec([1, 0], image_id="a", res=(224, 224), embedding=np.array([2.0, 2.0])),
            rec([1, 0], image_id="b", res=(160, 160), embedding=np.array([5.0, 5.0])),
        ]
        out = embedding_variance(records, "per_image")
        assert out["a"] == pytest.approx(1.0)
        assert out["b"] == 0.0

    def test_missing_embedding_rejected(self):
        with pytest.raises(DataError) as err:
            embedding_variance([rec([1, 0])])
        assert err.value.code == "dump.embedding"

    def test_dimension_mismatch_rejected(self):
        records = [
            rec([1, 0], embedding=np.array([0.0, 0.0])),
            rec([1, 0], embedding=np.array([0.0, 0.0, 0.0])),
        ]
        with pytest.raises(DataError):
            embedding_variance(records)


class TestAccuracyByResolution:
    def test_counts(self):
        records = [
            rec([0.9, 0.1], label=0, res=(160, 160)),
            rec([0.2, 0.8], label=0, res=(160, 160)),
            rec([0.9, 0.1], label=0, res=(224, 224)),
        ]
        out = accuracy_by_resolution(records)
        assert out == {(160, 160): 0.5, (224, 224): 1.0}

    def test_sorted_by_resolution(self):
        records = [rec([1, 0], res=(320, 320)), rec([1, 0], res=(128, 128))]
        assert list(accuracy_by_resolution(records)) == [(128, 128), (320, 320)]


class TestDeltaTable:
    def test_cell_format(self):
        assert delta_cell(17.91, 16.05) == "17.91 (+1.86)"

    def test_negative_delta(self):
        assert delta_cell(15.2, 16.05) == "15.20 (-0.85)"

    def test_table_rows_sorted(self):
        out = delta_table({"b/acc": 2.0, "a/acc": 1.0}, {"b/acc": 1.5, "a/acc": 1.5})
        lines = out.splitlines()
        assert lines[0].startswith("a/acc") and "1.00 (-0.50)" in lines[0]
        assert lines[1].startswith("b/acc") and "2.00 (+0.50)" in lines[1]

    def test_missing_baseline_key_rejected(self):
        with pytest.raises(DataError) as err:
            delta_table({"a": 1.0}, {})
        assert err.value.code == "delta.missing"

import re

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conceptorclf.evaluation import RatingTable, confusion, emit_report, krippendorff_alpha, report_csv, report_svg
from conceptorclf.exceptions import DataError
from oracles import pairwise_krippendorff, tally_confusion

# Worked 4-rater x 12-item example with missing entries, a standard reference table for alpha.
REFERENCE_TABLE = [
    [1, 2, 3, 3, 2, 1, 4, 1, 2, None, None, None],
    [1, 2, 3, 3, 2, 2, 4, 1, 2, 5, None, 3],
    [None, 3, 3, 3, 2, 3, 4, 2, 2, 5, 1, None],
    [1, 2, 3, 3, 2, 4, 4, 1, 2, 5, 1, None],
]


def sample_pairs(rng, n, labels):
    truth = rng.choice(labels, n)
    pred = np.where(rng.random(n) < 0.7, truth, rng.choice(labels, n))
    return list(zip(truth.tolist(), pred.tolist()))


class TestConfusion:
    def test_perfect(self):
        cm = confusion([("high", "high")] * 3 + [("low", "low")] * 5)
        assert cm.counts.tolist() == [[3, 0], [0, 5]]
        assert cm.accuracy == 1.0 and cm.recall("high") == 1.0 and cm.recall("low") == 1.0

    def test_known_counts(self):
        pairs = [("A", "A")] * 3 + [("A", "B")] * 2 + [("B", "A")] + [("B", "B")] * 3
        cm = confusion(pairs)
        assert cm.recall("A") == 0.6 and cm.recall("B") == 0.75
        assert cm.precision("A") == 0.75 and cm.accuracy == pytest.approx(6 / 9)

    def test_matches_tally(self, rng):
        labels = ["a", "b", "c"]
        pairs = sample_pairs(rng, 100, labels)
        cm = confusion(pairs, labels)
        counts, acc, rec, prec = tally_confusion(pairs, labels)
        for (t, p), n in counts.items():
            assert cm.counts[labels.index(t), labels.index(p)] == n
        assert cm.accuracy == acc
        for lab in labels:
            assert cm.recall(lab) == rec[lab] and cm.precision(lab) == prec[lab]

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 2**32))
    def test_permutation_invariant(self, seed):
        rng = np.random.default_rng(seed)
        pairs = sample_pairs(rng, 40, ["x", "y", "z"])
        shuffled = [pairs[i] for i in rng.permutation(len(pairs))]
        assert np.array_equal(confusion(pairs, "xyz").counts, confusion(shuffled, "xyz").counts)

    def test_absent_class(self):
        cm = confusion([("a", "a"), ("a", "b")], labels=["a", "b"])
        assert cm.recall("b") is None and cm.precision("b") == 0.0
        assert "recall[b],undefined" in report_csv(cm)

    def test_errors(self):
        with pytest.raises(DataError, match="unknown label 'c'"):
            confusion([("a", "c")], labels=["a", "b"])
        with pytest.raises(DataError):
            confusion([])


class TestReports:
    def test_csv_layout(self):
        cm = confusion([("A", "A")] * 3 + [("A", "B")] * 2 + [("B", "A")] + [("B", "B")] * 3)
        lines = report_csv(cm, {"seed": 1}).splitlines()
        assert lines[0] == '# config: {"seed": 1}'
        assert lines[1:6] == ["truth,predicted,count", "A,A,3", "A,B,2", "B,A,1", "B,B,3"]
        assert "recall[A],0.6" in lines and "recall[B],0.75" in lines and "total,9" in lines

    def test_files_are_byte_identical(self, tmp_path, rng):
        cm = confusion(sample_pairs(rng, 50, ["p", "q"]))
        a = emit_report(cm, tmp_path / "a", provenance={"k": 1})
        b = emit_report(cm, tmp_path / "b", provenance={"k": 1})
        for x, y in zip(a, b):
            assert x.read_bytes() == y.read_bytes()

    def test_svg_opacity_is_row_normalized(self, rng):
        labels = ["a", "b", "c"]
        pairs = sample_pairs(rng, 60, labels) + [("c", "a")] * 4
        cm = confusion(pairs, labels)
        svg = report_svg(cm)
        cells = re.findall(r'data-truth="(\w)" data-predicted="(\w)" data-count="(\d+)".*?fill-opacity="([\d.]+)"', svg)
        assert len(cells) == 9
        counts, *_ = tally_confusion(pairs, labels)
        for t, p, n, opacity in cells:
            row = sum(counts[(t, q)] for q in labels)
            assert int(n) == counts[(t, p)]
            assert float(opacity) == pytest.approx(counts[(t, p)] / row, abs=5e-7)

    def test_svg_escapes_labels(self):
        svg = report_svg(confusion([("<a>", "<a>"), ("b&", "<a>")]))
        assert "&lt;a&gt;" in svg and "<a>" not in svg
        assert "b&amp;" in svg

    def test_unwritable_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(DataError):
            emit_report(confusion([("a", "a")]), blocker / "sub")


class TestKrippendorff:
    @pytest.mark.parametrize("level", ["interval", "ordinal"])
    def test_perfect_agreement(self, level):
        table = RatingTable(np.tile([1.0, 3.0, 2.0, 5.0, 4.0], (3, 1)), level)
        assert krippendorff_alpha(table) == 1.0

    def test_reversed_pair(self):
        # two raters, two items, ratings swapped; worked by hand: 1 - 1 / (2/3)
        assert krippendorff_alpha(RatingTable([[1.0, 2.0], [2.0, 1.0]])) == pytest.approx(-0.5, abs=1e-12)

    def test_reference_table_interval(self):
        table = RatingTable.from_rows(REFERENCE_TABLE, "interval")
        assert krippendorff_alpha(table) == pytest.approx(0.8491071428571428, abs=1e-12)

    def test_reference_table_ordinal(self):
        table = RatingTable.from_rows(REFERENCE_TABLE, "ordinal")
        assert krippendorff_alpha(table) == pytest.approx(0.8153875037548813, abs=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(
        seed=st.integers(0, 2**32),
        raters=st.integers(2, 5),
        items=st.integers(3, 15),
        missing=st.floats(0, 0.4),
        level=st.sampled_from(["interval", "ordinal"]),
    )
    def test_matches_pairwise_oracle(self, seed, raters, items, missing, level):
        rng = np.random.default_rng(seed)
        r = rng.integers(1, 6, (raters, items)).astype(float)
        r[rng.random(r.shape) < missing] = np.nan
        r[0, np.all(np.isnan(r), axis=0)] = 3.0
        pairable = sum(np.count_nonzero(~np.isnan(c)) for c in r.T if np.count_nonzero(~np.isnan(c)) >= 2)
        values = r[:, [np.count_nonzero(~np.isnan(c)) >= 2 for c in r.T]]
        if pairable < 2 or np.unique(values[~np.isnan(values)]).size < 2:
            return
        got = krippendorff_alpha(RatingTable(r, level))
        assert got == pytest.approx(pairwise_krippendorff(r, level), abs=1e-10)

    def test_item_order_irrelevant(self, rng):
        r = rng.integers(1, 5, (3, 10)).astype(float)
        a = krippendorff_alpha(RatingTable(r))
        b = krippendorff_alpha(RatingTable(r[:, rng.permutation(10)]))
        assert a == pytest.approx(b, abs=1e-12)

    def test_errors(self):
        with pytest.raises(DataError, match="without any rating"):
            RatingTable([[1.0, np.nan], [2.0, np.nan]])
        with pytest.raises(DataError, match="undefined"):
            krippendorff_alpha(RatingTable([[1.0, np.nan], [np.nan, 2.0]]))
        with pytest.raises(DataError, match="scale"):
            RatingTable([[1.0, 9.0], [2.0, 1.0]], scale=(1, 5))
        with pytest.raises(ValueError):
            RatingTable([[1.0, 2.0]], level="nominal")

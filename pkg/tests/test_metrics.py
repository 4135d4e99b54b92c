import numpy as np
import pytest

from viewadapt import EmptyEvaluation, EvalAccumulator, InvalidInput, class_mean_recall, csv_report, merge, record, text_report
from viewadapt.core import topk_indices
from viewadapt.metrics import CSV_HEADER


def test_single_class_recall():
    acc = EvalAccumulator(class_count=4, top_k=2)
    record(acc, np.array([5.0, 1.0, 0.0, 0.0]), (0,))
    record(acc, np.array([5.0, 1.0, 0.0, 0.0]), (0,))
    record(acc, np.array([5.0, 1.0, 0.0, 0.0]), (0,))
    record(acc, np.array([0.0, 1.0, 5.0, 4.0]), (0,))
    assert class_mean_recall(acc) == pytest.approx(75.0)


def test_macro_average_ignores_per_class_counts():
    acc = EvalAccumulator(class_count=2, top_k=1)
    for _ in range(9):
        record(acc, np.array([9.0, 0.0]), (0,))  # class 0 always hits
    record(acc, np.array([9.0, 0.0]), (1,))      # class 1 never does
    assert class_mean_recall(acc) == pytest.approx(50.0)


def test_hand_macro_mean():
    acc = EvalAccumulator(class_count=3, top_k=1)
    hits = {0: (2, 2), 1: (1, 2), 2: (0, 2)}  # recalls 1.0, 0.5, 0.0
    for cls, (hit, total) in hits.items():
        for j in range(total):
            predicted = np.zeros(3)
            predicted[cls if j < hit else (cls + 1) % 3] = 1.0
            record(acc, predicted, (cls,))
    assert class_mean_recall(acc) == pytest.approx(50.0)


def test_multilabel_event_counts_each_class():
    acc = EvalAccumulator(class_count=5, top_k=2)
    record(acc, np.array([3.0, 2.0, 1.0, 0.0, 0.0]), (0, 3))
    assert acc.per_class_totals[0] == 1 and acc.per_class_hits[0] == 1
    assert acc.per_class_totals[3] == 1 and acc.per_class_hits[3] == 0


def test_topk_equal_to_class_count_hits_everything():
    acc = EvalAccumulator(class_count=4, top_k=4)
    rng = np.random.default_rng(0)
    for _ in range(20):
        record(acc, rng.standard_normal(4), tuple(rng.choice(4, size=2, replace=False)))
    assert class_mean_recall(acc) == pytest.approx(100.0)


def test_empty_truth_and_empty_evaluation():
    acc = EvalAccumulator(class_count=3, top_k=1)
    with pytest.raises(InvalidInput):
        record(acc, np.zeros(3), ())
    with pytest.raises(EmptyEvaluation):
        class_mean_recall(acc)
    with pytest.raises(InvalidInput):
        record(acc, np.zeros(3), (9,))


def test_accumulator_matches_bruteforce_log():
    rng = np.random.default_rng(21)
    class_count, top_k = 8, 3
    acc = EvalAccumulator(class_count=class_count, top_k=top_k)
    log = []
    for _ in range(300):
        predicted = rng.standard_normal(class_count)
        truth = tuple(int(c) for c in rng.choice(class_count, size=rng.integers(1, 4), replace=False))
        record(acc, predicted, truth)
        log.append((predicted, truth))
    # recompute from scratch, one pass per class
    recalls = []
    for cls in range(class_count):
        totals = sum(1 for _, truth in log if cls in truth)
        hits = sum(1 for predicted, truth in log if cls in truth and cls in topk_indices(predicted, top_k))
        if totals:
            recalls.append(hits / totals)
    assert class_mean_recall(acc) == pytest.approx(100.0 * float(np.mean(recalls)), abs=1e-9)


def test_recall_is_permutation_invariant():
    rng = np.random.default_rng(22)
    events = [
        (rng.standard_normal(5), tuple(int(c) for c in rng.choice(5, size=2, replace=False)))
        for _ in range(100)
    ]
    first = EvalAccumulator(class_count=5, top_k=2)
    for predicted, truth in events:
        record(first, predicted, truth)
    shuffled = EvalAccumulator(class_count=5, top_k=2)
    for i in rng.permutation(len(events)):
        record(shuffled, events[i][0], events[i][1])
    assert class_mean_recall(first) == class_mean_recall(shuffled)


def test_recall_is_monotone_in_top_k():
    rng = np.random.default_rng(23)
    events = [
        (rng.standard_normal(6), tuple(int(c) for c in rng.choice(6, size=2, replace=False)))
        for _ in range(80)
    ]
    recalls = []
    for k in range(1, 7):
        acc = EvalAccumulator(class_count=6, top_k=k)
        for predicted, truth in events:
            record(acc, predicted, truth)
        recalls.append(class_mean_recall(acc))
    assert all(a <= b + 1e-12 for a, b in zip(recalls, recalls[1:]))


def test_merge_is_fieldwise_addition():
    rng = np.random.default_rng(24)
    a = EvalAccumulator(class_count=4, top_k=2)
    b = EvalAccumulator(class_count=4, top_k=2)
    both = EvalAccumulator(class_count=4, top_k=2)
    for acc_half in (a, b):
        for _ in range(40):
            predicted = rng.standard_normal(4)
            truth = (int(rng.integers(4)),)
            record(acc_half, predicted, truth)
            record(both, predicted, truth)
    merged = merge(a, b)
    np.testing.assert_array_equal(merged.per_class_hits, both.per_class_hits)
    np.testing.assert_array_equal(merged.per_class_totals, both.per_class_totals)
    assert class_mean_recall(merged) == class_mean_recall(both)
    with pytest.raises(InvalidInput):
        merge(a, EvalAccumulator(class_count=4, top_k=3))


def test_reports_are_deterministic_and_structured():
    rng = np.random.default_rng(25)
    acc = EvalAccumulator(class_count=3, top_k=1)
    for _ in range(30):
        record(acc, rng.standard_normal(3), (int(rng.integers(3)),))
    text = text_report(acc, setting="full")
    csv = csv_report(acc, setting="full")
    assert text == text_report(acc, setting="full")
    assert csv == csv_report(acc, setting="full")
    lines = csv.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert lines[1].startswith("summary,full,actions,1,,,,")
    assert len(lines) == 2 + int(np.sum(acc.per_class_totals > 0))
    assert "class_mean_recall=" in text

import json
import math

import numpy as np
import pytest

from viewadapt import (
    BankSet,
    EngineConfig,
    InvalidInput,
    MemoryBank,
    assign_pseudo_labels,
    compute_prototypes,
    confidence_weights,
    entropy,
    export_bank_snapshot,
    prototype_logits,
    update_banks,
)


def offline_bank_selection(candidates, capacity):
    """Reference rule: keep the `capacity` entries with lowest entropy, earlier
    arrival winning ties. `candidates` is a list of (entropy, arrival, payload)."""
    ranked = sorted(candidates, key=lambda c: (c[0], c[1]))
    return ranked[:capacity]


def test_streaming_bank_matches_offline_selection():
    rng = np.random.default_rng(11)
    for _ in range(10):
        class_count = int(rng.integers(2, 10))
        capacity = int(rng.choice([5, 50]))
        n = int(rng.integers(20, 400))
        banks = BankSet(class_count, capacity)
        per_class = {c: [] for c in range(class_count)}
        for arrival in range(n):
            cls = int(rng.integers(class_count))
            # coarse grid so entropy ties actually happen
            ent = float(rng.integers(0, 6)) / 4.0
            conf = float(rng.standard_normal())
            rep = rng.standard_normal(4)
            banks[cls].offer(rep, conf, ent, banks.next_arrival)
            per_class[cls].append((ent, banks.next_arrival, rep))
            banks.next_arrival += 1
        for cls in range(class_count):
            want = offline_bank_selection(per_class[cls], capacity)
            got = banks[cls].entries
            assert [(e.entropy, e.arrival) for e in got] == [(w[0], w[1]) for w in want]
            for entry, w in zip(got, want):
                np.testing.assert_array_equal(entry.representation, w[2])


def test_full_bank_tie_keeps_incumbent():
    bank = MemoryBank(class_id=0, capacity=1)
    assert bank.offer(np.array([1.0]), 0.5, 0.7, arrival=0)
    # equal entropy, later arrival: rejected
    assert not bank.offer(np.array([2.0]), 9.9, 0.7, arrival=1)
    assert bank.entries[0].arrival == 0
    # strictly lower entropy evicts
    assert bank.offer(np.array([3.0]), 0.1, 0.69, arrival=2)
    assert len(bank) == 1 and bank.entries[0].arrival == 2


def test_bank_never_exceeds_capacity():
    rng = np.random.default_rng(5)
    bank = MemoryBank(0, 7)
    for arrival in range(100):
        bank.offer(rng.standard_normal(3), 0.0, float(rng.random()), arrival)
        assert len(bank) <= 7
        ents = [e.sort_key for e in bank.entries]
        assert ents == sorted(ents)


def test_assign_pseudo_labels_tuple_contents():
    logits = np.array([0.1, 2.0, -1.0, 1.5])
    rep = np.array([1.0, 2.0])
    tup = assign_pseudo_labels(rep, logits, k=2)
    assert tup.pseudo_labels == (1, 3)
    np.testing.assert_array_equal(tup.confidences, [2.0, 1.5])
    assert tup.entropy == pytest.approx(entropy(logits))
    np.testing.assert_array_equal(tup.representation, rep)


def test_update_banks_fans_out_to_every_pseudo_label():
    config = EngineConfig(class_count=4, k_labels=2, bank_capacity=10)
    banks = BankSet.for_config(config)
    tup = assign_pseudo_labels(np.array([1.0, 0.0]), np.array([3.0, 1.0, 2.0, 0.0]), k=2)
    update_banks(banks, [tup])
    assert banks.sizes() == [1, 0, 1, 0]
    assert banks[0].entries[0].arrival == banks[2].entries[0].arrival == 0
    assert banks[0].entries[0].confidence == 3.0
    assert banks[2].entries[0].confidence == 2.0
    assert banks.next_arrival == 1


def test_confidence_weights_positive_case_is_plain_normalization():
    w = confidence_weights(np.array([3.0, 1.0]))
    np.testing.assert_allclose(w, [0.75, 0.25], atol=1e-12)


def test_confidence_weights_shifted_case():
    w = confidence_weights(np.array([1.0, -1.0]))
    assert w.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(w >= 0)
    assert w[0] > w[1]
    # all-equal confidences, positive or not, give uniform weights
    np.testing.assert_allclose(confidence_weights(np.array([-2.0, -2.0])), [0.5, 0.5], atol=1e-9)
    np.testing.assert_allclose(confidence_weights(np.array([4.0, 4.0, 4.0])), np.full(3, 1 / 3), atol=1e-12)


def test_confidence_weights_always_convex():
    rng = np.random.default_rng(8)
    for _ in range(200):
        conf = rng.standard_normal(rng.integers(1, 9)) * rng.uniform(0.1, 5)
        w = confidence_weights(conf)
        assert abs(w.sum() - 1.0) < 1e-9
        assert np.all(w >= 0)


def test_compute_prototypes_weighted_mean():
    banks = BankSet(class_count=2, capacity=4)
    banks[0].offer(np.array([1.0, 0.0]), 3.0, 0.5, 0)
    banks[0].offer(np.array([0.0, 1.0]), 1.0, 0.6, 1)
    protos = compute_prototypes(banks)
    np.testing.assert_allclose(protos.prototypes[0], [0.75, 0.25], atol=1e-12)
    np.testing.assert_array_equal(protos.prototypes[1], [0.0, 0.0])
    assert protos.populated.tolist() == [True, False]


def test_prototype_is_convex_combination_of_bank_entries():
    rng = np.random.default_rng(13)
    for _ in range(30):
        banks = BankSet(class_count=1, capacity=20)
        n = int(rng.integers(1, 12))
        reps = rng.standard_normal((n, 5))
        for a in range(n):
            banks[0].offer(reps[a], float(rng.standard_normal()), float(rng.random()), a)
        proto = compute_prototypes(banks).prototypes[0]
        stored = np.stack([e.representation for e in banks[0].entries])
        # coordinate-wise bounds of the stored points contain any convex combination
        assert np.all(proto >= stored.min(axis=0) - 1e-12)
        assert np.all(proto <= stored.max(axis=0) + 1e-12)


def test_prototype_logits_scores_populated_classes_only():
    banks = BankSet(class_count=3, capacity=4)
    banks[1].offer(np.array([0.0, 2.0]), 1.0, 0.2, 0)
    protos = compute_prototypes(banks)
    scores = prototype_logits(protos, np.array([0.0, 5.0]))
    assert scores[0] == 0.0 and scores[2] == 0.0
    assert scores[1] == pytest.approx(1.0)


def test_empty_bankset_prototype_logits_are_all_zero():
    protos = compute_prototypes(BankSet(class_count=4, capacity=3), rep_dim=2)
    np.testing.assert_array_equal(prototype_logits(protos, np.array([1.0, 1.0])), np.zeros(4))


def test_bank_capacity_must_be_positive():
    with pytest.raises(InvalidInput):
        MemoryBank(0, 0)


def test_export_bank_snapshot_roundtrips_as_jsonl(tmp_path):
    banks = BankSet(class_count=2, capacity=3)
    banks[0].offer(np.array([1.5, -0.5]), 2.0, 0.25, 0)
    banks[1].offer(np.array([0.0, 1.0]), -1.0, 0.75, 1)
    path = tmp_path / "banks.jsonl"
    assert export_bank_snapshot(banks, path) == 2
    lines = [json.loads(line) for line in path.read_text().splitlines()]
    assert [obj["class_id"] for obj in lines] == [0, 1]
    assert lines[0]["representation"] == [1.5, -0.5]
    assert lines[1]["entropy"] == 0.75 and lines[1]["confidence"] == -1.0

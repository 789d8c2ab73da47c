import numpy as np
import pytest

from qemine.augment import AugmentConfig, augment_filtration, augment_scorer
from qemine.corpus import QERecord
from qemine.errors import ConfigError


def _records(scores):
    return [QERecord(f"src {i}", f"tgt {i}", s) for i, s in enumerate(scores)]


class TestFiltrationMode:
    def test_counts_when_all_pass_cutoff(self):
        data = augment_filtration(_records([0.9, 0.8, 0.7, 1.0]), AugmentConfig(3, 0.7, 0))
        assert len(data.positives) == 4
        assert len(data.negatives) == 12
        assert data.label_kind == "binary"

    def test_counts_with_one_demotion(self):
        data = augment_filtration(_records([0.9, 0.6, 0.8, 1.0]), AugmentConfig(3, 0.7, 0))
        assert len(data.positives) == 3
        assert len(data.negatives) == 13

    def test_binary_labels(self):
        data = augment_filtration(_records([0.9, 0.6, 0.8, 1.0]), AugmentConfig(3, 0.7, 0))
        assert all(r.score == 1.0 for r in data.positives)
        assert all(r.score == 0.0 for r in data.negatives)

    def test_demoted_pair_appears_once_and_leaves_positives(self):
        records = _records([0.9, 0.6, 0.8, 1.0])
        data = augment_filtration(records, AugmentConfig(3, 0.7, 0))
        demoted = [r for r in data.negatives if r.target == records[1].target
                   and r.source == records[1].source]
        assert len(demoted) == 1
        assert all(r.source != records[1].source for r in data.positives)

    def test_cutoff_keeps_boundary_score(self):
        data = augment_filtration(_records([0.7, 0.8, 0.9, 1.0]), AugmentConfig(3, 0.7, 0))
        assert len(data.positives) == 4


class TestScorerMode:
    def test_counts_and_labels(self):
        records = _records([0.9, 0.2, 0.8, 1.0])
        data = augment_scorer(records, AugmentConfig(3, 0.7, 0))
        assert len(data.positives) == 4
        assert len(data.negatives) == 12
        assert data.label_kind == "continuous"
        # originals keep their scores, even below the filtration cutoff
        assert [r.score for r in data.positives] == [0.9, 0.2, 0.8, 1.0]
        assert all(r.score == 0.0 for r in data.negatives)


class TestSampling:
    def test_exact_negative_count_both_modes(self):
        records = _records(np.linspace(0.1, 1.0, 25))
        for n in (1, 3, 5):
            config = AugmentConfig(n, 0.0, 7)  # cutoff 0: no demotions
            assert len(augment_filtration(records, config).negatives) == n * 25
            assert len(augment_scorer(records, config).negatives) == n * 25

    def test_never_pairs_a_source_with_its_own_target(self):
        records = _records(np.linspace(0.1, 1.0, 10))
        own_target = {r.source: r.target for r in records}
        for seed in range(1000):
            data = augment_scorer(records, AugmentConfig(3, 0.7, seed))
            for neg in data.negatives:
                assert own_target[neg.source] != neg.target

    def test_negatives_are_distinct_per_source(self):
        records = _records(np.linspace(0.1, 1.0, 20))
        data = augment_scorer(records, AugmentConfig(5, 0.7, 3))
        by_source = {}
        for neg in data.negatives:
            by_source.setdefault(neg.source, []).append(neg.target)
        for targets in by_source.values():
            assert len(targets) == len(set(targets)) == 5

    def test_deterministic_given_seed(self):
        records = _records(np.linspace(0.1, 1.0, 15))
        a = augment_filtration(records, AugmentConfig(3, 0.7, 42))
        b = augment_filtration(records, AugmentConfig(3, 0.7, 42))
        assert a == b
        c = augment_filtration(records, AugmentConfig(3, 0.7, 43))
        assert a != c

    def test_too_few_records(self):
        with pytest.raises(ConfigError):
            augment_scorer(_records([0.9, 0.8, 1.0]), AugmentConfig(3, 0.7, 0))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AugmentConfig(0, 0.7, 0)
        with pytest.raises(ValueError):
            AugmentConfig(3, 1.4, 0)


class TestSerialization:
    def test_records_serialize_as_qe_tsv(self, tmp_path):
        from qemine.corpus import load_qe, save_qe

        records = _records([0.9, 0.6, 0.8, 1.0])
        data = augment_filtration(records, AugmentConfig(3, 0.7, 0))
        path = tmp_path / "aug.tsv"
        save_qe(data.records(), path)
        reloaded = load_qe(path)
        assert reloaded == data.records()

import numpy as np
import pytest

from qemine import EncoderConfig, FeaturizerConfig, QERecord

SMALL_FEATURIZER = FeaturizerConfig((1, 2, 3), 256, 0)
SMALL_ENCODER = EncoderConfig(SMALL_FEATURIZER, hidden_units=8, embedding_dim=6)


@pytest.fixture
def small_encoder_config():
    return SMALL_ENCODER


@pytest.fixture
def qe_file(tmp_path):
    path = tmp_path / "qe.tsv"
    path.write_text(
        "guten morgen\tgood morning\t0.9\n"
        "wie geht es\thow are you\t0.75\n"
        "das haus\tthe house\t0.5\n",
        encoding="utf-8",
    )
    return path


@pytest.fixture
def tiny_qe_records():
    rng = np.random.default_rng(0)
    words_a = ["kafo", "limba", "melo", "daki", "bemu", "cela"]
    words_b = ["norz", "pyrt", "quvo", "rusk", "strix", "tovan"]
    records = []
    for k in range(12):
        idx = rng.integers(0, len(words_a), 4)
        source = " ".join(words_a[i] for i in idx)
        target = " ".join(words_b[i] for i in idx)
        records.append(QERecord(source, target, float(rng.integers(5, 11)) / 10.0))
    return records

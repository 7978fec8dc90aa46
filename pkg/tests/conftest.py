import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def toy_corpus():
    """Small normalized corpus, 19 distinct words."""
    return [
        "saya makan nasi",
        "kami minum air",
        "saya minum kopi",
        "dia makan roti",
        "mereka membaca buku",
        "saya membaca surat",
        "kami makan ikan",
        "dia minum air",
        "saya makan nasi goreng",
        "kamu menulis surat",
        "mereka makan sayur",
        "dia membaca buku tua",
        "saya makan roti",
        "kami membaca buku",
        "dia makan nasi",
    ]

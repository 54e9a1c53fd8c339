import pytest

from s3e.toy import toy_paths
from s3e.vectors_io import UnigramTable, WordVectorTable, load_unigram, load_vectors


@pytest.fixture(scope="session")
def toy():
    return toy_paths()


@pytest.fixture(scope="session")
def toy_vectors(toy):
    return load_vectors(toy.vectors)


@pytest.fixture(scope="session")
def toy_unigram(toy):
    return load_unigram(toy.freq)


@pytest.fixture
def write(tmp_path):
    """Write text to a file under tmp_path and return its path."""

    def _write(name, text):
        p = tmp_path / name
        p.write_text(text, encoding="utf-8")
        return p

    return _write


def random_tables(rng, n_words=60, dim=5, vocab_prefix="w"):
    words = tuple(f"{vocab_prefix}{i}" for i in range(n_words))
    vectors = WordVectorTable(words, rng.standard_normal((n_words, dim)))
    counts = {w: int(c) for w, c in zip(words, rng.integers(1, 5000, n_words))}
    return vectors, UnigramTable.from_counts(counts)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line; call with (ok, detail) or skip(reason)."""

    class Recorder:
        def __init__(self):
            self.name = None

        def __call__(self, name):
            self.name = name
            return self

        def check(self, ok, detail=""):
            ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {self.name}  {detail}".rstrip())
            assert ok, f"{self.name}: {detail}"

        def skip(self, reason):
            ACCEPTANCE_LINES.append(f"SKIP  {self.name}  {reason}")
            pytest.skip(reason)

    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

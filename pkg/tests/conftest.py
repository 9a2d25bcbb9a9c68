from __future__ import annotations

import pytest

from domainlex import resources
from domainlex.analyzer import DomainAnalyzer
from domainlex.corpus import BigramModel, WordModel, build_char_markov
from domainlex.segmenter import Segmenter

# criterion lines collected by test_acceptance.py, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def rules():
    return resources.default_psl()


@pytest.fixture(scope="session")
def wm() -> WordModel:
    return resources.default_word_model()


@pytest.fixture(scope="session")
def bm() -> BigramModel:
    return resources.default_bigram_model()


@pytest.fixture(scope="session")
def seg(wm, bm) -> Segmenter:
    return Segmenter(wm, bm)


@pytest.fixture(scope="session")
def char_model(wm):
    return build_char_markov(wm)


@pytest.fixture(scope="session")
def analyzer(rules, seg, char_model) -> DomainAnalyzer:
    return DomainAnalyzer(rules, seg, char_model)


@pytest.fixture
def tiny_resources(tmp_path):
    """Small suffix list and corpora on disk, for fast command-line runs."""
    psl = tmp_path / "psl.dat"
    psl.write_text("com\nnet\nuk\nco.uk\n// ===BEGIN PRIVATE DOMAINS===\nblogspot.com\n// ===END PRIVATE DOMAINS===\n")
    uni = tmp_path / "uni.txt"
    uni.write_text(
        "the\t1000\nduck\t300\ngo\t500\nloans\t120\ncheap\t110\npay\t90\nday\t200\n"
        "payday\t60\nshop\t150\nnews\t140\nbest\t130\nflowers\t40\nmy\t400\n"
    )
    bi = tmp_path / "bi.txt"
    bi.write_text("payday loans\t30\nduck go\t5\n")
    return ["--psl", str(psl), "--unigrams", str(uni), "--bigrams", str(bi)]

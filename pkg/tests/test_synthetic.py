import io

from domainlex import synthetic
from domainlex.harness import ingest


def test_generator_is_seeded(wm):
    cfg = synthetic.SyntheticConfig(n=300)
    a = synthetic.generate(wm, 1, cfg)
    assert a == synthetic.generate(wm, 1, cfg)
    assert a != synthetic.generate(wm, 2, cfg)


def test_rows_follow_the_contract(wm, analyzer):
    rows = synthetic.generate(wm, 3, synthetic.SyntheticConfig(n=2000))
    assert len({r.domain for r in rows}) == 2000
    for r in rows:
        assert r.label == int(r.rating < 60)
        assert 0 <= r.confidence <= 100
        assert r.planted is None or r.planted in r.domain
    planted_pos = sum(r.planted is not None for r in rows if r.label) / sum(r.label for r in rows)
    planted_neg = sum(r.planted is not None for r in rows if not r.label) / sum(1 - r.label for r in rows)
    assert planted_pos > 0.4 and planted_neg < 0.05
    res = ingest(io.StringIO(synthetic.to_csv(rows)), analyzer)
    assert res.skip_count <= 5
    assert [r.label for r in res.records] == [r.label for r in rows if r.domain in {x.raw for x in res.records}]


def test_planted_words_segment_cleanly(seg):
    for w in synthetic.PLANTED_WORDS:
        assert seg.segment(w).tokens == (w,)


def test_filler_excludes_planted(wm):
    filler = synthetic.filler_vocabulary(wm, 500, set(synthetic.PLANTED_WORDS))
    assert len(filler) == 500
    assert not set(filler) & set(synthetic.PLANTED_WORDS)
    assert all(3 <= len(w) <= 9 and w.isalpha() for w in filler)

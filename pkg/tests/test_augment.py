import sys
from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from xlstr.augment import (
    DictionaryTranslator,
    IdentityTranslator,
    SubprocessTranslator,
    cross_translate,
    make_translator,
)
from xlstr.corpus import ORIGINAL, Split, serialize_pairs, translated_from
from xlstr.errors import ConfigError, MissingCapability, TranslationFailure
from xlstr.synthetic import synth_dataset


def sets(sizes, langs=("eng", "esp", "hau")):
    return [synth_dataset(l, Split.TRAIN, n, seed=5) for l, n in zip(langs, sizes)]


@settings(max_examples=50)
@given(st.tuples(*[st.integers(0, 40)] * 3))
def test_balance_property(sizes):
    aug = cross_translate(sets(sizes), IdentityTranslator())
    n = sum(sizes)
    assert len(aug) == 3 * n
    assert set(aug.balance().values()) == {n}


def test_fullscale_arithmetic():
    aug = cross_translate(sets((5500, 1562, 1736)), IdentityTranslator())
    assert aug.balance() == {"eng": 8798, "esp": 8798, "hau": 8798}
    assert len(aug) == 26394


def test_single_language_identity():
    (ds,) = sets((7,), ("kin",))
    aug = cross_translate([ds], IdentityTranslator())
    assert aug.instances == ds.instances and set(aug.provenance) == {ORIGINAL}


def test_identity_two_languages():
    a, b = sets((4, 3), ("eng", "esp"))
    aug = cross_translate([a, b], IdentityTranslator())
    for inst in a.instances:
        copies = [i for i in aug.instances if i.pair_id == inst.pair_id]
        assert {i.lang for i in copies} == {"eng", "esp"}
        assert {(i.sent1, i.sent2, i.score) for i in copies} == {(inst.sent1, inst.sent2, inst.score)}


def test_scores_and_provenance():
    data = sets((6, 5, 4))
    aug = cross_translate(data, DictionaryTranslator.from_lexicon())
    for ds in data:
        orig = Counter(i.score for i in ds.instances)
        for tgt in aug.languages:
            if tgt == ds.lang:
                continue
            got = Counter(i.score for i, p in zip(aug.instances, aug.provenance)
                          if i.lang == tgt and p == translated_from(ds.lang))
            assert got == orig
    for inst, p in zip(aug.instances, aug.provenance):
        assert p != translated_from(inst.lang)


def test_dictionary_translates_lexicon_words():
    t = DictionaryTranslator.from_lexicon()
    from xlstr.synthetic import load_lexicon
    lex = load_lexicon()
    assert t.translate(f"{lex['eng'][0]} unknownword", "eng", "hau") == f"{lex['hau'][0]} unknownword"


def test_deterministic_serialization():
    t = DictionaryTranslator.from_lexicon()
    a = cross_translate(sets((5, 5, 5)), t)
    b = cross_translate(sets((5, 5, 5)), t)
    assert serialize_pairs(a.instances) == serialize_pairs(b.instances)


def test_missing_capability():
    t = DictionaryTranslator({("eng", "esp"): {}})
    with pytest.raises(MissingCapability):
        cross_translate(sets((2, 2), ("eng", "esp")), t)


def test_only_train_data():
    with pytest.raises(ValueError):
        cross_translate([synth_dataset("eng", "dev", 3)], IdentityTranslator())


class Boom:
    def supports(self, s, t):
        return True

    def translate(self, text, s, t):
        raise RuntimeError("no network")


def test_failure_carries_pair_id():
    with pytest.raises(TranslationFailure) as ei:
        cross_translate(sets((1, 1), ("eng", "esp")), Boom())
    assert ei.value.pair_id == "eng-train-0000"


def test_audit_flags_collapsed_pairs():
    class Collapse(IdentityTranslator):
        def translate(self, text, s, t):
            return "A man is jumping into a low wall"

    aug = cross_translate(sets((3, 3), ("eng", "esp")), Collapse())
    assert len(aug.audit) == 6
    assert all(a.probe == pytest.approx(1.0) for a in aug.audit)
    assert len(aug.flagged()) == sum(1 for a in aug.audit if a.score < 0.9)


ECHO = "import sys\nfor line in sys.stdin:\n    s, t, x = line.rstrip('\\n').split('\\t')\n    print(f'[{t}] ' + x, flush=True)\n"


def test_subprocess_adapter():
    t = SubprocessTranslator([sys.executable, "-c", ECHO], timeout=10)
    try:
        assert t.translate("hello  world", "eng", "esp") == "[esp] hello world"
        aug = cross_translate(sets((2, 1), ("eng", "esp")), t)
        assert len(aug) == 6
        assert aug.instances[-1].sent1.startswith("[esp] ")
    finally:
        t.close()


def test_subprocess_dead_process():
    t = SubprocessTranslator([sys.executable, "-c", "pass"], timeout=5)
    with pytest.raises(TranslationFailure):
        t.translate("x", "eng", "esp")
    t.close()


def test_make_translator():
    assert isinstance(make_translator("identity"), IdentityTranslator)
    assert isinstance(make_translator("dictionary"), DictionaryTranslator)
    with pytest.raises(ConfigError):
        make_translator("nllb")

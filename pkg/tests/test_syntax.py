from hypothesis import given
from hypothesis import strategies as st

from errorscope.formats import SyntaxRow
from errorscope.syntax import is_word_token, syntax_tags, tokenize, word_token_count


def texts_of(spans):
    return [s.text for s in spans]


def test_internal_apostrophes_stay_inside_tokens():
    spans = tokenize("what's today's high and low")
    assert texts_of(spans) == ["what's", "today's", "high", "and", "low"]
    assert len(spans) == 5


def test_empty_text():
    assert tokenize("") == []


def test_punctuation_detachment():
    assert texts_of(tokenize("hello, world!")) == ["hello", ",", "world", "!"]


def test_leading_and_trailing_punctuation():
    assert texts_of(tokenize('"(hello!)"')) == ['"', "(", "hello", "!", ")", '"']


def test_byte_offsets_slice_the_text():
    text = "héllo, wörld!"
    raw = text.encode("utf-8")
    for span in tokenize(text):
        assert raw[span.byte_start : span.byte_end].decode("utf-8") == span.text


@given(st.text(max_size=80))
def test_spans_ordered_and_non_overlapping(text):
    spans = tokenize(text)
    previous_end = 0
    for span in spans:
        assert span.byte_start >= previous_end
        assert span.byte_end > span.byte_start
        previous_end = span.byte_end
    assert previous_end <= len(text.encode("utf-8"))


@given(st.text(max_size=80))
def test_tokenize_is_deterministic(text):
    assert tokenize(text) == tokenize(text)


def test_word_count_excludes_punctuation():
    assert word_token_count("hi!") == 1
    assert word_token_count("hello, world!") == 2
    assert not is_word_token("!?")


def test_long_sentence_boundary():
    fifteen = " ".join(["word"] * 15)
    sixteen = " ".join(["word"] * 16)
    assert "long_sentence" not in syntax_tags(fifteen, None)
    assert syntax_tags(sixteen, None) == {"long_sentence"}


def test_short_sentence_boundary():
    assert syntax_tags("two words", None) == {"short_sentence"}
    assert syntax_tags("exactly three words", None) == frozenset()


def test_missing_flags_pass_through():
    row = SyntaxRow(0, has_subject=True, has_verb=False, has_object=True)
    tags = syntax_tags("please book the flight for tomorrow morning", row)
    assert tags == {"missing_verb"}


def test_no_syntax_table_means_no_missing_tags():
    tags = syntax_tags("short", None)
    assert not any(t.startswith("missing_") for t in tags)


def test_token_count_override_drives_length_tags():
    row = SyntaxRow(0, True, True, True, token_count_override=20)
    assert "long_sentence" in syntax_tags("tiny text", row)


@given(st.text(max_size=120))
def test_length_tags_mutually_exclusive(text):
    tags = syntax_tags(text, None)
    assert not ({"long_sentence", "short_sentence"} <= tags)

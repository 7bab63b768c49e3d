"""Content-stream lexer, operator execution and run-to-block assignment."""

import pytest

from layoutdiff.contentstream import (
    StreamError,
    assign_runs_to_blocks,
    decode_stream,
    tokenize_stream,
)
from layoutdiff.docmodel import BBox, Block, Document, Page

FONTS = {"/F1": {"family": "LiberationSans", "bold": True, "italic": False}}


def test_tokenize_example_stream():
    tokens = tokenize_stream(b"BT /F1 12 Tf 72 700 Td (Hi) Tj ET")
    assert len(tokens) == 10
    assert tokens[-1].kind == "operator" and tokens[-1].lexeme == "ET"
    kinds = [t.kind for t in tokens]
    assert kinds == [
        "operator", "name", "number", "operator", "number",
        "number", "operator", "string", "operator", "operator",
    ]


def test_tokenize_empty():
    assert tokenize_stream(b"") == []


def test_tokenize_string_escapes():
    tokens = tokenize_stream(rb"(a\)b)")
    assert len(tokens) == 1
    assert tokens[0].kind == "string"
    assert tokens[0].lexeme == "a)b"


def test_tokenize_unterminated_string():
    with pytest.raises(StreamError, match="unterminated"):
        tokenize_stream(b"(oops")


def test_decode_example_stream():
    tokens = tokenize_stream(b"BT /F1 12 Tf 72 700 Td 1 0 0 rg (Hi) Tj ET")
    runs = decode_stream(tokens, FONTS, page_h=792)
    assert len(runs) == 1
    run, anchor = runs[0]
    assert run.text == "Hi"
    assert run.font_family == "LiberationSans"
    assert run.bold and not run.italic
    assert run.size == 12
    assert run.color == (255, 0, 0)
    assert anchor == (72, 92)


def test_decode_no_tj_no_runs():
    tokens = tokenize_stream(b"BT /F1 12 Tf 10 10 Td ET")
    assert decode_stream(tokens, FONTS, 792) == []


def test_decode_gray_half_rounds_up():
    tokens = tokenize_stream(b"BT /F1 10 Tf 0.5 g 0 0 Td (x) Tj ET")
    runs = decode_stream(tokens, FONTS, 792)
    assert runs[0][0].color == (128, 128, 128)


def test_decode_td_is_cumulative():
    stream = b"BT /F1 10 Tf 10 700 Td (a) Tj 5 -12 Td (b) Tj ET"
    runs = decode_stream(tokenize_stream(stream), FONTS, 792)
    assert runs[0][1] == (10, 92)
    assert runs[1][1] == (15, 104)


def test_decode_tj_before_tf():
    tokens = tokenize_stream(b"BT 0 0 Td (x) Tj ET")
    with pytest.raises(StreamError, match="no font selected"):
        decode_stream(tokens, {}, 792)


def test_decode_unresolved_font():
    tokens = tokenize_stream(b"BT /F9 12 Tf 0 0 Td (x) Tj ET")
    with pytest.raises(StreamError, match="/F9"):
        decode_stream(tokens, FONTS, 792)


def test_run_count_equals_tj_count():
    stream = b"BT /F1 10 Tf 10 700 Td (a) Tj (b) Tj (c) Tj ET"
    runs = decode_stream(tokenize_stream(stream), FONTS, 792)
    assert len(runs) == 3


def test_decode_deterministic():
    stream = b"BT /F1 10 Tf 10 700 Td 0.25 g (a) Tj 5 -12 Td (b) Tj ET"
    a = decode_stream(tokenize_stream(stream), FONTS, 792)
    b = decode_stream(tokenize_stream(stream), FONTS, 792)
    assert a == b


def test_unknown_operator_skipped_with_offset():
    stream = b"BT /F1 10 Tf 2 Tz 10 700 Td (a) Tj ET"
    with pytest.warns(UserWarning, match="unknown operator 'Tz'"):
        runs = decode_stream(tokenize_stream(stream), FONTS, 792)
    assert len(runs) == 1


def test_unexpected_byte_skipped():
    with pytest.warns(UserWarning, match="unexpected byte"):
        tokens = tokenize_stream(b"BT % ET")
    assert [t.lexeme for t in tokens] == ["BT", "ET"]


def _doc(blocks):
    return Document((Page(200, 200),), tuple(blocks))


def _run_at(x, y, text="t"):
    tokens = tokenize_stream(f"BT /F1 10 Tf {x} {200 - y} Td ({text}) Tj ET".encode())
    return decode_stream(tokens, FONTS, page_h=200)


def test_assign_containment():
    doc = _doc([Block("only", 0, BBox(0, 0, 100, 100), "paragraph")])
    out, unassigned = assign_runs_to_blocks(_run_at(50, 50), doc)
    assert unassigned == []
    assert out.blocks[0].text == "t"


def test_assign_tie_prefers_smaller_box():
    outer = Block("outer", 0, BBox(0, 0, 100, 100), "paragraph")
    inner = Block("inner", 0, BBox(25, 25, 75, 75), "paragraph")
    out, unassigned = assign_runs_to_blocks(_run_at(50, 50), _doc([outer, inner]))
    assert unassigned == []
    got = {b.id: b.text for b in out.blocks}
    assert got["inner"] == "t" and got["outer"] == ""


def test_assign_equal_area_tie_prefers_lower_id():
    b1 = Block("b2", 0, BBox(0, 0, 100, 100), "paragraph")
    b2 = Block("b1", 0, BBox(0, 0, 100, 100), "paragraph")
    out, _ = assign_runs_to_blocks(_run_at(50, 50), _doc([b1, b2]))
    got = {b.id: b.text for b in out.blocks}
    assert got["b1"] == "t" and got["b2"] == ""


def test_assign_outside_goes_to_unassigned():
    doc = _doc([Block("only", 0, BBox(0, 0, 50, 50), "paragraph")])
    out, unassigned = assign_runs_to_blocks(_run_at(150, 150), doc)
    assert out == doc
    assert len(unassigned) == 1

import numpy as np
import pytest
from hypothesis import given, strategies as st

from seqnet.errors import KindMismatchError, ParseError
from seqnet.sequence import (SYMBOL, VECTOR, Dataset, Element, Sequence, Span, dump_dataset,
                             element_distance, load_dataset, parse_string_dataset,
                             parse_timeseries_dataset)


class TestElements:
    def test_symbol_distance(self):
        assert element_distance(Element.symbol("a"), Element.symbol("a")) == 0.0
        assert element_distance(Element.symbol("a"), Element.symbol("b")) == 1.0

    def test_vector_distance(self):
        assert element_distance(Element.vector(0, 0), Element.vector(3, 4)) == 5.0

    def test_mixed_kinds_rejected(self):
        with pytest.raises(KindMismatchError):
            element_distance(Element.symbol("a"), Element.vector(1.0))
        with pytest.raises(KindMismatchError):
            element_distance(Element.vector(1.0), Element.vector(1.0, 2.0))

    @pytest.mark.parametrize("coords", [(), (1, 2, 3, 4), (float("nan"),)])
    def test_bad_vectors(self, coords):
        with pytest.raises(ValueError):
            Element.vector(*coords)


class TestSequence:
    def test_positions_are_one_based(self):
        s = Sequence.from_string("hello")
        assert s.element(1) == Element.symbol("h")
        assert s.sub(2, 4).text() == "ell"
        assert len(s.sub(3, 2)) == 0
        with pytest.raises(IndexError):
            s.element(0)
        with pytest.raises(IndexError):
            s.sub(0, 2)

    def test_data_is_read_only(self):
        s = Sequence.from_values([1.0, 2.0])
        with pytest.raises(ValueError):
            s.data[0, 0] = 5.0

    def test_equality_and_hash(self):
        a = Sequence.from_values([1, 2], id="x")
        b = Sequence.from_values([1.0, 2.0], id="x")
        assert a == b and hash(a) == hash(b)
        assert a != Sequence.from_values([1, 2], id="y")

    def test_iteration_yields_elements(self):
        s = Sequence.from_values([[1, 2], [3, 4]], dim=2)
        assert [e.value for e in s] == [(1.0, 2.0), (3.0, 4.0)]

    def test_validation(self):
        with pytest.raises(ValueError):
            Sequence("0", VECTOR, np.zeros((2, 4)))
        with pytest.raises(ValueError):
            Sequence("0", SYMBOL, np.zeros((2, 2)))
        with pytest.raises(ValueError):
            Sequence.from_values([1.0, float("inf")])

    def test_span(self):
        sp = Span("s", 2, 5)
        assert sp.length == 4
        assert sp.contains(Span("s", 3, 5))
        assert not sp.contains(Span("t", 3, 5))
        with pytest.raises(ValueError):
            Span("s", 0, 1)


class TestDataset:
    def test_mixed_kinds_rejected(self):
        with pytest.raises(KindMismatchError):
            Dataset.of([Sequence.from_string("ab", "0"), Sequence.from_values([1.0], "1")])

    def test_duplicate_ids_rejected(self):
        with pytest.raises(ValueError):
            Dataset.of([Sequence.from_string("ab", "0"), Sequence.from_string("cd", "0")])

    def test_lookup(self):
        ds = Dataset.of([Sequence.from_string("ab", "p")])
        assert ds["p"].text() == "ab"
        with pytest.raises(KeyError):
            ds["q"]


class TestParsing:
    def test_fasta(self):
        ds = parse_string_dataset(">s1 first\nAC\nGT\n\n>s2\nTT\n")
        assert [s.id for s in ds] == ["s1", "s2"]
        assert ds["s1"].text() == "ACGT"

    def test_plain_lines(self):
        ds = parse_string_dataset("abc\n\nde\n")
        assert [(s.id, s.text()) for s in ds] == [("0", "abc"), ("1", "de")]

    def test_fasta_data_before_header(self):
        with pytest.raises(ParseError) as exc:
            parse_string_dataset("AC\n>s1\nGT\n")
        assert exc.value.line == 1

    def test_control_character(self):
        with pytest.raises(ParseError) as exc:
            parse_string_dataset("ab\nc\x01d\n")
        assert exc.value.line == 2

    def test_timeseries(self):
        ds = parse_timeseries_dataset("a,1,2\na,3,4\nb,5,6\n", dims=2)
        assert [len(s) for s in ds] == [2, 1]
        assert ds["a"].data.tolist() == [[1, 2], [3, 4]]

    @pytest.mark.parametrize("text,line", [("a,1\na,x\n", 2), ("a,1,2\n", 1),
                                           ("a,1\nb,2\na,3\n", 3), ("a,nan\n", 1)])
    def test_timeseries_errors(self, text, line):
        with pytest.raises(ParseError) as exc:
            parse_timeseries_dataset(text, dims=1)
        assert exc.value.line == line

    def test_load_from_disk(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,1\na,2\n")
        assert len(load_dataset(p, "timeseries")["a"]) == 2
        with pytest.raises(ValueError):
            load_dataset(p, "xml")


names = st.text("abcxyz", min_size=1, max_size=4)


@given(st.lists(st.tuples(names, st.text("ACGTé", max_size=12)), max_size=5,
                unique_by=lambda t: t[0]))
def test_string_round_trip(items):
    ds = Dataset.of([Sequence.from_string(t, i) for i, t in items])
    back = parse_string_dataset(dump_dataset(ds))
    assert [(s.id, s.text()) for s in back] == [(s.id, s.text()) for s in ds]


@given(st.lists(st.tuples(names, st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=8)),
                max_size=4, unique_by=lambda t: t[0]))
def test_timeseries_round_trip(items):
    ds = Dataset(tuple(Sequence.from_values(np.array(v).reshape(-1, 2), i, 2) for i, v in
                       [(i, v[: len(v) // 2 * 2]) for i, v in items]), VECTOR, 2)
    back = parse_timeseries_dataset(dump_dataset(ds), 2)
    assert list(back) == list(ds)

import pytest

from qemine.corpus import (
    BuccCorpus,
    NLIRecord,
    QERecord,
    TatoebaSet,
    load_bucc,
    load_nli,
    load_parallel,
    load_qe,
    load_sts,
    load_tatoeba,
    save_bucc,
    save_nli,
    save_parallel,
    save_qe,
    save_sts,
    save_tatoeba,
)
from qemine.errors import AlignmentError, ConsistencyError, ParseError, RangeError


class TestRecordInvariants:
    def test_qe_rejects_out_of_range_score(self):
        with pytest.raises(ValueError):
            QERecord("a", "b", 1.5)

    def test_qe_rejects_blank_sides(self):
        with pytest.raises(ValueError):
            QERecord("  ", "b", 0.5)

    def test_nli_rejects_bad_label(self):
        with pytest.raises(ValueError):
            NLIRecord("p", "h", 3)

    def test_tatoeba_rejects_unequal_lengths(self):
        with pytest.raises(AlignmentError):
            TatoebaSet(("a", "b"), ("x",))

    def test_bucc_rejects_unknown_gold_id(self):
        with pytest.raises(ConsistencyError):
            BuccCorpus({"a-1": "x"}, {"b-1": "y"}, {("a-99", "b-1")})


class TestLoadQE:
    def test_loads_in_order(self, qe_file):
        records = load_qe(qe_file)
        assert len(records) == 3
        assert records[0] == QERecord("guten morgen", "good morning", 0.9)
        assert [r.score for r in records] == [0.9, 0.75, 0.5]

    def test_out_of_range_without_normalize(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("hello\thallo\t1.5\n", encoding="utf-8")
        with pytest.raises(RangeError) as err:
            load_qe(path)
        assert err.value.line == 1

    def test_normalize_min_max(self, tmp_path):
        path = tmp_path / "z.tsv"
        path.write_text("a\tb\t-2\nc\td\t0\ne\tf\t2\n", encoding="utf-8")
        records = load_qe(path, normalize=True)
        assert [r.score for r in records] == [0.0, 0.5, 1.0]

    def test_normalize_is_idempotent_on_spanning_file(self, tmp_path):
        path = tmp_path / "span.tsv"
        path.write_text("a\tb\t0.0\nc\td\t0.25\ne\tf\t1.0\n", encoding="utf-8")
        assert [r.score for r in load_qe(path, normalize=True)] == [0.0, 0.25, 1.0]

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "cols.tsv"
        path.write_text("only two\tcolumns\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_qe(path)
        assert err.value.line == 1

    def test_unparseable_score(self, tmp_path):
        path = tmp_path / "nan.tsv"
        path.write_text("a\tb\tok\nc\td\tnot-a-number\n", encoding="utf-8")
        path.write_text("a\tb\t0.5\nc\td\tbogus\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            load_qe(path)
        assert err.value.line == 2

    def test_missing_file_raises(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_qe(tmp_path / "absent.tsv")


class TestLoadSTS:
    @pytest.mark.parametrize("raw,expected", [(5.0, 1.0), (0.0, 0.0), (2.5, 0.5)])
    def test_divides_by_five(self, tmp_path, raw, expected):
        path = tmp_path / "sts.tsv"
        path.write_text(f"s one\ts two\t{raw}\n", encoding="utf-8")
        assert load_sts(path)[0].similarity == expected

    def test_rejects_score_above_five(self, tmp_path):
        path = tmp_path / "sts.tsv"
        path.write_text("a\tb\t5.5\n", encoding="utf-8")
        with pytest.raises(RangeError):
            load_sts(path)


class TestLoadNLI:
    def test_label_mapping(self, tmp_path):
        path = tmp_path / "nli.tsv"
        path.write_text(
            "p1\th1\tentailment\np2\th2\tCONTRADICTION\np3\th3\tNeutral\n",
            encoding="utf-8",
        )
        assert [r.label for r in load_nli(path)] == [0, 2, 1]

    def test_unknown_label(self, tmp_path):
        path = tmp_path / "nli.tsv"
        path.write_text("p\th\tmaybe\n", encoding="utf-8")
        with pytest.raises(ParseError, match="maybe"):
            load_nli(path)


class TestLoadTatoeba:
    def test_aligns_by_line(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("s1\ns2\ns3\ns4\ns5\n", encoding="utf-8")
        b.write_text("t1\nt2\nt3\nt4\nt5\n", encoding="utf-8")
        data = load_tatoeba(a, b)
        assert data.size == 5
        assert data.references[2] == "s3"
        assert data.hypotheses[2] == "t3"

    def test_unequal_counts(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("s1\ns2\ns3\ns4\ns5\n", encoding="utf-8")
        b.write_text("t1\nt2\nt3\nt4\n", encoding="utf-8")
        with pytest.raises(AlignmentError, match="5.*4"):
            load_tatoeba(a, b)

    def test_empty_files(self, tmp_path):
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        a.write_text("", encoding="utf-8")
        b.write_text("", encoding="utf-8")
        with pytest.raises(AlignmentError):
            load_tatoeba(a, b)


class TestLoadBucc:
    def _write(self, tmp_path, gold="a-1\tb-2\na-3\tb-1\n"):
        pa = tmp_path / "a.tsv"
        pb = tmp_path / "b.tsv"
        pg = tmp_path / "gold.tsv"
        pa.write_text("a-1\tsent one\na-2\tsent two\na-3\tsent three\n", encoding="utf-8")
        pb.write_text("b-1\tphrase one\nb-2\tphrase two\nb-3\tphrase three\n", encoding="utf-8")
        pg.write_text(gold, encoding="utf-8")
        return pa, pb, pg

    def test_loads_gold_links(self, tmp_path):
        corpus = load_bucc(*self._write(tmp_path))
        assert len(corpus.gold) == 2
        assert len(corpus.side_a) == 3

    def test_gold_with_unknown_id(self, tmp_path):
        with pytest.raises(ConsistencyError, match="a-99"):
            load_bucc(*self._write(tmp_path, gold="a-99\tb-1\n"))

    def test_duplicate_id(self, tmp_path):
        pa, pb, pg = self._write(tmp_path)
        pa.write_text("a-1\tone\na-1\tagain\n", encoding="utf-8")
        pg.write_text("", encoding="utf-8")
        with pytest.raises(ParseError, match="a-1"):
            load_bucc(pa, pb, pg)


class TestRoundTrips:
    """save -> load -> save must be byte-identical for every format."""

    def _assert_stable(self, tmp_path, save, load, first):
        p1 = tmp_path / "first"
        p2 = tmp_path / "second"
        save(first, p1)
        reloaded = load(p1)
        assert reloaded == first
        save(reloaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_qe(self, tmp_path, qe_file):
        records = load_qe(qe_file)
        self._assert_stable(tmp_path, save_qe, load_qe, records)

    def test_qe_awkward_floats(self, tmp_path):
        records = [QERecord("a b", "c d", 1.0 / 3.0), QERecord("e", "f", 0.1 + 0.2)]
        self._assert_stable(tmp_path, save_qe, load_qe, records)

    def test_sts(self, tmp_path):
        path = tmp_path / "sts.tsv"
        path.write_text("a\tb\t3.7\nc\td\t0.1\ne\tf\t5.0\n", encoding="utf-8")
        self._assert_stable(tmp_path, save_sts, load_sts, load_sts(path))

    def test_nli(self, tmp_path):
        records = [NLIRecord("p", "h", label) for label in (0, 1, 2)]
        self._assert_stable(tmp_path, save_nli, load_nli, records)

    def test_parallel(self, tmp_path):
        from qemine.corpus import ParallelSet

        parallel = ParallelSet((("src one", "tgt one"), ("src two", "tgt two")))
        self._assert_stable(tmp_path, save_parallel, load_parallel, parallel)

    def test_tatoeba(self, tmp_path):
        data = TatoebaSet(("s1", "s2"), ("t1", "t2"))
        first_a, first_b = tmp_path / "a1", tmp_path / "b1"
        save_tatoeba(data, first_a, first_b)
        reloaded = load_tatoeba(first_a, first_b)
        assert reloaded == data
        second_a, second_b = tmp_path / "a2", tmp_path / "b2"
        save_tatoeba(reloaded, second_a, second_b)
        assert first_a.read_bytes() == second_a.read_bytes()
        assert first_b.read_bytes() == second_b.read_bytes()

    def test_bucc(self, tmp_path):
        corpus = BuccCorpus(
            {"a-1": "one", "a-2": "two"},
            {"b-1": "uno", "b-2": "dos"},
            {("a-1", "b-2")},
        )
        paths1 = [tmp_path / n for n in ("a1", "b1", "g1")]
        paths2 = [tmp_path / n for n in ("a2", "b2", "g2")]
        save_bucc(corpus, *paths1)
        reloaded = load_bucc(*paths1)
        assert reloaded == corpus
        save_bucc(reloaded, *paths2)
        for p1, p2 in zip(paths1, paths2):
            assert p1.read_bytes() == p2.read_bytes()

    def test_loading_is_pure(self, qe_file):
        assert load_qe(qe_file) == load_qe(qe_file)

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yieldseq import datapipe as dp
from yieldseq.datapipe import CSV_COLUMNS, EBIT_INDEX, FEATURES, Period, QuarterlyRecord

HEADER = ",".join(CSV_COLUMNS)


def record(cid, idx, ev=100.0, cap=50.0, sector="Industrials", values=None, rng=None):
    if values is None:
        rng = rng or np.random.default_rng(idx)
        values = tuple(float(v) for v in rng.uniform(1, 60, len(FEATURES)))
    return QuarterlyRecord(cid, sector, Period.from_index(idx), cap, ev, tuple(values))


def history(cid, indices, **kw):
    return [record(cid, i, **kw) for i in indices]


class TestPeriod:
    def test_parse_and_format(self):
        p = Period.parse("1996-Q3")
        assert p == Period(1996, 3) and str(p) == "1996-Q3"

    def test_successor(self):
        assert Period(1996, 4).next() == Period(1997, 1)
        assert Period(1996, 2).next() == Period(1996, 3)
        assert Period(1996, 4).next().index == Period(1996, 4).index + 1

    @pytest.mark.parametrize("bad", ["1996Q3", "1996-Q5", "1996-Q0", "abcd-Q1", "1996-q1"])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            Period.parse(bad)


class TestIngest:
    def write(self, tmp_path, *rows, header=HEADER):
        path = tmp_path / "in.csv"
        path.write_text("\n".join([header, *rows]) + "\n")
        return path

    def row(self, cid="A", period="2000-Q1", ev="100", cap="80", sector="Industrials", vals=None):
        vals = vals or [str(1.5 * (i + 1)) for i in range(14)]
        return ",".join([cid, sector, period, cap, ev, *vals])

    def test_empty_body(self, tmp_path):
        res = dp.ingest_csv(self.write(tmp_path))
        assert res.records == [] and res.rejected == 0

    def test_zero_ev_rejected(self, tmp_path):
        res = dp.ingest_csv(self.write(tmp_path, self.row(ev="0"), self.row(period="2000-Q2")))
        assert len(res.records) == 1
        assert res.rejections == {"zero_ev": 1}

    def test_three_row_fixture_is_bit_exact(self, tmp_path):
        vals = ["0.1", "1e-3", "123456789.125", "-0.3", "2.5", "7", "8", "9", "10", "11", "12", "13",
                "14", "15.000000000000002"]
        rows = [self.row(cid="X", period=f"2001-Q{q}", ev="3.3", cap="2.2", vals=vals) for q in (1, 2, 3)]
        res = dp.ingest_csv(self.write(tmp_path, *rows))
        assert len(res.records) == 3 and res.rejected == 0
        for r in res.records:
            assert r.fundamentals == tuple(float(v) for v in vals)
            assert r.ev == 3.3 and r.market_cap == 2.2 and r.sector == "Industrials"
        assert [r.period for r in res.records] == [Period(2001, 1), Period(2001, 2), Period(2001, 3)]

    def test_bad_rows_counted_by_reason(self, tmp_path):
        bad_num = self.row(vals=["x"] + ["1"] * 13)
        missing = self.row(cap="")
        short = "A,Industrials,2000-Q3,1,2"
        bad_period = self.row(period="2000-Q7")
        dup = self.row()
        res = dp.ingest_csv(self.write(tmp_path, self.row(), bad_num, missing, short, bad_period, dup))
        assert len(res.records) == 1
        assert res.rejections == {"non_numeric": 1, "missing_field": 1, "column_count": 1,
                                  "bad_period": 1, "duplicate_period": 1}

    def test_bad_header_reports_column(self, tmp_path):
        header = HEADER.replace("ev,", "enterprise_value,")
        with pytest.raises(dp.IngestError, match=r":1:5: expected column 'ev'"):
            dp.ingest_csv(self.write(tmp_path, header=header))

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(dp.IngestError, match="cannot read"):
            dp.ingest_csv(tmp_path / "missing.csv")

    def test_write_then_read_round_trip(self, tmp_path):
        recs = history("A", range(8000, 8010)) + history("B", range(8000, 8003), sector="Energy")
        dp.write_csv(recs, tmp_path / "rt.csv")
        assert dp.ingest_csv(tmp_path / "rt.csv").records == recs


class TestFilterUniverse:
    def test_top_n_larger_than_universe(self):
        recs = history("A", [1, 2]) + history("B", [1], sector="Financials") + history("C", [1])
        kept = dp.filter_universe(recs, 100)
        assert {r.company_id for r in kept} == {"A", "C"}

    def test_exclude_sector(self):
        recs = history("A", [1], sector="Energy") + history("B", [1], sector="Financials")
        assert {r.company_id for r in dp.filter_universe(recs, 10, {"financials"})} == {"A"}

    def test_top_three_by_latest_cap(self):
        caps = {"A": 5.0, "B": 50.0, "C": 20.0, "D": 40.0, "E": 10.0}
        recs = []
        for cid, cap in caps.items():
            recs.append(record(cid, 1, cap=1000.0 - cap))  # older quarter, opposite order
            recs.append(record(cid, 2, cap=cap))
        kept = {r.company_id for r in dp.filter_universe(recs, 3, ())}
        assert kept == set(sorted(caps, key=caps.get, reverse=True)[:3]) == {"B", "C", "D"}


class TestEvNormalize:
    def test_revenue_ratio(self):
        r = record("A", 1, ev=100.0, values=(58.0,) + (1.0,) * 13)
        assert dp.ev_normalize(r)[0] == 0.58

    def test_zero_fundamentals(self):
        assert not dp.ev_normalize(record("A", 1, values=(0.0,) * 14)).any()

    def test_scale_invariant(self):
        r = record("A", 1, ev=37.0)
        s = QuarterlyRecord("A", r.sector, r.period, r.market_cap * 8, r.ev * 8,
                            tuple(v * 8 for v in r.fundamentals))
        np.testing.assert_array_equal(dp.ev_normalize(r), dp.ev_normalize(s))

    def test_record_rejects_zero_ev(self):
        with pytest.raises(ValueError):
            record("A", 1, ev=0.0)


class TestBuildWindows:
    def test_nine_quarters(self):
        samples = dp.build_windows(history("A", range(100, 109)))
        assert len(samples) == 1
        s = samples[0]
        assert s.window.shape == (8, 14)
        assert s.start == Period.from_index(100) and s.target_period == Period.from_index(108)

    def test_twelve_quarters(self):
        recs = history("A", range(100, 112))
        samples = dp.build_windows(recs)
        assert len(samples) == 4
        for j, s in enumerate(samples):
            nxt = recs[j + 8]
            assert s.target == nxt.fundamentals[EBIT_INDEX] / nxt.ev
            np.testing.assert_array_equal(s.window[0], dp.ev_normalize(recs[j]))

    def test_gap_breaks_windows(self):
        recs = history("A", list(range(100, 105)) + list(range(106, 110)))
        assert dp.build_windows(recs) == []

    def test_order_of_input_irrelevant(self):
        recs = history("A", range(100, 112)) + history("B", range(50, 60))
        a = dp.build_windows(recs)
        b = dp.build_windows(list(reversed(recs)))
        assert [(s.company_id, s.start) for s in a] == [(s.company_id, s.start) for s in b]

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.lists(st.booleans(), min_size=0, max_size=40), min_size=1, max_size=4))
    def test_count_and_consecutiveness(self, patterns):
        recs, expected = [], 0
        for c, present in enumerate(patterns):
            idx = [1000 + i for i, p in enumerate(present) if p]
            recs += history(f"C{c}", idx)
            run = 0
            for p in present + [False]:
                if p:
                    run += 1
                else:
                    expected += max(0, run - 8)
                    run = 0
        samples = dp.build_windows(recs)
        assert len(samples) == expected
        by_key = {(r.company_id, r.period): r for r in recs}
        for s in samples:
            periods = s.periods + [s.target_period]
            assert [p.index for p in periods] == list(range(s.start.index, s.start.index + 9))
            assert all((s.company_id, p) in by_key for p in periods)
            nxt = by_key[(s.company_id, s.target_period)]
            assert s.target == nxt.fundamentals[EBIT_INDEX] / nxt.ev


def test_ev_scale_invariance_of_samples():
    rng = np.random.default_rng(3)
    recs = history("A", range(40, 52), rng=rng) + history("B", range(40, 52))
    lam = 1000.0
    scaled = [QuarterlyRecord(r.company_id, r.sector, r.period, r.market_cap * lam, r.ev * lam,
                              tuple(v * lam for v in r.fundamentals)) if r.company_id == "A" else r
              for r in recs]
    base, other = dp.build_windows(recs), dp.build_windows(scaled)
    assert len(base) == len(other)
    for a, b in zip(base, other):
        assert np.all(np.abs(a.window - b.window) <= 1e-12 * np.abs(a.window))
        assert abs(a.target - b.target) <= 1e-12 * abs(a.target)


class TestLatestWindows:
    def test_latest_and_omitted(self):
        recs = history("A", range(10, 30)) + history("B", range(10, 15)) + \
            history("C", list(range(10, 20)) + list(range(21, 25)))
        windows, omitted = dp.latest_windows(recs)
        assert set(windows) == {"A"} and omitted == ["B", "C"]
        np.testing.assert_array_equal(windows["A"][-1], dp.ev_normalize(recs[19]))


class TestScaler:
    def test_hand_statistics(self):
        X = np.zeros((3, 1, 14))
        X[:, 0, 0] = [2.0, 4.0, 6.0]
        sc = dp.zscore_fit(X)
        assert sc.mean[0] == 4.0
        assert sc.std[0] == pytest.approx(np.sqrt(8 / 3), abs=1e-15)
        assert sc.std[0] == pytest.approx(1.63299, abs=1e-5)
        out = dp.zscore_apply(sc, X)[:, 0, 0]
        np.testing.assert_allclose(out, [-1.2247449, 0.0, 1.2247449], atol=1e-7)

    def test_constant_feature(self):
        X = np.full((5, 8, 14), 3.25)
        sc = dp.zscore_fit(X)
        np.testing.assert_array_equal(sc.std, 1.0)
        assert not dp.zscore_apply(sc, X).any()

    def test_value_at_mean_maps_to_zero(self):
        sc = dp.zscore_fit(np.random.default_rng(0).normal(size=(10, 8, 14)))
        assert not dp.zscore_apply(sc, sc.mean[None, None, :]).any()

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            dp.zscore_fit(np.zeros((0, 8, 14)))

    def test_targets_untouched(self):
        samples = dp.build_windows(history("A", range(0, 12)))
        scaled = dp.zscore_apply(dp.zscore_fit(samples), samples)
        assert [s.target for s in scaled] == [s.target for s in samples]

    def test_fit_apply_statistics_and_round_trip(self):
        rng = np.random.default_rng(9)
        X = rng.normal(loc=rng.uniform(-5, 5, 14), scale=rng.uniform(0.01, 30, 14), size=(400, 8, 14))
        sc = dp.zscore_fit(X)
        Z = dp.zscore_apply(sc, X).reshape(-1, 14)
        assert np.all(np.abs(Z.mean(axis=0)) < 1e-9)
        assert np.all(np.abs(Z.std(axis=0) - 1) < 1e-6)
        np.testing.assert_allclose(sc.inverse_transform(dp.zscore_apply(sc, X)), X, rtol=0, atol=1e-9)

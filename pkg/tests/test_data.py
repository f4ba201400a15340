import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chronocast.data import (
    CSV_HEADER,
    FEATURE_COLUMNS,
    FeatureMatrix,
    TimeSeriesFrame,
    apply_scale,
    calendar_features,
    engineer_features,
    fit_minmax,
    impute_linear,
    invert_scale,
    load_csv,
    make_windows,
    read_feature_csv,
    temporal_split,
    write_csv,
    write_feature_csv,
)
from chronocast.errors import (
    ImputationError,
    InsufficientDataError,
    ParseError,
    RegistryError,
    SchemaError,
)


def _frame(n, start="2017-01-01T00", seed=0, consumption=None):
    rng = np.random.default_rng(seed)
    stamps = (np.datetime64(start, "h") + np.arange(n)).astype("datetime64[s]")
    cons = np.arange(n, dtype=float) + 300 if consumption is None else np.asarray(consumption, float)
    return TimeSeriesFrame(stamps, cons, rng.uniform(5, 38, n), rng.uniform(30, 90, n), rng.uniform(0, 12, n))


def _write(tmp_path, lines, header=",".join(CSV_HEADER)):
    path = tmp_path / "in.csv"
    path.write_text("\n".join([header] + lines) + "\n")
    return path


# ---------------------------------------------------------------- load_csv

def test_load_well_formed(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T00:00:00Z,300,20,60,4",
        "2017-01-01T01:00:00Z,310,21,61,5",
        "2017-01-01T02:00:00Z,320,22,62,6",
    ])
    frame = load_csv(path)
    assert len(frame) == 3
    np.testing.assert_array_equal(frame.consumption, [300, 310, 320])
    assert frame.missing_count() == 0


def test_load_fills_hour_gap(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T00:00:00Z,300,20,60,4",
        "2017-01-01T01:00:00Z,310,21,61,5",
        "2017-01-01T03:00:00Z,330,23,63,7",
    ])
    frame = load_csv(path)
    assert len(frame) == 4
    assert np.isnan(frame.consumption[2]) and np.isnan(frame.wind_speed[2])
    assert frame.timestamps[2] == np.datetime64("2017-01-01T02:00:00")


def test_load_sorts_rows(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T01:00:00Z,310,21,61,5",
        "2017-01-01T00:00:00Z,300,20,60,4",
    ])
    np.testing.assert_array_equal(load_csv(path).consumption, [300, 310])


def test_load_empty_field_is_missing(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T00:00:00Z,300,20,60,4",
        "2017-01-01T01:00:00Z,,21,61,5",
        "2017-01-01T02:00:00Z,320,22,62,6",
    ])
    assert np.isnan(load_csv(path).consumption[1])


def test_load_missing_column_named(tmp_path):
    path = _write(tmp_path, ["2017-01-01T00:00:00Z,300,20,4"],
                  header="timestamp,consumption_kwh,temperature_c,wind_speed_ms")
    with pytest.raises(SchemaError, match="humidity_pct"):
        load_csv(path)


def test_load_malformed_row_reports_line(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T00:00:00Z,300,20,60,4",
        "2017-01-01T01:00:00Z,abc,21,61,5",
    ])
    with pytest.raises(ParseError) as info:
        load_csv(path)
    assert info.value.line == 3


def test_load_rejects_duplicates(tmp_path):
    path = _write(tmp_path, [
        "2017-01-01T00:00:00Z,300,20,60,4",
        "2017-01-01T00:00:00Z,301,20,60,4",
    ])
    with pytest.raises(SchemaError, match="duplicate"):
        load_csv(path)


def test_csv_round_trip(tmp_path):
    frame = _frame(30)
    write_csv(frame, tmp_path / "x.csv", decimals=6)
    back = load_csv(tmp_path / "x.csv")
    np.testing.assert_array_equal(back.timestamps, frame.timestamps)
    np.testing.assert_allclose(back.temperature, frame.temperature, atol=1e-6)


# ---------------------------------------------------------------- impute

def _one_column(values):
    values = np.asarray(values, dtype=float)
    n = len(values)
    stamps = (np.datetime64("2017-01-01T00", "h") + np.arange(n)).astype("datetime64[s]")
    ones = np.ones(n)
    return TimeSeriesFrame(stamps, values, ones, ones, ones)


def test_impute_midpoint():
    out = impute_linear(_one_column([10, np.nan, 14]))
    np.testing.assert_array_equal(out.consumption, [10, 12, 14])


def test_impute_equal_thirds():
    out = impute_linear(_one_column([10, np.nan, np.nan, 16]))
    np.testing.assert_allclose(out.consumption, [10, 12, 14, 16], rtol=0, atol=1e-12)


def test_impute_identity_without_gaps():
    frame = _one_column([1.0, 2.0, 5.0])
    out = impute_linear(frame)
    np.testing.assert_array_equal(out.consumption, frame.consumption)


@pytest.mark.parametrize("values", [[np.nan, 1, 2], [1, 2, np.nan]])
def test_impute_edge_gap_names_column(values):
    with pytest.raises(ImputationError, match="consumption"):
        impute_linear(_one_column(values))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.one_of(st.none(), st.floats(-1e3, 1e3)), min_size=3, max_size=40))
def test_impute_properties(raw):
    values = [math.nan if v is None else v for v in raw]
    values[0] = 0.0 if math.isnan(values[0]) else values[0]
    values[-1] = 1.0 if math.isnan(values[-1]) else values[-1]
    col = np.array(values)
    out = impute_linear(_one_column(col)).consumption
    observed = ~np.isnan(col)
    np.testing.assert_array_equal(out[observed], col[observed])
    idx = np.arange(len(col))
    obs_idx = idx[observed]
    for i in idx[~observed]:
        lo = col[obs_idx[obs_idx < i].max()]
        hi = col[obs_idx[obs_idx > i].min()]
        assert min(lo, hi) - 1e-9 <= out[i] <= max(lo, hi) + 1e-9


# ---------------------------------------------------------------- features

def test_calendar_monday_zero():
    ts = np.array(["2017-06-05T14:00:00"], dtype="datetime64[s]")
    hod, dow, moy = calendar_features(ts)
    assert (hod[0], dow[0], moy[0]) == (14, 0, 6)


def test_calendar_matches_python_datetime():
    ts = (np.datetime64("2016-12-25T00", "h") + np.arange(0, 24 * 400, 7)).astype("datetime64[s]")
    hod, dow, moy = calendar_features(ts)
    for t, h, d, m in zip(ts[:200], hod, dow, moy):
        dt = t.astype(object)
        assert (h, d, m) == (dt.hour, dt.weekday(), dt.month)


def test_lags_follow_definition():
    frame = _frame(400, consumption=np.random.default_rng(1).uniform(150, 520, 400))
    fm = engineer_features(frame)
    assert len(fm) == 400 - 168
    cons = frame.consumption
    # raw row 200 appears as lag_24 at raw row 224
    assert fm.column("lag_24")[224 - 168] == cons[200]
    for k in (1, 24, 168):
        np.testing.assert_array_equal(fm.column(f"lag_{k}"), cons[168 - k:400 - k])
    np.testing.assert_array_equal(fm.column("consumption"), cons[168:])


def test_features_boundary():
    assert len(engineer_features(_frame(169))) == 1
    with pytest.raises(InsufficientDataError):
        engineer_features(_frame(168))


def test_feature_registry_order():
    assert engineer_features(_frame(200)).columns == FEATURE_COLUMNS


def test_feature_csv_round_trip(tmp_path):
    fm = engineer_features(_frame(200))
    write_feature_csv(fm, tmp_path / "f.csv")
    back = read_feature_csv(tmp_path / "f.csv")
    assert back.columns == fm.columns
    np.testing.assert_array_equal(back.values, fm.values)
    np.testing.assert_array_equal(back.timestamps, fm.timestamps)


# ---------------------------------------------------------------- split

@pytest.mark.parametrize("n,sizes", [(1000, (700, 150, 150)), (10, (7, 1, 2)), (26112, (18278, 3916, 3918))])
def test_split_sizes(n, sizes):
    assert temporal_split(n).sizes() == sizes


def test_split_empty_raises():
    with pytest.raises(InsufficientDataError):
        temporal_split(3)


@given(st.integers(7, 5000))
def test_split_partition_and_order(n):
    s = temporal_split(n)
    assert s.train.start == 0 and s.train.stop == s.validation.start
    assert s.validation.stop == s.test.start and s.test.stop == n
    tr, va, _ = s.sizes()
    assert tr == math.floor(0.7 * n + 1e-9) and va == math.floor(0.15 * n + 1e-9)


# ---------------------------------------------------------------- scaling

def _matrix(values):
    values = np.asarray(values, dtype=float)
    stamps = (np.datetime64("2017-01-01T00", "h") + np.arange(len(values))).astype("datetime64[s]")
    return FeatureMatrix(stamps, values, tuple(f"c{j}" for j in range(values.shape[1])))


def test_fit_minmax_table_range():
    m = _matrix([[150.0], [520.0], [999.0]])
    p = fit_minmax(m, range(0, 2))
    assert (p.mins[0], p.maxs[0]) == (150.0, 520.0)
    scaled = apply_scale(m, p).values[:, 0]
    assert scaled[0] == 0.0 and scaled[1] == 1.0


def test_out_of_range_not_clipped():
    m = _matrix([[150.0], [520.0], [613.0]])
    p = fit_minmax(m, range(0, 2))
    assert apply_scale(m, p).values[2, 0] == pytest.approx((613 - 150) / 370)
    assert apply_scale(m, p).values[2, 0] == pytest.approx(1.2514, abs=1e-4)


def test_degenerate_and_single_row():
    m = _matrix([[5.0, 1.0], [5.0, 2.0]])
    p = fit_minmax(m, range(0, 2))
    assert p.degenerate.tolist() == [True, False]
    np.testing.assert_array_equal(apply_scale(m, p).values[:, 0], [0.0, 0.0])
    single = fit_minmax(m, range(1, 2))
    assert np.all(single.mins == single.maxs)


def test_registry_errors():
    m = _matrix([[1.0], [2.0]])
    p = fit_minmax(m, range(0, 2))
    with pytest.raises(RegistryError):
        invert_scale([0.5], p, "nope")
    other = FeatureMatrix(m.timestamps, m.values, ("x",))
    with pytest.raises(RegistryError):
        apply_scale(other, p)


def test_scaler_json_round_trip():
    m = _matrix(np.random.default_rng(0).normal(size=(20, 3)))
    p = fit_minmax(m, range(0, 14))
    q = type(p).from_json(p.to_json())
    assert q.columns == p.columns
    np.testing.assert_array_equal(q.mins, p.mins)
    np.testing.assert_array_equal(q.maxs, p.maxs)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 60), st.integers(1, 6))
def test_scale_round_trip(seed, n, f):
    rng = np.random.default_rng(seed)
    values = rng.uniform(-1e3, 1e3, size=(n, f)) * rng.uniform(0.01, 10, size=f)
    m = _matrix(values)
    p = fit_minmax(m, range(0, n))
    scaled = apply_scale(m, p)
    for j, col in enumerate(m.columns):
        if not p.degenerate[j]:
            back = invert_scale(scaled.values[:, j], p, col)
            np.testing.assert_allclose(back, values[:, j], rtol=0, atol=1e-12 * max(1.0, np.abs(values[:, j]).max()))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_scaler_ignores_later_rows(seed):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(50, 3))
    other = base.copy()
    other[35:] = rng.normal(scale=100, size=(15, 3))
    a = fit_minmax(_matrix(base), range(0, 35))
    b = fit_minmax(_matrix(other), range(0, 35))
    np.testing.assert_array_equal(a.mins, b.mins)
    np.testing.assert_array_equal(a.maxs, b.maxs)


# ---------------------------------------------------------------- windows

def test_window_counts():
    fm = engineer_features(_frame(168 + 200))
    assert len(make_windows(fm, range(0, 150))) == 126
    ws = make_windows(fm, range(10, 35))
    assert len(ws) == 1
    assert ws.targets[0] == fm.column("consumption")[10 + 24]
    with pytest.raises(InsufficientDataError):
        make_windows(fm, range(0, 24))


def test_window_alignment_and_reconstruction():
    fm = engineer_features(_frame(168 + 300, consumption=np.random.default_rng(3).uniform(150, 520, 468)))
    split = range(40, 260)
    ws = make_windows(fm, split)
    j = fm.index("consumption")
    cons = fm.column("consumption")
    assert len(ws) == len(split) - 24
    np.testing.assert_array_equal(ws.targets, cons[split.start + 24:split.stop])
    # last input row is the hour before the target
    np.testing.assert_array_equal(ws.inputs[:, 23, j], cons[split.start + 23:split.stop - 1])
    np.testing.assert_array_equal(ws.target_timestamps - ws.target_timestamps[0],
                                  fm.timestamps[split.start + 24:split.stop] - fm.timestamps[split.start + 24])
    for i in (0, 17, len(ws) - 1):
        np.testing.assert_array_equal(ws.inputs[i], fm.values[split.start + i:split.start + i + 24])

import numpy as np
import pytest

from causalts import Dataset, ShapeCluster, TimeSeries, assign_factor, encode_dataset
from causalts.encode import assign_snippets, temporal_precedence
from causalts.errors import LengthMismatch, MissingSnippets
from causalts.series import Subsequence, znormalize
from causalts.snippets import Snippet

from conftest import sawtooth_wave, sine_wave, square_wave, two_regime_series


def cluster(fid, centroid):
    return ShapeCluster(factor_id=fid, centroid=znormalize(centroid), members=())


def snippet(values, sid, rank=1, start=1):
    sub = Subsequence(source=sid, start=start, values=np.asarray(values, float))
    return Snippet(subsequence=sub, coverage=1.0, rank=rank)


THREE_CLUSTERS = [
    cluster(0, sine_wave(16, 16)),
    cluster(1, square_wave(16, 16)),
    cluster(2, sawtooth_wave(16, 16)),
]


# -- assign_factor -----------------------------------------------------------


def test_assign_exact_centroid_match():
    sn = snippet(sawtooth_wave(16, 16), "s")
    assert assign_factor(sn, THREE_CLUSTERS) == 2


def test_assign_tie_goes_to_lower_id():
    same = sine_wave(16, 16)
    clusters = [cluster(0, same), cluster(1, same.copy())]
    sn = snippet(np.roll(same, 5), "s")
    assert assign_factor(sn, clusters) == 0


def test_assign_noisy_copy():
    rng = np.random.default_rng(0)
    for trial in range(10):
        vals = square_wave(16, 16) + rng.normal(0, 0.1, 16)
        assert assign_factor(snippet(vals, f"s{trial}"), THREE_CLUSTERS) == 1


def test_assign_length_mismatch():
    sn = snippet(sine_wave(8, 8), "s")
    with pytest.raises(LengthMismatch):
        assign_factor(sn, THREE_CLUSTERS)


def test_assign_shift_invariant():
    rng = np.random.default_rng(1)
    for shift in range(0, 16, 3):
        vals = np.roll(sine_wave(16, 16), shift) + rng.normal(0, 0.05, 16)
        assert assign_factor(snippet(vals, "s"), THREE_CLUSTERS) == 0


# -- encode_dataset ----------------------------------------------------------


def _simple_dataset(labels=(0, 1)):
    series = []
    snips = {}
    shapes = [sine_wave(16, 16), square_wave(16, 16)]
    for i, lab in enumerate(labels):
        sid = f"s{i}"
        vals = np.tile(shapes[i % 2], 4)
        series.append(TimeSeries(values=vals, label=lab, id=sid))
        snips[sid] = [snippet(shapes[i % 2], sid, rank=1)]
    return Dataset(series=tuple(series)), snips


def test_encode_single_factor_membership():
    sid = "s0"
    vals = np.tile(square_wave(16, 16), 4)
    ds = Dataset(series=(TimeSeries(values=vals, id=sid),))
    snips = {sid: [snippet(square_wave(16, 16), sid, rank=r) for r in range(1, 6)]}
    matrix = encode_dataset(ds, snips, THREE_CLUSTERS)
    np.testing.assert_array_equal(matrix.bits, [[0, 1, 0]])
    assert matrix.labels is None
    assert matrix.label_node is None


def test_encode_two_regime_series_sets_both_bits():
    rng = np.random.default_rng(2)
    vals = two_regime_series(rng, n=400, period=25)
    ds = Dataset(series=(TimeSeries(values=vals, id="tr"),))
    clusters = [cluster(0, sine_wave(25, 25)), cluster(1, square_wave(25, 25))]
    snips = {
        "tr": [
            snippet(vals[0:25], "tr", rank=1, start=1),
            snippet(vals[225:250], "tr", rank=2, start=226),
        ]
    }
    matrix = encode_dataset(ds, snips, clusters)
    np.testing.assert_array_equal(matrix.bits, [[1, 1]])


def test_encode_labels_remapped_sorted():
    ds, snips = _simple_dataset(labels=(7, 3, 7))
    matrix = encode_dataset(ds, snips, THREE_CLUSTERS)
    np.testing.assert_array_equal(matrix.labels, [1, 0, 1])
    assert matrix.class_count == 2
    assert matrix.label_node == 3
    assert matrix.node_count == 4


def test_encode_missing_snippets():
    ds, snips = _simple_dataset()
    del snips["s1"]
    with pytest.raises(MissingSnippets, match="s1"):
        encode_dataset(ds, snips, THREE_CLUSTERS)


def test_encode_rank_order_irrelevant():
    sid = "s0"
    ds = Dataset(series=(TimeSeries(values=np.tile(sine_wave(16, 16), 4), id=sid),))
    a = snippet(sine_wave(16, 16), sid, rank=1)
    b = snippet(square_wave(16, 16), sid, rank=2)
    fwd = encode_dataset(ds, {sid: [a, b]}, THREE_CLUSTERS)
    rev = encode_dataset(ds, {sid: [b, a]}, THREE_CLUSTERS)
    np.testing.assert_array_equal(fwd.bits, rev.bits)


def test_encode_every_row_has_a_bit():
    rng = np.random.default_rng(3)
    series = []
    snips = {}
    for i in range(12):
        sid = f"s{i}"
        vals = rng.normal(size=64)
        series.append(TimeSeries(values=vals, id=sid))
        snips[sid] = [snippet(vals[0:16], sid, rank=1)]
    matrix = encode_dataset(Dataset(series=tuple(series)), snips, THREE_CLUSTERS)
    assert (matrix.bits.sum(axis=1) >= 1).all()


def test_encode_precomputed_assignments_respected():
    ds, snips = _simple_dataset()
    assignments = assign_snippets(snips, THREE_CLUSTERS)
    direct = encode_dataset(ds, snips, THREE_CLUSTERS)
    via = encode_dataset(ds, snips, THREE_CLUSTERS, assignments)
    np.testing.assert_array_equal(direct.bits, via.bits)


# -- temporal precedence -----------------------------------------------------


def _precedence_fixture(orders):
    """Build a tiny dataset where factor starts follow ``orders``.

    Each entry of ``orders`` maps factor id to a 1-based earliest start
    for one series; the snippet windows themselves are filler.
    """
    series = []
    snips = {}
    assignments = {}
    for i, order in enumerate(orders):
        sid = f"s{i}"
        series.append(
            TimeSeries(values=np.tile(sine_wave(16, 16), 20), id=sid)
        )
        sn_list = []
        fids = []
        for fid, start in order.items():
            sn_list.append(snippet(sine_wave(16, 16), sid, rank=len(fids) + 1, start=start))
            fids.append(fid)
        snips[sid] = sn_list
        assignments[sid] = tuple(fids)
    return Dataset(series=tuple(series)), snips, assignments


def test_precedence_strict_ordering():
    orders = [{0: 1, 1: 101} for _ in range(10)]
    ds, snips, assignments = _precedence_fixture(orders)
    prec = temporal_precedence(ds, snips, assignments, 2)
    assert prec.after_frac(1, 0) == 1.0
    assert prec.after_frac(0, 1) == 0.0


def test_precedence_never_cooccurring():
    orders = [{0: 1}, {1: 1}, {0: 17}, {1: 33}]
    ds, snips, assignments = _precedence_fixture(orders)
    prec = temporal_precedence(ds, snips, assignments, 2)
    assert prec.after_frac(0, 1) == 0.0
    assert prec.after_frac(1, 0) == 0.0


def test_precedence_fractional():
    orders = [{0: 101, 1: 1} for _ in range(9)]
    orders.append({0: 1, 1: 101})
    ds, snips, assignments = _precedence_fixture(orders)
    prec = temporal_precedence(ds, snips, assignments, 2)
    assert prec.after_frac(0, 1) == pytest.approx(0.9)
    assert prec.after_frac(1, 0) == pytest.approx(0.1)


def test_precedence_uses_earliest_start_per_factor():
    # Factor 0 shows up late at rank 1 but earlier at rank 2; the earliest
    # occurrence (position 5) is what counts against factor 1's start 50.
    sid = "s0"
    ds = Dataset(series=(TimeSeries(values=np.tile(sine_wave(16, 16), 20), id=sid),))
    snips = {
        sid: [
            snippet(sine_wave(16, 16), sid, rank=1, start=120),
            snippet(sine_wave(16, 16), sid, rank=2, start=5),
            snippet(sine_wave(16, 16), sid, rank=3, start=50),
        ]
    }
    assignments = {sid: (0, 0, 1)}
    prec = temporal_precedence(ds, snips, assignments, 2)
    assert prec.after_frac(1, 0) == 1.0
    assert prec.after_frac(0, 1) == 0.0


def test_precedence_ties_count_neither():
    orders = [{0: 7, 1: 7} for _ in range(4)]
    ds, snips, assignments = _precedence_fixture(orders)
    prec = temporal_precedence(ds, snips, assignments, 2)
    assert prec.after_frac(0, 1) == 0.0
    assert prec.after_frac(1, 0) == 0.0


def test_precedence_complement_bounded():
    rng = np.random.default_rng(4)
    orders = []
    for _ in range(30):
        order = {}
        for fid in range(3):
            if rng.random() < 0.7:
                order[fid] = int(rng.integers(1, 200))
        if not order:
            order[0] = 1
        orders.append(order)
    ds, snips, assignments = _precedence_fixture(orders)
    prec = temporal_precedence(ds, snips, assignments, 3)
    for x in range(3):
        for y in range(3):
            if x != y:
                assert prec.after_frac(x, y) + prec.after_frac(y, x) <= 1.0 + 1e-12

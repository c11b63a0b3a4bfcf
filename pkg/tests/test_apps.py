"""End-of-pipeline applications: building structures, masked
representations, classification, pruning and the factor ratio."""

import numpy as np
import pytest

from causalts import (
    Dataset,
    Representation,
    RunConfig,
    TimeSeries,
    accuracy,
    build_structure,
    cir,
    classify_knn,
    macro_f1,
    prune_dataset,
    represent,
    sweep_parameters,
)
from causalts.apps import masked_distance, series_factors
from causalts.errors import NoLabel, NoOverlap, PipelineError
from conftest import (
    TEMPLATES,
    early_late_dataset,
    make_structure,
    random_dataset_for,
    random_structure,
    segment_series,
)
from oracles import brute_masked_distance, brute_prune_keep


def strip_labels(dataset):
    return Dataset(
        series=tuple(
            TimeSeries(values=s.values, label=None, id=s.id) for s in dataset
        )
    )


def tiled_series(shape, m, tiles, rng, noise=0.03, sid="t"):
    vals = np.tile(TEMPLATES[shape](m, m), tiles) + rng.normal(0, noise, m * tiles)
    return TimeSeries(values=vals, id=sid)


class TestBuildStructure:
    CFG = RunConfig(seed=0, n_clusters=3, k_snippets=2)

    def test_planted_label_edge_usually_found(self):
        hits = 0
        for seed in range(5):
            ds = early_late_dataset(seed=70 + seed)
            structure = build_structure(ds, RunConfig(seed=seed, n_clusters=3, k_snippets=2))
            if cir(structure) > 0:
                hits += 1
        assert hits >= 4

    def test_structure_fields_hang_together(self):
        ds = early_late_dataset(seed=75)
        cfg = RunConfig(seed=3, n_clusters=3, k_snippets=2, l_override=16)
        s = build_structure(ds, cfg)
        assert s.label_node == 3
        assert s.unified_len == 16
        assert s.seed == 3
        assert s.config == cfg
        assert tuple(f.factor_id for f in s.factors) == (0, 1, 2)
        # every pooled snippet lands in exactly one cluster
        assert sum(f.exemplar_count for f in s.factors) == 2 * len(ds.series)
        for f in s.factors:
            assert f.centroid.shape == (16,)
        assert set(s.strengths.per_edge) == set(s.dag.edges)
        assert sum(c.bic_weight for c in s.candidates) == pytest.approx(1.0, abs=1e-9)
        assert all(v == s.label_node for _, v in s.dag.edges if v == s.label_node)

    def test_fft_length_agrees_with_template_period(self):
        ds = early_late_dataset(seed=76)
        s = build_structure(ds, self.CFG)
        assert s.unified_len == 16

    def test_override_replaces_measured_length(self):
        ds = early_late_dataset(seed=77)
        cfg = RunConfig(seed=0, n_clusters=3, k_snippets=2, l_override=20)
        assert build_structure(ds, cfg).unified_len == 20

    def test_unlabeled_dataset_has_no_label_machinery(self):
        ds = strip_labels(early_late_dataset(seed=78))
        s = build_structure(ds, self.CFG)
        assert s.label_node is None
        assert s.causal_factors == ()
        with pytest.raises(NoLabel):
            cir(s)
        with pytest.raises(NoLabel):
            prune_dataset(ds, s)

    def test_tiny_dataset_degrades_to_empty_graph(self, caplog):
        ds = Dataset(series=early_late_dataset(seed=79).series[:10])
        with caplog.at_level("WARNING", logger="causalts.apps"):
            s = build_structure(ds, self.CFG)
        assert s.dag.edges == ()
        assert "too small" in caplog.text

    def test_stage_failures_name_the_stage(self):
        rng = np.random.default_rng(0)
        short = Dataset(
            series=tuple(
                TimeSeries(values=rng.normal(size=20), label=0, id=f"s{i}")
                for i in range(25)
            )
        )
        cfg = RunConfig(seed=0, n_clusters=3, k_snippets=2, l_override=16)
        with pytest.raises(PipelineError) as err:
            build_structure(short, cfg)
        assert err.value.stage == "snippets"

    def test_rebuild_is_deterministic(self):
        ds = early_late_dataset(seed=80)
        cfg = RunConfig(seed=11, n_clusters=3, k_snippets=2)
        assert build_structure(ds, cfg) == build_structure(ds, cfg)


class TestRepresentations:
    def setup_method(self):
        self.structure = make_structure(
            3, [(0, 3)], label_node=3, unified_len=12, k_snippets=2
        )
        self.rng = np.random.default_rng(5)

    def test_series_factors_assigns_by_shape(self):
        series = tiled_series("sine", 12, 6, self.rng)
        snips, assigned = series_factors(series, self.structure)
        assert len(snips) == 2
        assert assigned == [0, 0]

    def test_series_factors_k_override(self):
        series = tiled_series("square", 12, 8, self.rng)
        snips, assigned = series_factors(series, self.structure, k=3)
        assert len(snips) == 3
        assert set(assigned) == {1}

    def test_represent_keeps_only_causal_snippets(self):
        vals = segment_series(["sine", "square"], 60, 12, self.rng, noise=0.03)
        series = TimeSeries(values=vals, id="mix")
        rep = represent(series, self.structure)
        assert rep.values.shape == (24,)
        assert rep.source_factors == (0,)
        assert rep.mask[:12].all()
        assert not rep.mask[12:].any()
        assert (rep.values[12:] == 0).all()
        snips, assigned = series_factors(series, self.structure)
        kept = [sn for sn, f in zip(snips, assigned) if f == 0]
        np.testing.assert_array_equal(rep.values[:12], kept[0].subsequence.values)

    def test_represent_falls_back_to_all_snippets(self):
        series = tiled_series("square", 12, 6, self.rng)
        rep = represent(series, self.structure)
        # nothing causal in sight: both square snippets kept
        assert rep.source_factors == (1, 1)
        assert rep.mask.all()

    def test_masked_distance_matches_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            n = int(rng.integers(4, 20))
            a = Representation(
                values=rng.normal(size=n) * rng.integers(0, 2, n),
                mask=rng.integers(0, 2, n).astype(bool),
                source_factors=(),
            )
            b = Representation(
                values=rng.normal(size=n),
                mask=rng.integers(0, 2, n).astype(bool),
                source_factors=(),
            )
            expect = brute_masked_distance(a.values, a.mask, b.values, b.mask)
            got = masked_distance(a, b)
            if np.isinf(expect):
                assert np.isinf(got)
            else:
                assert got == pytest.approx(expect, abs=1e-12)

    def test_masked_distance_zero_on_self(self):
        rep = Representation(
            values=np.array([1.0, 2.0, 0.0]),
            mask=np.array([True, True, False]),
            source_factors=(0,),
        )
        assert masked_distance(rep, rep) == 0.0

    def test_disjoint_masks_are_infinitely_far(self):
        a = Representation(np.ones(4), np.array([1, 1, 0, 0], bool), ())
        b = Representation(np.ones(4), np.array([0, 0, 1, 1], bool), ())
        assert masked_distance(a, b) == float("inf")


def rep_of(values, mask=None):
    vals = np.asarray(values, dtype=float)
    m = np.ones(vals.shape, bool) if mask is None else np.asarray(mask, bool)
    return Representation(values=vals, mask=m, source_factors=())


class TestClassifyKnn:
    def test_identical_representation_wins(self):
        train = [(rep_of([0.0, 0.0]), 0), (rep_of([5.0, 5.0]), 1)]
        assert classify_knn(train, rep_of([5.0, 5.0]), k_nn=1) == 1

    def test_nearest_neighbour_decides(self):
        train = [(rep_of([0.0]), 0), (rep_of([10.0]), 1)]
        assert classify_knn(train, rep_of([1.0])) == 0
        assert classify_knn(train, rep_of([9.0])) == 1

    def test_three_neighbour_majority_matches_oracle(self):
        rng = np.random.default_rng(19)
        train = [
            (rep_of(rng.normal(size=6), rng.integers(0, 2, 6)), int(rng.integers(0, 2)))
            for _ in range(12)
        ]
        # keep at least one overlapping position guaranteed
        train = [(rep_of(r.values, np.concatenate([[True], r.mask[1:]])), y) for r, y in train]
        for _ in range(8):
            test = rep_of(rng.normal(size=6))
            dists = [
                brute_masked_distance(r.values, r.mask, test.values, test.mask)
                for r, _ in train
            ]
            order = np.argsort(np.asarray(dists), kind="stable")[:3]
            votes = {}
            for idx in order:
                votes[train[idx][1]] = votes.get(train[idx][1], 0) + 1
            top = max(votes.values())
            winners = [c for c, v in votes.items() if v == top]
            expect = winners[0] if len(winners) == 1 else train[order[0]][1]
            assert classify_knn(train, test, k_nn=3) == expect

    def test_vote_tie_falls_back_to_nearest(self):
        train = [(rep_of([1.0]), 2), (rep_of([2.0]), 0), (rep_of([3.0]), 1)]
        # three classes, one vote each: the closest row's class wins
        assert classify_knn(train, rep_of([2.9]), k_nn=3) == 1

    def test_distance_tie_keeps_earlier_row(self):
        train = [(rep_of([1.0]), 7), (rep_of([3.0]), 8)]
        assert classify_knn(train, rep_of([2.0]), k_nn=1) == 7

    def test_bad_k_rejected(self):
        train = [(rep_of([0.0]), 0)]
        for k in (0, 2, -1):
            with pytest.raises(ValueError):
                classify_knn(train, rep_of([1.0]), k_nn=k)
        with pytest.raises(ValueError):
            classify_knn([], rep_of([1.0]))

    def test_no_overlap_anywhere_raises(self):
        train = [(rep_of([1.0, 0.0], [True, False]), 0)]
        with pytest.raises(NoOverlap):
            classify_knn(train, rep_of([0.0, 1.0], [False, True]))


class TestMetrics:
    def test_accuracy(self):
        assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0
        assert accuracy([0, 0, 0, 0], [0, 1, 0, 1]) == 0.5
        with pytest.raises(ValueError):
            accuracy([], [])
        with pytest.raises(ValueError):
            accuracy([1], [1, 0])

    def test_macro_f1_perfect(self):
        assert macro_f1([0, 1, 2], [0, 1, 2]) == 1.0

    def test_macro_f1_counts_silent_classes_as_zero(self):
        # class 1 never predicted: f1(0) = 2/3, f1(1) = 0
        assert macro_f1([0, 0, 0, 0], [0, 0, 1, 1]) == pytest.approx(1 / 3)

    def test_macro_f1_ignores_classes_absent_from_actual(self):
        assert macro_f1([0, 2], [0, 1]) == pytest.approx(0.5)

    def test_macro_f1_hand_worked_confusion(self):
        act = [0, 0, 1, 1, 1, 2]
        pred = [0, 1, 1, 1, 2, 2]
        # class 0: tp1 fp0 fn1; class 1: tp2 fp1 fn1; class 2: tp1 fp1 fn0
        expect = (2 / 3 + 4 / 6 + 2 / 3) / 3
        assert macro_f1(pred, act) == pytest.approx(expect)


class TestPruneAndCir:
    def test_prune_keeps_series_showing_a_causal_factor(self):
        structure = make_structure(3, [(0, 3)], label_node=3)
        rng = np.random.default_rng(3)
        keepers = [tiled_series("sine", 12, 6, rng, sid=f"keep{i}") for i in range(3)]
        drops = [tiled_series("saw", 12, 6, rng, sid=f"drop{i}") for i in range(2)]
        ds = Dataset(series=(keepers[0], drops[0], keepers[1], drops[1], keepers[2]))
        out = prune_dataset(ds, structure)
        assert [s.id for s in out] == ["keep0", "keep1", "keep2"]
        assert all(a is b for a, b in zip(out, keepers))

    def test_prune_agrees_with_row_by_row_oracle(self):
        rng = np.random.default_rng(91)
        for _ in range(40):
            structure = random_structure(rng)
            ds = random_dataset_for(structure, rng)
            factor_sets = [
                set(series_factors(s, structure)[1]) for s in ds
            ]
            keep = brute_prune_keep(
                factor_sets, structure.dag.edges, structure.label_node
            )
            got = prune_dataset(ds, structure)
            assert [s.id for s in got] == [ds.series[i].id for i in keep]

    def test_prune_requires_label(self):
        structure = make_structure(3, [(0, 1)], label_node=None)
        ds = Dataset(series=(tiled_series("sine", 12, 6, np.random.default_rng(0)),))
        with pytest.raises(NoLabel):
            prune_dataset(ds, structure)

    def test_cir_counts_label_parents(self):
        s = make_structure(5, [(0, 5), (2, 5), (1, 3)], label_node=5)
        assert cir(s) == pytest.approx(2 / 5)
        assert cir(s, n=10) == pytest.approx(0.2)

    def test_cir_edge_cases(self):
        no_cause = make_structure(4, [(0, 1)], label_node=4)
        assert cir(no_cause) == 0.0
        all_cause = make_structure(2, [(0, 2), (1, 2)], label_node=2)
        assert cir(all_cause) == 1.0
        with pytest.raises(ValueError):
            cir(all_cause, n=0)
        with pytest.raises(NoLabel):
            cir(make_structure(2, [(0, 1)]))

    def test_cir_monotone_in_label_edges(self):
        base = make_structure(4, [(0, 4)], label_node=4)
        more = make_structure(4, [(0, 4), (2, 4)], label_node=4)
        assert cir(more) > cir(base)


class TestSweep:
    def test_singleton_grid_equals_direct_build(self):
        ds = early_late_dataset(seed=85, n_rows=24)
        cfg = RunConfig(seed=0, n_clusters=3, k_snippets=2)
        cells = sweep_parameters(ds, [16], [2], cfg)
        assert len(cells) == 1
        cell = cells[0]
        from dataclasses import replace

        direct = build_structure(ds, replace(cfg, l_override=16, k_snippets=2))
        assert (cell.l, cell.k) == (16, 2)
        assert cell.error is None
        assert cell.cir_value == pytest.approx(cir(direct))

    def test_failing_cells_record_errors_without_aborting(self):
        ds = early_late_dataset(seed=86, n_rows=24)
        cfg = RunConfig(seed=0, n_clusters=3, k_snippets=2)
        cells = sweep_parameters(ds, [16, 999], [2], cfg)
        assert [(c.l, c.k) for c in cells] == [(16, 2), (999, 2)]
        good, bad = cells
        assert good.error is None and good.cir_value is not None
        assert bad.cir_value is None
        assert bad.error == "PipelineError"

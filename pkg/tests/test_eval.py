"""Generation scoring, distribution distance, and KDE exports."""

import csv

import numpy as np
import pytest

from molebm import evalmetrics as ev
from molebm import model as M
from molebm.chem.crippen import logp
from molebm.chem.graph import parse_smiles
from molebm.chem.vocab import Vocabulary


class TestClassify:
    def test_valid_molecule(self):
        parsed, valid, canon = ev.classify("OCC")
        assert parsed and valid
        assert canon == ev.classify("CCO")[2]   # spelling-invariant

    def test_unparseable(self):
        assert ev.classify("xyz") == (False, False, None)
        assert ev.classify("C(C") == (False, False, None)

    def test_valence_violation_parses_but_is_invalid(self):
        parsed, valid, canon = ev.classify("C(C)(C)(C)(C)C")
        assert parsed and not valid and canon is None


class TestScoreDecodes:
    def test_half_valid(self):
        report, samples = ev.score_decodes(
            [("CCO", False), ("xyz", False)], train_index=set())
        assert report.n_generated == 2
        assert report.n_valid == 1
        assert report.validity == 0.5
        assert samples[0].valid and not samples[1].valid
        assert samples[1].text == "xyz"   # raw decode kept for invalids

    def test_uniqueness_over_valid(self):
        decoded = [("CCO", False), ("OCC", False), ("CCO", False),
                   ("CCN", False)]
        report, _ = ev.score_decodes(decoded, train_index=set())
        assert report.n_valid == 4
        assert report.n_unique == 2          # ethanol twice spelled + amine
        assert report.uniqueness == 0.5
        assert report.uniqueness_over_generated == 0.5

    def test_novelty_against_training_index(self):
        canon_ethanol = ev.classify("CCO")[2]
        decoded = [("CCO", False), ("CCN", False)]
        report, _ = ev.score_decodes(decoded, train_index={canon_ethanol})
        assert report.n_unique == 2 and report.n_novel == 1
        assert report.novelty == 0.5
        assert report.novelty_over_valid == 0.5

    def test_parse_ok_counts_valence_failures(self):
        report, _ = ev.score_decodes(
            [("C(C)(C)(C)(C)C", False)], train_index=set())
        assert report.n_parse_ok == 1 and report.n_valid == 0

    def test_truncation_counted(self):
        report, _ = ev.score_decodes(
            [("CCO", True), ("CCN", False)], train_index=set())
        assert report.n_truncated == 1

    def test_empty_input_has_no_divisions(self):
        report, samples = ev.score_decodes([], train_index=set())
        assert report.n_generated == 0
        assert report.validity == 0.0 and report.novelty == 0.0
        assert samples == []

    def test_valid_samples_stored_canonical(self):
        report, samples = ev.score_decodes([("OCC", False)], train_index=set())
        assert samples[0].text == ev.classify("CCO")[2]


class TestRenderIds:
    def test_literal_sentinels_fail_parsing(self):
        vocab = Vocabulary.from_smiles(["CCO"])
        ids = [vocab.text_to_index["C"], 2, vocab.text_to_index["O"]]
        text = ev.render_ids(vocab, ids)
        assert "<eos>" in text
        parsed, valid, _ = ev.classify(text)
        assert not parsed and not valid

    def test_round_trip_plain_tokens(self):
        vocab = Vocabulary.from_smiles(["CCO", "c1ccccc1"])
        ids = vocab.encode("CCO")[1:-1]   # strip sentinels
        assert ev.render_ids(vocab, ids) == "CCO"


class TestGenerateAndScore:
    def test_deterministic_and_sized(self):
        vocab = Vocabulary.from_smiles(["CCO", "CCN", "CCC"])
        p = M.ModelParams.init(vocab_size=len(vocab), d=3, mlp_hidden=4,
                               lstm_hidden=5, embed_dim=4, seed=0)
        r1, s1 = ev.generate_and_score(p, vocab, 20, set(), seed=3)
        r2, s2 = ev.generate_and_score(p, vocab, 20, set(), seed=3)
        assert r1 == r2
        assert [s.text for s in s1] == [s.text for s in s2]
        assert r1.n_generated == 20
        r3, _ = ev.generate_and_score(p, vocab, 20, set(), seed=4)
        assert [s.text for s in s1] != [s.text for s in
                                        ev.generate_and_score(
                                            p, vocab, 20, set(), seed=4)[1]]
        assert r3.n_generated == 20


class TestDistributionDistance:
    def test_identical_samples_give_zero(self):
        a = np.array([0.0, 1.0, 2.0, 5.0])
        assert ev.distribution_distance(a, a.copy()) == 0.0

    def test_point_masses(self):
        assert ev.distribution_distance([0.0], [1.0]) == 1.0

    def test_constant_shift(self):
        a = np.array([0.0, 1.0])
        b = a + 0.5
        assert ev.distribution_distance(a, b) == pytest.approx(0.5)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=40), rng.normal(size=40) + 0.3
        assert ev.distribution_distance(a, b) == \
            ev.distribution_distance(b, a)

    def test_unequal_sizes_same_distribution_is_small(self):
        rng = np.random.default_rng(1)
        a, b = rng.random(5000), rng.random(3000)
        assert ev.distribution_distance(a, b) < 0.03

    def test_unequal_sizes_detects_shift(self):
        rng = np.random.default_rng(2)
        a, b = rng.random(5000), rng.random(3000) + 1.0
        assert ev.distribution_distance(a, b) == pytest.approx(1.0, abs=0.05)

    def test_translation_invariance(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=100), rng.normal(size=60)
        d1 = ev.distribution_distance(a, b)
        d2 = ev.distribution_distance(a + 7.0, b + 7.0)
        assert d1 == pytest.approx(d2, abs=1e-12)

    def test_empty_sample_raises(self):
        with pytest.raises(ValueError):
            ev.distribution_distance([], [1.0])


class TestKde:
    def test_silverman_formula(self):
        v = np.array([1.0, 2.0, 2.5, 3.0, 4.5, 5.0, 6.5, 8.0])
        iqr = np.subtract(*np.percentile(v, [75, 25]))
        expected = 0.9 * min(v.std(ddof=1), iqr / 1.34) * v.size ** (-0.2)
        assert ev.silverman_bandwidth(v) == pytest.approx(expected)

    def test_degenerate_sample_stays_positive(self):
        assert ev.silverman_bandwidth(np.full(10, 3.0)) > 0

    def test_single_value_sample_is_finite(self):
        bw = ev.silverman_bandwidth(np.array([2.5]))
        assert np.isfinite(bw) and bw > 0
        x, dens = ev.kde_grid(np.array([2.5]))
        assert np.all(np.isfinite(dens))
        # the grid spans 3 bandwidths, clipping the usual Gaussian tail mass
        assert np.trapezoid(dens, x) == pytest.approx(1.0, abs=5e-3)

    def test_density_integrates_to_one(self):
        rng = np.random.default_rng(4)
        v = rng.normal(size=400)
        x, dens = ev.kde_grid(v, n_grid=512)
        assert np.all(dens >= 0)
        assert np.trapezoid(dens, x) == pytest.approx(1.0, abs=1e-3)

    def test_chunked_evaluation_matches_direct(self):
        rng = np.random.default_rng(5)
        v = rng.normal(size=5000)   # several chunks
        x, dens = ev.kde_grid(v, n_grid=64)
        bw = ev.silverman_bandwidth(v)
        direct = np.exp(-0.5 * ((x[:, None] - v[None, :]) / bw) ** 2).sum(1)
        direct /= v.size * bw * np.sqrt(2 * np.pi)
        assert np.allclose(dens, direct, atol=1e-12)

    def test_peak_tracks_the_sample(self):
        v = np.random.default_rng(6).normal(loc=5.0, scale=0.3, size=500)
        x, dens = ev.kde_grid(v)
        assert abs(x[np.argmax(dens)] - 5.0) < 0.2


class TestPropertyTable:
    def test_rows_and_skips(self):
        rows, skipped = ev.property_table(["CCO", "xyz", "CCN"], "corpus")
        assert skipped == 1
        assert len(rows) == 2
        canon, lp, source = rows[0]
        assert canon == ev.classify("CCO")[2]
        assert lp == pytest.approx(logp(parse_smiles("CCO")).value)
        assert source == "corpus"

    def test_logp_is_spelling_invariant(self):
        rows_a, _ = ev.property_table(["OCC"], "a")
        rows_b, _ = ev.property_table(["CCO"], "b")
        assert rows_a[0][1] == pytest.approx(rows_b[0][1], abs=1e-12)


class TestWriters:
    def test_report_file(self, tmp_path):
        report, _ = ev.score_decodes([("CCO", False), ("xyz", False)], set())
        path = tmp_path / "report.csv"
        ev.write_report(path, report)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["metric", "value"]
        table = dict(rows[1:])
        assert table["n_generated"] == "2"
        assert table["validity"] == "0.5"

    def test_samples_file(self, tmp_path):
        _, samples = ev.score_decodes([("CCO", False), ("xyz", True)], set())
        path = tmp_path / "samples.csv"
        ev.write_samples(path, samples)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["smiles", "valid"]
        assert rows[1][1] == "1" and rows[2][1] == "0"

    def test_property_table_file(self, tmp_path):
        rows, _ = ev.property_table(["CCO"], "model")
        path = tmp_path / "props.csv"
        ev.write_property_table(path, rows)
        out = list(csv.reader(open(path)))
        assert out[0] == ["smiles", "logp", "qed", "sas", "source"]
        assert out[1][2] == "" and out[1][3] == ""   # oracle columns empty
        assert out[1][4] == "model"

    def test_kde_file_shares_grid_per_property(self, tmp_path):
        rng = np.random.default_rng(7)
        named = {("logp", "corpus"): rng.normal(size=50),
                 ("logp", "model"): rng.normal(size=80) + 1.0}
        path = tmp_path / "kde.csv"
        ev.write_kde(path, named, n_grid=32)
        rows = list(csv.reader(open(path)))
        assert rows[0] == ["x", "density", "source", "property"]
        xs = {}
        for x, dens, source, prop in rows[1:]:
            xs.setdefault(source, []).append(x)
        assert xs["corpus"] == xs["model"]   # same grid for both sources
        assert len(xs["corpus"]) == 32

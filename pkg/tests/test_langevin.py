"""Sampler: closed forms for linear targets, chain identities, moments."""

import dataclasses
import io

import numpy as np
import pytest

from molebm import langevin as L
from molebm import model as M


class TestConfig:
    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            L.LangevinConfig(K=0, s=0.1)
        with pytest.raises(ValueError):
            L.LangevinConfig(K=10, s=0.0)
        with pytest.raises(ValueError):
            L.LangevinConfig(K=10, s=-0.5)
        with pytest.raises(ValueError):
            L.LangevinConfig(K=10, s=0.1, noise_scale=-1.0)
        with pytest.raises(ValueError):
            L.LangevinConfig(K=10, s=0.1, target="banana")

    def test_is_frozen(self):
        cfg = L.LangevinConfig(K=5, s=0.2)
        with pytest.raises(dataclasses.FrozenInstanceError):
            cfg.K = 6

    def test_default_schedules(self):
        assert (L.PRIOR_DEFAULTS.K, L.PRIOR_DEFAULTS.s) == (20, 0.4)
        assert (L.POSTERIOR_DEFAULTS.K, L.POSTERIOR_DEFAULTS.s) == (40, 0.1)
        assert L.PRIOR_DEFAULTS.noise_scale == 1.0


class TestClosedForms:
    def test_noiseless_contraction_is_geometric(self):
        # score of N(0, I) is -z; with the noise off each step multiplies
        # z by (1 - s), so K steps give (1 - s)^K z0. s = 0.5 keeps every
        # intermediate exactly representable.
        cfg = L.LangevinConfig(K=8, s=0.5, noise_scale=0.0)
        z0 = np.array([4.0, -2.0, 1.0])
        z, stats = L.run_chain(lambda z: -z, z0, cfg,
                               np.random.default_rng(0))
        assert np.array_equal(z, z0 * 0.5 ** 8)
        assert stats["score_norm"].shape == (8,)

    def test_noiseless_contraction_generic_step(self):
        cfg = L.LangevinConfig(K=25, s=0.3, noise_scale=0.0)
        z0 = np.array([1.0, 2.0])
        z, _ = L.run_chain(lambda z: -z, z0, cfg, np.random.default_rng(0))
        assert np.allclose(z, z0 * 0.7 ** 25, rtol=1e-12)

    def test_fixed_point_is_exact(self):
        mu = np.array([3.0, -1.0, 0.5, 2.0])
        cfg = L.LangevinConfig(K=50, s=0.1, noise_scale=0.0)
        z, stats = L.run_chain(lambda z: mu - z, mu.copy(), cfg,
                               np.random.default_rng(0))
        assert np.array_equal(z, mu)
        assert np.all(stats["score_norm"] == 0.0)

    def test_stationary_moments_of_linear_target(self):
        # discrete chain targeting N(mu, I): stationary mean is mu and
        # stationary variance 2s / (1 - (1-s)^2) = 2 / (2 - s)
        mu = 2.0
        s = 0.1
        cfg = L.LangevinConfig(K=150, s=s)
        zs, _ = L.run_chains(lambda z: mu - z, d=4, n=3000, cfg=cfg, seed=42)
        flat = zs.ravel()
        assert abs(flat.mean() - mu) < 0.05
        assert abs(flat.var() - 2.0 / (2.0 - s)) < 0.06


class TestChainIdentities:
    def test_batched_rows_match_single_chains_bitwise(self):
        # elementwise score keeps the vectorized arithmetic identical
        cfg = L.LangevinConfig(K=12, s=0.2)
        zs, _ = L.run_chains(lambda z: -z, d=3, n=5, cfg=cfg, seed=9)
        for i in range(5):
            zi, _ = L.run_chain(lambda z: -z, None, cfg,
                                L.chain_rng(9, i), d=3)
            assert np.array_equal(zs[i], zi)

    def test_index_base_shards_the_same_population(self):
        cfg = L.LangevinConfig(K=6, s=0.2)
        whole, _ = L.run_chains(lambda z: -z, d=2, n=7, cfg=cfg, seed=3)
        tail, _ = L.run_chains(lambda z: -z, d=2, n=4, cfg=cfg, seed=3,
                               index_base=3)
        assert np.array_equal(whole[3:], tail)

    def test_block_size_does_not_change_results(self):
        cfg = L.LangevinConfig(K=6, s=0.2)
        a, _ = L.run_chains(lambda z: -z, d=2, n=9, cfg=cfg, seed=5,
                            block_size=2)
        b, _ = L.run_chains(lambda z: -z, d=2, n=9, cfg=cfg, seed=5,
                            block_size=1024)
        assert np.array_equal(a, b)

    def test_explicit_starts_skip_the_start_draw(self):
        cfg = L.LangevinConfig(K=4, s=0.2, noise_scale=0.0)
        z0 = np.arange(6.0).reshape(3, 2)
        a, _ = L.run_chains(lambda z: -z, d=2, n=3, cfg=cfg, seed=1, z0=z0)
        b, _ = L.run_chains(lambda z: -z, d=2, n=3, cfg=cfg, seed=999, z0=z0)
        assert np.array_equal(a, b)   # noise off: seed is irrelevant

    def test_nonfinite_score_aborts_with_step_and_chain(self):
        calls = []

        def score(z):
            calls.append(0)
            g = -z
            if len(calls) > 3:
                g[0, 0] = np.inf
            return g

        cfg = L.LangevinConfig(K=10, s=0.1)
        with pytest.raises(L.LangevinError) as exc:
            L.run_chains(score, d=2, n=4, cfg=cfg, seed=0)
        assert exc.value.step == 3
        assert "chain 0" in str(exc.value)


class TestModelSamplers:
    def tiny(self, seed=0):
        p = M.ModelParams.init(vocab_size=7, d=3, mlp_hidden=6,
                               lstm_hidden=5, embed_dim=4, seed=seed)
        rng = np.random.default_rng(seed + 50)
        p.arrays["pw3"] = rng.normal(size=p.arrays["pw3"].shape) * 0.2
        return p

    def test_sample_prior_deterministic(self):
        p = self.tiny()
        cfg = L.LangevinConfig(K=8, s=0.2)
        a, _ = L.sample_prior(p, 6, cfg, seed=11)
        b, _ = L.sample_prior(p, 6, cfg, seed=11)
        c, _ = L.sample_prior(p, 6, cfg, seed=12)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_sample_prior_matches_manual_chain(self):
        p = self.tiny()
        cfg = L.LangevinConfig(K=8, s=0.2)
        zs, _ = L.sample_prior(p, 3, cfg, seed=4)
        for i in range(3):
            zi, _ = L.run_chain(
                lambda z: M.prior_score(p, z.reshape(1, -1))[0],
                None, cfg, L.chain_rng(4, i), d=3)
            assert np.allclose(zs[i], zi, atol=1e-12)

    def test_zero_energy_prior_is_standard_langevin(self):
        # output layer starts at zero, so the tilt is flat and the prior
        # chain must match a plain N(0, I) chain bitwise
        p = M.ModelParams.init(vocab_size=7, d=3, mlp_hidden=6,
                               lstm_hidden=5, embed_dim=4, seed=0)
        cfg = L.LangevinConfig(K=10, s=0.3)
        a, _ = L.sample_prior(p, 5, cfg, seed=8)
        b, _ = L.run_chains(lambda z: -z, d=3, n=5, cfg=cfg, seed=8)
        assert np.array_equal(a, b)

    def test_blind_decoder_posterior_equals_prior(self):
        # decoder that cannot see z: posterior score reduces to the prior
        # score exactly, so the chains coincide bitwise
        p = M.ModelParams.init(vocab_size=7, d=3, mlp_hidden=6,
                               lstm_hidden=5, embed_dim=4, seed=2)
        p.arrays["wh0"][:] = 0.0
        p.arrays["wc0"][:] = 0.0
        p.arrays["wx"][p.embed_dim:, :] = 0.0   # z rows of the input weights
        ids = np.array([[1, 3, 4, 2, 0, 0],
                        [1, 5, 6, 3, 4, 2]])
        cfg = L.LangevinConfig(K=7, s=0.15)
        post, _ = L.sample_posterior(p, ids, pad_id=0, cfg=cfg, seed=21)
        prior, _ = L.run_chains(lambda z: -z, d=3, n=2, cfg=cfg, seed=21)
        assert np.array_equal(post, prior)

    def test_posterior_ignores_trailing_pad_columns(self):
        p = self.tiny(seed=3)
        ids = np.array([[1, 3, 4, 2, 0], [1, 5, 2, 0, 0]])
        extra = np.hstack([ids, np.zeros((2, 6), dtype=ids.dtype)])
        cfg = L.LangevinConfig(K=5, s=0.1)
        a, _ = L.sample_posterior(p, ids, pad_id=0, cfg=cfg, seed=6)
        b, _ = L.sample_posterior(p, extra, pad_id=0, cfg=cfg, seed=6)
        assert np.array_equal(a, b)

    def test_posterior_blocks_do_not_interact(self):
        p = self.tiny(seed=4)
        ids = np.array([[1, 3, 4, 2], [1, 5, 2, 0], [1, 6, 6, 2]])
        cfg = L.LangevinConfig(K=4, s=0.1)
        a, _ = L.sample_posterior(p, ids, pad_id=0, cfg=cfg, seed=7,
                                  block_size=1)
        b, _ = L.sample_posterior(p, ids, pad_id=0, cfg=cfg, seed=7,
                                  block_size=64)
        assert np.allclose(a, b, atol=1e-12)


class TestTrace:
    def test_write_trace_round_trips(self, tmp_path):
        stats = {"score_norm": np.array([1.5, 2.5]),
                 "z_norm": np.array([0.5, 0.25])}
        path = tmp_path / "trace.csv"
        L.write_trace(path, stats)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "step,score_norm,z_norm"
        assert len(lines) == 3
        first = lines[1].split(",")
        assert first[0] == "0"
        assert float(first[1]) == 1.5 and float(first[2]) == 0.5

import itertools
import math

import numpy as np
import pytest
from scipy import integrate, stats
from scipy.special import logsumexp

from cpd.bayes import (
    DistancePrior,
    FLAT_PRIOR,
    GaussianConjugatePrior,
    bayes_detect,
    cp_posterior,
    detect_peaks,
    fuse_user_belief,
    map_paa_index,
    q_recursion,
    seg_marginal,
    write_cp_prob_csv,
)
from cpd.errors import DegenerateBeliefWarning
from cpd.series import TimeSeries


def enum_log_evidence(y, prior, k, hyper=GaussianConjugatePrior()):
    """Sum over all C(n-1, k) segmentations of (product of segment marginals)
    times (product of gap priors), one gap factor per change point."""
    n = len(y)
    log_pi = prior.log_pmf(np.arange(n + 2), n)
    totals = []
    for cut in itertools.combinations(range(1, n), k):
        pts = (0, *cut, n)
        lp = 0.0
        for a, b in zip(pts, pts[1:]):
            lp += seg_marginal(y, a + 1, b, hyper)
        prev = 0
        for c in cut:
            lp += log_pi[c - prev]
            prev = c
        totals.append(lp)
    return logsumexp(totals)


def grid_marginal(segment, hyper):
    """Numerical-integration oracle on a (mean, variance) grid.

    Integrates the likelihood times the prior over standardised coordinates
    (z = (mu - mu0) / sqrt(v / kappa0), w = log v) so the grid covers the
    heavy inverse-gamma tail; Simpson's rule along both axes.
    """
    seg = np.asarray(segment, dtype=float)
    z = np.linspace(-13.0, 13.0, 801)
    w = np.linspace(-16.0, 16.0, 1601)
    v = np.exp(w)[:, None]  # variance, rows
    mu = hyper.mu0 + np.sqrt(v / hyper.kappa0) * z[None, :]
    log_lik = (-0.5 * ((seg[:, None, None] - mu[None, :, :]) ** 2 / v[None, :, :])
               - 0.5 * np.log(2 * np.pi * v[None, :, :])).sum(axis=0)
    log_prior_z = -0.5 * z[None, :] ** 2 - 0.5 * math.log(2 * math.pi)
    log_prior_v = (hyper.alpha0 * math.log(hyper.beta0)
                   - math.lgamma(hyper.alpha0)
                   - (hyper.alpha0 + 1) * np.log(v) - hyper.beta0 / v)
    # N(mu) d mu = phi(z) dz absorbs the mean substitution; dv = v dw remains
    log_jac = np.log(v)
    integrand = np.exp(log_lik + log_prior_z + log_prior_v + log_jac)
    return math.log(integrate.simpson(integrate.simpson(integrand, x=z, axis=1), x=w))


class TestSegMarginal:
    def test_length_one_matches_numerical_integration(self):
        hyper = GaussianConjugatePrior(mu0=0.0, kappa0=0.1, alpha0=1.0, beta0=1.0)
        got = seg_marginal(np.array([0.7, 0.0]), 1, 1, hyper)
        assert got == pytest.approx(grid_marginal([0.7], hyper), abs=1e-6)

    def test_length_one_is_student_t(self):
        hyper = GaussianConjugatePrior(mu0=0.0, kappa0=0.5, alpha0=2.0, beta0=1.5)
        scale = math.sqrt(hyper.beta0 * (hyper.kappa0 + 1)
                          / (hyper.alpha0 * hyper.kappa0))
        for value in (-2.0, 0.0, 0.3, 4.0):
            expected = stats.t.logpdf(value, df=2 * hyper.alpha0,
                                      loc=hyper.mu0, scale=scale)
            got = seg_marginal(np.array([value, 0.0]), 1, 1, hyper)
            assert got == pytest.approx(float(expected), abs=1e-10)

    def test_three_sample_matches_numerical_integration(self):
        hyper = GaussianConjugatePrior()
        seg = np.array([0.2, -0.5, 0.9])
        got = seg_marginal(seg, 1, 3, hyper)
        assert got == pytest.approx(grid_marginal(seg, hyper), abs=1e-6)

    def test_translation_prefers_prior_centre(self):
        hyper = GaussianConjugatePrior(mu0=0.0)
        scores = {c: seg_marginal(np.full(3, float(c)), 1, 3, hyper)
                  for c in (-2, -1, 0, 1, 2)}
        assert max(scores, key=scores.get) == 0

    def test_monotone_density_bound(self, rng):
        # appending a sample multiplies by a factor bounded by the sup density
        y = rng.normal(0, 1, 20)
        hyper = GaussianConjugatePrior()
        bound = 10.0  # generous sup over predictive densities on z-scored data
        for s in range(1, 20):
            assert (seg_marginal(y, 1, s + 1)
                    <= seg_marginal(y, 1, s) + math.log(bound))

    def test_invalid_range(self):
        with pytest.raises(ValueError):
            seg_marginal(np.zeros(5), 3, 2)


class TestQRecursion:
    def test_single_split_enumeration(self, rng):
        y = np.concatenate([rng.normal(0, 1, 3), rng.normal(4, 1, 3)])
        qr = q_recursion(y, FLAT_PRIOR, 1)
        n = 6
        log_pi = FLAT_PRIOR.log_pmf(np.arange(n + 1), n)
        terms = [seg_marginal(y, 1, s) + seg_marginal(y, s + 1, n) + log_pi[s]
                 for s in range(1, n)]
        assert qr.log_evidence == pytest.approx(logsumexp(terms), rel=1e-10)

    @pytest.mark.parametrize("prior", [FLAT_PRIOR, DistancePrior("geometric", p=0.3)])
    def test_exhaustive_enumeration(self, prior, rng):
        for n in (5, 8, 12):
            y = rng.normal(0, 1, n)
            y[n // 2:] += 2.5
            for k in (1, 2, 3):
                qr = q_recursion(y, prior, k)
                brute = enum_log_evidence(y, prior, k)
                assert qr.log_evidence == pytest.approx(brute, rel=1e-8, abs=1e-10)

    def test_truncation_negligible(self, rng):
        y = rng.normal(0, 1, 100)
        y[40:] += 3.0
        for k in (1, 3, 5):
            exact = q_recursion(y, FLAT_PRIOR, k, epsilon=0.0)
            truncated = q_recursion(y, FLAT_PRIOR, k, epsilon=1e-10)
            assert truncated.log_evidence == pytest.approx(
                exact.log_evidence, rel=1e-8, abs=1e-8)

    def test_k_bounds(self):
        with pytest.raises(ValueError):
            q_recursion(np.zeros(5), FLAT_PRIOR, 5)

    def test_q_accessor_shapes(self, rng):
        y = rng.normal(0, 1, 15)
        qr = q_recursion(y, FLAT_PRIOR, 3)
        assert qr.q(3)[1] != -np.inf  # last change point tail: P(i, n)
        assert qr.q(0)[1] == qr.log_evidence


class TestCpPosterior:
    def test_noiseless_step_argmax(self):
        y = np.concatenate([np.zeros(20), np.full(20, 4.0)])
        y = y + 0.01 * np.sin(np.arange(40))  # break exact degeneracy
        post = cp_posterior(TimeSeries((y - y.mean()) / y.std()), k_max=5)
        assert int(post.cp_prob.argmax()) == 20

    def test_probabilities_in_unit_interval(self, rng):
        y = rng.normal(0, 1, 60)
        post = cp_posterior(y, k_max=6)
        assert post.cp_prob.shape == (60,)
        assert np.all(post.cp_prob >= 0.0)
        assert np.all(post.cp_prob <= 1.0)
        assert post.cp_prob[0] == 0.0

    def test_marginals_normalise(self, rng):
        y = rng.normal(0, 1, 30)
        y[15:] += 2.0
        post = cp_posterior(y, k_max=4)
        for k in (1, 2, 3, 4):
            for j in range(1, k + 1):
                assert post.marginal(k, j).sum() == pytest.approx(1.0, abs=1e-6)

    def test_conditional_posterior_normalises(self, rng):
        # Fixing the previous change point, the next-position posterior is a
        # distribution: sum_s P(r+1,s) pi(s-r) Q_j(s+1) = Q_{j-1}(r+1).
        y = rng.normal(0, 1, 25)
        k = 3
        qr = q_recursion(y, FLAT_PRIOR, k, epsilon=0.0)
        n = 25
        log_pi = FLAT_PRIOR.log_pmf(np.arange(n + 2), n)
        hyper = GaussianConjugatePrior()
        for j, r in [(2, 5), (3, 10)]:
            terms = []
            for s in range(r + 1, n - k + j + 1):
                terms.append(seg_marginal(y, r + 1, s) + log_pi[s - r]
                             + qr.q(j)[s + 1])
            total = logsumexp(terms)
            assert total == pytest.approx(float(qr.q(j - 1)[r + 1]), abs=1e-9)

    def test_iid_noise_rarely_confident(self):
        confident = 0
        for seed in range(10):
            y = np.random.default_rng(seed).normal(0, 1, 80)
            post = cp_posterior(y, k_max=8)
            if post.cp_prob.max() >= 0.2:
                confident += 1
        assert confident <= 3

    def test_deterministic(self, rng):
        y = rng.normal(0, 1, 40)
        a = cp_posterior(y, k_max=4).cp_prob
        b = cp_posterior(y.copy(), k_max=4).cp_prob
        assert np.array_equal(a, b)

    def test_evidence_matches_q_recursion(self, rng):
        y = rng.normal(0, 1, 20)
        post = cp_posterior(y, k_max=3)
        for k in (1, 2, 3):
            assert post.log_evidence[k - 1] == pytest.approx(
                q_recursion(y, FLAT_PRIOR, k).log_evidence, rel=1e-12)


class TestDetectPeaks:
    def test_single_spike(self):
        prob = np.zeros(100)
        prob[50] = 0.9
        assert detect_peaks(prob, 0.2, 10).intermediate == (50,)

    def test_close_spikes_suppressed(self):
        prob = np.zeros(100)
        prob[40] = 0.5
        prob[45] = 0.8
        assert detect_peaks(prob, 0.2, 10).intermediate == (45,)

    def test_below_threshold_empty(self):
        prob = np.full(50, 0.1)
        prob[20] = 0.2
        assert detect_peaks(prob, 0.2, 10).intermediate == ()

    def test_threshold_validation(self):
        with pytest.raises(ValueError):
            detect_peaks(np.zeros(10), 1.5, 5)

    def test_depends_only_on_order_and_crossings(self):
        prob = np.array([0.0, 0.1, 0.6, 0.1, 0.0, 0.3, 0.7, 0.2, 0.0, 0.0])
        base = detect_peaks(prob, 0.25, 2).intermediate
        squashed = detect_peaks(np.sqrt(prob), math.sqrt(0.25), 2).intermediate
        assert base == squashed == (2, 6)


class TestFuseUserBelief:
    def test_neutral_belief_is_identity(self, rng):
        p = rng.uniform(0, 1, 50)
        fused = fuse_user_belief(p, np.full(50, 0.5))
        np.testing.assert_allclose(fused.probs, p, atol=1e-12)

    def test_certainty_absorbs(self):
        p = np.array([0.3, 0.001])
        u = np.array([1.0, 1.0])
        fused = fuse_user_belief(p, u)
        assert fused.probs.tolist() == [1.0, 1.0]

    def test_symmetry(self, rng):
        p = rng.uniform(0.01, 0.99, 30)
        u = rng.uniform(0.01, 0.99, 30)
        np.testing.assert_allclose(fuse_user_belief(p, u).probs,
                                   fuse_user_belief(u, p).probs, atol=1e-12)

    def test_contradiction_flagged(self):
        with pytest.warns(DegenerateBeliefWarning):
            fused = fuse_user_belief(np.array([1.0, 0.5]), np.array([0.0, 0.5]))
        assert fused.probs[0] == 0.0
        assert fused.degenerate == (0,)

    def test_validation(self):
        with pytest.raises(ValueError):
            fuse_user_belief(np.zeros(3), np.zeros(4))
        with pytest.raises(ValueError):
            fuse_user_belief(np.zeros(3), np.array([0.0, 2.0, 0.0]))


class TestBayesDetect:
    def test_recovers_step_changes(self):
        rng = np.random.default_rng(3)
        y = np.concatenate([rng.normal(0, 0.3, 60), rng.normal(4, 0.3, 60),
                            rng.normal(-2, 0.3, 60)])
        cps = bayes_detect(y, k_max=8)
        assert cps.n == 180
        assert len(cps.intermediate) == 2
        found = np.asarray(cps.intermediate)
        assert np.abs(found - np.array([60, 120])).max() <= 3

    def test_constant_signal_empty(self):
        assert bayes_detect(np.full(50, 2.0)).intermediate == ()

    def test_paa_window_one_identity_mapping(self):
        assert map_paa_index([5, 9], 1).tolist() == [5, 9]
        assert map_paa_index([5, 9], 20).tolist() == [100, 180]

    def test_paa_pipeline_runs(self, rng):
        y = np.concatenate([rng.normal(0, 0.3, 200), rng.normal(3, 0.3, 200)])
        cps = bayes_detect(y, paa_window=10, k_max=8)
        assert cps.n == 400
        assert any(abs(p - 200) <= 10 for p in cps.intermediate)

    def test_export_csv(self, tmp_path, rng):
        path = tmp_path / "prob.csv"
        write_cp_prob_csv(path, np.array([0.0, 0.25, 0.5]))
        text = path.read_text().strip().splitlines()
        assert text[0] == "index,probability"
        assert text[3].startswith("2,")


class TestDistancePrior:
    def test_flat_is_uniform(self):
        prior = DistancePrior("flat")
        pmf = prior.log_pmf(np.arange(1, 10), 20)
        assert np.allclose(pmf, -math.log(20))

    def test_geometric_sums_to_one(self):
        prior = DistancePrior("geometric", p=0.25)
        pmf = np.exp(prior.log_pmf(np.arange(1, 4000), 100))
        assert pmf.sum() == pytest.approx(1.0, abs=1e-9)

    def test_negative_binomial_sums_to_one(self):
        prior = DistancePrior("negative_binomial", p=0.3, r=4)
        pmf = np.exp(prior.log_pmf(np.arange(1, 4000), 100))
        assert pmf.sum() == pytest.approx(1.0, abs=1e-9)

    def test_gap_zero_impossible(self):
        prior = DistancePrior("geometric", p=0.5)
        assert prior.log_pmf(np.array([0]), 10)[0] == -np.inf

    def test_validation(self):
        with pytest.raises(ValueError):
            DistancePrior("bogus")
        with pytest.raises(ValueError):
            DistancePrior("geometric", p=1.5)

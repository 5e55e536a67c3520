import math

import numpy as np
import pytest
from scipy.linalg import expm
from scipy.stats import ks_2samp

from fracwalk import (
    RngSpec,
    birth_chain,
    build_generator,
    empirical_transition,
    exponential_model,
    ml_model,
    ml_survival,
    occupation_at,
    sample_ml_waiting,
    sample_stable_subordinator,
    simulate_ctrw,
    simulate_paths,
    simulate_time_changed,
)


def test_reproducibility(model3):
    rng = RngSpec(seed=42, stream_id=3)
    p1 = simulate_ctrw(model3, 5.0, rng.stream(7))
    p2 = simulate_ctrw(model3, 5.0, rng.stream(7))
    assert np.array_equal(p1.jump_times, p2.jump_times)
    assert np.array_equal(p1.states, p2.states)
    c1 = occupation_at(model3, [0.5, 1.0], 2000, rng)
    c2 = occupation_at(model3, [0.5, 1.0], 2000, rng)
    assert np.array_equal(c1, c2)
    # different stream or seed -> different draws
    p3 = simulate_ctrw(model3, 5.0, rng.stream(8))
    assert not np.array_equal(p1.jump_times, p3.jump_times)


def test_stable_subordinator_laplace_transform():
    # E exp(-s H_alpha(t)) = exp(-t s^alpha); at s = 1 this is exp(-t)
    rng = RngSpec(seed=1)
    stream = rng.stream()
    n = 20000
    for alpha, t in ((0.5, 1.0), (0.8, 2.0)):
        samples = np.array([sample_stable_subordinator(alpha, t, stream) for _ in range(n)])
        vals = np.exp(-samples)
        target = math.exp(-t)
        z = (vals.mean() - target) / (vals.std(ddof=1) / math.sqrt(n))
        assert abs(z) <= 4.0
        assert (samples > 0).all()


def test_stable_subordinator_self_similarity():
    rng = RngSpec(seed=2)
    alpha, t = 0.6, 3.0
    s1 = rng.stream(0)
    s2 = rng.stream(1)
    n = 5000
    a = np.array([sample_stable_subordinator(alpha, t, s1) for _ in range(n)])
    b = t ** (1.0 / alpha) * np.array([sample_stable_subordinator(alpha, 1.0, s2) for _ in range(n)])
    assert ks_2samp(a, b).pvalue > 0.01


def test_stable_subordinator_degenerate_limit():
    stream = RngSpec(seed=3).stream()
    samples = np.array([sample_stable_subordinator(0.999, 1.0, stream) for _ in range(2000)])
    assert 0.8 <= np.median(samples) <= 1.2


def test_ml_waiting_tail_probabilities():
    n = 100000
    stream = RngSpec(seed=4).stream()
    exp_draws = np.array([sample_ml_waiting(1.0, 2.0, stream) for _ in range(n)])
    p = (exp_draws > 1.0).mean()
    target = math.exp(-2.0)
    assert abs(p - target) <= 4.0 * math.sqrt(target * (1 - target) / n)

    stream = RngSpec(seed=5).stream()
    ml_draws = np.array([sample_ml_waiting(0.5, 1.0, stream) for _ in range(n)])
    p4 = (ml_draws > 4.0).mean()
    target4 = ml_survival(0.5, 1.0, 4.0)  # = E_{1/2}(-2) = 0.255395676...
    assert abs(p4 - target4) <= 4.0 * math.sqrt(target4 * (1 - target4) / n)
    # empirical Laplace transform at s=1: lambda / (lambda + s^alpha) = 1/2
    vals = np.exp(-ml_draws)
    z = (vals.mean() - 0.5) / (vals.std(ddof=1) / math.sqrt(n))
    assert abs(z) <= 4.0


def test_absorbing_start_single_record():
    m = birth_chain(3, 1.0, [0.5, 0.5, 0.5])  # state 2 absorbs
    p = simulate_ctrw(m, 10.0, RngSpec(seed=6).stream(), start=2)
    assert len(p.states) == 1 and p.states[0] == 2
    assert len(p.holding_times) == 0


def test_markov_occupation_matches_matrix_exponential():
    m = exponential_model([[0.0, 1.0], [1.0, 0.0]], [1.0, 1.0])
    n = 100000
    counts = occupation_at(m, [1.0], n, RngSpec(seed=7))
    assert counts.sum() == n
    est = counts[0] / n
    oracle = expm(build_generator(m).matrix)[0]
    se = np.sqrt(oracle * (1 - oracle) / n)
    assert np.abs(est - oracle).max() <= (4.0 * se).max()


def test_occupation_requires_sorted_times(model3):
    with pytest.raises(ValueError):
        occupation_at(model3, [1.0, 0.5], 10, RngSpec(seed=0))


def test_empirical_transition_absorbed_paths():
    m = birth_chain(3, 1.0, [0.5, 0.5, 0.5])
    paths = [simulate_ctrw(m, 1.0, RngSpec(seed=8).stream(k), start=2) for k in range(50)]
    est, se = empirical_transition(paths, 0.5, 2, 3)
    assert est[2] == 1.0 and se[2] == 0.0
    assert est.sum() == 1.0


def test_empirical_transition_sums_to_one(model3):
    paths = simulate_paths(model3, 2.0, 200, RngSpec(seed=9))
    est, se = empirical_transition(paths, 1.5, 0, 3)
    assert est.sum() == pytest.approx(1.0, abs=1e-15)
    assert (se >= 0).all()


def test_time_change_requires_ml_laws(model3_markov):
    with pytest.raises(TypeError):
        simulate_time_changed(model3_markov, 1.0, RngSpec(seed=0).stream())


def test_time_change_holding_law_agreement(model3):
    # the renewal construction and the time-changed Markov construction draw
    # holding times from the same per-state law (two-sample KS)
    rng_a = RngSpec(seed=10, stream_id=0)
    rng_b = RngSpec(seed=10, stream_id=1)
    pa = simulate_paths(model3, 30.0, 300, rng_a)
    pb = simulate_paths(model3, 30.0, 300, rng_b, time_changed=True)

    def holds_by_state(paths):
        by = [[] for _ in range(3)]
        for p in paths:
            for s, j in zip(p.states[:-1], p.holding_times):
                by[s].append(j)
        return [np.array(v) for v in by]

    ha, hb = holds_by_state(pa), holds_by_state(pb)
    for i in range(3):
        assert min(len(ha[i]), len(hb[i])) > 300
        assert ks_2samp(ha[i], hb[i]).pvalue > 0.01


def test_embedded_chain_matches_h(model3):
    # transition-count chi^2 against the embedded chain rows
    paths = simulate_paths(model3, 30.0, 200, RngSpec(seed=12))
    counts = np.zeros((3, 3))
    for p in paths:
        for a, b in zip(p.states[:-1], p.states[1:]):
            counts[a, b] += 1
    h = model3.embedded_chain
    for i in range(3):
        n_i = counts[i].sum()
        mask = h[i] > 0
        chi2 = ((counts[i, mask] - n_i * h[i, mask]) ** 2 / (n_i * h[i, mask])).sum()
        # df = mask.sum() - 1 = 1; chi2 critical value at 0.001 is 10.8
        assert chi2 <= 10.8


def test_boundary_truncation_warning():
    m = birth_chain(6, 5.0, [0.9] * 6)
    with pytest.warns(RuntimeWarning, match="truncation edge"):
        simulate_ctrw(m, 10.0, RngSpec(seed=13).stream(), start=1)

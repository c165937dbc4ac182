import itertools
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from strokehmm.features import extract_observations
from strokehmm.geometry import RawStroke, resample
from strokehmm.hmm import (
    LOG_ZERO,
    DiscreteHmm,
    EmptyObservations,
    LengthMismatch,
    path_log_score,
    viterbi,
    viterbi_decode,
)


def toy():
    return DiscreteHmm.from_probs(
        [0.6, 0.4],
        [[0.7, 0.3], [0.4, 0.6]],
        [[0.9, 0.1], [0.2, 0.8]],
    )


def brute_force(model, obs):
    n = model.n_states
    scored = [(path_log_score(model, obs, p), p) for p in itertools.product(range(n), repeat=len(obs))]
    return max(scored, key=lambda sp: sp[0])


def random_hmm(rng, n, sparsity=0.3):
    init = rng.random(n) * (rng.random(n) > sparsity / 2)
    if init.sum() == 0:
        init[0] = 1
    trans = rng.random((n, n)) * (rng.random((n, n)) > sparsity)
    for i in range(n):
        if trans[i].sum() == 0:
            trans[i, rng.integers(n)] = 1
    emis = rng.random((n, 3)) + 1e-3
    return DiscreteHmm.from_probs(init / init.sum(), trans / trans.sum(1, keepdims=True),
                                  emis / emis.sum(1, keepdims=True))


def test_toy_example():
    m = toy()
    path = viterbi(m, [0, 1, 1])
    assert path.states.tolist() == [0, 1, 1]
    assert math.exp(path.log_score) == pytest.approx(0.062208, abs=1e-12)
    # every one of the 8 paths, by hand
    probs = {}
    for p in itertools.product(range(2), repeat=3):
        pr = [0.6, 0.4][p[0]] * [[0.9, 0.1], [0.2, 0.8]][p[0]][0]
        for a, b, o in zip(p, p[1:], (1, 1)):
            pr *= [[0.7, 0.3], [0.4, 0.6]][a][b] * [[0.9, 0.1], [0.2, 0.8]][b][o]
        probs[p] = pr
    assert max(probs, key=probs.get) == (0, 1, 1)


def test_single_observation():
    m = toy()
    path = viterbi(m, [1])
    assert path.states.tolist() == [1]
    assert path.log_score == pytest.approx(math.log(0.4 * 0.8))


def test_empty_and_mismatch():
    with pytest.raises(EmptyObservations):
        viterbi(toy(), [])
    with pytest.raises(LengthMismatch):
        path_log_score(toy(), [0, 1], [0])


def test_missing_transition_sentinel():
    m = DiscreteHmm.from_probs([0.5, 0.5], [[1.0, 0.0], [0.5, 0.5]], [[0.5, 0.5], [0.5, 0.5]])
    assert path_log_score(m, [0, 0], [0, 1]) == LOG_ZERO
    assert viterbi(m, [0, 0, 0]).log_score > LOG_ZERO


def test_two_state_six_obs_brute_force():
    m = toy()
    obs = [0, 1, 1, 0, 0, 1]
    best, p = brute_force(m, obs)
    path = viterbi(m, obs)
    assert path.log_score == pytest.approx(best, abs=1e-9)
    assert path_log_score(m, obs, path.states) == pytest.approx(best, abs=1e-9)


def test_ties_go_to_lower_index():
    m = DiscreteHmm.from_probs([0.5, 0.5], [[0.5, 0.5], [0.5, 0.5]], [[1.0], [1.0]])
    assert viterbi(m, [0, 0, 0]).states.tolist() == [0, 0, 0]


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 5), st.integers(1, 6))
def test_matches_enumeration(seed, n, t):
    rng = np.random.default_rng(seed)
    m = random_hmm(rng, n)
    obs = rng.integers(0, 3, t).tolist()
    best, _ = brute_force(m, obs)
    path = viterbi(m, obs)
    assert path.log_score == pytest.approx(best, abs=1e-9)
    assert path_log_score(m, obs, path.states) == pytest.approx(path.log_score, abs=1e-9)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-50, 50))
def test_constant_emission_shift(seed, c):
    rng = np.random.default_rng(seed)
    m = random_hmm(rng, 4)
    obs = rng.integers(0, 3, 7)
    emis = m.log_emissions(obs)
    src, dst, lp = m.transition_arrays()
    a = viterbi_decode(m.initial_logp, src, dst, lp, emis)
    b = viterbi_decode(m.initial_logp, src, dst, lp, emis + c)
    assert a.states.tolist() == b.states.tolist()
    assert b.log_score == pytest.approx(a.log_score + 7 * c, abs=1e-9)


def _line_obs():
    rs = resample(RawStroke.from_points([[0, 0], [10, 0]]), 1.0)
    return extract_observations(rs)


def test_straight_line_structured(structured):
    obs = _line_obs()
    path = viterbi(structured, obs)
    assert path.states.tolist() == [16] * 11
    assert path_log_score(structured, obs, path.states) == pytest.approx(path.log_score, abs=1e-9)


class _Slice:
    """Structured model restricted to a few states, fed observation indices."""

    def __init__(self, model, keep, obs):
        self.keep = list(keep)
        pos = {s: i for i, s in enumerate(self.keep)}
        src, dst, lp = model.transition_arrays()
        sel = [(pos[a], pos[b], x) for a, b, x in zip(src, dst, lp) if a in pos and b in pos]
        self.src, self.dst, self.lp = (np.array(c) for c in zip(*sel))
        self.initial_logp = model.initial_logp[self.keep]
        self.table = model.log_emissions(obs)[:, self.keep]

    @property
    def n_states(self):
        return len(self.keep)

    def transition_arrays(self):
        return self.src, self.dst, self.lp

    def log_emissions(self, idx):
        return self.table[np.asarray(idx, dtype=int)]


def test_line_against_reduced_slice(structured):
    sl = _Slice(structured, [0, 8, 16, 17], _line_obs())
    idx = list(range(7))
    best, p = brute_force(sl, idx)
    assert [sl.keep[i] for i in p] == [16] * 7
    assert viterbi(sl, idx).log_score == pytest.approx(best, abs=1e-9)


def test_deterministic_across_threads(structured):
    rng = np.random.default_rng(5)
    raws = [RawStroke.from_points(np.cumsum(rng.normal(0, 1, (60, 2)), axis=0)) for _ in range(8)]
    obs = [extract_observations(resample(r, 1.0)) for r in raws]
    serial = [viterbi(structured, o).states.tolist() for o in obs]
    with ThreadPoolExecutor(4) as pool:
        threaded = list(pool.map(lambda o: viterbi(structured, o).states.tolist(), obs))
    assert serial == threaded

"""Log-space Viterbi decoding over sparse transition lists.

Nothing in here knows about strokes. A model is anything exposing
``n_states``, ``initial_logp`` (shape ``(N,)``), ``transition_arrays()``
returning ``(src, dst, logp)`` and ``log_emissions(obs)`` returning a
``(T, N)`` array.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# finite stand-in for log(0); sums of a few of these stay finite
LOG_ZERO = -1e300


class EmptyObservations(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


@dataclass(frozen=True)
class StatePath:
    states: np.ndarray
    log_score: float

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class DiscreteHmm:
    """Small HMM with a discrete emission table, mostly for testing the decoder."""

    initial_logp: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    logp: np.ndarray
    emission_logp: np.ndarray  # (N, n_symbols)

    @classmethod
    def from_probs(cls, initial, transition, emission) -> "DiscreteHmm":
        """Build from dense probability arrays; zero entries become absent edges."""
        initial = np.asarray(initial, dtype=float)
        transition = np.asarray(transition, dtype=float)
        emission = np.asarray(emission, dtype=float)
        src, dst = np.nonzero(transition > 0)
        with np.errstate(divide="ignore"):
            init = np.where(initial > 0, np.log(initial), LOG_ZERO)
            emis = np.where(emission > 0, np.log(emission), LOG_ZERO)
        return cls(init, src, dst, np.log(transition[src, dst]), emis)

    @property
    def n_states(self) -> int:
        return len(self.initial_logp)

    def transition_arrays(self):
        return self.src, self.dst, self.logp

    def log_emissions(self, obs) -> np.ndarray:
        return self.emission_logp[:, np.asarray(obs, dtype=int)].T


def viterbi(model, obs, return_margins: bool = False):
    """Most probable state path of ``obs`` under ``model``.

    Ties are broken towards the lower predecessor index (and the lower final
    state), so the result is fully deterministic. With ``return_margins``
    a second array gives, per step, the gap between the best and the
    runner-up partial score.
    """
    if len(obs) == 0:
        raise EmptyObservations("cannot decode an empty observation sequence")
    emis = np.maximum(np.asarray(model.log_emissions(obs), dtype=float), LOG_ZERO)
    src, dst, logp = model.transition_arrays()
    return viterbi_decode(model.initial_logp, src, dst, logp, emis, return_margins)


def viterbi_decode(initial_logp, src, dst, logp, emissions, return_margins=False):
    init = np.maximum(np.asarray(initial_logp, dtype=float), LOG_ZERO)
    T, N = emissions.shape
    src = np.asarray(src, dtype=np.intp)
    dst = np.asarray(dst, dtype=np.intp)
    logp = np.asarray(logp, dtype=float)

    order = np.lexsort((src, dst))
    src, dst, logp = src[order], dst[order], logp[order]
    targets, starts, counts = np.unique(dst, return_index=True, return_counts=True)
    n_edges = len(src)
    edge_ids = np.arange(n_edges)

    delta = np.maximum(init + emissions[0], LOG_ZERO)
    back = np.zeros((T, N), dtype=np.intp)
    margins = np.zeros(T)
    if return_margins:
        margins[0] = _margin(delta)
    for t in range(1, T):
        new = np.full(N, LOG_ZERO)
        if n_edges:
            cand = delta[src] + logp
            best = np.maximum.reduceat(cand, starts)
            hit = cand == np.repeat(best, counts)
            first = np.minimum.reduceat(np.where(hit, edge_ids, n_edges), starts)
            new[targets] = best + emissions[t, targets]
            back[t, targets] = src[first]
        delta = np.maximum(new, LOG_ZERO)
        if return_margins:
            margins[t] = _margin(delta)

    path = np.empty(T, dtype=np.intp)
    path[-1] = int(np.argmax(delta))
    for t in range(T - 1, 0, -1):
        path[t - 1] = back[t, path[t]]
    result = StatePath(states=path, log_score=float(delta[path[-1]]))
    return (result, margins) if return_margins else result


def _margin(delta: np.ndarray) -> float:
    if len(delta) < 2:
        return float("inf")
    top2 = np.partition(delta, -2)[-2:]
    return float(top2[1] - top2[0])


def path_log_score(model, obs, path) -> float:
    """Exact log joint score of ``path``; :data:`LOG_ZERO` if it uses a missing edge."""
    path = np.asarray(path, dtype=np.intp)
    if len(path) != len(obs):
        raise LengthMismatch(f"path length {len(path)} != observation length {len(obs)}")
    if len(path) == 0:
        raise EmptyObservations("empty path")
    emis = np.asarray(model.log_emissions(obs), dtype=float)
    src, dst, logp = model.transition_arrays()
    table = {(int(a), int(b)): float(lp) for a, b, lp in zip(src, dst, logp)}
    score = float(model.initial_logp[path[0]])
    if score <= LOG_ZERO:
        return LOG_ZERO
    score += float(emis[0, path[0]])
    for t in range(1, len(path)):
        lp = table.get((int(path[t - 1]), int(path[t])))
        if lp is None:
            return LOG_ZERO
        score += lp + float(emis[t, path[t]])
    return max(score, LOG_ZERO)

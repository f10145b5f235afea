"""Sentence-level scoring, Viterbi decoding and forward-backward.

Two lattice flavors cover the two model variants:

* unary: one score vector per position, combined with a learned
  transition matrix (initial row + tag-to-tag rows).
* pairwise: scores conditioned on the previous tag; position 0 holds the
  start-conditioned vector, later positions a (prev, cur) matrix each.
  No separate transition matrix.

Ties in Viterbi go to the lowest tag index at the latest differing
position; the first-maximum backtrace below implements exactly that.
"""

from __future__ import annotations

import numpy as np

from .corpus import split_tag


def logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    """Stable log(sum(exp(a))); tolerates -inf entries."""
    a = np.asarray(a, dtype=np.float64)
    amax = np.max(a, axis=axis, keepdims=True)
    amax_safe = np.where(np.isfinite(amax), amax, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(np.exp(a - amax_safe), axis=axis, keepdims=True)) + amax_safe
    out = np.where(np.isfinite(amax), out, amax)
    if axis is None:
        return float(out.reshape(()))
    return np.squeeze(out, axis=axis)


class TransitionMatrix:
    """(n_tags + 1, n_tags) score table; row 0 holds initial scores."""

    def __init__(self, n_tags: int):
        if n_tags < 1:
            raise ValueError("n_tags must be >= 1")
        self.A = np.zeros((n_tags + 1, n_tags), dtype=np.float64)

    @property
    def n_tags(self) -> int:
        return self.A.shape[1]

    @property
    def initial(self) -> np.ndarray:
        return self.A[0]

    @property
    def pair(self) -> np.ndarray:
        """(n_tags, n_tags) block of tag-to-tag scores."""
        return self.A[1:]


class TagLattice:
    """Per-sentence scores ready for decoding.

    ``unary`` holds one (n, T) array; ``pairwise`` holds a start vector
    (T,) and an (n - 1, T, T) stack indexed [position - 1, prev, cur].
    """

    def __init__(self, kind: str, scores=None, start=None, pairs=None):
        if kind not in ("unary", "pairwise"):
            raise ValueError(f"unknown lattice kind {kind!r}")
        self.kind = kind
        if kind == "unary":
            scores = np.asarray(scores, dtype=np.float64)
            if scores.ndim != 2 or scores.shape[0] < 1:
                raise ValueError("unary lattice needs scores of shape (n, n_tags), n >= 1")
            if not np.all(np.isfinite(scores)):
                raise ValueError("lattice scores must be finite")
            self.scores = scores
        else:
            start = np.asarray(start, dtype=np.float64)
            if start.ndim != 1:
                raise ValueError("pairwise lattice needs a 1-d start vector")
            n_tags = start.shape[0]
            if pairs is None:
                pairs = np.zeros((0, n_tags, n_tags))
            pairs = np.asarray(pairs, dtype=np.float64)
            if pairs.ndim != 3 or pairs.shape[1:] != (n_tags, n_tags):
                raise ValueError("pairwise lattice needs pairs of shape (n-1, n_tags, n_tags)")
            if not (np.all(np.isfinite(start)) and np.all(np.isfinite(pairs))):
                raise ValueError("lattice scores must be finite")
            self.start = start
            self.pairs = pairs

    @classmethod
    def unary(cls, scores) -> "TagLattice":
        return cls("unary", scores=scores)

    @classmethod
    def pairwise(cls, start, pairs=None) -> "TagLattice":
        return cls("pairwise", start=start, pairs=pairs)

    def __len__(self) -> int:
        if self.kind == "unary":
            return self.scores.shape[0]
        return self.pairs.shape[0] + 1

    @property
    def n_tags(self) -> int:
        if self.kind == "unary":
            return self.scores.shape[1]
        return self.start.shape[0]


def _check_transitions(lattice: TagLattice, transitions: TransitionMatrix | None):
    if lattice.kind == "unary":
        if transitions is None:
            raise ValueError("unary lattice requires a transition matrix")
        if transitions.n_tags != lattice.n_tags:
            raise ValueError("transition matrix size does not match lattice")
    elif transitions is not None:
        raise ValueError("pairwise lattice does not take a transition matrix")


def _step_scores(lattice: TagLattice, transitions, position: int) -> np.ndarray:
    """(prev, cur) score matrix for moving into ``position`` >= 1."""
    if lattice.kind == "unary":
        return transitions.pair + lattice.scores[position]
    return lattice.pairs[position - 1]


def _initial_scores(lattice: TagLattice, transitions) -> np.ndarray:
    if lattice.kind == "unary":
        return transitions.initial + lattice.scores[0]
    return lattice.start.copy()


def sentence_score(lattice: TagLattice, tags, transitions: TransitionMatrix | None = None) -> float:
    """Score of one tag path through the lattice."""
    _check_transitions(lattice, transitions)
    tags = list(tags)
    if len(tags) != len(lattice):
        raise ValueError(f"got {len(tags)} tags for a {len(lattice)}-position lattice")
    total = _initial_scores(lattice, transitions)[tags[0]]
    for i in range(1, len(tags)):
        total += _step_scores(lattice, transitions, i)[tags[i - 1], tags[i]]
    return float(total)


def viterbi(lattice: TagLattice, transitions: TransitionMatrix | None = None,
            mask: np.ndarray | None = None) -> tuple[list[int], float]:
    """Best path and its score; optional (T+1, T) allowed-transition mask."""
    _check_transitions(lattice, transitions)
    n, n_tags = len(lattice), lattice.n_tags
    delta = _initial_scores(lattice, transitions)
    if mask is not None:
        delta = np.where(mask[0], delta, -np.inf)
    back = np.zeros((n, n_tags), dtype=np.intp)
    for i in range(1, n):
        cand = delta[:, None] + _step_scores(lattice, transitions, i)
        if mask is not None:
            cand = np.where(mask[1:], cand, -np.inf)
        back[i] = np.argmax(cand, axis=0)
        delta = cand[back[i], np.arange(n_tags)]
    best_last = int(np.argmax(delta))
    path = [best_last]
    for i in range(n - 1, 0, -1):
        path.append(int(back[i][path[-1]]))
    path.reverse()
    return path, float(delta[best_last])


def log_partition(lattice: TagLattice, transitions: TransitionMatrix | None = None) -> float:
    """log sum over all tag paths of exp(path score), forward algorithm."""
    _check_transitions(lattice, transitions)
    alpha = _initial_scores(lattice, transitions)
    for i in range(1, len(lattice)):
        alpha = logsumexp(alpha[:, None] + _step_scores(lattice, transitions, i), axis=0)
    return float(logsumexp(alpha))


def forward_backward(lattice: TagLattice, transitions: TransitionMatrix | None = None):
    """Posterior marginals under the lattice distribution.

    Returns (log_z, unary (n, T), pairwise (n-1, T, T)); unary rows each
    sum to 1, pairwise[i] sums to 1 and marginalizes consistently.
    """
    _check_transitions(lattice, transitions)
    n, n_tags = len(lattice), lattice.n_tags
    alpha = np.empty((n, n_tags))
    alpha[0] = _initial_scores(lattice, transitions)
    for i in range(1, n):
        alpha[i] = logsumexp(alpha[i - 1][:, None] + _step_scores(lattice, transitions, i), axis=0)
    log_z = float(logsumexp(alpha[n - 1]))
    beta = np.zeros((n, n_tags))
    for i in range(n - 2, -1, -1):
        beta[i] = logsumexp(_step_scores(lattice, transitions, i + 1) + beta[i + 1][None, :], axis=1)
    unary = np.exp(alpha + beta - log_z)
    pair = np.empty((n - 1, n_tags, n_tags))
    for i in range(1, n):
        pair[i - 1] = np.exp(alpha[i - 1][:, None] + _step_scores(lattice, transitions, i)
                             + beta[i][None, :] - log_z)
    return log_z, unary, pair


def crf_nll_and_gradients(lattice: TagLattice, gold, transitions: TransitionMatrix):
    """Sentence NLL and its gradients for the unary + transitions variant.

    Returns (loss, d_emissions (n, T), d_transitions (T+1, T)); the
    emission gradient is marginal minus gold indicator, entrywise in
    [-1, 1].
    """
    if lattice.kind != "unary":
        raise ValueError("CRF loss applies to unary lattices only")
    gold = list(gold)
    n, n_tags = len(lattice), lattice.n_tags
    if len(gold) != n:
        raise ValueError(f"got {len(gold)} gold tags for a {n}-position lattice")
    if any(not 0 <= t < n_tags for t in gold):
        raise ValueError("gold tag id out of range")
    log_z, unary, pair = forward_backward(lattice, transitions)
    loss = log_z - sentence_score(lattice, gold, transitions)
    d_emissions = unary.copy()
    d_transitions = np.zeros_like(transitions.A)
    d_transitions[0] = unary[0]
    d_transitions[0, gold[0]] -= 1.0
    for i in range(n):
        d_emissions[i, gold[i]] -= 1.0
    for i in range(1, n):
        d_transitions[1:] += pair[i - 1]
        d_transitions[gold[i - 1] + 1, gold[i]] -= 1.0
    return float(loss), d_emissions, d_transitions


def softmax_nll_rows(rows: np.ndarray, gold) -> tuple[float, np.ndarray]:
    """Summed per-row softmax NLL and gradient w.r.t. the row scores.

    Used by the tag-embedding variant during training, where row i holds
    scores conditioned on the gold previous tag.
    """
    rows = np.asarray(rows, dtype=np.float64)
    gold = list(gold)
    if rows.ndim != 2 or len(gold) != rows.shape[0]:
        raise ValueError("rows must be (n, n_tags) with one gold tag per row")
    if any(not 0 <= t < rows.shape[1] for t in gold):
        raise ValueError("gold tag id out of range")
    log_norm = logsumexp(rows, axis=1)
    idx = np.arange(rows.shape[0])
    loss = float(np.sum(log_norm - rows[idx, gold]))
    d_rows = np.exp(rows - log_norm[:, None])
    d_rows[idx, gold] -= 1.0
    return loss, d_rows


def iob_transition_mask(tag_names) -> np.ndarray:
    """(T+1, T) boolean matrix of transitions valid under IOB2.

    Row 0 is the sentence start.  I-X is reachable only from B-X or I-X.
    """
    tag_names = list(tag_names)
    n = len(tag_names)
    kinds = [split_tag(t) for t in tag_names]
    if any(k is None for k in kinds):
        bad = tag_names[[i for i, k in enumerate(kinds) if k is None][0]]
        raise ValueError(f"malformed tag {bad!r}")
    mask = np.ones((n + 1, n), dtype=bool)
    for j, (prefix_j, type_j) in enumerate(kinds):
        if prefix_j != "I":
            continue
        mask[0, j] = False
        for i, (prefix_i, type_i) in enumerate(kinds):
            ok = prefix_i in ("B", "I") and type_i == type_j
            mask[i + 1, j] = ok
    return mask

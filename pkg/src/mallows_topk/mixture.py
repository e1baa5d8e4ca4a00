"""Concentric two-component mixtures: sampling, mean-distance statistics,
separation of expert/non-expert rankings, and the theoretical bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DimensionError, ValidationError, VacuousBoundError
from .model import MallowsModel, RandomSource, log_likelihood, sample_topk
from .rankings import Permutation, TopKRanking


@dataclass(frozen=True)
class ConcentricMixture:
    """Two Mallows components sharing one consensus: experts (theta_g) are at
    least as concentrated as non-experts (theta_b); r = expert proportion."""

    sigma0: Permutation
    theta_g: float
    theta_b: float
    r: float

    def __post_init__(self):
        if self.theta_b > self.theta_g:
            raise ValidationError("non-expert dispersion must not exceed expert dispersion")
        if not 0.0 <= self.r <= 1.0:
            raise ValidationError("r must lie in [0, 1]")

    def expert_model(self) -> MallowsModel:
        return MallowsModel(self.sigma0.n, self.sigma0, self.theta_g)

    def nonexpert_model(self) -> MallowsModel:
        return MallowsModel(self.sigma0.n, self.sigma0, self.theta_b)


class GroundTruth:
    """Component labels of a synthetic draw, kept out of the fitting path;
    only evaluation code should touch this."""

    def __init__(self, expert_flags: Sequence[bool]):
        self._flags = tuple(bool(f) for f in expert_flags)

    @property
    def expert_flags(self) -> tuple:
        return self._flags

    def misclassification(self, predicted_expert: Sequence[bool]) -> float:
        """Error fraction, minimized over the two ways of matching cluster
        labels to components."""
        pred = [bool(p) for p in predicted_expert]
        if len(pred) != len(self._flags):
            raise DimensionError("label vectors differ in length")
        direct = sum(p != t for p, t in zip(pred, self._flags))
        flipped = len(pred) - direct
        return min(direct, flipped) / len(pred)


class MixtureDraw(NamedTuple):
    rankings: list
    truth: GroundTruth


def sample_mixture(mix: ConcentricMixture, k: int, m: int, rng: RandomSource) -> MixtureDraw:
    """m i.i.d. draws; each picks the expert component with probability r."""
    flags = rng.generator.random(m) < mix.r
    n_expert = int(flags.sum())
    expert_draws = sample_topk(mix.expert_model(), k, n_expert, rng)
    other_draws = sample_topk(mix.nonexpert_model(), k, m - n_expert, rng)
    rankings = []
    it_e, it_o = iter(expert_draws), iter(other_draws)
    for f in flags:
        rankings.append(next(it_e) if f else next(it_o))
    return MixtureDraw(rankings, GroundTruth(flags.tolist()))


# ---------------------------------------------------------------------------
# Mean-distance statistics
# ---------------------------------------------------------------------------


def _pair_sign_matrix(sample: Sequence[TopKRanking]) -> np.ndarray:
    """(m, n(n-1)/2) sign of the rank difference of each item pair, with the
    per-ranking sentinel so undetermined pairs carry sign 0."""
    n = sample[0].n
    if any(s.n != n for s in sample):
        raise DimensionError("sample has mixed item counts")
    ranks = np.array([s.rank_array() for s in sample], dtype=np.int64)
    cols = []
    for i in range(n):
        for j in range(i + 1, n):
            cols.append(np.sign(ranks[:, i] - ranks[:, j]))
    return np.stack(cols, axis=1)


def pairwise_topk_distances(sample: Sequence[TopKRanking]) -> np.ndarray:
    """Exact all-pairs top-k Kendall distance matrix (integer arithmetic,
    schedule-independent)."""
    signs = _pair_sign_matrix(sample)
    nonzero = np.abs(signs) @ np.abs(signs).T
    dot = signs @ signs.T
    return (nonzero - dot) // 2


def mean_distances(sample: Sequence[TopKRanking]) -> np.ndarray:
    """delta_sigma: mean distance of each ranking to all the others."""
    m = len(sample)
    if m < 2:
        raise ValidationError("need at least two rankings")
    d = pairwise_topk_distances(sample)
    return d.sum(axis=1) / (m - 1)


def hoeffding_counterparts(n: int, target: float, epsilon: float) -> int:
    """Counterparts per ranking so that |approx - E[d]| <= target w.p. >= 1-eps."""
    if target <= 0:
        raise ValidationError("target accuracy must be positive")
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    span = n * (n - 1) / 2
    return math.ceil((span / target) ** 2 * math.log(2 / epsilon) / 2)


def approx_mean_distances(sample: Sequence[TopKRanking], target: float,
                          epsilon: float, rng: RandomSource) -> np.ndarray:
    """Subsampled delta estimates; falls back to the exact mean when the
    required counterpart count reaches m-1."""
    m = len(sample)
    if m < 2:
        raise ValidationError("need at least two rankings")
    t = hoeffding_counterparts(sample[0].n, target, epsilon)
    if t >= m - 1:
        return mean_distances(sample)
    signs = _pair_sign_matrix(sample)
    gen = rng.generator
    out = np.empty(m)
    for i in range(m):
        others = gen.integers(0, m - 1, size=t)
        others = others + (others >= i)  # uniform over indices != i
        prods = signs[i][None, :] * signs[others]
        out[i] = (prods < 0).sum(axis=1).mean()
    return out


# ---------------------------------------------------------------------------
# Separation
# ---------------------------------------------------------------------------


@dataclass
class SeparationResult:
    deltas: np.ndarray
    expert_flags: tuple          # True = assigned to the tighter cluster
    threshold: Optional[float]
    theta_g_hat: float
    theta_b_hat: float
    r_hat: float
    consensus: Permutation
    degenerate: bool = False

    def to_csv(self) -> str:
        rows = ["index,delta,label"]
        for i, (d, f) in enumerate(zip(self.deltas, self.expert_flags)):
            rows.append(f"{i},{d:.10g},{'expert' if f else 'nonexpert'}")
        return "\n".join(rows) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "theta_g_hat": self.theta_g_hat,
            "theta_b_hat": self.theta_b_hat,
            "r_hat": self.r_hat,
            "degenerate": self.degenerate,
            "consensus": [i + 1 for i in self.consensus.items_by_rank()],
        }


def _two_means_split(sorted_x: np.ndarray) -> int:
    """Split index minimizing within-cluster sum of squares (exact 1-D 2-means)."""
    m = len(sorted_x)
    s1 = np.cumsum(sorted_x)
    s2 = np.cumsum(sorted_x**2)
    counts = np.arange(1, m)
    left = s2[:-1] - s1[:-1] ** 2 / counts
    right = (s2[-1] - s2[:-1]) - (s1[-1] - s1[:-1]) ** 2 / (m - counts)
    return int(np.argmin(left + right)) + 1


def _largest_gap_split(sorted_x: np.ndarray) -> int:
    """Split at the largest adjacent gap (single-linkage-equivalent in 1-D)."""
    return int(np.argmax(np.diff(sorted_x))) + 1


def separate(sample: Sequence[TopKRanking], method: str = "2means") -> SeparationResult:
    """Label each ranking expert/non-expert from its mean distance to the rest.

    Deterministic given the sample; ties at the threshold go to the expert
    (lower-delta) cluster.  Identical deltas yield a degenerate single-cluster
    result rather than an error.
    """
    from . import estimation  # deferred: estimation.eborda uses separate

    if method not in ("2means", "gap"):
        raise ValidationError(f"unknown method {method!r}")
    m = len(sample)
    deltas = mean_distances(sample)
    consensus = estimation.borda(sample)
    k = max(s.k for s in sample)
    if np.ptp(deltas) == 0:
        theta = estimation.estimate_theta_mle(sample, consensus, k)
        return SeparationResult(deltas, (True,) * m, None, theta, theta, 1.0,
                                consensus, degenerate=True)
    order = np.sort(deltas)
    if method == "2means":
        split = _two_means_split(order)
    else:
        split = _largest_gap_split(order)
    threshold = 0.5 * (order[split - 1] + order[split])
    flags = tuple(bool(d <= threshold) for d in deltas)
    experts = [s for s, f in zip(sample, flags) if f]
    others = [s for s, f in zip(sample, flags) if not f]
    theta_g = estimation.estimate_theta_mle(experts, consensus, k) if experts else 0.0
    theta_b = estimation.estimate_theta_mle(others, consensus, k) if others else 0.0
    r_hat = len(experts) / m
    return SeparationResult(deltas, flags, float(threshold), theta_g, theta_b,
                            r_hat, consensus)


# ---------------------------------------------------------------------------
# Theoretical bounds
# ---------------------------------------------------------------------------


def separation_gap(c: float, r: float, expected_gamma_dist: float) -> float:
    """Guaranteed E[delta_beta - delta_gamma] lower bound: (c-2) r E[d(gamma, sigma0)]."""
    if c <= 2:
        raise VacuousBoundError("the separation bound requires c > 2")
    if not 0 < r <= 1:
        raise VacuousBoundError("r must lie in (0, 1]")
    return (c - 2) * r * expected_gamma_dist


def min_sample_size(n: int, c: float, r: float, expected_gamma_dist: float,
                    epsilon: float) -> int:
    """Samples sufficient for high-probability separation of the two clusters."""
    gap = separation_gap(c, r, expected_gamma_dist)
    if not 0 < epsilon < 1:
        raise ValidationError("epsilon must lie in (0, 1)")
    return math.ceil((n * (n - 1) / gap) ** 2 * math.log(2 / epsilon) / 2)


# ---------------------------------------------------------------------------
# Mixture likelihood and fitting
# ---------------------------------------------------------------------------


def mixture_log_likelihood(mix: ConcentricMixture, sample: Sequence[TopKRanking]) -> float:
    if not sample:
        raise ValidationError("sample must be non-empty")
    good = mix.expert_model()
    bad = mix.nonexpert_model()
    if mix.r == 1.0:
        return log_likelihood(good, sample)
    if mix.r == 0.0:
        return log_likelihood(bad, sample)
    lr, lq = math.log(mix.r), math.log1p(-mix.r)
    total = 0.0
    for s in sample:
        total += np.logaddexp(lr + good.log_topk_probability(s),
                              lq + bad.log_topk_probability(s))
    return float(total)


def fit_mixture(sample: Sequence[TopKRanking], method: str = "2means") -> ConcentricMixture:
    """Cluster-then-estimate fit.  The single-component member of the family
    (equal dispersions) is kept instead whenever it scores a higher
    likelihood, so the fit never loses to the nested model."""
    from . import estimation

    result = separate(sample, method=method)
    consensus = result.consensus
    single_theta = estimation.estimate_theta_mle(sample, consensus,
                                                 max(s.k for s in sample))
    single = ConcentricMixture(consensus, single_theta, single_theta, 1.0)
    if result.degenerate or result.r_hat in (0.0, 1.0):
        return single
    theta_g = max(result.theta_g_hat, result.theta_b_hat)
    theta_b = min(result.theta_g_hat, result.theta_b_hat)
    split = ConcentricMixture(consensus, theta_g, theta_b, result.r_hat)
    if mixture_log_likelihood(split, sample) >= mixture_log_likelihood(single, sample):
        return split
    return single

"""Marginal-likelihood scoring for Gaussian network structures.

The closed-form machinery: the Wishart normalizing constant, conjugate
normal-Wishart posterior updates, the exact marginal likelihood of complete
data under a complete structure, the per-variable local scores that extend
it to arbitrary structures, and two independent validation oracles (a
constructive Wishart Monte-Carlo estimator and, in the tests, direct
quadrature).

All densities live in natural-log space end to end; convert to base-10
scientific notation only when presenting results.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import gammaln, logsumexp

from .data import Dataset, SufficientStats, stats
from .errors import (
    DimensionMismatchError,
    EmptyInputError,
    GammaDomainError,
    NonIntegerAlphaError,
)
from .linalg import log_det, spd_factor, submatrix
from .network import Dag, topological_order
from .priors import NormalWishartPrior, StructurePrior, log_structure_prior

LOG_2PI = math.log(2.0 * math.pi)


def log_wishart_norm(n: int, alpha: float) -> float:
    """Log normalizing constant of the n-dimensional Wishart density.

    The density with ``alpha`` degrees of freedom and precision hyperparameter
    T is ``c * |T|**(alpha/2) * |W|**((alpha-n-1)/2) * exp(-tr(T W)/2)``;
    this returns ``log c``:

        -[ (alpha*n/2) log 2 + (n(n-1)/4) log pi
           + sum_{i=1..n} lgamma((alpha + 1 - i)/2) ]

    Requires ``alpha > n - 1`` so every gamma argument is positive.
    """
    if n < 1:
        raise GammaDomainError(f"dimension must be at least 1, got {n}")
    args = (alpha + 1.0 - np.arange(1, n + 1)) / 2.0
    if np.any(args <= 0.0):
        raise GammaDomainError(
            f"alpha = {alpha} gives a nonpositive gamma argument at n = {n}"
        )
    return float(
        -(alpha * n / 2.0) * math.log(2.0)
        - (n * (n - 1) / 4.0) * math.log(math.pi)
        - gammaln(args).sum()
    )


@dataclass(frozen=True, eq=False)
class NormalWishartPosterior:
    """Updated normal-Wishart hyperparameters after observing data."""

    mu: np.ndarray
    t: np.ndarray
    nu: float
    alpha: float

    def as_prior(self) -> NormalWishartPrior:
        """Reinterpret the posterior as the prior for further updating."""
        return NormalWishartPrior(self.mu, self.t, self.nu, self.alpha)


def _updated_t(prior: NormalWishartPrior, s: SufficientStats) -> np.ndarray:
    m = s.count
    shrink = prior.nu * m / (prior.nu + m) if m else 0.0
    diff = prior.mu0 - s.mean
    return prior.t0 + s.scatter + shrink * np.outer(diff, diff)


def update_posterior(
    prior: NormalWishartPrior, s: SufficientStats
) -> NormalWishartPosterior:
    """Conjugate update of a normal-Wishart prior with sufficient statistics.

    The location becomes the sample-size weighted average of prior location
    and sample mean; the Wishart hyperparameter gains the scatter plus a
    shrinkage term in the location-mean gap; both sample sizes grow by the
    case count.
    """
    if s.mean.shape != prior.mu0.shape:
        raise DimensionMismatchError(
            f"stats dimension {s.mean.shape} does not match prior {prior.mu0.shape}"
        )
    m = s.count
    if m == 0:
        return NormalWishartPosterior(prior.mu0, prior.t0, prior.nu, prior.alpha)
    mu = (prior.nu * prior.mu0 + m * s.mean) / (prior.nu + m)
    return NormalWishartPosterior(
        mu=mu, t=_updated_t(prior, s), nu=prior.nu + m, alpha=prior.alpha + m
    )


def _log_marginal_stats(prior: NormalWishartPrior, s: SufficientStats) -> float:
    """Closed-form log marginal likelihood from sufficient statistics."""
    n = prior.dim
    if n == 0:
        return 0.0  # the empty-set marginal is 1
    m = s.count
    return (
        -0.5 * n * m * LOG_2PI
        + 0.5 * n * (math.log(prior.nu) - math.log(prior.nu + m))
        + log_wishart_norm(n, prior.alpha)
        - log_wishart_norm(n, prior.alpha + m)
        + 0.5 * prior.alpha * log_det(prior.t0)
        - 0.5 * (prior.alpha + m) * log_det(_updated_t(prior, s))
    )


def log_marginal_complete(prior: NormalWishartPrior, d: Dataset) -> float:
    """Log marginal likelihood of a complete dataset under the complete
    structure on its variables.

    This is the telescoped product of the sequential predictive densities;
    the zero-variable and zero-case datasets both yield log 1 = 0.
    """
    if d.width != prior.dim:
        raise DimensionMismatchError(
            f"dataset has {d.width} variables, prior has {prior.dim}"
        )
    return _log_marginal_stats(prior, stats(d))


def log_predictive(prior: NormalWishartPrior, case) -> float:
    """Log predictive density of a single case: the multivariate-t form.

    Identical to :func:`log_marginal_complete` on the one-case dataset.
    """
    case = np.asarray(case, dtype=float).reshape(-1)
    if case.size != prior.dim:
        raise DimensionMismatchError(
            f"case has {case.size} entries, prior has {prior.dim}"
        )
    single = SufficientStats(1, case, np.zeros((case.size, case.size)))
    return _log_marginal_stats(prior, single)


# ---------------------------------------------------------------------------
# local scores and structure scores


@dataclass(frozen=True)
class LocalScoreKey:
    """Cache key for one child/parent-set score against one scoring context.

    The digest hashes both the dataset content and the prior
    hyperparameters, so one cache can safely serve multiple contexts.
    """

    child: str
    parents: tuple[str, ...]
    dataset_digest: str


class LocalScoreCache:
    """Concurrent-friendly memo of local scores.

    Lookups are plain dict reads; inserts go through ``setdefault``, so a
    key is bound exactly once even if two threads compute it concurrently
    (the values are idempotent, so duplicate computation is harmless).
    """

    def __init__(self):
        self._scores: dict[LocalScoreKey, float] = {}
        self.hits = 0
        self.misses = 0

    def __len__(self) -> int:
        return len(self._scores)

    def get_or_compute(self, key: LocalScoreKey, compute: Callable[[], float]) -> float:
        value = self._scores.get(key)
        if value is not None:
            self.hits += 1
            return value
        self.misses += 1
        return self._scores.setdefault(key, compute())


def context_digest(d: Dataset, prior: NormalWishartPrior) -> str:
    combined = hashlib.sha256()
    combined.update(d.digest.encode())
    combined.update(prior.digest.encode())
    return combined.hexdigest()


def _restricted_marginal(
    prior: NormalWishartPrior, full: SufficientStats, idx: Sequence[int]
) -> float:
    """Marginal of the data restricted to ``idx``: restrict the location,
    the Wishart hyperparameter, and the statistics; keep nu, alpha, and the
    case count unchanged."""
    idx = list(idx)
    if not idx:
        return 0.0
    sub_stats = SufficientStats(
        full.count, full.mean[idx], submatrix(full.scatter, idx)
    )
    return _log_marginal_stats(prior.restrict(idx), sub_stats)


def local_score(
    child: str,
    parents: Iterable[str],
    d: Dataset,
    prior: NormalWishartPrior,
    cache: LocalScoreCache | None = None,
) -> float:
    """The contribution of one variable with one parent set.

    Log marginal of the data over {child} + parents minus log marginal of
    the data over the parents alone, both computed with correspondingly
    restricted hyperparameters and unchanged sample sizes.
    """
    parent_names = tuple(sorted(parents))
    if child in parent_names:
        raise ValueError(f"{child!r} cannot be its own parent")

    def compute() -> float:
        full = stats(d)
        child_idx = d.column_index(child)
        parent_idx = sorted(d.column_index(p) for p in parent_names)
        family_idx = sorted(parent_idx + [child_idx])
        return _restricted_marginal(prior, full, family_idx) - _restricted_marginal(
            prior, full, parent_idx
        )

    if cache is None:
        return compute()
    key = LocalScoreKey(child, parent_names, context_digest(d, prior))
    return cache.get_or_compute(key, compute)


@dataclass(frozen=True)
class StructureScore:
    """A structure's log prior, log marginal, and per-variable terms."""

    dag: Dag
    log_prior: float
    log_marginal: float
    local_terms: tuple[float, ...]

    @property
    def total(self) -> float:
        return self.log_prior + self.log_marginal


def score_structure(
    dag: Dag,
    d: Dataset,
    prior: NormalWishartPrior,
    policy: StructurePrior | None = None,
    universe: Sequence[Dag] | None = None,
    cache: LocalScoreCache | None = None,
) -> StructureScore:
    """Score a DAG: sum of local scores plus an optional structure prior.

    With ``policy`` (and its ``universe``) omitted the log prior is zero,
    which leaves rankings and normalized posteriors over a fixed candidate
    set unchanged.
    """
    if set(dag.variables) != set(d.variables):
        raise DimensionMismatchError(
            f"structure variables {sorted(dag.variables)} do not match "
            f"dataset variables {sorted(d.variables)}"
        )
    topological_order(dag)  # reject cyclic candidates up front
    terms = tuple(
        local_score(
            dag.variables[i],
            (dag.variables[p] for p in dag.parents[i]),
            d,
            prior,
            cache,
        )
        for i in range(dag.size)
    )
    log_prior = 0.0
    if policy is not None and universe is not None:
        log_prior = log_structure_prior(policy, dag, universe)
    return StructureScore(dag, log_prior, float(sum(terms)), terms)


def normalize_log_weights(log_weights: Sequence[float]) -> np.ndarray:
    """Exponentiate max-shifted log weights and normalize to sum to one."""
    if len(log_weights) == 0:
        raise EmptyInputError("no weights to normalize")
    arr = np.asarray(log_weights, dtype=float)
    shifted = np.exp(arr - arr.max())
    return shifted / shifted.sum()


def posterior_over_set(scores: Sequence[StructureScore]) -> list[float]:
    """Posterior probabilities of a candidate set from their scores."""
    if not scores:
        raise EmptyInputError("no structures to normalize over")
    return list(normalize_log_weights([s.total for s in scores]))


# ---------------------------------------------------------------------------
# Monte-Carlo oracle


def sample_wishart(t0, alpha: int, count: int, rng) -> np.ndarray:
    """Draw Wishart precision matrices constructively.

    Each draw is the sum of ``alpha`` outer products of normal vectors with
    zero mean and precision matrix ``t0``; stacked result has shape
    (count, n, n).
    """
    t0 = np.asarray(t0, dtype=float)
    n = t0.shape[0]
    lower = spd_factor(t0)
    inv_lower = solve_triangular(lower, np.eye(n), lower=True)
    z = rng.standard_normal((count, alpha, n))
    y = z @ inv_lower  # rows have covariance inverse(t0)
    return np.einsum("sai,saj->sij", y, y)


def mc_marginal_oracle(
    prior: NormalWishartPrior,
    d: Dataset,
    samples: int,
    seed: int,
    chunk: int = 100_000,
) -> tuple[float, float]:
    """Monte-Carlo estimate of the log marginal likelihood.

    Draws (precision, mean) pairs from the prior by constructive Wishart
    sampling, averages the data likelihood over draws, and returns the log
    of that average together with its delta-method standard error (the
    relative standard error of the density). Requires an integer ``alpha``
    of at least the dimension. With no cases the estimate is exactly log 1.
    """
    n = prior.dim
    if prior.alpha != int(prior.alpha):
        raise NonIntegerAlphaError(
            f"constructive sampling needs integer alpha, got {prior.alpha}"
        )
    alpha = int(prior.alpha)
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    if d.width != n:
        raise DimensionMismatchError(
            f"dataset has {d.width} variables, prior has {n}"
        )
    if d.count == 0:
        return 0.0, 0.0

    rng = np.random.default_rng(seed)
    cases = d.cases
    m = cases.shape[0]
    log_liks = np.empty(samples)
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        w = sample_wishart(prior.t0, alpha, size, rng)
        lw = np.linalg.cholesky(w)
        log_det_w = 2.0 * np.log(
            np.einsum("sii->si", lw)
        ).sum(axis=1)
        inv_lw = np.linalg.inv(lw)
        u = rng.standard_normal((size, n))
        means = prior.mu0 + np.einsum("si,sij->sj", u, inv_lw) / math.sqrt(prior.nu)
        diffs = cases[None, :, :] - means[:, None, :]  # (size, m, n)
        quad = np.einsum("sli,sij,slj->s", diffs, w, diffs)
        log_liks[done : done + size] = (
            -0.5 * n * m * LOG_2PI + 0.5 * m * log_det_w - 0.5 * quad
        )
        done += size

    log_mean = float(logsumexp(log_liks) - math.log(samples))
    weights = np.exp(log_liks - log_liks.max())
    rel_se = float(
        weights.std(ddof=1) / weights.mean() / math.sqrt(samples)
    )
    return log_mean, rel_se

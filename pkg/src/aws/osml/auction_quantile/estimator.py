#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sparse
from scipy.optimize import linprog, minimize
from scipy.stats import qmc

from .core_model import (
    LAMBDA_FLOOR,
    AsymmetrySpec,
    AsymmetryVariant,
    LevelTransform,
    Normalization,
    ParentQuantileCurve,
    psi,
    roster_lambdas,
)
from .errors import (
    AuctionQuantileError,
    DimensionError,
    FlatLikelihood,
    NonConvergence,
    RankDeficient,
    TestAbort,
    Unbounded,
)
from .simulator import AuctionRecord
from .utils import logger, map_ordered

LOG_ALPHA_BOUNDS = (math.log(1e-4), math.log(1e4))
BETA_BOUND = 10.0
GOLDEN_WIDTH = 1e-6
N_STARTS = 8
LEVEL_CLAMP = 1e-6
DEFAULT_B = 10000
MAX_FAILURE_RATE = 0.05

_START_LOG_ALPHA = (-2.0, 2.0)
_START_BETA = (-1.0, 1.0)
_GOLDEN_RATIO = 2.0 / (1.0 + math.sqrt(5.0))


@dataclass(frozen=True)
class MleResult:
    """
    Stage 1 fit of the asymmetry parameters from winner identities.

    :param spec: The fitted, normalized specification.
    :param loglik: Maximized log likelihood.
    :param converged: Whether the optimizer reported convergence.
    :param n_used: Number of auctions whose winner probabilities depend on the parameters.
    :param n_starts: Number of optimizer starts.
    :param curvature: Second derivative of the log likelihood at the optimum, in λ for the two type model.
    :param starts: Free parameter start points of a multistart search.
    """

    spec: AsymmetrySpec
    loglik: float
    converged: bool
    n_used: int
    n_starts: int = 1
    curvature: Tuple[float, ...] = ()
    starts: Tuple[Tuple[float, ...], ...] = ()

    def to_dict(self) -> Dict[str, Any]:
        payload = self.spec.to_dict()
        payload.update(
            {
                "params": self.spec.params.tolist(),
                "loglik": self.loglik,
                "converged": self.converged,
                "n_used": self.n_used,
                "n_starts": self.n_starts,
                "curvature": list(self.curvature),
            }
        )
        return payload


@dataclass(frozen=True, eq=False)
class QrFit:
    """
    Stage 2 quantile regression at one parent level.

    :param tau: The parent level.
    :param gamma_hat: Fitted coefficients.
    :param objective: Attained check loss.
    :param certificate: Directional derivatives of the check loss along +e_1, -e_1, ..., +e_k, -e_k.
    :param certificate_tolerance: Slack allowed on the certificate for solver round off.
    :param level_range: Smallest and largest per observation level after clamping.
    """

    tau: float
    gamma_hat: np.ndarray
    objective: float
    certificate: np.ndarray
    certificate_tolerance: float
    level_range: Tuple[float, float]

    @property
    def is_optimal(self) -> bool:
        return bool(np.all(self.certificate >= -self.certificate_tolerance))


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    """
    Pairwise bootstrap distribution of a statistic.

    :param point: The statistic on the original sample.
    :param replicates: One row per successful replicate.
    :param intervals: Percentile interval (low, high) per requested coverage.
    :param B: Number of successful replicates.
    :param seed: Master seed of the replicate streams.
    :param n_failed: Replicates dropped because the statistic failed.
    """

    point: np.ndarray
    replicates: np.ndarray
    intervals: Dict[float, Tuple[np.ndarray, np.ndarray]]
    B: int
    seed: int
    n_failed: int = 0

    @property
    def ci_low(self) -> np.ndarray:
        return self.intervals[next(iter(self.intervals))][0]

    @property
    def ci_high(self) -> np.ndarray:
        return self.intervals[next(iter(self.intervals))][1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "point": self.point.tolist(),
            "intervals": {str(c): {"low": lo.tolist(), "high": hi.tolist()} for c, (lo, hi) in self.intervals.items()},
            "B": self.B,
            "seed": self.seed,
            "n_failed": self.n_failed,
        }


class _WinnerLikelihood:
    """
    Log likelihood of winner identities, Σ_ℓ ln λ_{I*_ℓ} − ln Σ_j λ_{jℓ}, over a flattened bidder table.
    """

    def __init__(
        self,
        dataset: Sequence[AuctionRecord],
        variant: AsymmetryVariant,
        type_labels: Optional[Sequence[str]],
        normalization: Optional[Normalization],
    ) -> None:
        self.variant = variant
        self.n_auctions = len(dataset)
        bidders = [(k, bidder) for k, record in enumerate(dataset) for bidder in record.roster.z]
        self.auction = np.array([k for k, _ in bidders], dtype=int)
        offsets = np.concatenate(([0], np.cumsum([record.roster.n for record in dataset])[:-1])).astype(int)
        self.winner = offsets + np.array([record.winner_position for record in dataset], dtype=int)
        self.n_used = sum(1 for record in dataset if len(set(record.roster.z)) > 1)

        if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS:
            observed = sorted({bidder.label for _, bidder in bidders})
            self.labels = tuple(type_labels) if type_labels is not None else tuple(observed)
            unknown = set(observed) - set(self.labels)
            if unknown:
                raise DimensionError(f"Bidder types {sorted(unknown)} are not among {self.labels}")
            self.group = np.array([self.labels.index(bidder.label) for _, bidder in bidders], dtype=int)
            self.n_groups = len(self.labels)
        elif variant is not AsymmetryVariant.LINEAR_REGRESSION:
            identities = [bidder.identity for _, bidder in bidders]
            if any(identity is None or identity < 0 for identity in identities):
                raise DimensionError("Fixed effects variants need a non-negative identity for every bidder")
            self.group = np.array(identities, dtype=int)
            self.n_groups = int(self.group.max()) + 1
        else:
            self.n_groups = 0

        if variant in (
            AsymmetryVariant.LINEAR_REGRESSION,
            AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS,
            AsymmetryVariant.EXP_LINEAR_WITH_FIXED_EFFECTS,
        ):
            sizes = {len(bidder.covariates) if bidder.covariates is not None else -1 for _, bidder in bidders}
            if len(sizes) != 1 or -1 in sizes:
                raise DimensionError("Every bidder needs covariates of a common dimension")
            self.z = np.array([bidder.covariates for _, bidder in bidders], dtype=float)
        else:
            self.z = np.zeros((len(bidders), 0))

        linear = variant is AsymmetryVariant.LINEAR_REGRESSION
        default = Normalization.FIRST_BETA_ONE if linear else Normalization.FIRST_ALPHA_ONE
        self.normalization = normalization or default

    @property
    def n_alpha_free(self) -> int:
        return max(self.n_groups - 1, 0)

    @property
    def n_beta_free(self) -> int:
        if self.variant is AsymmetryVariant.LINEAR_REGRESSION:
            return self.z.shape[1] - 1
        return self.z.shape[1]

    @property
    def dimension(self) -> int:
        return self.n_alpha_free + self.n_beta_free

    def bounds(self) -> List[Tuple[float, float]]:
        return [LOG_ALPHA_BOUNDS] * self.n_alpha_free + [(-BETA_BOUND, BETA_BOUND)] * self.n_beta_free

    def start_box(self) -> Tuple[np.ndarray, np.ndarray]:
        low = [_START_LOG_ALPHA[0]] * self.n_alpha_free + [_START_BETA[0]] * self.n_beta_free
        high = [_START_LOG_ALPHA[1]] * self.n_alpha_free + [_START_BETA[1]] * self.n_beta_free
        return np.array(low), np.array(high)

    def unpack(self, theta: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        theta = np.asarray(theta, dtype=float)
        alpha = np.concatenate(([1.0], np.exp(theta[: self.n_alpha_free]))) if self.n_groups else np.zeros(0)
        beta = theta[self.n_alpha_free :]
        if self.variant is AsymmetryVariant.LINEAR_REGRESSION:
            beta = np.concatenate(([1.0], beta))
        return alpha, beta

    def flat_lambdas(self, theta: np.ndarray) -> np.ndarray:
        alpha, beta = self.unpack(theta)
        if self.variant in (AsymmetryVariant.TYPE_FIXED_EFFECTS, AsymmetryVariant.FIXED_EFFECTS):
            values = alpha[self.group]
        elif self.variant is AsymmetryVariant.LINEAR_REGRESSION:
            values = self.z @ beta
        elif self.variant is AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS:
            values = alpha[self.group] + self.z @ beta
        else:
            values = alpha[self.group] * np.exp(self.z @ beta)
        return np.maximum(values, LAMBDA_FLOOR)

    def loglik(self, theta: np.ndarray) -> float:
        lambdas = self.flat_lambdas(theta)
        totals = np.bincount(self.auction, weights=lambdas, minlength=self.n_auctions)
        return float(np.sum(np.log(lambdas[self.winner])) - np.sum(np.log(totals)))

    def to_spec(self, theta: np.ndarray) -> AsymmetrySpec:
        alpha, beta = self.unpack(theta)
        variant = self.variant
        if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS:
            return AsymmetrySpec.type_fixed_effects(dict(zip(self.labels, alpha.tolist())))
        if variant is AsymmetryVariant.FIXED_EFFECTS:
            return AsymmetrySpec.fixed_effects(alpha.tolist(), self.normalization)
        if variant is AsymmetryVariant.LINEAR_REGRESSION:
            return AsymmetrySpec.linear(beta.tolist(), self.normalization)
        if variant is AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS:
            return AsymmetrySpec.linear_with_fixed_effects(alpha.tolist(), beta.tolist())
        return AsymmetrySpec.exp_linear_with_fixed_effects(alpha.tolist(), beta.tolist())

    def two_type_derivatives(self, weak_lambda: float) -> Tuple[float, float]:
        """
        Score and Hessian in λ of the two type likelihood Σ_ℓ 1[weak wins] ln λ − ln(p_ℓ + λ q_ℓ).
        """
        weak = (self.group == 1).astype(float)
        q = np.bincount(self.auction, weights=weak, minlength=self.n_auctions)
        p = np.bincount(self.auction, minlength=self.n_auctions) - q
        weak_wins = float(np.sum(weak[self.winner]))
        totals = p + weak_lambda * q
        score = weak_wins / weak_lambda - float(np.sum(q / totals))
        hessian = -weak_wins / weak_lambda**2 + float(np.sum((q / totals) ** 2))
        return score, hessian


def _golden_section_max(fn: Callable[[float], float], low: float, high: float, width: float) -> float:
    x1 = high - _GOLDEN_RATIO * (high - low)
    x2 = low + _GOLDEN_RATIO * (high - low)
    f1, f2 = fn(x1), fn(x2)
    while high - low > width:
        if f1 >= f2:
            high, x2, f2 = x2, x1, f1
            x1 = high - _GOLDEN_RATIO * (high - low)
            f1 = fn(x1)
        else:
            low, x1, f1 = x1, x2, f2
            x2 = low + _GOLDEN_RATIO * (high - low)
            f2 = fn(x2)
    best = 0.5 * (low + high)
    # the maximum may sit on the boundary of the search box
    return max((low, best, high), key=fn)


def _fit_two_types(likelihood: _WinnerLikelihood) -> MleResult:
    def profile(log_lambda: float) -> float:
        return likelihood.loglik(np.array([log_lambda]))

    log_lambda = _golden_section_max(profile, LOG_ALPHA_BOUNDS[0], LOG_ALPHA_BOUNDS[1], GOLDEN_WIDTH)
    weak_lambda = math.exp(log_lambda)
    score, hessian = likelihood.two_type_derivatives(weak_lambda)
    if hessian < 0.0:
        polished = weak_lambda - score / hessian
        low, high = (math.exp(bound) for bound in LOG_ALPHA_BOUNDS)
        if low <= polished <= high and profile(math.log(polished)) >= profile(log_lambda):
            weak_lambda = polished
    theta = np.array([math.log(weak_lambda)])
    _, hessian = likelihood.two_type_derivatives(weak_lambda)
    return MleResult(
        spec=likelihood.to_spec(theta),
        loglik=likelihood.loglik(theta),
        converged=True,
        n_used=likelihood.n_used,
        curvature=(hessian,),
    )


def _fit_multistart(likelihood: _WinnerLikelihood, n_starts: int, seed: int) -> MleResult:
    low, high = likelihood.start_box()
    starts = qmc.scale(qmc.Sobol(d=likelihood.dimension, scramble=True, seed=seed).random(n_starts), low, high)
    scale = float(max(likelihood.n_auctions, 1))

    def objective(theta: np.ndarray) -> float:
        return -likelihood.loglik(theta) / scale

    best, best_converged = None, None
    for start in starts:
        result = minimize(objective, start, method="L-BFGS-B", bounds=likelihood.bounds())
        if best is None or result.fun < best.fun:
            best = result
        if result.success and (best_converged is None or result.fun < best_converged.fun):
            best_converged = result
    if best_converged is None:
        iterate = MleResult(
            spec=likelihood.to_spec(best.x),
            loglik=-best.fun * scale,
            converged=False,
            n_used=likelihood.n_used,
            n_starts=n_starts,
            starts=tuple(tuple(start) for start in starts.tolist()),
        )
        raise NonConvergence(f"No MLE start converged: {best.message}", best=iterate)
    return MleResult(
        spec=likelihood.to_spec(best_converged.x),
        loglik=likelihood.loglik(best_converged.x),
        converged=True,
        n_used=likelihood.n_used,
        n_starts=n_starts,
        starts=tuple(tuple(start) for start in starts.tolist()),
    )


def mle_fit(
    dataset: Sequence[AuctionRecord],
    variant: AsymmetryVariant,
    type_labels: Optional[Sequence[str]] = None,
    normalization: Optional[Normalization] = None,
    n_starts: int = N_STARTS,
    seed: int = 0,
) -> MleResult:
    """
    Stage 1: maximize the likelihood of the observed winners over the asymmetry parameters. The two type model is
    a one dimensional search over log λ (golden section, then a Newton step); every other case runs L-BFGS-B from
    Sobol starts.

    :param dataset: The auctions.
    :param variant: The asymmetry variant to fit.
    :param type_labels: Type labels with the reference (λ = 1) first; sorted observed labels by default.
    :param normalization: Identification constraint of the returned specification.
    :param n_starts: Multistart count for multi parameter variants.
    :param seed: Seed of the scrambled Sobol starts.
    :return: The fit.
    """
    variant = AsymmetryVariant(variant)
    likelihood = _WinnerLikelihood(dataset, variant, type_labels, normalization)
    if likelihood.dimension == 0:
        theta = np.zeros(0)
        return MleResult(
            spec=likelihood.to_spec(theta), loglik=likelihood.loglik(theta), converged=True, n_used=likelihood.n_used
        )
    if likelihood.n_used == 0:
        raise FlatLikelihood("No auction has bidders with differing characteristics; the likelihood is flat")
    if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS and likelihood.dimension == 1:
        result = _fit_two_types(likelihood)
    else:
        result = _fit_multistart(likelihood, n_starts, seed)
    logger.info(f"Stage 1 {variant.value} fit: params={result.spec.params.tolist()} loglik={result.loglik:.6f}")
    return result


def record_transform(record: AuctionRecord, spec: AsymmetrySpec) -> LevelTransform:
    """
    :return: The level transform of the record's winner under the specification.
    """
    return LevelTransform.from_lambdas(roster_lambdas(spec, record.roster), record.winner_position)


def transformed_level(tau: float, record: AuctionRecord, spec: AsymmetrySpec) -> float:
    """
    Φ_ℓ(τ) = Ψ_{I*_ℓ}(τ), the winning bid level that corresponds to parent level τ in this auction.
    """
    return psi(tau, record_transform(record, spec))


@dataclass(frozen=True, eq=False)
class StageTwoDesign:
    """
    Design matrix, winning bids and stacked winner transforms of a sample, shared by every quantile level.
    """

    x: np.ndarray
    w: np.ndarray
    transform: LevelTransform

    @classmethod
    def build(cls, dataset: Sequence[AuctionRecord], spec: AsymmetrySpec) -> "StageTwoDesign":
        sizes = {record.x.entries.size for record in dataset}
        if len(sizes) != 1:
            raise DimensionError(f"Records disagree on the covariate dimension: {sorted(sizes)}")
        return cls(
            x=np.vstack([record.x.entries for record in dataset]),
            w=np.array([record.winning_bid for record in dataset], dtype=float),
            transform=LevelTransform.stack([record_transform(record, spec) for record in dataset]),
        )

    def levels(self, tau: float) -> np.ndarray:
        return np.asarray(psi(tau, self.transform), dtype=float)


def check_loss(residuals: np.ndarray, levels: np.ndarray) -> float:
    """
    Σ_ℓ ρ_{Φ_ℓ}(u_ℓ) with ρ_Φ(u) = u (Φ − 1[u < 0]).
    """
    return float(np.sum(residuals * (levels - (residuals < 0.0))))


def solve_weighted_quantile_lp(x: np.ndarray, w: np.ndarray, levels: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Minimize Σ_ℓ Φ_ℓ u⁺_ℓ + (1 − Φ_ℓ) u⁻_ℓ subject to Xγ + u⁺ − u⁻ = W with HiGHS dual simplex.

    :param x: Design matrix, L × k.
    :param w: Responses.
    :param levels: One quantile level per observation.
    :return: The coefficients and the attained check loss.
    """
    n, k = x.shape
    c = np.concatenate([np.zeros(k), levels, 1.0 - levels])
    bounds = [(None, None)] * k + [(0, None)] * (2 * n)
    identity = sparse.identity(n, format="csr")
    a_eq = sparse.hstack([sparse.csr_matrix(x), identity, -identity], format="csr")
    result = linprog(c, A_eq=a_eq, b_eq=w, bounds=bounds, method="highs-ds")
    if result.status == 3:
        raise Unbounded(f"Quantile regression LP is unbounded: {result.message}")
    if not result.success:
        raise NonConvergence(f"Quantile regression LP failed: {result.message}")
    gamma = np.asarray(result.x[:k], dtype=float)
    return gamma, check_loss(w - x @ gamma, levels)


def directional_derivatives(x: np.ndarray, w: np.ndarray, levels: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """
    One sided derivatives of the check loss at γ along ±e_k, all non-negative at a minimum.

    :return: Derivatives ordered +e_1, -e_1, ..., +e_k, -e_k.
    """
    residuals = w - x @ gamma
    zero = np.abs(residuals) <= 1e-7 * max(1.0, float(np.max(np.abs(w))))
    derivatives = []
    for j in range(x.shape[1]):
        for sign in (1.0, -1.0):
            change = -sign * x[:, j]
            slope = np.where(residuals > 0.0, levels * change, (levels - 1.0) * change)
            kink = np.maximum(levels * change, (levels - 1.0) * change)
            derivatives.append(float(np.sum(np.where(zero, kink, slope))))
    return np.array(derivatives)


def _fit_level(design: StageTwoDesign, tau: float) -> QrFit:
    raw = design.levels(tau)
    if np.any(~np.isfinite(raw)) or np.any(raw < 0.0) or np.any(raw > 1.0):
        raise Unbounded(f"Transformed levels at tau={tau} fall outside [0, 1]")
    levels = np.clip(raw, LEVEL_CLAMP, 1.0 - LEVEL_CLAMP)
    gamma, objective = solve_weighted_quantile_lp(design.x, design.w, levels)
    certificate = directional_derivatives(design.x, design.w, levels, gamma)
    tolerance = 1e-7 * float(np.max(np.sum(np.abs(design.x), axis=0)))
    fit = QrFit(
        tau=float(tau),
        gamma_hat=gamma,
        objective=objective,
        certificate=certificate,
        certificate_tolerance=tolerance,
        level_range=(float(levels.min()), float(levels.max())),
    )
    if not fit.is_optimal:
        logger.warning(f"Quantile regression at tau={tau} failed its optimality certificate: {certificate.tolist()}")
    return fit


def _check_rank(design: StageTwoDesign) -> None:
    if np.linalg.matrix_rank(design.x) < design.x.shape[1]:
        raise RankDeficient(f"Design matrix of {design.x.shape[0]} auctions is rank deficient")


def qr_fit(
    dataset: Sequence[AuctionRecord], tau: float, spec: AsymmetrySpec, design: Optional[StageTwoDesign] = None
) -> QrFit:
    """
    Stage 2: quantile regression of winning bids on covariates at the per auction levels Φ_ℓ(τ).

    :param dataset: The auctions.
    :param tau: Parent quantile level.
    :param spec: Fitted asymmetry specification from Stage 1.
    :param design: A prebuilt design to reuse across levels.
    :return: The fit with its optimality certificate.
    """
    design = design or StageTwoDesign.build(dataset, spec)
    _check_rank(design)
    return _fit_level(design, tau)


def qr_curve(
    dataset: Sequence[AuctionRecord], tau_grid: Sequence[float], spec: AsymmetrySpec, threads: int = 1
) -> ParentQuantileCurve:
    """
    Independent Stage 2 fits on a grid, assembled into a parent curve. Levels that fail are left out of the grid and
    listed as failed, which marks the curve partial.

    :param dataset: The auctions.
    :param tau_grid: Strictly increasing levels inside (0, 1).
    :param spec: Fitted asymmetry specification.
    :param threads: Worker threads for the per level fits.
    :return: The estimated parent curve.
    """
    design = StageTwoDesign.build(dataset, spec)
    _check_rank(design)
    grid = np.asarray(tau_grid, dtype=float)
    fits = map_ordered(lambda tau: _fit_level(design, tau), grid, max_workers=threads)
    failed = [(tau, fit) for tau, fit in zip(grid, fits) if isinstance(fit, Exception)]
    for tau, error in failed:
        if not isinstance(error, AuctionQuantileError):
            raise error
        logger.warning(f"Quantile regression at tau={tau} failed: {error}")
    succeeded = [fit for fit in fits if not isinstance(fit, Exception)]
    if not succeeded:
        raise failed[0][1]
    return ParentQuantileCurve(
        grid=np.array([fit.tau for fit in succeeded]),
        gamma=np.vstack([fit.gamma_hat for fit in succeeded]),
        failed_levels=tuple(float(tau) for tau, _ in failed),
    )


def replicate_generator(seed: int, replicate: int) -> np.random.Generator:
    """
    :return: The private random stream of one bootstrap replicate.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(replicate,)))


def resample(dataset: Sequence[AuctionRecord], rng: np.random.Generator) -> List[AuctionRecord]:
    """
    Draw L whole auction records with replacement.
    """
    indices = rng.integers(0, len(dataset), size=len(dataset))
    return [dataset[i] for i in indices]


def collect_replicates(outcomes: Sequence[Any], requested: int, max_failure_rate: float) -> Tuple[List[Any], int]:
    """
    Split replicate outcomes into successes and failures, aborting when failures exceed the allowed share.

    :param outcomes: Results or exceptions, one per replicate.
    :param requested: Number of replicates requested.
    :param max_failure_rate: Largest tolerated share of failures.
    :return: The successful results and the failure count.
    """
    failures = [outcome for outcome in outcomes if isinstance(outcome, Exception)]
    for failure in failures:
        if not isinstance(failure, AuctionQuantileError):
            raise failure
    if len(failures) > max_failure_rate * requested:
        raise TestAbort(f"{len(failures)} of {requested} bootstrap replicates failed, first error: {failures[0]}")
    if failures:
        logger.warning(f"Dropped {len(failures)} of {requested} bootstrap replicates: {failures[0]}")
    return [outcome for outcome in outcomes if not isinstance(outcome, Exception)], len(failures)


def pairwise_bootstrap(
    dataset: Sequence[AuctionRecord],
    B: int,
    seed: int,
    statistic_fn: Callable[[Sequence[AuctionRecord]], Any],
    coverage: Sequence[float] = (0.95,),
    threads: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
) -> BootstrapResult:
    """
    Resample whole auction records with replacement and recompute a statistic, which may run both estimation stages.

    :param dataset: The auctions.
    :param B: Number of replicates.
    :param seed: Master seed; replicate b draws from its own stream.
    :param statistic_fn: Maps a sample to a scalar or a vector.
    :param coverage: Coverage levels of the percentile intervals.
    :param threads: Worker threads for replicates.
    :param max_failure_rate: Largest tolerated share of failed replicates.
    :return: Point value, replicates and percentile intervals.
    """
    if B < 1:
        raise ValueError("B must be at least 1")
    point = np.atleast_1d(np.asarray(statistic_fn(dataset), dtype=float))

    def replicate(b: int) -> np.ndarray:
        sample = resample(dataset, replicate_generator(seed, b))
        return np.atleast_1d(np.asarray(statistic_fn(sample), dtype=float))

    outcomes = map_ordered(replicate, range(B), max_workers=threads)
    successes, n_failed = collect_replicates(outcomes, B, max_failure_rate)
    replicates = np.vstack(successes)
    intervals = {
        float(level): (
            np.quantile(replicates, (1.0 - level) / 2.0, axis=0),
            np.quantile(replicates, 1.0 - (1.0 - level) / 2.0, axis=0),
        )
        for level in coverage
    }
    return BootstrapResult(
        point=point, replicates=replicates, intervals=intervals, B=len(successes), seed=seed, n_failed=n_failed
    )


def estimate_lambda_ci(
    dataset: Sequence[AuctionRecord],
    B: int,
    seed: int,
    variant: AsymmetryVariant = AsymmetryVariant.TYPE_FIXED_EFFECTS,
    type_labels: Optional[Sequence[str]] = None,
    coverage: Sequence[float] = (0.95,),
    threads: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
) -> BootstrapResult:
    """
    Pairwise bootstrap of the Stage 1 parameters.
    """

    def statistic(sample: Sequence[AuctionRecord]) -> np.ndarray:
        return mle_fit(sample, variant, type_labels=type_labels).spec.params

    return pairwise_bootstrap(dataset, B, seed, statistic, coverage, threads, max_failure_rate)

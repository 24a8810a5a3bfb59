#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from .core_model import (
    AsymmetrySpec,
    AsymmetryVariant,
    Bidder,
    BidderRoster,
    CovariateVector,
    QuantileCurve,
    bidder_quantile,
    parent_quantile,
    power_quantile_curve,
    roster_lambdas,
)
from .errors import AuctionQuantileError, ConfigError, DimensionError, InputError, NoWinner, RosterError
from .utils import logger, map_ordered

_IDENTITY_VARIANTS = (
    AsymmetryVariant.FIXED_EFFECTS,
    AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS,
    AsymmetryVariant.EXP_LINEAR_WITH_FIXED_EFFECTS,
)


@dataclass(frozen=True, eq=False)
class AuctionRecord:
    """
    One observed ascending auction: the winning bid, the auction covariates, the participants and the winner. The
    winner is identified either by its position in the roster or, for type count data, by its type label.
    """

    auction_id: int
    winning_bid: float
    x: CovariateVector
    roster: BidderRoster
    winner_index: Optional[int] = None
    winner_type: Optional[str] = None
    row_number: Optional[int] = None

    def __post_init__(self) -> None:
        if not math.isfinite(self.winning_bid):
            raise InputError(f"Auction {self.auction_id}: winning bid must be finite, got {self.winning_bid}")
        if (self.winner_index is None) == (self.winner_type is None):
            raise NoWinner(f"Auction {self.auction_id}: the winner must be given either by index or by type")
        if self.winner_index is not None and not 0 <= self.winner_index < self.roster.n:
            raise NoWinner(f"Auction {self.auction_id}: winner index {self.winner_index} outside the roster")
        if self.winner_type is not None and self.roster.count(self.winner_type) == 0:
            raise NoWinner(f"Auction {self.auction_id}: no bidder of the winning type {self.winner_type!r}")

    @property
    def winner_position(self) -> int:
        """
        :return: Roster position of the winner; for type data the first bidder of the winning type, which is
            exchangeable with every other bidder of that type.
        """
        if self.winner_index is not None:
            return self.winner_index
        return next(i for i, bidder in enumerate(self.roster.z) if bidder.label == self.winner_type)

    def type_cell(self, labels: Sequence[str]) -> Tuple[int, ...]:
        """
        :param labels: Type labels, reference type first.
        :return: The number of bidders of each type, e.g. (p, q).
        """
        return tuple(self.roster.count(label) for label in labels)

    def with_winning_bid(self, winning_bid: float) -> "AuctionRecord":
        return replace(self, winning_bid=float(winning_bid))


@dataclass
class SimConfig:
    """
    Data generating process of a simulated sample.

    :param n_auctions: L, number of auctions.
    :param spec: Asymmetry specification; type fixed effects draw labelled bidders, the other variants draw
        identities 0..N-1 and, for the regression variants, bidder covariates.
    :param curve: Parent quantile curve.
    :param n_bidders: N, or a tuple of values drawn uniformly per auction.
    :param type_probabilities: Probability of each type label, equal by default.
    :param covariate_low: Lower bound of the uniform auction characteristics.
    :param covariate_high: Upper bound of the uniform auction characteristics.
    :param n_covariates: d, number of auction characteristics.
    :param bidder_covariate_low: Lower bound of uniform bidder covariates.
    :param bidder_covariate_high: Upper bound of uniform bidder covariates.
    :param master_seed: Seed of the whole sample.
    """

    n_auctions: int
    spec: AsymmetrySpec
    curve: QuantileCurve
    n_bidders: Union[int, Tuple[int, ...]] = 5
    type_probabilities: Optional[Tuple[float, ...]] = None
    covariate_low: float = 1.0
    covariate_high: float = 3.0
    n_covariates: int = 1
    bidder_covariate_low: float = 0.5
    bidder_covariate_high: float = 1.5
    master_seed: int = 0
    description: str = field(default="custom")

    def __post_init__(self) -> None:
        sizes = self.bidder_counts
        if self.n_auctions < 1:
            raise ConfigError(f"n_auctions must be at least 1, got {self.n_auctions}")
        if min(sizes) < 2:
            raise RosterError(f"Auctions need at least two bidders, got {sizes}")
        if self.covariate_low <= 0.0 or self.covariate_high < self.covariate_low:
            raise ConfigError("Covariates must be drawn from a positive interval")
        if self.curve.dimension != self.n_covariates + 1:
            raise DimensionError(f"Curve has {self.curve.dimension} coefficients for {self.n_covariates} covariates")
        if self.spec.variant in _IDENTITY_VARIANTS and max(sizes) > len(self.spec.alpha):
            raise DimensionError(f"{max(sizes)} bidders but only {len(self.spec.alpha)} fixed effects")
        if self.type_probabilities is not None:
            if len(self.type_probabilities) != len(self.spec.type_labels) or abs(sum(self.type_probabilities) - 1) > 1e-9:
                raise ConfigError("type_probabilities must give one probability per type label and sum to 1")

    @property
    def bidder_counts(self) -> Tuple[int, ...]:
        return (self.n_bidders,) if isinstance(self.n_bidders, int) else tuple(self.n_bidders)

    @classmethod
    def monte_carlo_preset(cls, master_seed: int = 0, n_auctions: int = 2000, n_bidders: int = 5) -> "SimConfig":
        """
        Two equally likely bidder types with λ = (1, e²), x ~ U[1, 3] and γ(τ) = τ^{e^{1.5}} (1/2, 1/4).
        """
        return cls(
            n_auctions=n_auctions,
            spec=AsymmetrySpec.type_fixed_effects({"a": 1.0, "b": math.exp(2.0)}),
            curve=power_quantile_curve(math.exp(1.5), (0.5, 0.25)),
            n_bidders=n_bidders,
            master_seed=master_seed,
            description="monte_carlo",
        )

    @classmethod
    def symmetric_uniform_preset(cls, master_seed: int = 0, n_auctions: int = 2000, n_bidders: int = 2) -> "SimConfig":
        """
        Symmetric bidders with a uniform parent V(τ) = τ and no auction characteristics.
        """
        return cls(
            n_auctions=n_auctions,
            spec=AsymmetrySpec.type_fixed_effects({"a": 1.0}),
            curve=power_quantile_curve(1.0, (1.0,)),
            n_bidders=n_bidders,
            n_covariates=0,
            master_seed=master_seed,
            description="symmetric_uniform",
        )

    @classmethod
    def timber_like_preset(
        cls, master_seed: int = 0, n_auctions: int = 2000, lambda_weak: float = 0.6988
    ) -> "SimConfig":
        """
        Strong type "a" (λ = 1) and weak type "b" (λ = lambda_weak) with 2 to 12 bidders per auction.
        """
        return cls(
            n_auctions=n_auctions,
            spec=AsymmetrySpec.type_fixed_effects({"a": 1.0, "b": lambda_weak}),
            curve=power_quantile_curve(math.exp(1.5), (0.5, 0.25)),
            n_bidders=tuple(range(2, 13)),
            master_seed=master_seed,
            description="timber_like",
        )

    @classmethod
    def fixed_effects_preset(cls, master_seed: int = 0, n_auctions: int = 2000, n_bidders: int = 5) -> "SimConfig":
        """
        Persistent bidder identities 0..N-1 with λ_i = exp(2i/(N-1)), otherwise the Monte Carlo design.
        """
        return cls(
            n_auctions=n_auctions,
            spec=AsymmetrySpec.fixed_effects(np.exp(np.linspace(0.0, 2.0, n_bidders)).tolist()),
            curve=power_quantile_curve(math.exp(1.5), (0.5, 0.25)),
            n_bidders=n_bidders,
            master_seed=master_seed,
            description="fixed_effects",
        )


def derive_seed(master_seed: int, counter: int) -> int:
    """
    Counter based split of a master seed, so replication k always gets the same stream regardless of scheduling.

    :param master_seed: The run's seed.
    :param counter: Replication or replicate number.
    :return: A seed for the derived stream.
    """
    return int(np.random.SeedSequence(master_seed, spawn_key=(counter,)).generate_state(1)[0])


def _draw_roster(cfg: SimConfig, n: int, rng: np.random.Generator) -> BidderRoster:
    spec = cfg.spec
    if spec.variant is AsymmetryVariant.TYPE_FIXED_EFFECTS:
        labels = spec.type_labels
        draws = rng.choice(len(labels), size=n, p=cfg.type_probabilities)
        # grouped by type, the layout a type count dataset loads back into
        return BidderRoster.from_type_counts({label: int(np.sum(draws == k)) for k, label in enumerate(labels)})
    if spec.variant is AsymmetryVariant.FIXED_EFFECTS:
        return BidderRoster.from_identities(n)
    covariates = rng.uniform(cfg.bidder_covariate_low, cfg.bidder_covariate_high, size=(n, len(spec.beta)))
    identities = range(n) if spec.variant is not AsymmetryVariant.LINEAR_REGRESSION else [None] * n
    return BidderRoster(
        z=tuple(Bidder(identity=i, covariates=tuple(row)) for i, row in zip(identities, covariates.tolist()))
    )


def simulate_dataset(cfg: SimConfig) -> List[AuctionRecord]:
    """
    Simulate ascending auctions: private values V_i = X'γ(U_i^{1/λ_i}) with U_i iid uniform, the highest value wins
    (ties to the lowest index) and pays the second highest value.

    :param cfg: The data generating process.
    :return: The simulated sample, identical for identical seeds.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.master_seed))
    sizes = cfg.bidder_counts
    by_type = cfg.spec.variant is AsymmetryVariant.TYPE_FIXED_EFFECTS
    records = []
    for auction_id in range(cfg.n_auctions):
        n = sizes[0] if len(sizes) == 1 else int(rng.choice(sizes))
        x = CovariateVector.from_characteristics(rng.uniform(cfg.covariate_low, cfg.covariate_high, size=cfg.n_covariates))
        roster = _draw_roster(cfg, n, rng)
        lambdas = roster_lambdas(cfg.spec, roster)
        levels = np.power(rng.uniform(size=n), 1.0 / lambdas)
        values = np.asarray(parent_quantile(cfg.curve, levels, x, clamp=True), dtype=float)
        winner = int(np.argmax(values))
        winning_bid = float(np.partition(values, n - 2)[n - 2])
        records.append(
            AuctionRecord(
                auction_id=auction_id,
                winning_bid=winning_bid,
                x=x,
                roster=roster,
                winner_index=None if by_type else winner,
                winner_type=roster.z[winner].label if by_type else None,
            )
        )
    return records


@dataclass
class MonteCarloReport:
    """
    Bias and standard error of the estimated private value quantile of each bidder type at a fixed auction.
    Arrays are shaped (types, levels).
    """

    tau_grid: np.ndarray
    type_labels: Tuple[str, ...]
    evaluation_point: Tuple[float, ...]
    truth: np.ndarray
    mean_estimate: np.ndarray
    bias: np.ndarray
    se: np.ndarray
    n_replications: int
    n_failed: int
    lambda_hat_mean: Dict[str, float]
    lambda_hat_se: Dict[str, float]

    def to_frame(self) -> pd.DataFrame:
        """
        :return: One row per level with bias and SE columns per type.
        """
        columns = {"tau": self.tau_grid}
        for k, label in enumerate(self.type_labels):
            columns[f"true_{label}"] = self.truth[k]
            columns[f"bias_{label}"] = self.bias[k]
            columns[f"se_{label}"] = self.se[k]
        return pd.DataFrame(columns)

    def to_dict(self) -> Dict:
        return {
            "tau_grid": self.tau_grid.tolist(),
            "type_labels": list(self.type_labels),
            "evaluation_point": list(self.evaluation_point),
            "truth": self.truth.tolist(),
            "mean_estimate": self.mean_estimate.tolist(),
            "bias": self.bias.tolist(),
            "se": self.se.tolist(),
            "n_replications": self.n_replications,
            "n_failed": self.n_failed,
            "lambda_hat_mean": self.lambda_hat_mean,
            "lambda_hat_se": self.lambda_hat_se,
        }


def run_mc_study(
    cfg: SimConfig,
    n_replications: int,
    tau_grid: Sequence[float],
    threads: int = 1,
    evaluation_point: Optional[Sequence[float]] = None,
) -> MonteCarloReport:
    """
    Repeat simulate then estimate (both stages) and compare V̂_type(τ|x) = X'γ̂(τ^{1/λ̂_type}) with the truth at a
    median covariate auction.

    :param cfg: A type fixed effects data generating process.
    :param n_replications: Number of simulated samples.
    :param tau_grid: Levels at which quantiles are compared.
    :param threads: Worker threads for replications.
    :param evaluation_point: Auction characteristics, the midpoint of the covariate law by default.
    :return: Bias and SE per type and level.
    """
    from .estimator import mle_fit, qr_curve

    if cfg.spec.variant is not AsymmetryVariant.TYPE_FIXED_EFFECTS:
        raise ConfigError("The Monte Carlo study compares bidder types and needs a type fixed effects design")
    labels = cfg.spec.type_labels
    taus = np.asarray(tau_grid, dtype=float)
    if evaluation_point is None:
        evaluation_point = [(cfg.covariate_low + cfg.covariate_high) / 2.0] * cfg.n_covariates
    x_eval = CovariateVector.from_characteristics(evaluation_point)
    truth = np.array([bidder_quantile(cfg.curve, taus, x_eval, cfg.spec.lambda_of(label)) for label in labels])

    def replicate(k: int) -> Tuple[np.ndarray, np.ndarray]:
        sample = simulate_dataset(replace(cfg, master_seed=derive_seed(cfg.master_seed, k)))
        fit = mle_fit(sample, AsymmetryVariant.TYPE_FIXED_EFFECTS, type_labels=labels)
        lambda_hat = np.array([fit.spec.lambda_of(label) for label in labels])
        levels = np.power(taus[None, :], 1.0 / lambda_hat[:, None])
        curve = qr_curve(sample, np.unique(levels), fit.spec)
        if curve.partial:
            raise DimensionError(f"Replication {k}: levels {curve.failed_levels} could not be estimated")
        return np.asarray(parent_quantile(curve, levels, x_eval)), lambda_hat

    outcomes = map_ordered(replicate, range(n_replications), max_workers=threads)
    successes = [outcome for outcome in outcomes if not isinstance(outcome, Exception)]
    failures = [outcome for outcome in outcomes if isinstance(outcome, Exception)]
    for failure in failures:
        if not isinstance(failure, AuctionQuantileError):
            raise failure
        logger.warning(f"Monte Carlo replication failed: {failure}")
    if not successes:
        raise failures[0]

    estimates = np.stack([estimate for estimate, _ in successes])
    lambdas = np.stack([lambda_hat for _, lambda_hat in successes])
    ddof = 1 if len(successes) > 1 else 0
    mean_estimate = estimates.mean(axis=0)
    logger.info(f"Monte Carlo study finished with {len(successes)} of {n_replications} replications")
    return MonteCarloReport(
        tau_grid=taus,
        type_labels=labels,
        evaluation_point=tuple(float(v) for v in evaluation_point),
        truth=truth,
        mean_estimate=mean_estimate,
        bias=mean_estimate - truth,
        se=estimates.std(axis=0, ddof=ddof),
        n_replications=len(successes),
        n_failed=len(failures),
        lambda_hat_mean={label: float(lambdas[:, k].mean()) for k, label in enumerate(labels)},
        lambda_hat_se={label: float(lambdas[:, k].std(ddof=ddof)) for k, label in enumerate(labels)},
    )

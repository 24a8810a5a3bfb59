#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .core_model import (
    DEFAULT_TAU_GRID,
    FINE_TAU_GRID,
    AsymmetrySpec,
    AsymmetryVariant,
    ClosedFormQuantileCurve,
    ParentQuantileCurve,
    QuantileCurve,
    parent_cdf_on_grid,
    psi,
)
from .errors import AuctionQuantileError, FlatLikelihood, InvalidParameters, NoQualifyingCells
from .estimator import (
    MAX_FAILURE_RATE,
    StageTwoDesign,
    collect_replicates,
    mle_fit,
    qr_fit,
    record_transform,
    replicate_generator,
    resample,
)
from .simulator import AuctionRecord
from .utils import logger, map_ordered

MIN_CELL = 30
RW_MIN_CELL = 100
VALUE_GRID_SIZE = 100
FINE_VALUE_GRID_SIZE = 1000
BOOTSTRAP_EDGE_LEVELS = (0.001, 0.999)
SIGMA_FLOOR = 1e-12
XI_ZERO_TOL = 1e-8

# bound on the (records x levels x observations) comparison block of the model cdf
_CHUNK_ELEMENTS = 2**24

RecordFilter = Callable[[AuctionRecord], bool]


@dataclass(frozen=True)
class CellStats:
    """
    Winner type statistics of the auctions with p bidders of the reference type and q of the other type.

    :param p: Reference type count.
    :param q: Other type count.
    :param L_pq: Number of auctions in the cell.
    :param omega_hat: Share of those auctions won by the reference type.
    :param omega_model: Model share p λ_p / (p λ_p + q λ_q).
    :param sigma_hat_sq: Variance estimate of √L_pq (ω̂ − ω).
    :param xi: Studentized difference of the empirical and model shares.
    :param p_value: Bootstrap p-value of |ξ|, when computed.
    """

    p: int
    q: int
    L_pq: int
    omega_hat: float
    omega_model: float
    sigma_hat_sq: float
    xi: float
    p_value: Optional[float] = None

    @property
    def abs_xi(self) -> float:
        return abs(self.xi)


@dataclass(frozen=True, eq=False)
class TestReport:
    """
    Result of a bootstrap specification test.

    :param name: Test name.
    :param statistic: Value on the original sample.
    :param p_value: Share of replicates at least as large as the statistic.
    :param B: Number of successful replicates.
    :param seed: Master seed of the replicate streams.
    :param per_cell: Per cell results, when the test has them.
    :param replicates: Replicate statistics.
    :param n_failed: Replicates dropped after a numerical failure.
    :param lambda_hat: Asymmetry parameters the statistic was computed with.
    :param extras: Test specific details.
    """

    __test__ = False

    name: str
    statistic: float
    p_value: float
    B: int
    seed: int
    per_cell: Optional[List[Any]] = None
    replicates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    n_failed: int = 0
    lambda_hat: Tuple[float, ...] = ()
    extras: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            "name": self.name,
            "statistic": self.statistic,
            "p_value": self.p_value,
            "B": self.B,
            "seed": self.seed,
            "n_failed": self.n_failed,
            "lambda_hat": list(self.lambda_hat),
            "extras": self.extras,
        }
        if self.per_cell is not None:
            payload["per_cell"] = [vars(cell) for cell in self.per_cell]
        return payload


@dataclass(frozen=True)
class RwCellResult:
    """
    RW statistic and p-value of one type proportion, or of the remaining auctions when p and q are None.
    """

    p: Optional[int]
    q: Optional[int]
    L_pq: int
    statistic: float
    p_value: float
    n_failed: int = 0

    @property
    def label(self) -> str:
        return "rest" if self.p is None else f"({self.p},{self.q})"


def _type_labels(spec: AsymmetrySpec) -> Tuple[str, str]:
    if spec.variant is not AsymmetryVariant.TYPE_FIXED_EFFECTS or len(spec.type_labels) != 2:
        raise InvalidParameters("Winner type tests need a two type specification")
    return spec.type_labels[0], spec.type_labels[1]


def _winner_label(record: AuctionRecord) -> Optional[str]:
    return record.roster.z[record.winner_position].label


def _cell_table(dataset: Sequence[AuctionRecord], labels: Tuple[str, str]) -> Dict[Tuple[int, int], Tuple[int, float]]:
    """
    :return: (L_pq, ω̂_pq) for every asymmetric cell present in the sample.
    """
    counts: Dict[Tuple[int, int], List[int]] = {}
    for record in dataset:
        p, q = record.type_cell(labels)
        if p == 0 or q == 0:
            continue
        cell = counts.setdefault((p, q), [0, 0])
        cell[0] += 1
        cell[1] += int(_winner_label(record) == labels[0])
    return {key: (size, wins / size) for key, (size, wins) in counts.items()}


def _model_share(p: int, q: int, spec: AsymmetrySpec, labels: Tuple[str, str]) -> float:
    strong, weak = spec.lambda_of(labels[0]), spec.lambda_of(labels[1])
    return p * strong / (p * strong + q * weak)


def _sigma_sq(cell: Tuple[int, int], table: Dict[Tuple[int, int], Tuple[int, float]]) -> float:
    """
    Variance of √L_pq (ω̂_pq − ω_pq(λ̂)), an own cell term plus the effect of λ̂ through every other asymmetric cell.
    Symmetric cells carry ω(1 − ω) = 0 and are left out of every sum.
    """
    total = sum(size for size, _ in table.values())
    spread = {key: (size / total) * omega * (1.0 - omega) for key, (size, omega) in table.items()}
    denominator = math.fsum(spread.values())
    size, omega = table[cell]
    own = omega * (1.0 - omega)
    weight = own / denominator if denominator > 0.0 else 0.0
    share = size / total
    others = math.fsum(value for key, value in spread.items() if key != cell)
    return (weight * share - 1.0) ** 2 * own + weight**2 * share * others


def _studentize(size: int, difference: float, sigma_sq: float) -> float:
    sigma = math.sqrt(max(sigma_sq, 0.0))
    if sigma <= SIGMA_FLOOR:
        return 0.0 if abs(difference) <= XI_ZERO_TOL else math.copysign(math.inf, difference)
    return math.sqrt(size) * difference / sigma


def cell_stats(dataset: Sequence[AuctionRecord], spec: AsymmetrySpec, min_cell: int = MIN_CELL) -> List[CellStats]:
    """
    ξ statistics of every asymmetric (p, q) cell with more than min_cell auctions.

    :param dataset: Two type auctions.
    :param spec: Fitted two type specification, reference type first.
    :param min_cell: Cells need strictly more auctions than this.
    :return: Qualifying cells ordered by (p, q).
    """
    labels = _type_labels(spec)
    table = _cell_table(dataset, labels)
    cells = []
    for (p, q), (size, omega) in sorted(table.items()):
        if size <= min_cell:
            continue
        model = _model_share(p, q, spec, labels)
        sigma_sq = _sigma_sq((p, q), table)
        cells.append(
            CellStats(
                p=p,
                q=q,
                L_pq=size,
                omega_hat=omega,
                omega_model=model,
                sigma_hat_sq=sigma_sq,
                xi=_studentize(size, omega - model, sigma_sq),
            )
        )
    if not cells:
        raise NoQualifyingCells(f"No asymmetric (p, q) cell has more than {min_cell} auctions")
    return cells


def max_xi_test(
    dataset: Sequence[AuctionRecord],
    B: int,
    seed: int,
    min_cell: int = MIN_CELL,
    spec: Optional[AsymmetrySpec] = None,
    type_labels: Optional[Sequence[str]] = None,
    threads: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
) -> TestReport:
    """
    Bootstrap test of the power asymmetry restriction on winner types, based on max |ξ_pq| over qualifying cells.
    Each replicate re-estimates λ and recenters ξ at the original sample's deviation. Auctions are taken in auction_id
    order, so the report does not depend on the order of the records.

    :param dataset: Two type auctions.
    :param B: Bootstrap replicates.
    :param seed: Master seed.
    :param min_cell: Cell size threshold.
    :param spec: Fitted specification; estimated from the dataset when omitted.
    :param type_labels: Labels with the reference type first, used when the specification is estimated here.
    :param threads: Worker threads.
    :param max_failure_rate: Largest tolerated share of failed replicates.
    :return: The report, with per cell p-values and their empirical cdf in extras.
    """
    dataset = _in_id_order(dataset)
    spec = spec or mle_fit(dataset, AsymmetryVariant.TYPE_FIXED_EFFECTS, type_labels=type_labels).spec
    labels = _type_labels(spec)
    cells = cell_stats(dataset, spec, min_cell)
    statistic = max(cell.abs_xi for cell in cells)
    centers = {(cell.p, cell.q): cell.omega_model - cell.omega_hat for cell in cells}

    def replicate(b: int) -> np.ndarray:
        sample = resample(dataset, replicate_generator(seed, b))
        spec_b = mle_fit(sample, AsymmetryVariant.TYPE_FIXED_EFFECTS, type_labels=labels).spec
        table = _cell_table(sample, labels)
        values = np.full(len(cells), np.nan)
        for k, cell in enumerate(cells):
            key = (cell.p, cell.q)
            if key not in table or table[key][0] <= min_cell:
                continue
            size, omega = table[key]
            deviation = _model_share(cell.p, cell.q, spec_b, labels) - omega - centers[key]
            values[k] = abs(_studentize(size, deviation, _sigma_sq(key, table)))
        return values

    outcomes = map_ordered(replicate, range(B), max_workers=threads)
    successes, n_failed = collect_replicates(outcomes, B, max_failure_rate)
    per_cell = np.vstack(successes)
    maxima = np.array([np.nanmax(row) if np.any(~np.isnan(row)) else 0.0 for row in per_cell])
    p_value = float(np.mean(statistic <= maxima))

    with_p = []
    for k, cell in enumerate(cells):
        drawn = per_cell[:, k][~np.isnan(per_cell[:, k])]
        with_p.append(replace(cell, p_value=float(np.mean(cell.abs_xi <= drawn)) if drawn.size else None))
    observed = np.sort([cell.p_value for cell in with_p if cell.p_value is not None])
    ecdf = [{"p_value": float(v), "ecdf": (k + 1) / observed.size} for k, v in enumerate(observed)]

    logger.info(f"max |xi| = {statistic:.4f}, bootstrap p-value {p_value:.4f} over {len(successes)} replicates")
    return TestReport(
        name="max_xi",
        statistic=float(statistic),
        p_value=p_value,
        B=len(successes),
        seed=seed,
        per_cell=with_p,
        replicates=maxima,
        n_failed=n_failed,
        lambda_hat=tuple(spec.params.tolist()),
        extras={"min_cell": min_cell, "n_cells": len(cells), "pvalue_cdf": ecdf},
    )


def xi_cell_frame(report: TestReport) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"p": cell.p, "q": cell.q, "abs_xi": cell.abs_xi, "p_value": cell.p_value, "L_pq": cell.L_pq}
            for cell in report.per_cell or []
        ]
    )


def _curve_band(curve: QuantileCurve, record: AuctionRecord) -> Tuple[float, float]:
    values = curve.to_grid().values(record.x)
    return float(values.min()), float(values.max())


def winning_bid_quantile_grid(
    record: AuctionRecord,
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
    value_grid_size: int = VALUE_GRID_SIZE,
) -> np.ndarray:
    """
    Winning bid quantiles of one auction by rearrangement: with v_j = lo + j·step, j = 1..J, on the band [lo, hi]
    of X'γ̂ over the curve grid, Ŵ(τ_i) = lo + step·#{j : Ψ(F̂(v_j|X)) < τ_i}. The result is nondecreasing in τ
    for any input curve.

    :param record: The auction, supplying X and the winner's transform.
    :param curve: Parent quantile curve.
    :param spec: Asymmetry specification.
    :param tau_grid: Winning bid levels τ_i.
    :param value_grid_size: J.
    :return: Ŵ at every level.
    """
    lo, hi = _curve_band(curve, record)
    step = (hi - lo) / value_grid_size
    values = lo + step * np.arange(1, value_grid_size + 1)
    levels = np.sort(np.atleast_1d(psi(parent_cdf_on_grid(curve, record.x, values), record_transform(record, spec))))
    below = np.searchsorted(levels, np.asarray(tau_grid, dtype=float), side="left")
    return lo + step * below


def _quantile_table(
    dataset: Sequence[AuctionRecord],
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    tau_grid: Sequence[float],
    value_grid_size: int,
) -> np.ndarray:
    return np.vstack([winning_bid_quantile_grid(record, curve, spec, tau_grid, value_grid_size) for record in dataset])


@dataclass(frozen=True, eq=False)
class _RwSample:
    w: np.ndarray
    x: np.ndarray
    w_hat: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


def _rw_value(sample: _RwSample) -> float:
    """
    Σ over in band observations of (Ĝ_model(W_ℓ, X_ℓ) − Ĝ(W_ℓ, X_ℓ))², where the model cdf averages, over records k
    with X_k ≤ X_ℓ component-wise, the share (1/(T+1)) Σ_i 1[Ŵ_k(τ_i) ≤ W_ℓ].
    """
    n, n_tau = sample.w_hat.shape
    band = np.flatnonzero((sample.w >= sample.lo) & (sample.w <= sample.hi))
    chunk = max(1, _CHUNK_ELEMENTS // max(n * n_tau, 1))
    total = 0.0
    for start in range(0, band.size, chunk):
        columns = band[start : start + chunk]
        x_le = np.all(sample.x[:, None, :] <= sample.x[None, columns, :], axis=2)
        w_le = sample.w[:, None] <= sample.w[None, columns]
        empirical = np.mean(x_le & w_le, axis=0)
        below = np.sum(sample.w_hat[:, :, None] <= sample.w[None, None, columns], axis=1) / (n_tau + 1.0)
        model = np.mean(x_le * below, axis=0)
        total += float(np.sum((model - empirical) ** 2))
    return total


def _rw_sample(
    dataset: Sequence[AuctionRecord], w: np.ndarray, w_hat: np.ndarray, bands: np.ndarray
) -> _RwSample:
    return _RwSample(
        w=np.asarray(w, dtype=float),
        x=np.vstack([record.x.characteristics for record in dataset]),
        w_hat=w_hat,
        lo=bands[:, 0],
        hi=bands[:, 1],
    )


def _in_id_order(dataset: Sequence[AuctionRecord]) -> List[AuctionRecord]:
    return sorted(dataset, key=lambda record: record.auction_id)


def _restricted(dataset: Sequence[AuctionRecord], restrict: Optional[RecordFilter]) -> List[AuctionRecord]:
    sample = [record for record in _in_id_order(dataset) if restrict is None or restrict(record)]
    if not sample:
        raise NoQualifyingCells("The subsample filter keeps no auction")
    return sample


def rw_statistic(
    dataset: Sequence[AuctionRecord],
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    restrict: Optional[RecordFilter] = None,
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
    value_grid_size: int = VALUE_GRID_SIZE,
) -> float:
    """
    Distance between the model implied and the empirical joint cdf of (W, X) at the observations, restricted to
    winning bids inside [min X'γ̂, max X'γ̂]. It is a sum over auctions, not a mean, and does not depend on
    the order of the records.

    :param dataset: The auctions.
    :param curve: Fitted parent curve.
    :param spec: Fitted asymmetry specification.
    :param restrict: Keeps the auctions that enter the statistic.
    :param tau_grid: Levels of the model winning bid quantiles.
    :param value_grid_size: Value grid points of the rearrangement.
    :return: RW ≥ 0.
    """
    sample = _restricted(dataset, restrict)
    bands = np.array([_curve_band(curve, record) for record in sample])
    w = np.array([record.winning_bid for record in sample])
    w_hat = _quantile_table(sample, curve, spec, tau_grid, value_grid_size)
    return _rw_value(_rw_sample(sample, w, w_hat, bands))


def _cell_key(record: AuctionRecord, labels: Sequence[str]) -> Tuple[int, ...]:
    return record.type_cell(labels) if labels else (record.roster.n,)


def _resample_indices(
    keys: Sequence[Tuple[int, ...]], rng: np.random.Generator, match_type_counts: bool
) -> np.ndarray:
    n = len(keys)
    if not match_type_counts:
        return rng.integers(0, n, size=n)
    groups: Dict[Tuple[int, ...], List[int]] = {}
    for index, key in enumerate(keys):
        groups.setdefault(key, []).append(index)
    drawn = [np.asarray(members)[rng.integers(0, len(members), size=len(members))] for members in groups.values()]
    return np.concatenate(drawn)


def bootstrap_curve(
    dataset: Sequence[AuctionRecord],
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    edge_levels: Sequence[float] = BOOTSTRAP_EDGE_LEVELS,
) -> ParentQuantileCurve:
    """
    The parent curve behind the bootstrap draws of winning bids: the fitted grid extended with Stage 2 fits at the
    edge levels, so the fine value grid runs from X'γ̂(0.001) to X'γ̂(0.999). Closed forms are sampled there.

    :param dataset: The auctions the curve was fitted on.
    :param curve: Fitted parent curve.
    :param spec: Fitted asymmetry specification.
    :param edge_levels: Levels added below and above the fitted grid.
    :return: The extended curve.
    """
    if isinstance(curve, ClosedFormQuantileCurve):
        return curve.to_grid(np.unique(np.concatenate((DEFAULT_TAU_GRID, edge_levels))))
    grid, gamma = list(curve.grid), list(curve.gamma)
    design = None
    for level in edge_levels:
        if curve.lower <= level <= curve.upper:
            continue
        try:
            design = design or StageTwoDesign.build(dataset, spec)
            gamma.append(qr_fit(dataset, level, spec, design=design).gamma_hat)
            grid.append(level)
        except AuctionQuantileError as error:
            logger.warning(f"Quantile regression at tau={level} failed, bootstrap draws stop at the fitted grid: {error}")
    order = np.argsort(grid)
    return ParentQuantileCurve(
        grid=np.asarray(grid, dtype=float)[order],
        gamma=np.asarray(gamma, dtype=float)[order],
        failed_levels=curve.failed_levels,
    )


def _refit(sample: Sequence[AuctionRecord], spec: AsymmetrySpec) -> AsymmetrySpec:
    labels = spec.type_labels if spec.type_labels else None
    try:
        return mle_fit(sample, spec.variant, type_labels=labels, normalization=spec.normalization).spec
    except FlatLikelihood:
        # winner identities carry no information on λ here, and the level transform does not depend on it
        return spec


def rw_bootstrap_pvalue(
    dataset: Sequence[AuctionRecord],
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    B: int,
    seed: int,
    restrict: Optional[RecordFilter] = None,
    match_type_counts: bool = False,
    threads: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
    value_grid_size: int = VALUE_GRID_SIZE,
    fine_curve: Optional[QuantileCurve] = None,
) -> TestReport:
    """
    Two step bootstrap of the RW statistic. Each replicate resamples auctions, re-estimates λ from their winner
    identities, draws each winning bid uniformly from the auction's fine grid quantiles Ŵ(i/1000) under the original
    fit, and recomputes RW with the re-estimated λ. The fine quantiles use a value grid on [X'γ̂(0.001),
    X'γ̂(0.999)], while the statistic keeps the band of the fitted curve.

    :param dataset: The auctions.
    :param curve: Fitted parent curve, held fixed across replicates.
    :param spec: Fitted asymmetry specification.
    :param B: Bootstrap replicates.
    :param seed: Master seed.
    :param restrict: Keeps the auctions that enter the statistic and the resampling.
    :param match_type_counts: Resample within type proportion cells so each replicate keeps the cell sizes.
    :param threads: Worker threads.
    :param max_failure_rate: Largest tolerated share of failed replicates.
    :param tau_grid: Levels of the model winning bid quantiles in the statistic.
    :param value_grid_size: Value grid points of the statistic's rearrangement.
    :param fine_curve: Curve of the bootstrap draws, bootstrap_curve on the whole dataset by default.
    :return: The report.
    """
    if fine_curve is None:
        fine_curve = bootstrap_curve(_in_id_order(dataset), curve, spec)
    sample = _restricted(dataset, restrict)
    bands = np.array([_curve_band(curve, record) for record in sample])
    w = np.array([record.winning_bid for record in sample])
    statistic = _rw_value(_rw_sample(sample, w, _quantile_table(sample, curve, spec, tau_grid, value_grid_size), bands))
    fine = _quantile_table(sample, fine_curve, spec, FINE_TAU_GRID, FINE_VALUE_GRID_SIZE)
    keys = [_cell_key(record, spec.type_labels) for record in sample]

    def replicate(b: int) -> float:
        rng = replicate_generator(seed, b)
        indices = _resample_indices(keys, rng, match_type_counts)
        drawn = [sample[i] for i in indices]
        spec_b = _refit(drawn, spec)
        w_star = fine[indices, rng.integers(0, fine.shape[1], size=indices.size)]
        unique, inverse = np.unique(indices, return_inverse=True)
        table = _quantile_table([sample[i] for i in unique], curve, spec_b, tau_grid, value_grid_size)
        return _rw_value(_rw_sample(drawn, w_star, table[inverse], bands[indices]))

    outcomes = map_ordered(replicate, range(B), max_workers=threads)
    successes, n_failed = collect_replicates(outcomes, B, max_failure_rate)
    replicates = np.asarray(successes, dtype=float)
    p_value = float(np.mean(statistic <= replicates))
    logger.info(f"RW = {statistic:.6f} on {len(sample)} auctions, bootstrap p-value {p_value:.4f}")
    return TestReport(
        name="rw",
        statistic=statistic,
        p_value=p_value,
        B=len(successes),
        seed=seed,
        replicates=replicates,
        n_failed=n_failed,
        lambda_hat=tuple(spec.params.tolist()),
        extras={"n_auctions": len(sample), "match_type_counts": match_type_counts},
    )


def rw_cell_tests(
    dataset: Sequence[AuctionRecord],
    curve: QuantileCurve,
    spec: AsymmetrySpec,
    B: int,
    seed: int,
    min_cell: int = RW_MIN_CELL,
    restrict: Optional[RecordFilter] = None,
    threads: int = 1,
    max_failure_rate: float = MAX_FAILURE_RATE,
) -> List[RwCellResult]:
    """
    RW test conditional on the type proportion: one test per (p, q) cell with more than min_cell auctions and one
    for the remaining auctions, each resampled within cells.

    :return: One result per cell, ordered by (p, q), then the rest group when it is not empty.
    """
    labels = spec.type_labels
    sample = _restricted(dataset, restrict)
    sizes: Dict[Tuple[int, ...], int] = {}
    for record in sample:
        key = _cell_key(record, labels)
        sizes[key] = sizes.get(key, 0) + 1
    selected = sorted(key for key, size in sizes.items() if size > min_cell)

    groups: List[Tuple[Optional[Tuple[int, ...]], RecordFilter]] = [
        (key, lambda record, key=key: _cell_key(record, labels) == key) for key in selected
    ]
    if sum(sizes[key] for key in selected) < len(sample):
        groups.append((None, lambda record: _cell_key(record, labels) not in selected))

    fine_curve = bootstrap_curve(_in_id_order(dataset), curve, spec)
    results = []
    for key, member in groups:
        report = rw_bootstrap_pvalue(
            sample,
            curve,
            spec,
            B,
            seed,
            restrict=member,
            match_type_counts=True,
            threads=threads,
            max_failure_rate=max_failure_rate,
            fine_curve=fine_curve,
        )
        p, q = (None, None) if key is None else (key[0], key[1] if len(key) > 1 else None)
        results.append(
            RwCellResult(
                p=p,
                q=q,
                L_pq=report.extras["n_auctions"],
                statistic=report.statistic,
                p_value=report.p_value,
                n_failed=report.n_failed,
            )
        )
    return results


def rw_cell_frame(results: Sequence[RwCellResult]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {"cell": r.label, "p": r.p, "q": r.q, "L_pq": r.L_pq, "rw": r.statistic, "p_value": r.p_value}
            for r in results
        ]
    )

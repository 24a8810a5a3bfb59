#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy.optimize import bisect, brentq, minimize_scalar

from .core_model import (
    AsymmetrySpec,
    BidderRoster,
    CovariateVector,
    ParentQuantileCurve,
    QuantileCurve,
    parent_quantile,
    power_quantile_curve,
    roster_lambdas,
)
from .errors import GridRangeError, InvalidParameters, RootFindingError
from .utils import logger, map_ordered

DEFAULT_EPSILON = 0.1
REVENUE_GRID_SIZE = 981
CLOSED_FORM_PARTITION = 2000
CLOSED_FORM_STEP = 1e-4
MISSPEC_BRACKET = (0.01, 0.99)

TABLE1_ROWS = tuple((0.1, lambda2, kappa) for lambda2 in (3.9, 0.9) for kappa in (1.0, 2.0, 5.0, 10.0, 50.0))
TABLE2_ROWS = tuple((lambda1, 1.0 - lambda1, 1.0) for lambda1 in (0.1, 0.2, 0.3, 0.4, 0.5))
MISSPEC_PRESETS = {"table1": TABLE1_ROWS, "table2": TABLE2_ROWS, "all": TABLE1_ROWS + TABLE2_ROWS}


@dataclass(frozen=True, eq=False)
class RevenueKernel:
    """
    The exponents of one auction's bidders, with the pieces of the expected revenue formula that depend on them.
    """

    lambdas: np.ndarray

    def __post_init__(self) -> None:
        lambdas = np.asarray(self.lambdas, dtype=float).reshape(-1)
        if lambdas.size < 2 or np.any(~np.isfinite(lambdas)) or np.any(lambdas <= 0.0):
            raise InvalidParameters(f"Revenue needs at least two positive exponents, got {lambdas}")
        object.__setattr__(self, "lambdas", lambdas)

    @classmethod
    def from_roster(cls, roster: BidderRoster, spec: AsymmetrySpec) -> "RevenueKernel":
        return cls(roster_lambdas(spec, roster))

    @property
    def n(self) -> int:
        return self.lambdas.size

    @property
    def total(self) -> float:
        return math.fsum(self.lambdas)

    @property
    def excluded(self) -> np.ndarray:
        return self.total - self.lambdas

    def no_sale(self, r: float) -> float:
        return r**self.total

    def reserve_weight(self, r: float) -> float:
        """
        Σ_i r^{Λ_{N|i}} (1 − r^{λ_i}), the probability that exactly one bidder values the good above the reserve.
        """
        return float(np.sum(np.power(r, self.excluded) * (1.0 - np.power(r, self.lambdas))))

    def antiderivative(self, t: np.ndarray) -> np.ndarray:
        """
        K(t) = (1 − N) t^{Λ_N} + Σ_i t^{Λ_{N|i}}, whose derivative weights V(t|X) in the revenue integral.
        """
        t = np.asarray(t, dtype=float)
        return (1.0 - self.n) * np.power(t, self.total) + np.sum(np.power(t[..., None], self.excluded), axis=-1)

    def foc_factor(self, r: float) -> float:
        return r / self.total * float(np.sum(np.power(r, -self.lambdas) - 1.0))


@dataclass(frozen=True, eq=False)
class RevenueCurve:
    """
    Expected seller revenue on a grid of reserve levels.

    :param r_grid: Reserve levels in [ε, 1 − ε].
    :param pi: Expected revenue at each level.
    :param reserve_prices: R = V(r|X) at each level.
    :param v0: Seller value.
    :param epsilon: Truncation index.
    :param context: Auction description for provenance.
    """

    r_grid: np.ndarray
    pi: np.ndarray
    reserve_prices: np.ndarray
    v0: float
    epsilon: float
    context: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.pi)):
            raise InvalidParameters("Expected revenue is not finite on the reserve grid")

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"r": self.r_grid, "reserve_price": self.reserve_prices, "revenue": self.pi})

    def optimum(self) -> "ReserveSolution":
        return _argmax_solution(self)


@dataclass(frozen=True)
class ReserveSolution:
    """
    :param r_star: Optimal reserve level.
    :param reserve_price: R* = V(r*|X).
    :param pi_star: Expected revenue at r*.
    """

    r_star: float
    reserve_price: float
    pi_star: float

    def to_dict(self) -> Dict[str, float]:
        return {"r_star": self.r_star, "reserve_price": self.reserve_price, "pi_star": self.pi_star}


@dataclass(frozen=True)
class MisspecRow:
    """
    Optimal reserve price and revenue under the true asymmetric model against the reserve a symmetric model fitted
    to the same winning bids would choose. Reserve prices are on the value scale.
    """

    lambda1: float
    lambda2: float
    kappa: float
    rp_asym: float
    rp_mis: float
    rev_asym: float
    rev_mis: float
    pct_loss: float

    @property
    def loss_percent(self) -> float:
        return 100.0 * self.pct_loss


@dataclass(frozen=True)
class TypeSwapRow:
    """
    Revenues of one (N, type split) cell of a two type market.

    :param n: Number of bidders.
    :param counts: Bidders per type label.
    :param pi_nonstrategic: Revenue without reserve, r = ε.
    :param pi_strategic: Revenue at the optimal reserve.
    :param r_star: Optimal reserve level.
    :param reserve_price: Optimal reserve price.
    :param pi_added: Non strategic revenue with one more bidder of each type.
    :param bk_violation: Whether adding one bidder of that type, without reserve, earns less than the optimal reserve
        with the original bidders.
    :param pct_swap_nonstrategic: Percentage change of the non strategic revenue when one weak bidder is replaced by
        one strong bidder, None without weak bidders.
    :param pct_swap_strategic: The same change for the strategic revenue.
    """

    n: int
    counts: Dict[str, int]
    pi_nonstrategic: float
    pi_strategic: float
    r_star: float
    reserve_price: float
    pi_added: Dict[str, float]
    bk_violation: Dict[str, bool]
    pct_swap_nonstrategic: Optional[float] = None
    pct_swap_strategic: Optional[float] = None

    def to_record(self) -> Dict[str, Any]:
        record: Dict[str, Any] = {"n": self.n}
        record.update({f"n_{label}": count for label, count in self.counts.items()})
        record.update(
            {
                "pi_nonstrategic": self.pi_nonstrategic,
                "pi_strategic": self.pi_strategic,
                "r_star": self.r_star,
                "reserve_price": self.reserve_price,
            }
        )
        record.update({f"pi_add_{label}": value for label, value in self.pi_added.items()})
        record.update({f"bk_violation_{label}": flag for label, flag in self.bk_violation.items()})
        record["pct_swap_nonstrategic"] = self.pct_swap_nonstrategic
        record["pct_swap_strategic"] = self.pct_swap_strategic
        return record


def _check_level(r: float, epsilon: float) -> None:
    if not (epsilon - 1e-12 <= r <= 1.0 - epsilon + 1e-12):
        raise GridRangeError(f"Reserve level {r} outside the truncated range [{epsilon}, {1.0 - epsilon}]")


def _stieltjes_integral(
    curve: QuantileCurve, x: CovariateVector, antiderivative: Any, lower: float, upper: float
) -> float:
    """
    ∫ V(t|X) dK(t) over [lower, upper]. Gridded curves are step functions, so the integral over each grid cell is
    exact; closed forms use midpoints of a uniform partition.
    """
    if upper <= lower:
        return 0.0
    if isinstance(curve, ParentQuantileCurve):
        inner = curve.grid[(curve.grid > lower) & (curve.grid < upper)]
        points = np.concatenate(([lower], inner, [upper]))
        nodes = points[:-1]
    else:
        points = np.linspace(lower, upper, CLOSED_FORM_PARTITION + 1)
        nodes = 0.5 * (points[:-1] + points[1:])
    values = np.asarray(parent_quantile(curve, nodes, x, clamp=True), dtype=float)
    return float(np.sum(values * np.diff(antiderivative(points))))


def _revenue(
    r: float, x: CovariateVector, kernel: RevenueKernel, curve: QuantileCurve, v0: float, epsilon: float
) -> float:
    reserve = float(parent_quantile(curve, r, x, clamp=True))
    integral = _stieltjes_integral(curve, x, kernel.antiderivative, r, 1.0 - epsilon)
    return v0 * kernel.no_sale(r) + reserve * kernel.reserve_weight(r) + integral


def selling_probability(r: float, roster: BidderRoster, spec: AsymmetrySpec) -> float:
    """
    Probability that at least one bidder values the good above the reserve, 1 − r^{Λ_N}.
    """
    if not 0.0 <= r <= 1.0:
        raise GridRangeError(f"Reserve level must lie in [0, 1], got {r}")
    return 1.0 - RevenueKernel.from_roster(roster, spec).no_sale(r)


def expected_revenue(
    r: float,
    x: CovariateVector,
    roster: BidderRoster,
    spec: AsymmetrySpec,
    curve: QuantileCurve,
    v0: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """
    Seller expected payoff at reserve level r,
    V_0 r^{Λ_N} + R Σ_i r^{Λ_{N|i}} (1 − r^{λ_i}) + ∫_r^{1−ε} V(t|X) dK(t) with R = V(r|X).

    :param r: Reserve level in [ε, 1 − ε].
    :param x: Auction covariates.
    :param roster: The bidders.
    :param spec: Asymmetry specification.
    :param curve: Parent quantile curve.
    :param v0: Seller value.
    :param epsilon: Truncation index of the upper tail.
    :return: The expected revenue.
    """
    _check_level(r, epsilon)
    return _revenue(r, x, RevenueKernel.from_roster(roster, spec), curve, v0, epsilon)


def _reserve_grid(epsilon: float, grid_size: int) -> np.ndarray:
    if grid_size < 2:
        raise GridRangeError(f"The reserve grid needs at least two points, got {grid_size}")
    return np.linspace(epsilon, 1.0 - epsilon, grid_size)


def _curve_from_kernel(
    x: CovariateVector, kernel: RevenueKernel, curve: QuantileCurve, v0: float, epsilon: float, grid_size: int
) -> RevenueCurve:
    r_grid = _reserve_grid(epsilon, grid_size)
    pi = np.array([_revenue(r, x, kernel, curve, v0, epsilon) for r in r_grid])
    prices = np.asarray(parent_quantile(curve, r_grid, x, clamp=True), dtype=float)
    return RevenueCurve(
        r_grid=r_grid,
        pi=pi,
        reserve_prices=prices,
        v0=v0,
        epsilon=epsilon,
        context={"x": x.characteristics.tolist(), "lambdas": kernel.lambdas.tolist()},
    )


def revenue_curve(
    x: CovariateVector,
    roster: BidderRoster,
    spec: AsymmetrySpec,
    curve: QuantileCurve,
    v0: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
    grid_size: int = REVENUE_GRID_SIZE,
) -> RevenueCurve:
    """
    Expected revenue on a uniform grid of reserve levels over [ε, 1 − ε].
    """
    return _curve_from_kernel(x, RevenueKernel.from_roster(roster, spec), curve, v0, epsilon, grid_size)


def _argmax_solution(revenue: RevenueCurve) -> ReserveSolution:
    # np.argmax returns the first maximum, the smallest reserve level
    k = int(np.argmax(revenue.pi))
    return ReserveSolution(
        r_star=float(revenue.r_grid[k]), reserve_price=float(revenue.reserve_prices[k]), pi_star=float(revenue.pi[k])
    )


def optimal_reserve(
    x: CovariateVector,
    roster: BidderRoster,
    spec: AsymmetrySpec,
    curve: QuantileCurve,
    v0: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
    grid_size: int = REVENUE_GRID_SIZE,
) -> ReserveSolution:
    """
    Grid maximizer of the expected revenue, ties broken towards the smallest reserve level.
    """
    return revenue_curve(x, roster, spec, curve, v0, epsilon, grid_size).optimum()


def _curve_derivative(curve: QuantileCurve, r: float, x: CovariateVector) -> float:
    if isinstance(curve, ParentQuantileCurve):
        k = int(np.argmin(np.abs(curve.grid - r)))
        left, right = curve.grid[max(k - 1, 0)], curve.grid[min(k + 1, curve.grid.size - 1)]
    else:
        left, right = max(r - CLOSED_FORM_STEP, 0.0), min(r + CLOSED_FORM_STEP, 1.0)
    if right <= left:
        raise GridRangeError("The quantile curve needs two grid levels for a derivative")
    values = parent_quantile(curve, np.array([left, right]), x, clamp=True)
    return float((values[1] - values[0]) / (right - left))


def foc_residual(
    r: float, x: CovariateVector, roster: BidderRoster, spec: AsymmetrySpec, curve: QuantileCurve, v0: float = 0.0
) -> float:
    """
    R − V'(r|X) (r/Λ_N) Σ_i (r^{−λ_i} − 1) − V_0, zero at a stationary reserve level. V' is a central difference over
    neighbouring grid levels, or with step 1e-4 for closed form curves.
    """
    if not 0.0 < r < 1.0:
        raise GridRangeError(f"Reserve level must lie in (0, 1), got {r}")
    kernel = RevenueKernel.from_roster(roster, spec)
    reserve = float(parent_quantile(curve, r, x, clamp=True))
    return reserve - _curve_derivative(curve, r, x) * kernel.foc_factor(r) - v0


def _symmetric_antiderivative(n: int) -> Any:
    def antiderivative(t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return n * np.power(t, n - 1) - (n - 1) * np.power(t, n)

    return antiderivative


def symmetric_expected_revenue(
    r: float, x: CovariateVector, n: int, curve: QuantileCurve, v0: float = 0.0, epsilon: float = 0.0
) -> float:
    """
    Expected revenue when all n bidders draw from the parent distribution,
    V_0 r^N + R N r^{N−1} (1 − r) + N (N − 1) ∫_r^{1−ε} V(t|X) t^{N−2} (1 − t) dt.
    """
    if n < 2:
        raise InvalidParameters(f"A symmetric auction needs at least two bidders, got {n}")
    _check_level(r, epsilon)
    reserve = float(parent_quantile(curve, r, x, clamp=True))
    integral = _stieltjes_integral(curve, x, _symmetric_antiderivative(n), r, 1.0 - epsilon)
    return v0 * r**n + reserve * n * r ** (n - 1) * (1.0 - r) + integral


def symmetric_optimal_reserve(
    x: CovariateVector,
    n: int,
    curve: QuantileCurve,
    v0: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
    grid_size: int = REVENUE_GRID_SIZE,
) -> ReserveSolution:
    """
    Grid maximizer of the symmetric expected revenue, the reserve a seller ignoring asymmetry would choose.
    """
    r_grid = _reserve_grid(epsilon, grid_size)
    pi = np.array([symmetric_expected_revenue(r, x, n, curve, v0, epsilon) for r in r_grid])
    prices = np.asarray(parent_quantile(curve, r_grid, x, clamp=True), dtype=float)
    return _argmax_solution(RevenueCurve(r_grid=r_grid, pi=pi, reserve_prices=prices, v0=v0, epsilon=epsilon))


def _symmetrized_quantile(lambda1: float, lambda2: float, kappa: float) -> Any:
    """
    Quantile function of the symmetric value distribution whose two bidder winning bid law matches the
    asymmetric one, F_S(v) = 1 − ((1 − v^{κλ_1})(1 − v^{κλ_2}))^{1/2}.
    """

    def cdf(v: float) -> float:
        return 1.0 - math.sqrt(max((1.0 - v ** (kappa * lambda1)) * (1.0 - v ** (kappa * lambda2)), 0.0))

    def quantile(t: float) -> float:
        if t <= 0.0:
            return 0.0
        if t >= 1.0:
            return 1.0
        return brentq(lambda v: cdf(v) - t, 0.0, 1.0, xtol=1e-14, rtol=4.0 * np.finfo(float).eps)

    return quantile


def _misspecified_reserve_level(quantile: Any) -> float:
    def foc(r: float) -> float:
        derivative = (quantile(r + CLOSED_FORM_STEP) - quantile(r - CLOSED_FORM_STEP)) / (2.0 * CLOSED_FORM_STEP)
        return quantile(r) - derivative * (1.0 - r)

    low, high = MISSPEC_BRACKET
    if foc(low) * foc(high) > 0.0:
        raise RootFindingError(f"The symmetric reserve condition does not change sign on [{low}, {high}]")
    return bisect(foc, low, high, xtol=1e-12)


def misspec_study(
    lambda1: float, lambda2: float, kappa: float, grid_size: int = REVENUE_GRID_SIZE
) -> MisspecRow:
    """
    Two bidders without covariates with values F_i(v) = v^{κλ_i} on [0, 1]. Compares the optimal reserve under the
    true model with the reserve a symmetric model fitted to the same winning bids would choose, both evaluated with
    the true revenue formula.

    :param lambda1: Exponent of the first bidder.
    :param lambda2: Exponent of the second bidder.
    :param kappa: Curvature of the parent distribution F(v) = v^κ.
    :param grid_size: Reserve grid points of the true optimum before polishing.
    :return: The comparison row.
    """
    if min(lambda1, lambda2, kappa) <= 0.0:
        raise InvalidParameters(f"lambda1, lambda2 and kappa must be positive, got {(lambda1, lambda2, kappa)}")
    kernel = RevenueKernel(np.array([lambda1, lambda2]))
    curve = power_quantile_curve(1.0 / kappa, (1.0,))
    x = CovariateVector.from_characteristics([])

    def true_revenue(r: float) -> float:
        return _revenue(r, x, kernel, curve, 0.0, 0.0)

    symmetric_quantile = _symmetrized_quantile(lambda1, lambda2, kappa)
    rp_mis = symmetric_quantile(_misspecified_reserve_level(symmetric_quantile))
    # the misspecified reserve price, read on the true parent scale
    r_mis = rp_mis**kappa
    rev_mis = true_revenue(r_mis)

    grid = _curve_from_kernel(x, kernel, curve, 0.0, 0.0, grid_size)
    k = int(np.argmax(grid.pi))
    bracket = (grid.r_grid[max(k - 1, 0)], grid.r_grid[min(k + 1, grid.r_grid.size - 1)])
    polished = minimize_scalar(lambda r: -true_revenue(r), bounds=bracket, method="bounded", options={"xatol": 1e-10})
    candidates = [(float(grid.pi[k]), float(grid.r_grid[k])), (-float(polished.fun), float(polished.x)), (rev_mis, r_mis)]
    rev_asym, r_asym = max(candidates)

    row = MisspecRow(
        lambda1=lambda1,
        lambda2=lambda2,
        kappa=kappa,
        rp_asym=r_asym ** (1.0 / kappa),
        rp_mis=rp_mis,
        rev_asym=rev_asym,
        rev_mis=rev_mis,
        pct_loss=(rev_asym - rev_mis) / rev_asym,
    )
    logger.info(f"Misspecification row {(lambda1, lambda2, kappa)}: loss {row.loss_percent:.3f}%")
    return row


def misspec_table(
    rows: Union[str, Sequence[Tuple[float, float, float]]] = "table1", threads: int = 1
) -> pd.DataFrame:
    """
    :param rows: A preset name (table1, table2, all) or explicit (λ_1, λ_2, κ) triples.
    :param threads: Worker threads, one row per task.
    :return: One line per row with reserve prices, revenues and the percentage loss.
    """
    triples = MISSPEC_PRESETS[rows] if isinstance(rows, str) else tuple(rows)
    results = map_ordered(lambda triple: misspec_study(*triple), triples, max_workers=threads)
    for result in results:
        if isinstance(result, Exception):
            raise result
    frame = pd.DataFrame([vars(row) for row in results])
    frame["loss_percent"] = 100.0 * frame["pct_loss"]
    return frame


def _weak_and_strong(spec: AsymmetrySpec) -> Tuple[str, str]:
    if len(spec.type_labels) != 2:
        raise InvalidParameters(f"Type swap tables need a two type specification, got {spec.type_labels}")
    weak, strong = sorted(spec.type_labels, key=spec.lambda_of)
    return weak, strong


def _roster(counts: Dict[str, int]) -> BidderRoster:
    return BidderRoster.from_type_counts(counts)


def type_swap_table(
    x: CovariateVector,
    n_range: Sequence[int],
    spec: AsymmetrySpec,
    curve: QuantileCurve,
    v0: float = 0.0,
    epsilon: float = DEFAULT_EPSILON,
    grid_size: int = REVENUE_GRID_SIZE,
    threads: int = 1,
) -> List[TypeSwapRow]:
    """
    Non strategic (r = ε) and strategic (optimal reserve) revenue for every split of N bidders into two types, with
    the revenue of one added bidder of each type and the effect of replacing one weak bidder by one strong bidder.

    :param x: Auction covariates.
    :param n_range: Numbers of bidders, each at least 2.
    :param spec: A two type specification.
    :param curve: Parent quantile curve.
    :param v0: Seller value.
    :param epsilon: Truncation index.
    :param grid_size: Reserve grid points.
    :param threads: Worker threads, one cell per task.
    :return: One row per (N, split), ordered by N then by the count of the first type label.
    """
    weak, strong = _weak_and_strong(spec)
    labels = spec.type_labels

    def nonstrategic(counts: Dict[str, int]) -> float:
        return expected_revenue(epsilon, x, _roster(counts), spec, curve, v0, epsilon)

    def cell(counts: Dict[str, int]) -> Tuple[float, ReserveSolution]:
        return nonstrategic(counts), optimal_reserve(x, _roster(counts), spec, curve, v0, epsilon, grid_size)

    splits = [{labels[0]: k, labels[1]: n - k} for n in n_range for k in range(n + 1)]
    results = map_ordered(cell, splits, max_workers=threads)
    for result in results:
        if isinstance(result, Exception):
            raise result
    by_split = {tuple(counts.values()): result for counts, result in zip(splits, results)}

    rows = []
    for counts, (pi_ns, solution) in zip(splits, results):
        added = {label: nonstrategic({**counts, label: counts[label] + 1}) for label in labels}
        swap_ns, swap_s = None, None
        if counts[weak] > 0:
            swapped = {**counts, weak: counts[weak] - 1, strong: counts[strong] + 1}
            swapped_ns, swapped_solution = by_split.get(tuple(swapped.values())) or cell(swapped)
            swap_ns = 100.0 * (swapped_ns - pi_ns) / pi_ns
            swap_s = 100.0 * (swapped_solution.pi_star - solution.pi_star) / solution.pi_star
        rows.append(
            TypeSwapRow(
                n=sum(counts.values()),
                counts=dict(counts),
                pi_nonstrategic=pi_ns,
                pi_strategic=solution.pi_star,
                r_star=solution.r_star,
                reserve_price=solution.reserve_price,
                pi_added=added,
                bk_violation={label: added[label] < solution.pi_star for label in labels},
                pct_swap_nonstrategic=swap_ns,
                pct_swap_strategic=swap_s,
            )
        )
    return rows


def type_swap_frame(rows: Sequence[TypeSwapRow]) -> pd.DataFrame:
    return pd.DataFrame([row.to_record() for row in rows])


def type_swap_summary(rows: Sequence[TypeSwapRow]) -> pd.DataFrame:
    """
    Per N: range of the non strategic and strategic revenues across type splits, the spread of that range in
    percent, and the range of the percentage change from replacing one weak bidder by one strong bidder.
    """
    frame = type_swap_frame(rows)
    summary = []
    for n, group in frame.groupby("n", sort=True):
        record: Dict[str, Any] = {"n": int(n)}
        for kind in ("nonstrategic", "strategic"):
            revenue = group[f"pi_{kind}"]
            swaps = group[f"pct_swap_{kind}"].dropna()
            record[f"er_{kind}_min"] = float(revenue.min())
            record[f"er_{kind}_max"] = float(revenue.max())
            record[f"er_{kind}_spread_pct"] = float(100.0 * (revenue.max() - revenue.min()) / revenue.min())
            record[f"swap_{kind}_min_pct"] = float(swaps.min()) if len(swaps) else None
            record[f"swap_{kind}_max_pct"] = float(swaps.max()) if len(swaps) else None
        summary.append(record)
    return pd.DataFrame(summary)

#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Any, Callable, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import bisect

from .errors import DimensionError, GridRangeError, InvalidParameters, NonConvergence, NonPositiveCovariate, RosterError

DEFAULT_TAU_GRID = np.arange(1, 100, dtype=float) / 100.0
FINE_TAU_GRID = np.arange(1, 1000, dtype=float) / 1000.0

LAMBDA_FLOOR = 1e-8
PSI_TOL = 1e-10
PSI_MAX_ITER = 200

# bisection stops on relative width, so tiny roots of weak transforms still resolve
_BISECT_XTOL = 1e-300
_BISECT_RTOL = 4.0 * np.finfo(float).eps


class AsymmetryVariant(str, Enum):
    FIXED_EFFECTS = "fixed_effects"
    TYPE_FIXED_EFFECTS = "type_fixed"
    LINEAR_REGRESSION = "linear"
    LINEAR_WITH_FIXED_EFFECTS = "linear_fixed"
    EXP_LINEAR_WITH_FIXED_EFFECTS = "exp_linear_fixed"


class Normalization(str, Enum):
    FIRST_ALPHA_ONE = "alpha_1 = 1"
    SIMPLEX = "sum(alpha) = 1"
    FIRST_BETA_ONE = "beta_1 = 1"
    UNIT_NORM_BETA = "norm(beta) = 1"


_USES_ALPHA = {
    AsymmetryVariant.FIXED_EFFECTS,
    AsymmetryVariant.TYPE_FIXED_EFFECTS,
    AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS,
    AsymmetryVariant.EXP_LINEAR_WITH_FIXED_EFFECTS,
}
_USES_BETA = {
    AsymmetryVariant.LINEAR_REGRESSION,
    AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS,
    AsymmetryVariant.EXP_LINEAR_WITH_FIXED_EFFECTS,
}


@dataclass(frozen=True, eq=False)
class CovariateVector:
    """
    Auction covariates X = (1, x')' with the intercept first and strictly positive characteristics.

    :param entries: The full vector including the leading 1.0.
    """

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=float).reshape(-1)
        if entries.size == 0 or entries[0] != 1.0:
            raise DimensionError(f"Covariate vector must start with the intercept 1.0, got {entries[:1]}")
        if not np.all(np.isfinite(entries)):
            raise NonPositiveCovariate(f"Covariates must be finite, got {entries}")
        if np.any(entries[1:] <= 0.0):
            raise NonPositiveCovariate(f"Auction characteristics must be strictly positive, got {entries[1:]}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_characteristics(cls, characteristics: Sequence[float]) -> "CovariateVector":
        """
        :param characteristics: The auction characteristics x without the intercept.
        :return: The covariate vector (1, x).
        """
        return cls(np.concatenate(([1.0], np.asarray(characteristics, dtype=float).reshape(-1))))

    @property
    def d(self) -> int:
        return self.entries.size - 1

    @property
    def characteristics(self) -> np.ndarray:
        return self.entries[1:]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, CovariateVector) and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash(self.entries.tobytes())


@dataclass(frozen=True)
class Bidder:
    """
    The characteristic Z_i of one bidder. Which fields matter depends on the asymmetry variant: a persistent
    identity for fixed effects, a type label for type fixed effects, covariates for the regression variants.
    """

    identity: Optional[int] = None
    label: Optional[str] = None
    covariates: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class BidderRoster:
    """
    The participants of one auction.

    :param z: Per bidder characteristics.
    :param type_counts: Optional count per type label, for datasets that only record type counts.
    """

    z: Tuple[Bidder, ...]
    type_counts: Optional[Dict[str, int]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "z", tuple(self.z))
        if len(self.z) < 2:
            raise RosterError(f"An auction needs at least two bidders, got {len(self.z)}")
        if self.type_counts is not None:
            counts = dict(self.type_counts)
            if any(count < 0 for count in counts.values()) or sum(counts.values()) != len(self.z):
                raise RosterError(f"Type counts {counts} do not sum to the {len(self.z)} bidders")
            observed = {}
            for bidder in self.z:
                observed[bidder.label] = observed.get(bidder.label, 0) + 1
            if any(observed.get(label, 0) != count for label, count in counts.items()):
                raise RosterError(f"Type counts {counts} disagree with bidder labels {observed}")
            object.__setattr__(self, "type_counts", counts)

    @classmethod
    def from_type_counts(cls, counts: Mapping[str, int]) -> "BidderRoster":
        """
        Build a roster of labelled bidders, grouped by type in the order of the mapping.

        :param counts: Number of bidders per type label.
        :return: The roster.
        """
        bidders = tuple(Bidder(label=label) for label, count in counts.items() for _ in range(int(count)))
        return cls(z=bidders, type_counts={label: int(count) for label, count in counts.items()})

    @classmethod
    def from_identities(cls, n: int) -> "BidderRoster":
        return cls(z=tuple(Bidder(identity=i) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.z)

    def count(self, label: str) -> int:
        return sum(1 for bidder in self.z if bidder.label == label)


@dataclass(frozen=True)
class AsymmetrySpec:
    """
    One member of the λ(Z; α, β) family together with its identifying normalization.

    :param variant: The functional form of λ.
    :param alpha: Fixed effects, indexed by bidder identity or by position in type_labels.
    :param beta: Slopes on bidder covariates.
    :param normalization: The scale restriction that holds on the stored parameters.
    :param type_labels: Type names for the type fixed effects variant, reference type first.
    """

    variant: AsymmetryVariant
    alpha: Tuple[float, ...] = ()
    beta: Tuple[float, ...] = ()
    normalization: Normalization = Normalization.FIRST_ALPHA_ONE
    type_labels: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        variant = AsymmetryVariant(self.variant)
        normalization = Normalization(self.normalization)
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(float(b) for b in self.beta)
        labels = tuple(str(label) for label in self.type_labels)
        object.__setattr__(self, "variant", variant)
        object.__setattr__(self, "normalization", normalization)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "type_labels", labels)

        if (variant in _USES_ALPHA) != bool(alpha):
            raise InvalidParameters(f"{variant.value} {'requires' if variant in _USES_ALPHA else 'takes no'} alpha")
        if (variant in _USES_BETA) != bool(beta):
            raise InvalidParameters(f"{variant.value} {'requires' if variant in _USES_BETA else 'takes no'} beta")
        if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS and (len(labels) != len(alpha) or len(set(labels)) != len(labels)):
            raise InvalidParameters(f"Type labels {labels} must be unique and match alpha {alpha}")
        if not all(math.isfinite(value) for value in alpha + beta):
            raise InvalidParameters("Asymmetry parameters must be finite")
        if variant is not AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS and any(a <= 0.0 for a in alpha):
            raise InvalidParameters(f"Fixed effects must be positive, got {alpha}")
        self._check_normalization()

    def _check_normalization(self) -> None:
        norm = self.normalization
        if norm in (Normalization.FIRST_ALPHA_ONE, Normalization.SIMPLEX) and not self.alpha:
            raise InvalidParameters(f"{norm.value} needs alpha parameters")
        if norm in (Normalization.FIRST_BETA_ONE, Normalization.UNIT_NORM_BETA) and not self.beta:
            raise InvalidParameters(f"{norm.value} needs beta parameters")
        if norm is Normalization.FIRST_ALPHA_ONE and self.alpha[0] != 1.0:
            raise InvalidParameters(f"alpha_1 must equal 1, got {self.alpha[0]}")
        if norm is Normalization.SIMPLEX and abs(math.fsum(self.alpha) - 1.0) > 1e-12:
            raise InvalidParameters(f"alpha must sum to 1, got {math.fsum(self.alpha)}")
        if norm is Normalization.FIRST_BETA_ONE and self.beta[0] != 1.0:
            raise InvalidParameters(f"beta_1 must equal 1, got {self.beta[0]}")
        if norm is Normalization.UNIT_NORM_BETA and abs(math.sqrt(math.fsum(b * b for b in self.beta)) - 1.0) > 1e-12:
            raise InvalidParameters("beta must have unit norm")

    @classmethod
    def type_fixed_effects(cls, lambdas: Mapping[str, float]) -> "AsymmetrySpec":
        """
        Type fixed effects normalized so that the first type has λ = 1.

        :param lambdas: Exponent per type label, reference type first.
        :return: The normalized specification.
        """
        labels = tuple(lambdas.keys())
        return cls(
            variant=AsymmetryVariant.TYPE_FIXED_EFFECTS,
            alpha=_scale_first_to_one(list(lambdas.values())),
            type_labels=labels,
        )

    @classmethod
    def fixed_effects(
        cls, alpha: Sequence[float], normalization: Normalization = Normalization.FIRST_ALPHA_ONE
    ) -> "AsymmetrySpec":
        if normalization is Normalization.SIMPLEX:
            total = math.fsum(alpha)
            scaled = tuple(a / total for a in alpha)
        else:
            scaled = _scale_first_to_one(alpha)
        return cls(variant=AsymmetryVariant.FIXED_EFFECTS, alpha=scaled, normalization=normalization)

    @classmethod
    def linear(cls, beta: Sequence[float], normalization: Normalization = Normalization.FIRST_BETA_ONE) -> "AsymmetrySpec":
        if normalization is Normalization.UNIT_NORM_BETA:
            scale = float(np.linalg.norm(beta))
            scaled = tuple(b / scale for b in beta)
        else:
            scaled = _scale_first_to_one(beta)
        return cls(variant=AsymmetryVariant.LINEAR_REGRESSION, beta=scaled, normalization=normalization)

    @classmethod
    def linear_with_fixed_effects(cls, alpha: Sequence[float], beta: Sequence[float]) -> "AsymmetrySpec":
        # λ is homogeneous of degree one in (α, β)
        scale = float(alpha[0])
        return cls(
            variant=AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS,
            alpha=_scale_first_to_one(alpha),
            beta=tuple(float(b) / scale for b in beta),
        )

    @classmethod
    def exp_linear_with_fixed_effects(cls, alpha: Sequence[float], beta: Sequence[float]) -> "AsymmetrySpec":
        return cls(
            variant=AsymmetryVariant.EXP_LINEAR_WITH_FIXED_EFFECTS,
            alpha=_scale_first_to_one(alpha),
            beta=tuple(float(b) for b in beta),
        )

    @property
    def params(self) -> np.ndarray:
        return np.array(self.alpha + self.beta, dtype=float)

    def lambda_of(self, label: str) -> float:
        """
        :param label: A type label of a type fixed effects specification.
        :return: The exponent of that type.
        """
        return lambda_eval(self, Bidder(label=label))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant.value,
            "alpha": list(self.alpha),
            "beta": list(self.beta),
            "normalization": self.normalization.value,
            "type_labels": list(self.type_labels),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "AsymmetrySpec":
        return cls(
            variant=AsymmetryVariant(payload["variant"]),
            alpha=tuple(payload.get("alpha", ())),
            beta=tuple(payload.get("beta", ())),
            normalization=Normalization(payload.get("normalization", Normalization.FIRST_ALPHA_ONE.value)),
            type_labels=tuple(payload.get("type_labels", ())),
        )


def _scale_first_to_one(values: Sequence[float]) -> Tuple[float, ...]:
    first = float(values[0])
    if first == 0.0:
        raise InvalidParameters("The first parameter cannot be normalized to one when it is zero")
    return (1.0,) + tuple(float(v) / first for v in values[1:])


@dataclass(frozen=True, eq=False)
class LevelTransform:
    """
    The exponents that define Ψ_i for the winner i of one auction. Fields may also hold aligned numpy arrays, one
    entry per auction, so a whole sample can be transformed at once.

    :param lambda_winner: λ_i of the winning bidder.
    :param lambda_total: Λ_N, the sum over all bidders.
    :param lambda_excl: Λ_{N|i}, the sum over the losing bidders.
    """

    lambda_winner: Union[float, np.ndarray]
    lambda_total: Union[float, np.ndarray]
    lambda_excl: Union[float, np.ndarray]

    def __post_init__(self) -> None:
        winner = np.asarray(self.lambda_winner, dtype=float)
        total = np.asarray(self.lambda_total, dtype=float)
        excl = np.asarray(self.lambda_excl, dtype=float)
        if np.any(winner <= 0.0) or np.any(total <= 0.0) or np.any(excl <= 0.0):
            raise InvalidParameters("Level transform exponents must be strictly positive")
        if not np.allclose(excl, total - winner, rtol=1e-12, atol=0.0):
            raise InvalidParameters("lambda_excl must equal lambda_total - lambda_winner")

    @classmethod
    def from_lambdas(cls, lambdas: Sequence[float], winner: int) -> "LevelTransform":
        """
        :param lambdas: The exponents of every bidder of the auction.
        :param winner: Position of the winner in the roster.
        :return: The winner's level transform.
        """
        lambdas = [float(value) for value in lambdas]
        excl = math.fsum(lambdas[:winner] + lambdas[winner + 1 :])
        return cls(lambda_winner=lambdas[winner], lambda_total=excl + lambdas[winner], lambda_excl=excl)

    @classmethod
    def symmetric(cls, n: int) -> "LevelTransform":
        return cls(lambda_winner=1.0, lambda_total=float(n), lambda_excl=float(n - 1))

    @classmethod
    def stack(cls, transforms: Sequence["LevelTransform"]) -> "LevelTransform":
        return cls(
            lambda_winner=np.array([t.lambda_winner for t in transforms], dtype=float),
            lambda_total=np.array([t.lambda_total for t in transforms], dtype=float),
            lambda_excl=np.array([t.lambda_excl for t in transforms], dtype=float),
        )


@dataclass(frozen=True, eq=False)
class ParentQuantileCurve:
    """
    The parent quantile regression coefficients γ(τ) sampled on a grid. Between grid points γ is held at the value
    of the nearest grid point at or below τ.

    :param grid: Strictly increasing levels inside (0, 1).
    :param gamma: One coefficient vector of length d + 1 per grid level.
    :param failed_levels: Levels that were requested but could not be estimated.
    """

    grid: np.ndarray
    gamma: np.ndarray
    failed_levels: Tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        grid = np.array(self.grid, dtype=float).reshape(-1)
        gamma = np.array(self.gamma, dtype=float)
        if gamma.ndim == 1:
            gamma = gamma.reshape(-1, 1)
        if grid.size == 0 or np.any(grid <= 0.0) or np.any(grid >= 1.0) or np.any(np.diff(grid) <= 0.0):
            raise GridRangeError("Quantile grid must be strictly increasing inside (0, 1)")
        if gamma.shape[0] != grid.size:
            raise DimensionError(f"Expected {grid.size} coefficient vectors, got {gamma.shape[0]}")
        if not np.all(np.isfinite(gamma)):
            raise InvalidParameters("Quantile regression coefficients must be finite")
        grid.setflags(write=False)
        gamma.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "gamma", gamma)
        object.__setattr__(self, "failed_levels", tuple(float(t) for t in self.failed_levels))

    @property
    def dimension(self) -> int:
        return self.gamma.shape[1]

    @property
    def partial(self) -> bool:
        return bool(self.failed_levels)

    @property
    def lower(self) -> float:
        return float(self.grid[0])

    @property
    def upper(self) -> float:
        return float(self.grid[-1])

    def coefficients(self, tau: Union[float, np.ndarray], clamp: bool = False) -> np.ndarray:
        """
        Step interpolated coefficients.

        :param tau: One level or an array of levels.
        :param clamp: Hold levels beyond the grid at the nearest edge instead of failing.
        :return: γ(τ), shaped (d + 1,) for a scalar level and (n, d + 1) otherwise.
        """
        levels = np.asarray(tau, dtype=float)
        if clamp:
            levels = np.clip(levels, self.grid[0], self.grid[-1])
        elif np.any(levels < self.grid[0]) or np.any(levels > self.grid[-1]):
            raise GridRangeError(f"Level outside the curve grid [{self.grid[0]}, {self.grid[-1]}]")
        index = np.searchsorted(self.grid, levels, side="right") - 1
        return self.gamma[index]

    def values(self, x: CovariateVector) -> np.ndarray:
        """
        :param x: The auction covariates.
        :return: X'γ(τ_g) at every grid level.
        """
        _check_dimension(self, x)
        return self.gamma @ x.entries

    def to_grid(self, grid: Optional[np.ndarray] = None) -> "ParentQuantileCurve":
        return self

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tau_grid": self.grid.tolist(),
            "gamma": self.gamma.tolist(),
            "failed_levels": list(self.failed_levels),
        }

    @classmethod
    def from_dict(cls, payload: Mapping[str, Any]) -> "ParentQuantileCurve":
        return cls(
            grid=np.asarray(payload["tau_grid"], dtype=float),
            gamma=np.asarray(payload["gamma"], dtype=float),
            failed_levels=tuple(payload.get("failed_levels", ())),
        )


@dataclass(frozen=True, eq=False)
class ClosedFormQuantileCurve:
    """
    A parent curve known in closed form on all of [0, 1], used by simulation designs and analytic experiments.

    :param gamma_fn: Maps an array of n levels to an (n, d + 1) coefficient array.
    :param dimension: d + 1.
    :param description: Human readable form, written to provenance headers.
    """

    gamma_fn: Callable[[np.ndarray], np.ndarray]
    dimension: int
    description: str = ""

    lower = 0.0
    upper = 1.0

    def coefficients(self, tau: Union[float, np.ndarray], clamp: bool = False) -> np.ndarray:
        levels = np.asarray(tau, dtype=float)
        if clamp:
            levels = np.clip(levels, 0.0, 1.0)
        elif np.any(levels < 0.0) or np.any(levels > 1.0):
            raise GridRangeError("Level outside [0, 1]")
        gamma = np.asarray(self.gamma_fn(np.atleast_1d(levels)), dtype=float)
        return gamma[0] if levels.ndim == 0 else gamma

    def values(self, x: CovariateVector, grid: Optional[np.ndarray] = None) -> np.ndarray:
        _check_dimension(self, x)
        return self.coefficients(DEFAULT_TAU_GRID if grid is None else grid) @ x.entries

    def to_grid(self, grid: Optional[np.ndarray] = None) -> ParentQuantileCurve:
        """
        :param grid: Levels to sample, i/100 by default.
        :return: The curve sampled on the grid.
        """
        grid = DEFAULT_TAU_GRID if grid is None else np.asarray(grid, dtype=float)
        return ParentQuantileCurve(grid=grid, gamma=self.coefficients(grid))


QuantileCurve = Union[ParentQuantileCurve, ClosedFormQuantileCurve]


def _power_gamma(exponent: float, weights: Tuple[float, ...], levels: np.ndarray) -> np.ndarray:
    return np.outer(np.power(levels, exponent), np.asarray(weights, dtype=float))


def power_quantile_curve(exponent: float, weights: Sequence[float]) -> ClosedFormQuantileCurve:
    """
    γ_k(τ) = w_k τ^exponent, e.g. the uniform parent V(τ) = τ with exponent 1 and weights (1,).

    :param exponent: Power applied to the level.
    :param weights: One weight per coefficient, intercept first.
    :return: The closed form curve.
    """
    weights = tuple(float(w) for w in weights)
    return ClosedFormQuantileCurve(
        gamma_fn=partial(_power_gamma, float(exponent), weights),
        dimension=len(weights),
        description=f"tau^{exponent} * {list(weights)}",
    )


def constant_quantile_curve(value: float, d: int = 0) -> ClosedFormQuantileCurve:
    weights = (float(value),) + (0.0,) * d
    return ClosedFormQuantileCurve(
        gamma_fn=partial(_power_gamma, 0.0, weights), dimension=d + 1, description=f"constant {value}"
    )


def _check_dimension(curve: QuantileCurve, x: CovariateVector) -> None:
    if x.entries.size != curve.dimension:
        raise DimensionError(f"Covariates have {x.entries.size} entries, curve expects {curve.dimension}")


def _bidder_covariates(z: Bidder, size: int) -> np.ndarray:
    if z.covariates is None or len(z.covariates) != size:
        raise DimensionError(f"Bidder covariates must have {size} entries, got {z.covariates}")
    return np.asarray(z.covariates, dtype=float)


def _identity_effect(spec: AsymmetrySpec, z: Bidder) -> float:
    if z.identity is None or not 0 <= z.identity < len(spec.alpha):
        raise DimensionError(f"Bidder identity {z.identity} has no fixed effect among {len(spec.alpha)}")
    return spec.alpha[z.identity]


def lambda_eval(spec: AsymmetrySpec, z: Bidder) -> float:
    """
    Evaluate the asymmetry exponent λ(Z; α, β) of one bidder.

    :param spec: The asymmetry specification.
    :param z: The bidder characteristic.
    :return: The strictly positive exponent.
    """
    variant = spec.variant
    if variant is AsymmetryVariant.TYPE_FIXED_EFFECTS:
        if z.label not in spec.type_labels:
            raise DimensionError(f"Unknown bidder type {z.label!r}, expected one of {spec.type_labels}")
        value = spec.alpha[spec.type_labels.index(z.label)]
    elif variant is AsymmetryVariant.FIXED_EFFECTS:
        value = _identity_effect(spec, z)
    elif variant is AsymmetryVariant.LINEAR_REGRESSION:
        value = float(_bidder_covariates(z, len(spec.beta)) @ np.asarray(spec.beta))
    elif variant is AsymmetryVariant.LINEAR_WITH_FIXED_EFFECTS:
        value = _identity_effect(spec, z) + float(_bidder_covariates(z, len(spec.beta)) @ np.asarray(spec.beta))
    else:
        value = _identity_effect(spec, z) * math.exp(float(_bidder_covariates(z, len(spec.beta)) @ np.asarray(spec.beta)))
    if not value > 0.0 or not math.isfinite(value):
        raise InvalidParameters(f"lambda must be positive and finite, got {value} for {z}")
    return value


def roster_lambdas(spec: AsymmetrySpec, roster: BidderRoster) -> np.ndarray:
    """
    :return: λ_i for every bidder of the roster, in roster order.
    """
    return np.array([lambda_eval(spec, z) for z in roster.z], dtype=float)


def win_probabilities(spec: AsymmetrySpec, roster: BidderRoster) -> np.ndarray:
    """
    Probability that each bidder wins, λ_i / Σ_j λ_j.

    :param spec: The asymmetry specification.
    :param roster: The auction participants.
    :return: One probability per bidder.
    """
    lambdas = roster_lambdas(spec, roster)
    return lambdas / math.fsum(lambdas)


def psi(tau: Union[float, np.ndarray], t: LevelTransform) -> Union[float, np.ndarray]:
    """
    Map a parent quantile level to the winning bid quantile level given that bidder i wins,
    Ψ_i(τ) = (Λ_N τ^{Λ_{N|i}} − Λ_{N|i} τ^{Λ_N}) / λ_i.

    :param tau: Level(s) in [0, 1].
    :param t: The winner's transform; array valued transforms broadcast against tau.
    :return: The transformed level(s) in [0, 1].
    """
    levels = np.asarray(tau, dtype=float)
    value = (
        t.lambda_total * np.power(levels, t.lambda_excl) - t.lambda_excl * np.power(levels, t.lambda_total)
    ) / t.lambda_winner
    value = np.clip(value, 0.0, 1.0)
    return float(value) if np.ndim(value) == 0 else value


def psi_inverse(u: float, t: LevelTransform, tol: float = PSI_TOL, max_iter: int = PSI_MAX_ITER) -> float:
    """
    Invert Ψ_i by bisection on [0, 1].

    :param u: Winning bid level in [0, 1].
    :param t: The winner's transform.
    :param tol: Accepted absolute error on Ψ_i.
    :param max_iter: Bisection iteration cap.
    :return: τ with |Ψ_i(τ) − u| ≤ tol.
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"Level must lie in [0, 1], got {u}")
    if u == 0.0:
        return 0.0
    if u == 1.0:
        return 1.0
    root, result = bisect(
        lambda level: psi(level, t) - u,
        0.0,
        1.0,
        xtol=_BISECT_XTOL,
        rtol=_BISECT_RTOL,
        maxiter=max_iter,
        full_output=True,
        disp=False,
    )
    if abs(psi(root, t) - u) <= tol:
        return float(root)
    if u <= tol:
        return 0.0
    raise NonConvergence(f"psi_inverse({u}) did not converge after {result.iterations} iterations", best=root)


def psi_tau_derivative(tau: Union[float, np.ndarray], t: LevelTransform) -> Union[float, np.ndarray]:
    """
    ∂Ψ_i/∂τ = Λ_N Λ_{N|i} τ^{Λ_{N|i}−1} (1 − τ^{λ_i}) / λ_i.
    """
    levels = np.asarray(tau, dtype=float)
    value = (
        t.lambda_total
        * t.lambda_excl
        * np.power(levels, t.lambda_excl - 1.0)
        * (1.0 - np.power(levels, t.lambda_winner))
        / t.lambda_winner
    )
    return float(value) if np.ndim(value) == 0 else value


def parent_quantile(
    curve: QuantileCurve, tau: Union[float, np.ndarray], x: CovariateVector, clamp: bool = False
) -> Union[float, np.ndarray]:
    """
    Parent private value quantile V(τ|X) = X'γ(τ).

    :param curve: Gridded or closed form coefficients.
    :param tau: Level(s) within the curve's range.
    :param x: The auction covariates.
    :param clamp: Hold levels beyond the range at the nearest edge.
    :return: The quantile value(s).
    """
    _check_dimension(curve, x)
    value = curve.coefficients(tau, clamp=clamp) @ x.entries
    return float(value) if np.ndim(value) == 0 else value


def bidder_quantile(
    curve: QuantileCurve, tau: Union[float, np.ndarray], x: CovariateVector, lambda_i: float
) -> Union[float, np.ndarray]:
    """
    Private value quantile of a bidder with exponent λ_i, X'γ(τ^{1/λ_i}). The transformed level is held at the edge
    of a gridded curve when the power transform pushes it past the last grid point.

    :param curve: Gridded or closed form coefficients.
    :param tau: Level(s) within the curve's range.
    :param x: The auction covariates.
    :param lambda_i: The bidder's exponent.
    :return: The quantile value(s).
    """
    if not lambda_i > 0.0:
        raise InvalidParameters(f"lambda must be positive, got {lambda_i}")
    levels = np.asarray(tau, dtype=float)
    if np.any(levels < curve.lower) or np.any(levels > curve.upper):
        raise GridRangeError(f"Level outside the curve range [{curve.lower}, {curve.upper}]")
    return parent_quantile(curve, np.power(levels, 1.0 / lambda_i), x, clamp=True)


def winning_bid_quantile(curve: QuantileCurve, tau: float, x: CovariateVector, t: LevelTransform) -> float:
    """
    Winning bid quantile conditional on the winner, X'γ(Ψ_i^{-1}(τ)).
    """
    return parent_quantile(curve, psi_inverse(tau, t), x, clamp=True)


def parent_cdf_on_grid(curve: QuantileCurve, x: CovariateVector, v: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """
    Riemann sum estimate of the parent cdf, F(v|X) ≈ Σ_g (τ_g − τ_{g−1}) 1[X'γ(τ_g) ≤ v] with τ_0 = 0. On the
    default grid τ_g = g/(G+1) every weight is 1/(G+1). Non monotone curves are rearranged, each value keeps the
    weight of its own level.

    :param curve: The parent curve; closed forms are sampled on the default grid.
    :param x: The auction covariates.
    :param v: Value(s) at which to evaluate the cdf.
    :return: Level(s) in [0, τ_G].
    """
    gridded = curve.to_grid()
    values = gridded.values(x)
    order = np.argsort(values, kind="stable")
    cumulative = np.concatenate(([0.0], np.cumsum(np.diff(gridded.grid, prepend=0.0)[order])))
    counts = np.searchsorted(values[order], np.asarray(v, dtype=float), side="right")
    level = cumulative[counts]
    return float(level) if np.ndim(level) == 0 else level

#  Copyright 2024 Amazon.com, Inc. or its affiliates.

import json
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from ..core_model import AsymmetrySpec, Bidder, BidderRoster, CovariateVector, ParentQuantileCurve
from ..errors import AuctionQuantileError, InputError, MissingColumn, MultipleWinners, NoWinner
from ..simulator import AuctionRecord
from ..utils import logger

_COVARIATE_PATTERN = re.compile(r"^x_(\d+)$")
_BIDDER_COVARIATE_PATTERN = re.compile(r"^z_(\d+)$")
_COUNT_PREFIX = "n_type_"


class SchemaMode(str, Enum):
    TYPE_COUNT = "type_count"
    FULL_IDENTITY = "full_identity"


@dataclass(frozen=True)
class DatasetSchema:
    """
    Column layout of a dataset. Unset column lists are discovered from the header: x_1..x_d for auction
    characteristics, n_type_<label> for type counts and z_1..z_k for bidder covariates.

    :param mode: type_count for one row per auction, full_identity for an auction table plus a bidder table.
    :param auction_id: Auction identifier column.
    :param winning_bid: Winning bid column.
    :param covariates: Auction characteristic columns, in model order.
    :param type_counts: Count column per type label, reference type first.
    :param winner_type: Winning type column of type_count data.
    :param bidder_index: Persistent bidder identity column of the bidder table.
    :param bidder_covariates: Bidder covariate columns of the bidder table.
    :param is_winner: Winner flag column of the bidder table.
    """

    mode: SchemaMode = SchemaMode.TYPE_COUNT
    auction_id: str = "auction_id"
    winning_bid: str = "winning_bid"
    covariates: Optional[Tuple[str, ...]] = None
    type_counts: Optional[Dict[str, str]] = None
    winner_type: str = "winner_type"
    bidder_index: str = "bidder_index"
    bidder_covariates: Optional[Tuple[str, ...]] = None
    is_winner: str = "is_winner"

    @classmethod
    def timber(
        cls,
        appraisal: str = "appraisal_value",
        volume: str = "volume",
        counts: Optional[Dict[str, str]] = None,
        winning_bid: str = "winning_bid",
        winner_type: str = "winner_type",
    ) -> "DatasetSchema":
        """
        Timber sale tables: the appraisal value and the sale volume are the auction characteristics, sawmills are
        the reference type and logging companies the second type.
        """
        return cls(
            winning_bid=winning_bid,
            covariates=(appraisal, volume),
            type_counts=counts or {"mill": "n_mills", "logger": "n_loggers"},
            winner_type=winner_type,
        )

    def covariate_columns(self, frame: pd.DataFrame) -> Tuple[str, ...]:
        if self.covariates is not None:
            return self.covariates
        return _numbered_columns(frame, _COVARIATE_PATTERN)

    def count_columns(self, frame: pd.DataFrame) -> Dict[str, str]:
        if self.type_counts is not None:
            return dict(self.type_counts)
        return {name[len(_COUNT_PREFIX) :]: name for name in frame.columns if name.startswith(_COUNT_PREFIX)}

    def bidder_covariate_columns(self, frame: pd.DataFrame) -> Tuple[str, ...]:
        if self.bidder_covariates is not None:
            return self.bidder_covariates
        return _numbered_columns(frame, _BIDDER_COVARIATE_PATTERN)


@dataclass
class LoadedFit:
    """
    A fit written by the estimate pipeline.
    """

    spec: AsymmetrySpec
    curve: ParentQuantileCurve
    metadata: Dict[str, Any] = field(default_factory=dict)


def _numbered_columns(frame: pd.DataFrame, pattern: re.Pattern) -> Tuple[str, ...]:
    numbered = [(int(match.group(1)), name) for name in frame.columns for match in [pattern.match(str(name))] if match]
    return tuple(name for _, name in sorted(numbered))


def _require(frame: pd.DataFrame, columns: Sequence[str], path: str) -> None:
    missing = [column for column in columns if column not in frame.columns]
    if missing:
        raise MissingColumn(f"{path}: missing columns {', '.join(missing)}")


def _read_table(path: str) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#", float_precision="round_trip", skipinitialspace=True)
    except (OSError, ValueError) as err:
        raise InputError(f"Unable to read dataset {path}: {err}") from err


def _numeric(frame: pd.DataFrame, columns: Sequence[str], path: str) -> None:
    for column in columns:
        try:
            frame[column] = pd.to_numeric(frame[column])
        except (TypeError, ValueError) as err:
            raise InputError(f"{path}: column {column} must be numeric") from err


def _row_error(err: AuctionQuantileError, path: str, row_number: int) -> AuctionQuantileError:
    return type(err)(f"{path} row {row_number}: {err}")


class DatasetManager:
    """
    Reads and writes auction datasets as CSV tables with a header, UTF-8 text and '.' decimals. Floats are written
    in their shortest round trip form and read back with pandas' round trip parser, so a dataset survives a save
    and load bit for bit.

    :param schema: The column layout, the default type_count layout unless given.
    """

    def __init__(self, schema: Optional[DatasetSchema] = None) -> None:
        self.schema = schema or DatasetSchema()

    def load(self, path: str, bidders_path: Optional[str] = None) -> List[AuctionRecord]:
        """
        Load and validate a dataset. A bidder table switches the schema to full_identity.

        :param path: The auction table.
        :param bidders_path: The companion bidder table of full_identity data.
        :return: One record per auction, carrying its data row number for diagnostics.
        """
        frame = _read_table(path)
        schema = self.schema
        covariates = schema.covariate_columns(frame)
        _require(frame, (schema.auction_id, schema.winning_bid) + covariates, path)
        _numeric(frame, (schema.winning_bid,) + covariates, path)

        if bidders_path is not None or schema.mode is SchemaMode.FULL_IDENTITY:
            if bidders_path is None:
                raise InputError(f"{path}: full_identity data needs a bidder table")
            records = self._load_identity(frame, covariates, path, bidders_path)
        else:
            records = self._load_type_counts(frame, covariates, path)
        logger.info(f"Loaded {len(records)} auctions from {path}")
        return records

    def _load_type_counts(self, frame: pd.DataFrame, covariates: Tuple[str, ...], path: str) -> List[AuctionRecord]:
        schema = self.schema
        counts = schema.count_columns(frame)
        if not counts:
            raise MissingColumn(f"{path}: no type count columns ({_COUNT_PREFIX}<label>)")
        _require(frame, tuple(counts.values()) + (schema.winner_type,), path)
        _numeric(frame, tuple(counts.values()), path)

        records = []
        for row_number, row in enumerate(frame.itertuples(index=False), start=1):
            values = dict(zip(frame.columns, row))
            try:
                type_counts = {label: int(values[column]) for label, column in counts.items()}
                winner = values[schema.winner_type]
                if pd.isna(winner) or str(winner).strip() not in counts:
                    raise NoWinner(f"winner type {winner!r} is not one of {tuple(counts)}")
                records.append(
                    AuctionRecord(
                        auction_id=int(values[schema.auction_id]),
                        winning_bid=float(values[schema.winning_bid]),
                        x=CovariateVector.from_characteristics([values[column] for column in covariates]),
                        roster=BidderRoster.from_type_counts(type_counts),
                        winner_type=str(winner).strip(),
                        row_number=row_number,
                    )
                )
            except AuctionQuantileError as err:
                raise _row_error(err, path, row_number) from err
            except (TypeError, ValueError) as err:
                raise InputError(f"{path} row {row_number}: {err}") from err
        return records

    def _load_identity(
        self, frame: pd.DataFrame, covariates: Tuple[str, ...], path: str, bidders_path: str
    ) -> List[AuctionRecord]:
        schema = self.schema
        bidders = _read_table(bidders_path)
        z_columns = schema.bidder_covariate_columns(bidders)
        _require(bidders, (schema.auction_id, schema.bidder_index, schema.is_winner) + z_columns, bidders_path)
        _numeric(bidders, (schema.bidder_index, schema.is_winner) + z_columns, bidders_path)
        groups = {key: group for key, group in bidders.groupby(schema.auction_id, sort=False)}

        records = []
        for row_number, row in enumerate(frame.itertuples(index=False), start=1):
            values = dict(zip(frame.columns, row))
            auction_id = values[schema.auction_id]
            try:
                group = groups.get(auction_id)
                if group is None:
                    raise NoWinner(f"auction {auction_id} has no bidders in {bidders_path}")
                flags = group[schema.is_winner].to_numpy() != 0
                if flags.sum() == 0:
                    raise NoWinner(f"auction {auction_id} has no winner")
                if flags.sum() > 1:
                    raise MultipleWinners(f"auction {auction_id} has {int(flags.sum())} winners")
                roster = BidderRoster(
                    z=tuple(
                        Bidder(
                            identity=int(identity),
                            covariates=tuple(float(value) for value in z) if z_columns else None,
                        )
                        for identity, z in zip(group[schema.bidder_index], group[list(z_columns)].to_numpy())
                    )
                )
                records.append(
                    AuctionRecord(
                        auction_id=int(auction_id),
                        winning_bid=float(values[schema.winning_bid]),
                        x=CovariateVector.from_characteristics([values[column] for column in covariates]),
                        roster=roster,
                        winner_index=int(flags.argmax()),
                        row_number=row_number,
                    )
                )
            except AuctionQuantileError as err:
                raise _row_error(err, path, row_number) from err
            except (TypeError, ValueError) as err:
                raise InputError(f"{path} row {row_number}: {err}") from err
        return records

    @staticmethod
    def to_frames(records: Sequence[AuctionRecord]) -> Tuple[pd.DataFrame, Optional[pd.DataFrame]]:
        """
        Lay records out in the default schema.

        :param records: The dataset.
        :return: The auction table and, for full_identity data, the bidder table.
        """
        if not records:
            raise InputError("Cannot write an empty dataset")
        rows, bidder_rows = [], []
        by_type = records[0].winner_type is not None
        labels = type_labels(records) if by_type else ()
        for record in records:
            row = {"auction_id": record.auction_id, "winning_bid": record.winning_bid}
            row.update({f"x_{j + 1}": value for j, value in enumerate(record.x.characteristics.tolist())})
            if by_type:
                row.update({f"{_COUNT_PREFIX}{label}": record.roster.count(label) for label in labels})
                row["winner_type"] = record.winner_type
            else:
                for position, bidder in enumerate(record.roster.z):
                    bidder_row = {
                        "auction_id": record.auction_id,
                        "bidder_index": position if bidder.identity is None else bidder.identity,
                    }
                    bidder_row.update({f"z_{k + 1}": value for k, value in enumerate(bidder.covariates or ())})
                    bidder_row["is_winner"] = int(position == record.winner_index)
                    bidder_rows.append(bidder_row)
            rows.append(row)
        return pd.DataFrame(rows), (pd.DataFrame(bidder_rows) if bidder_rows else None)

    @staticmethod
    def bidders_path_for(path: str) -> str:
        stem, extension = os.path.splitext(path)
        return f"{stem}_bidders{extension or '.csv'}"


def type_labels(records: Sequence[AuctionRecord]) -> Tuple[str, ...]:
    """
    :param records: Type count data.
    :return: The type labels in roster order, reference type first.
    """
    labels: List[str] = []
    for record in records:
        for label in (record.roster.type_counts or {}).keys():
            if label not in labels:
                labels.append(label)
    return tuple(labels)


def load_fit(path: str) -> LoadedFit:
    """
    Read the fit JSON written by the estimate pipeline.

    :param path: The fit file.
    :return: The Stage 1 specification and the Stage 2 curve.
    """
    try:
        with open(path, "r", encoding="utf-8") as fit_file:
            payload = json.load(fit_file)
        return LoadedFit(
            spec=AsymmetrySpec.from_dict(payload["mle"]),
            curve=ParentQuantileCurve.from_dict(payload["curve"]),
            metadata=payload.get("metadata", {}),
        )
    except (OSError, ValueError, KeyError) as err:
        raise InputError(f"Unable to read fit {path}: {err}") from err

"""
CSV loaders for block and fork records.

Malformed rows are collected as RowError entries with their line numbers and
the well-formed rows are still returned. In strict mode any bad row fails
the whole file.
"""

import csv
import logging
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

from forkpool_model.errors import DomainError, SchemaError

from .records import BLOCK_FIELDS, FORK_FIELDS, BlockRecord, ForkRecord, PathLike, RowError

logger = logging.getLogger(__name__)

T = TypeVar("T")


def _load(
    path: PathLike,
    required: Sequence[str],
    optional: Sequence[str],
    parse: Callable[..., Tuple[Optional[T], Optional[str]]],
    strict: bool,
) -> Tuple[List[T], List[RowError]]:
    records: List[T] = []
    errors: List[RowError] = []

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = [name.strip() for name in (reader.fieldnames or [])]
        allowed = (list(required), list(required) + list(optional))
        if header not in allowed:
            raise SchemaError(
                f"{path}: expected header {','.join(list(required) + list(optional))}, "
                f"got {','.join(header) or '<empty>'}"
            )
        reader.fieldnames = header

        for row in reader:
            line = reader.line_num
            if None in row:
                errors.append(RowError(line, "too many fields"))
                continue
            record, error = parse(row)
            if error is not None or record is None:
                errors.append(RowError(line, error or "unparseable row"))
                continue
            records.append(record)

    if errors:
        if strict:
            raise DomainError(f"{path}: {len(errors)} malformed row(s), first at {errors[0]}")
        logger.warning("%s: skipped %d malformed row(s), first at %s", path, len(errors), errors[0])
    return records, errors


def load_blocks(path: PathLike, strict: bool = False) -> Tuple[List[BlockRecord], List[RowError]]:
    """
    Load blocks.csv.

    Args:
        path: File with header ``height,miner,status``
        strict: Fail on the first malformed row instead of collecting it

    Returns:
        Tuple of (records, row errors)

    Raises:
        OSError: If the file cannot be read
        SchemaError: If the header does not match
        DomainError: In strict mode, if any row is malformed
    """
    return _load(path, BLOCK_FIELDS, (), BlockRecord.from_row, strict)


def load_forks(path: PathLike, strict: bool = False) -> Tuple[List[ForkRecord], List[RowError]]:
    """
    Load forks.csv.

    The ``branches`` column may be omitted from the header entirely.

    Returns:
        Tuple of (records, row errors)
    """
    return _load(path, FORK_FIELDS[:4], FORK_FIELDS[4:], ForkRecord.from_row, strict)

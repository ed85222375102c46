"""
Record types for ingested chain data.

blocks.csv rows carry ``height,miner,status`` with status canonical or uncle;
forks.csv rows carry ``height,miner_a,miner_b,winner,branches`` with winner a
or b and branches optional (default 2).
"""

import os
from typing import Any, Dict, Mapping, Optional, Tuple, Union

PathLike = Union[str, "os.PathLike[str]"]

BLOCK_FIELDS = ("height", "miner", "status")
FORK_FIELDS = ("height", "miner_a", "miner_b", "winner", "branches")
BLOCK_STATUSES = ("canonical", "uncle")
FORK_WINNERS = ("a", "b")


def _parse_height(raw: Optional[str]) -> Tuple[Optional[int], Optional[str]]:
    text = (raw or "").strip()
    try:
        height = int(text)
    except ValueError:
        return None, f"invalid height {text!r}"
    if height < 0:
        return None, f"negative height {height}"
    return height, None


class BlockRecord:
    """
    A block observed on chain.

    Attributes:
        height (int): Chain height
        miner (str): Opaque miner identifier
        status (str): "canonical" or "uncle"
    """

    def __init__(self, height: int, miner: str, status: str):
        self.height = height
        self.miner = miner
        self.status = status

    @property
    def is_canonical(self) -> bool:
        return self.status == "canonical"

    @classmethod
    def from_row(cls, row: Mapping[str, Optional[str]]) -> Tuple[Optional["BlockRecord"], Optional[str]]:
        """
        Parse a CSV row.

        Returns:
            Tuple of (record or None, error message or None)
        """
        height, error = _parse_height(row.get("height"))
        if error:
            return None, error
        miner = (row.get("miner") or "").strip()
        if not miner:
            return None, "empty miner"
        status = (row.get("status") or "").strip()
        if status not in BLOCK_STATUSES:
            return None, "unknown status"
        assert height is not None
        return cls(height, miner, status), None

    def to_dict(self) -> Dict[str, Any]:
        return {"height": self.height, "miner": self.miner, "status": self.status}

    def __repr__(self) -> str:
        return f"BlockRecord(height={self.height}, miner={self.miner!r}, status={self.status!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BlockRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class ForkRecord:
    """
    A temporary fork between two miners.

    Attributes:
        height (int): Height of the competing blocks
        miner_a (str): First miner
        miner_b (str): Second miner
        winner (str): "a" or "b"
        branches (int): Number of competing branches (at least 2)
    """

    def __init__(self, height: int, miner_a: str, miner_b: str, winner: str, branches: int = 2):
        self.height = height
        self.miner_a = miner_a
        self.miner_b = miner_b
        self.winner = winner
        self.branches = branches

    @property
    def loser(self) -> str:
        return self.miner_b if self.winner == "a" else self.miner_a

    @property
    def is_self_competition(self) -> bool:
        return self.miner_a == self.miner_b

    @classmethod
    def from_row(cls, row: Mapping[str, Optional[str]]) -> Tuple[Optional["ForkRecord"], Optional[str]]:
        """
        Parse a CSV row.

        Returns:
            Tuple of (record or None, error message or None)
        """
        height, error = _parse_height(row.get("height"))
        if error:
            return None, error
        miner_a = (row.get("miner_a") or "").strip()
        miner_b = (row.get("miner_b") or "").strip()
        if not miner_a or not miner_b:
            return None, "empty miner"
        winner = (row.get("winner") or "").strip()
        if winner not in FORK_WINNERS:
            return None, f"unknown winner {winner!r}"
        raw_branches = (row.get("branches") or "").strip()
        if raw_branches:
            try:
                branches = int(raw_branches)
            except ValueError:
                return None, f"invalid branches {raw_branches!r}"
            if branches < 2:
                return None, f"branches must be at least 2, got {branches}"
        else:
            branches = 2
        assert height is not None
        return cls(height, miner_a, miner_b, winner, branches), None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "height": self.height,
            "miner_a": self.miner_a,
            "miner_b": self.miner_b,
            "winner": self.winner,
            "branches": self.branches,
        }

    def __repr__(self) -> str:
        return (
            f"ForkRecord(height={self.height}, miner_a={self.miner_a!r}, "
            f"miner_b={self.miner_b!r}, winner={self.winner!r}, branches={self.branches})"
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ForkRecord):
            return NotImplemented
        return self.to_dict() == other.to_dict()


class RowError:
    """
    A malformed CSV row.

    Attributes:
        line (int): 1-based line number in the file (the header is line 1)
        message (str): What was wrong with the row
    """

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message

    def to_dict(self) -> Dict[str, Any]:
        return {"line": self.line, "message": self.message}

    def __str__(self) -> str:
        return f"line {self.line}: {self.message}"

    def __repr__(self) -> str:
        return f"RowError(line={self.line}, message={self.message!r})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RowError):
            return NotImplemented
        return (self.line, self.message) == (other.line, other.message)

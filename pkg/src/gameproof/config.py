"""
Budgets, pools and modes.
"""

import re
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Tuple

NUMERAL_RE = re.compile(r"0|1[01]*")


class Mode(Enum):
    """Logical Consequence execution modes."""
    DIRECT = "direct"
    RECOMPUTE = "recompute"

    @property
    def display_name(self) -> str:
        """Human-readable name for display."""
        names = {
            "direct": "Direct copycat",
            "recompute": "Recomputation",
        }
        return names.get(self.value, self.value)

    @property
    def description(self) -> str:
        """Description for CLI selection."""
        descriptions = {
            "direct": "Keeps full embedded runs and forks simulations on replication",
            "recompute": "Keeps only move sizes and re-derives past moves by replay",
        }
        return descriptions.get(self.value, "")


class MachineKind(Enum):
    """Machines the CLI can put in the ⊤ seat."""
    DO_NOTHING = "do-nothing"
    PROOF = "proof"
    TABLE = "table"

    @property
    def display_name(self) -> str:
        """Human-readable name for display."""
        names = {
            "do-nothing": "Do-nothing machine",
            "proof": "Strategy extracted from a proof",
            "table": "Table-driven solution",
        }
        return names.get(self.value, self.value)

    @property
    def description(self) -> str:
        """Description for CLI selection."""
        descriptions = {
            "do-nothing": "Never moves; wins exactly the games that are won by waiting",
            "proof": "Walks a checked proof bottom-up",
            "table": "Answers a ⊓x...⊔z atom from a lookup table",
        }
        return descriptions.get(self.value, "")


class EnvironmentKind(Enum):
    """Agents that can play the ⊥ seat."""
    SCRIPTED = "scripted"
    RANDOM = "random"
    INTERACTIVE = "interactive"
    COUNTER = "counter"

    @property
    def display_name(self) -> str:
        """Human-readable name for display."""
        return self.value.capitalize()


def parse_pool(text: str) -> Tuple[str, ...]:
    """Parse a comma-separated constant pool such as ``"0,1,10"``."""
    items = tuple(part.strip() for part in text.split(",") if part.strip())
    if not items:
        raise ValueError("Constant pool is empty")
    for item in items:
        if not NUMERAL_RE.fullmatch(item):
            raise ValueError(f"Not a binary numeral: {item!r}")
    return tuple(dict.fromkeys(items))


@dataclass(frozen=True)
class ClassicalBudget:
    """Budget for the classical validity oracle."""
    steps: int = 100_000
    max_domain: int = 3

    def __post_init__(self):
        if self.steps <= 0:
            raise ValueError("steps must be positive")
        if self.max_domain <= 0:
            raise ValueError("max_domain must be positive")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class SearchBudget:
    """Budget for backward proof search."""
    depth: int = 24
    replicate_cap: int = 2
    classical: ClassicalBudget = field(default_factory=ClassicalBudget)

    def __post_init__(self):
        if self.depth <= 0:
            raise ValueError("depth must be positive")
        if self.replicate_cap < 0:
            raise ValueError("replicate_cap must be non-negative")

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class PlayConfig:
    """Scheduler settings for a single play."""
    max_ticks: int = 200
    seed: int = 0
    pool: Tuple[str, ...] = ("0", "1", "10")
    clean_environment: bool = False
    quiet_ticks: int = 2

    def __post_init__(self):
        if self.max_ticks <= 0:
            raise ValueError("max_ticks must be positive")
        if self.quiet_ticks <= 0:
            raise ValueError("quiet_ticks must be positive")
        object.__setattr__(self, "pool", parse_pool(",".join(self.pool)))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pool"] = list(self.pool)
        return data


@dataclass(frozen=True)
class OracleConfig:
    """Bounds for exhaustive game enumeration."""
    pool: Tuple[str, ...] = ("0", "1", "10")
    replication_cap: int = 4
    node_budget: int = 200_000
    max_runs: int = 10_000

    def __post_init__(self):
        if self.replication_cap < 0:
            raise ValueError("replication_cap must be non-negative")
        if self.node_budget <= 0 or self.max_runs <= 0:
            raise ValueError("budgets must be positive")
        object.__setattr__(self, "pool", parse_pool(",".join(self.pool)))

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["pool"] = list(self.pool)
        return data

"""
Configuration and initialization for MetaCache.

Settings come from the environment (optionally a ``.env`` file) and fall back
to the defaults below. Library code receives explicit config objects; only the
entry points read the environment.
"""

import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from metacache.errors import InvalidConfigError

logger = logging.getLogger(__name__)

# Load environment variables
load_dotenv()

# Base directories
BASE_DIR = Path(__file__).parent.parent
DATA_DIR = Path(os.getenv("METACACHE_DATA_DIR", str(BASE_DIR / "data")))

LOG_LEVEL = os.getenv("METACACHE_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

DEFAULT_BLOCK_SIZE = 4096
DEFAULT_INLINE_THRESHOLD = 4096
DEFAULT_MEMTABLE_THRESHOLD_BYTES = 1024 * 1024


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning(f"Ignoring {name}={raw!r}: not an integer, using {default}")
        return default


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    value = raw.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    logger.warning(f"Ignoring {name}={raw!r}: not a boolean, using {default}")
    return default


@dataclass
class StoreConfig:
    """Tuning knobs for one LSM store instance."""

    data_dir: Path = DATA_DIR
    memtable_threshold_bytes: int = DEFAULT_MEMTABLE_THRESHOLD_BYTES
    bloom_bits_per_key: int = 10
    bloom_hashes: int = 7
    block_size: int = DEFAULT_BLOCK_SIZE
    max_tables_before_compact: int = 4
    inline_threshold: int = DEFAULT_INLINE_THRESHOLD
    sync_every_write: bool = True

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)

    def validate(self) -> "StoreConfig":
        """
        Check that every numeric field is positive.

        Returns:
            self, for chaining

        Raises:
            InvalidConfigError: If a field is out of range
        """
        for name in (
            "memtable_threshold_bytes",
            "bloom_bits_per_key",
            "bloom_hashes",
            "block_size",
            "max_tables_before_compact",
            "inline_threshold",
        ):
            value = getattr(self, name)
            if not isinstance(value, int) or value <= 0:
                raise InvalidConfigError(f"{name} must be a positive integer, got {value!r}")
        if self.bloom_hashes > 255:
            raise InvalidConfigError("bloom_hashes must fit in one byte")
        return self

    @classmethod
    def from_env(cls, data_dir: Optional[Path] = None) -> "StoreConfig":
        return cls(
            data_dir=Path(data_dir) if data_dir is not None else DATA_DIR,
            memtable_threshold_bytes=_env_int(
                "METACACHE_MEMTABLE_THRESHOLD_BYTES", DEFAULT_MEMTABLE_THRESHOLD_BYTES
            ),
            bloom_bits_per_key=_env_int("METACACHE_BLOOM_BITS_PER_KEY", 10),
            bloom_hashes=_env_int("METACACHE_BLOOM_HASHES", 7),
            block_size=_env_int("METACACHE_BLOCK_SIZE", DEFAULT_BLOCK_SIZE),
            max_tables_before_compact=_env_int("METACACHE_MAX_TABLES_BEFORE_COMPACT", 4),
            inline_threshold=_env_int("METACACHE_INLINE_THRESHOLD", DEFAULT_INLINE_THRESHOLD),
            sync_every_write=_env_bool("METACACHE_SYNC_EVERY_WRITE", True),
        )


@dataclass(frozen=True)
class CostModel:
    """Simulated time charged per event. Only the ratios matter."""

    ram_hit: int = 1
    block_read: int = 100
    block_write: int = 100
    seek: int = 1000

    @classmethod
    def from_env(cls) -> "CostModel":
        return cls(
            ram_hit=_env_int("METACACHE_COST_RAM_HIT", 1),
            block_read=_env_int("METACACHE_COST_BLOCK_READ", 100),
            block_write=_env_int("METACACHE_COST_BLOCK_WRITE", 100),
            seek=_env_int("METACACHE_COST_SEEK", 1000),
        )


@dataclass
class SimConfig:
    """
    Simulator settings.

    ``inline_threshold`` of 0 disables co-location of small files.
    """

    icache_capacity: int = 1024
    metacache_enabled: bool = True
    warm_on_boot: bool = True
    inline_threshold: int = DEFAULT_INLINE_THRESHOLD
    block_size: int = DEFAULT_BLOCK_SIZE
    costs: CostModel = field(default_factory=CostModel)

    def validate(self) -> "SimConfig":
        if self.icache_capacity < 0:
            raise InvalidConfigError("icache_capacity must be >= 0")
        if self.inline_threshold < 0:
            raise InvalidConfigError("inline_threshold must be >= 0")
        if self.block_size <= 0:
            raise InvalidConfigError("block_size must be positive")
        return self

    def to_dict(self) -> dict:
        return {
            "icache_capacity": self.icache_capacity,
            "metacache_enabled": self.metacache_enabled,
            "warm_on_boot": self.warm_on_boot,
            "inline_threshold": self.inline_threshold,
            "block_size": self.block_size,
            "costs": {
                "ram_hit": self.costs.ram_hit,
                "block_read": self.costs.block_read,
                "block_write": self.costs.block_write,
                "seek": self.costs.seek,
            },
        }

    @classmethod
    def from_env(cls) -> "SimConfig":
        return cls(
            icache_capacity=_env_int("METACACHE_ICACHE_CAPACITY", 1024),
            inline_threshold=_env_int("METACACHE_INLINE_THRESHOLD", DEFAULT_INLINE_THRESHOLD),
            block_size=_env_int("METACACHE_BLOCK_SIZE", DEFAULT_BLOCK_SIZE),
            costs=CostModel.from_env(),
        )

    @classmethod
    def baseline(cls, **overrides) -> "SimConfig":
        """Plain filesystem: no MetaCache, no co-location."""
        params = dict(metacache_enabled=False, warm_on_boot=False, inline_threshold=0)
        params.update(overrides)
        return cls(**params)

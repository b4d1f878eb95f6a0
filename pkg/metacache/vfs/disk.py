"""
Countable disk model. Costs are simulated units, never wall time.
"""

import math
from dataclasses import dataclass

from metacache.config import CostModel
from metacache.model.keys import path_depth


def baseline_lookup_blocks(path: str) -> int:
    """Blocks a cold lookup costs without MetaCache: one per directory level plus the inode."""
    return path_depth(path) + 1


def data_blocks(size: int, block_size: int) -> int:
    return math.ceil(size / block_size) if size > 0 else 0


@dataclass
class DiskCounters:
    block_reads: int = 0
    block_writes: int = 0
    seeks: int = 0
    ram_hits: int = 0
    cost_units: int = 0


class DiskModel:
    """Monotone counters plus the cost model that prices them."""

    def __init__(self, costs: CostModel = CostModel()):
        self.costs = costs
        self.counters = DiskCounters()

    def ram_hit(self) -> int:
        self.counters.ram_hits += 1
        self.counters.cost_units += self.costs.ram_hit
        return self.costs.ram_hit

    def read(self, blocks: int, seeks: int) -> int:
        cost = blocks * self.costs.block_read + seeks * self.costs.seek
        self.counters.block_reads += blocks
        self.counters.seeks += seeks
        self.counters.cost_units += cost
        return cost

    def write(self, blocks: int, seeks: int) -> int:
        cost = blocks * self.costs.block_write + seeks * self.costs.seek
        self.counters.block_writes += blocks
        self.counters.seeks += seeks
        self.counters.cost_units += cost
        return cost

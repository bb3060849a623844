"""Block stacking: balance checks, optimal spinal stacks, parabolic stacks and search."""

from .model import (
    TABLE,
    Block,
    Contact,
    InvalidGeometryError,
    PointWeight,
    Stack,
    SupportPartition,
    contacts,
    make_diamond,
    make_harmonic,
    make_inverted_triangle,
    overhang,
    support_partition,
)
from .balance import BalanceResult, is_balanced

__version__ = "0.1.0"

"""Reference addressing scans.

These are the software oracle the engine simulator is checked against. Each
scan evaluates its kernel over the whole frame at once with numpy; outputs are
read only from the source frames, so the scan order only affects the order in
which side outputs (table ids) are first touched.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from addressengine.addressing.masks import CON_0
from addressengine.addressing.masks import NeighborhoodMask
from addressengine.addressing.masks import ScanOrder
from addressengine.addressing.masks import gather_neighbourhoods
from addressengine.addressing.tables import IndexedTable
from addressengine.frames.pixels import Frame
from addressengine.kernels.descriptors import Kernel
from addressengine.kernels.ops import SadAccumulator
from addressengine.kernels.ops import evaluate_inter
from addressengine.kernels.ops import evaluate_intra

logger = logging.getLogger(__name__)


class DimensionMismatchError(ValueError):
    """Two frames combined position by position differ in size."""


@dataclass
class ScanResult:
    frame: Frame
    sad: SadAccumulator | None = None
    table: IndexedTable | None = None


def to_frame(values: np.ndarray) -> Frame:
    return Frame(values.astype(np.uint16))


def grouped_table(ids: np.ndarray, sums: np.ndarray) -> IndexedTable:
    """Group per-pixel contributions by id, keys in first-occurrence order.

    *ids* is flat and already in scan order; *sums* is (n, channels).
    """
    table = IndexedTable()
    if ids.size == 0:
        return table
    keys, first, inverse = np.unique(ids, return_index=True, return_inverse=True)
    counts = np.bincount(inverse, minlength=keys.size)
    totals = np.zeros((keys.size, sums.shape[-1]), dtype=np.int64)
    np.add.at(totals, inverse, sums)
    for i in np.argsort(first, kind="stable"):
        table.merge_totals(int(keys[i]), int(counts[i]), totals[i].tolist())
    return table


def intra_scan(
    src: Frame,
    mask: NeighborhoodMask,
    scan: ScanOrder | str,
    k: Kernel,
) -> ScanResult:
    scan = ScanOrder(scan)
    k.validate_for(mask, inter=False)
    table = IndexedTable() if k.uses_table else None
    if src.pixel_count == 0:
        return ScanResult(src.copy(), table=table)

    neigh = gather_neighbourhoods(src.data, mask)
    result = evaluate_intra(k, src.data, neigh, mask)
    if k.uses_table:
        ids = scan.scan_view(result.table_ids).reshape(-1)
        sums = scan.scan_view(result.table_sums).reshape(-1, result.table_sums.shape[-1])
        table = grouped_table(ids, sums)
    logger.debug("intra scan %s %s %s over %s", k.op, mask.name, scan, src)
    return ScanResult(to_frame(result.out), table=table)


def inter_scan(a: Frame, b: Frame, k: Kernel) -> ScanResult:
    if a.data.shape != b.data.shape:
        raise DimensionMismatchError(f"Cannot combine {a!r} with {b!r}")
    k.validate_for(CON_0, inter=True)
    result = evaluate_inter(k, a.data, b.data)
    sad = None
    if result.sad_terms is not None:
        # Terms are non-negative, so saturation does not depend on the order they arrive in.
        sad = SadAccumulator().add(int(result.sad_terms.sum()))
    logger.debug("inter scan %s over %s", k.op, a)
    return ScanResult(to_frame(result.out), sad=sad)

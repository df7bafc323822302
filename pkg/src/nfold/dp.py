"""Per-level point sets: base tables per brick and windowed convolution.

A *point* is the r-vector a brick (or a partial group of bricks)
contributes to the shared rows.  ``block_base_table`` enumerates every
point one brick can reach with an exact number of placed units, via a
bounded-count DP over the brick's columns.  ``convolve`` forms Minkowski
sums of two tables; ``fold_tables`` chains it across all bricks, keeping
only points that can still land inside a per-axis target window given
what the remaining bricks are able to add ("suffix reach" pruning).

Tables carry witnesses: a base cell remembers its column-count vector, a
combined cell remembers the pair of points it was summed from, so any
surviving point can be decoded back into per-brick vectors.

In optimize mode each cell also carries the best objective value seen
for that point; feasibility mode is the same machinery with all-zero
values.  Iteration is always over sorted keys so reruns are bit-stable.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Sequence

from .core import MODE_FEASIBILITY, MODE_OPTIMIZE, NFoldInstance
from .plan import IterationPlan

logger = logging.getLogger(__name__)


@dataclass
class BlockWitness:
    """One brick's decoded column counts for a point."""

    block: int
    counts: tuple[int, ...]


class PointTable:
    """Reachable point set with witnesses and per-cell values.

    ``cells`` maps an r-tuple point to ``(value, payload)``.  For a base
    table the payload is the column-count tuple; for a combined table it
    is ``(left_point, right_point)`` referring to the two parent tables.
    """

    __slots__ = ("r", "bound", "cells", "kind", "block", "parents", "_reach")

    def __init__(
        self,
        r: int,
        bound: tuple[int, ...] | None,
        kind: str,
        *,
        block: int | None = None,
        parents: tuple["PointTable", "PointTable"] | None = None,
    ) -> None:
        self.r = r
        self.bound = bound
        self.kind = kind  # "base" | "pair"
        self.block = block
        self.parents = parents
        self.cells: dict[tuple[int, ...], tuple] = {}
        self._reach: tuple[tuple[int, ...], tuple[int, ...]] | None = None

    def __len__(self) -> int:
        return len(self.cells)

    def points(self) -> list[tuple[int, ...]]:
        """Points in sorted (deterministic) order."""
        return sorted(self.cells)

    def value(self, pt: tuple[int, ...]) -> int:
        return self.cells[pt][0]

    def reach(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """Per-axis (min, max) over the stored points; zeros when empty."""
        if self._reach is None:
            if not self.cells:
                self._reach = ((0,) * self.r, (0,) * self.r)
            else:
                lo = [None] * self.r
                hi = [None] * self.r
                for pt in self.cells:
                    for j, v in enumerate(pt):
                        if lo[j] is None or v < lo[j]:
                            lo[j] = v
                        if hi[j] is None or v > hi[j]:
                            hi[j] = v
                self._reach = (tuple(lo), tuple(hi))
        return self._reach

    def filtered(self, lo: tuple[int, ...], hi: tuple[int, ...]) -> "PointTable":
        """Copy containing only the points inside [lo, hi] per axis."""
        out = PointTable(self.r, hi, self.kind, block=self.block, parents=self.parents)
        for pt, cell in self.cells.items():
            if all(l <= v <= h for v, l, h in zip(pt, lo, hi)):
                out.cells[pt] = cell
        return out

    def decode(self, pt: tuple[int, ...]) -> list[BlockWitness]:
        """Expand a point into per-brick column counts (brick order)."""
        if pt not in self.cells:
            raise KeyError(f"point {pt} not in table")
        cell = self.cells[pt]
        if self.kind == "base":
            return [BlockWitness(block=self.block, counts=cell[1])]
        left_pt, right_pt = cell[1], cell[2]
        left, right = self.parents
        return left.decode(left_pt) + right.decode(right_pt)


def _columns(block: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Transpose a row-major brick matrix into its column vectors."""
    r = len(block)
    width = len(block[0]) if r else 0
    return [tuple(block[j][col] for j in range(r)) for col in range(width)]


def block_base_table(
    block: Sequence[Sequence[int]],
    placed: int,
    *,
    block_index: int = 0,
    costs: Sequence[int] | None = None,
    hi: tuple[int, ...] | None = None,
) -> PointTable:
    """Every point one brick reaches with exactly ``placed`` units.

    Runs a layered DP over the brick's columns: a state is (units used,
    point); taking ``q`` copies of a column advances both.  Only the
    exact layer ``placed`` survives.  Points are kept inside the
    nonnegative box capped by ``hi`` (per axis); for bricks whose entries
    are all nonnegative the cap also prunes mid-DP, since points only
    grow.

    Parameters
    ----------
    block : matrix
        r x t brick matrix.
    placed : int
        Exact number of units this brick must place.
    costs : sequence of int, optional
        Per-column objective coefficients; omitted means feasibility
        (all values zero).
    hi : tuple of int, optional
        Per-axis upper cap for kept points.
    """
    r = len(block)
    cols = _columns(block)
    monotone = all(e >= 0 for col in cols for e in col)
    table = PointTable(r, hi, "base", block=block_index)
    origin = (0,) * r

    # layers[u] : point -> (value, counts-so-far)
    layers: dict[int, dict[tuple[int, ...], tuple[int, tuple[int, ...]]]] = {
        0: {origin: (0, ())}
    }
    for idx, col in enumerate(cols):
        cost = costs[idx] if costs is not None else 0
        new_layers: dict[int, dict[tuple[int, ...], tuple[int, tuple[int, ...]]]] = {}
        for used in sorted(layers):
            for pt in sorted(layers[used]):
                value, counts = layers[used][pt]
                current = pt
                current_value = value
                for take in range(0, placed - used + 1):
                    if take > 0:
                        current = tuple(a + b for a, b in zip(current, col))
                        current_value += cost
                        if monotone and hi is not None and any(
                            v > cap for v, cap in zip(current, hi)
                        ):
                            break
                    bucket = new_layers.setdefault(used + take, {})
                    prev = bucket.get(current)
                    entry = (current_value, counts + (take,))
                    if prev is None or entry[0] > prev[0]:
                        bucket[current] = entry
        layers = new_layers

    final = layers.get(placed, {})
    for pt in sorted(final):
        value, counts = final[pt]
        if any(v < 0 for v in pt):
            continue
        if hi is not None and any(v > cap for v, cap in zip(pt, hi)):
            continue
        table.cells[pt] = (value, counts)
    return table


def _window_volume(lo: tuple[int, ...], hi: tuple[int, ...]) -> int:
    vol = 1
    for l, h in zip(lo, hi):
        if h < l:
            return 0
        vol *= h - l + 1
    return vol


def convolve(
    a: PointTable,
    b: PointTable,
    *,
    lo: tuple[int, ...] | None = None,
    hi: tuple[int, ...] | None = None,
) -> PointTable:
    """Minkowski sum of two tables, keeping points inside [lo, hi].

    Values add; per result point the maximum value wins (first witness
    kept on ties).  When the target window is narrower than the right
    table, the right side is enumerated as a window-box lookup instead of
    a full scan — at the last level the window is often a single point,
    which turns the final combine into a dictionary probe per left point.
    """
    r = a.r
    out = PointTable(r, hi, "pair", parents=(a, b))
    if not a.cells or not b.cells:
        return out

    use_box = False
    if lo is not None and hi is not None:
        volume = _window_volume(lo, hi)
        if volume == 0:
            return out
        use_box = volume <= len(b.cells)

    if use_box:
        spans = [range(l, h + 1) for l, h in zip(lo, hi)]
        for a_pt in a.points():
            a_val = a.cells[a_pt][0]
            ranges = [
                range(max(s.start - av, 0), s.stop - av)
                for s, av in zip(spans, a_pt)
            ]
            if any(rg.start >= rg.stop for rg in ranges):
                continue
            for b_pt in itertools.product(*ranges):
                cell = b.cells.get(b_pt)
                if cell is None:
                    continue
                total = tuple(x + y for x, y in zip(a_pt, b_pt))
                value = a_val + cell[0]
                prev = out.cells.get(total)
                if prev is None or value > prev[0]:
                    out.cells[total] = (value, a_pt, b_pt)
        return out

    b_points = b.points()
    for a_pt in a.points():
        a_val = a.cells[a_pt][0]
        for b_pt in b_points:
            total = tuple(x + y for x, y in zip(a_pt, b_pt))
            if lo is not None and any(v < l for v, l in zip(total, lo)):
                continue
            if hi is not None and any(v > h for v, h in zip(total, hi)):
                continue
            value = a_val + b.cells[b_pt][0]
            prev = out.cells.get(total)
            if prev is None or value > prev[0]:
                out.cells[total] = (value, a_pt, b_pt)
    return out


def fold_tables(
    tables: Sequence[PointTable],
    lo: tuple[int, ...],
    hi: tuple[int, ...],
) -> PointTable:
    """Convolve brick tables left to right under a final target window.

    After each step the partial sum is clipped to
    ``[lo - suffix_hi, hi - suffix_lo]``: anything outside can no longer
    be steered into ``[lo, hi]`` by the remaining bricks.  The last step
    therefore lands exactly in the requested window.
    """
    if not tables:
        raise ValueError("fold_tables needs at least one table")
    r = tables[0].r

    suffix_lo = [(0,) * r] * (len(tables) + 1)
    suffix_hi = [(0,) * r] * (len(tables) + 1)
    for idx in range(len(tables) - 1, -1, -1):
        t_lo, t_hi = tables[idx].reach()
        suffix_lo[idx] = tuple(s + v for s, v in zip(suffix_lo[idx + 1], t_lo))
        suffix_hi[idx] = tuple(s + v for s, v in zip(suffix_hi[idx + 1], t_hi))

    def window(idx: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
        w_lo = tuple(
            max(0, l - sh) for l, sh in zip(lo, suffix_hi[idx + 1])
        )
        w_hi = tuple(h - sl for h, sl in zip(hi, suffix_lo[idx + 1]))
        return w_lo, w_hi

    w_lo, w_hi = window(0)
    partial = tables[0].filtered(w_lo, w_hi)
    for idx in range(1, len(tables)):
        if not partial.cells:
            break
        w_lo, w_hi = window(idx)
        partial = convolve(partial, tables[idx], lo=w_lo, hi=w_hi)
    return partial


def _block_costs(inst: NFoldInstance, mode: str) -> list[Sequence[int] | None]:
    """Objective slice per brick (None entries in feasibility mode)."""
    if mode != MODE_OPTIMIZE or inst.c is None:
        return [None] * inst.n
    return [inst.c[sl] for sl in inst.brick_slices()]


def base_tables_for_level(
    inst: NFoldInstance,
    plan: IterationPlan,
    level: int,
    mode: str,
    *,
    hi: tuple[int, ...] | None = None,
) -> list[PointTable]:
    """Per-brick base tables for one level's placed counts."""
    placed = plan.placed_at(level)
    cap = hi
    if cap is None:
        cap = (plan.support * inst.delta,) * inst.r
    costs = _block_costs(inst, mode)
    return [
        block_base_table(
            inst.blocks[k],
            placed[k],
            block_index=k,
            costs=costs[k],
            hi=cap,
        )
        for k in range(inst.n)
    ]


def small_subproblem_set(
    inst: NFoldInstance,
    plan: IterationPlan,
    level: int,
    mode: str = MODE_FEASIBILITY,
) -> PointTable:
    """Complete level point set over the box {0..D}^r.

    This is the reference-shaped variant: no target windows, every point
    within the box radius is kept.  The solver itself folds the same base
    tables under much tighter windows; both agree on their common domain.
    """
    radius = plan.radius
    box = (radius,) * inst.r
    tables = base_tables_for_level(inst, plan, level, mode)
    return fold_tables(tables, (0,) * inst.r, box)

"""Level schedules for the divide-and-conquer doubling solver.

The solver never attacks a brick target ``b`` directly.  It splits the
target across ``I`` levels so that level ``i`` only has to place a small
number of units ("placed") and the rest ("carried", always even) is
halved and pushed down a level:

    target^(I) = b
    target^(i) = placed^(i) + carried^(i),   carried^(i) even
    target^(i-1) = carried^(i) / 2
    placed^(i) <= K

``K`` is the support bound: some optimal brick vector is supported on at
most ``K`` coordinates per level, which is what keeps every per-level
point set small.  ``D = n*K*delta`` is the box radius: the per-axis slack
a partial shared-row vector may have around ``b_up / 2^(I-i)`` and still
extend to a full solution.

Everything here is exact integer arithmetic; base-2 logarithms are taken
via ``int.bit_length`` so no float ever rounds a bound the wrong way.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from .core import MODE_FEASIBILITY, MODE_OPTIMIZE, NFoldInstance

logger = logging.getLogger(__name__)


def _floor_log2(value: int) -> int:
    """Exact floor(log2(value)) for positive integers."""
    if value <= 0:
        raise ValueError(f"floor_log2 needs a positive argument, got {value}")
    return value.bit_length() - 1


def support_bound(r: int, delta: int, mode: str) -> int:
    """Max coordinates a single level ever needs per brick.

    Feasibility:  floor( 2(r+1) * log2(4(r+1) * max(delta, 1)) )
    Optimization: floor( 2(r+2) * (log2(r+2) + delta + 2) )

    Both are computed exactly: the float-free form of
    ``floor(a * log2(m))`` for integer ``a`` is ``floor(log2(m**a))``.
    """
    if r < 1:
        raise ValueError(f"support_bound needs r >= 1, got {r}")
    if delta < 0:
        raise ValueError(f"support_bound needs delta >= 0, got {delta}")
    if mode == MODE_FEASIBILITY:
        base = 4 * (r + 1) * max(delta, 1)
        return _floor_log2(base ** (2 * (r + 1)))
    if mode == MODE_OPTIMIZE:
        whole = 2 * (r + 2) * (delta + 2)
        return whole + _floor_log2((r + 2) ** (2 * (r + 2)))
    raise ValueError(f"unknown mode: {mode!r}")


def box_radius(n: int, support: int, delta: int) -> int:
    """Per-axis slack allowed around the scaled shared-row target."""
    return n * support * delta


def _ceil_div(a: int, b: int) -> int:
    """Exact ceiling division for nonnegative numerator."""
    return -(-a // b)


def iteration_count(b: int, support: int) -> int:
    """Number of levels a brick target needs under support bound K.

    1 when ``b <= K`` (the whole target fits in one level); otherwise the
    halving chain needs the smallest ``e`` with ``2K * 2^e >= b + K``,
    plus the base level.
    """
    if b < 0:
        raise ValueError(f"iteration_count needs b >= 0, got {b}")
    if support < 1:
        raise ValueError(f"iteration_count needs support >= 1, got {support}")
    if b <= support:
        return 1
    quotient = _ceil_div(b + support, 2 * support)
    return 1 + (quotient - 1).bit_length()


def closed_form_target(b: int, support: int, levels: int, i: int) -> int:
    """Level-``i`` target in a ``levels``-deep chain, without simulating.

    Equals ``max(0, ceil((b + K) / 2^(levels - i)) - K)``: exact while the
    chain is still above K, and 0 below the level where the remaining
    target first fits (the anchor level places everything that is left).
    """
    if not 1 <= i <= levels:
        raise ValueError(f"level {i} outside 1..{levels}")
    shift = levels - i
    return max(0, _ceil_div(b + support, 1 << shift) - support)


@dataclass
class LevelSchedule:
    """Per-level split of one brick target (index 0 = bottom level)."""

    targets: tuple[int, ...]
    placed: tuple[int, ...]
    carried: tuple[int, ...]
    parity: tuple[int | None, ...]

    @property
    def levels(self) -> int:
        return len(self.targets)


def _schedule_top_down(b: int, support: int, levels: int) -> LevelSchedule:
    """Run the halving rule from the top level down (uniform rule).

    At each level: if the remaining target fits (``<= K``) place all of it
    and zero out everything below; otherwise place ``K - z`` where the
    parity fix ``z`` makes the carried remainder even, then halve.
    """
    targets, placed, carried, parity = [], [], [], []
    current = b
    for _ in range(levels):
        if current <= support:
            targets.append(current)
            placed.append(current)
            carried.append(0)
            parity.append(None)
            current = 0
            continue
        z = (current - support) & 1
        take = support - z
        rest = current - take
        targets.append(current)
        placed.append(take)
        carried.append(rest)
        parity.append(z)
        current = rest // 2
    # built top-down; store bottom-up so index i-1 is level i
    targets.reverse()
    placed.reverse()
    carried.reverse()
    parity.reverse()
    return LevelSchedule(
        targets=tuple(targets),
        placed=tuple(placed),
        carried=tuple(carried),
        parity=tuple(parity),
    )


def lower_rhs_schedule(b: int, support: int) -> tuple[LevelSchedule, int]:
    """Intrinsic schedule of one brick target plus its level count."""
    levels = iteration_count(b, support)
    return _schedule_top_down(b, support, levels), levels


@dataclass
class IterationPlan:
    """Joint level plan for a whole instance.

    ``schedules[k]`` covers brick ``k`` across the global ``levels`` count;
    bricks that need fewer levels are anchored at the top (their whole
    target is placed at the highest levels, zeros below), which is what
    the uniform top-down rule produces on its own.
    """

    mode: str
    support: int
    radius: int
    levels: int
    block_levels: tuple[int, ...]
    schedules: tuple[LevelSchedule, ...]

    def placed_at(self, level: int) -> tuple[int, ...]:
        """Units every brick must place at ``level`` (1-based)."""
        return tuple(sched.placed[level - 1] for sched in self.schedules)


def build_plan(inst: NFoldInstance, mode: str) -> IterationPlan:
    """Compute K, D, the global level count, and every brick's schedule."""
    delta = inst.delta
    support = support_bound(inst.r, delta, mode)
    radius = box_radius(inst.n, support, delta)
    block_levels = tuple(iteration_count(b, support) for b in inst.b_low)
    levels = max(block_levels)
    schedules = tuple(
        _schedule_top_down(b, support, levels) for b in inst.b_low
    )
    logger.debug(
        "plan: K=%d D=%d levels=%d block_levels=%s", support, radius, levels, block_levels
    )
    return IterationPlan(
        mode=mode,
        support=support,
        radius=radius,
        levels=levels,
        block_levels=block_levels,
        schedules=schedules,
    )


def plan_to_json(plan: IterationPlan) -> dict:
    """JSON shape of a plan (for the CLI `plan` subcommand)."""
    return {
        "mode": plan.mode,
        "support_bound": plan.support,
        "box_radius": plan.radius,
        "levels": plan.levels,
        "block_levels": list(plan.block_levels),
        "targets": [list(s.targets) for s in plan.schedules],
        "placed": [list(s.placed) for s in plan.schedules],
        "carried": [list(s.carried) for s in plan.schedules],
        "parity": [list(s.parity) for s in plan.schedules],
    }

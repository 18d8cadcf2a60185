"""Cayley ball enumeration, growth tables, and subgroup distortion.

Balls are enumerated breadth-first, sphere by sphere. Every product of a
sphere element with a generator changes length by exactly one, so the next
sphere is the set of length-increasing products, deduplicated; nothing can
collide with earlier spheres. Elements are kept in packed byte form and the
finished ball is sorted shortlex, which makes every ball of smaller radius
a prefix slice.

Relative balls of a subgroup are computed by filtering whole-group balls
through a membership oracle, never by searching in subgroup generators:
the ambient metric is the definition, and filtering inherits its
exactness. Oracles may answer "unknown"; such elements are excluded from
the ball and tallied separately so no count silently pretends precision.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

from ._parallel import parallel_map, partition
from .errors import BallBudgetError, InvariantViolationError, SearchDepthError
from .subgroups import BudgetedEnumerationOracle, StallingsOracle, SubgroupOracle
from .words import (
    SEP,
    Element,
    GroupDescriptor,
    invert_packed,
    multiply_packed,
    multiply_words,
    packed_length,
)

DEFAULT_BUDGET = 10_000_000


@dataclass(frozen=True)
class Ball:
    """All elements within a radius, shortlex sorted, in packed form.

    For filtered (relative) balls, unknown_by_radius[n] counts ambient-ball
    elements up to radius n whose membership the oracle could not decide.
    """

    group: GroupDescriptor
    radius: int
    packed: tuple[bytes, ...]
    unknown_by_radius: tuple[int, ...] = ()

    @property
    def unknown_count(self) -> int:
        return self.unknown_by_radius[-1] if self.unknown_by_radius else 0

    def __len__(self) -> int:
        return len(self.packed)

    def __iter__(self) -> Iterator[Element]:
        for p in self.packed:
            yield Element(self.group, p)

    def __contains__(self, g: Element) -> bool:
        if g.group != self.group:
            return False
        i = bisect.bisect_left(self.packed, (len(g.packed), g.packed), key=lambda p: (len(p), p))
        return i < len(self.packed) and self.packed[i] == g.packed

    def elements(self) -> tuple[Element, ...]:
        return tuple(self)

    @cached_property
    def counts_by_radius(self) -> tuple[int, ...]:
        """|B(n)| for n = 0..radius (cumulative)."""
        offset = self.group.num_factors - 1
        counts = [0] * (self.radius + 1)
        for p in self.packed:
            counts[len(p) - offset] += 1
        total = 0
        out = []
        for c in counts:
            total += c
            out.append(total)
        return tuple(out)

    def sphere_counts(self) -> tuple[int, ...]:
        balls = self.counts_by_radius
        return (balls[0],) + tuple(
            balls[n] - balls[n - 1] for n in range(1, self.radius + 1)
        )

    def up_to(self, radius: int) -> "Ball":
        """The sub-ball of smaller radius (a prefix of the sorted elements)."""
        if radius > self.radius:
            raise ValueError(f"ball only covers radius {self.radius}")
        if radius == self.radius:
            return self
        unknown = (
            self.unknown_by_radius[: radius + 1] if self.unknown_by_radius else ()
        )
        return Ball(
            self.group,
            radius,
            self.packed[: self.counts_by_radius[radius]],
            unknown,
        )


def _expand_chunk(args: tuple[Sequence[bytes], list[bytes], int]) -> list[bytes]:
    """Length-increasing products of chunk elements with all generators."""
    chunk, gens, nf = args
    out = []
    if nf == 1:
        # single free factor: append or cancel one letter, no separators
        for u in chunk:
            n = len(u)
            for g in gens:
                v = multiply_words(u, g)
                if len(v) > n:
                    out.append(v)
    else:
        for u in chunk:
            n = len(u)
            for g in gens:
                v = multiply_packed(u, g, nf)
                if len(v) > n:
                    out.append(v)
    return out


def enumerate_ball(
    group: GroupDescriptor,
    radius: int,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
) -> Ball:
    """Exact ball of the whole group, breadth-first with deduplication."""
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    gens = [g.packed for g in group.symmetric_generators()]
    nf = group.num_factors
    identity = group.identity().packed
    if budget < 1:
        raise BallBudgetError(radius_reached=-1, target_radius=radius, budget=budget)
    elems: list[bytes] = [identity]
    frontier: list[bytes] = [identity]
    total = 1
    for r in range(radius):
        chunks = partition(frontier, workers)
        results = parallel_map(_expand_chunk, [(c, gens, nf) for c in chunks], workers)
        sphere_seen: set[bytes] = set()
        sphere: list[bytes] = []
        for res in results:
            for cand in res:
                if cand not in sphere_seen:
                    sphere_seen.add(cand)
                    sphere.append(cand)
                    total += 1
                    if total > budget:
                        raise BallBudgetError(
                            radius_reached=r, target_radius=radius, budget=budget
                        )
        elems.extend(sphere)
        frontier = sphere
    elems.sort(key=lambda p: (len(p), p))
    return Ball(group, radius, tuple(elems))


def _filter_chunk(
    args: tuple[Sequence[bytes], SubgroupOracle, int]
) -> tuple[list[bytes], list[int]]:
    chunk, oracle, offset = args
    kept: list[bytes] = []
    unknown_lengths: list[int] = []
    for p in chunk:
        got = oracle.contains_packed(p)
        if got is True:
            kept.append(p)
        elif got is None:
            unknown_lengths.append(len(p) - offset)
    return kept, unknown_lengths


def relative_ball(
    group: GroupDescriptor,
    oracle: SubgroupOracle,
    radius: int,
    *,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    ambient: Ball | None = None,
) -> Ball:
    """Subgroup elements of ambient length <= radius, by filtering the ball.

    An already enumerated ambient ball of sufficient radius can be passed
    to avoid re-enumeration.
    """
    if oracle.group != group:
        raise ValueError("oracle is over a different group")
    if ambient is None:
        ambient = enumerate_ball(group, radius, budget=budget, workers=workers)
    elif ambient.group != group or ambient.radius < radius:
        raise ValueError("supplied ambient ball does not cover the request")
    if ambient.radius > radius:
        ambient = ambient.up_to(radius)
    offset = group.num_factors - 1
    chunks = partition(ambient.packed, workers)
    results = parallel_map(
        _filter_chunk, [(c, oracle, offset) for c in chunks], workers
    )
    kept: list[bytes] = []
    unknown = [0] * (radius + 1)
    for chunk_kept, unknown_lengths in results:
        kept.extend(chunk_kept)
        for n in unknown_lengths:
            unknown[n] += 1
    cumulative = []
    running = 0
    for c in unknown:
        running += c
        cumulative.append(running)
    return Ball(group, radius, tuple(kept), tuple(cumulative))


@dataclass(frozen=True)
class GrowthTable:
    """Ball sizes by radius, for a whole group or a subgroup within it."""

    group: GroupDescriptor
    counts: tuple[int, ...]
    subgroup: str | None = None
    unknown: tuple[int, ...] | None = None

    @property
    def max_radius(self) -> int:
        return len(self.counts) - 1

    def __getitem__(self, n: int) -> int:
        return self.counts[n]

    def rows(self) -> list[tuple[int, int]]:
        return list(enumerate(self.counts))


def submultiplicativity_violations(counts: Sequence[int]) -> list[tuple[int, int]]:
    """Pairs (m, n) with |B(m+n)| > |B(m)| * |B(n)|; empty for real growth."""
    top = len(counts) - 1
    bad = []
    for m in range(top + 1):
        for n in range(top + 1 - m):
            if counts[m + n] > counts[m] * counts[n]:
                bad.append((m, n))
    return bad


def growth_sequence(
    group: GroupDescriptor,
    radius: int,
    *,
    oracle: SubgroupOracle | None = None,
    budget: int = DEFAULT_BUDGET,
    workers: int = 1,
    ambient: Ball | None = None,
) -> GrowthTable:
    """Growth table via enumeration (and filtering, when an oracle is given).

    Whole-group tables are validated against the submultiplicativity law
    |B(m+n)| <= |B(m)||B(n)| on every split of every radius in range; a
    violation means the enumeration itself is broken, so it raises.
    """
    if oracle is None:
        ball = enumerate_ball(group, radius, budget=budget, workers=workers)
        counts = ball.counts_by_radius
        bad = submultiplicativity_violations(counts)
        if bad:
            raise InvariantViolationError(
                f"ball counts fail submultiplicativity at (m, n) = {bad[:3]}"
            )
        return GrowthTable(group, counts)
    rel = relative_ball(
        group, oracle, radius, budget=budget, workers=workers, ambient=ambient
    )
    return GrowthTable(
        group,
        rel.counts_by_radius,
        subgroup=oracle.spec_string(),
        unknown=rel.unknown_by_radius,
    )


def subgroup_word_length(
    generators: Sequence[Element],
    target: Element,
    *,
    depth_cap: int = 64,
) -> int:
    """|target|_Y by iterative deepening over products of the generators.

    Exact without storing subgroup balls. Search is pruned by the admissible
    bound that one step changes ambient length by at most max |y|_X, and by
    never undoing the previous step.
    """
    group = target.group
    nf = group.num_factors
    steps: list[bytes] = []
    undo: list[int] = []
    for g in generators:
        steps.append(invert_packed(g.packed, nf))  # left-division steps
        steps.append(g.packed)
        undo.extend([len(steps) - 1, len(steps) - 2])
    max_step = max((packed_length(s, nf) for s in steps), default=0)
    identity = group.identity().packed

    def dfs(residual: bytes, depth: int, last: int) -> bool:
        if residual == identity:
            return True
        if depth == 0 or packed_length(residual, nf) > depth * max_step:
            return False
        for i, s in enumerate(steps):
            if last >= 0 and i == undo[last]:
                continue
            if dfs(multiply_packed(s, residual, nf), depth - 1, i):
                return True
        return False

    for depth in range(depth_cap + 1):
        if dfs(target.packed, depth, -1):
            return depth
    raise SearchDepthError(target.render(), depth_cap)


@dataclass(frozen=True)
class DistortionTable:
    """max |h|_Y over h in H with |h|_X <= n, per radius n."""

    group: GroupDescriptor
    subgroup: str
    values: tuple[int, ...]
    unknown: tuple[int, ...]

    @property
    def max_radius(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    def rows(self) -> list[tuple[int, int]]:
        return list(enumerate(self.values))


def distortion(
    group: GroupDescriptor,
    generators: Sequence[Element],
    radius: int,
    *,
    budget: int = DEFAULT_BUDGET,
    depth_cap: int = 64,
    workers: int = 1,
    oracle: SubgroupOracle | None = None,
) -> DistortionTable:
    """Distortion of H = <generators> inside its ambient group.

    Members are collected by filtering the ambient ball, then each gets its
    exact generator-word length. When the generators spread over several
    factors membership falls back to budgeted enumeration, and elements it
    cannot certify are excluded but tallied in `unknown`.
    """
    if oracle is None:
        supports = {
            i
            for g in generators
            for i, p in enumerate(g.packed.split(SEP))
            if p
        }
        if len(supports) <= 1:
            oracle = StallingsOracle(group, generators)
        else:
            oracle = BudgetedEnumerationOracle(group, generators, radius=radius)
    rel = relative_ball(group, oracle, radius, budget=budget, workers=workers)
    offset = group.num_factors - 1
    values = [0] * (radius + 1)
    for p in rel.packed:
        n = len(p) - offset
        y_len = subgroup_word_length(
            generators, Element(group, p), depth_cap=depth_cap
        )
        if y_len > values[n]:
            values[n] = y_len
    best = 0
    out = []
    for v in values:
        best = max(best, v)
        out.append(best)
    return DistortionTable(
        group, oracle.spec_string(), tuple(out), rel.unknown_by_radius
    )

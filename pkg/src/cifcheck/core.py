"""Core types for group identification: societies, opinions, profiles.

Agents are indexed 0..n-1 internally; all text I/O (the wire format and
witness rendering) is 1-based. An opinion is a bitmask with bit i set when
agent i is approved. The canonical order on profiles is lexicographic on
the tuple of opinion masks, first opinion most significant, which makes
"first witness in canonical order" a deterministic notion everywhere.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

# Hard bound comes from the bitmask encoding; the exhaustive bound keeps
# profile sweeps at (2^n)^n tractable. n=5 (33.5M profiles) is opt-in.
ENCODING_MAX_N = 16
EXHAUSTIVE_MAX_N = 4
EXHAUSTIVE_HARD_MAX_N = 5


class ProfileFormatError(ValueError):
    """Malformed profile text; `position` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


@dataclass(frozen=True, order=True)
class Society:
    """A finite society of n agents, indexed 0..n-1 internally."""

    n: int

    def __post_init__(self):
        if not 1 <= self.n <= ENCODING_MAX_N:
            raise ValueError(f"society size must be in 1..{ENCODING_MAX_N}, got {self.n}")

    @property
    def agents(self) -> range:
        return range(self.n)

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @property
    def profile_count(self) -> int:
        return (1 << self.n) ** self.n


def require_exhaustible(society: Society, allow_large: bool = False) -> None:
    """Guard for operations that sweep the whole profile space."""
    n = society.n
    if n <= EXHAUSTIVE_MAX_N:
        return
    if n <= EXHAUSTIVE_HARD_MAX_N and allow_large:
        warnings.warn(
            f"exhaustive sweep over {society.profile_count} profiles at n={n}; "
            "this may take a long time",
            RuntimeWarning,
            stacklevel=3,
        )
        return
    raise ValueError(
        f"exhaustive operations are bounded at n<={EXHAUSTIVE_MAX_N} "
        f"(n<={EXHAUSTIVE_HARD_MAX_N} with allow_large=True); got n={n}"
    )


@dataclass(frozen=True)
class AgentSet:
    """A subset of the society, stored as a bitmask (bit i = agent i).

    Used in three roles: an agent's opinion, a rule's output, and the
    approver column of a target agent.
    """

    mask: int
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= ENCODING_MAX_N:
            raise ValueError(f"ambient size must be in 1..{ENCODING_MAX_N}, got {self.n}")
        if not 0 <= self.mask < (1 << self.n):
            raise ValueError(f"member out of range for n={self.n}: mask={self.mask:#x}")

    @classmethod
    def empty(cls, n: int) -> "AgentSet":
        return cls(0, n)

    @classmethod
    def full(cls, n: int) -> "AgentSet":
        return cls((1 << n) - 1, n)

    @classmethod
    def from_members(cls, members: Iterable[int], n: int) -> "AgentSet":
        mask = 0
        for a in members:
            if not 0 <= a < n:
                raise ValueError(f"agent index {a} out of range for n={n}")
            mask |= 1 << a
        return cls(mask, n)

    @property
    def members(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if (self.mask >> i) & 1)

    def __contains__(self, agent: int) -> bool:
        return 0 <= agent < self.n and (self.mask >> agent) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)

    def __len__(self) -> int:
        return self.mask.bit_count()

    def __bool__(self) -> bool:
        return self.mask != 0

    def _check_same(self, other: "AgentSet") -> None:
        if self.n != other.n:
            raise ValueError(f"ambient size mismatch: {self.n} vs {other.n}")

    def __or__(self, other: "AgentSet") -> "AgentSet":
        self._check_same(other)
        return AgentSet(self.mask | other.mask, self.n)

    def __and__(self, other: "AgentSet") -> "AgentSet":
        self._check_same(other)
        return AgentSet(self.mask & other.mask, self.n)

    def __xor__(self, other: "AgentSet") -> "AgentSet":
        self._check_same(other)
        return AgentSet(self.mask ^ other.mask, self.n)

    def __sub__(self, other: "AgentSet") -> "AgentSet":
        self._check_same(other)
        return AgentSet(self.mask & ~other.mask, self.n)

    def complement(self) -> "AgentSet":
        return AgentSet(self.mask ^ ((1 << self.n) - 1), self.n)

    def __str__(self) -> str:
        return "{" + ",".join(str(i + 1) for i in self.members) + "}"

    def __repr__(self) -> str:
        return f"AgentSet({self}, n={self.n})"


@dataclass(frozen=True)
class Profile:
    """An ordered tuple of opinions; entry k is agent k's opinion."""

    opinions: tuple[AgentSet, ...]

    def __post_init__(self):
        n = len(self.opinions)
        if not 1 <= n <= ENCODING_MAX_N:
            raise ValueError(f"profile must have 1..{ENCODING_MAX_N} opinions, got {n}")
        for k, op in enumerate(self.opinions):
            if op.n != n:
                raise ValueError(
                    f"opinion {k + 1} has ambient size {op.n}, expected {n}"
                )

    @property
    def n(self) -> int:
        return len(self.opinions)

    @property
    def society(self) -> Society:
        return Society(self.n)

    @property
    def masks(self) -> tuple[int, ...]:
        return tuple(op.mask for op in self.opinions)

    @classmethod
    def from_masks(cls, masks: Sequence[int], n: int) -> "Profile":
        return cls(tuple(AgentSet(m, n) for m in masks))

    def code(self) -> int:
        return code_from_masks(self.masks, self.n)

    @classmethod
    def from_code(cls, code: int, n: int) -> "Profile":
        return cls.from_masks(masks_from_code(code, n), n)

    def __str__(self) -> str:
        return format_profile(self)

    def __repr__(self) -> str:
        return f"Profile({format_profile(self)!r})"


def bit_position(voter: int, target: int, n: int) -> int:
    """Bit of (voter approves target) inside the canonical profile code."""
    return n * (n - 1 - voter) + target


def code_from_masks(masks: Sequence[int], n: int) -> int:
    code = 0
    for m in masks:
        code = (code << n) | m
    return code


def masks_from_code(code: int, n: int) -> tuple[int, ...]:
    full = (1 << n) - 1
    return tuple((code >> (n * (n - 1 - k))) & full for k in range(n))


def make_profile(opinions: Sequence[AgentSet], society: Society) -> Profile:
    """Validate opinions against the society and build a Profile."""
    if len(opinions) != society.n:
        raise ValueError(
            f"expected {society.n} opinions for n={society.n}, got {len(opinions)}"
        )
    for k, op in enumerate(opinions):
        if op.n != society.n:
            raise ValueError(
                f"opinion {k + 1} has ambient size {op.n}, expected {society.n}"
            )
    return Profile(tuple(opinions))


def column(profile: Profile, target: int) -> AgentSet:
    """The approver set of `target`: every agent whose opinion includes it."""
    n = profile.n
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for n={n}")
    mask = 0
    for k, m in enumerate(profile.masks):
        mask |= ((m >> target) & 1) << k
    return AgentSet(mask, n)


def flip_opinion(profile: Profile, voter: int, target: int) -> Profile:
    """Toggle membership of `target` in `voter`'s opinion (an involution)."""
    n = profile.n
    if not 0 <= voter < n:
        raise ValueError(f"voter {voter} out of range for n={n}")
    if not 0 <= target < n:
        raise ValueError(f"target {target} out of range for n={n}")
    masks = list(profile.masks)
    masks[voter] ^= 1 << target
    return Profile.from_masks(masks, n)


def enumerate_profiles(society: Society, allow_large: bool = False) -> Iterator[Profile]:
    """Yield all (2^n)^n profiles in canonical (lexicographic) order."""
    require_exhaustible(society, allow_large)
    n = society.n
    for code in range(society.profile_count):
        yield Profile.from_code(code, n)


def format_profile(profile: Profile) -> str:
    """Render in the wire format, e.g. "{1,3};{};{2}" (1-based agents)."""
    return ";".join(str(op) for op in profile.opinions)


def parse_profile(text: str) -> Profile:
    """Parse the wire format; the society size is the number of groups.

    Whitespace around tokens is ignored; duplicate members and out-of-range
    indices are rejected.
    """
    if not text.strip():
        raise ProfileFormatError("empty profile text", 0)
    groups: list[tuple[set[int], int]] = []
    offset = 0
    for chunk in text.split(";"):
        members = _parse_group(chunk, offset)
        groups.append((members, offset))
        offset += len(chunk) + 1
    n = len(groups)
    if n > ENCODING_MAX_N:
        raise ProfileFormatError(f"too many opinions ({n} > {ENCODING_MAX_N})", 0)
    opinions = []
    for members, pos in groups:
        for a in members:
            if a > n:
                raise ProfileFormatError(
                    f"agent {a} out of range for n={n} (inferred from group count)", pos
                )
        opinions.append(AgentSet.from_members((a - 1 for a in members), n))
    return Profile(tuple(opinions))


def _parse_group(chunk: str, offset: int) -> set[int]:
    stripped = chunk.strip()
    pos = offset + chunk.index(stripped) if stripped else offset
    if not (stripped.startswith("{") and stripped.endswith("}")):
        raise ProfileFormatError(f"expected brace-delimited set, got {stripped!r}", pos)
    inner = stripped[1:-1].strip()
    members: set[int] = set()
    if not inner:
        return members
    for item in inner.split(","):
        token = item.strip()
        if not token.isdigit():
            raise ProfileFormatError(f"expected agent index, got {token!r}", pos)
        a = int(token)
        if a < 1:
            raise ProfileFormatError(f"agent indices are 1-based, got {a}", pos)
        if a in members:
            raise ProfileFormatError(f"duplicate agent {a}", pos)
        members.add(a)
    return members

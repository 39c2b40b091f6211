"""The rule catalog: every collective identity function used by the suite.

A rule maps profiles to agent sets. Closed-form rules are frozen
dataclasses; table-backed rules carry explicit truth tables (one per
target for the independence-respecting class, one 32-bit table for the
full n=2 space). `eval_mask` is the fast path used when sweeping whole
profile spaces; `evaluate` is the validated public entry point.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

from .core import (
    AgentSet,
    Profile,
    Society,
    masks_from_code,
    require_exhaustible,
)


class Rule:
    """Base class; subclasses implement `eval_mask` and optionally bounds."""

    @property
    def name(self) -> str:
        raise NotImplementedError

    def validate_for(self, n: int) -> None:
        """Raise ValueError when the rule is undefined for society size n."""

    def eval_mask(self, masks: tuple[int, ...], n: int) -> int:
        raise NotImplementedError

    def evaluate(self, profile: Profile) -> AgentSet:
        n = profile.n
        self.validate_for(n)
        return AgentSet(self.eval_mask(profile.masks, n), n)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class StrongLiberal(Rule):
    """Everyone who approves of themself is in."""

    name: str = field(default="strong-liberal", init=False)

    def eval_mask(self, masks, n):
        out = 0
        for i in range(n):
            out |= masks[i] & (1 << i)
        return out


@dataclass(frozen=True)
class Unanimity(Rule):
    """Members are the agents approved by every opinion."""

    name: str = field(default="unanimity", init=False)

    def eval_mask(self, masks, n):
        out = (1 << n) - 1
        for m in masks:
            out &= m
        return out


@dataclass(frozen=True)
class Inclusive(Rule):
    """Members are the agents approved by at least one opinion."""

    name: str = field(default="inclusive", init=False)

    def eval_mask(self, masks, n):
        out = 0
        for m in masks:
            out |= m
        return out


@dataclass(frozen=True)
class Consent(Rule):
    """Self-approval certified by >= s approvers; self-disapproval by >= t
    disapprovers (approver counts include the agent's own vote)."""

    s: int
    t: int

    @property
    def name(self) -> str:
        return f"consent:{self.s},{self.t}"

    def validate_for(self, n):
        if not (1 <= self.s <= n and 1 <= self.t <= n):
            raise ValueError(f"consent parameters must be in 1..{n}, got s={self.s}, t={self.t}")

    def eval_mask(self, masks, n):
        out = 0
        for i in range(n):
            approvals = sum((m >> i) & 1 for m in masks)
            if (masks[i] >> i) & 1:
                member = approvals >= self.s
            else:
                member = not (n - approvals >= self.t)
            if member:
                out |= 1 << i
        return out


@dataclass(frozen=True)
class Sigma(Rule):
    """Permutation rule: sigma(i) is in exactly when agent i approves
    sigma(i). `image` is the 0-based tuple (sigma(0), ..., sigma(n-1))."""

    image: tuple[int, ...]

    @property
    def name(self) -> str:
        return "sigma:" + ",".join(str(j + 1) for j in self.image)

    def validate_for(self, n):
        if len(self.image) != n or sorted(self.image) != list(range(n)):
            raise ValueError(f"sigma image {self.image} is not a permutation of 0..{n - 1}")

    def eval_mask(self, masks, n):
        out = 0
        for i, j in enumerate(self.image):
            if (masks[i] >> j) & 1:
                out |= 1 << j
        return out


@dataclass(frozen=True)
class Constant(Rule):
    """Outputs a fixed set on every profile."""

    output: AgentSet

    @property
    def name(self) -> str:
        return f"constant:{self.output}"

    def validate_for(self, n):
        if self.output.n != n:
            raise ValueError(f"constant rule is bound to n={self.output.n}, profile has n={n}")

    def eval_mask(self, masks, n):
        return self.output.mask


@dataclass(frozen=True)
class ConstantAll(Rule):
    """Outputs the whole society on every profile."""

    name: str = field(default="constant-all", init=False)

    def eval_mask(self, masks, n):
        return (1 << n) - 1


@dataclass(frozen=True)
class Dictator(Rule):
    """Outputs agent d's opinion verbatim. Background catalog only."""

    d: int

    @property
    def name(self) -> str:
        return f"dictator:{self.d + 1}"

    def validate_for(self, n):
        if not 0 <= self.d < n:
            raise ValueError(f"dictator {self.d} out of range for n={n}")

    def eval_mask(self, masks, n):
        return masks[self.d]


@dataclass(frozen=True)
class Swap(Rule):
    """Self-approvers when they are none or all; their complement otherwise."""

    name: str = field(default="swap", init=False)

    def eval_mask(self, masks, n):
        full = (1 << n) - 1
        stl = 0
        for i in range(n):
            stl |= masks[i] & (1 << i)
        if stl == 0 or stl == full:
            return stl
        return full & ~stl


@dataclass(frozen=True)
class ThresholdHalf(Rule):
    """In with a positive approval count strictly below half, or unanimous.

    The half comparison is strict and exact (2*count < n).
    """

    name: str = field(default="threshold-half", init=False)

    def eval_mask(self, masks, n):
        out = 0
        for i in range(n):
            cnt = sum((m >> i) & 1 for m in masks)
            if (0 < cnt and 2 * cnt < n) or cnt == n:
                out |= 1 << i
        return out


@dataclass(frozen=True)
class FirstVoter(Rule):
    """Unanimity set if nonempty; else agent 1's exclusive picks; else empty.

    "Exclusive picks" are the members of the first opinion approved by
    nobody else; the fallback applies only when the first opinion is not
    the whole society.
    """

    name: str = field(default="first-voter", init=False)

    def eval_mask(self, masks, n):
        full = (1 << n) - 1
        unanimous = full
        for m in masks:
            unanimous &= m
        if unanimous:
            return unanimous
        if masks[0] != full:
            others = 0
            for m in masks[1:]:
                others |= m
            return masks[0] & ~others
        return 0


@dataclass(frozen=True)
class ConsensusFallbackInclusive(Rule):
    """Iterated-consensus fixed point; inclusive fallback when the initial
    consensus set is empty."""

    name: str = field(default="consensus-fallback-inclusive", init=False)

    def eval_mask(self, masks, n):
        stages = _consensus_stages(masks, n)
        if stages[0] == 0:
            out = 0
            for m in masks:
                out |= m
            return out
        return stages[-1]


@dataclass(frozen=True)
class ConsensusUnanimityCollapse(Rule):
    """Iterated-consensus fixed point, collapsing to the unanimity set
    whenever some later stage reaches the whole society."""

    name: str = field(default="consensus-unanimity-collapse", init=False)

    def eval_mask(self, masks, n):
        full = (1 << n) - 1
        stages = _consensus_stages(masks, n)
        if any(s == full for s in stages[1:]):
            return stages[0]
        return stages[-1]


@dataclass(frozen=True)
class CrossDecisive(Rule):
    """n=2 only: each agent's membership is decided by the other agent."""

    name: str = field(default="cross-decisive", init=False)

    def validate_for(self, n):
        if n != 2:
            raise ValueError(f"cross-decisive is defined only for n=2, got n={n}")

    def eval_mask(self, masks, n):
        out = 0
        if (masks[0] >> 1) & 1:
            out |= 2
        if masks[1] & 1:
            out |= 1
        return out


@dataclass(frozen=True)
class DecomposedTable(Rule):
    """One boolean table per target over that target's approver column.

    `tables[i]` has bit c set when column value c (a bitmask over voters)
    makes agent i a member. Every such rule satisfies independence by
    construction.
    """

    tables: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"table:{encode_decomposed(self.tables):0{decomposed_hex_digits(len(self.tables))}x}"

    def validate_for(self, n):
        if len(self.tables) != n:
            raise ValueError(f"expected {n} tables, got {len(self.tables)}")
        limit = 1 << (1 << n)
        for i, t in enumerate(self.tables):
            if not 0 <= t < limit:
                raise ValueError(f"table {i + 1} out of range for n={n}")

    def eval_mask(self, masks, n):
        out = 0
        for i in range(n):
            col = 0
            for k, m in enumerate(masks):
                col |= ((m >> i) & 1) << k
            if (self.tables[i] >> col) & 1:
                out |= 1 << i
        return out


@dataclass(frozen=True)
class FullTable(Rule):
    """n=2 only: the full 32-bit rule table.

    Bit (16*t + p) holds agent t's membership on the profile with
    canonical code p (target-major, the canonical rule encoding).
    """

    bits: int

    @property
    def name(self) -> str:
        return f"table:{self.bits:08x}"

    def validate_for(self, n):
        if n != 2:
            raise ValueError(f"full-table rules are defined only for n=2, got n={n}")
        if not 0 <= self.bits < (1 << 32):
            raise ValueError("full table must fit in 32 bits")

    def eval_mask(self, masks, n):
        code = (masks[0] << 2) | masks[1]
        return ((self.bits >> code) & 1) | (((self.bits >> (16 + code)) & 1) << 1)


def decomposed_hex_digits(n: int) -> int:
    """Hex digits of the canonical encoding of an n-target table tuple."""
    return (n * (1 << n) + 3) // 4


def encode_decomposed(tables: tuple[int, ...]) -> int:
    """Canonical integer encoding: target-major, column-minor, little-endian."""
    n = len(tables)
    width = 1 << n
    enc = 0
    for i, t in enumerate(tables):
        enc |= t << (i * width)
    return enc


def decode_decomposed(encoding: int, n: int) -> tuple[int, ...]:
    width = 1 << n
    mask = (1 << width) - 1
    return tuple((encoding >> (i * width)) & mask for i in range(n))


def _consensus_stages(masks: tuple[int, ...], n: int) -> list[int]:
    """Stage masks of the iterated-consensus expansion.

    Stage 0 is the all-voter unanimity set. Each later stage adds the
    agents approved by every current member; an empty committee certifies
    nobody (the expansion stops at the empty set rather than jumping to
    everyone). The list ends with the first repeated stage.
    """
    full = (1 << n) - 1
    cur = full
    for m in masks:
        cur &= m
    stages = [cur]
    while True:
        if cur == 0:
            nxt = 0
        else:
            add = full
            k = cur
            while k:
                b = k & -k
                add &= masks[b.bit_length() - 1]
                k ^= b
            nxt = cur | add
        stages.append(nxt)
        if nxt == cur:
            return stages
        cur = nxt


@dataclass(frozen=True)
class ConsensusTrace:
    """The stage sets of the iterated-consensus expansion for one profile."""

    stages: tuple[AgentSet, ...]
    fixed_point: AgentSet
    reached_full: bool
    reached_at: int | None

    @property
    def reached_n(self) -> bool:
        return self.reached_full


def consensus_iterate(profile: Profile) -> ConsensusTrace:
    """Run the iterated-consensus expansion and record every stage."""
    n = profile.n
    raw = _consensus_stages(profile.masks, n)
    full = (1 << n) - 1
    reached_at = next((t for t, s in enumerate(raw) if s == full and t > 0), None)
    return ConsensusTrace(
        stages=tuple(AgentSet(s, n) for s in raw),
        fixed_point=AgentSet(raw[-1], n),
        reached_full=reached_at is not None,
        reached_at=reached_at,
    )


@functools.lru_cache(maxsize=256)
def output_table(rule: Rule, society: Society) -> tuple[int, ...]:
    """Rule outputs over the whole profile space, indexed by canonical code."""
    require_exhaustible(society)
    n = society.n
    rule.validate_for(n)
    eval_mask = rule.eval_mask
    return tuple(eval_mask(masks_from_code(code, n), n) for code in range(society.profile_count))


def identity_sigma(n: int) -> Sigma:
    return Sigma(tuple(range(n)))


def all_sigma_rules(n: int) -> list[Sigma]:
    return [Sigma(p) for p in itertools.permutations(range(n))]


def catalog_rules(society: Society) -> list[Rule]:
    """Named rules used for labelling search survivors, in naming priority."""
    n = society.n
    roster: list[Rule] = [StrongLiberal(), Unanimity(), Inclusive()]
    if n == 2:
        roster.append(CrossDecisive())
    roster += [
        Swap(),
        ThresholdHalf(),
        ConstantAll(),
        Constant(AgentSet.empty(n)),
        FirstVoter(),
        ConsensusFallbackInclusive(),
        ConsensusUnanimityCollapse(),
    ]
    roster += [Dictator(d) for d in range(n)]
    roster += [s for s in all_sigma_rules(n) if s.image != tuple(range(n))]
    roster += [Consent(s, t) for s in range(1, n + 1) for t in range(1, n + 1)]
    return roster


@functools.lru_cache(maxsize=8)
def _catalog_tables(society: Society) -> dict[tuple[int, ...], str]:
    names: dict[tuple[int, ...], str] = {}
    for rule in catalog_rules(society):
        table = output_table(rule, society)
        names.setdefault(table, rule.name)
    return names


def catalog_name(rule: Rule, society: Society) -> str | None:
    """The catalog name of a rule that agrees with one on every profile."""
    return _catalog_tables(society).get(output_table(rule, society))


def parse_rule(text: str, n: int) -> Rule:
    """Parse a CLI rule string and validate it for society size n."""
    head, _, arg = text.partition(":")
    head = head.strip().lower()
    arg = arg.strip()
    rule = _build_rule(head, arg, n, text)
    rule.validate_for(n)
    return rule


def _build_rule(head: str, arg: str, n: int, original: str) -> Rule:
    plain = {
        "strong-liberal": StrongLiberal,
        "unanimity": Unanimity,
        "inclusive": Inclusive,
        "swap": Swap,
        "threshold-half": ThresholdHalf,
        "constant-all": ConstantAll,
        "consensus-fallback-inclusive": ConsensusFallbackInclusive,
        "first-voter": FirstVoter,
        "consensus-unanimity-collapse": ConsensusUnanimityCollapse,
        "cross-decisive": CrossDecisive,
    }
    if head in plain:
        if arg:
            raise ValueError(f"rule {head!r} takes no parameter")
        return plain[head]()
    if head == "consent":
        s, t = _parse_int_list(arg, 2, original)
        return Consent(s, t)
    if head == "sigma":
        image = _parse_int_list(arg, None, original)
        return Sigma(tuple(j - 1 for j in image))
    if head == "dictator":
        (d,) = _parse_int_list(arg, 1, original)
        return Dictator(d - 1)
    if head == "constant":
        from .core import parse_profile

        if not (arg.startswith("{") and arg.endswith("}")):
            raise ValueError(f"constant rule expects a set like {{1,2}}, got {arg!r}")
        members = parse_profile(";".join([arg] + ["{}"] * (n - 1))).opinions[0].members
        return Constant(AgentSet.from_members(members, n))
    if head == "table":
        return _parse_table(arg, n)
    raise ValueError(f"unknown rule {original!r}")


def _parse_int_list(arg: str, expect: int | None, original: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x.strip()) for x in arg.split(",") if x.strip())
    except ValueError as exc:
        raise ValueError(f"bad integer parameters in rule {original!r}") from exc
    if not values or (expect is not None and len(values) != expect):
        raise ValueError(f"bad parameter count in rule {original!r}")
    return values


def _parse_table(arg: str, n: int) -> Rule:
    if not arg or any(c not in "0123456789abcdef" for c in arg.lower()):
        raise ValueError(f"table encoding must be lowercase hex, got {arg!r}")
    decomposed_digits = decomposed_hex_digits(n)
    if len(arg) == 8 and n == 2 and decomposed_digits != 8:
        return FullTable(int(arg, 16))
    if len(arg) == decomposed_digits:
        return DecomposedTable(decode_decomposed(int(arg, 16), n))
    raise ValueError(
        f"table encoding length {len(arg)} does not match n={n} "
        f"(expected {decomposed_digits} hex digits, or 8 for the full n=2 table)"
    )

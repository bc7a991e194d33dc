"""EPAM performance and learning systems, trial protocol and phenomenon metrics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .codec import NOTICING_ORDER, Syllable, encode, partial_code
from .dnet import (
    RESPONSE,
    STIMULUS,
    DiscriminationNet,
    GrowthEvent,
    Image,
    Node,
    first_discriminating_test,
)

DEFAULT_SEED = 12345


class RoleConflict(ValueError):
    """The same syllable is used as a stimulus and as a response."""


@dataclass(frozen=True)
class Pair:
    stimulus: Syllable
    response: Syllable

    def __str__(self):
        return f"{self.stimulus}:{self.response}"


class Lcg:
    """32-bit linear congruential generator (a=1664525, c=1013904223, m=2**32).

    ``below(n)`` maps a draw to ``0..n-1`` by multiply-shift, ``draw * n >> 32``,
    so the weak low bits of the generator are never used.
    """

    A = 1664525
    C = 1013904223
    M = 1 << 32

    def __init__(self, seed: int):
        self.state = seed % self.M

    def next(self) -> int:
        self.state = (self.A * self.state + self.C) % self.M
        return self.state

    def below(self, n: int) -> int:
        return self.next() * n >> 32

    def shuffle(self, items: Sequence) -> list:
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out


@dataclass(frozen=True)
class TrialSchedule:
    pairs: Tuple[Pair, ...]
    order: str = "fixed"
    seed: int = DEFAULT_SEED
    criterion: int = 1
    max_trials: int = 30

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(self.pairs))
        if not self.pairs:
            raise ValueError("schedule needs at least one pair")
        if self.order not in ("fixed", "permuted"):
            raise ValueError(f"order must be 'fixed' or 'permuted', not {self.order!r}")
        if self.max_trials < 1:
            raise ValueError("max_trials must be at least 1")
        if self.criterion < 1:
            raise ValueError("criterion must be at least 1")
        seen = set()
        for p in self.pairs:
            if p.stimulus in seen:
                raise ValueError(f"duplicate stimulus {p.stimulus}")
            seen.add(p.stimulus)
        check_roles(self.pairs)

    def orders(self):
        """Yield the presentation order for trial 1, 2, ..."""
        rng = Lcg(self.seed)
        while True:
            yield list(self.pairs) if self.order == "fixed" else rng.shuffle(self.pairs)


def check_roles(pairs: Sequence[Pair], net: Optional[DiscriminationNet] = None) -> None:
    stimuli = {p.stimulus for p in pairs}
    responses = {p.response for p in pairs}
    if net is not None:
        for _, img in net.images():
            (stimuli if img.role == STIMULUS else responses).add(img.source)
    both = sorted(str(s) for s in stimuli & responses)
    if both:
        raise RoleConflict(f"syllable used as both stimulus and response: {both[0]}")


@dataclass(frozen=True)
class ItemOutcome:
    stimulus: Syllable
    expected: Syllable
    produced: Optional[Syllable]
    correct: bool
    events: int
    net_nodes: int


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    items: Tuple[ItemOutcome, ...]

    @property
    def all_correct(self) -> bool:
        return all(i.correct for i in self.items)

    @property
    def perfect(self) -> bool:
        # no study events either, so the net that answered is the net left behind
        return self.all_correct and not any(i.events for i in self.items)


# -- performance system ---------------------------------------------------


def perform(net: DiscriminationNet, stimulus: Syllable) -> Optional[Syllable]:
    """Sort the stimulus, follow its cue, and emit a complete response image."""
    img = net.sort(encode(stimulus)).image
    if img is None or img.role != STIMULUS or img.cue is None:
        return None
    target = net.sort(img.cue).image
    if target is None or target.role != RESPONSE or not target.complete:
        return None
    return target.partial.to_syllable()


# -- learning system ------------------------------------------------------


def _placement(net: DiscriminationNet, s: Syllable, leaf: Node, occupant: Optional[Image]):
    """Shortest noticing-order partial of ``s`` that sorts to ``leaf`` and,
    when the leaf is occupied, can be told apart from its occupant."""
    for k in range(1, 4):
        code = partial_code(s, k)
        if net.sort(code) is not leaf:
            continue
        if occupant is None or first_discriminating_test(occupant.partial, code):
            return code
    return None


def _ensure_image(net: DiscriminationNet, s: Syllable, role: str) -> Optional[GrowthEvent]:
    leaf = net.sort(encode(s))
    occ = leaf.image
    if occ is not None and occ.source == s:
        if occ.role != role:
            raise RoleConflict(f"syllable used as both stimulus and response: {s}")
        return None
    code = _placement(net, s, leaf, occ)
    if code is not None:
        return net.grow(leaf, Image(role, code, s))
    # the occupant knows too little to be told apart: notice one more of its letters
    return net.familiarize(leaf, occ.source)


def learn_pair(net: DiscriminationNet, pair: Pair) -> List[GrowthEvent]:
    """Study one presentation of a pair, making at most one change to the net."""
    s, r = pair.stimulus, pair.response
    ev = _ensure_image(net, s, STIMULUS)
    if ev:
        return [ev]
    ev = _ensure_image(net, r, RESPONSE)
    if ev:
        return [ev]
    rleaf = net.sort(encode(r))
    if not rleaf.image.complete:
        return [net.familiarize(rleaf, r)]

    sleaf = net.sort(encode(s))
    cue = sleaf.image.cue
    if cue is None:
        return [net.set_cue(sleaf, partial_code(r, 1), "cue-set")]
    if not cue.agrees_with(r):
        return [net.set_cue(sleaf, partial_code(r, 1), "cue-replace")]
    if perform(net, s) != r:
        n = len(cue.known_positions)
        if n < len(NOTICING_ORDER):
            return [net.set_cue(sleaf, partial_code(r, n + 1), "cue-extend")]
    return []


# -- trial protocol -------------------------------------------------------


def run_experiment(
    schedule: TrialSchedule, net: Optional[DiscriminationNet] = None
) -> List[TrialRecord]:
    """Anticipation method: test each pair, then study it; stop at criterion."""
    net = DiscriminationNet() if net is None else net
    check_roles(schedule.pairs, net)
    records: List[TrialRecord] = []
    streak = 0
    orders = schedule.orders()
    for t in range(1, schedule.max_trials + 1):
        items = []
        for pair in next(orders):
            produced = perform(net, pair.stimulus)
            events = learn_pair(net, pair)
            items.append(
                ItemOutcome(
                    pair.stimulus,
                    pair.response,
                    produced,
                    produced == pair.response,
                    len(events),
                    net.node_count,
                )
            )
        rec = TrialRecord(t, tuple(items))
        records.append(rec)
        streak = streak + 1 if rec.perfect else 0
        if streak >= schedule.criterion:
            break
    return records


def criterion_trial(records: Sequence[TrialRecord], criterion: int) -> Optional[int]:
    """Trial index at which ``criterion`` consecutive perfect trials were reached."""
    streak = 0
    for rec in records:
        streak = streak + 1 if rec.perfect else 0
        if streak >= criterion:
            return rec.trial
    return None


def probe(net: DiscriminationNet, pairs: Sequence[Pair]) -> float:
    """Fraction of pairs answered correctly, without study."""
    return sum(perform(net, p.stimulus) == p.response for p in pairs) / len(pairs)


# -- phenomenon metrics ---------------------------------------------------


def oscillation_count(records: Sequence[TrialRecord]) -> Dict[Syllable, int]:
    """Per item, the number of miss runs that sit between two correct trials."""
    history: Dict[Syllable, List[bool]] = {}
    for rec in records:
        for item in rec.items:
            history.setdefault(item.stimulus, []).append(item.correct)
    counts = {}
    for stim, seq in history.items():
        n, seen_correct, in_miss = 0, False, False
        for ok in seq:
            if ok:
                if in_miss and seen_correct:
                    n += 1
                seen_correct, in_miss = True, False
            else:
                in_miss = True
        counts[stim] = n
    return counts


@dataclass(frozen=True)
class InhibitionReport:
    original_trials: int
    original_reached: bool
    b_trials: int
    b_reached: bool
    recall_a_after_b: float
    relearning_trials: int
    relearning_reached: bool

    @property
    def relearning_savings(self) -> int:
        return self.original_trials - self.relearning_trials


def retroactive_inhibition(
    list_a: Sequence[Pair],
    list_b: Sequence[Pair],
    *,
    order: str = "fixed",
    seed: int = DEFAULT_SEED,
    criterion: int = 1,
    max_trials: int = 30,
) -> InhibitionReport:
    """Learn A, learn B on the same net, retest A without study, relearn A."""
    check_roles(list(list_a) + list(list_b))
    sched_a = TrialSchedule(tuple(list_a), order, seed, criterion, max_trials)
    sched_b = TrialSchedule(tuple(list_b), order, seed, criterion, max_trials)
    net = DiscriminationNet()
    first = run_experiment(sched_a, net)
    second = run_experiment(sched_b, net)
    recall = probe(net, sched_a.pairs)
    again = run_experiment(sched_a, net)
    return InhibitionReport(
        original_trials=len(first),
        original_reached=criterion_trial(first, criterion) is not None,
        b_trials=len(second),
        b_reached=criterion_trial(second, criterion) is not None,
        recall_a_after_b=recall,
        relearning_trials=len(again),
        relearning_reached=criterion_trial(again, criterion) is not None,
    )


@dataclass(frozen=True)
class GeneralizationMatrix:
    """Rows are probes, columns produced responses (``None`` column last)."""

    probes: Tuple[Syllable, ...]
    responses: Tuple[Optional[Syllable], ...]
    counts: Tuple[Tuple[int, ...], ...]

    def produced(self, probe: Syllable) -> Optional[Syllable]:
        row = self.counts[self.probes.index(probe)]
        return self.responses[row.index(1)]


def generalization_matrix(
    net: DiscriminationNet, probes: Sequence[Syllable]
) -> GeneralizationMatrix:
    produced = [perform(net, p) for p in probes]
    columns: List[Optional[Syllable]] = []
    for r in produced:
        if r is not None and r not in columns:
            columns.append(r)
    if None in produced:
        columns.append(None)
    counts = tuple(tuple(int(r == c) for c in columns) for r in produced)
    return GeneralizationMatrix(tuple(probes), tuple(columns), counts)

"""Means-ends analysis over Transform / Reduce / Apply goals.

The solver is task independent: everything it knows about a problem comes
from an environment object exposing ``operators``, ``differences``,
``table``, ``initial`` and ``desired`` (see :class:`epamgps.taskenv.TaskDefinition`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .objects import (
    Bindings,
    FeatureSet,
    GpsObject,
    Term,
    Var,
    contains,
    guards_hold,
    instantiate,
    match,
    render,
    replace_at,
    subterms,
)


class Inapplicable(Exception):
    pass


class InvalidPlan(Exception):
    def __init__(self, index: int, message: str):
        self.index = index
        super().__init__(f"step {index}: {message}")


class SearchFailed(Exception):
    def __init__(self, message: str, trace: "Trace"):
        self.trace = trace
        super().__init__(message)


class NoSolution(SearchFailed):
    pass


class BudgetExhausted(SearchFailed):
    pass


# -- task vocabulary ------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    name: str
    pre: GpsObject
    post: GpsObject
    guards: Tuple[Term, ...] = ()

    @property
    def precondition(self) -> "Spec":
        return Spec(self.pre, self.guards)


@dataclass(frozen=True)
class Spec:
    """What a desired object must look like: a pattern plus guards over its variables."""

    pattern: GpsObject
    guards: Tuple[Term, ...] = ()

    def satisfied_by(self, obj: GpsObject) -> bool:
        b = match(self.pattern, obj)
        return b is not None and guards_hold(self.guards, b)

    def __str__(self):
        out = render(self.pattern)
        if self.guards:
            out += " when " + " ".join(render(g) for g in self.guards)
        return out


@dataclass(frozen=True)
class AttrDetector:
    """Fires when the desired feature set constrains ``attr`` and the current value disagrees."""

    attr: str

    def fires(self, current: GpsObject, desired: Spec) -> bool:
        want = desired.pattern.get(self.attr) if isinstance(desired.pattern, FeatureSet) else None
        if want is None:
            return False
        have = current.get(self.attr) if isinstance(current, FeatureSet) else None
        return have is None or match(want, have) is None


@dataclass(frozen=True)
class ContainsDetector:
    """Fires when some subterm of the current object matches one of the patterns."""

    patterns: Tuple[GpsObject, ...]

    def fires(self, current: GpsObject, desired: Spec) -> bool:
        return any(contains(current, p) for p in self.patterns)


@dataclass(frozen=True)
class MismatchDetector:
    def fires(self, current: GpsObject, desired: Spec) -> bool:
        return not desired.satisfied_by(current)


@dataclass(frozen=True)
class Difference:
    name: str
    rank: int
    detector: object

    def fires(self, current: GpsObject, desired: Spec) -> bool:
        return self.detector.fires(current, desired)


# reported when an object misses its target but no declared detector fires
UNSPECIFIED = Difference("unspecified", -(2**31), MismatchDetector())


@dataclass(frozen=True)
class SearchBudget:
    max_depth: int = 40
    max_goals: int = 20000
    max_objects: int = 5000

    def __post_init__(self):
        if min(self.max_depth, self.max_goals, self.max_objects) < 1:
            raise ValueError("every budget limit must be at least 1")


# -- primitive operations -------------------------------------------------


def as_spec(desired) -> Spec:
    return desired if isinstance(desired, Spec) else Spec(desired)


def _operator_map(env) -> Dict[str, Operator]:
    return {op.name: op for op in env.operators}


def _table(env) -> Mapping[str, Sequence[str]]:
    t = env.table
    return t if isinstance(t, Mapping) else dict(t)


def detect_differences(a: GpsObject, b, env) -> List[Difference]:
    """Differences between ``a`` and the desired ``b``, hardest (lowest rank) first."""
    spec = as_spec(b)
    if spec.satisfied_by(a):
        return []
    fired = [d for d in env.differences if d.fires(a, spec)]
    fired.sort(key=lambda d: d.rank)
    return fired or [UNSPECIFIED]


def score_successor(a: GpsObject, b, env) -> int:
    return len(detect_differences(a, b, env))


def try_apply(op: Operator, a: GpsObject) -> Optional[Tuple[GpsObject, Bindings]]:
    """First match of the precondition, outermost first and left to right."""
    if isinstance(op.pre, FeatureSet):
        if not isinstance(a, FeatureSet):
            return None
        b = match(op.pre, a)
        if b is None or not guards_hold(op.guards, b):
            return None
        return a.updated(instantiate(op.post, b)), b
    for path, sub in subterms(a):
        b = match(op.pre, sub)
        if b is not None and guards_hold(op.guards, b):
            return replace_at(a, path, instantiate(op.post, b)), b
    return None


def apply_operator(op: Operator, a: GpsObject) -> GpsObject:
    res = try_apply(op, a)
    if res is None:
        raise Inapplicable(f"{op.name} does not apply to {render(a)}")
    return res[0]


def _optimistic_successor(op: Operator, a: GpsObject) -> Optional[GpsObject]:
    """Successor as if the precondition's fixed attributes already held."""
    if not isinstance(op.pre, FeatureSet) or not isinstance(a, FeatureSet):
        return None
    fixed = FeatureSet(tuple((k, v) for k, v in op.pre.items if not isinstance(v, Var)))
    res = try_apply(op, a.updated(fixed))
    return None if res is None else res[0]


def select_operators(
    diff: Difference,
    table: Mapping[str, Sequence[str]],
    lookahead: bool = False,
    env=None,
    a: Optional[GpsObject] = None,
    b=None,
) -> List[str]:
    """Operators relevant to ``diff`` in table order, or hill-climbing order.

    With lookahead, each candidate is scored by the differences left after one
    step (for an operator that does not apply yet, after applying it to the
    current object with its precondition forced true).  The candidate whose
    hardest remaining difference is easiest goes first, fewer differences
    breaking ties, so a result whose differences are a subset of another's
    always wins.  Remaining ties prefer operators whose precondition is closer
    to holding, then table order.  Operators whose effect cannot be previewed
    go last.
    """
    names = list(table.get(diff.name, ()))
    if not lookahead or not names:
        return names
    if env is None or a is None or b is None:
        raise ValueError("lookahead ordering needs env, current and desired objects")
    ops = _operator_map(env)

    def profile(obj, spec):
        return tuple(-d.rank for d in detect_differences(obj, spec, env))

    def key(name):
        op = ops[name]
        res = try_apply(op, a)
        succ = res[0] if res else _optimistic_successor(op, a)
        if succ is None:
            return (1, (), ())
        enable = () if res else profile(a, op.precondition)
        return (0, profile(succ, b), enable)

    return sorted(names, key=key)


# -- goal tree and trace --------------------------------------------------


@dataclass(eq=False)
class Goal:
    kind: str  # transform | reduce | apply
    obj: GpsObject
    desired: Optional[Spec] = None
    difference: Optional[str] = None
    operator: Optional[str] = None
    parent: Optional["Goal"] = field(default=None, repr=False)
    children: List["Goal"] = field(default_factory=list, repr=False)
    status: str = "open"
    attempts: List[str] = field(default_factory=list)
    note: str = ""

    def ancestors(self) -> Iterator["Goal"]:
        g = self.parent
        while g is not None:
            yield g
            g = g.parent

    def walk(self) -> Iterator["Goal"]:
        yield self
        for c in self.children:
            yield from c.walk()

    def label(self) -> str:
        if self.kind == "transform":
            return f"Transform {render(self.obj)} => {self.desired}"
        if self.kind == "reduce":
            return f"Reduce {self.difference} {render(self.obj)} => {self.desired}"
        return f"Apply {self.operator} {render(self.obj)}"

    def to_json(self) -> dict:
        d = {"kind": self.kind, "object": render(self.obj), "status": self.status}
        if self.desired is not None:
            d["desired"] = str(self.desired)
        if self.difference is not None:
            d["difference"] = self.difference
        if self.operator is not None:
            d["operator"] = self.operator
        if self.attempts:
            d["attempts"] = list(self.attempts)
        if self.note:
            d["note"] = self.note
        d["children"] = [c.to_json() for c in self.children]
        return d


@dataclass(frozen=True)
class PlanStep:
    operator: str
    bindings: Tuple[Tuple[str, str], ...]
    result: GpsObject

    def __str__(self):
        return self.operator


@dataclass
class Trace:
    task: str
    outcome: str  # solved | no-solution | budget-exhausted
    root: Optional[Goal]
    plan: Tuple[PlanStep, ...]
    stats: Dict[str, int]

    @property
    def plan_names(self) -> List[str]:
        return [s.operator for s in self.plan]

    def render_text(self) -> str:
        lines = [f"task {self.task}", f"outcome {self.outcome}"]
        for k in sorted(self.stats):
            lines.append(f"{k} {self.stats[k]}")
        lines.append("plan " + (" ".join(self.plan_names) or "-"))
        lines.append("goals")

        def walk(g, depth):
            extra = f" ({g.note})" if g.note else ""
            lines.append("  " * (depth + 1) + f"{g.label()} [{g.status}]{extra}")
            for c in g.children:
                walk(c, depth + 1)

        if self.root is not None:
            walk(self.root, 0)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "task": self.task,
            "outcome": self.outcome,
            "plan": [
                {"operator": s.operator, "bindings": dict(s.bindings), "result": render(s.result)}
                for s in self.plan
            ],
            "stats": dict(sorted(self.stats.items())),
            "goal_tree": None if self.root is None else self.root.to_json(),
        }
        return json.dumps(doc, indent=2) + "\n"


class _OutOfBudget(Exception):
    pass


class _Search:
    def __init__(self, env, budget: SearchBudget, lookahead: bool):
        self.env = env
        self.budget = budget
        self.lookahead = lookahead
        self.ops = _operator_map(env)
        self.table = _table(env)
        self.goals = 0
        self.backtracks = 0
        self.depth_cutoffs = 0
        self.loops = 0
        self.objects = set()
        self.root: Optional[Goal] = None

    def stats(self) -> Dict[str, int]:
        return {
            "goals": self.goals,
            "backtracks": self.backtracks,
            "depth_cutoffs": self.depth_cutoffs,
            "loop_cutoffs": self.loops,
            "distinct_objects": len(self.objects),
        }

    def _goal(self, parent: Optional[Goal], depth: int, **kw) -> Optional[Goal]:
        if depth > self.budget.max_depth:
            self.depth_cutoffs += 1
            if parent is not None:
                parent.note = "depth limit"
            return None
        if self.goals >= self.budget.max_goals:
            raise _OutOfBudget("goal limit reached")
        g = Goal(parent=parent, **kw)
        self.goals += 1
        if parent is None:
            self.root = g
        else:
            parent.children.append(g)
        return g

    def transform(self, a, b: Spec, parent, depth):
        g = self._goal(parent, depth, kind="transform", obj=a, desired=b)
        if g is None:
            return
        if any(h.kind == "transform" and h.obj == a and h.desired == b for h in g.ancestors()):
            self.loops += 1
            g.status, g.note = "failed", "repeats an ancestor"
            return
        self.objects.add(a)
        if len(self.objects) > self.budget.max_objects:
            raise _OutOfBudget("object limit reached")
        diffs = detect_differences(a, b, self.env)
        if not diffs:
            g.status = "succeeded"
            yield a, []
            return
        found = False
        for a1, steps1 in self.reduce(diffs[0], a, b, g, depth + 1):
            got = False
            for a2, steps2 in self.transform(a1, b, g, depth + 1):
                found = got = True
                g.status = "succeeded"
                yield a2, steps1 + steps2
            if not got:
                self.backtracks += 1
        if not found:
            g.status = "failed"

    def reduce(self, d: Difference, a, b: Spec, parent, depth):
        g = self._goal(parent, depth, kind="reduce", obj=a, desired=b, difference=d.name)
        if g is None:
            return
        names = select_operators(d, self.table, self.lookahead, self.env, a, b)
        found = False
        for name in names:
            g.attempts.append(name)
            got = False
            for res in self.apply(self.ops[name], a, g, depth + 1):
                found = got = True
                g.status = "succeeded"
                yield res
            if not got:
                self.backtracks += 1
        if not found:
            g.status = "failed"

    def apply(self, op: Operator, a, parent, depth):
        g = self._goal(parent, depth, kind="apply", obj=a, operator=op.name)
        if g is None:
            return
        res = try_apply(op, a)
        if res is not None:
            g.status = "succeeded"
            yield res[0], [_step(op, res)]
            return
        found = False
        for a1, steps in self.transform(a, op.precondition, g, depth + 1):
            res = try_apply(op, a1)
            if res is not None:
                found = True
                g.status = "succeeded"
                yield res[0], steps + [_step(op, res)]
        if not found:
            g.status = "failed"


def _step(op: Operator, res) -> PlanStep:
    result, b = res
    return PlanStep(op.name, tuple(sorted((k, render(v)) for k, v in b.items())), result)


def solve(env, budget: Optional[SearchBudget] = None, lookahead: bool = True) -> Trace:
    """Solve ``env`` by means-ends analysis; raises NoSolution or BudgetExhausted."""
    budget = budget or SearchBudget()
    search = _Search(env, budget, lookahead)
    desired = as_spec(env.desired)
    name = getattr(env, "name", "task")
    try:
        first = next(search.transform(env.initial, desired, None, 0), None)
    except _OutOfBudget as e:
        trace = Trace(name, "budget-exhausted", search.root, (), search.stats())
        raise BudgetExhausted(str(e), trace) from None
    if first is None:
        if search.depth_cutoffs:
            trace = Trace(name, "budget-exhausted", search.root, (), search.stats())
            raise BudgetExhausted("depth limit cut off every remaining branch", trace)
        trace = Trace(name, "no-solution", search.root, (), search.stats())
        raise NoSolution("all alternatives exhausted", trace)
    _, steps = first
    return Trace(name, "solved", search.root, tuple(steps), search.stats())


def validate_plan(env, plan: Sequence) -> bool:
    """Replay ``plan`` (operator names or plan steps) from the initial object.

    Returns whether the final object satisfies the desired pattern;
    raises InvalidPlan at the first step that does not apply.
    """
    ops = _operator_map(env)
    obj = env.initial
    for i, step in enumerate(plan):
        name = step.operator if isinstance(step, PlanStep) else step
        if name not in ops:
            raise InvalidPlan(i, f"unknown operator {name}")
        res = try_apply(ops[name], obj)
        if res is None:
            raise InvalidPlan(i, f"{name} does not apply to {render(obj)}")
        obj = res[0]
    return as_spec(env.desired).satisfied_by(obj)

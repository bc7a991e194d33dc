"""Discrimination network: a binary tree of feature tests with images at the leaves.

Sorting is total: at each test a true feature goes to the positive child, a
false or unknown one to the negative child.

Dump format, one node per line, two spaces of indentation per depth level::

    T <pos> f<k>                          internal node, then its positive
                                          and negative subtrees in that order
    L -                                   empty leaf
    L s <partial> cue=<partial> src=<CVC> stimulus image (cue may be ``-``)
    L r <partial> src=<CVC>               response image

``<partial>`` is the image's letters with ``_`` at unknown positions.
Lines that are blank or start with ``#`` are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Tuple

from .codec import (
    N_FEATURES,
    NOTICING_ORDER,
    FEATURE_TABLE,
    InputCode,
    Syllable,
    code_from_letters,
    feature_at,
)

STIMULUS = "stimulus"
RESPONSE = "response"
_ROLE_CODES = {STIMULUS: "s", RESPONSE: "r"}
_ROLES_BY_CODE = {v: k for k, v in _ROLE_CODES.items()}


class NoDiscriminatingFeature(Exception):
    """Two images agree on every position both of them know."""


class AlreadyComplete(Exception):
    pass


class DumpFormatError(ValueError):
    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class FeatureTest:
    pos: int
    feature: int

    def __post_init__(self):
        if not 1 <= self.pos <= 3 or not 0 <= self.feature < N_FEATURES:
            raise ValueError(f"feature test out of range: {self}")

    def __str__(self):
        return f"{self.pos} f{self.feature}"


@dataclass
class Image:
    """A stored, possibly partial copy of a syllable.

    ``source`` is the syllable the image was built from; the learner uses it to
    tell two look-alike images apart and to pick the next letter to notice.
    """

    role: str
    partial: InputCode
    source: Syllable
    cue: Optional[InputCode] = None

    def __post_init__(self):
        if self.role not in _ROLE_CODES:
            raise ValueError(f"bad image role {self.role!r}")
        if self.role == RESPONSE and self.cue is not None:
            raise ValueError("response images never carry a cue")
        if not self.partial.known_positions:
            raise ValueError("an image must know at least one position")
        if not self.partial.agrees_with(self.source):
            raise ValueError("image partial code disagrees with its source")

    @property
    def complete(self) -> bool:
        return self.partial.complete

    def letters(self) -> str:
        return self.partial.letters()


@dataclass(eq=False)
class Node:
    """Leaf when ``test`` is None; otherwise an internal node with two children."""

    test: Optional[FeatureTest] = None
    pos: Optional["Node"] = None
    neg: Optional["Node"] = None
    image: Optional[Image] = None

    @property
    def is_leaf(self) -> bool:
        return self.test is None


@dataclass(frozen=True)
class SortStep:
    test: FeatureTest
    value: Optional[bool]
    branch: str  # "+" or "-"


@dataclass(frozen=True)
class GrowthEvent:
    kind: str
    detail: str


def first_discriminating_test(
    a: InputCode, b: InputCode, exclude: frozenset = frozenset()
) -> Optional[FeatureTest]:
    """First (pos, feature) in scan order where two codes both known disagree."""
    for p in (1, 2, 3):
        va, vb = a.positions[p - 1], b.positions[p - 1]
        if va is None or vb is None:
            continue
        for k in range(N_FEATURES):
            if va[k] != vb[k] and (p, k) not in exclude:
                return FeatureTest(p, k)
    return None


@dataclass(eq=False)
class DiscriminationNet:
    root: Node = field(default_factory=Node)
    events: List[GrowthEvent] = field(default_factory=list)

    # -- traversal -------------------------------------------------------

    def sort(self, code: InputCode) -> Node:
        node = self.root
        while not node.is_leaf:
            node = node.pos if feature_at(code, node.test.pos, node.test.feature) else node.neg
        return node

    def sort_trace(self, code: InputCode) -> Tuple[Node, List[SortStep]]:
        node, steps = self.root, []
        while not node.is_leaf:
            v = feature_at(code, node.test.pos, node.test.feature)
            steps.append(SortStep(node.test, v, "+" if v else "-"))
            node = node.pos if v else node.neg
        return node, steps

    def nodes(self) -> Iterator[Node]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            if not n.is_leaf:
                stack.append(n.neg)
                stack.append(n.pos)

    def leaves(self) -> Iterator[Node]:
        return (n for n in self.nodes() if n.is_leaf)

    def images(self) -> Iterator[Tuple[Node, Image]]:
        return ((n, n.image) for n in self.leaves() if n.image is not None)

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    def path_tests(self, target: Node) -> Optional[List[FeatureTest]]:
        """Tests from the root down to ``target``, or None if it is not in the net."""

        def walk(node, acc):
            if node is target:
                return acc
            if node.is_leaf:
                return None
            return walk(node.pos, acc + [node.test]) or walk(node.neg, acc + [node.test])

        return walk(self.root, [])

    # -- mutation --------------------------------------------------------

    def _log(self, kind: str, detail: str) -> GrowthEvent:
        ev = GrowthEvent(kind, detail)
        self.events.append(ev)
        return ev

    def grow(self, leaf: Node, image: Image) -> GrowthEvent:
        """Store ``image`` at ``leaf``, splitting the leaf if it is occupied."""
        if not leaf.is_leaf:
            raise ValueError("grow needs a leaf")
        if self.sort(image.partial) is not leaf:
            raise ValueError(f"image {image.letters()} does not sort to the given leaf")
        if leaf.image is None:
            leaf.image = image
            return self._log("store", f"{_ROLE_CODES[image.role]} {image.letters()}")
        old = leaf.image
        test = first_discriminating_test(old.partial, image.partial)
        if test is None:
            raise NoDiscriminatingFeature(
                f"{image.letters()} and {old.letters()} agree on all shared positions"
            )
        new_leaf, old_leaf = Node(image=image), Node(image=old)
        if feature_at(image.partial, test.pos, test.feature):
            leaf.pos, leaf.neg = new_leaf, old_leaf
        else:
            leaf.pos, leaf.neg = old_leaf, new_leaf
        leaf.test, leaf.image = test, None
        return self._log(
            "split", f"T {test} {_ROLE_CODES[image.role]} {image.letters()} | {old.letters()}"
        )

    def familiarize(self, leaf: Node, full: Syllable) -> GrowthEvent:
        """Extend the leaf's image by the next letter of ``full`` in noticing order."""
        image = leaf.image
        if image is None:
            raise ValueError("familiarize needs an occupied leaf")
        if not image.partial.agrees_with(full):
            raise ValueError(f"image {image.letters()} is not a partial match of {full}")
        missing = [p for p in NOTICING_ORDER if not image.partial.known(p)]
        if not missing:
            raise AlreadyComplete(f"image {image.letters()} is already complete")
        p = missing[0]
        before, old_source = image.letters(), image.source
        image.partial = image.partial.with_position(p, FEATURE_TABLE[full.letter(p)])
        image.source = full
        ev = self._log("familiarize", f"{_ROLE_CODES[image.role]} {before} -> {image.letters()}")
        if self.sort(image.partial) is not leaf:
            leaf.image = None
            target = self.sort(image.partial)
            try:
                self.grow(target, image)
            except NoDiscriminatingFeature:
                self.events.pop()
                leaf.image = image
                image.partial = image.partial.with_position(p, None)
                image.source = old_source
                raise
        return ev

    def set_cue(self, leaf: Node, cue: Optional[InputCode], kind: str = "cue") -> GrowthEvent:
        image = leaf.image
        if image is None or image.role != STIMULUS:
            raise ValueError("cues attach to stimulus images only")
        image.cue = cue
        return self._log(kind, f"{image.letters()} cue={_cue_text(cue)}")

    # -- comparison and persistence ---------------------------------------

    def structurally_equal(self, other: "DiscriminationNet") -> bool:
        return dump(self) == dump(other)


def _cue_text(cue: Optional[InputCode]) -> str:
    return "-" if cue is None else cue.letters()


def leaf_line(node: Node) -> str:
    img = node.image
    if img is None:
        return "L -"
    if img.role == STIMULUS:
        return f"L s {img.letters()} cue={_cue_text(img.cue)} src={img.source}"
    return f"L r {img.letters()} src={img.source}"


def dump(net: DiscriminationNet) -> str:
    lines = []

    def walk(node, depth):
        pad = "  " * depth
        if node.is_leaf:
            lines.append(pad + leaf_line(node))
        else:
            lines.append(f"{pad}T {node.test}")
            walk(node.pos, depth + 1)
            walk(node.neg, depth + 1)

    walk(net.root, 0)
    return "\n".join(lines) + "\n"


def _parse_leaf(fields: List[str], lineno: int) -> Node:
    if fields == ["-"]:
        return Node()
    if not fields or fields[0] not in _ROLES_BY_CODE:
        raise DumpFormatError(lineno, "leaf needs role 's', 'r' or '-'")
    role = _ROLES_BY_CODE[fields[0]]
    want = 4 if role == STIMULUS else 3
    if len(fields) != want:
        raise DumpFormatError(lineno, f"{role} leaf needs {want} fields, got {len(fields)}")
    try:
        partial = code_from_letters(fields[1])
        cue = None
        if role == STIMULUS:
            if not fields[2].startswith("cue="):
                raise DumpFormatError(lineno, "expected cue=...")
            text = fields[2][4:]
            cue = None if text == "-" else code_from_letters(text)
        src = fields[-1]
        if not src.startswith("src="):
            raise DumpFormatError(lineno, "expected src=...")
        return Node(image=Image(role, partial, Syllable(src[4:]), cue))
    except DumpFormatError:
        raise
    except ValueError as e:
        raise DumpFormatError(lineno, str(e)) from None


def load(text: str) -> DiscriminationNet:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip(" "))
        if indent % 2:
            raise DumpFormatError(lineno, "indentation must be a multiple of two spaces")
        rows.append((lineno, indent // 2, raw.split()))
    if not rows:
        raise DumpFormatError(1, "empty document")

    at = 0

    def parse(depth: int, parent_line: int, which: str) -> Node:
        nonlocal at
        if at >= len(rows) or rows[at][1] != depth:
            raise DumpFormatError(parent_line, f"node at line {parent_line} missing {which} child")
        lineno, _, fields = rows[at]
        at += 1
        kind = fields[0]
        if kind == "L":
            return _parse_leaf(fields[1:], lineno)
        if kind != "T":
            raise DumpFormatError(lineno, f"unknown node kind {kind!r}")
        if len(fields) != 3 or not fields[1].isdigit() or not fields[2].startswith("f"):
            raise DumpFormatError(lineno, "internal node must read 'T <pos> f<k>'")
        try:
            test = FeatureTest(int(fields[1]), int(fields[2][1:]))
        except ValueError as e:
            raise DumpFormatError(lineno, str(e)) from None
        pos = parse(depth + 1, lineno, "positive")
        neg = parse(depth + 1, lineno, "negative")
        return Node(test=test, pos=pos, neg=neg)

    if rows[0][1] != 0:
        raise DumpFormatError(rows[0][0], "root must not be indented")
    root = parse(0, rows[0][0], "root")
    if at != len(rows):
        raise DumpFormatError(rows[at][0], "unexpected node after the root tree")
    return DiscriminationNet(root=root)


def check_invariants(net: DiscriminationNet) -> List[str]:
    """Return a list of violated net invariants (empty when healthy)."""
    problems = []
    for leaf, img in net.images():
        if net.sort(img.partial) is not leaf:
            problems.append(f"self-retrieval: {img.letters()} does not sort to its leaf")

    def walk(node, seen):
        if node.is_leaf:
            return
        key = (node.test.pos, node.test.feature)
        if key in seen:
            problems.append(f"repeated test {node.test} on one path")
        if node.pos is None or node.neg is None:
            problems.append(f"internal node {node.test} lacks a child")
            return
        walk(node.pos, seen | {key})
        walk(node.neg, seen | {key})

    walk(net.root, frozenset())
    return problems

"""Random learn sequences and net invariant checks written against the raw tree.

The checks walk ``Node`` objects directly instead of calling the net's own
sort or invariant helpers, so a bug there cannot hide itself.
"""

from hypothesis import strategies as st

from epamgps import dnet
from epamgps.codec import syllable
from epamgps.epam import Pair, learn_pair

# a small alphabet so that random lists collide often
FIRST = "DKBJ"
MIDDLE = "AOI"
LAST = "XQBM"

cvc = st.builds(
    lambda a, b, c: syllable(a + b + c),
    st.sampled_from(FIRST),
    st.sampled_from(MIDDLE),
    st.sampled_from(LAST),
)


@st.composite
def learn_sequences(draw, max_pairs=6, max_steps=60):
    stimuli = draw(st.lists(cvc, min_size=1, max_size=max_pairs, unique=True))
    responses = draw(
        st.lists(
            cvc.filter(lambda r: r not in stimuli),
            min_size=len(stimuli),
            max_size=len(stimuli),
        )
    )
    plist = [Pair(s, r) for s, r in zip(stimuli, responses)]
    order = draw(st.lists(st.integers(0, len(plist) - 1), min_size=1, max_size=max_steps))
    return plist, order


def raw_sort(root, code):
    node = root
    while node.test is not None:
        vec = code.positions[node.test.pos - 1]
        node = node.pos if vec is not None and vec[node.test.feature] else node.neg
    return node


def raw_leaves(root):
    out, stack = [], [root]
    while stack:
        n = stack.pop()
        if n.test is None:
            out.append(n)
        else:
            stack += [n.neg, n.pos]
    return out


def raw_count(root):
    return len(raw_leaves(root)) * 2 - 1


def self_retrieval_violations(net):
    return [
        leaf.image.letters()
        for leaf in raw_leaves(net.root)
        if leaf.image is not None and raw_sort(net.root, leaf.image.partial) is not leaf
    ]


def repeated_path_tests(net):
    bad = []

    def walk(node, seen):
        if node.test is None:
            return
        key = (node.test.pos, node.test.feature)
        if key in seen:
            bad.append(key)
        walk(node.pos, seen | {key})
        walk(node.neg, seen | {key})

    walk(net.root, frozenset())
    return bad


def tree_signature(node):
    """Nested tuple describing the whole tree, images included."""
    if node.test is None:
        img = node.image
        if img is None:
            return ("leaf",)
        return ("leaf", img.role, img.partial, img.source, img.cue)
    return ("test", node.test.pos, node.test.feature,
            tree_signature(node.pos), tree_signature(node.neg))


def run_and_check(plist, order):
    """Replay a learn sequence; return a list of invariant violations."""
    net = dnet.DiscriminationNet()
    problems = []
    for step, i in enumerate(order):
        before = raw_count(net.root)
        snapshot = dnet.dump(net)
        events = learn_pair(net, plist[i])
        after = raw_count(net.root)
        if after - before not in (0, 2):
            problems.append(f"step {step}: node count {before} -> {after}")
        if len(events) > 1:
            problems.append(f"step {step}: {len(events)} events in one presentation")
        if not events and dnet.dump(net) != snapshot:
            problems.append(f"step {step}: net changed without an event")
        for letters in self_retrieval_violations(net):
            problems.append(f"step {step}: {letters} does not sort to its leaf")
        for key in repeated_path_tests(net):
            problems.append(f"step {step}: repeated test {key}")
        text = dnet.dump(net)
        back = dnet.load(text)
        if dnet.dump(back) != text or tree_signature(back.root) != tree_signature(net.root):
            problems.append(f"step {step}: dump/load round trip differs")
    return problems

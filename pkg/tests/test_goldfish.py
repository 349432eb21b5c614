from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from resilience_lab.core import Log
from resilience_lab.cryptosim import KeyRegistry
from resilience_lab.goldfish import (
    GENESIS_BLOCK,
    BvTree,
    Block,
    ForkChoice,
    GfVote,
    chain_log,
    goldfish_latency,
    slot_length,
    vote_payload_digest,
)
from resilience_lab.harness import ScenarioConfig, build, execute

REG = KeyRegistry(16, 0)
ROOT = GENESIS_BLOCK.id


def vote(voter, slot, block):
    sig = REG.key_for(voter, voter).sign_digest(vote_payload_digest(slot, block.id))
    return GfVote(slot, block.id, sig)


def blk(parent, slot, tag):
    pid = parent.id if isinstance(parent, Block) else parent
    return Block(pid, slot, 0, (tag,))


def hand_tree():
    tree = BvTree()
    a, b = blk(ROOT, 1, "A"), blk(ROOT, 1, "B")
    a1, a2 = blk(a, 2, "A1"), blk(a, 2, "A2")
    for block in (a, b, a1, a2):
        tree.add(block)
    for voter, target in ((0, a1), (1, a1), (2, a2), (3, b)):
        tree.add(vote(voter, 3, target))
    return tree, a, b, a1, a2


def test_latency_constants():
    assert slot_length(2) == 6
    assert goldfish_latency(2, 4) == 36


def test_threshold_hand_trace():
    tree, a, *_ = hand_tree()
    assert tree.fork_choice(3, ForkChoice.threshold(Fraction(3, 5))) == a.id


def test_max_child_follows_heaviest_path():
    tree, a, b, a1, a2 = hand_tree()
    assert tree.fork_choice(3, ForkChoice.max_child()) == a1.id


def test_no_votes_returns_genesis():
    tree, *_ = hand_tree()
    assert tree.fork_choice(7, ForkChoice.threshold(Fraction(1, 2))) == ROOT


def test_equivocator_counts_zero_times():
    tree, a, b, a1, a2 = hand_tree()
    tree.add(vote(3, 3, a1))
    weights, total = tree.weights(3)
    assert total == 3 and b.id not in weights
    assert len(tree.slot_votes(3)) == 5


def test_confirmation_depth():
    tree = BvTree()
    b1 = blk(ROOT, 1, "t1")
    b2 = blk(b1, 2, "t2")
    b3 = blk(b2, 3, "t3")
    for block in (b1, b2, b3):
        tree.add(block)
    assert chain_log(tree, b3.id) == Log(["t1", "t2", "t3"])
    assert chain_log(tree, b3.id, max_slot=5 - 3) == Log(["t1", "t2"])


def test_orphans_attach_when_parent_arrives():
    tree = BvTree()
    b1 = blk(ROOT, 1, "t1")
    b2 = blk(b1, 2, "t2")
    tree.add(b2)
    assert b2.id not in tree.blocks
    tree.add(b1)
    assert b2.id in tree.blocks


def reference_fork_choice(blocks, votes, phi):
    """Independent recursion over an explicit child map; ties break to the smaller id."""
    kids = {}
    parent = {b.id: b.parent for b in blocks}
    for b in blocks:
        kids.setdefault(b.parent, []).append(b.id)

    def ancestors(bid):
        while bid in parent:
            yield bid
            bid = parent[bid]
        yield bid

    supporters = {}
    for voter, target in votes.items():
        for bid in ancestors(target):
            supporters.setdefault(bid, set()).add(voter)
    total = len(votes)
    node = ROOT
    while kids.get(node):
        best = sorted(kids[node], key=lambda c: (-len(supporters.get(c, ())), c))[0]
        w = len(supporters.get(best, ()))
        if w == 0 or Fraction(w) < phi * total:
            return node
        node = best
    return node


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_fork_choice_matches_reference(data):
    count = data.draw(st.integers(1, 8))
    blocks = []
    for i in range(count):
        parent = data.draw(st.sampled_from([GENESIS_BLOCK] + blocks))
        blocks.append(Block(parent.id, parent.slot + 1 + data.draw(st.integers(0, 2)), 0, (f"x{i}",)))
    tree = BvTree()
    for b in blocks:
        tree.add(b)
    vote_slot = max(b.slot for b in blocks)
    targets = data.draw(st.dictionaries(st.integers(0, 9), st.sampled_from(blocks), max_size=10))
    for voter, target in targets.items():
        tree.add(vote(voter, vote_slot, target))
    phi = data.draw(st.sampled_from([Fraction(1, 2), Fraction(5, 8), Fraction(3, 4), Fraction(1, 3)]))
    expected = reference_fork_choice(blocks, {v: t.id for v, t in targets.items()}, phi)
    assert tree.fork_choice(vote_slot, ForkChoice.threshold(phi)) == expected


def test_votes_expire_after_one_slot():
    world, _, _ = build(ScenarioConfig("goldfish", 8, f=2, horizon=120))
    slot_len = slot_length(world.delta)
    parties = list(world.validators.values()) + list(world.clients.values())
    bad = []

    def audit(rnd, sent):
        slot = rnd // slot_len
        for party in parties:
            bad.extend(r for r in party.tree.reads if r not in (slot - 1, slot))
            party.tree.reads.clear()

    world.hooks.append(audit)
    world.run()
    assert bad == []


def test_honest_leader_block_gets_every_awake_vote():
    outcome = execute(ScenarioConfig("goldfish", 8, horizon=60))
    assert outcome.verdict.safe and outcome.verdict.live
    tree = next(iter(outcome.world.validators.values())).tree
    for slot in range(2, 8):
        voted = {v.block for v in tree.votes.get(slot, {}).values()}
        assert len(voted) == 1

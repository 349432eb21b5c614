"""Slot-based chain protocol for sleepy validators with ephemeral votes.

Slot ``t`` spans rounds ``[3dt, 3dt + 3d)``:

* ``3dt``       the slot leader combines its buffer with its tree, runs fork choice on
  slot ``t-1`` votes, extends the tip and ships the block with its whole view;
* ``3dt + d``   eligible voters merge the leader's view and vote, using slot ``t-1`` votes;
* ``3dt + 2d``  everyone merges its buffer; clients confirm blocks at least ``kappa`` slots old
  using slot ``t`` votes.

Votes only ever count for one slot, and received messages wait in a buffer
until the next merge round.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction

from .core import GENESIS, Log, PartyId, digest64
from .cryptosim import KeyRegistry, RandomOracle, Signature, SigningKey, u16, u64
from .internal_protocol import TxGossip, i64
from .netsim import Message, Payload

SLOT_PHASES = 3


def slot_length(delta: int) -> int:
    return SLOT_PHASES * delta


def goldfish_latency(delta: int, kappa: int) -> int:
    return (kappa + 2) * slot_length(delta)


def slot_leader(oracle: RandomOracle, slot: int, n: int) -> int:
    return oracle(b"leader" + i64(slot)) % n


# -- data -----------------------------------------------------------------


@dataclass(frozen=True)
class Block(Payload):
    parent: int
    slot: int
    proposer: int
    txs: tuple[str, ...]
    sig: Signature | None = None
    kind = "block"

    def body(self) -> bytes:
        out = b"blk|" + u64(self.parent) + i64(self.slot) + i64(self.proposer) + u16(len(self.txs))
        for tx in self.txs:
            raw = tx.encode()
            out += u16(len(raw)) + raw
        return out

    @cached_property
    def id(self) -> int:
        return digest64(self.body())

    def encode(self) -> bytes:
        sig = b"" if self.sig is None else u16(self.sig.signer) + u64(self.sig.tag)
        return self.body() + sig


GENESIS_BLOCK = Block(0, -1, -1, ())


def vote_payload_digest(slot: int, block_id: int) -> int:
    return digest64(b"gfvote|" + i64(slot) + u64(block_id))


@dataclass(frozen=True)
class GfVote(Payload):
    slot: int
    block: int
    sig: Signature
    kind = "gfvote"

    @property
    def voter(self) -> int:
        return self.sig.signer

    def encode(self) -> bytes:
        return b"gfv|" + i64(self.slot) + u64(self.block) + u16(self.sig.signer) + u64(self.sig.tag)


@dataclass(frozen=True)
class GfProposal(Payload):
    slot: int
    block: Block
    blocks: tuple[Block, ...]
    votes: tuple[GfVote, ...]
    kind = "gfprop"

    def encode(self) -> bytes:
        out = b"gfp|" + i64(self.slot) + self.block.encode() + u16(len(self.blocks))
        for b in self.blocks:
            out += u64(b.digest)
        out += u16(len(self.votes))
        for v in self.votes:
            out += u64(v.digest)
        return out


class ForkChoiceMode(enum.Enum):
    MAX_CHILD = "maxchild"
    THRESHOLD = "threshold"


@dataclass(frozen=True)
class ForkChoice:
    mode: ForkChoiceMode = ForkChoiceMode.THRESHOLD
    phi: Fraction = Fraction(1, 2)

    @classmethod
    def threshold(cls, phi) -> "ForkChoice":
        return cls(ForkChoiceMode.THRESHOLD, Fraction(phi))

    @classmethod
    def max_child(cls) -> "ForkChoice":
        return cls(ForkChoiceMode.MAX_CHILD, Fraction(0))


# -- block/vote tree --------------------------------------------------------


class BvTree:
    """Blocks and votes.

    A voter counts at most once per slot. A voter seen voting for two different
    blocks in the same slot is an equivocator and counts zero times; the second
    vote is kept as evidence so it can be passed on.
    """

    def __init__(self):
        self.blocks: dict[int, Block] = {GENESIS_BLOCK.id: GENESIS_BLOCK}
        self.children: dict[int, list[int]] = {GENESIS_BLOCK.id: []}
        self.votes: dict[int, dict[int, GfVote]] = {}
        self.equivocations: dict[int, dict[int, GfVote]] = {}
        self._orphans: dict[int, list[Block]] = {}
        self.reads: list[int] = []

    def copy(self) -> "BvTree":
        other = BvTree.__new__(BvTree)
        other.blocks = dict(self.blocks)
        other.children = {k: list(v) for k, v in self.children.items()}
        other.votes = {s: dict(v) for s, v in self.votes.items()}
        other.equivocations = {s: dict(v) for s, v in self.equivocations.items()}
        other._orphans = {k: list(v) for k, v in self._orphans.items()}
        other.reads = []
        return other

    def add_block(self, block: Block) -> bool:
        bid = block.id
        if bid in self.blocks:
            return False
        parent = self.blocks.get(block.parent)
        if parent is None:
            waiting = self._orphans.setdefault(block.parent, [])
            if all(b.id != bid for b in waiting):
                waiting.append(block)
            return False
        if block.slot <= parent.slot:
            return False
        self.blocks[bid] = block
        self.children[bid] = []
        self.children[block.parent].append(bid)
        for child in self._orphans.pop(bid, ()):
            self.add_block(child)
        return True

    def add_vote(self, vote: GfVote) -> bool:
        slot_votes = self.votes.setdefault(vote.slot, {})
        first = slot_votes.get(vote.voter)
        if first is None:
            slot_votes[vote.voter] = vote
            return True
        if first.block == vote.block:
            return False
        caught = self.equivocations.setdefault(vote.slot, {})
        if vote.voter in caught:
            return False
        caught[vote.voter] = vote
        return True

    def slot_votes(self, slot: int) -> list[GfVote]:
        """Every vote worth forwarding for ``slot``, equivocation evidence included."""
        votes = [v for _, v in sorted(self.votes.get(slot, {}).items())]
        return votes + [v for _, v in sorted(self.equivocations.get(slot, {}).items())]

    def add(self, item: Block | GfVote) -> None:
        if isinstance(item, Block):
            self.add_block(item)
        else:
            self.add_vote(item)

    def chain(self, tip: int) -> list[Block]:
        out = []
        bid = tip
        while bid != GENESIS_BLOCK.id:
            block = self.blocks[bid]
            out.append(block)
            bid = block.parent
        out.reverse()
        return out

    def extends(self, descendant: int, ancestor: int) -> bool:
        bid = descendant
        while True:
            if bid == ancestor:
                return True
            if bid == GENESIS_BLOCK.id:
                return False
            bid = self.blocks[bid].parent

    def weights(self, vote_slot: int, max_slot: int | None = None) -> tuple[dict[int, int], int]:
        """Subtree weights (unique voters) from ``vote_slot`` votes, and the total."""
        self.reads.append(vote_slot)
        weights: dict[int, int] = {}
        total = 0
        caught = self.equivocations.get(vote_slot, {})
        for voter, vote in self.votes.get(vote_slot, {}).items():
            if voter in caught:
                continue
            block_id = vote.block
            block = self.blocks.get(block_id)
            if block is None or block.slot > vote_slot or (max_slot is not None and block.slot > max_slot):
                continue
            total += 1
            bid = block_id
            while True:
                weights[bid] = weights.get(bid, 0) + 1
                if bid == GENESIS_BLOCK.id:
                    break
                bid = self.blocks[bid].parent
        return weights, total

    def fork_choice(self, vote_slot: int, rule: ForkChoice, max_slot: int | None = None) -> int:
        weights, total = self.weights(vote_slot, max_slot)
        current = GENESIS_BLOCK.id
        threshold = rule.mode is ForkChoiceMode.THRESHOLD
        while True:
            kids = [c for c in self.children[current] if max_slot is None or self.blocks[c].slot <= max_slot]
            if not kids:
                return current
            best = min(kids, key=lambda c: (-weights.get(c, 0), c))
            if threshold:
                w = weights.get(best, 0)
                if w == 0 or w < rule.phi * total:
                    return current
            current = best


def chain_log(tree: BvTree, tip: int, max_slot: int | None = None) -> Log:
    txs: list[str] = []
    for block in tree.chain(tip):
        if max_slot is not None and block.slot > max_slot:
            break
        txs.extend(block.txs)
    return Log(txs)


# -- parties ----------------------------------------------------------------


class _GoldfishParty:
    def __init__(self, n: int, delta: int, rule: ForkChoice, registry: KeyRegistry, oracle: RandomOracle):
        self.n = n
        self.delta = delta
        self.rule = rule
        self.registry = registry
        self.oracle = oracle
        self.tree = BvTree()
        self.buffer: list[Block | GfVote] = []
        self.seen: set[int] = set()
        self.proposals: dict[int, list[GfProposal]] = {}
        self.awake_since = 0
        self._last_round = -1

    def _track_awake(self, rnd: int) -> None:
        if self._last_round != rnd - 1:
            self.awake_since = rnd
        self._last_round = rnd

    def eligible(self, slot: int) -> bool:
        """Joining rule: awake without interruption since the previous slot's merge round."""
        if self.awake_since == 0:
            return True
        return self.awake_since <= slot_length(self.delta) * (slot - 1) + 2 * self.delta

    def valid_block(self, block: Block) -> bool:
        if block.sig is None or block.slot < 0 or block.proposer != slot_leader(self.oracle, block.slot, self.n):
            return False
        return self.registry.verify_digest(block.proposer, block.id, block.sig)

    def valid_vote(self, vote: GfVote) -> bool:
        return vote.slot >= 0 and self.registry.verify_digest(vote.voter, vote_payload_digest(vote.slot, vote.block), vote.sig)

    def receive(self, payload: Payload, out: list[Payload] | None) -> None:
        """Validate, buffer and (for validators) echo a first-seen block or vote."""
        if isinstance(payload, GfProposal):
            if payload.block.slot != payload.slot or not self.valid_block(payload.block):
                return
            props = self.proposals.setdefault(payload.slot, [])
            if all(p.digest != payload.digest for p in props):
                props.append(payload)
            self.receive(payload.block, out)
            return
        if isinstance(payload, Block):
            if payload.digest in self.seen or not self.valid_block(payload):
                return
        elif isinstance(payload, GfVote):
            if payload.digest in self.seen or not self.valid_vote(payload):
                return
        else:
            return
        self.seen.add(payload.digest)
        self.buffer.append(payload)
        if out is not None:
            out.append(payload)

    def merge_buffer(self) -> None:
        for item in self.buffer:
            self.tree.add(item)
        self.buffer = []

    def merge_proposal(self, tree: BvTree, prop: GfProposal) -> None:
        for block in prop.blocks:
            if self.valid_block(block):
                tree.add_block(block)
        for vote in prop.votes:
            if self.valid_vote(vote):
                tree.add_vote(vote)
        tree.add_block(prop.block)


class GoldfishValidator(_GoldfishParty):
    def __init__(self, index: int, n: int, delta: int, rule: ForkChoice, key: SigningKey,
                 registry: KeyRegistry, oracle: RandomOracle):
        super().__init__(n, delta, rule, registry, oracle)
        self.index = index
        self.party = PartyId.validator(index)
        self.key = key
        self.known_txs: dict[str, None] = {}
        self.votes_cast: dict[int, int] = {}

    def tx_message(self, tx: str) -> Payload:
        return TxGossip(tx)

    def learn_tx(self, tx: str, out: list[Payload]) -> bool:
        if tx in self.known_txs:
            return False
        self.known_txs[tx] = None
        out.append(self.tx_message(tx))
        return True

    def handle(self, payload: Payload, out: list[Payload]) -> None:
        if isinstance(payload, TxGossip):
            self.learn_tx(payload.tx, out)
        else:
            self.receive(payload, out)

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        self._track_awake(rnd)
        out: list[Payload] = []
        for msg in inbox:
            self.handle(msg.payload, out)
        for tx in inputs:
            self.learn_tx(tx, out)
        slot, phase = divmod(rnd, slot_length(self.delta))
        if phase == 0 and slot_leader(self.oracle, slot, self.n) == self.index:
            self.propose(slot, out)
        elif phase == self.delta and self.eligible(slot):
            self.vote(slot, out)
        elif phase == 2 * self.delta:
            self.merge_buffer()
        return out

    def propose(self, slot: int, out: list[Payload]) -> None:
        combined = self.tree.copy()
        for item in self.buffer:
            combined.add(item)
        tip = combined.fork_choice(slot - 1, self.rule, max_slot=slot - 1)
        included = chain_log(combined, tip)
        txs = tuple(tx for tx in self.known_txs if tx not in included)
        draft = Block(tip, slot, self.index, txs)
        block = Block(tip, slot, self.index, txs, self.key.sign_digest(draft.id))
        prop = GfProposal(
            slot,
            block,
            tuple(b for bid, b in sorted(combined.blocks.items()) if bid != GENESIS_BLOCK.id),
            tuple(combined.slot_votes(slot - 1)),
        )
        self.receive(prop, None)
        out.append(prop)

    def vote(self, slot: int, out: list[Payload]) -> None:
        if slot in self.votes_cast:
            return
        view = self.tree
        props = self.proposals.get(slot, [])
        for prop in props:
            self.merge_proposal(view, prop)
        target = view.fork_choice(slot - 1, self.rule, max_slot=slot - 1)
        candidates = sorted(p.block.id for p in props if p.block.id in view.blocks and view.extends(p.block.id, target))
        if candidates:
            target = candidates[0]
        self.votes_cast[slot] = target
        sig = self.key.sign_digest(vote_payload_digest(slot, target))
        vote = GfVote(slot, target, sig)
        self.receive(vote, None)
        out.append(vote)


class GoldfishClient(_GoldfishParty):
    """Silent learner: merges at each slot's merge round and confirms kappa-deep blocks."""

    def __init__(self, label: str, n: int, delta: int, rule: ForkChoice, kappa: int,
                 registry: KeyRegistry, oracle: RandomOracle):
        super().__init__(n, delta, rule, registry, oracle)
        self.label = label
        self.party = PartyId.client(label)
        self.kappa = kappa
        self.log = GENESIS

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        self._track_awake(rnd)
        for msg in inbox:
            self.receive(msg.payload, None)
        slot, phase = divmod(rnd, slot_length(self.delta))
        if phase == 2 * self.delta:
            self.merge_buffer()
            if self.eligible(slot):
                self.confirm(slot)
        return []

    def confirm(self, slot: int) -> Log:
        tip = self.tree.fork_choice(slot, self.rule, max_slot=slot)
        self.log = chain_log(self.tree, tip, max_slot=slot - self.kappa)
        return self.log

    def output(self) -> Log:
        return self.log

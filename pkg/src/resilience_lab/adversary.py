"""Adversary strategies: a randomized fuzzer and the scripted impossibility attacks.

Corrupted validators are driven by *puppets*: ordinary protocol nodes holding
the corrupted keys (obtained through :data:`~resilience_lab.cryptosim.ADVERSARY`).
The fuzzer perturbs what the puppets send; the scripted attacks run puppets
inside nested :class:`~resilience_lab.netsim.World` instances and forward the
resulting transcripts to chosen honest recipients.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

from .core import Log, ModelSelector, PartyId
from .cryptosim import ADVERSARY, KeyRegistry, RandomOracle, SigningKey
from .dolevstrong import SigChain
from .gadgets import TxSig, txsig_digest
from .goldfish import GENESIS_BLOCK, Block, GfProposal, GfVote, vote_payload_digest
from .internal_protocol import (
    Proposal,
    TxGossip,
    epoch_length,
    forge_certificate,
    leader_of,
    proposal_digest,
)
from .netsim import AdvSend, Message, Node, Payload, RoundView, Strategy, World


class AttackError(ValueError):
    """An attack was requested in a setting where it cannot be mounted."""

    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


def evenly_spaced(n: int, f: int) -> frozenset[int]:
    """Corrupted set ``{floor(i n / f)}``: never two adjacent indices while f <= n/2."""
    if not 0 <= f <= n:
        raise ValueError(f"cannot corrupt {f} of {n} validators")
    return frozenset((i * n) // f for i in range(f))


@dataclass
class AttackContext:
    """Everything a strategy needs to know about the scenario it attacks."""

    protocol: str
    n: int
    delta: int
    horizon: int
    corrupted: frozenset[int]
    clients: tuple[str, ...]
    registry: KeyRegistry
    make_puppet: Callable[[int, SigningKey], Node]
    cadence: int
    latency: int
    seed: int = 0
    quorum: int | None = None
    oracle: RandomOracle | None = None
    phi: Fraction | None = None
    model: ModelSelector = field(default_factory=ModelSelector)
    params: dict[str, str] = field(default_factory=dict)

    @property
    def f(self) -> int:
        return len(self.corrupted)

    @property
    def honest(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i not in self.corrupted)

    def key(self, index: int) -> SigningKey:
        return self.registry.key_for(index, ADVERSARY)

    def puppets(self, indices: Iterable[int]) -> dict[int, Node]:
        return {i: self.make_puppet(i, self.key(i)) for i in sorted(indices)}


class PuppetGroup:
    """Corrupted validators running honest code, fed every honest message as soon as it is sent."""

    def __init__(self, puppets: dict[int, Node]):
        self.puppets = puppets
        self._carry: list[Message] = []

    def step(self, rnd: int, observed: list[Message], inputs: dict[int, list[str]]) -> list[Message]:
        inbox = sorted(self._carry + observed, key=Message.sort_key)
        sent: list[Message] = []
        for index, node in self.puppets.items():
            for payload in node.step(rnd, inbox, inputs.get(index, [])):
                sent.append(Message(PartyId.validator(index), payload, rnd))
        self._carry = sent
        return sent


# -- fuzzing ----------------------------------------------------------------


class FuzzStrategy(Strategy):
    """Randomized Byzantine behavior within the model's limits.

    Honest messages get independent random delays in [1, delta]. Puppet output
    is dropped, sent to random subsets or delayed late; leaders equivocate,
    voters split votes, client identities are spoofed with replays,
    transactions nobody honest was given appear at cadence boundaries and,
    when the adversary holds enough keys, conflicting certificates are forged.
    """

    name = "fuzz"

    def __init__(self, ctx: AttackContext, *, p_drop: float = 0.1, p_subset: float = 0.2,
                 p_late: float = 0.1, p_equivocate: float = 0.3, p_spoof: float = 0.05,
                 p_ghost: float = 0.25, p_forge: float = 0.3):
        self.ctx = ctx
        self.rng = random.Random(f"fuzz|{ctx.protocol}|{ctx.seed}|{sorted(ctx.corrupted)}")
        self.p_drop = p_drop
        self.p_subset = p_subset
        self.p_late = p_late
        self.p_equivocate = p_equivocate
        self.p_spoof = p_spoof
        self.p_ghost = p_ghost
        self.p_forge = p_forge
        self.group = PuppetGroup(ctx.puppets(ctx.corrupted))
        self.keys = {i: ctx.key(i) for i in sorted(ctx.corrupted)}
        self.ghosts = 0

    def setup(self, world: World) -> None:
        super().setup(world)
        self.honest = list(world.honest_ids)
        self.honest_clients = [pid for pid in world.honest_ids if pid.is_client]

    def delay(self, msg: Message, recipient: PartyId) -> int:
        return self.rng.randint(1, self.world.delta)

    def _recipients(self) -> tuple[PartyId, ...] | None:
        if self.rng.random() >= self.p_subset:
            return None
        chosen = [pid for pid in self.honest if self.rng.random() < 0.5]
        return tuple(chosen)

    def _delay(self) -> int:
        delta = self.world.delta
        if self.rng.random() < self.p_late:
            return self.rng.randint(delta + 1, 3 * delta)
        return self.rng.randint(1, delta)

    def _split(self) -> tuple[tuple[PartyId, ...], tuple[PartyId, ...]]:
        left, right = [], []
        for pid in self.honest:
            (left if self.rng.random() < 0.5 else right).append(pid)
        return tuple(left), tuple(right)

    def on_round(self, view: RoundView) -> list[AdvSend]:
        rnd = view.round
        inputs: dict[int, list[str]] = {}
        for tx, pid in view.adversary_inputs:
            if pid.is_validator:
                inputs.setdefault(pid.index, []).append(tx)
        actions: list[AdvSend] = []
        for msg in self.group.step(rnd, view.sent, inputs):
            actions.extend(self._perturb(msg))
        actions.extend(self._spoof(view))
        actions.extend(self._ghost(rnd))
        actions.extend(self._forge(rnd))
        return actions

    def _perturb(self, msg: Message) -> list[AdvSend]:
        rng = self.rng
        if rng.random() < self.p_drop:
            return []
        key = self.keys[msg.sender.index]
        twin = self.equivocation(msg.payload, key, self.group.puppets[msg.sender.index])
        if twin is not None and rng.random() < self.p_equivocate:
            left, right = self._split()
            return [AdvSend(msg.sender, msg.payload, left, self._delay()),
                    AdvSend(msg.sender, twin, right, self._delay())]
        return [AdvSend(msg.sender, msg.payload, self._recipients(), self._delay())]

    def equivocation(self, payload: Payload, key: SigningKey, puppet: Node) -> Payload | None:
        """A conflicting twin of a puppet message, or None if the message has no sensible twin."""
        if isinstance(payload, Proposal):
            if leader_of(payload.epoch, self.ctx.n) != key.signer:
                return None
            log = payload.justify.log.append(f"eq{payload.epoch}")
            if log == payload.log:
                log = log.append("eq")
            return Proposal(payload.epoch, log, payload.justify, key.sign_digest(proposal_digest(payload.epoch, log)))
        if isinstance(payload, GfProposal):
            block = payload.block
            draft = Block(block.parent, block.slot, block.proposer, block.txs + (f"eq{block.slot}",))
            twin = Block(draft.parent, draft.slot, draft.proposer, draft.txs, key.sign_digest(draft.id))
            return GfProposal(payload.slot, twin, payload.blocks, payload.votes)
        if isinstance(payload, GfVote):
            tree = getattr(puppet, "tree", None)
            voted = tree.blocks.get(payload.block) if tree is not None else None
            target = voted.parent if voted is not None and voted.slot >= 0 else GENESIS_BLOCK.id
            if target == payload.block:
                return None
            return GfVote(payload.slot, target, key.sign_digest(vote_payload_digest(payload.slot, target)))
        if isinstance(payload, SigChain):
            if len(payload.pairs) != 1 or payload.value is None:
                return None
            value = payload.value + (f"eq{payload.instance}",)
            return SigChain.start(payload.instance, value, key)
        return None

    def _spoof(self, view: RoundView) -> list[AdvSend]:
        rng = self.rng
        if not view.sent or rng.random() >= self.p_spoof:
            return []
        original = view.sent[rng.randrange(len(view.sent))]
        labels = list(self.ctx.clients) + ["spoof"]
        claim = PartyId.client(labels[rng.randrange(len(labels))])
        return [AdvSend(claim, original.payload, self._recipients(), self._delay())]

    def _ghost(self, rnd: int) -> list[AdvSend]:
        """Transactions no honest party was given, delivered to everyone exactly at a cadence boundary."""
        if (rnd + 1) % self.ctx.cadence or self.rng.random() >= self.p_ghost:
            return []
        self.ghosts += 1
        tx = f"ghost{rnd + 1}"
        sender = PartyId.client("spoof")
        actions = [AdvSend(sender, TxGossip(tx), None, 1)]
        if self.keys and self.ctx.protocol in ("liveq", "livephi"):
            # vouch for a transaction that only clients hear about
            lone = f"sig{rnd + 1}"
            for index, key in self.keys.items():
                actions.append(AdvSend(PartyId.validator(index), TxSig(lone, key.sign_digest(txsig_digest(lone))),
                                       tuple(self.honest_clients), 1))
        return actions

    def _forge(self, rnd: int) -> list[AdvSend]:
        ctx = self.ctx
        if ctx.quorum is None or len(self.keys) < ctx.quorum or ctx.protocol not in CERTIFIED_PROTOCOLS:
            return []
        if rnd % ctx.cadence or self.rng.random() >= self.p_forge or not self.honest_clients:
            return []
        epoch = rnd // ctx.cadence + self.rng.randint(0, 2)
        log = Log([f"forged{rnd}"])
        cert = forge_certificate(epoch, log, list(self.keys.values())[:ctx.quorum])
        victim = self.honest_clients[self.rng.randrange(len(self.honest_clients))]
        signer = PartyId.validator(min(self.keys))
        return [AdvSend(signer, cert, (victim,), 1)]


CERTIFIED_PROTOCOLS = ("internal", "frz", "liveq", "livestar")


# -- nested worlds ----------------------------------------------------------


class NestedRelay(Strategy):
    """Runs worlds of puppets in lockstep and forwards their traffic to fixed recipients."""

    name = "nested"

    def __init__(self):
        self.shadows: list[tuple[World, tuple[PartyId, ...] | None]] = []
        self._captured: dict[int, list[Message]] = {}

    def add_world(self, world: World, recipients: tuple[PartyId, ...] | None) -> World:
        slot = len(self.shadows)
        self._captured[slot] = []
        world.hooks.append(lambda rnd, sent, slot=slot: self._captured[slot].extend(sent))
        self.shadows.append((world, recipients))
        return world

    def on_round(self, view: RoundView) -> list[AdvSend]:
        actions: list[AdvSend] = []
        for slot, (world, recipients) in enumerate(self.shadows):
            if world.round < world.horizon:
                world.advance_round()
            for msg in self._captured[slot]:
                actions.append(AdvSend(msg.sender, msg.payload, recipients, 1))
            self._captured[slot] = []
        return actions


def shadow_world(ctx: AttackContext, members: Iterable[int], inputs: dict[int, list[str]] | None = None,
                 delay: int | None = None) -> World:
    """A world containing only puppets for ``members``; the other validators are absent."""
    members = sorted(members)
    absent = frozenset(range(ctx.n)) - frozenset(members)
    schedule = {
        rnd: [(tx, tuple(PartyId.validator(i) for i in members))]
        for rnd, txs in (inputs or {}).items() for tx in txs
    }
    strategy = Strategy()
    if delay is not None:
        strategy.delay = lambda msg, recipient: delay
    return World(ctx.n, ctx.delta, ctx.horizon, ctx.registry, ctx.puppets(members), {},
                 corrupted=absent, inputs=schedule, strategy=strategy, oracle=ctx.oracle, record=False)


# -- scripted attacks -------------------------------------------------------


@dataclass(frozen=True)
class Expectation:
    """Pinned outcome: True means the property must hold, False that it must be violated."""

    safe: bool | None = None
    live: bool | None = None

    def matches(self, verdict) -> bool:
        if self.safe is not None and verdict.safe != self.safe:
            return False
        if self.live is not None and verdict.live != self.live:
            return False
        return True

    def describe(self) -> str:
        parts = []
        if self.safe is not None:
            parts.append("safety=" + ("SAFE" if self.safe else "VIOLATION"))
        if self.live is not None:
            parts.append("liveness=" + ("LIVE" if self.live else "VIOLATION"))
        return " ".join(parts) or "anything"


@dataclass
class AttackPlan:
    strategy: Strategy
    inputs: dict[int, list[tuple[str, tuple[PartyId, ...]]]] | None = None
    validator_awake: list[frozenset[int]] | None = None
    client_awake: dict[str, list[bool]] | None = None


def _to_all(ctx: AttackContext, tx: str, validators_only: bool = True) -> tuple[str, tuple[PartyId, ...]]:
    recipients = [PartyId.validator(i) for i in ctx.honest]
    if not validators_only:
        recipients += [PartyId.client(c) for c in ctx.clients]
    return tx, tuple(recipients)


class AttackScript:
    """A named, parameterized adversary with a pinned expected verdict per protocol."""

    name = "attack"
    summary = ""
    protocols: tuple[str, ...] = ()

    def __init__(self, **params: str):
        self.params = params

    def check_target(self, protocol: str, model: ModelSelector) -> None:
        if self.protocols and protocol not in self.protocols:
            raise AttackError("protocol", f"{self.name} targets {', '.join(self.protocols)}, not {protocol}")

    def choose_corrupted(self, n: int, f: int) -> frozenset[int]:
        return evenly_spaced(n, f)

    def plan(self, ctx: AttackContext) -> AttackPlan:
        raise NotImplementedError

    def expect(self, ctx: AttackContext) -> Expectation:
        return Expectation()

    def int_param(self, key: str, default: int) -> int:
        raw = self.params.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise AttackError(key, f"expected an integer, got {raw!r}") from None


class SplitBrain(AttackScript):
    """The corrupted validators run two private executions, one seeded with tx1 and one with tx2,
    and show each to a different client."""

    name = "split_brain"
    summary = "two private executions (tx1 / tx2) shown to two different clients"
    protocols = ("internal", "frz", "liveq", "ds")

    def plan(self, ctx: AttackContext) -> AttackPlan:
        if len(ctx.clients) < 2:
            raise AttackError("clients", "split_brain needs at least two clients")
        relay = NestedRelay()
        if ctx.corrupted:
            first, second = ctx.clients[0], ctx.clients[1]
            relay.add_world(shadow_world(ctx, ctx.corrupted, {0: ["tx1"]}), (PartyId.client(first),))
            relay.add_world(shadow_world(ctx, ctx.corrupted, {0: ["tx2"]}), (PartyId.client(second),))
        return AttackPlan(relay, inputs={})

    def expect(self, ctx: AttackContext) -> Expectation:
        if ctx.protocol == "internal" and ctx.quorum is not None and ctx.f >= ctx.quorum:
            return Expectation(safe=False)
        if ctx.protocol in ("frz", "ds") or ctx.quorum is None or ctx.f < ctx.quorum:
            return Expectation(safe=True)
        return Expectation()


class FourWorlds(AttackScript):
    """Honest validators and the corrupted side ignore each other; the corrupted side runs its own
    execution on a ghost transaction and replays it to a client that joins late."""

    name = "four_worlds"
    summary = "partitioned halves; the corrupted half's private execution is replayed to a late joiner"
    protocols = ("frz", "livestar")

    def plan(self, ctx: AttackContext) -> AttackPlan:
        if len(ctx.clients) < 3:
            raise AttackError("clients", "four_worlds needs three clients")
        late = ctx.clients[2]
        late_join = self.int_param("late_join", ctx.latency)
        if not 0 <= late_join < ctx.horizon:
            raise AttackError("late_join", "must fall inside the horizon")
        relay = NestedRelay()
        if ctx.corrupted:
            relay.add_world(shadow_world(ctx, ctx.corrupted, {0: ["tx0"]}), (PartyId.client(late),))
        inputs = {0: [_to_all(ctx, "tx1")]} if ctx.honest else {0: [("tx1", (PartyId.client(ctx.clients[0]),))]}
        flags = [rnd >= late_join for rnd in range(ctx.horizon)]
        return AttackPlan(relay, inputs=inputs, client_awake={late: flags})

    def expect(self, ctx: AttackContext) -> Expectation:
        if ctx.f == 0:
            return Expectation(safe=True, live=True)
        if ctx.protocol == "frz":
            live = None if ctx.quorum is None or ctx.n - ctx.f >= ctx.quorum else False
            return Expectation(safe=True, live=live)
        if 2 * ctx.f == ctx.n:
            return Expectation(safe=False)
        return Expectation()


class SleepyDaAttack(AttackScript):
    """A fraction beta of the awake validators mimics a disjoint execution while some honest
    validators sleep, so neither branch reaches the fork-choice threshold."""

    name = "sleepy_da_attack"
    summary = "corrupted share beta of the awake set votes only for its own private chain"
    protocols = ("goldfish", "livephi")

    def beta(self) -> Fraction:
        try:
            return Fraction(self.params.get("beta", "1/2"))
        except (ValueError, ZeroDivisionError):
            raise AttackError("beta", f"not a fraction: {self.params.get('beta')!r}") from None

    def check_target(self, protocol: str, model: ModelSelector) -> None:
        super().check_target(protocol, model)
        if not model.sleepy_validators:
            raise AttackError("validator_model", "sleepy_da_attack needs control over validator sleep")

    def sizes(self, n: int) -> tuple[int, int]:
        """(corrupted count, awake count) with corrupted/awake == beta and at least one honest asleep."""
        beta = self.beta()
        if not 0 < beta < 1:
            raise AttackError("beta", "must lie strictly between 0 and 1")
        for awake in range(n - 1, 0, -1):
            f = beta * awake
            if f.denominator == 1 and f >= 1:
                return int(f), awake
        raise AttackError("beta", f"no split of {n} validators realizes beta={beta}")

    def choose_corrupted(self, n: int, f: int) -> frozenset[int]:
        corrupted, _ = self.sizes(n)
        return frozenset(range(corrupted))

    def plan(self, ctx: AttackContext) -> AttackPlan:
        _, awake = self.sizes(ctx.n)
        honest_awake = frozenset(ctx.honest[: awake - ctx.f])
        relay = NestedRelay()
        relay.add_world(shadow_world(ctx, ctx.corrupted, {0: ["tx0"]}), None)
        schedule = [honest_awake] * ctx.horizon
        return AttackPlan(relay, inputs={0: [_to_all(ctx, "tx1")]}, validator_awake=schedule)

    def expect(self, ctx: AttackContext) -> Expectation:
        _, awake = self.sizes(ctx.n)
        phi = ctx.phi if ctx.phi is not None else Fraction(1, 2)
        stalls = Fraction(awake - ctx.f, awake) < phi
        return Expectation(safe=True, live=not stalls)


class EquivocateLeader(AttackScript):
    """The leader of one epoch sends two different proposals to two halves of the validators."""

    name = "equivocate_leader"
    summary = "a corrupted epoch leader proposes two different logs to disjoint halves"
    protocols = ("internal",)

    def epoch(self) -> int:
        return self.int_param("epoch", 0)

    def choose_corrupted(self, n: int, f: int) -> frozenset[int]:
        if f == 0:
            raise AttackError("f", "equivocate_leader needs a corrupted leader")
        leader = leader_of(self.epoch(), n)
        rest = sorted((leader + 1 + (i * n) // f) % n for i in range(f))
        chosen = {leader}
        for candidate in rest + list(range(n)):
            if len(chosen) == f:
                break
            chosen.add(candidate)
        return frozenset(chosen)

    def plan(self, ctx: AttackContext) -> AttackPlan:
        return AttackPlan(_Equivocator(ctx, self.epoch()), inputs={0: [_to_all(ctx, "tx1")]})

    def expect(self, ctx: AttackContext) -> Expectation:
        if ctx.quorum is not None and ctx.f >= ctx.quorum:
            return Expectation(safe=False)
        return Expectation(safe=True)


class _Equivocator(Strategy):
    name = "equivocate_leader"

    def __init__(self, ctx: AttackContext, epoch: int):
        self.ctx = ctx
        self.epoch = epoch
        self.leader = leader_of(epoch, ctx.n)
        self.group = PuppetGroup(ctx.puppets(ctx.corrupted))
        self.pair: tuple[Proposal, Proposal] | None = None
        self.logs: tuple[Log, ...] = ()

    def on_round(self, view: RoundView) -> list[AdvSend]:
        ctx = self.ctx
        rnd = view.round
        start = self.epoch * epoch_length(ctx.delta)
        inputs: dict[int, list[str]] = {}
        for tx, pid in view.adversary_inputs:
            inputs.setdefault(pid.index, []).append(tx)
        actions = []
        for msg in self.group.step(rnd, view.sent, inputs):
            p = msg.payload
            if isinstance(p, Proposal) and p.epoch == self.epoch:
                actions.extend(self._split(msg.sender, p))
            elif getattr(p, "epoch", None) == self.epoch:
                continue
            else:
                actions.append(AdvSend(msg.sender, p, None, 1))
        if rnd == start + 3 * ctx.delta and ctx.quorum is not None and ctx.f >= ctx.quorum:
            actions.extend(self._forge())
        return actions

    def _split(self, sender: PartyId, prop: Proposal) -> list[AdvSend]:
        # echoes from other puppets re-send the same pair rather than minting new ones
        if self.pair is None:
            key = self.ctx.key(self.leader)
            base = prop.justify.log
            first = prop if len(prop.log) > len(base) else self._signed(prop, base.append(f"eq{prop.epoch}a"), key)
            self.pair = (first, self._signed(prop, base.append(f"eq{prop.epoch}b"), key))
            self.logs = (self.pair[0].log, self.pair[1].log)
        honest = [PartyId.validator(i) for i in self.ctx.honest]
        half = len(honest) // 2
        first, twin = self.pair
        return [AdvSend(sender, first, tuple(honest[:half]), 1), AdvSend(sender, twin, tuple(honest[half:]), 1)]

    @staticmethod
    def _signed(prop: Proposal, log: Log, key) -> Proposal:
        return Proposal(prop.epoch, log, prop.justify, key.sign_digest(proposal_digest(prop.epoch, log)))

    def _forge(self) -> list[AdvSend]:
        ctx = self.ctx
        keys = [ctx.key(i) for i in sorted(ctx.corrupted)][: ctx.quorum]
        sender = PartyId.validator(self.leader)
        out = []
        for label, log in zip(ctx.clients, self.logs):
            cert = forge_certificate(self.epoch + 1000, log, keys)
            out.append(AdvSend(sender, cert, (PartyId.client(label),), 1))
        return out


class GhostTx(AttackScript):
    """Corrupted validators vouch for a transaction that only clients hear about; the queue appends
    it and later engine output lands in front of it."""

    name = "ghost_tx"
    summary = "corrupted signatures on a client-only transaction, then an honest tx through the engine"
    protocols = ("liveq",)

    def plan(self, ctx: AttackContext) -> AttackPlan:
        relay = _GhostSigner(ctx)
        later = 3 * ctx.cadence
        return AttackPlan(relay, inputs={later: [_to_all(ctx, "tx1")]})

    def expect(self, ctx: AttackContext) -> Expectation:
        if ctx.quorum is not None and ctx.f >= ctx.quorum:
            return Expectation(safe=False)
        return Expectation(safe=True)


class _GhostSigner(Strategy):
    name = "ghost_tx"

    def __init__(self, ctx: AttackContext):
        self.ctx = ctx

    def on_round(self, view: RoundView) -> list[AdvSend]:
        if view.round != 0:
            return []
        clients = tuple(PartyId.client(c) for c in self.ctx.clients)
        actions = []
        for index in sorted(self.ctx.corrupted):
            key = self.ctx.key(index)
            actions.append(AdvSend(PartyId.validator(index), TxSig("tx0", key.sign_digest(txsig_digest("tx0"))),
                                   clients, 1))
        return actions


ATTACKS: dict[str, type[AttackScript]] = {
    cls.name: cls for cls in (SplitBrain, FourWorlds, SleepyDaAttack, EquivocateLeader, GhostTx)
}


def get_attack(name: str, **params: str) -> AttackScript:
    try:
        cls = ATTACKS[name]
    except KeyError:
        raise AttackError("attack", f"unknown attack {name!r}; known: {', '.join(sorted(ATTACKS))}") from None
    return cls(**params)


def list_attacks() -> list[tuple[str, str, tuple[str, ...]]]:
    return [(cls.name, cls.summary, cls.protocols) for cls in ATTACKS.values()]

"""Deterministic lockstep network with adversarial delivery and sleep.

Each round the world

1. moves scheduled deliveries into party buffers and hands out environment inputs,
2. steps every awake honest party on its sorted inbox,
3. lets the strategy observe what was sent this round (rushing) and inject its own messages,
4. schedules every honest message to every honest party with a delay the strategy picks in [1, delta],
5. records client logs.

Inboxes are sorted by (sender, payload digest) and carry no delivery
timestamps, so a waking party cannot tell when its buffered messages arrived.
"""

from __future__ import annotations

import hashlib
from collections import Counter, defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, NamedTuple, Protocol, Sequence

from .core import Event, Log, PartyId, Receipt, Trace
from .cryptosim import KeyRegistry, RandomOracle, digest64


class SilentClientSend(Exception):
    """A silent client tried to send a message."""


class HorizonExceeded(Exception):
    pass


class IllegalAdversaryAction(Exception):
    """The strategy tried something outside the adversary's powers."""


class Payload:
    """Base for protocol messages: subclasses implement :meth:`encode`."""

    kind = "payload"

    def encode(self) -> bytes:
        raise NotImplementedError

    @cached_property
    def digest(self) -> int:
        return digest64(self.encode())


class Message(NamedTuple):
    sender: PartyId
    payload: Payload
    sent_at: int

    def sort_key(self):
        return (self.sender, self.payload.digest)


class AdvSend(NamedTuple):
    """An adversary message. ``recipients=None`` means every honest party."""

    sender: PartyId
    payload: Payload
    recipients: tuple[PartyId, ...] | None = None
    delay: int = 1


class Node(Protocol):
    party: PartyId

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        ...


class ClientNode(Node, Protocol):
    def output(self) -> Log:
        ...


@dataclass
class RoundView:
    round: int
    sent: list[Message]
    adversary_inputs: list[tuple[str, PartyId]]


class Strategy:
    """Default adversary: corrupted validators stay silent, delivery takes exactly delta."""

    name = "passive"

    def setup(self, world: "World") -> None:
        self.world = world

    def on_round(self, view: RoundView) -> list[AdvSend]:
        return []

    def delay(self, msg: Message, recipient: PartyId) -> int:
        return self.world.delta


def _tx_digest(tx: str) -> int:
    return digest64(tx.encode())


class World:
    """One simulated execution."""

    def __init__(
        self,
        n: int,
        delta: int,
        horizon: int,
        registry: KeyRegistry,
        validators: dict[int, Node],
        clients: dict[str, ClientNode],
        *,
        corrupted: Iterable[int] = (),
        communicating: bool = False,
        validator_awake: Sequence[frozenset[int]] | None = None,
        client_awake: dict[str, Sequence[bool]] | None = None,
        inputs: dict[int, list[tuple[str, tuple[PartyId, ...]]]] | None = None,
        strategy: Strategy | None = None,
        oracle: RandomOracle | None = None,
        record: bool = True,
        config: dict[str, str] | None = None,
    ):
        if delta < 1:
            raise ValueError("delta must be at least 1")
        self.n = n
        self.delta = delta
        self.horizon = horizon
        self.registry = registry
        self.oracle = oracle
        self.validators = dict(sorted(validators.items()))
        self.clients = dict(sorted(clients.items()))
        self.corrupted = frozenset(corrupted)
        overlap = self.corrupted & set(self.validators)
        if overlap:
            raise ValueError(f"validators {sorted(overlap)} are both honest and corrupted")
        self.communicating = communicating
        self._validator_awake = validator_awake
        self._client_awake = client_awake
        self.inputs = inputs or {}
        self.strategy = strategy or Strategy()
        self.record = record
        self.config = dict(config or {})

        self.round = 0
        self.parties: list[tuple[PartyId, Node]] = [
            (PartyId.validator(i), node) for i, node in self.validators.items()
        ] + [(PartyId.client(label), node) for label, node in self.clients.items()]
        self.honest_ids = tuple(pid for pid, _ in self.parties)
        self._honest_set = frozenset(self.honest_ids)
        self._pending: dict[int, list[tuple[PartyId, Message]]] = defaultdict(list)
        self._buffers: dict[PartyId, list[Message]] = {pid: [] for pid in self.honest_ids}
        self._input_buffers: dict[PartyId, list[str]] = {pid: [] for pid in self.honest_ids}
        self._was_awake: dict[PartyId, bool] = {}
        self.events: list[Event] = []
        self.receipts: list[Receipt] = []
        self.client_logs: dict[str, list[Log]] = {label: [] for label in self.clients}
        self.client_flags: dict[str, list[bool]] = {label: [] for label in self.clients}
        self.awake_history: list[frozenset[int]] = []
        self.gap_counts: Counter[int] = Counter()
        self.sent_count: Counter[PartyId] = Counter()
        self.last_sent: list[Message] = []
        self.adversary_log: list[tuple[int, AdvSend]] = []
        self.hooks: list[Callable[[int, list[Message]], None]] = []
        self.strategy.setup(self)

    # -- schedules -------------------------------------------------------

    def validators_awake(self, rnd: int) -> frozenset[int]:
        """W_r: awake validators including the always-awake corrupted ones."""
        if self._validator_awake is None:
            return frozenset(range(self.n))
        return frozenset(self._validator_awake[rnd]) | self.corrupted

    def client_is_awake(self, label: str, rnd: int) -> bool:
        if self._client_awake is None or label not in self._client_awake:
            return True
        return bool(self._client_awake[label][rnd])

    def set_validator_schedule(self, schedule: Sequence[frozenset[int]]) -> None:
        self._validator_awake = schedule

    def set_client_schedule(self, label: str, flags: Sequence[bool]) -> None:
        if self._client_awake is None:
            self._client_awake = {}
        self._client_awake[label] = flags

    def is_awake(self, pid: PartyId, rnd: int) -> bool:
        if pid.is_validator:
            return pid.index in self.validators_awake(rnd)
        return self.client_is_awake(pid.label, rnd)

    # -- adversary helpers -------------------------------------------------

    def inject(self, recipient: PartyId, msg: Message, deliver_at: int) -> None:
        """Place a message in a party's future inbox (used by nested simulations)."""
        if recipient in self._honest_set:
            self._pending[deliver_at].append((recipient, msg))

    # -- main loop ---------------------------------------------------------

    def _emit(self, rnd: int, kind: str, src: str, dst: str, digest: int) -> None:
        if self.record:
            self.events.append(Event(rnd, kind, src, dst, digest))

    def advance_round(self) -> int:
        rnd = self.round
        if rnd >= self.horizon:
            raise HorizonExceeded(f"round {rnd} is past the horizon {self.horizon}")
        delta = self.delta

        for recipient, msg in self._pending.pop(rnd, ()):
            self._buffers[recipient].append(msg)
            self._emit(rnd, "deliver", str(msg.sender), str(recipient), msg.payload.digest)

        adversary_inputs: list[tuple[str, PartyId]] = []
        for tx, recipients in self.inputs.get(rnd, ()):
            for pid in recipients:
                if pid in self._honest_set:
                    self._input_buffers[pid].append(tx)
                else:
                    adversary_inputs.append((tx, pid))

        awake_validators = self.validators_awake(rnd)
        self.awake_history.append(awake_validators)
        sent: list[Message] = []
        for pid, node in self.parties:
            awake = pid.index in awake_validators if pid.is_validator else self.client_is_awake(pid.label, rnd)
            previously = self._was_awake.get(pid, True)
            if awake != previously or (rnd == 0 and not awake):
                self._emit(rnd, "wake" if awake else "sleep", str(pid), "-", 0)
            self._was_awake[pid] = awake
            if not awake:
                continue
            buf = self._buffers[pid]
            if len(buf) > 1:
                buf.sort(key=Message.sort_key)
            self._buffers[pid] = []
            txs = self._input_buffers[pid]
            if txs:
                self._input_buffers[pid] = []
                for tx in txs:
                    self.receipts.append(Receipt(rnd, tx, pid))
                    self._emit(rnd, "input", "env", str(pid), _tx_digest(tx))
            out = node.step(rnd, buf, txs)
            if out:
                if pid.is_client and not self.communicating:
                    raise SilentClientSend(f"silent client {pid} tried to send at round {rnd}")
                for payload in out:
                    msg = Message(pid, payload, rnd)
                    sent.append(msg)
                    self._emit(rnd, "send", str(pid), "*", payload.digest)
                self.sent_count[pid] += len(out)

        self.last_sent = sent
        for hook in self.hooks:
            hook(rnd, sent)

        adv = self.strategy.on_round(RoundView(rnd, sent, adversary_inputs)) or []
        for action in adv:
            self._apply_adversary(rnd, action)

        strategy_delay = self.strategy.delay
        pending = self._pending
        gaps = self.gap_counts
        for msg in sent:
            for recipient in self.honest_ids:
                d = strategy_delay(msg, recipient)
                if not 1 <= d <= delta:
                    raise IllegalAdversaryAction(f"delay {d} outside [1, {delta}] for honest message")
                pending[rnd + d].append((recipient, msg))
                gaps[d] += 1

        for label, node in self.clients.items():
            logs = self.client_logs[label]
            flags = self.client_flags[label]
            awake = self.client_is_awake(label, rnd)
            flags.append(awake)
            log = node.output() if awake else (logs[-1] if logs else Log())
            if self.record and (not logs or logs[-1] != log):
                self._emit(rnd, "log", label, "-", digest64(log.encode()))
            logs.append(log)

        self.round = rnd + 1
        return self.round

    def _apply_adversary(self, rnd: int, action: AdvSend) -> None:
        claim = action.sender
        if claim.is_validator and claim.index not in self.corrupted:
            raise IllegalAdversaryAction(f"adversary cannot send as honest validator {claim}")
        if action.delay < 1:
            raise IllegalAdversaryAction("adversary messages arrive no earlier than the next round")
        msg = Message(claim, action.payload, rnd)
        targets = self.honest_ids if action.recipients is None else action.recipients
        for recipient in targets:
            if recipient in self._honest_set:
                self._pending[rnd + action.delay].append((recipient, msg))
        self._emit(rnd, "adv-send", str(claim), "*" if action.recipients is None else ",".join(map(str, targets)),
                   action.payload.digest)
        self.adversary_log.append((rnd, action))

    def run(self) -> Trace:
        while self.round < self.horizon:
            self.advance_round()
        return self.trace()

    def trace(self) -> Trace:
        events = sorted(self.events, key=lambda ev: ev.round) if self.record else []
        return Trace(
            n=self.n,
            horizon=self.round,
            honest_clients=tuple(self.clients),
            honest_validators=tuple(self.validators),
            communicating=self.communicating,
            client_logs=self.client_logs,
            client_awake=self.client_flags,
            receipts=list(self.receipts),
            events=events,
            validator_awake=list(self.awake_history),
            config=dict(self.config),
        )


def trace_lines(trace: Trace) -> list[str]:
    return [ev.line() for ev in trace.events]


def trace_hash(trace: Trace) -> str:
    h = hashlib.sha256()
    for line in trace_lines(trace):
        h.update(line.encode())
        h.update(b"\n")
    return h.hexdigest()


def delivery_gaps_ok(world: World) -> bool:
    """Delta-bound audit: every honest delivery took between 1 and delta rounds."""
    return all(1 <= gap <= world.delta for gap in world.gap_counts)


def random_sleep_schedule(
    rng,
    n: int,
    horizon: int,
    honest: Sequence[int],
    *,
    min_awake: int,
    p_sleep: float = 0.1,
    mean_nap: int = 3,
    granularity: int = 1,
    pinned: dict[int, Iterable[int]] | None = None,
) -> list[frozenset[int]]:
    """Random awake sets for the honest validators.

    Time is cut into blocks of ``granularity`` rounds and validators only fall
    asleep or wake at block boundaries. Each awake validator falls asleep with
    probability ``p_sleep`` per block and naps for a geometric number of
    blocks, except that at least ``min_awake`` validators always stay awake
    through two consecutive blocks. ``pinned`` maps a round to validators that
    must be awake for the whole block containing it. ``rng`` is a
    :class:`random.Random`.
    """
    honest = list(honest)
    forced: dict[int, set[int]] = {}
    for rnd, members in (pinned or {}).items():
        forced.setdefault(rnd // granularity, set()).update(members)
    asleep_until = {v: -1 for v in honest}
    previous: set[int] = set(honest)
    schedule: list[frozenset[int]] = []
    for block in range((horizon + granularity - 1) // granularity):
        awake = {v for v in honest if asleep_until[v] < block}
        steady = awake & previous
        for v in sorted(awake):
            if v in forced.get(block, ()) or rng.random() >= p_sleep:
                continue
            if v in steady and len(steady) <= min_awake:
                continue
            nap = 1
            while rng.random() > 1.0 / mean_nap:
                nap += 1
            asleep_until[v] = block + nap - 1
            awake.discard(v)
            steady.discard(v)
        for v in forced.get(block, ()):
            asleep_until[v] = block - 1
            awake.add(v)
        members = frozenset(awake)
        schedule.extend([members] * min(granularity, horizon - len(schedule)))
        previous = awake
    return schedule

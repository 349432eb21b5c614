"""Client-side wrappers that trade the engine's safety and liveness against each other.

* :class:`FreezeClient` withholds every candidate log for one delta and freezes
  as soon as it has seen two conflicting certified logs.
* The liveness-queue clients append transactions that enough validators
  vouched for but the engine has not yet output:
  :class:`QuorumQueueClient` (a fixed signature count, silent clients),
  :class:`GossipQueueClient` (anything heard, communicating clients) and
  :class:`FractionQueueClient` (a fraction of validators believed awake).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import GENESIS, Log, PartyId, digest64
from .cryptosim import KeyRegistry, Signature, u16, u64
from .goldfish import GoldfishValidator
from .internal_protocol import (
    Certificate,
    CommitMsg,
    InternalClient,
    InternalValidator,
    TxGossip,
)
from .netsim import Message, Payload


class DivisionUndefined(ZeroDivisionError):
    """No validator is believed awake, so a signature fraction is meaningless."""


def txsig_digest(tx: str) -> int:
    return digest64(b"txsig|" + tx.encode())


def heartbeat_digest(tick: int) -> int:
    return digest64(b"heartbeat|" + u64(tick))


@dataclass(frozen=True)
class TxSig(Payload):
    tx: str
    sig: Signature
    kind = "txsig"

    def encode(self) -> bytes:
        return b"txsig|" + self.tx.encode() + b"|" + u16(self.sig.signer) + u64(self.sig.tag)


@dataclass(frozen=True)
class Heartbeat(Payload):
    tick: int
    sig: Signature
    kind = "heartbeat"

    def encode(self) -> bytes:
        return b"hb|" + u64(self.tick) + u16(self.sig.signer) + u64(self.sig.tag)


def is_consistent_with_all(log: Log, frontier: Iterable[Log]) -> bool:
    return all(log.extends(m) or m.extends(log) for m in frontier)


# -- freezing gadget --------------------------------------------------------


class FreezeClient:
    """Communicating client that outputs a certified log only after a delta-long quiet period."""

    def __init__(self, label: str, n: int, delta: int, quorum: int, registry: KeyRegistry):
        self.label = label
        self.party = PartyId.client(label)
        self.delta = delta
        self.inner = InternalClient(label, n, quorum, registry)
        # maximal elements of M: consistency with these implies consistency with all of M
        self.frontier: list[Log] = []
        self.pending: list[tuple[int, Log]] = []
        self.relayed: set[int] = set()
        self.log = GENESIS
        self._gossiped: Certificate | None = None

    @property
    def observed(self) -> list[Log]:
        return list(self.frontier)

    @property
    def frozen(self) -> bool:
        """The frontier is an antichain, so two members means two conflicting logs."""
        return len(self.frontier) > 1

    def observe(self, log: Log, rnd: int) -> None:
        if not any(m.extends(log) for m in self.frontier):
            self.frontier = [m for m in self.frontier if not log.extends(m)] + [log]
        if log != self.log and all(c != log for _, c in self.pending):
            self.pending.append((rnd, log))

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out: list[Payload] = []
        inner = self.inner
        for msg in inbox:
            payload = msg.payload
            if isinstance(payload, Certificate):
                if payload.digest in self.relayed or payload.is_genesis:
                    continue
                self.relayed.add(payload.digest)
                if inner.accepts(payload):
                    self.observe(payload.log, rnd)
                    out.append(payload)
                    inner.handle(payload)
            elif isinstance(payload, CommitMsg):
                inner.handle(payload)
        for tx in inputs:
            out.append(TxGossip(tx))
        own = inner.witness()
        if not own.is_genesis and (own is not self._gossiped or rnd % self.delta == 0):
            if own is not self._gossiped:
                self.observe(own.log, rnd)
                self.relayed.add(own.digest)
            self._gossiped = own
            out.append(own)
        self._mature(rnd)
        return out

    def _mature(self, rnd: int) -> None:
        ready = [(r, log) for r, log in self.pending if r <= rnd - self.delta]
        if not ready:
            return
        self.pending = [(r, log) for r, log in self.pending if r > rnd - self.delta]
        for _, log in sorted(ready, key=lambda item: (item[0], len(item[1]))):
            if log.extends(self.log) and is_consistent_with_all(log, self.frontier):
                self.log = log

    def output(self) -> Log:
        return self.log


# -- liveness queue ---------------------------------------------------------


class LivenessQueue:
    """Transactions with the round they were queued; first insertion wins."""

    def __init__(self):
        self.entries: dict[str, int] = {}

    def add(self, tx: str, rnd: int) -> bool:
        if tx in self.entries:
            return False
        self.entries[tx] = rnd
        return True

    def __contains__(self, tx: str) -> bool:
        return tx in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def suffix(self, base: Log, rnd: int, wait: int) -> list[str]:
        cutoff = rnd - wait
        ready = sorted((r, tx) for tx, r in self.entries.items() if r <= cutoff and tx not in base)
        return [tx for _, tx in ready]


class _QueueClient:
    """Output = engine log followed by queued transactions older than ``wait`` rounds."""

    def __init__(self, label: str, inner, wait: int):
        self.label = label
        self.party = PartyId.client(label)
        self.inner = inner
        self.wait = wait
        self.queue = LivenessQueue()
        self.log = GENESIS
        self.appended_rounds: list[int] = []

    def _refresh(self, rnd: int) -> None:
        base = self.inner.output()
        extra = self.queue.suffix(base, rnd, self.wait)
        if extra:
            self.appended_rounds.append(rnd)
            self.log = base.extend(extra)
        else:
            self.log = base

    def output(self) -> Log:
        return self.log


class QuorumQueueClient(_QueueClient):
    """Silent client: queue a transaction once ``threshold`` distinct validators signed it."""

    def __init__(self, label: str, inner, wait: int, threshold: int, registry: KeyRegistry):
        super().__init__(label, inner, wait)
        self.threshold = threshold
        self.registry = registry
        self.signers: dict[str, set[int]] = {}

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        passthrough = []
        for msg in inbox:
            p = msg.payload
            if isinstance(p, TxSig):
                if not self.registry.verify_digest(p.sig.signer, txsig_digest(p.tx), p.sig):
                    continue
                signers = self.signers.setdefault(p.tx, set())
                signers.add(p.sig.signer)
                if len(signers) >= self.threshold:
                    self.queue.add(p.tx, rnd)
            else:
                passthrough.append(msg)
        self.inner.step(rnd, passthrough, [])
        self._refresh(rnd)
        return []


class GossipQueueClient(_QueueClient):
    """Communicating client: queue and gossip every transaction on first sight."""

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out: list[Payload] = []
        passthrough = []
        for msg in inbox:
            p = msg.payload
            tx = p.tx if isinstance(p, (TxGossip, TxSig)) else None
            if tx is not None:
                if self.queue.add(tx, rnd):
                    out.append(TxGossip(tx))
            else:
                passthrough.append(msg)
        for tx in inputs:
            if self.queue.add(tx, rnd):
                out.append(TxGossip(tx))
        self.inner.step(rnd, passthrough, [])
        self._refresh(rnd)
        return out


class HeartbeatTally:
    """Verified tx signers and per-tick heartbeat senders, as seen by one client."""

    def __init__(self, registry: KeyRegistry):
        self.registry = registry
        self.tx_signers: dict[str, set[int]] = {}
        self.heartbeats: dict[int, set[int]] = {}
        self.any_tx_signer: set[int] = set()
        self.rejected = 0

    def record(self, payload: Payload) -> None:
        if isinstance(payload, TxSig):
            sig = payload.sig
            if not self.registry.verify_digest(sig.signer, txsig_digest(payload.tx), sig):
                self.rejected += 1
                return
            self.tx_signers.setdefault(payload.tx, set()).add(sig.signer)
            self.any_tx_signer.add(sig.signer)
        elif isinstance(payload, Heartbeat):
            sig = payload.sig
            if not self.registry.verify_digest(sig.signer, heartbeat_digest(payload.tick), sig):
                self.rejected += 1
                return
            self.heartbeats.setdefault(payload.tick, set()).add(sig.signer)

    def believed_awake(self, tick: int) -> int:
        return len(self.heartbeats.get(tick, set()) | self.any_tx_signer)

    def fraction(self, tx: str, tick: int) -> Fraction:
        total = self.believed_awake(tick)
        if total == 0:
            raise DivisionUndefined(f"nobody is believed awake at tick {tick}")
        return Fraction(len(self.tx_signers.get(tx, ())), total)


class FractionQueueClient(_QueueClient):
    """Silent client: at each delta tick queue txs signed by at least phi of the validators believed awake."""

    def __init__(self, label: str, inner, wait: int, phi: Fraction, delta: int, registry: KeyRegistry):
        super().__init__(label, inner, wait)
        self.phi = Fraction(phi)
        self.delta = delta
        self.tally = HeartbeatTally(registry)
        self._last_round = -1

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        passthrough = []
        for msg in inbox:
            p = msg.payload
            if isinstance(p, (TxSig, Heartbeat)):
                self.tally.record(p)
            else:
                passthrough.append(msg)
        self.inner.step(rnd, passthrough, [])
        woke = self._last_round != rnd - 1
        self._last_round = rnd
        if rnd % self.delta == 0 or woke:
            self.evaluate(rnd // self.delta, rnd)
        self._refresh(rnd)
        return []

    def evaluate(self, tick: int, rnd: int) -> None:
        for tx in sorted(self.tally.tx_signers):
            if tx in self.queue:
                continue
            try:
                frac = self.tally.fraction(tx, tick - 1)
            except DivisionUndefined:
                return
            if frac >= self.phi:
                self.queue.add(tx, rnd)


# -- validators -------------------------------------------------------------


class SigningValidator(InternalValidator):
    """Engine validator that signs every first-seen transaction and gossips the signature."""

    def tx_message(self, tx: str) -> Payload:
        return TxSig(tx, self.key.sign_digest(txsig_digest(tx)))

    def extract_tx(self, payload: Payload) -> str | None:
        if isinstance(payload, (TxGossip, TxSig)):
            return payload.tx
        return None


class HeartbeatValidator(GoldfishValidator):
    """Sleepy-engine validator that, at each delta tick, signs new txs and a heartbeat."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.unsigned: dict[str, None] = {}

    def learn_tx(self, tx: str, out: list[Payload]) -> bool:
        if super().learn_tx(tx, out):
            self.unsigned[tx] = None
            return True
        return False

    def handle(self, payload: Payload, out: list[Payload]) -> None:
        if isinstance(payload, TxSig):
            self.learn_tx(payload.tx, out)
        elif not isinstance(payload, Heartbeat):
            super().handle(payload, out)

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out = super().step(rnd, inbox, inputs)
        if rnd % self.delta == 0:
            tick = rnd // self.delta
            for tx in self.unsigned:
                out.append(TxSig(tx, self.key.sign_digest(txsig_digest(tx))))
            self.unsigned = {}
            out.append(Heartbeat(tick, self.key.sign_digest(heartbeat_digest(tick))))
        return out

"""Signature-chain broadcast with relaying clients, and the log built from it.

Every period of ``2 n delta`` rounds each validator leads one broadcast
instance whose value is a block of transactions. A chain with ``k`` signatures
is accepted by a client up to ``(2k-1) delta`` rounds into the instance and by
a validator up to ``2k delta``; validators extend chains they accept, clients
relay them untouched. At the end of the period every client appends, in
leader order, the one value of each instance it accepted exactly one value for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .core import GENESIS, Log, PartyId, digest64
from .cryptosim import KeyRegistry, Signature, SigningKey, u16, u64
from .internal_protocol import TxGossip
from .netsim import Message, Payload


def period_length(n: int, delta: int) -> int:
    return 2 * n * delta


def ds_latency(n: int, delta: int) -> int:
    return 2 * period_length(n, delta)


def instance_id(period: int, leader: int, n: int) -> int:
    return period * n + leader


def value_digest(value: tuple[str, ...]) -> int:
    return digest64(b"dsval|" + Log(value).encode())


@dataclass(frozen=True)
class SigChain(Payload):
    """A value plus an ordered list of (signer, tag) layers; the first signer is the leader."""

    instance: int
    leader: int
    value_digest: int
    pairs: tuple[Signature, ...]
    value: tuple[str, ...] | None = None
    kind = "sigchain"

    def header(self) -> bytes:
        return u64(self.instance) + u16(self.leader) + u64(self.value_digest)

    def layer_digest(self, depth: int, signer: int) -> int:
        """What the signer at position ``depth`` signs: the header, the earlier layers, itself."""
        body = self.header() + b"".join(u16(s.signer) + u64(s.tag) for s in self.pairs[:depth]) + u16(signer)
        return digest64(b"dschain|" + body)

    def wire(self) -> bytes:
        return self.header() + u16(len(self.pairs)) + b"".join(u16(s.signer) + u64(s.tag) for s in self.pairs)

    @classmethod
    def from_wire(cls, data: bytes) -> "SigChain":
        if len(data) < 20:
            raise ValueError("truncated chain header")
        instance = int.from_bytes(data[0:8], "big")
        leader = int.from_bytes(data[8:10], "big")
        vd = int.from_bytes(data[10:18], "big")
        k = int.from_bytes(data[18:20], "big")
        if len(data) != 20 + 10 * k:
            raise ValueError("chain body has the wrong length")
        pairs = tuple(
            Signature(int.from_bytes(data[20 + 10 * i:22 + 10 * i], "big"),
                      int.from_bytes(data[22 + 10 * i:30 + 10 * i], "big"))
            for i in range(k)
        )
        return cls(instance, leader, vd, pairs)

    def encode(self) -> bytes:
        body = b"" if self.value is None else Log(self.value).encode()
        return self.wire() + body

    @property
    def signers(self) -> tuple[int, ...]:
        return tuple(s.signer for s in self.pairs)

    def extended(self, key: SigningKey) -> "SigChain":
        tag = key.sign_digest(self.layer_digest(len(self.pairs), key.signer))
        return SigChain(self.instance, self.leader, self.value_digest, self.pairs + (tag,), self.value)

    @classmethod
    def start(cls, instance: int, value: tuple[str, ...], key: SigningKey) -> "SigChain":
        bare = cls(instance, key.signer, value_digest(value), (), value)
        return bare.extended(key)


def chain_structure_ok(chain: SigChain, n: int, registry: KeyRegistry) -> bool:
    k = len(chain.pairs)
    if k == 0 or k > n:
        return False
    if chain.leader != chain.instance % n or chain.pairs[0].signer != chain.leader:
        return False
    if len(set(chain.signers)) != k:
        return False
    if chain.value is not None and value_digest(chain.value) != chain.value_digest:
        return False
    for depth, sig in enumerate(chain.pairs):
        if not registry.verify_digest(sig.signer, chain.layer_digest(depth, sig.signer), sig):
            return False
    return True


def validate_chain(chain: SigChain, now: int, role: str, start: int, n: int, delta: int,
                   registry: KeyRegistry) -> bool:
    """Structural validity plus the depth-dependent deadline for ``role``."""
    if role not in ("validator", "client"):
        raise ValueError(f"unknown role {role!r}")
    if not chain_structure_ok(chain, n, registry):
        return False
    k = len(chain.pairs)
    elapsed = now - start
    if elapsed < 0:
        return False
    limit = 2 * k * delta if role == "validator" else (2 * k - 1) * delta
    return elapsed <= limit


BOTTOM = None


def bg_output(values: Iterable[tuple[str, ...]]):
    """The single accepted value, or BOTTOM when zero or several were accepted."""
    values = set(values)
    if len(values) == 1:
        return next(iter(values))
    return BOTTOM


class DsValidator:
    def __init__(self, index: int, n: int, delta: int, key: SigningKey, registry: KeyRegistry):
        self.index = index
        self.party = PartyId.validator(index)
        self.n = n
        self.delta = delta
        self.key = key
        self.registry = registry
        self.known_txs: dict[str, None] = {}
        self.proposed: set[str] = set()
        self.signed: set[tuple[int, int]] = set()
        self.seen: set[int] = set()

    def instance_start(self, instance: int) -> int:
        return (instance // self.n) * period_length(self.n, self.delta)

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out: list[Payload] = []
        for tx in inputs:
            self._learn(tx, out)
        for msg in inbox:
            p = msg.payload
            if isinstance(p, TxGossip):
                self._learn(p.tx, out)
            elif isinstance(p, SigChain):
                self._on_chain(p, rnd, out)
        P = period_length(self.n, self.delta)
        if rnd % P == 0:
            period = rnd // P
            value = tuple(tx for tx in self.known_txs if tx not in self.proposed)
            self.proposed.update(value)
            chain = SigChain.start(instance_id(period, self.index, self.n), value, self.key)
            self.signed.add((chain.instance, chain.value_digest))
            out.append(chain)
        return out

    def _learn(self, tx: str, out: list[Payload]) -> None:
        if tx not in self.known_txs:
            self.known_txs[tx] = None
            out.append(TxGossip(tx))

    def _on_chain(self, chain: SigChain, rnd: int, out: list[Payload]) -> None:
        if chain.digest in self.seen:
            return
        self.seen.add(chain.digest)
        key = (chain.instance, chain.value_digest)
        if key in self.signed or self.index in chain.signers or chain.value is None:
            return
        if not validate_chain(chain, rnd, "validator", self.instance_start(chain.instance), self.n, self.delta,
                              self.registry):
            return
        self.signed.add(key)
        out.append(chain.extended(self.key))


class DsClient:
    def __init__(self, label: str, n: int, delta: int, registry: KeyRegistry):
        self.label = label
        self.party = PartyId.client(label)
        self.n = n
        self.delta = delta
        self.registry = registry
        self.accepted: dict[int, dict[int, tuple[str, ...]]] = {}
        self.seen: set[int] = set()
        self.forwarded: set[str] = set()
        self.log = GENESIS
        self.outputs: dict[int, object] = {}

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out: list[Payload] = []
        for tx in inputs:
            if tx not in self.forwarded:
                self.forwarded.add(tx)
                out.append(TxGossip(tx))
        P = period_length(self.n, self.delta)
        for msg in inbox:
            chain = msg.payload
            if not isinstance(chain, SigChain) or chain.digest in self.seen or chain.value is None:
                continue
            self.seen.add(chain.digest)
            start = (chain.instance // self.n) * P
            values = self.accepted.setdefault(chain.instance, {})
            if chain.value_digest in values:
                continue
            if validate_chain(chain, rnd, "client", start, self.n, self.delta, self.registry):
                values[chain.value_digest] = chain.value
                out.append(chain)
        if rnd % P == 0 and rnd > 0:
            self.finish_period(rnd // P - 1)
        return out

    def finish_period(self, period: int) -> None:
        log = self.log
        for leader in range(self.n):
            inst = instance_id(period, leader, self.n)
            value = bg_output(self.accepted.get(inst, {}).values())
            self.outputs[inst] = value
            if value is not BOTTOM:
                log = log.extend(value)
        self.log = log

    def output(self) -> Log:
        return self.log

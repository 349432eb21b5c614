"""Certifiable lockstep BFT engine with a configurable quorum.

Time is cut into epochs of four delta-long phases, led round-robin:

* ``+0``   the leader proposes its highest vote certificate's log extended with pending txs;
* ``+d``   each validator votes for the unique leader proposal it knows, or ships
  equivocation evidence when it knows two;
* ``+2d``  a validator holding ``quorum`` matching votes forms a vote certificate (QC)
  and broadcasts it;
* ``+3d``  a validator whose highest QC is from this epoch commits it, unless it has seen two
  different leader-signed logs for the epoch, and broadcasts a signed commit.

Clients assemble ``quorum`` commit signatures into a :class:`Certificate`; that
certificate is the transcript handed out by :meth:`InternalClient.witness`
and checked by :func:`consume`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .core import GENESIS, Log, PartyId, digest64
from .cryptosim import KeyRegistry, Signature, SigningKey, u16, u64
from .netsim import Message, Payload

PHASES = 4


def epoch_length(delta: int) -> int:
    return PHASES * delta


def internal_latency(delta: int) -> int:
    """Declared liveness latency: two epochs, enough to skip one faulty leader."""
    return 2 * epoch_length(delta)


def leader_of(epoch: int, n: int) -> int:
    return epoch % n


def default_quorum(n: int) -> int:
    return n // 2 + 1


def i64(value: int) -> bytes:
    return value.to_bytes(8, "big", signed=True)


def proposal_digest(epoch: int, log: Log) -> int:
    return digest64(b"prop" + i64(epoch) + u64(log.digest))


def vote_digest(epoch: int, log: Log) -> int:
    return digest64(b"vote" + i64(epoch) + u64(log.digest))


def commit_digest(epoch: int, log_digest: int) -> int:
    return digest64(b"commit" + u64(epoch) + u64(log_digest))


def _encode_sigs(sigs: Iterable[Signature]) -> bytes:
    sigs = tuple(sigs)
    return u16(len(sigs)) + b"".join(u16(s.signer) + u64(s.tag) for s in sigs)


# -- messages ---------------------------------------------------------------


@dataclass(frozen=True)
class TxGossip(Payload):
    tx: str
    kind = "tx"

    def encode(self) -> bytes:
        return b"tx|" + self.tx.encode()


@dataclass(frozen=True)
class QC(Payload):
    """Vote certificate: the leader's proposal signature plus ``quorum`` votes."""

    epoch: int
    log: Log
    leader_sig: Signature | None
    votes: tuple[Signature, ...]
    kind = "qc"

    def encode(self) -> bytes:
        lead = b"" if self.leader_sig is None else u16(self.leader_sig.signer) + u64(self.leader_sig.tag)
        return b"qc|" + i64(self.epoch) + self.log.encode() + lead + _encode_sigs(self.votes)

    @property
    def is_genesis(self) -> bool:
        return self.epoch < 0


GENESIS_QC = QC(-1, GENESIS, None, ())


def qc_valid(qc: QC, n: int, quorum: int, registry: KeyRegistry) -> bool:
    if qc.is_genesis:
        return qc.epoch == -1 and len(qc.log) == 0 and not qc.votes
    if qc.leader_sig is None:
        return False
    if not registry.verify_digest(leader_of(qc.epoch, n), proposal_digest(qc.epoch, qc.log), qc.leader_sig):
        return False
    vd = vote_digest(qc.epoch, qc.log)
    signers = set()
    for sig in qc.votes:
        if sig.signer in signers or not registry.verify_digest(sig.signer, vd, sig):
            return False
        signers.add(sig.signer)
    return len(signers) >= quorum


@dataclass(frozen=True)
class Proposal(Payload):
    epoch: int
    log: Log
    justify: QC
    sig: Signature
    kind = "proposal"

    def encode(self) -> bytes:
        return b"prop|" + i64(self.epoch) + self.log.encode() + self.justify.encode() + u16(self.sig.signer) + u64(self.sig.tag)


@dataclass(frozen=True)
class Vote(Payload):
    epoch: int
    log: Log
    leader_sig: Signature
    sig: Signature
    kind = "vote"

    def encode(self) -> bytes:
        return (b"vote|" + i64(self.epoch) + self.log.encode() + u16(self.leader_sig.signer)
                + u64(self.leader_sig.tag) + u16(self.sig.signer) + u64(self.sig.tag))


@dataclass(frozen=True)
class Evidence(Payload):
    """Two different leader-signed logs for one epoch."""

    epoch: int
    first: tuple[Log, Signature]
    second: tuple[Log, Signature]
    kind = "evidence"

    def encode(self) -> bytes:
        out = b"evid|" + i64(self.epoch)
        for log, sig in (self.first, self.second):
            out += log.encode() + u16(sig.signer) + u64(sig.tag)
        return out


@dataclass(frozen=True)
class CommitMsg(Payload):
    epoch: int
    log: Log
    sig: Signature
    kind = "commit"

    def encode(self) -> bytes:
        return b"cmt|" + u64(self.epoch) + self.log.encode() + u16(self.sig.signer) + u64(self.sig.tag)


# -- certificates -----------------------------------------------------------


class Reject(Exception):
    """consume() refused a transcript. ``reason`` is one of REJECT_REASONS."""

    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


REJECT_REASONS = ("malformed", "duplicate-signer", "bad-signature", "too-few-signers")


@dataclass(frozen=True)
class Certificate(Payload):
    """Commit certificate; doubles as the wire message carrying a transcript.

    ``log_digest`` is the digest field as it appeared on the wire; ``None``
    means "the digest of ``log``".
    """

    epoch: int
    log: Log
    sigs: tuple[Signature, ...]
    log_digest: int | None = field(default=None, compare=True)
    kind = "cert"

    @property
    def claimed_digest(self) -> int:
        return self.log.digest if self.log_digest is None else self.log_digest

    @property
    def is_genesis(self) -> bool:
        return not self.sigs and len(self.log) == 0

    def encode(self) -> bytes:
        return u64(self.epoch) + u64(self.claimed_digest) + self.log.encode() + _encode_sigs(self.sigs)

    @classmethod
    def decode(cls, data: bytes) -> "Certificate":
        if len(data) < 16:
            raise ValueError("truncated certificate header")
        epoch = int.from_bytes(data[0:8], "big")
        log_digest = int.from_bytes(data[8:16], "big")
        log, offset = Log.decode(data, 16)
        if len(data) < offset + 2:
            raise ValueError("truncated signature count")
        count = int.from_bytes(data[offset:offset + 2], "big")
        offset += 2
        if len(data) != offset + 10 * count:
            raise ValueError("signature section has the wrong length")
        sigs = []
        for _ in range(count):
            sigs.append(Signature(int.from_bytes(data[offset:offset + 2], "big"),
                                  int.from_bytes(data[offset + 2:offset + 10], "big")))
            offset += 10
        return cls(epoch, log, tuple(sigs), log_digest)


GENESIS_CERT = Certificate(0, GENESIS, ())


def consume(cert: Certificate | bytes, quorum: int, registry: KeyRegistry) -> Log:
    """Check a transcript and return the log it certifies, or raise :class:`Reject`."""
    if isinstance(cert, (bytes, bytearray)):
        try:
            cert = Certificate.decode(bytes(cert))
        except (ValueError, UnicodeDecodeError) as exc:
            raise Reject("malformed") from exc
    if cert.is_genesis and cert.claimed_digest == GENESIS.digest:
        return GENESIS
    signers = [s.signer for s in cert.sigs]
    if len(set(signers)) != len(signers):
        raise Reject("duplicate-signer")
    if cert.claimed_digest != cert.log.digest:
        raise Reject("bad-signature")
    cd = commit_digest(cert.epoch, cert.claimed_digest)
    for sig in cert.sigs:
        if not registry.verify_digest(sig.signer, cd, sig):
            raise Reject("bad-signature")
    if len(signers) < quorum:
        raise Reject("too-few-signers")
    return cert.log


def forge_certificate(epoch: int, log: Log, keys: Iterable[SigningKey]) -> Certificate:
    """Commit certificate signed with the given (typically corrupted) keys."""
    cd = commit_digest(epoch, log.digest)
    return Certificate(epoch, log, tuple(sorted((k.sign_digest(cd) for k in keys), key=lambda s: s.signer)))


# -- validator --------------------------------------------------------------


class InternalValidator:
    def __init__(self, index: int, n: int, delta: int, quorum: int, key: SigningKey, registry: KeyRegistry):
        self.index = index
        self.party = PartyId.validator(index)
        self.n = n
        self.delta = delta
        self.quorum = quorum
        self.key = key
        self.registry = registry
        self.known_txs: dict[str, None] = {}
        self.hc: QC = GENESIS_QC
        self.lock: QC = GENESIS_QC
        # epoch -> {log: leader signature}; two entries mean the leader equivocated
        self.leader_logs: dict[int, dict[Log, Signature]] = {}
        self.proposals: dict[tuple[int, Log], Proposal] = {}
        self.votes: dict[tuple[int, Log], dict[int, Signature]] = {}
        self.voted: set[int] = set()
        self.evidence_sent: set[int] = set()
        self.committed: list[tuple[int, Log]] = []

    # hooks for gadgets layered on top

    def tx_message(self, tx: str) -> Payload:
        return TxGossip(tx)

    def extract_tx(self, payload: Payload) -> str | None:
        return payload.tx if isinstance(payload, TxGossip) else None

    def learn_tx(self, tx: str, out: list[Payload]) -> None:
        if tx not in self.known_txs:
            self.known_txs[tx] = None
            out.append(self.tx_message(tx))

    def conflicted(self, epoch: int) -> bool:
        return len(self.leader_logs.get(epoch, ())) >= 2

    def _note_leader_log(self, epoch: int, log: Log, sig: Signature) -> bool:
        """Record a verified leader-signed log; True when it is new for the epoch."""
        logs = self.leader_logs.setdefault(epoch, {})
        if log in logs:
            return False
        logs[log] = sig
        return True

    def _adopt(self, qc: QC, out: list[Payload]) -> None:
        if qc.epoch > self.hc.epoch:
            self.hc = qc
            out.append(qc)

    def handle(self, payload: Payload, out: list[Payload]) -> None:
        tx = self.extract_tx(payload)
        if tx is not None:
            self.learn_tx(tx, out)
            return
        reg = self.registry
        if isinstance(payload, Proposal):
            e = payload.epoch
            if e < 0 or not reg.verify_digest(leader_of(e, self.n), proposal_digest(e, payload.log), payload.sig):
                return
            self.proposals.setdefault((e, payload.log), payload)
            if self._note_leader_log(e, payload.log, payload.sig) and len(self.leader_logs[e]) <= 2:
                out.append(payload)
        elif isinstance(payload, Vote):
            e = payload.epoch
            if e < 0 or not reg.verify_digest(leader_of(e, self.n), proposal_digest(e, payload.log), payload.leader_sig):
                return
            if not reg.verify_digest(payload.sig.signer, vote_digest(e, payload.log), payload.sig):
                return
            self._note_leader_log(e, payload.log, payload.leader_sig)
            self.votes.setdefault((e, payload.log), {}).setdefault(payload.sig.signer, payload.sig)
        elif isinstance(payload, Evidence):
            leader = leader_of(payload.epoch, self.n)
            for log, sig in (payload.first, payload.second):
                if reg.verify_digest(leader, proposal_digest(payload.epoch, log), sig):
                    self._note_leader_log(payload.epoch, log, sig)
        elif isinstance(payload, QC):
            if payload.is_genesis:
                return
            if payload.epoch <= self.hc.epoch and payload.log in self.leader_logs.get(payload.epoch, ()):
                return
            if not qc_valid(payload, self.n, self.quorum, reg):
                return
            self._note_leader_log(payload.epoch, payload.log, payload.leader_sig)
            self._adopt(payload, out)

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        out: list[Payload] = []
        for msg in inbox:
            self.handle(msg.payload, out)
        for tx in inputs:
            self.learn_tx(tx, out)
        E = epoch_length(self.delta)
        epoch, phase = divmod(rnd, E)
        d = self.delta
        if phase == 0 and leader_of(epoch, self.n) == self.index:
            self.propose(epoch, out)
        elif phase == d:
            self.vote(epoch, out)
        elif phase == 2 * d:
            self.certify(epoch, out)
        elif phase == 3 * d:
            self.lock = self.hc
            self.commit(epoch, out)
        return out

    def propose(self, epoch: int, out: list[Payload]) -> None:
        base = self.hc.log
        log = base.extend(tx for tx in self.known_txs if tx not in base)
        sig = self.key.sign_digest(proposal_digest(epoch, log))
        prop = Proposal(epoch, log, self.hc, sig)
        self.proposals.setdefault((epoch, log), prop)
        self._note_leader_log(epoch, log, sig)
        out.append(prop)

    def vote(self, epoch: int, out: list[Payload]) -> None:
        if epoch in self.voted:
            return
        logs = self.leader_logs.get(epoch, {})
        if len(logs) >= 2:
            if epoch not in self.evidence_sent:
                self.evidence_sent.add(epoch)
                (la, sa), (lb, sb) = list(logs.items())[:2]
                out.append(Evidence(epoch, (la, sa), (lb, sb)))
            return
        if len(logs) != 1:
            return
        (log,) = logs
        prop = self.proposals.get((epoch, log))
        if prop is None or not self.acceptable(prop):
            return
        self.voted.add(epoch)
        sig = self.key.sign_digest(vote_digest(epoch, log))
        self.votes.setdefault((epoch, log), {}).setdefault(self.index, sig)
        out.append(Vote(epoch, log, prop.sig, sig))

    def acceptable(self, prop: Proposal) -> bool:
        justify = prop.justify
        if justify.epoch >= prop.epoch or not qc_valid(justify, self.n, self.quorum, self.registry):
            return False
        if not prop.log.extends(justify.log):
            return False
        return justify.epoch >= self.lock.epoch or prop.log.extends(self.lock.log)

    def certify(self, epoch: int, out: list[Payload]) -> None:
        if self.conflicted(epoch) or self.hc.epoch >= epoch:
            return
        for (e, log), sigs in self.votes.items():
            if e == epoch and len(sigs) >= self.quorum:
                leader_sig = self.leader_logs[epoch][log]
                qc = QC(epoch, log, leader_sig, tuple(sigs[i] for i in sorted(sigs)))
                self._adopt(qc, out)
                return

    def commit(self, epoch: int, out: list[Payload]) -> None:
        if self.hc.epoch != epoch or self.conflicted(epoch):
            return
        log = self.hc.log
        self.committed.append((epoch, log))
        out.append(CommitMsg(epoch, log, self.key.sign_digest(commit_digest(epoch, log.digest))))


# -- client -----------------------------------------------------------------


class InternalClient:
    """Collects commit signatures into certificates; outputs the newest certified log."""

    def __init__(self, label: str, n: int, quorum: int, registry: KeyRegistry):
        self.label = label
        self.party = PartyId.client(label)
        self.n = n
        self.quorum = quorum
        self.registry = registry
        self.cert: Certificate = GENESIS_CERT
        self._commit_sigs: dict[tuple[int, Log], dict[int, Signature]] = {}
        self._checked: dict[int, bool] = {}

    @property
    def log(self) -> Log:
        return self.cert.log

    def witness(self) -> Certificate:
        return self.cert

    def consider(self, cert: Certificate) -> bool:
        """Adopt a verified certificate if it is newer; True when adopted."""
        if cert.is_genesis:
            return False
        if self.cert.is_genesis or cert.epoch > self.cert.epoch:
            self.cert = cert
            return True
        return False

    def accepts(self, cert: Certificate) -> bool:
        """Memoized consume() check."""
        ok = self._checked.get(cert.digest)
        if ok is None:
            try:
                consume(cert, self.quorum, self.registry)
                ok = True
            except Reject:
                ok = False
            self._checked[cert.digest] = ok
        return ok

    def handle(self, payload: Payload) -> bool:
        """Process one payload; True when the internal log changed."""
        if isinstance(payload, CommitMsg):
            sig = payload.sig
            if not self.registry.verify_digest(sig.signer, commit_digest(payload.epoch, payload.log.digest), sig):
                return False
            key = (payload.epoch, payload.log)
            sigs = self._commit_sigs.setdefault(key, {})
            if sig.signer in sigs:
                return False
            sigs[sig.signer] = sig
            if len(sigs) == self.quorum and (self.cert.is_genesis or payload.epoch > self.cert.epoch):
                cert = Certificate(payload.epoch, payload.log, tuple(sigs[i] for i in sorted(sigs)))
                return self.consider(cert)
            return False
        if isinstance(payload, Certificate):
            if not payload.is_genesis and (self.cert.is_genesis or payload.epoch > self.cert.epoch) \
                    and self.accepts(payload):
                return self.consider(payload)
        return False

    def step(self, rnd: int, inbox: list[Message], inputs: list[str]) -> list[Payload]:
        for msg in inbox:
            self.handle(msg.payload)
        return []

    def output(self) -> Log:
        return self.cert.log

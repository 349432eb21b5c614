"""Domain vocabulary for the simulator and the safety/liveness trace checker.

A log is an ordered sequence of transaction ids rooted at the empty genesis
log. Client outputs are recorded per round in a :class:`Trace`, and the two
checkers below turn a trace into a :class:`Verdict`.
"""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Sequence


def digest64(data: bytes) -> int:
    """Stable 64-bit digest used for payloads, logs and trace lines."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


class Transaction(NamedTuple):
    """A transaction is an opaque id plus payload; ids are unique per execution."""

    id: str
    payload: bytes = b""


class Log:
    """Immutable transaction-id sequence. Appending an id already present is a no-op."""

    __slots__ = ("entries", "_members", "_digest")

    def __init__(self, entries: Iterable[str] = ()):
        seen: set[str] = set()
        kept = []
        for tx in entries:
            if tx not in seen:
                seen.add(tx)
                kept.append(tx)
        self.entries: tuple[str, ...] = tuple(kept)
        self._members = frozenset(seen)
        self._digest: int | None = None

    @classmethod
    def _trusted(cls, entries: tuple[str, ...], members: frozenset[str]) -> "Log":
        log = cls.__new__(cls)
        log.entries = entries
        log._members = members
        log._digest = None
        return log

    def append(self, tx: str) -> "Log":
        if tx in self._members:
            return self
        return Log._trusted(self.entries + (tx,), self._members | {tx})

    def extend(self, txs: Iterable[str]) -> "Log":
        fresh = [tx for tx in dict.fromkeys(txs) if tx not in self._members]
        if not fresh:
            return self
        return Log._trusted(self.entries + tuple(fresh), self._members.union(fresh))

    def __contains__(self, tx: object) -> bool:
        return tx in self._members

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[str]:
        return iter(self.entries)

    def __getitem__(self, index):
        return self.entries[index]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Log) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return "Log([" + ",".join(self.entries) + "])"

    @property
    def digest(self) -> int:
        if self._digest is None:
            self._digest = digest64(self.encode())
        return self._digest

    def extends(self, other: "Log") -> bool:
        """True iff ``other`` is a prefix of this log."""
        return len(other.entries) <= len(self.entries) and self.entries[:len(other.entries)] == other.entries

    def encode(self) -> bytes:
        """Length-prefixed body used inside wire formats and digests."""
        parts = [len(self.entries).to_bytes(4, "big")]
        for tx in self.entries:
            raw = tx.encode()
            parts.append(len(raw).to_bytes(2, "big"))
            parts.append(raw)
        return b"".join(parts)

    @classmethod
    def decode(cls, data: bytes, offset: int = 0) -> tuple["Log", int]:
        """Inverse of :meth:`encode`; returns the log and the offset just past it."""
        if len(data) < offset + 4:
            raise ValueError("truncated log body")
        count = int.from_bytes(data[offset:offset + 4], "big")
        offset += 4
        entries = []
        for _ in range(count):
            if len(data) < offset + 2:
                raise ValueError("truncated log entry")
            size = int.from_bytes(data[offset:offset + 2], "big")
            offset += 2
            if len(data) < offset + size:
                raise ValueError("truncated log entry")
            entries.append(data[offset:offset + size].decode())
            offset += size
        log = cls(entries)
        if len(log) != count:
            raise ValueError("duplicate entries in log body")
        return log, offset


GENESIS = Log()


class PartyId(NamedTuple):
    """Party identity. Validators sort before clients; clients sort by label."""

    rank: int
    index: int
    label: str

    @classmethod
    def validator(cls, index: int) -> "PartyId":
        return cls(0, index, "")

    @classmethod
    def client(cls, label: str) -> "PartyId":
        return cls(1, -1, label)

    @property
    def is_validator(self) -> bool:
        return self.rank == 0

    @property
    def is_client(self) -> bool:
        return self.rank == 1

    def __str__(self) -> str:
        return f"v{self.index}" if self.rank == 0 else self.label

    @classmethod
    def parse(cls, text: str) -> "PartyId":
        if len(text) > 1 and text[0] == "v" and text[1:].isdigit():
            return cls.validator(int(text[1:]))
        return cls.client(text)


class ValidatorModel(enum.Enum):
    ALWAYS_ON = "always_on"
    SLEEPY = "sleepy"


class ClientSleepiness(enum.Enum):
    ALWAYS_ON = "always_on"
    SLEEPY = "sleepy"


class ClientInteractivity(enum.Enum):
    SILENT = "silent"
    COMMUNICATING = "communicating"


@dataclass(frozen=True)
class ModelSelector:
    validator_model: ValidatorModel = ValidatorModel.ALWAYS_ON
    client_sleepiness: ClientSleepiness = ClientSleepiness.ALWAYS_ON
    client_interactivity: ClientInteractivity = ClientInteractivity.SILENT

    @property
    def communicating(self) -> bool:
        return self.client_interactivity is ClientInteractivity.COMMUNICATING

    @property
    def sleepy_validators(self) -> bool:
        return self.validator_model is ValidatorModel.SLEEPY

    @property
    def sleepy_clients(self) -> bool:
        return self.client_sleepiness is ClientSleepiness.SLEEPY


@dataclass(frozen=True)
class ResiliencePair:
    """Liveness and safety resilience as fractions of the validator set."""

    t_live: Fraction
    t_safe: Fraction

    def __post_init__(self):
        for name in ("t_live", "t_safe"):
            value = Fraction(getattr(self, name))
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
            object.__setattr__(self, name, value)


def adversary_fraction(f: int, awake_counts: Iterable[int]) -> Fraction:
    """f divided by the smallest awake-set size over the execution."""
    smallest = min(awake_counts)
    if smallest <= 0:
        raise ValueError("awake set is empty in some round")
    return Fraction(f, smallest)


class Event(NamedTuple):
    round: int
    kind: str
    src: str
    dst: str
    digest: int

    def line(self) -> str:
        return f"{self.round}|{self.kind}|{self.src}|{self.dst}|{self.digest:016x}"


class Receipt(NamedTuple):
    """A transaction reaching an honest party from the environment."""

    round: int
    tx: str
    party: PartyId


@dataclass
class Trace:
    """Complete record of one execution.

    Rounds run from 0 to ``horizon - 1``. ``client_logs[c][r]`` is LOG_c^r and
    ``client_awake[c][r]`` says whether the client ran at round r.
    """

    n: int
    horizon: int
    honest_clients: tuple[str, ...]
    honest_validators: tuple[int, ...]
    communicating: bool
    client_logs: dict[str, list[Log]]
    client_awake: dict[str, list[bool]]
    receipts: list[Receipt] = field(default_factory=list)
    events: list[Event] = field(default_factory=list)
    validator_awake: list[frozenset[int]] = field(default_factory=list)
    config: dict[str, str] = field(default_factory=dict)

    def log_at(self, client: str, rnd: int) -> Log:
        return self.client_logs[client][rnd]


class Witness(NamedTuple):
    client: str
    round: int
    log: Log

    def render(self) -> str:
        return f"{self.client}@{self.round}:[{','.join(self.log.entries)}]"


@dataclass(frozen=True)
class SafetyResult:
    first: Witness | None = None
    second: Witness | None = None

    @property
    def ok(self) -> bool:
        return self.first is None

    def render(self) -> str:
        if self.ok:
            return "SAFE"
        return "VIOLATION"


@dataclass(frozen=True)
class LivenessResult:
    tx: str | None = None
    received: int = -1
    client: str | None = None
    round: int = -1

    @property
    def ok(self) -> bool:
        return self.tx is None

    def render(self) -> str:
        return "LIVE" if self.ok else "VIOLATION"


SAFE = SafetyResult()
LIVE = LivenessResult()


@dataclass(frozen=True)
class Verdict:
    safety: SafetyResult
    liveness: LivenessResult

    @property
    def safe(self) -> bool:
        return self.safety.ok

    @property
    def live(self) -> bool:
        return self.liveness.ok

    def line(self) -> str:
        text = f"safety={self.safety.render()} liveness={self.liveness.render()}"
        evidence = []
        if not self.safety.ok:
            evidence.append(f"{self.safety.first.render()}~{self.safety.second.render()}")
        if not self.liveness.ok:
            lv = self.liveness
            evidence.append(f"tx={lv.tx},received={lv.received},client={lv.client},round={lv.round}")
        if evidence:
            text += " evidence=" + ";".join(evidence)
        return text


def is_prefix(a: Log | Sequence[str], b: Log | Sequence[str]) -> bool:
    """True iff ``a`` equals the first ``len(a)`` entries of ``b``."""
    ae = a.entries if isinstance(a, Log) else tuple(a)
    be = b.entries if isinstance(b, Log) else tuple(b)
    return len(ae) <= len(be) and be[:len(ae)] == ae


def is_consistent(a: Log | Sequence[str], b: Log | Sequence[str]) -> bool:
    return is_prefix(a, b) or is_prefix(b, a)


def check_safety(trace: Trace) -> SafetyResult:
    """Pairwise consistency of every honest client log at every round.

    A family of logs is pairwise consistent exactly when, sorted by length,
    each is a prefix of the next. The first adjacent failure is a witness.
    """
    first_seen: dict[Log, Witness] = {}
    for client in sorted(trace.honest_clients):
        for rnd, log in enumerate(trace.client_logs[client]):
            if log not in first_seen:
                first_seen[log] = Witness(client, rnd, log)
    ordered = sorted(first_seen, key=lambda lg: (len(lg), lg.entries))
    for shorter, longer in zip(ordered, ordered[1:]):
        if not is_prefix(shorter, longer):
            return SafetyResult(first_seen[shorter], first_seen[longer])
    return SAFE


def _awake_since(flags: list[bool]) -> list[int]:
    """For each round, the first round of the current awake run (or -1 if asleep)."""
    starts = []
    current = -1
    for rnd, awake in enumerate(flags):
        if not awake:
            current = -1
        elif current < 0:
            current = rnd
        starts.append(current)
    return starts


def check_liveness(trace: Trace, u: int) -> LivenessResult:
    """Every eligible transaction received before round r-u is in LOG_p^r for
    every honest client p awake throughout [r-u, r]."""
    honest_validators = set(trace.honest_validators)
    honest_clients = set(trace.honest_clients)
    first_receipt: dict[str, int] = {}
    for receipt in trace.receipts:
        party = receipt.party
        eligible = (party.is_validator and party.index in honest_validators) or (
            party.is_client and trace.communicating and party.label in honest_clients
        )
        if eligible and (receipt.tx not in first_receipt or receipt.round < first_receipt[receipt.tx]):
            first_receipt[receipt.tx] = receipt.round
    pending = sorted(first_receipt.items(), key=lambda item: (item[1], item[0]))
    for client in sorted(trace.honest_clients):
        logs = trace.client_logs[client]
        since = _awake_since(trace.client_awake[client])
        for rnd in range(u + 1, trace.horizon):
            if since[rnd] < 0 or since[rnd] > rnd - u:
                continue
            log = logs[rnd]
            for tx, received in pending:
                if received >= rnd - u:
                    break
                if tx not in log:
                    return LivenessResult(tx, received, client, rnd)
    return LIVE


def check(trace: Trace, u: int) -> Verdict:
    return Verdict(check_safety(trace), check_liveness(trace, u))

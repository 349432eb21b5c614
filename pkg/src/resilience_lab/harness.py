"""Scenario configuration, protocol wiring, runs, sweeps and trace files.

A scenario is a flat ``key=value`` text file (``#`` starts a comment)::

    protocol=frz
    n=6
    f=2
    delta=2
    horizon=64
    seed=7

:func:`run` builds the world the config describes, executes it and checks
the resulting trace against the protocol's declared latency.
"""

from __future__ import annotations

import csv
import dataclasses
import gzip
import io
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, TextIO

from .adversary import (
    AttackContext,
    AttackError,
    AttackScript,
    Expectation,
    FuzzStrategy,
    evenly_spaced,
    get_attack,
)
from .core import (
    ClientInteractivity,
    ClientSleepiness,
    Event,
    Log,
    ModelSelector,
    PartyId,
    Receipt,
    Trace,
    ValidatorModel,
    Verdict,
    adversary_fraction,
    check,
)
from .cryptosim import KeyRegistry, RandomOracle, SigningKey, forged_honest_signatures
from .dolevstrong import DsClient, DsValidator, ds_latency, period_length
from .gadgets import (
    FractionQueueClient,
    FreezeClient,
    GossipQueueClient,
    HeartbeatValidator,
    QuorumQueueClient,
    SigningValidator,
)
from .goldfish import ForkChoice, GoldfishClient, GoldfishValidator, goldfish_latency, slot_leader, slot_length
from .internal_protocol import (
    InternalClient,
    InternalValidator,
    default_quorum,
    epoch_length,
    internal_latency,
)
from .netsim import Node, Strategy, World, trace_hash

PROTOCOLS = ("internal", "frz", "liveq", "livestar", "livephi", "goldfish", "ds")
QUORUM_PROTOCOLS = ("internal", "frz", "liveq", "livestar")
SLEEPY_ENGINES = ("goldfish", "livephi")


class ConfigError(ValueError):
    def __init__(self, field: str, reason: str):
        super().__init__(f"{field}: {reason}")
        self.field = field
        self.reason = reason


# -- configuration ----------------------------------------------------------


_DEFAULT_MODELS = {
    "internal": ModelSelector(),
    "frz": ModelSelector(client_interactivity=ClientInteractivity.COMMUNICATING),
    "liveq": ModelSelector(client_sleepiness=ClientSleepiness.SLEEPY),
    "livestar": ModelSelector(client_sleepiness=ClientSleepiness.SLEEPY,
                              client_interactivity=ClientInteractivity.COMMUNICATING),
    "livephi": ModelSelector(validator_model=ValidatorModel.SLEEPY, client_sleepiness=ClientSleepiness.SLEEPY),
    "goldfish": ModelSelector(validator_model=ValidatorModel.SLEEPY, client_sleepiness=ClientSleepiness.SLEEPY),
    "ds": ModelSelector(client_interactivity=ClientInteractivity.COMMUNICATING),
}


@dataclass(frozen=True)
class ScenarioConfig:
    protocol: str
    n: int
    f: int = 0
    delta: int = 2
    horizon: int | None = None
    seed: int = 0
    q: int | None = None
    phi: Fraction | None = None
    kappa: int = 4
    fcr: str = "threshold"
    clients: int = 2
    adversary: str = "fuzz"
    attack: str | None = None
    attack_params: tuple[tuple[str, str], ...] = ()
    validator_model: ValidatorModel | None = None
    client_sleepiness: ClientSleepiness | None = None
    client_interactivity: ClientInteractivity | None = None
    sleep: str = "none"
    beta_max: Fraction | None = None
    txs: int | None = None
    tx_every: int = 1
    u: int | None = None
    # programmatic overrides, not part of the text format
    inputs: dict | None = field(default=None, compare=False, repr=False)
    schedule: list | None = field(default=None, compare=False, repr=False)

    @property
    def model(self) -> ModelSelector:
        base = _DEFAULT_MODELS.get(self.protocol, ModelSelector())
        return ModelSelector(
            self.validator_model or base.validator_model,
            self.client_sleepiness or base.client_sleepiness,
            self.client_interactivity or base.client_interactivity,
        )

    @property
    def quorum(self) -> int | None:
        if self.protocol not in QUORUM_PROTOCOLS:
            return None
        return self.q if self.q is not None else default_quorum(self.n)

    @property
    def phi_value(self) -> Fraction:
        return self.phi if self.phi is not None else Fraction(5, 8)

    @property
    def cadence(self) -> int:
        if self.protocol in QUORUM_PROTOCOLS:
            return epoch_length(self.delta)
        if self.protocol in SLEEPY_ENGINES:
            return slot_length(self.delta)
        return period_length(self.n, self.delta)

    @property
    def internal_u(self) -> int:
        return internal_latency(self.delta)

    @property
    def engine_u(self) -> int:
        return goldfish_latency(self.delta, self.kappa)

    @property
    def declared_u(self) -> int:
        if self.u is not None:
            return self.u
        d = self.delta
        return {
            "internal": self.internal_u,
            "frz": self.internal_u + d,
            "liveq": self.internal_u + 2 * d,
            "livestar": self.internal_u + 2 * d,
            "livephi": self.engine_u + 3 * d,
            "goldfish": self.engine_u,
            "ds": ds_latency(self.n, d),
        }[self.protocol]

    @property
    def rounds(self) -> int:
        if self.horizon is not None:
            return self.horizon
        if self.protocol in SLEEPY_ENGINES:
            return 60 * slot_length(self.delta)
        if self.protocol == "ds":
            return 5 * period_length(self.n, self.delta)
        return 16 * epoch_length(self.delta)

    @property
    def client_labels(self) -> tuple[str, ...]:
        return tuple(f"k{i + 1}" for i in range(self.clients))

    def attack_param(self, key: str, default: str | None = None) -> str | None:
        return dict(self.attack_params).get(key, default)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError("protocol", f"unknown protocol {self.protocol!r}; known: {', '.join(PROTOCOLS)}")
        if self.n < 1:
            raise ConfigError("n", "need at least one validator")
        if not 0 <= self.f <= self.n:
            raise ConfigError("f", f"must lie in [0, n={self.n}], got {self.f}")
        if self.delta < 1:
            raise ConfigError("delta", "must be at least 1")
        if self.rounds < 1:
            raise ConfigError("horizon", "must be positive")
        if self.clients < 1:
            raise ConfigError("clients", "need at least one client")
        if self.protocol in QUORUM_PROTOCOLS:
            if self.protocol == "liveq" and self.q is None:
                raise ConfigError("q", "liveq needs an explicit quorum q")
            if not 1 <= self.quorum <= self.n:
                raise ConfigError("q", f"quorum must lie in [1, n={self.n}]")
        elif self.q is not None:
            raise ConfigError("q", f"{self.protocol} has no quorum parameter")
        if self.phi is not None and not 0 < self.phi <= 1:
            raise ConfigError("phi", "must lie in (0, 1]")
        if self.kappa < 0:
            raise ConfigError("kappa", "must be non-negative")
        if self.fcr not in ("threshold", "maxchild"):
            raise ConfigError("fcr", "must be threshold or maxchild")
        if self.adversary not in ("fuzz", "passive"):
            raise ConfigError("adversary", "must be fuzz or passive")
        if self.tx_every < 1:
            raise ConfigError("tx_every", "must be at least 1")
        model = self.model
        if self.sleep not in ("none", "random"):
            raise ConfigError("sleep", "must be none or random")
        if self.sleep == "random" and not model.sleepy_validators:
            raise ConfigError("sleep", "random sleep schedules need the sleepy validator model")
        if self.schedule is not None and not model.sleepy_validators:
            if any(len(s) != self.n - self.f for s in self.schedule):
                raise ConfigError("schedule", "always-on validators must all be awake every round")
        if self.beta_max is not None and not 0 <= self.beta_max < 1:
            raise ConfigError("beta_max", "must lie in [0, 1)")
        if self.protocol in ("frz", "livestar", "ds") and not model.communicating:
            raise ConfigError("client_interactivity", f"{self.protocol} clients must be able to communicate")

    # text format

    def to_text(self) -> str:
        lines = [f"protocol={self.protocol}", f"n={self.n}", f"f={self.f}", f"delta={self.delta}"]
        if self.horizon is not None:
            lines.append(f"horizon={self.horizon}")
        lines.append(f"seed={self.seed}")
        optional = {
            "q": self.q, "phi": self.phi, "attack": self.attack, "beta_max": self.beta_max,
            "txs": self.txs, "u": self.u,
            "validator_model": self.validator_model and self.validator_model.value,
            "client_sleepiness": self.client_sleepiness and self.client_sleepiness.value,
            "client_interactivity": self.client_interactivity and self.client_interactivity.value,
        }
        for key, value in optional.items():
            if value is not None:
                lines.append(f"{key}={value}")
        defaults = ScenarioConfig(self.protocol, self.n)
        for key in ("kappa", "fcr", "clients", "adversary", "sleep", "tx_every"):
            value = getattr(self, key)
            if value != getattr(defaults, key):
                lines.append(f"{key}={value}")
        for key, value in self.attack_params:
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"


ATTACK_KEYS = ("beta", "epoch", "late_join")

_INT_KEYS = ("n", "f", "delta", "horizon", "seed", "q", "kappa", "clients", "txs", "tx_every", "u")
_FRACTION_KEYS = ("phi", "beta_max")
_ENUM_KEYS = {
    "validator_model": ValidatorModel,
    "client_sleepiness": ClientSleepiness,
    "client_interactivity": ClientInteractivity,
}
_STR_KEYS = ("protocol", "fcr", "adversary", "attack", "sleep")


def parse_config(text: str) -> ScenarioConfig:
    values: dict[str, object] = {}
    attack_params: list[tuple[str, str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in ATTACK_KEYS:
            attack_params.append((key, value))
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(key, f"expected an integer, got {value!r}") from None
        elif key in _FRACTION_KEYS:
            try:
                values[key] = Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise ConfigError(key, f"expected a fraction like 5/8, got {value!r}") from None
        elif key in _ENUM_KEYS:
            try:
                values[key] = _ENUM_KEYS[key](value)
            except ValueError:
                options = ", ".join(m.value for m in _ENUM_KEYS[key])
                raise ConfigError(key, f"expected one of {options}, got {value!r}") from None
        elif key in _STR_KEYS:
            values[key] = value
        else:
            raise ConfigError(key, "unknown key")
    for required in ("protocol", "n"):
        if required not in values:
            raise ConfigError(required, "missing")
    config = ScenarioConfig(**values, attack_params=tuple(attack_params))
    config.validate()
    return config


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


# -- protocol wiring --------------------------------------------------------


@dataclass
class Wiring:
    make_validator: Callable[[int, SigningKey], Node]
    make_client: Callable[[str], Node]


def wiring(config: ScenarioConfig, registry: KeyRegistry, oracle: RandomOracle) -> Wiring:
    n, d = config.n, config.delta
    q = config.quorum
    p = config.protocol
    if p in SLEEPY_ENGINES:
        rule = ForkChoice.max_child() if config.fcr == "maxchild" else ForkChoice.threshold(config.phi_value)

        def engine_client(label: str) -> GoldfishClient:
            return GoldfishClient(label, n, d, rule, config.kappa, registry, oracle)

    if p == "internal":
        return Wiring(lambda i, key: InternalValidator(i, n, d, q, key, registry),
                      lambda label: InternalClient(label, n, q, registry))
    if p == "frz":
        return Wiring(lambda i, key: InternalValidator(i, n, d, q, key, registry),
                      lambda label: FreezeClient(label, n, d, q, registry))
    if p == "liveq":
        return Wiring(lambda i, key: SigningValidator(i, n, d, q, key, registry),
                      lambda label: QuorumQueueClient(label, InternalClient(label, n, q, registry),
                                                      config.internal_u, q, registry))
    if p == "livestar":
        return Wiring(lambda i, key: InternalValidator(i, n, d, q, key, registry),
                      lambda label: GossipQueueClient(label, InternalClient(label, n, q, registry),
                                                      config.internal_u + d))
    if p == "goldfish":
        return Wiring(lambda i, key: GoldfishValidator(i, n, d, rule, key, registry, oracle), engine_client)
    if p == "livephi":
        return Wiring(lambda i, key: HeartbeatValidator(i, n, d, rule, key, registry, oracle),
                      lambda label: FractionQueueClient(label, engine_client(label), config.engine_u,
                                                        config.phi_value, d, registry))
    if p == "ds":
        return Wiring(lambda i, key: DsValidator(i, n, d, key, registry),
                      lambda label: DsClient(label, n, d, registry))
    raise ConfigError("protocol", f"unknown protocol {p!r}")


def default_inputs(config: ScenarioConfig, corrupted: frozenset[int]) -> dict[int, list[tuple[str, tuple[PartyId, ...]]]]:
    """Transactions at cadence boundaries, handed to every validator (or to the clients if none is honest).

    Transactions stop early enough that each one's latency window fits inside the horizon.
    """
    horizon = config.rounds
    cadence = config.cadence
    last = horizon - config.declared_u - cadence
    if config.f == config.n and config.model.communicating:
        recipients = tuple(PartyId.client(label) for label in config.client_labels)
    else:
        recipients = tuple(PartyId.validator(i) for i in range(config.n))
    inputs: dict[int, list[tuple[str, tuple[PartyId, ...]]]] = {}
    k = 0
    rnd = 0
    while rnd <= last and (config.txs is None or k < config.txs):
        inputs[rnd] = [(f"tx{k + 1}", recipients)]
        k += 1
        rnd += cadence * config.tx_every
    return inputs


def sleep_schedule(config: ScenarioConfig, corrupted: frozenset[int], oracle: RandomOracle) -> list[frozenset[int]]:
    """Random awake sets for the honest validators.

    At least ``ceil(f / beta_max)`` validators (corrupted ones included) are
    awake every round, and at least one honest one. Every honest validator is
    awake at the start of each broadcast period (Dolev-Strong) or when it leads
    a slot (slot-based engines).
    """
    from .netsim import random_sleep_schedule

    honest = [i for i in range(config.n) if i not in corrupted]
    f = len(corrupted)
    need = 1
    if config.beta_max is not None and f:
        need = max(need, math.ceil(f / config.beta_max) - f) if config.beta_max > 0 else len(honest)
    if need > len(honest):
        raise ConfigError("beta_max", f"{len(honest)} honest validators cannot keep beta <= {config.beta_max}")
    pinned: dict[int, list[int]] = {}
    if config.protocol == "ds":
        granularity = config.delta
        period = period_length(config.n, config.delta)
        for rnd in range(0, config.rounds, period):
            pinned[rnd] = honest
    else:
        granularity = slot_length(config.delta)
        for slot in range(config.rounds // granularity + 1):
            leader = slot_leader(oracle, slot, config.n)
            if leader not in corrupted:
                pinned[slot * granularity] = [leader]
    rng = random.Random(f"sleep|{config.protocol}|{config.seed}|{sorted(corrupted)}")
    return random_sleep_schedule(rng, config.n, config.rounds, honest, min_awake=need,
                                 granularity=granularity, pinned=pinned)


# -- running ----------------------------------------------------------------


@dataclass
class Outcome:
    """Everything one run produced: the world, its trace, the verdict and any pinned expectation."""

    config: ScenarioConfig
    world: World
    trace: Trace
    verdict: Verdict
    expectation: Expectation | None = None
    attack: AttackScript | None = None
    context: AttackContext | None = None

    @property
    def beta(self) -> Fraction:
        return adversary_fraction(len(self.world.corrupted), [len(w) for w in self.world.awake_history])

    @property
    def as_expected(self) -> bool:
        return self.expectation is None or self.expectation.matches(self.verdict)

    def forgeries(self) -> list[tuple[int, int]]:
        return forged_honest_signatures(self.world.registry)


def build(config: ScenarioConfig) -> tuple[World, AttackScript | None, AttackContext]:
    config.validate()
    model = config.model
    attack = None
    if config.attack:
        try:
            attack = get_attack(config.attack, **dict(config.attack_params))
            attack.check_target(config.protocol, model)
            corrupted = attack.choose_corrupted(config.n, config.f)
        except AttackError as exc:
            raise ConfigError(exc.field, exc.reason) from None
    else:
        corrupted = evenly_spaced(config.n, config.f)
    seed = config.seed
    registry = KeyRegistry(config.n, seed, corrupted)
    oracle = RandomOracle(seed)
    wires = wiring(config, registry, oracle)
    validators = {i: wires.make_validator(i, registry.key_for(i, i)) for i in range(config.n) if i not in corrupted}
    clients = {label: wires.make_client(label) for label in config.client_labels}
    ctx = AttackContext(
        protocol=config.protocol, n=config.n, delta=config.delta, horizon=config.rounds,
        corrupted=corrupted, clients=config.client_labels, registry=registry,
        make_puppet=wires.make_validator, cadence=config.cadence, latency=config.declared_u,
        seed=seed, quorum=config.quorum, oracle=oracle, model=model,
        phi=config.phi_value if config.protocol in SLEEPY_ENGINES else None,
        params=dict(config.attack_params),
    )
    inputs = config.inputs
    schedule = config.schedule
    client_awake = None
    if attack is not None:
        try:
            plan = attack.plan(ctx)
        except AttackError as exc:
            raise ConfigError(exc.field, exc.reason) from None
        strategy: Strategy = plan.strategy
        if inputs is None and plan.inputs is not None:
            inputs = plan.inputs
        if schedule is None:
            schedule = plan.validator_awake
        client_awake = plan.client_awake
    elif config.adversary == "fuzz" and corrupted:
        strategy = FuzzStrategy(ctx)
    else:
        strategy = Strategy()
    if inputs is None:
        inputs = default_inputs(config, corrupted)
    if schedule is None and config.sleep == "random":
        schedule = sleep_schedule(config, corrupted, oracle)
    if client_awake and not model.sleepy_clients:
        raise ConfigError("client_sleepiness", "this scenario puts clients to sleep")
    world = World(
        config.n, config.delta, config.rounds, registry, validators, clients,
        corrupted=corrupted, communicating=model.communicating, validator_awake=schedule,
        client_awake=client_awake, inputs=inputs, strategy=strategy, oracle=oracle,
        config={k: v for k, v in (line.split("=", 1) for line in config.to_text().splitlines())},
    )
    return world, attack, ctx


def execute(config: ScenarioConfig) -> Outcome:
    world, attack, ctx = build(config)
    trace = world.run()
    verdict = check(trace, config.declared_u)
    expectation = attack.expect(ctx) if attack is not None else None
    return Outcome(config, world, trace, verdict, expectation, attack, ctx)


def run(config: ScenarioConfig) -> tuple[Trace, Verdict]:
    outcome = execute(config)
    return outcome.trace, outcome.verdict


# -- sweeps -----------------------------------------------------------------


CSV_FIELDS = ("protocol", "f_or_beta", "client_model", "seeds", "safe_count", "live_count")


@dataclass(frozen=True)
class SweepCell:
    protocol: str
    f_or_beta: str
    client_model: str
    seeds: int
    safe_count: int
    live_count: int


@dataclass
class SweepResult:
    cells: list[SweepCell]

    def cell(self, f_or_beta) -> SweepCell:
        for c in self.cells:
            if c.f_or_beta == str(f_or_beta):
                return c
        raise KeyError(f_or_beta)

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for c in self.cells:
            writer.writerow([c.protocol, c.f_or_beta, c.client_model, c.seeds, c.safe_count, c.live_count])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepResult":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_FIELDS:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        cells = [
            SweepCell(row["protocol"], row["f_or_beta"], row["client_model"], int(row["seeds"]),
                      int(row["safe_count"]), int(row["live_count"]))
            for row in reader
        ]
        return cls(cells)


def client_model_name(model: ModelSelector) -> str:
    return f"{model.client_sleepiness.value}-{model.client_interactivity.value}"


def sweep(base: ScenarioConfig, f_range: Iterable[int], seeds: int,
          progress: Callable[[ScenarioConfig, Verdict], None] | None = None) -> SweepResult:
    f_values = list(f_range)
    if not f_values:
        raise ConfigError("f", "empty range")
    if seeds < 1:
        raise ConfigError("seeds", "need at least one seed")
    cells = []
    for f in f_values:
        safe = live = 0
        for i in range(seeds):
            config = base.replace(f=f, seed=base.seed + i)
            _, verdict = run(config)
            safe += verdict.safe
            live += verdict.live
            if progress is not None:
                progress(config, verdict)
        cells.append(SweepCell(base.protocol, str(f), client_model_name(base.model), seeds, safe, live))
    return SweepResult(cells)


def parse_range(text: str) -> range:
    """``"0..6"`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return range(int(lo), int(hi) + 1)
        value = int(text)
        return range(value, value + 1)
    except ValueError:
        raise ConfigError("f", f"expected a range like 0..6, got {text!r}") from None


# -- hierarchy --------------------------------------------------------------


def strengthened(config: ScenarioConfig) -> ScenarioConfig:
    """The same scenario with one model coordinate made stronger for the protocol."""
    model = config.model
    if not model.communicating:
        return config.replace(client_interactivity=ClientInteractivity.COMMUNICATING)
    if model.sleepy_validators:
        return config.replace(validator_model=ValidatorModel.ALWAYS_ON, sleep="none", schedule=None)
    raise ConfigError("model", "no coordinate of this model can be strengthened")


def hierarchy_check(config: ScenarioConfig, stronger: ScenarioConfig | None = None) -> bool:
    """Running under the stronger model must give an identical verdict and trace."""
    if stronger is None:
        stronger = strengthened(config)
    if stronger.n != config.n:
        raise ConfigError("n", f"runs disagree on n ({config.n} vs {stronger.n})")
    if stronger.protocol != config.protocol:
        raise ConfigError("protocol", "runs disagree on the protocol")
    weak = config
    if config.model.sleepy_validators and not stronger.model.sleepy_validators and config.schedule is None:
        full = [frozenset(i for i in range(config.n)) - evenly_spaced(config.n, config.f)] * config.rounds
        weak = config.replace(sleep="none", schedule=full)
    a, b = execute(weak), execute(stronger)
    return a.verdict == b.verdict and trace_hash(a.trace) == trace_hash(b.trace)


# -- trace files ------------------------------------------------------------


TRACE_MAGIC = "# resilience-lab trace v1"


def _open(path: str | Path, mode: str):
    path = str(path)
    if path.endswith(".gz"):
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8")


def dump_trace(trace: Trace, fh: TextIO) -> None:
    fh.write(TRACE_MAGIC + "\n")
    fh.write(f"meta|{trace.n}|{trace.horizon}|{int(trace.communicating)}|"
             f"{','.join(map(str, trace.honest_validators))}|{','.join(trace.honest_clients)}\n")
    for key, value in trace.config.items():
        fh.write(f"config|{key}={value}\n")
    for ev in trace.events:
        fh.write("event|" + ev.line() + "\n")
    for rc in trace.receipts:
        fh.write(f"receipt|{rc.round}|{rc.tx}|{rc.party}\n")
    for label in trace.honest_clients:
        flags = "".join("1" if a else "0" for a in trace.client_awake[label])
        fh.write(f"awake|{label}|{flags}\n")
        previous = None
        for rnd, log in enumerate(trace.client_logs[label]):
            if log != previous:
                fh.write(f"log|{label}|{rnd}|{','.join(log)}\n")
                previous = log
    for rnd, awake in enumerate(trace.validator_awake):
        fh.write(f"validators|{rnd}|{','.join(map(str, sorted(awake)))}\n")


def load_trace(fh: TextIO) -> Trace:
    first = fh.readline().rstrip("\n")
    if first != TRACE_MAGIC:
        raise ValueError("not a resilience-lab trace file")
    meta = None
    config: dict[str, str] = {}
    events: list[Event] = []
    receipts: list[Receipt] = []
    awake: dict[str, list[bool]] = {}
    changes: dict[str, list[tuple[int, Log]]] = {}
    validator_awake: list[frozenset[int]] = []
    for raw in fh:
        line = raw.rstrip("\n")
        kind, _, rest = line.partition("|")
        if kind == "meta":
            n, horizon, comm, vals, clients = rest.split("|")
            meta = (int(n), int(horizon), comm == "1",
                    tuple(int(v) for v in vals.split(",") if v), tuple(c for c in clients.split(",") if c))
        elif kind == "config":
            key, _, value = rest.partition("=")
            config[key] = value
        elif kind == "event":
            rnd, ek, src, dst, digest = rest.split("|")
            events.append(Event(int(rnd), ek, src, dst, int(digest, 16)))
        elif kind == "receipt":
            rnd, tx, party = rest.split("|")
            receipts.append(Receipt(int(rnd), tx, PartyId.parse(party)))
        elif kind == "awake":
            label, flags = rest.split("|")
            awake[label] = [c == "1" for c in flags]
        elif kind == "log":
            label, rnd, entries = rest.split("|")
            changes.setdefault(label, []).append((int(rnd), Log(e for e in entries.split(",") if e)))
        elif kind == "validators":
            rnd, members = rest.split("|")
            validator_awake.append(frozenset(int(v) for v in members.split(",") if v))
        elif line:
            raise ValueError(f"unrecognized trace line {line[:40]!r}")
    if meta is None:
        raise ValueError("trace file has no meta line")
    n, horizon, communicating, validators, clients = meta
    client_logs: dict[str, list[Log]] = {}
    for label in clients:
        logs: list[Log] = []
        current = Log()
        pending = list(changes.get(label, ()))
        for rnd in range(horizon):
            while pending and pending[0][0] == rnd:
                current = pending.pop(0)[1]
            logs.append(current)
        client_logs[label] = logs
    return Trace(n=n, horizon=horizon, honest_clients=clients, honest_validators=validators,
                 communicating=communicating, client_logs=client_logs, client_awake=awake,
                 receipts=receipts, events=events, validator_awake=validator_awake, config=config)


def save_trace(trace: Trace, path: str | Path) -> None:
    with _open(path, "w") as fh:
        dump_trace(trace, fh)


def read_trace(path: str | Path) -> Trace:
    with _open(path, "r") as fh:
        return load_trace(fh)

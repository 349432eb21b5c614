import random
from dataclasses import dataclass

import pytest

from resilience_lab.core import Log, PartyId
from resilience_lab.cryptosim import KeyRegistry
from resilience_lab.netsim import (
    AdvSend,
    HorizonExceeded,
    IllegalAdversaryAction,
    Payload,
    SilentClientSend,
    Strategy,
    World,
    delivery_gaps_ok,
    random_sleep_schedule,
    trace_hash,
)


@dataclass(frozen=True)
class Note(Payload):
    text: str
    kind = "note"

    def encode(self) -> bytes:
        return self.text.encode()


class Recorder:
    """Sends scripted notes and remembers what it saw, round by round."""

    def __init__(self, pid: PartyId, script: dict[int, list[str]] | None = None):
        self.party = pid
        self.script = script or {}
        self.seen: list[tuple[int, str, str]] = []
        self.steps: list[int] = []
        self.inputs: list[tuple[int, str]] = []

    def step(self, rnd, inbox, inputs):
        self.steps.append(rnd)
        self.inputs.extend((rnd, tx) for tx in inputs)
        self.seen.extend((rnd, str(m.sender), m.payload.text) for m in inbox)
        return [Note(t) for t in self.script.get(rnd, [])]

    def output(self):
        return Log(tx for _, tx in self.inputs)


def world(n=4, horizon=20, scripts=None, clients=("k1",), **kwargs):
    scripts = scripts or {}
    validators = {i: Recorder(PartyId.validator(i), scripts.get(i)) for i in range(n)
                  if i not in kwargs.get("corrupted", ())}
    cl = {c: Recorder(PartyId.client(c), scripts.get(c)) for c in clients}
    return World(n, kwargs.pop("delta", 2), horizon, KeyRegistry(n, 0), validators, cl, **kwargs)


def test_honest_send_arrives_within_delta():
    w = world(scripts={0: {3: ["hi"]}})
    w.run()
    for node in list(w.validators.values()) + list(w.clients.values()):
        assert any(r <= 5 and text == "hi" for r, _, text in node.seen)
    assert delivery_gaps_ok(w)


def test_silent_client_cannot_send():
    w = world(scripts={"k1": {0: ["x"]}})
    with pytest.raises(SilentClientSend):
        w.advance_round()


def test_communicating_client_may_send():
    w = world(scripts={"k1": {0: ["x"]}}, communicating=True)
    w.run()
    assert any(text == "x" for _, _, text in w.validators[0].seen)


class Rusher(Strategy):
    def __init__(self):
        self.observed = []

    def on_round(self, view):
        self.observed.extend((view.round, m.payload.text) for m in view.sent)
        return []


def test_adversary_sees_honest_messages_in_the_same_round():
    rusher = Rusher()
    w = world(scripts={0: {3: ["hi"]}}, corrupted=(3,), strategy=rusher)
    w.run()
    assert (3, "hi") in rusher.observed


def test_sleeping_party_gets_buffer_on_waking():
    schedule = [frozenset(range(4)) if not 2 <= r <= 9 else frozenset({0, 1, 2}) for r in range(20)]
    w = world(scripts={0: {2: ["late"]}}, validator_awake=schedule)
    w.run()
    node = w.validators[3]
    assert [r for r, _, t in node.seen if t == "late"] == [10]
    assert not any(2 <= r <= 9 for r in node.steps)


def test_asleep_validator_sends_nothing():
    schedule = [frozenset({0, 1, 2}) if r == 7 else frozenset(range(4)) for r in range(10)]
    w = world(horizon=10, scripts={3: {7: ["x"]}}, validator_awake=schedule)
    w.run()
    assert w.sent_count[PartyId.validator(3)] == 0


def test_empty_inbox():
    w = world(horizon=1)
    w.run()
    assert w.validators[0].seen == []


def test_same_round_ties_sort_by_sender_then_digest():
    scripts = {2: {0: ["b", "a"]}, 1: {0: ["z"]}}
    w = world(horizon=4, scripts=scripts)
    w.run()
    got = [(s, t) for r, s, t in w.validators[0].seen if r == 2]
    expected = sorted([("v1", "z"), ("v2", "a"), ("v2", "b")],
                      key=lambda st: (PartyId.parse(st[0]), Note(st[1]).digest))
    assert got == expected


def test_inputs_injected_and_round_advances():
    w = world(inputs={0: [("tx1", (PartyId.validator(0),))]})
    assert w.advance_round() == 1
    assert w.validators[0].inputs == [(0, "tx1")]
    assert w.receipts[0].tx == "tx1"


def test_horizon():
    w = world(horizon=3)
    w.run()
    with pytest.raises(HorizonExceeded):
        w.advance_round()


class Cheater(Strategy):
    def __init__(self, action):
        self.action = action

    def on_round(self, view):
        return [self.action] if view.round == 0 else []


@pytest.mark.parametrize("action", [
    AdvSend(PartyId.validator(0), Note("x")),
    AdvSend(PartyId.validator(3), Note("x"), delay=0),
])
def test_illegal_adversary_actions(action):
    w = world(corrupted=(3,), strategy=Cheater(action))
    with pytest.raises(IllegalAdversaryAction):
        w.advance_round()


def test_adversary_may_spoof_clients_and_delay_long():
    action = AdvSend(PartyId.client("k9"), Note("spoof"), (PartyId.validator(0),), delay=7)
    w = world(corrupted=(3,), strategy=Cheater(action))
    w.run()
    assert (7, "k9", "spoof") in w.validators[0].seen


class SlowHonest(Strategy):
    def delay(self, msg, recipient):
        return 5


def test_honest_delay_bound_enforced():
    w = world(scripts={0: {0: ["x"]}}, strategy=SlowHonest())
    with pytest.raises(IllegalAdversaryAction):
        w.advance_round()


def test_identical_runs_hash_identically():
    scripts = {0: {1: ["a"]}, 2: {4: ["b"]}}
    assert trace_hash(world(scripts=scripts).run()) == trace_hash(world(scripts=scripts).run())
    assert trace_hash(world(scripts=scripts).run()) != trace_hash(world(scripts={0: {1: ["c"]}}).run())


class TestSleepSchedule:
    def test_deterministic(self):
        a = random_sleep_schedule(random.Random("s"), 8, 60, range(6), min_awake=3)
        b = random_sleep_schedule(random.Random("s"), 8, 60, range(6), min_awake=3)
        assert a == b and len(a) == 60

    def test_steady_minimum_and_pins(self):
        rng = random.Random(5)
        pinned = {r: {r // 6 % 6} for r in range(0, 120, 6)}
        sched = random_sleep_schedule(rng, 8, 120, range(6), min_awake=2, p_sleep=0.5,
                                      granularity=6, pinned=pinned)
        for r in range(6, 120):
            assert len(sched[r] & sched[r - 6]) >= 2
        for r, members in pinned.items():
            assert members <= sched[r]

    def test_changes_only_at_block_boundaries(self):
        sched = random_sleep_schedule(random.Random(1), 6, 50, range(6), min_awake=1, p_sleep=0.4, granularity=5)
        for r in range(50):
            if r % 5:
                assert sched[r] == sched[r - 1]

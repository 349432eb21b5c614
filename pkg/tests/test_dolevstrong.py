import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilience_lab.core import Log, PartyId
from resilience_lab.cryptosim import ADVERSARY, KeyRegistry
from resilience_lab.dolevstrong import (
    BOTTOM,
    DsClient,
    DsValidator,
    SigChain,
    bg_output,
    ds_latency,
    period_length,
    validate_chain,
)
from resilience_lab.harness import ScenarioConfig, execute
from resilience_lab.netsim import Message

N, DELTA = 4, 2


@pytest.fixture
def reg():
    return KeyRegistry(N, 0, corrupted=frozenset({3}))


def two_chain(reg, value=("tx1",)):
    return SigChain.start(0, value, reg.key_for(0, 0)).extended(reg.key_for(1, 1))


def feed(node, rnd, payloads):
    return node.step(rnd, [Message(PartyId.validator(0), p, rnd - 1) for p in payloads], [])


def test_timing_constants():
    assert period_length(N, DELTA) == 16
    assert ds_latency(N, DELTA) == 32


class TestValidate:
    def test_client_deadline_for_two_signatures(self, reg):
        chain = two_chain(reg)
        assert validate_chain(chain, 3 * DELTA, "client", 0, N, DELTA, reg)
        assert not validate_chain(chain, 3 * DELTA + 1, "client", 0, N, DELTA, reg)

    def test_validator_deadline(self, reg):
        chain = two_chain(reg)
        assert validate_chain(chain, 4 * DELTA, "validator", 0, N, DELTA, reg)
        assert not validate_chain(chain, 4 * DELTA + 1, "validator", 0, N, DELTA, reg)

    def test_duplicate_signer(self, reg):
        chain = SigChain.start(0, ("tx1",), reg.key_for(0, 0))
        doubled = SigChain(chain.instance, chain.leader, chain.value_digest, chain.pairs * 2, chain.value)
        assert not validate_chain(doubled, 1, "client", 0, N, DELTA, reg)

    def test_wrong_leader(self, reg):
        chain = SigChain.start(1, ("tx1",), reg.key_for(0, 0))
        assert not validate_chain(chain, 1, "client", 0, N, DELTA, reg)

    def test_unknown_role(self, reg):
        with pytest.raises(ValueError):
            validate_chain(two_chain(reg), 1, "observer", 0, N, DELTA, reg)

    def test_wire_round_trip(self, reg):
        chain = two_chain(reg)
        back = SigChain.from_wire(chain.wire())
        assert back.pairs == chain.pairs and back.header() == chain.header()

    @settings(max_examples=300)
    @given(st.binary(max_size=60))
    def test_random_wire_bytes_never_validate(self, data):
        reg = KeyRegistry(N, 0)
        try:
            chain = SigChain.from_wire(data)
        except ValueError:
            return
        assert not validate_chain(chain, 1, "validator", 0, N, DELTA, reg)

    @settings(max_examples=200)
    @given(st.data())
    def test_mutated_chains_fail(self, data):
        reg = KeyRegistry(N, 0)
        wire = bytearray(two_chain(reg).wire())
        pos = data.draw(st.integers(0, len(wire) - 1))
        wire[pos] ^= data.draw(st.integers(1, 255))
        try:
            chain = SigChain.from_wire(bytes(wire))
        except ValueError:
            return
        assert not validate_chain(chain, 1, "validator", 0, N, DELTA, reg)


class TestValidator:
    def make(self, reg, index=2):
        return DsValidator(index, N, DELTA, reg.key_for(index, index), reg)

    def test_leader_starts_one_chain(self, reg):
        v = self.make(reg, 0)
        out = v.step(0, [], ["tx1"])
        chains = [p for p in out if isinstance(p, SigChain)]
        assert len(chains) == 1 and chains[0].signers == (0,) and chains[0].value == ("tx1",)

    def test_extends_fresh_chain(self, reg):
        v = self.make(reg)
        out = feed(v, 2, [two_chain(reg)])
        assert [p.signers for p in out] == [(0, 1, 2)]

    def test_does_not_sign_same_value_twice(self, reg):
        v = self.make(reg)
        feed(v, 2, [two_chain(reg)])
        again = SigChain.start(0, ("tx1",), reg.key_for(0, 0))
        assert feed(v, 3, [again]) == []

    def test_late_chain_ignored(self, reg):
        v = self.make(reg)
        assert feed(v, 4 * DELTA + 1, [two_chain(reg)]) == []


class TestClient:
    def make(self, reg):
        return DsClient("k1", N, DELTA, reg)

    def test_accepts_and_relays_one_chain(self, reg):
        c = self.make(reg)
        chain = SigChain.start(0, ("tx1",), reg.key_for(0, 0))
        assert feed(c, DELTA, [chain]) == [chain]
        assert list(c.accepted[0].values()) == [("tx1",)]

    def test_late_chain_not_relayed(self, reg):
        c = self.make(reg)
        chain = SigChain.start(0, ("tx1",), reg.key_for(0, 0))
        assert feed(c, DELTA + 1, [chain]) == []

    def test_two_values_then_bottom(self):
        reg = KeyRegistry(N, 0, corrupted=frozenset({0}))
        c = self.make(reg)
        key = reg.key_for(0, ADVERSARY)
        feed(c, 1, [SigChain.start(0, ("a",), key), SigChain.start(0, ("b",), key)])
        assert len(c.accepted[0]) == 2
        for rnd in range(2, 17):
            c.step(rnd, [], [])
        assert c.outputs[0] is BOTTOM


@pytest.mark.parametrize("values,expected", [
    ([("v",)], ("v",)),
    ([], BOTTOM),
    ([("v",), ("w",)], BOTTOM),
])
def test_bg_output(values, expected):
    assert bg_output(values) == expected


def test_one_honest_validator_is_enough():
    outcome = execute(ScenarioConfig("ds", 4, f=3, seed=1))
    assert outcome.verdict.safe and outcome.verdict.live


def test_silent_corrupted_leaders_leave_logs_unchanged():
    # validators 0..2 are corrupted and silent; only v3 proposes
    honest = PartyId.validator(3)
    outcome = execute(ScenarioConfig("ds", 4, f=3, adversary="passive", inputs={1: [("tx1", (honest,))]}))
    logs = outcome.trace.client_logs["k1"]
    period = period_length(4, 2)
    assert logs[2 * period - 1] == Log() and logs[2 * period] == Log(["tx1"])
    assert logs[-1] == Log(["tx1"])

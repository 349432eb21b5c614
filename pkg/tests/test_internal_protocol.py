import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from resilience_lab.core import GENESIS, Log, PartyId
from resilience_lab.cryptosim import ADVERSARY, KeyRegistry, Signature
from resilience_lab.harness import ScenarioConfig, build, execute
from resilience_lab.internal_protocol import (
    GENESIS_CERT,
    Certificate,
    InternalClient,
    Reject,
    commit_digest,
    consume,
    default_quorum,
    forge_certificate,
    internal_latency,
    leader_of,
)

ALL4 = tuple(PartyId.validator(i) for i in range(4))


def one_tx_run(horizon=9, **kwargs):
    config = ScenarioConfig("internal", 4, q=3, horizon=horizon, inputs={0: [("tx1", ALL4)]}, **kwargs)
    return execute(config)


def test_declared_latency_and_quorum():
    assert internal_latency(2) == 16
    assert default_quorum(6) == 4 and default_quorum(5) == 3
    assert [leader_of(e, 4) for e in range(5)] == [0, 1, 2, 3, 0]


def test_single_tx_commits_in_first_epoch():
    outcome = one_tx_run()
    logs = outcome.trace.client_logs["k1"]
    assert logs[7] == GENESIS and logs[8] == Log(["tx1"])
    assert all(v.committed[0] == (0, Log(["tx1"])) for v in outcome.world.validators.values())


def test_client_witness_after_first_commit():
    client = one_tx_run().world.clients["k1"]
    cert = client.witness()
    assert (cert.epoch, cert.log, len(cert.sigs)) == (0, Log(["tx1"]), 3)
    assert consume(cert, 3, client.registry) == client.output()


def test_equivocating_leader_delays_commit_by_one_epoch():
    outcome = execute(ScenarioConfig("internal", 4, q=3, f=1, attack="equivocate_leader"))
    assert outcome.verdict.safe
    for v in outcome.world.validators.values():
        assert all(epoch != 0 for epoch, _ in v.committed)
        assert v.committed[0] == (1, Log(["tx1"]))


def test_fresh_client_consumes_to_genesis():
    reg = KeyRegistry(4, 0)
    client = InternalClient("k1", 4, 3, reg)
    assert client.witness() == GENESIS_CERT
    assert consume(client.witness(), 3, reg) == GENESIS


@pytest.fixture
def reg():
    return KeyRegistry(4, 0, corrupted=frozenset({3}))


def honest_cert(reg, log, signers, epoch=2):
    cd = commit_digest(epoch, log.digest)
    return Certificate(epoch, log, tuple(reg.key_for(i, i).sign_digest(cd) for i in signers))


class TestConsume:
    def test_valid_certificate(self, reg):
        log = Log(["a", "b"])
        assert consume(honest_cert(reg, log, [0, 1, 2]), 3, reg) == log

    def test_too_few_signers(self, reg):
        with pytest.raises(Reject) as exc:
            consume(honest_cert(reg, Log(["a"]), [0, 1]), 3, reg)
        assert exc.value.reason == "too-few-signers"

    def test_forged_honest_signature(self, reg):
        cert = honest_cert(reg, Log(["a"]), [0, 1])
        bad = Certificate(cert.epoch, cert.log, cert.sigs + (Signature(2, 12345),))
        with pytest.raises(Reject) as exc:
            consume(bad, 3, reg)
        assert exc.value.reason == "bad-signature"

    def test_duplicate_signer(self, reg):
        cert = honest_cert(reg, Log(["a"]), [0, 1])
        with pytest.raises(Reject) as exc:
            consume(Certificate(cert.epoch, cert.log, cert.sigs + cert.sigs[:1]), 2, reg)
        assert exc.value.reason == "duplicate-signer"

    def test_digest_field_mismatch(self, reg):
        cert = honest_cert(reg, Log(["a"]), [0, 1, 2])
        with pytest.raises(Reject) as exc:
            consume(Certificate(cert.epoch, cert.log, cert.sigs, log_digest=cert.log.digest ^ 1), 3, reg)
        assert exc.value.reason == "bad-signature"

    def test_forged_by_quorum_of_corrupted(self):
        reg = KeyRegistry(4, 0, corrupted=frozenset({1, 2, 3}))
        keys = [reg.key_for(i, ADVERSARY) for i in (1, 2, 3)]
        log = Log(["anything"])
        assert consume(forge_certificate(9, log, keys), 3, reg) == log

    def test_wire_round_trip(self, reg):
        cert = honest_cert(reg, Log(["a", "b"]), [0, 1, 2])
        assert consume(cert.encode(), 3, reg) == cert.log
        assert Certificate.decode(cert.encode()) == Certificate(cert.epoch, cert.log, cert.sigs, cert.log.digest)

    @settings(max_examples=300)
    @given(st.binary(max_size=80))
    def test_random_bytes_only_raise_reject(self, data):
        reg = KeyRegistry(4, 0)
        try:
            consume(data, 3, reg)
        except Reject as exc:
            assert exc.reason in ("malformed", "duplicate-signer", "bad-signature", "too-few-signers")

    @settings(max_examples=200)
    @given(st.data())
    def test_mutated_valid_certificates_are_rejected(self, data):
        reg = KeyRegistry(4, 0)
        wire = bytearray(honest_cert(reg, Log(["a", "b"]), [0, 1, 2]).encode())
        pos = data.draw(st.integers(0, len(wire) - 1))
        wire[pos] ^= data.draw(st.integers(1, 255))
        try:
            log = consume(bytes(wire), 3, reg)
        except Reject:
            return
        # flipping a byte in a tx name keeps the structure but must break the signatures
        pytest.fail(f"mutated certificate accepted as {log}")


def test_witness_round_trip_every_round():
    world, _, _ = build(ScenarioConfig("internal", 4, q=3, f=1, horizon=48))
    checked = []

    def audit(rnd, sent):
        for client in world.clients.values():
            assert consume(client.witness(), 3, client.registry) == client.output()
        checked.append(rnd)

    world.hooks.append(audit)
    world.run()
    assert len(checked) == 48

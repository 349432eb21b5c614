"""Idealized signatures and a shared random oracle.

Signatures are capabilities backed by a per-world secret: a tag is a keyed
hash of (signer, payload digest), and only holders of a :class:`SigningKey`
can mint one. Nothing here is real cryptography.
"""

from __future__ import annotations

import hashlib
from typing import NamedTuple

from .core import digest64


def u64(value: int) -> bytes:
    return value.to_bytes(8, "big")


def u16(value: int) -> bytes:
    return value.to_bytes(2, "big")


class ForgeryAttempt(Exception):
    """A caller tried to sign for a validator whose key it does not hold."""


class Signature(NamedTuple):
    signer: int
    tag: int


ADVERSARY = "adversary"


class KeyRegistry:
    """Holds every validator key of one world and records what was signed."""

    def __init__(self, n: int, seed: int, corrupted: frozenset[int] = frozenset()):
        self.n = n
        self.corrupted = frozenset(corrupted)
        self._secret = hashlib.blake2b(b"keys" + seed.to_bytes(8, "big", signed=True), digest_size=32).digest()
        self.issued: set[tuple[int, int]] = set()
        self.issued_honest: set[tuple[int, int]] = set()
        # (signer, digest) pairs that passed verification for an honest signer
        self.verified_honest: set[tuple[int, int]] = set()
        self._cache: dict[tuple[int, int], int] = {}

    def _tag(self, signer: int, payload_digest: int) -> int:
        key = (signer, payload_digest)
        tag = self._cache.get(key)
        if tag is None:
            raw = hashlib.blake2b(u16(signer) + u64(payload_digest), key=self._secret, digest_size=8).digest()
            tag = int.from_bytes(raw, "big")
            self._cache[key] = tag
        return tag

    def key_for(self, signer: int, caller: object) -> "SigningKey":
        """Hand out a signing capability.

        ``caller`` is either the validator index itself (an honest node) or
        :data:`ADVERSARY`, which may only obtain keys of corrupted validators.
        """
        if not 0 <= signer < self.n:
            raise ForgeryAttempt(f"no validator with index {signer}")
        if caller == ADVERSARY:
            if signer not in self.corrupted:
                raise ForgeryAttempt(f"adversary cannot sign for honest validator v{signer}")
        elif caller != signer:
            raise ForgeryAttempt(f"party {caller!r} cannot sign for v{signer}")
        return SigningKey(self, signer, caller == ADVERSARY)

    def sign(self, signer: int, payload: bytes, caller: object) -> Signature:
        return self.key_for(signer, caller).sign(payload)

    def verify(self, signer: object, payload: bytes, sig: Signature) -> bool:
        if not isinstance(signer, int) or isinstance(signer, bool) or not 0 <= signer < self.n:
            return False
        return self.verify_digest(signer, digest64(payload), sig)

    def verify_digest(self, signer: int, payload_digest: int, sig: Signature) -> bool:
        if sig.signer != signer or not 0 <= signer < self.n:
            return False
        if sig.tag != self._tag(signer, payload_digest):
            return False
        if signer not in self.corrupted:
            self.verified_honest.add((signer, payload_digest))
        return True


class SigningKey:
    __slots__ = ("registry", "signer", "adversarial")

    def __init__(self, registry: KeyRegistry, signer: int, adversarial: bool):
        self.registry = registry
        self.signer = signer
        self.adversarial = adversarial

    def sign(self, payload: bytes) -> Signature:
        return self.sign_digest(digest64(payload))

    def sign_digest(self, payload_digest: int) -> Signature:
        reg = self.registry
        reg.issued.add((self.signer, payload_digest))
        if not self.adversarial:
            reg.issued_honest.add((self.signer, payload_digest))
        return Signature(self.signer, reg._tag(self.signer, payload_digest))


class RandomOracle:
    """Common randomness: a keyed hash of (seed, input) with a cache."""

    def __init__(self, seed: int):
        self.seed = seed
        self._key = hashlib.blake2b(b"oracle" + seed.to_bytes(8, "big", signed=True), digest_size=32).digest()
        self._cache: dict[bytes, int] = {}

    def __call__(self, data: bytes) -> int:
        value = self._cache.get(data)
        if value is None:
            value = int.from_bytes(hashlib.blake2b(data, key=self._key, digest_size=8).digest(), "big")
            self._cache[data] = value
        return value

    def unit(self, data: bytes) -> float:
        return self(data) / 2.0**64


def forged_honest_signatures(registry: KeyRegistry,
                             observed: list[tuple[int, int, Signature]] | None = None) -> list[tuple[int, int]]:
    """Audit: verifying signatures of honest signers on digests they never signed.

    ``observed`` holds (signer, payload digest, signature) triples; by default
    every honest signature the registry has verified so far is audited.
    Returns the offending (signer, digest) pairs.
    """
    if observed is None:
        return sorted(registry.verified_honest - registry.issued_honest)
    bad = []
    for signer, payload_digest, sig in observed:
        if signer in registry.corrupted:
            continue
        if registry.verify_digest(signer, payload_digest, sig) and (signer, payload_digest) not in registry.issued_honest:
            bad.append((signer, payload_digest))
    return bad

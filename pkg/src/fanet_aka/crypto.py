"""Cryptographic substrate: hash, nonces, simulated PUF, fuzzy extractor.

Everything here is deterministic given an injected ``random.Random``
handle, which is what makes scenario runs and golden transcripts
reproducible. The hash is SHA-1 because the whole bit-accounting contract
of the wire format is built around a 160-bit digest; this is a simulation
fidelity choice, not an endorsement of SHA-1 for new designs.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass

from .bits import BitString, concat
from .errors import WidthMismatch

DIGEST_BITS = 160
NONCE_BITS = 128
ID_BITS = 160
TS_BITS = 32
CHALLENGE_BITS = 160
PUF_SEED_BITS = 256


def sha1_digest(data: BitString) -> BitString:
    """160-bit digest of a bit string.

    The input is right-padded with zero bits to a byte boundary before
    hashing (see :meth:`BitString.to_bytes`); all parties share this rule,
    so digests computed from algebraically equal inputs match.
    """
    return BitString.from_bytes(hashlib.sha1(data.to_bytes()).digest())


def hash_parts(*parts: BitString) -> BitString:
    """Digest of the concatenation of ``parts`` (the protocol's h(a || b))."""
    return sha1_digest(concat(parts))


def random_nonce(rng: random.Random) -> BitString:
    """Fresh 128-bit nonce from the injected generator."""
    return BitString.random(NONCE_BITS, rng)


def lift(value: BitString, width: int = DIGEST_BITS) -> BitString:
    """Zero-extend a value (typically a nonce) to the 160-bit field width.

    Nonces are 128 bits on the wire accounting but always enter hashes and
    XOR masks zero-extended to 160 bits, so both sides of the protocol
    concatenate identical byte sequences.
    """
    return value.zext(width)


@dataclass
class PufDevice:
    """Simulated physical unclonable function.

    Modeled as a keyed pseudorandom function of a per-device 256-bit seed
    and the challenge; ideal (noise-free) by default. ``noise_rate`` flips
    each response bit independently and exists only for experimentation.
    """

    seed: BitString
    noise_rate: float = 0.0

    def __post_init__(self):
        if self.seed.width != PUF_SEED_BITS:
            raise WidthMismatch(f"device seed must be {PUF_SEED_BITS} bits")
        if not 0.0 <= self.noise_rate <= 1.0:
            raise ValueError("noise_rate must be in [0, 1]")

    @classmethod
    def generate(cls, rng: random.Random, noise_rate: float = 0.0) -> "PufDevice":
        return cls(BitString.random(PUF_SEED_BITS, rng), noise_rate)

    def eval(self, challenge: BitString, rng: random.Random | None = None) -> BitString:
        """Response to a 160-bit challenge.

        Deterministic when ``noise_rate`` is zero; the rng is consumed only
        when noise is enabled, so noiseless runs never disturb the shared
        random stream.
        """
        if challenge.width != CHALLENGE_BITS:
            raise WidthMismatch(f"challenge must be {CHALLENGE_BITS} bits")
        raw = hashlib.sha1(self.seed.to_bytes() + challenge.to_bytes()).digest()
        response = BitString.from_bytes(raw)
        if self.noise_rate > 0.0:
            if rng is None:
                raise ValueError("noisy evaluation needs an rng handle")
            flips = 0
            for i in range(response.width):
                if rng.random() < self.noise_rate:
                    flips |= 1 << i
            response = BitString(response.width, response.value ^ flips)
        return response


@dataclass(frozen=True)
class FeParams:
    """Code-offset fuzzy extractor parameters (repetition code).

    ``key_bits`` random bits are expanded by repeating each bit
    ``repetition`` times; the biometric width is their product and up to
    ``tolerance`` flipped bits per block are corrected by majority vote.
    """

    key_bits: int = 32
    repetition: int = 5

    def __post_init__(self):
        if self.key_bits <= 0:
            raise ValueError("key_bits must be positive")
        if self.repetition <= 0 or self.repetition % 2 == 0:
            raise ValueError("repetition must be a positive odd integer")

    @property
    def bio_width(self) -> int:
        return self.key_bits * self.repetition

    @property
    def tolerance(self) -> int:
        return self.repetition // 2


def _expand(word: BitString, r: int) -> BitString:
    """Repetition-code codeword: every bit of ``word`` repeated ``r`` times."""
    block = (1 << r) - 1
    value = 0
    for i in range(word.width):
        value = (value << r) | (block if word.bit(i) else 0)
    return BitString(word.width * r, value)


def fe_gen(bio: BitString, params: FeParams, rng: random.Random) -> tuple[BitString, BitString]:
    """Enroll a biometric: returns (key digest sigma, public helper tau).

    tau = codeword(w) XOR bio for a fresh random word w; sigma = h(w).
    tau is safe to publish: without a close biometric it reveals nothing
    usable about sigma.
    """
    if bio.width != params.bio_width:
        raise WidthMismatch(f"biometric must be {params.bio_width} bits")
    word = BitString.random(params.key_bits, rng)
    tau = _expand(word, params.repetition) ^ bio
    return sha1_digest(word), tau


def fe_rep(bio: BitString, tau: BitString, params: FeParams) -> BitString:
    """Reproduce the enrolled key digest from a noisy biometric reading.

    Majority-decodes each repetition block of tau XOR bio. Guaranteed to
    return enrollment's sigma whenever every block of the error pattern has
    at most ``params.tolerance`` set bits; beyond that it silently yields a
    different digest, which downstream credential checks reject.
    """
    if bio.width != params.bio_width or tau.width != params.bio_width:
        raise WidthMismatch(f"biometric and helper must be {params.bio_width} bits")
    noisy = tau ^ bio
    r = params.repetition
    word = 0
    for i in range(params.key_bits):
        ones = noisy.slice(i * r, (i + 1) * r).value.bit_count()
        word = (word << 1) | (1 if ones > r // 2 else 0)
    return sha1_digest(BitString(params.key_bits, word))

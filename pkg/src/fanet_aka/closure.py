"""Bounded knowledge-closure engine for the Dolev-Yao adversary.

Mechanizes "computationally infeasible to derive" as non-membership in
the set of terms an adversary can build from its observations with the
protocol's own algebra: hashing, XOR, concatenation, and slicing at
protocol field boundaries. The engine is *sound* (every member is
genuinely derivable and can be justified by an explicit trace) but
deliberately incomplete beyond its bounds:

* XOR derivability is decided exactly by linear algebra over GF(2)
  instead of materializing the exponential combination set. Only
  observation-derived terms (givens, slices, lifts, zero constants)
  generate the span; digests minted by the engine's own hash rules do
  not, because enough unrelated one-way digests span the whole field
  and would make every value a vacuous "XOR combination".
* Hash-of-concatenation is explored over field-shaped tuples (sequences
  of 160-bit terms, optionally suffixed by one 32-bit timestamp), the
  shapes the protocol itself uses, under a configurable tuple budget
  and one composition level deep.
* Single-term hash chains, slicing and zero-extension iterate to the
  configured depth.

This is an engineering proxy for the informal infeasibility arguments,
not a cryptographic proof, and is documented as such.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from itertools import product

from .bits import BitString

#: Field boundaries used by the slicing rule, keyed by total width.
#: 672-bit payloads share one layout; the 512-bit payload has its
#: timestamp third; 320-bit registration payloads are two field elements.
SLICE_LAYOUTS = {
    672: (160, 160, 160, 160, 32),
    512: (160, 160, 32, 160),
    320: (160, 160),
}

FIELD_BITS = 160
TS_FIELD_BITS = 32

#: Widths whose all-zero constants the adversary is assumed to know.
ZERO_WIDTHS = (32, 128, 160)

#: Tuple shapes explored by the hash-of-concatenation rule: ("pure", m)
#: is m field elements, ("ts", m) is m field elements followed by one
#: timestamp. Smallest shapes come first so the budget starves only the
#: widest enumerations. Together these cover every hash input shape the
#: protocol uses.
_PLANS = (("pure", 2), ("ts", 1), ("pure", 3), ("ts", 2), ("ts", 3), ("ts", 4))


def _key(term: BitString) -> tuple[int, int]:
    return (term.width, term.value)


@dataclass
class Closure:
    """Result of a closure computation; supports exact membership tests."""

    depth: int
    budget: int
    terms: dict = field(default_factory=dict)     # (width, value) -> trace
    bulk: set = field(default_factory=set)        # 160-bit digest values
    bulk_count: int = 0
    enumerated_shapes: list = field(default_factory=list)
    atoms: list = field(default_factory=list)     # tuple inputs at enumeration time

    def __contains__(self, term: BitString) -> bool:
        if _key(term) in self.terms:
            return True
        if term.width == FIELD_BITS and term.value in self.bulk:
            return True
        return self._xor_subset(term) is not None

    def derivation(self, term: BitString) -> list[str] | None:
        """Human-readable trace for a member, None for non-members."""
        key = _key(term)
        if key in self.terms:
            return self._trace_lines(key)
        if term.width == FIELD_BITS and term.value in self.bulk:
            parts = self._find_preimage(term.value)
            return [f"hash-concat({', '.join(p.hex() for p in parts)}) "
                    f"= {term.hex()}"]
        subset = self._xor_subset(term)
        if subset is not None:
            return [f"xor({', '.join(t.hex() for t in subset)}) = {term.hex()}"]
        return None

    # -- internals ---------------------------------------------------------

    def _materialized(self) -> list[BitString]:
        return [BitString(w, v) for (w, v) in self.terms]

    def _xor_subset(self, target: BitString) -> list[BitString] | None:
        """GF(2) span query over the observation-derived terms.

        Narrower terms join lifted, which is legitimate because the
        adversary holds the zero constants; wider terms are excluded
        because no rule truncates. Digest outputs produced by the hash
        rules are deliberately not span generators: enough unrelated
        one-way digests span the whole field, which would make every
        value an "XOR combination" without corresponding to any attack
        knowledge. They still answer exact membership queries.
        Returns the contributing subset or None.
        """
        pivots: dict[int, tuple[int, set]] = {}  # msb position -> (vector, keys)
        for key, (rule, _) in self.terms.items():
            if key[0] > target.width or rule == "hash":
                continue
            v, contributors = key[1], {key}
            while v:
                msb = v.bit_length()
                if msb in pivots:
                    pv, pm = pivots[msb]
                    v ^= pv
                    contributors ^= pm
                else:
                    pivots[msb] = (v, contributors)
                    break
        vec, mask = target.value, set()
        while vec:
            msb = vec.bit_length()
            if msb not in pivots:
                return None
            pv, pm = pivots[msb]
            vec ^= pv
            mask ^= pm
        if not mask:
            return None  # the zero string answers via the zero constants
        return [BitString(w, v) for (w, v) in sorted(mask)]

    def _trace_lines(self, key, depth: int = 0) -> list[str]:
        rule, parents = self.terms[key]
        term_hex = BitString(*key).hex()
        if rule == "given":
            return [f"given {term_hex}"]
        if depth > 6:
            return [f"{rule}(...) = {term_hex}"]
        lines = []
        for p in parents:
            lines.extend(self._trace_lines(_key(p), depth + 1))
        args = ", ".join(p.hex() for p in parents)
        lines.append(f"{rule}({args}) = {term_hex}")
        return lines

    def _find_preimage(self, digest_value: int) -> list[BitString]:
        atoms160, atoms32 = _atoms(self.atoms)
        sha = hashlib.sha1
        for shape, m in self.enumerated_shapes:
            pools = [atoms160] * m + ([atoms32] if shape == "ts" else [])
            byte_pools = [[(t, t.to_bytes()) for t in pool] for pool in pools]
            for combo in product(*byte_pools):
                data = b"".join(b for _, b in combo)
                if int.from_bytes(sha(data).digest(), "big") == digest_value:
                    return [t for t, _ in combo]
        raise LookupError("no preimage found; bulk set out of sync")


def _atoms(terms: list[BitString]) -> tuple[list[BitString], list[BitString]]:
    seen160, seen32 = [], []
    for t in terms:
        if t.width == FIELD_BITS:
            seen160.append(t)
        elif t.width == TS_FIELD_BITS:
            seen32.append(t)
    return seen160, seen32


def compute_closure(knowledge: list[BitString], depth: int = 4,
                    budget: int = 2_000_000) -> Closure:
    """Least fixed point of the derivation rules, truncated at ``depth``.

    ``budget`` caps how many hash-of-concatenation tuples are tried; shape
    exploration stops before exceeding it, so runs are deterministic for a
    fixed (knowledge, depth, budget).
    """
    clo = Closure(depth=depth, budget=budget)

    def add(term: BitString, rule: str, parents: tuple = ()) -> bool:
        key = _key(term)
        if key in clo.terms:
            return False
        clo.terms[key] = (rule, parents)
        return True

    for term in knowledge:
        add(term, "given")
    if knowledge:
        for w in ZERO_WIDTHS:
            add(BitString.zeros(w), "zero-constant")

    if depth <= 0:
        return clo

    # saturate the cheap structural rules: field slicing and lifting
    changed = True
    while changed:
        changed = False
        for term in clo._materialized():
            layout = SLICE_LAYOUTS.get(term.width)
            if layout:
                offset = 0
                for width in layout:
                    piece = term.slice(offset, offset + width)
                    changed |= add(piece, "slice", (term,))
                    offset += width
            if term.width < FIELD_BITS and term.width != TS_FIELD_BITS:
                changed |= add(term.zext(FIELD_BITS), "lift", (term,))

    # hash-of-concatenation over protocol-shaped tuples, budget capped
    clo.atoms = clo._materialized()
    atoms160, atoms32 = _atoms(clo.atoms)
    spent = 0
    for shape, m in _PLANS:
        cost = len(atoms160) ** m * (len(atoms32) if shape == "ts" else 1)
        if cost == 0 or spent + cost > budget:
            continue
        spent += cost
        clo.enumerated_shapes.append((shape, m))
        pools = [atoms160] * m + ([atoms32] if shape == "ts" else [])
        byte_pools = [[t.to_bytes() for t in pool] for pool in pools]
        sha = hashlib.sha1
        bulk = clo.bulk
        for combo in product(*byte_pools):
            bulk.add(int.from_bytes(sha(b"".join(combo)).digest(), "big"))
    clo.bulk_count = len(clo.bulk)

    # single-term hash chains iterate with depth
    frontier = clo._materialized()
    for _ in range(depth):
        new = []
        for term in frontier:
            digest = BitString.from_bytes(hashlib.sha1(term.to_bytes()).digest())
            if add(digest, "hash", (term,)):
                new.append(digest)
        if not new:
            break
        frontier = new

    return clo


def derivable(knowledge: list[BitString], target: BitString,
              depth: int = 4, budget: int = 2_000_000) -> bool:
    return target in compute_closure(knowledge, depth, budget)

"""Word metrics on finitely generated groups.

Reduced words over a symmetric alphabet, exact word length by breadth-first
search against a pluggable equality oracle, translation-length and distortion
tables, growth-function comparison, and distortion certificates.

Conventions
-----------
Letters are nonzero signed integers: ``+k`` is the k-th generator (1-based)
and ``-k`` its inverse.  A word ``[g1, g2, ..., gn]`` denotes the product
``g1 g2 ... gn``; when words act as maps the rightmost letter applies first.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .errors import (
    DefectViolated,
    EntryFailed,
    NotFoundWithinRadius,
    OracleInconsistent,
    TorsionDetected,
)

__all__ = [
    "GeneratorAlphabet",
    "GroupWord",
    "reduce_letters",
    "word",
    "GroupOracle",
    "free_oracle",
    "integer_oracle",
    "word_length_bfs",
    "ball_with_distances",
    "translation_length_estimate",
    "TranslationLengthEstimate",
    "distortion_function",
    "GrowthFunction",
    "quasi_compare",
    "QuasiComparison",
    "rewriting_constant",
    "quasimorphism_lower_bound",
    "CertificateEntry",
    "DistortionCertificate",
    "certificate_check",
    "CertificateReport",
]


# ---------------------------------------------------------------------------
# Alphabets and words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GeneratorAlphabet:
    """A finite symmetric generating alphabet.

    Only the positive labels are stored; the involution pairs ``+k`` with
    ``-k``, so the signed alphabet is automatically symmetric and the
    pairing is fixed-point free.
    """

    names: tuple[str, ...]

    def __post_init__(self):
        if not self.names:
            raise ValueError("alphabet needs at least one generator")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")

    @property
    def size(self) -> int:
        return len(self.names)

    def signed_letters(self) -> tuple[int, ...]:
        """All signed letters in the fixed deterministic order +1,-1,+2,-2,..."""
        out = []
        for k in range(1, self.size + 1):
            out.extend((k, -k))
        return tuple(out)

    def involution(self, letter: int) -> int:
        return -letter

    def index(self, name: str) -> int:
        return self.names.index(name) + 1

    def letter_name(self, letter: int) -> str:
        base = self.names[abs(letter) - 1]
        return base if letter > 0 else base + "^-1"

    def format_word(self, w: "GroupWord") -> str:
        if not w.letters:
            return "1"
        return " ".join(self.letter_name(l) for l in w.letters)


def reduce_letters(letters: Iterable[int]) -> tuple[int, ...]:
    """Free reduction of a letter sequence (stack cancellation)."""
    stack: list[int] = []
    for l in letters:
        if l == 0 or not isinstance(l, int):
            raise ValueError(f"invalid letter {l!r}")
        if stack and stack[-1] == -l:
            stack.pop()
        else:
            stack.append(l)
    return tuple(stack)


@dataclass(frozen=True)
class GroupWord:
    """A freely reduced word; the empty word is the identity."""

    letters: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "letters", reduce_letters(self.letters))

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __mul__(self, other: "GroupWord") -> "GroupWord":
        return GroupWord(self.letters + other.letters)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple(-l for l in reversed(self.letters)))

    def __pow__(self, n: int) -> "GroupWord":
        if n == 0:
            return GroupWord()
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def conjugated_by(self, b: "GroupWord") -> "GroupWord":
        """b^-1 * self * b."""
        return b.inverse() * self * b


def word(*letters: int) -> GroupWord:
    return GroupWord(tuple(letters))


# ---------------------------------------------------------------------------
# Oracles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroupOracle:
    """Equality test for words, with an optional canonicalizer.

    ``canonical`` maps a word to a hashable key constant on group elements;
    when present it also powers dictionary-based BFS deduplication.  When
    absent, ``equal`` is used pairwise (quadratic fallback).
    """

    alphabet: GeneratorAlphabet
    name: str = "oracle"
    canonical: Callable[[GroupWord], Hashable] | None = None
    equal_fn: Callable[[GroupWord, GroupWord], bool] | None = None

    def equal(self, u: GroupWord, v: GroupWord) -> bool:
        if self.equal_fn is not None:
            return self.equal_fn(u, v)
        if self.canonical is not None:
            return self.canonical(u) == self.canonical(v)
        raise ValueError("oracle has neither equality test nor canonicalizer")

    def key(self, w: GroupWord) -> Hashable:
        if self.canonical is None:
            raise ValueError(f"oracle {self.name!r} has no canonicalizer")
        return self.canonical(w)

    def is_identity(self, w: GroupWord) -> bool:
        return self.equal(w, GroupWord())


def free_oracle(alphabet: GeneratorAlphabet) -> GroupOracle:
    """Free group on the alphabet: canonical form is the reduced word."""
    return GroupOracle(alphabet, name="free", canonical=lambda w: w.letters)


def integer_oracle(alphabet: GeneratorAlphabet, weights: dict[str, int]) -> GroupOracle:
    """The integers, with each generator mapping to a fixed weight."""
    wt = tuple(weights[n] for n in alphabet.names)

    def canon(w: GroupWord) -> int:
        return sum(wt[abs(l) - 1] * (1 if l > 0 else -1) for l in w.letters)

    return GroupOracle(alphabet, name="integers", canonical=canon)


# ---------------------------------------------------------------------------
# Breadth-first search
# ---------------------------------------------------------------------------


def _expansion_letters(alphabet: GeneratorAlphabet, generators: Sequence[int] | None):
    if generators is None:
        return alphabet.signed_letters()
    letters = []
    for g in generators:
        letters.append(g)
        if -g not in generators:
            letters.append(-g)
    # deterministic order, duplicates removed
    seen, out = set(), []
    for l in sorted(letters, key=lambda x: (abs(x), x < 0)):
        if l not in seen:
            seen.add(l)
            out.append(l)
    return tuple(out)


def ball_with_distances(
    oracle: GroupOracle,
    max_radius: int,
    generators: Sequence[int] | None = None,
    self_check: bool = False,
) -> dict[Hashable, int]:
    """Distances of every element in the ball of ``max_radius``.

    Requires a canonicalizer.  Expansion order is lexicographic in the
    letter sequence, so the output is deterministic.
    """
    letters = _expansion_letters(oracle.alphabet, generators)
    identity = GroupWord()
    dist: dict[Hashable, int] = {oracle.key(identity): 0}
    reps: dict[Hashable, GroupWord] = {oracle.key(identity): identity} if self_check else {}
    frontier: list[GroupWord] = [identity]
    for radius in range(1, max_radius + 1):
        nxt: list[GroupWord] = []
        for w in frontier:
            for l in letters:
                cand = GroupWord(w.letters + (l,))
                k = oracle.key(cand)
                if k not in dist:
                    dist[k] = radius
                    nxt.append(cand)
                    if self_check:
                        reps[k] = cand
                elif self_check and not oracle.equal(cand, reps[k]):
                    raise OracleInconsistent(
                        f"key collision between {reps[k].letters} and {cand.letters}"
                    )
        frontier = nxt
        if not frontier:
            break
    return dist


def word_length_bfs(
    oracle: GroupOracle,
    target: GroupWord,
    max_radius: int,
    generators: Sequence[int] | None = None,
    self_check: bool = False,
) -> int:
    """Exact word length of ``target`` with respect to the (sub)alphabet.

    Raises NotFoundWithinRadius when the ball of the given radius does not
    contain the target.  The convention length(identity) = 0 is built in.
    """
    if max_radius < 0:
        raise ValueError("max_radius must be nonnegative")
    if oracle.is_identity(target):
        return 0
    letters = _expansion_letters(oracle.alphabet, generators)

    if oracle.canonical is not None:
        tkey = oracle.key(target)
        seen = {oracle.key(GroupWord())}
        frontier = [GroupWord()]
        for radius in range(1, max_radius + 1):
            nxt = []
            for w in frontier:
                for l in letters:
                    cand = GroupWord(w.letters + (l,))
                    k = oracle.key(cand)
                    if k == tkey:
                        if self_check and not oracle.equal(cand, target):
                            raise OracleInconsistent("canonical key hit but equality fails")
                        return radius
                    if k not in seen:
                        seen.add(k)
                        nxt.append(cand)
            frontier = nxt
            if not frontier:
                break
        raise NotFoundWithinRadius(max_radius)

    # quadratic fallback: pairwise equality against everything stored
    stored: list[GroupWord] = [GroupWord()]
    frontier = [GroupWord()]
    for radius in range(1, max_radius + 1):
        nxt = []
        for w in frontier:
            for l in letters:
                cand = GroupWord(w.letters + (l,))
                if oracle.equal(cand, target):
                    return radius
                if not any(oracle.equal(cand, s) for s in stored):
                    stored.append(cand)
                    nxt.append(cand)
        frontier = nxt
        if not frontier:
            break
    raise NotFoundWithinRadius(max_radius)


# ---------------------------------------------------------------------------
# Translation length and distortion tables
# ---------------------------------------------------------------------------


@dataclass
class TranslationLengthEstimate:
    terms: list[tuple[int, int | None, float | None]]  # (n, length or None, length/n)
    infimum: float | None  # upper bound for the translation length

    def ratios(self) -> list[float]:
        return [r for (_, _, r) in self.terms if r is not None]


def translation_length_estimate(
    oracle: GroupOracle,
    h: GroupWord,
    N: int,
    max_radius: int,
    generators: Sequence[int] | None = None,
) -> TranslationLengthEstimate:
    """``length(h^n)/n`` for n = 1..N; the running infimum bounds the limit.

    Terms whose BFS exceeds ``max_radius`` are reported with length None
    (the true length is > max_radius).
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    terms: list[tuple[int, int | None, float | None]] = []
    inf: float | None = None
    power = GroupWord()
    for n in range(1, N + 1):
        power = power * h
        try:
            ln = word_length_bfs(oracle, power, max_radius, generators)
            ratio = ln / n
            inf = ratio if inf is None else min(inf, ratio)
            terms.append((n, ln, ratio))
        except NotFoundWithinRadius:
            terms.append((n, None, None))
    return TranslationLengthEstimate(terms, inf)


def distortion_function(
    oracle: GroupOracle,
    h: GroupWord,
    n_max: int,
    generators: Sequence[int] | None = None,
    torsion_bound: int = 512,
    max_exponent: int | None = None,
) -> list[tuple[int, int]]:
    """Table of D(n) = max { i : length(h^i) <= n } for n = 1..n_max.

    Distinct powers of a non-torsion element inside the radius-n ball number
    at most |ball(n)|, so scanning exponents up to the ball size is exact;
    ``max_exponent`` trims that scan (values then are exact within the cap).
    Raises TorsionDetected if a power of h up to ``torsion_bound`` is trivial.
    """
    if oracle.canonical is None:
        raise ValueError("distortion_function needs a canonicalizing oracle")
    identity_key = oracle.key(GroupWord())
    power = GroupWord()
    for k in range(1, torsion_bound + 1):
        power = power * h
        if oracle.key(power) == identity_key:
            raise TorsionDetected(k)

    dist = ball_with_distances(oracle, n_max, generators)
    cap = len(dist)
    if max_exponent is not None:
        cap = min(cap, max_exponent)
    best: dict[int, int] = {}
    power = GroupWord()
    for i in range(1, cap + 1):
        power = power * h
        d = dist.get(oracle.key(power))
        if d is not None:
            best[i] = d
    table = []
    for n in range(1, n_max + 1):
        candidates = [i for i, d in best.items() if d <= n]
        table.append((n, max(candidates) if candidates else 0))
    return table


# ---------------------------------------------------------------------------
# Growth functions and quasi-comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthFunction:
    """A monotone function on the nonnegative integers with a display tag."""

    fn: Callable[[int], int]
    description: str

    def __call__(self, n: int) -> int:
        if n < 0:
            raise ValueError("growth functions take nonnegative arguments")
        return self.fn(n)

    @staticmethod
    def parse(text: str) -> "GrowthFunction":
        """Parse 'linear', 'quadratic', 'cubic', 'exp', 'n^k', or 'poly:k'."""
        t = text.strip().lower()
        named = {
            "zero": GrowthFunction(lambda n: 0, "0"),
            "linear": GrowthFunction(lambda n: n, "n"),
            "quadratic": GrowthFunction(lambda n: n * n, "n^2"),
            "cubic": GrowthFunction(lambda n: n ** 3, "n^3"),
            "exp": GrowthFunction(lambda n: 2 ** n, "2^n"),
        }
        if t in named:
            return named[t]
        if t.startswith("poly:"):
            k = int(t.split(":", 1)[1])
            return GrowthFunction(lambda n, k=k: n ** k, f"n^{k}")
        if t.startswith(("n^", "i^")):
            k = int(t[2:])
            return GrowthFunction(lambda n, k=k: n ** k, f"n^{k}")
        raise ValueError(f"unrecognized growth function {text!r}")


@dataclass(frozen=True)
class QuasiComparison:
    witness: int | None  # smallest working constant, or None
    K: int
    N: int

    @property
    def dominated(self) -> bool:
        return self.witness is not None


def quasi_compare(f: GrowthFunction, g: GrowthFunction, K: int, N: int) -> QuasiComparison:
    """Empirical search for a constant k <= K with f(n) <= k g(kn+k) + k on n <= N.

    This is a bounded check of the affine domination order, not a proof;
    the horizon N and cap K are part of the reported result.
    """
    for k in range(1, K + 1):
        if all(f(n) <= k * g(k * n + k) + k for n in range(0, N + 1)):
            return QuasiComparison(k, K, N)
    return QuasiComparison(None, K, N)


def rewriting_constant(
    s1: Sequence[int],
    s2: Sequence[int],
    oracle: GroupOracle,
    max_radius: int,
    spot_samples: int = 32,
    seed: int = 0,
) -> int:
    """The rewriting constant between two generating subsets of one oracle group.

    ``s1`` and ``s2`` are positive letters of the oracle's alphabet.  Returns
    c = max over s in s1 u s2 of the length of s in the other set, and
    spot-verifies (1/c) l2 <= l1 <= c l2 on random short words.
    """
    c = 1
    for letter in s1:
        c = max(c, word_length_bfs(oracle, word(letter), max_radius, generators=s2))
    for letter in s2:
        c = max(c, word_length_bfs(oracle, word(letter), max_radius, generators=s1))

    rng = random.Random(seed)
    pool = list(s1) + [-l for l in s1] + list(s2) + [-l for l in s2]
    for _ in range(spot_samples):
        w = GroupWord(tuple(rng.choice(pool) for _ in range(rng.randrange(0, 5))))
        try:
            l1 = word_length_bfs(oracle, w, max_radius, generators=s1)
            l2 = word_length_bfs(oracle, w, max_radius, generators=s2)
        except NotFoundWithinRadius:
            continue
        if not (l2 <= c * l1 and l1 <= c * l2):
            raise OracleInconsistent(
                f"rewriting constant {c} fails sandwich on {w.letters}: {l1} vs {l2}"
            )
    return c


def quasimorphism_lower_bound(
    phi: Callable[[GroupWord], float],
    defect: float,
    alphabet: GeneratorAlphabet,
    h: GroupWord,
    samples: int = 200,
    seed: int = 0,
) -> float:
    """Translation-length lower bound from a quasi-morphism.

    Validates the defect bound |phi(u) + phi(v) - phi(uv)| <= defect on
    sampled pairs, then returns max(0, (|phi(h)| - defect) / (M + defect))
    where M = max |phi| over the generators.  A positive value certifies
    that h is undistorted in the group the alphabet generates.
    """
    rng = random.Random(seed)
    pool = list(alphabet.signed_letters())
    for _ in range(samples):
        u = GroupWord(tuple(rng.choice(pool) for _ in range(rng.randrange(0, 6))))
        v = GroupWord(tuple(rng.choice(pool) for _ in range(rng.randrange(0, 6))))
        err = abs(phi(u) + phi(v) - phi(u * v))
        if err > defect + 1e-12:
            raise DefectViolated(f"defect {err:.3e} > {defect:.3e} on sampled pair")
    m = max(abs(phi(word(k))) for k in range(1, alphabet.size + 1))
    denom = m + defect
    if denom == 0:
        return 0.0
    return max(0.0, (abs(phi(h)) - defect) / denom)


# ---------------------------------------------------------------------------
# Certificates
# ---------------------------------------------------------------------------


@dataclass
class CertificateEntry:
    """One certified power: a word of length <= length_bound equal to base^exponent."""

    index: int
    length_bound: int
    exponent: int
    word: GroupWord
    target: dict = field(default_factory=dict)  # pipeline payload (e.g. angles)


@dataclass
class DistortionCertificate:
    alphabet: GeneratorAlphabet
    base: str
    entries: list[CertificateEntry]
    growth: dict | None = None  # {"description": str, "threshold": int}
    verification: dict | None = None  # {"samples","sup_error","passed","tolerance"}
    metadata: dict = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        out = {
            "alphabet": list(self.alphabet.names),
            "base": self.base,
            "entries": [
                {
                    "i": e.index,
                    "n_i": str(e.length_bound),
                    "f_n_i": str(e.exponent),
                    "word": list(e.word.letters),
                    **({"target": _hexify(e.target)} if e.target else {}),
                }
                for e in self.entries
            ],
        }
        if self.growth is not None:
            out["growth"] = self.growth
        if self.verification is not None:
            out["verification"] = _hexify(self.verification)
        if self.metadata:
            out["metadata"] = _hexify(self.metadata)
        return out

    @staticmethod
    def from_json_dict(data: dict) -> "DistortionCertificate":
        alphabet = GeneratorAlphabet(tuple(data["alphabet"]))
        entries = [
            CertificateEntry(
                index=e["i"],
                length_bound=int(e["n_i"]),
                exponent=int(e["f_n_i"]),
                word=GroupWord(tuple(e["word"])),
                target=_unhexify(e.get("target", {})),
            )
            for e in data["entries"]
        ]
        return DistortionCertificate(
            alphabet=alphabet,
            base=data["base"],
            entries=entries,
            growth=data.get("growth"),
            verification=_unhexify(data["verification"]) if "verification" in data else None,
            metadata=_unhexify(data.get("metadata", {})),
        )


def _hexify(obj):
    """Floats to hex strings, recursively; keeps reruns byte-identical."""
    if isinstance(obj, float):
        return float.hex(obj)
    if isinstance(obj, dict):
        return {k: _hexify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_hexify(v) for v in obj]
    return obj


def _unhexify(obj):
    if isinstance(obj, str):
        try:
            if "0x" in obj and ("p" in obj or "P" in obj):
                return float.fromhex(obj)
        except ValueError:
            pass
        return obj
    if isinstance(obj, dict):
        return {k: _unhexify(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_unhexify(v) for v in obj]
    return obj


@dataclass
class EntryReport:
    index: int
    structural_ok: bool
    equality_ok: bool
    error: float

    @property
    def passed(self) -> bool:
        return self.structural_ok and self.equality_ok


@dataclass
class CertificateReport:
    entries: list[EntryReport]
    passed: bool
    sup_error: float

    def raise_on_failure(self):
        for e in self.entries:
            if not e.passed:
                raise EntryFailed(e.index, f"error={e.error:.3e}")


def certificate_check(
    cert: DistortionCertificate,
    checker: Callable[[CertificateEntry], tuple[bool, float]],
) -> CertificateReport:
    """Verify a certificate entry by entry.

    ``checker(entry)`` decides whether entry.word equals base^exponent and
    returns (ok, error).  Exact oracles report error 0.0; pointwise
    evaluators report their sup error.  Structural checks (length budget,
    strictly increasing exponents) are performed here.
    """
    reports = []
    prev_exp = None
    sup = 0.0
    for e in cert.entries:
        structural = len(e.word) <= e.length_bound
        if prev_exp is not None and e.exponent <= prev_exp:
            structural = False
        prev_exp = e.exponent
        ok, err = checker(e)
        sup = max(sup, err)
        reports.append(EntryReport(e.index, structural, ok, err))
    passed = all(r.passed for r in reports)
    return CertificateReport(reports, passed, sup)


def oracle_checker(oracle: GroupOracle, base: GroupWord):
    """Exact equality checker: entry.word == base^exponent under the oracle."""

    def check(entry: CertificateEntry) -> tuple[bool, float]:
        ok = oracle.equal(entry.word, base ** entry.exponent)
        return ok, 0.0 if ok else float("inf")

    return check

"""Words over the branch alphabet and the affine maps they compose to.

A word I = (i_1, ..., i_m) denotes the composite f_I = f_{i_m} o ... o
f_{i_1}: the first symbol acts first.  For the affine families every
branch is x -> a x + b with a, b rational, so f_I is again affine and
its coefficients can be folded up exactly.  A state x is a period-m
point with branch word I iff x is a fixed point of the affine f_I *and*
the orbit of x really does visit the branches of I in order; the second
condition is checked by replay, never assumed.

Cycle search never needs all k**m words: a cycle of minimal period m
has exactly m branch-word rotations, exactly one of which is Lyndon
(strictly smallest rotation), so enumerating Lyndon words finds every
cycle exactly once.  Periodic words (those that are a proper power of a
shorter word) contribute nothing new: a fixed point of f_{J^r} with
branch word J^r has branch word J already, by replay.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import IdentityComposition, InvalidSpec, NotACycle, NotAffineFamily
from .orbits import canonical_cycle
from .systems import DynamicalSystem

Word = tuple


def check_word(word: Iterable, k: int) -> Word:
    word = tuple(word)
    if not word:
        raise InvalidSpec("empty word")
    for i in word:
        if not isinstance(i, int) or not 1 <= i <= k:
            raise InvalidSpec(f"symbol {i!r} outside 1..{k}")
    return word


def is_aperiodic(word: Word) -> bool:
    """True unless the word is a proper power of a shorter word."""
    word = tuple(word)
    m = len(word)
    if m == 0:
        return False
    for p in range(1, m):
        if m % p == 0 and word == word[:p] * (m // p):
            return False
    return True


def lyndon_words(k: int, max_len: int) -> Iterator[Word]:
    """All Lyndon words over {1..k} of length <= max_len, lexicographic.

    Duval's generation: extend the current word periodically to the
    maximal length, trim trailing maximal symbols, increment.
    """
    if k < 1 or max_len < 1:
        return
    w = [0]
    yield (1,)
    while True:
        w = [w[i % len(w)] for i in range(max_len)]
        while w and w[-1] == k - 1:
            w.pop()
        if not w:
            return
        w[-1] += 1
        yield tuple(c + 1 for c in w)


@dataclass(frozen=True)
class AffineMap:
    """x -> a*x + b with exact rational coefficients."""

    a: Fraction
    b: Fraction

    def __call__(self, x):
        return self.a * x + self.b

    def after(self, other: "AffineMap") -> "AffineMap":
        """self o other."""
        return AffineMap(self.a * other.a, self.a * other.b + self.b)

    @staticmethod
    def identity() -> "AffineMap":
        return AffineMap(Fraction(1), Fraction(0))


def compose_affine(sys: DynamicalSystem, word: Iterable) -> AffineMap:
    """The affine map of f_I; first symbol innermost."""
    word = check_word(word, sys.k)
    m = AffineMap.identity()
    for i in word:
        a, b = sys.branch_affine(i)
        m = AffineMap(a, b).after(m)
    return m


def replay_word(sys: DynamicalSystem, x, word: Word):
    """Apply f along ``word`` from x, or return None on a branch mismatch."""
    cur = x
    for i in word:
        if sys.branch_of(cur) != i:
            return None
        cur = sys.apply(cur)
    return cur


def fixed_point_of_word(sys: DynamicalSystem, word: Iterable):
    """The unique positive-integer fixed point of f_I realizing I, or None.

    Solves a*x + b = x exactly and validates the solution by replaying
    the word from it.  Raises IdentityComposition when f_I is the
    identity map (a = 1, b = 0), in which case "the" fixed point is
    ill-posed.  a = 1 with b != 0 has no fixed point at all; a != 1
    pins down x = b / (1 - a), so at most one state can qualify.
    """
    word = check_word(word, sys.k)
    if not word:
        raise IdentityComposition("the empty word composes to the identity")
    m = compose_affine(sys, word)
    if m.a == 1:
        if m.b == 0:
            raise IdentityComposition(f"word {word} composes to the identity")
        return None
    x = m.b / (1 - m.a)
    if x.denominator != 1 or x < 1:
        return None
    x = int(x)
    if replay_word(sys, x, word) != x:
        return None
    return x


@dataclass(frozen=True)
class CycleRecord:
    cycle: tuple  # canonical rotation, minimal state first
    word: Word  # branch word read off the canonical rotation

    @property
    def length(self) -> int:
        return len(self.cycle)


def _fixed_point_fast(sys, word):
    """Integer-only fixed point solve for expanding/division branches.

    Branch coefficients of the built-in affine families have
    denominators that are powers of k, so f_I is x -> (na*x + nb) / k**e
    with integer na, nb.  Avoids Fraction churn in the inner loop of
    cycle enumeration; cross-checked against fixed_point_of_word in the
    tests.
    """
    k = sys.k
    na, nb, e = 1, 0, 0
    aff = []
    for i in range(1, k + 1):
        a, b = sys.branch_affine(i)
        aff.append(None if a.denominator != 1 else (a.numerator, b.numerator))
    for i in word:
        pair = aff[i - 1]
        if pair is None:
            e += 1
        else:
            a, b = pair
            na, nb = a * na, a * nb + b * (k**e)
    den = k**e - na
    if den == 0:
        if nb == 0:
            raise IdentityComposition(f"word {word} composes to the identity")
        return None
    if nb % den != 0:
        return None
    x = nb // den
    if x < 1:
        return None
    if replay_word(sys, x, word) != x:
        return None
    return x


@dataclass(frozen=True)
class CycleSearchReport:
    max_len: int
    necklaces_only: bool
    words_tried: int
    cycles: tuple  # CycleRecord, sorted by (length, cycle)


def _search_word_list(sys: DynamicalSystem, word_iter) -> tuple:
    found = {}
    tried = 0
    for word in word_iter:
        tried += 1
        try:
            x = _fixed_point_fast(sys, word)
        except IdentityComposition:
            continue
        if x is None:
            continue
        cyc = [x]
        cur = sys.apply(x)
        while cur != x:
            cyc.append(cur)
            cur = sys.apply(cur)
        cyc = canonical_cycle(cyc)
        if cyc not in found:
            found[cyc] = CycleRecord(
                cycle=cyc, word=tuple(sys.branch_of(s) for s in cyc)
            )
    return found, tried


def enumerate_cycles(
    sys: DynamicalSystem,
    max_len: int,
    necklaces_only: bool = True,
    threads: int = 1,
) -> CycleSearchReport:
    """All cycles whose minimal period is at most max_len.

    ``threads`` splits the word list round-robin; the merged result is
    independent of the split, so any thread count yields an identical
    report.
    """
    if not sys.is_affine:
        raise NotAffineFamily("cycle search solves affine fixed-point equations")
    if max_len < 1:
        raise InvalidSpec("need max_len >= 1")
    if necklaces_only:
        words = lyndon_words(sys.k, max_len)
    else:
        words = _all_words(sys.k, max_len)
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        word_list = list(words)
        chunks = [word_list[i::threads] for i in range(threads)]
        found = {}
        tried = 0
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for part, n in pool.map(lambda c: _search_word_list(sys, c), chunks):
                tried += n
                for cyc, rec in part.items():
                    found.setdefault(cyc, rec)
    else:
        found, tried = _search_word_list(sys, words)
    cycles = tuple(sorted(found.values(), key=lambda r: (r.length, r.cycle)))
    return CycleSearchReport(
        max_len=max_len,
        necklaces_only=necklaces_only,
        words_tried=tried,
        cycles=cycles,
    )


def _all_words(k, max_len):
    from itertools import product

    for m in range(1, max_len + 1):
        for word in product(range(1, k + 1), repeat=m):
            yield word


@dataclass(frozen=True)
class SeparatingReport:
    start: object
    cap: int
    periodic: bool
    period: int  # 0 when no return was seen within cap
    word: Word
    aperiodic: bool

    @property
    def passed(self) -> bool:
        return self.periodic and self.aperiodic


def check_separating(sys: DynamicalSystem, x, cap: int) -> SeparatingReport:
    """Is x periodic with an aperiodic branch word?

    Iterates up to ``cap`` steps looking for the first return to x; the
    branch word of one full period is then tested for being a proper
    power.  A non-return within the cap is reported, not an error.
    """
    cur = x
    word = []
    for _ in range(cap):
        word.append(sys.branch_of(cur))
        cur = sys.apply(cur)
        if cur == x:
            w = tuple(word)
            return SeparatingReport(
                start=x,
                cap=cap,
                periodic=True,
                period=len(w),
                word=w,
                aperiodic=is_aperiodic(w),
            )
    return SeparatingReport(
        start=x, cap=cap, periodic=False, period=0, word=(), aperiodic=False
    )


@dataclass(frozen=True)
class UniquenessReport:
    max_len: int
    words_checked: int
    passed: bool
    violations: tuple  # (word, sorted fixed points) with >= 2 fixed points


def check_uniqueness(
    sys: DynamicalSystem, max_len: int, scan_bound: int | None = None
) -> UniquenessReport:
    """Does every word of length <= max_len have at most one fixed point?

    Affine families: the fixed-point equation a*x = x - b has at most
    one solution unless f_I is the identity; identity composition is a
    counted violation (every state is fixed).  With ``scan_bound`` set,
    an independent window scan re-derives each word's fixed points by
    replay, guarding the algebra.  Finite tables: exhaustive replay
    over all states and all words.
    """
    if max_len < 1:
        raise InvalidSpec("need max_len >= 1")
    violations = []
    checked = 0
    if sys.kind == "table":
        states = sys.states()
        for word in _all_words(sys.k, max_len):
            checked += 1
            fixed = [x for x in states if replay_word(sys, x, word) == x]
            if len(fixed) > 1:
                violations.append((word, tuple(sorted(fixed, key=repr))))
        return UniquenessReport(
            max_len=max_len,
            words_checked=checked,
            passed=not violations,
            violations=tuple(violations),
        )
    if not sys.is_affine:
        raise NotAffineFamily("uniqueness check needs affine or finite-table systems")
    for word in _all_words(sys.k, max_len):
        checked += 1
        try:
            x = _fixed_point_fast(sys, word)
        except IdentityComposition:
            violations.append((word, ("identity",)))
            continue
        solved = set() if x is None else {x}
        if scan_bound is not None:
            scanned = {
                y
                for y in range(1, scan_bound + 1)
                if replay_word(sys, y, word) == y
            }
            if scanned != solved & set(range(1, scan_bound + 1)):
                violations.append(
                    (word, tuple(sorted(scanned | solved)))
                )
    return UniquenessReport(
        max_len=max_len,
        words_checked=checked,
        passed=not violations,
        violations=tuple(violations),
    )


@dataclass(frozen=True)
class UniFixReport:
    word: Word
    power: int
    fixed_point_word: object  # state or None
    fixed_point_power: object
    passed: bool


def verify_unifix(sys: DynamicalSystem, word: Iterable, m: int) -> UniFixReport:
    """f_I and f_{I^m} have the same fixed-point set (m >= 1).

    For affine families both sets have at most one element, so the check
    is equality of the two solver results.
    """
    word = check_word(word, sys.k)
    if m < 1:
        raise InvalidSpec("need m >= 1")
    x1 = fixed_point_of_word(sys, word)
    xm = fixed_point_of_word(sys, word * m)
    return UniFixReport(
        word=word,
        power=m,
        fixed_point_word=x1,
        fixed_point_power=xm,
        passed=x1 == xm,
    )


@dataclass(frozen=True)
class CycleWordReport:
    cycle: tuple
    word: Word
    aperiodic: bool
    parity_tuple: tuple  # ((-1)**x per state) when k == 2, else ()
    parity_aperiodic: bool

    @property
    def passed(self) -> bool:
        return self.aperiodic


def cycle_word_aperiodicity(sys: DynamicalSystem, cycle: Iterable) -> CycleWordReport:
    """The branch word of a genuine cycle is never a proper power.

    Two distinct states of one cycle cannot share the full branch word
    (per-branch injectivity makes the return map determined by it), so
    a periodic word would collapse the cycle.  Raises NotACycle unless
    the input really is one orbit cycle with distinct states.
    """
    cycle = tuple(cycle)
    if not cycle:
        raise NotACycle("empty cycle")
    if len(set(cycle)) != len(cycle):
        raise NotACycle("repeated state in cycle")
    for j, s in enumerate(cycle):
        if sys.apply(s) != cycle[(j + 1) % len(cycle)]:
            raise NotACycle(f"f({s!r}) != {cycle[(j + 1) % len(cycle)]!r}")
    word = tuple(sys.branch_of(s) for s in cycle)
    parity = ()
    parity_ok = False
    if sys.k == 2 and all(isinstance(s, int) for s in cycle):
        parity = tuple((-1) ** s for s in cycle)
        parity_ok = is_aperiodic(parity)
    return CycleWordReport(
        cycle=cycle,
        word=word,
        aperiodic=is_aperiodic(word),
        parity_tuple=parity,
        parity_aperiodic=parity_ok,
    )

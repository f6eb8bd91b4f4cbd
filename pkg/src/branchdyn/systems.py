"""State spaces partitioned into injective branches.

A system here is a map f on a countable state space X together with a
partition X = X_1 | ... | X_k such that f restricted to each X_i is
injective.  Four families are provided:

* ``QxPlusD(q, d)``: X = {1, 2, ...}, f(n) = qn + d on odd n (branch 1)
  and f(n) = n/2 on even n (branch 2), with q, d odd.  ``collatz()`` is
  the (q, d) = (3, 1) instance.
* ``AlphaBeta(k, alpha, beta)``: f(n) = a_i n + b_i when n = i (mod k)
  for 0 < i < k (branch i), and f(n) = n/k when n = 0 (mod k)
  (branch k).
* ``FiniteTable``: an explicit finite state set with a branch index and
  an image for every state.  Per-branch injectivity is checked
  exhaustively.  k = 1 is allowed (f itself injective).
* ``SymbolicShift(k)``: the left shift on eventually periodic sequences
  over {1, ..., k}; the branch of a sequence is its first symbol.
  Sequences are stored exactly via :class:`EventuallyPeriodic`.

States are positive integers for the integer families, arbitrary
hashable labels for tables, and :class:`EventuallyPeriodic` values for
shifts.  Branch indices run from 1 to k throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Iterator

from .errors import InvalidSpec, NonInjectiveBranch, NotAffineFamily, OutOfDomain

State = Any


def _primitive_period(per: tuple) -> tuple:
    n = len(per)
    for p in range(1, n + 1):
        if n % p == 0 and per == per[:p] * (n // p):
            return per[:p]
    return per


@dataclass(frozen=True, order=True)
class EventuallyPeriodic:
    """An eventually periodic sequence s(0), s(1), ... stored exactly.

    ``pre`` holds the preperiodic head, ``per`` the repeating tail.  The
    stored form is normalized (primitive period, shortest head), so two
    values are equal as dataclasses iff they are equal as sequences.
    """

    pre: tuple
    per: tuple

    @staticmethod
    def make(pre: Iterable, per: Iterable) -> "EventuallyPeriodic":
        pre = tuple(pre)
        per = _primitive_period(tuple(per))
        if not per:
            raise InvalidSpec("period part must be nonempty")
        while pre and pre[-1] == per[-1]:
            per = (per[-1],) + per[:-1]
            pre = pre[:-1]
        return EventuallyPeriodic(pre, per)

    def head(self):
        return self.pre[0] if self.pre else self.per[0]

    def shift(self) -> "EventuallyPeriodic":
        if self.pre:
            return EventuallyPeriodic.make(self.pre[1:], self.per)
        return EventuallyPeriodic.make((), self.per[1:] + (self.per[0],))

    def prepend(self, symbol) -> "EventuallyPeriodic":
        return EventuallyPeriodic.make((symbol,) + self.pre, self.per)

    def prefix(self, length: int) -> tuple:
        out = list(self.pre[:length])
        i = 0
        while len(out) < length:
            out.append(self.per[i % len(self.per)])
            i += 1
        return tuple(out)

    def __getitem__(self, i: int):
        if i < len(self.pre):
            return self.pre[i]
        return self.per[(i - len(self.pre)) % len(self.per)]


# ---------------------------------------------------------------------------
# family specs


@dataclass(frozen=True)
class QxPlusD:
    q: int
    d: int


@dataclass(frozen=True)
class AlphaBeta:
    k: int
    alpha: tuple  # a_1 ... a_{k-1}
    beta: tuple  # b_1 ... b_{k-1}


@dataclass(frozen=True)
class FiniteTable:
    states: tuple
    branch: tuple  # sorted tuple of (state, branch index)
    image: tuple  # sorted tuple of (state, image state)
    k: int

    @staticmethod
    def make(branch: dict, image: dict, k: int | None = None) -> "FiniteTable":
        states = tuple(sorted(branch))
        if k is None:
            k = max(branch.values(), default=0)
        return FiniteTable(
            states=states,
            branch=tuple(sorted(branch.items())),
            image=tuple(sorted(image.items())),
            k=k,
        )


@dataclass(frozen=True)
class SymbolicShift:
    k: int


def collatz() -> QxPlusD:
    return QxPlusD(3, 1)


def mersenne(m: int) -> QxPlusD:
    """The qn + 1 system with q = 2**m - 1."""
    if m < 2:
        raise InvalidSpec("need m >= 2")
    return QxPlusD(2**m - 1, 1)


class DynamicalSystem:
    """A validated system: branch lookup, forward map, exact preimages."""

    def __init__(self, spec, _validate: bool = True):
        self.spec = spec
        if isinstance(spec, QxPlusD):
            self.k = 2
            self.kind = "qxd"
        elif isinstance(spec, AlphaBeta):
            self.k = spec.k
            self.kind = "alphabeta"
        elif isinstance(spec, FiniteTable):
            self.k = spec.k
            self.kind = "table"
            self._branch = dict(spec.branch)
            self._image = dict(spec.image)
            self._state_set = frozenset(spec.states)
            self._preimages = {}
            for x in spec.states:
                self._preimages.setdefault(self._image[x], []).append(
                    (x, self._branch[x])
                )
            for lst in self._preimages.values():
                lst.sort(key=lambda pair: pair[1])
        elif isinstance(spec, SymbolicShift):
            self.k = spec.k
            self.kind = "shift"
        else:
            raise InvalidSpec(f"unknown family: {spec!r}")
        if _validate:
            self._validate()

    # systems with equal specs are interchangeable
    def __eq__(self, other):
        return isinstance(other, DynamicalSystem) and self.spec == other.spec

    def __hash__(self):
        return hash(self.spec)

    def __repr__(self):
        return f"DynamicalSystem({self.spec!r})"

    # -- validation --------------------------------------------------------

    def _validate(self):
        spec = self.spec
        if self.kind == "qxd":
            if spec.q < 1 or spec.d < 1 or spec.q % 2 == 0 or spec.d % 2 == 0:
                raise InvalidSpec("q and d must be odd positive integers")
        elif self.kind == "alphabeta":
            if spec.k < 2:
                raise InvalidSpec("need k >= 2")
            if len(spec.alpha) != spec.k - 1 or len(spec.beta) != spec.k - 1:
                raise InvalidSpec("need k - 1 coefficients a_i and b_i")
            for a, b in zip(spec.alpha, spec.beta):
                if a < 1 or b < 1:
                    raise InvalidSpec("coefficients must be positive integers")
            # a_i*n + b_i must land back in {1,2,...}: automatic for
            # positive coefficients; residue classes need no check.
        elif self.kind == "table":
            if not spec.states:
                raise InvalidSpec("state set must be nonempty")
            if spec.k < 1:
                raise InvalidSpec("need k >= 1")
            branch, image = self._branch, self._image
            if set(branch) != self._state_set or set(image) != self._state_set:
                raise InvalidSpec("branch and image must be total on the states")
            for x, i in branch.items():
                if not 1 <= i <= spec.k:
                    raise InvalidSpec(f"branch index {i} of {x!r} outside 1..{spec.k}")
            for x, y in image.items():
                if y not in self._state_set:
                    raise InvalidSpec(f"image {y!r} of {x!r} escapes the state set")
            seen = {}
            for x in spec.states:
                key = (branch[x], image[x])
                if key in seen:
                    raise NonInjectiveBranch(
                        f"branch {key[0]}: states {seen[key]!r} and {x!r} "
                        f"share image {key[1]!r}"
                    )
                seen[key] = x
        elif self.kind == "shift":
            if spec.k < 1:
                raise InvalidSpec("need k >= 1")

    # -- state space -------------------------------------------------------

    def contains(self, x: State) -> bool:
        if self.kind in ("qxd", "alphabeta"):
            return isinstance(x, int) and not isinstance(x, bool) and x >= 1
        if self.kind == "table":
            return x in self._state_set
        return isinstance(x, EventuallyPeriodic) and all(
            1 <= s <= self.k for s in x.pre + x.per
        )

    def _require(self, x: State) -> None:
        if not self.contains(x):
            raise OutOfDomain(f"{x!r} is not a state of this system")

    def states(self) -> tuple:
        """The full state set; finite tables only."""
        if self.kind != "table":
            raise OutOfDomain("state set is infinite; pass an explicit window")
        return self.spec.states

    # -- dynamics ----------------------------------------------------------

    def branch_of(self, x: State) -> int:
        self._require(x)
        if self.kind == "qxd":
            return 1 if x % 2 == 1 else 2
        if self.kind == "alphabeta":
            r = x % self.k
            return r if r != 0 else self.k
        if self.kind == "table":
            return self._branch[x]
        return x.head()

    def apply(self, x: State) -> State:
        self._require(x)
        if self.kind == "qxd":
            return self.spec.q * x + self.spec.d if x % 2 == 1 else x // 2
        if self.kind == "alphabeta":
            r = x % self.k
            if r == 0:
                return x // self.k
            return self.spec.alpha[r - 1] * x + self.spec.beta[r - 1]
        if self.kind == "table":
            return self._image[x]
        return x.shift()

    def preimages(self, x: State) -> list:
        """All (y, i) with f(y) = x and y in branch i.

        Affine families list the division branch first (k*x always
        exists), then the affine branches in index order.
        """
        self._require(x)
        if self.kind == "qxd":
            out = [(2 * x, 2)]
            q, d = self.spec.q, self.spec.d
            if (x - d) % q == 0:
                y = (x - d) // q
                if y >= 1 and y % 2 == 1:
                    out.append((y, 1))
            return out
        if self.kind == "alphabeta":
            out = [(self.k * x, self.k)]
            for i in range(1, self.k):
                a, b = self.spec.alpha[i - 1], self.spec.beta[i - 1]
                if (x - b) % a == 0:
                    y = (x - b) // a
                    if y >= 1 and y % self.k == i:
                        out.append((y, i))
            return out
        if self.kind == "table":
            return list(self._preimages.get(x, []))
        return [(x.prepend(i), i) for i in range(1, self.k + 1)]

    # -- affine structure ---------------------------------------------------

    @property
    def is_affine(self) -> bool:
        return self.kind in ("qxd", "alphabeta")

    def branch_affine(self, i: int) -> tuple:
        """(a, b) with f(x) = a*x + b on branch i, as exact Fractions."""
        if not self.is_affine:
            raise NotAffineFamily(f"{self.kind} branches are not affine maps")
        if not 1 <= i <= self.k:
            raise InvalidSpec(f"branch index {i} outside 1..{self.k}")
        if self.kind == "qxd":
            if i == 1:
                return (Fraction(self.spec.q), Fraction(self.spec.d))
            return (Fraction(1, 2), Fraction(0))
        if i == self.k:
            return (Fraction(1, self.k), Fraction(0))
        return (Fraction(self.spec.alpha[i - 1]), Fraction(self.spec.beta[i - 1]))

    def branch_affine_int(self, i: int) -> tuple:
        """(a, b) integer coefficients of an expanding branch (i < k side)."""
        pair = self.branch_affine(i)
        if pair[0].denominator != 1:
            raise NotAffineFamily(f"branch {i} is the division branch")
        return (pair[0].numerator, pair[1].numerator)

    # -- misc ----------------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, DynamicalSystem) and self.spec == other.spec

    def __repr__(self):
        return f"DynamicalSystem({self.spec!r})"


def make_system(spec) -> DynamicalSystem:
    return DynamicalSystem(spec)


# ---------------------------------------------------------------------------
# windows


class Window:
    """A finite set of states used to truncate an infinite computation."""

    def contains(self, x) -> bool:
        raise NotImplementedError

    def __contains__(self, x) -> bool:
        return self.contains(x)

    def __iter__(self) -> Iterator:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError


class IntWindow(Window):
    """The integer interval lo..hi inclusive."""

    def __init__(self, lo: int, hi: int):
        if lo < 1 or hi < lo:
            raise InvalidSpec(f"bad window {lo}..{hi}")
        self.lo, self.hi = lo, hi

    def contains(self, x) -> bool:
        return isinstance(x, int) and self.lo <= x <= self.hi

    def __iter__(self):
        return iter(range(self.lo, self.hi + 1))

    def __len__(self):
        return self.hi - self.lo + 1

    def describe(self):
        return f"{self.lo}..{self.hi}"


class SetWindow(Window):
    """An explicit finite state set, iterated in sorted order."""

    def __init__(self, states: Iterable):
        self._set = frozenset(states)
        try:
            self._order = tuple(sorted(self._set))
        except TypeError:
            self._order = tuple(sorted(self._set, key=repr))

    def contains(self, x) -> bool:
        return x in self._set

    def __iter__(self):
        return iter(self._order)

    def __len__(self):
        return len(self._set)

    def describe(self):
        return f"set of {len(self._set)} states"


def as_window(sys: DynamicalSystem, window) -> Window:
    """Coerce (lo, hi) pairs, iterables, or None (full finite table)."""
    if isinstance(window, Window):
        return window
    if window is None:
        return SetWindow(sys.states())
    if (
        isinstance(window, tuple)
        and len(window) == 2
        and all(isinstance(v, int) for v in window)
    ):
        return IntWindow(*window)
    return SetWindow(window)


# ---------------------------------------------------------------------------
# bounded-condition verification


@dataclass(frozen=True)
class BoundedConditionReport:
    passed: bool
    window: str
    states_checked: int
    violations: tuple  # (branch, state, state, shared image)


def verify_bounded_condition(sys: DynamicalSystem, window) -> BoundedConditionReport:
    """Check the branch partition and per-branch injectivity on a window.

    Branch totality is structural for the built-in families; the real
    content is the injectivity scan, which catches hand-built tables
    whose validation was skipped.
    """
    win = as_window(sys, window)
    seen: dict = {}
    violations = []
    count = 0
    for x in win:
        count += 1
        key = (sys.branch_of(x), sys.apply(x))
        if key in seen:
            violations.append((key[0], seen[key], x, key[1]))
        else:
            seen[key] = x
    return BoundedConditionReport(
        passed=not violations,
        window=win.describe(),
        states_checked=count,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# JSON interchange

_INT = (int,)


def _s(n: int) -> str:
    return str(n)


def spec_to_json(spec) -> dict:
    """Family spec -> plain dict; large integers as decimal strings."""
    if isinstance(spec, QxPlusD):
        return {"family": "qxd", "q": _s(spec.q), "d": _s(spec.d)}
    if isinstance(spec, AlphaBeta):
        return {
            "family": "alphabeta",
            "k": spec.k,
            "alpha": [_s(a) for a in spec.alpha],
            "beta": [_s(b) for b in spec.beta],
        }
    if isinstance(spec, FiniteTable):
        return {
            "family": "table",
            "k": spec.k,
            "states": [_s(x) for x in spec.states],
            "branch": {_s(x): i for x, i in spec.branch},
            "image": {_s(x): _s(y) for x, y in spec.image},
        }
    if isinstance(spec, SymbolicShift):
        return {"family": "shift", "k": spec.k}
    raise InvalidSpec(f"unknown family: {spec!r}")


def spec_from_json(data: dict):
    try:
        family = data["family"]
        if family == "collatz":
            return collatz()
        if family == "qxd":
            return QxPlusD(int(data["q"]), int(data["d"]))
        if family == "alphabeta":
            return AlphaBeta(
                int(data["k"]),
                tuple(int(a) for a in data["alpha"]),
                tuple(int(b) for b in data["beta"]),
            )
        if family == "table":
            branch = {int(x): int(i) for x, i in data["branch"].items()}
            image = {int(x): int(y) for x, y in data["image"].items()}
            k = int(data["k"]) if "k" in data else None
            table = FiniteTable.make(branch, image, k)
            if "states" in data:
                declared = tuple(sorted(int(x) for x in data["states"]))
                if declared != table.states:
                    raise InvalidSpec("declared states do not match the branch table")
            return table
        if family == "shift":
            return SymbolicShift(int(data["k"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidSpec(f"malformed system description: {exc}") from exc
    raise InvalidSpec(f"unknown family: {family!r}")

"""Finite truncations of the branch partial isometries.

On the full state space each branch i induces a partial isometry T_i
with T_i e_x = e_{f(x)} for x in X_i and T_i e_x = 0 otherwise.  A
truncation restricts everything to a finite window W: the matrix M_i
has a 1 in row f(x), column x for each x in X_i with both endpoints in
W.  Per-branch injectivity makes every M_i a sub-permutation matrix
(at most one 1 per row and per column), so M_i M_i^T M_i = M_i holds
exactly and adjoints are plain transposes.

States of the window whose image under f leaves the window are
"escapes": their columns are zero, and facts that would need those
images (reducing-subspace checks near the boundary, conjugation
identities) are only asserted on interior coordinates.

The commutant computation exploits the 0/1 structure: A M_i = M_i A
and A M_i^T = M_i^T A are, entry by entry, equalities between single
entries of A or constraints forcing single entries to 0.  Union-find
over entry positions (with one extra "zero" sink) therefore yields an
exact basis of the commutant: the indicator matrices of the surviving
entry classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import linalg
from .errors import InvalidSpec, NotClosedSystem, WindowTooSmall
from .coding import CodingPrefix
from .systems import DynamicalSystem, as_window
from .words import check_word

F0 = Fraction(0)
F1 = Fraction(1)


@dataclass(frozen=True)
class Truncation:
    sys: DynamicalSystem
    states: tuple  # window states in index order
    index: dict  # state -> 0-based coordinate
    maps: tuple  # per branch: dict column index -> row index
    inverse_maps: tuple  # per branch: dict row index -> column index
    escapes: tuple  # per branch: frozenset of states mapped out of the window

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def k(self) -> int:
        return self.sys.k

    @property
    def escape_count(self) -> int:
        return sum(len(e) for e in self.escapes)

    def branch_matrix(self, i: int) -> list:
        m = linalg.zeros(self.n, self.n)
        for c, r in self.maps[i - 1].items():
            m[r][c] = F1
        return m

    def interior(self) -> frozenset:
        """States whose image and all preimages stay inside the window."""
        out = []
        win = set(self.states)
        for x in self.states:
            if self.sys.apply(x) not in win:
                continue
            if any(p not in win for p, _ in self.sys.preimages(x)):
                continue
            out.append(x)
        return frozenset(out)


def build_truncation(sys: DynamicalSystem, window, order=None) -> Truncation:
    win = as_window(sys, window)
    states = tuple(win) if order is None else tuple(order)
    if order is not None:
        if set(states) != set(win) or len(set(states)) != len(states):
            raise InvalidSpec("order must be a permutation of the window")
    index = {x: n for n, x in enumerate(states)}
    maps, inverses, escapes = [], [], []
    for i in range(1, sys.k + 1):
        fwd: dict = {}
        esc = []
        for x in states:
            if sys.branch_of(x) != i:
                continue
            y = sys.apply(x)
            if y in index:
                fwd[index[x]] = index[y]
            else:
                esc.append(x)
        inv = {r: c for c, r in fwd.items()}
        if len(inv) != len(fwd):
            raise InvalidSpec(f"branch {i} is not injective on the window")
        maps.append(fwd)
        inverses.append(inv)
        escapes.append(frozenset(esc))
    return Truncation(
        sys=sys,
        states=states,
        index=index,
        maps=tuple(maps),
        inverse_maps=tuple(inverses),
        escapes=tuple(escapes),
    )


# ---------------------------------------------------------------------------
# vectors are sparse dicts {coordinate: Fraction}


def apply_branch(trunc: Truncation, i: int, vec: dict, adjoint: bool = False) -> dict:
    table = trunc.inverse_maps[i - 1] if adjoint else trunc.maps[i - 1]
    out: dict = {}
    for c, v in vec.items():
        r = table.get(c)
        if r is not None and v:
            out[r] = out.get(r, F0) + v
    return {r: v for r, v in out.items() if v}


def apply_word_op(trunc: Truncation, word, vec: dict) -> dict:
    """T_I vec with the first symbol of the word acting first."""
    word = check_word(word, trunc.k)
    cur = dict(vec)
    for i in word:
        cur = apply_branch(trunc, i, cur)
    return cur


def apply_word_adjoint(trunc: Truncation, word, vec: dict) -> dict:
    """(T_I)^* vec; adjoints compose in reverse symbol order."""
    word = check_word(word, trunc.k)
    cur = dict(vec)
    for i in reversed(word):
        cur = apply_branch(trunc, i, cur, adjoint=True)
    return cur


@dataclass(frozen=True)
class DiagonalProjection:
    """P = T_I^* T_I for a coding prefix I: diagonal, 0/1."""

    n: int
    prefix: tuple
    coordinates: frozenset

    def apply(self, vec: dict) -> dict:
        return {c: v for c, v in vec.items() if c in self.coordinates}

    def matrix(self) -> list:
        m = linalg.zeros(self.n, self.n)
        for c in self.coordinates:
            m[c][c] = F1
        return m


def projection_P(trunc: Truncation, prefix) -> DiagonalProjection:
    """The range projection of the length-m coding cylinder.

    A coordinate survives iff chasing its state through the prefix
    symbols keeps all intermediate images in the window; the adjoint
    chase then walks the same path backwards, so P is the diagonal
    indicator of the surviving start coordinates.
    """
    symbols = prefix.symbols if isinstance(prefix, CodingPrefix) else tuple(prefix)
    symbols = check_word(symbols, trunc.k)
    if not symbols:
        raise InvalidSpec("need a nonempty prefix")
    survivors = []
    for c in range(trunc.n):
        cur = c
        for i in symbols:
            cur = trunc.maps[i - 1].get(cur)
            if cur is None:
                break
        else:
            survivors.append(c)
    return DiagonalProjection(
        n=trunc.n, prefix=symbols, coordinates=frozenset(survivors)
    )


@dataclass(frozen=True)
class PmLimitReport:
    x: object
    stabilization_index: int | None  # None when some support state never drops out
    eliminated: tuple  # (state, step, cause) per non-target support state
    never: tuple  # support states provably sharing x's whole coding in-window
    window_horizon: int | None  # step at which x itself would leave the window
    passed: bool


def verify_pm_limit(trunc: Truncation, a: dict, x, cap: int = 64) -> PmLimitReport:
    """P_m a converges to <a, e_x> e_x as m grows, m = prefix length.

    Support states other than x fall out of P_m a at the first m where
    either their coding disagrees with x's prefix ("coding") or their
    orbit leaves the window ("escape"); the maximum of those steps is
    the stabilization index.  A support state whose chase against x
    revisits a state pair can never be eliminated (the codings agree
    forever); that is reported, not raised.  WindowTooSmall is raised
    only when the verdict is window or cap limited: x leaves the window,
    or the cap runs out before separation or a pair revisit.
    """
    sys = trunc.sys
    if x not in trunc.index:
        raise InvalidSpec(f"{x!r} is not in the window")
    symbols = []
    xs = []
    cur = x
    x_exit = None
    for m in range(cap):
        xs.append(cur)
        symbols.append(sys.branch_of(cur))
        cur = sys.apply(cur)
        if cur not in trunc.index:
            x_exit = m + 1
            break
    eliminated = []
    never = []
    worst = 1
    for c in sorted(a):
        if not a[c]:
            continue
        y = trunc.states[c]
        if y == x:
            continue
        cur = y
        step = None
        cause = None
        seen = set()
        for m, sym in enumerate(symbols):
            pair = (xs[m], cur)
            if pair in seen:
                cause = "never"
                break
            seen.add(pair)
            if sys.branch_of(cur) != sym:
                step, cause = m + 1, "coding"
                break
            cur = sys.apply(cur)
            if cur not in trunc.index:
                step, cause = m + 1, "escape"
                break
        if cause == "never":
            never.append(y)
            continue
        if step is None:
            raise WindowTooSmall(
                f"states {x!r} and {y!r} not separated within the window "
                f"(x leaves the window after {x_exit} steps)"
                if x_exit is not None
                else f"states {x!r} and {y!r} not separated within {cap} symbols"
            )
        eliminated.append((y, step, cause))
        worst = max(worst, step)
    if never:
        return PmLimitReport(
            x=x,
            stabilization_index=None,
            eliminated=tuple(eliminated),
            never=tuple(never),
            window_horizon=x_exit,
            passed=False,
        )
    if x_exit is not None and x_exit < worst:
        raise WindowTooSmall(
            f"{x!r} leaves the window after {x_exit} steps, "
            f"before stabilization at {worst}"
        )
    prefix = tuple(symbols[:worst])
    result = projection_P(trunc, prefix).apply(a)
    target = {trunc.index[x]: a[trunc.index[x]]} if a.get(trunc.index[x]) else {}
    return PmLimitReport(
        x=x,
        stabilization_index=worst,
        eliminated=tuple(eliminated),
        never=(),
        window_horizon=x_exit,
        passed=result == target,
    )


# ---------------------------------------------------------------------------
# subspaces


@dataclass(frozen=True)
class SubspaceBasis:
    """An orthogonal (not normalized) basis of a subspace.

    Exact mode keeps every entry rational, so vectors are scaled to
    have integral entries rather than unit length; squared norms are
    recorded instead.  Float mode would normalize within tolerance; the
    exact path is the only one the verification suite uses.
    """

    n: int
    vectors: tuple  # tuple of dense tuples of Fractions
    mode: str = "exact"

    def __post_init__(self):
        for v in self.vectors:
            if len(v) != self.n:
                raise InvalidSpec("vector length mismatch")
            if not any(v):
                raise InvalidSpec("zero vector in basis")
        for i in range(len(self.vectors)):
            for j in range(i + 1, len(self.vectors)):
                if linalg.dot(list(self.vectors[i]), list(self.vectors[j])):
                    raise InvalidSpec("basis is not orthogonal")

    @property
    def dimension(self) -> int:
        return len(self.vectors)

    def norms_squared(self) -> tuple:
        return tuple(linalg.dot(list(v), list(v)) for v in self.vectors)

    def project(self, w: list) -> list:
        """Orthogonal projection of w onto the subspace."""
        out = [F0] * self.n
        for b in self.vectors:
            b = list(b)
            c = linalg.dot(w, b) / linalg.dot(b, b)
            if c:
                out = [o + c * bi for o, bi in zip(out, b)]
        return out

    def contains(self, w: list) -> bool:
        return self.project(w) == list(map(Fraction, w))


def _scale_integral(v: list) -> tuple:
    from math import gcd

    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [x * den for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x.numerator))
    g = g or 1
    return tuple(Fraction(x, g) for x in ints)


def make_subspace(n: int, vectors: list) -> SubspaceBasis:
    """Orthogonalize a spanning set into a SubspaceBasis."""
    basis = linalg.gram_schmidt_orthogonal(vectors)
    return SubspaceBasis(n=n, vectors=tuple(_scale_integral(v) for v in basis))


def subspace_from_invariant_set(trunc: Truncation, states) -> SubspaceBasis:
    """H_K = span{e_x : x in K} for an invariant K inside the window.

    Invariance is required relative to the window: images and preimages
    of members that stay in the window must stay in K.
    """
    k_set = set(states)
    win = set(trunc.states)
    if not k_set <= win:
        raise InvalidSpec("K must lie inside the window")
    for x in sorted(k_set, key=repr):
        y = trunc.sys.apply(x)
        if y in win and y not in k_set:
            raise InvalidSpec(f"K is not forward invariant: f({x!r}) = {y!r}")
        for p, _ in trunc.sys.preimages(x):
            if p in win and p not in k_set:
                raise InvalidSpec(f"K is not preimage closed: {p!r} -> {x!r}")
    vectors = []
    for x in trunc.states:
        if x in k_set:
            v = [F0] * trunc.n
            v[trunc.index[x]] = F1
            vectors.append(tuple(v))
    return SubspaceBasis(n=trunc.n, vectors=tuple(vectors))


@dataclass(frozen=True)
class ReducingReport:
    passed: bool
    interior_only: bool
    witness: tuple | None  # (branch, "T"|"T*", basis index, state)


def is_reducing(
    trunc: Truncation,
    basis: SubspaceBasis,
    interior_only: bool = False,
    tolerance: float | None = None,
) -> ReducingReport:
    """Does every M_i and M_i^T map the subspace into itself?

    With interior_only the containment is asserted only on coordinates
    of interior states, since escape-affected rows are truncation
    artifacts rather than facts about the full system.  Residuals are
    compared to zero exactly unless a tolerance is given (large-window
    float experiments only).
    """
    if basis.n != trunc.n:
        raise InvalidSpec("basis dimension does not match the truncation")
    allowed = None
    if interior_only:
        inter = trunc.interior()
        allowed = {trunc.index[x] for x in inter}

    def nonzero(x) -> bool:
        if tolerance is None:
            return bool(x)
        return abs(x) > tolerance

    for bi, v in enumerate(basis.vectors):
        vec = {c: x for c, x in enumerate(v) if x}
        for i in range(1, trunc.k + 1):
            for adjoint, tag in ((False, "T"), (True, "T*")):
                w_sp = apply_branch(trunc, i, vec, adjoint=adjoint)
                w = [F0] * trunc.n
                for c, x in w_sp.items():
                    w[c] = x
                resid = [a - b for a, b in zip(w, basis.project(w))]
                bad = next(
                    (
                        c
                        for c, x in enumerate(resid)
                        if nonzero(x) and (allowed is None or c in allowed)
                    ),
                    None,
                )
                if bad is not None:
                    return ReducingReport(
                        passed=False,
                        interior_only=interior_only,
                        witness=(i, tag, bi, trunc.states[bad]),
                    )
    return ReducingReport(passed=True, interior_only=interior_only, witness=None)


# ---------------------------------------------------------------------------
# commutant


class _EntryUF:
    """Union-find over matrix entry positions plus a zero sink."""

    def __init__(self, size: int):
        self.parent = list(range(size + 1))
        self.zero = size

    def find(self, a: int) -> int:
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a: int, b: int):
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        # keep the sink canonical so zeroed classes stay recognizable
        if rb == self.zero:
            ra, rb = rb, ra
        if ra == self.zero:
            self.parent[rb] = ra
        else:
            self.parent[rb] = ra


@dataclass(frozen=True)
class CommutantReport:
    dimension: int
    abelian: bool
    nonabelian_witness: tuple | None  # pair of basis indices that fail to commute
    basis: tuple  # entry classes: frozensets of (row, col) positions
    blocks: tuple  # SubspaceBasis refinement into reducing subspaces
    block_scalar: tuple  # per block: True iff all commutant elements act scalar
    lattice_size: int | None  # 2**len(blocks) when abelian, None otherwise

    @property
    def minimal_subspaces(self) -> tuple:
        return self.blocks


def _entry_classes(trunc: Truncation) -> list:
    n = trunc.n
    uf = _EntryUF(n * n)

    def pos(r, c):
        return r * n + c

    for b in range(trunc.k):
        fwd = trunc.maps[b]
        inv = trunc.inverse_maps[b]
        in_branch = set(fwd)
        in_image = set(inv)
        for x in range(n):
            fx = fwd.get(x)
            for w in range(n):
                iw = inv.get(w)
                # A M = M A entry (w, x)
                if fx is not None and iw is not None:
                    uf.union(pos(w, fx), pos(iw, x))
                elif fx is not None:
                    uf.union(pos(w, fx), uf.zero)
                elif iw is not None:
                    uf.union(pos(iw, x), uf.zero)
                # A M^T = M^T A entry (w, x); M^T e_x = e_{inv(x)}
                ix = inv.get(x)
                fw = fwd.get(w)
                if ix is not None and fw is not None:
                    uf.union(pos(w, ix), pos(fw, x))
                elif ix is not None:
                    uf.union(pos(w, ix), uf.zero)
                elif fw is not None:
                    uf.union(pos(fw, x), uf.zero)
    classes: dict = {}
    for r in range(n):
        for c in range(n):
            root = uf.find(pos(r, c))
            if root == uf.zero:
                continue
            classes.setdefault(root, []).append((r, c))
    out = [frozenset(v) for v in classes.values()]
    out.sort(key=lambda s: min(s))
    return out


def _indicator(n: int, cls: frozenset) -> list:
    m = linalg.zeros(n, n)
    for r, c in cls:
        m[r][c] = F1
    return m


def _products_commute(n: int, ca: frozenset, cb: frozenset) -> bool:
    by_row_b: dict = {}
    for r, c in cb:
        by_row_b.setdefault(r, []).append(c)
    by_row_a: dict = {}
    for r, c in ca:
        by_row_a.setdefault(r, []).append(c)

    def product(left_rows, right_rows):
        out: dict = {}
        for r, mids in left_rows.items():
            for v in mids:
                for c in right_rows.get(v, ()):
                    out[(r, c)] = out.get((r, c), 0) + 1
        return out

    return product(by_row_a, by_row_b) == product(by_row_b, by_row_a)


def commutant_projections(trunc: Truncation, max_dim: int = 4096) -> CommutantReport:
    """Exact commutant of {M_i, M_i^T} and its reducing-subspace blocks.

    Requires an escape-free truncation (otherwise the M_i are not the
    honest operators of a closed system and the commutant would mix
    truncation artifacts into the answer).

    The entry classes give the commutant basis directly.  If the
    commutant is abelian, the space is split into joint rational
    spectral blocks of the basis matrices (plus deterministic sampled
    combinations, which separates blocks whose basis spectra are
    accidentally aligned); each block is a reducing subspace, and
    blocks on which everything acts as a scalar are certified minimal.
    A non-abelian commutant has equivalent sub-representations and
    therefore infinitely many reducing subspaces; the failing basis
    pair is reported instead of a lattice.
    """
    if trunc.escape_count:
        raise NotClosedSystem(
            f"window has {trunc.escape_count} escaping states; "
            "the commutant needs a closed truncation"
        )
    n = trunc.n
    classes = _entry_classes(trunc)
    dim = len(classes)
    if dim > max_dim:
        raise InvalidSpec(f"commutant dimension {dim} exceeds max_dim")
    witness = None
    for i in range(dim):
        for j in range(i + 1, dim):
            if not _products_commute(n, classes[i], classes[j]):
                witness = (i, j)
                break
        if witness:
            break
    if witness is not None:
        return CommutantReport(
            dimension=dim,
            abelian=False,
            nonabelian_witness=witness,
            basis=tuple(classes),
            blocks=(),
            block_scalar=(),
            lattice_size=None,
        )

    mats = [_indicator(n, cls) for cls in classes]
    # deterministic extra combinations guard against aligned spectra
    extras = []
    if dim > 1:
        for seed in (1, 2):
            coeffs = [((seed * 7 + 3 * t) % 11) + 1 for t in range(dim)]
            extras.append(
                [
                    [
                        sum(coeffs[t] * mats[t][r][c] for t in range(dim))
                        for c in range(n)
                    ]
                    for r in range(n)
                ]
            )

    blocks = [[tuple(row) for row in linalg.identity(n)]]
    for e in mats + extras:
        ints = [[int(x) for x in row] for row in e]
        eigs = linalg.rational_eigenvalues(ints)
        new_blocks = []
        for block in blocks:
            if len(block) == 1:
                new_blocks.append(block)
                continue
            new_blocks.extend(_split_block(e, block, eigs, n))
        blocks = new_blocks

    subspaces = []
    scalar_flags = []
    for block in blocks:
        basis = make_subspace(n, [list(v) for v in block])
        subspaces.append(basis)
        scalar_flags.append(
            all(_acts_as_scalar(m, basis) for m in mats)
        )
    order = sorted(range(len(subspaces)), key=lambda t: _block_key(subspaces[t]))
    subspaces = [subspaces[t] for t in order]
    scalar_flags = [scalar_flags[t] for t in order]
    return CommutantReport(
        dimension=dim,
        abelian=True,
        nonabelian_witness=None,
        basis=tuple(classes),
        blocks=tuple(subspaces),
        block_scalar=tuple(scalar_flags),
        lattice_size=2 ** len(subspaces),
    )


def _block_key(basis: SubspaceBasis):
    supports = sorted(
        min(c for c, x in enumerate(v) if x) for v in basis.vectors
    )
    return (supports[0], -basis.dimension, supports)


def _split_block(e: list, block: list, eigs: list, n: int) -> list:
    """Split span(block) into rational generalized eigenspaces of e."""
    d = len(block)
    cols = [[block[j][r] for j in range(d)] for r in range(n)]  # n x d
    pieces = []
    covered = []
    for lam in eigs:
        shifted = [
            [e[r][c] - (lam if r == c else 0) for c in range(n)] for r in range(n)
        ]
        power = linalg.mat_pow(shifted, n)
        reduced = linalg.mat_mul(power, cols)  # n x d
        null = linalg.nullspace(reduced)
        if not null:
            continue
        vecs = []
        for coeff in null:
            v = [
                sum(coeff[j] * block[j][r] for j in range(d)) for r in range(n)
            ]
            vecs.append(v)
            covered.append(v)
        pieces.append(vecs)
    # remainder: image of the product of all (e - lam)^n, invertible off
    # the rational part
    if covered:
        h = linalg.identity(n)
        for lam in eigs:
            shifted = [
                [e[r][c] - (lam if r == c else 0) for c in range(n)]
                for r in range(n)
            ]
            h = linalg.mat_mul(linalg.mat_pow(shifted, n), h)
        rem = [linalg.mat_vec(h, list(v)) for v in block]
        rem_basis = linalg.gram_schmidt_orthogonal(rem)
        if rem_basis:
            pieces.append(rem_basis)
        total = sum(len(p) for p in pieces)
        if total != d:
            raise AssertionError("spectral split lost dimensions")
    else:
        pieces = [block]
    return [[tuple(v) for v in p] for p in pieces]


def _acts_as_scalar(m: list, basis: SubspaceBasis) -> bool:
    first = None
    for v in basis.vectors:
        v = list(v)
        w = linalg.mat_vec(m, v)
        nv = linalg.dot(v, v)
        lam = linalg.dot(w, v) / nv
        if first is None:
            first = lam
        if lam != first:
            return False
        if any(wi != lam * vi for wi, vi in zip(w, v)):
            return False
    return True


# ---------------------------------------------------------------------------
# fixed vectors of word operators


@dataclass(frozen=True)
class FixedVectorsReport:
    word: tuple
    basis: SubspaceBasis
    dimension: int


def fixed_vectors_of_word(trunc: Truncation, word) -> FixedVectorsReport:
    """The eigenspace {v : M_I v = v}, by exact elimination.

    M_I - Id is assembled densely and its nullspace computed over the
    rationals; no structure of M_I is assumed beyond linearity, so this
    is an independent check on anything derived combinatorially from
    the cycle structure of the index map.
    """
    word = check_word(word, trunc.k)
    if not word:
        raise InvalidSpec("need a nonempty word")
    n = trunc.n
    # column c of M_I is e_{chase(c)} or 0
    a = linalg.zeros(n, n)
    for c in range(n):
        cur = c
        for i in word:
            cur = trunc.maps[i - 1].get(cur)
            if cur is None:
                break
        if cur is not None:
            a[cur][c] += F1
    for i in range(n):
        a[i][i] -= F1
    null = linalg.nullspace(a)
    basis = make_subspace(n, null) if null else SubspaceBasis(n=n, vectors=())
    return FixedVectorsReport(word=word, basis=basis, dimension=basis.dimension)

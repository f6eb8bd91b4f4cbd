"""Truncated partial isometries, projections, reducing subspaces, commutant."""

from fractions import Fraction

import pytest

from branchdyn import coding, linalg, operators, systems
from branchdyn.errors import InvalidSpec, NotClosedSystem, WindowTooSmall

F = Fraction


def _table(branch, image, k=None):
    return systems.make_system(systems.FiniteTable.make(branch, image, k=k))


def twin_two_cycles():
    # {1<->2} and {3<->4}, same branch pattern in both components
    return _table({1: 1, 2: 2, 3: 1, 4: 2}, {1: 2, 2: 1, 3: 4, 4: 3}, k=2)


def two_plus_three():
    # {1<->2} and {3->4->5->3}; codings distinguish all five states
    return _table(
        {1: 1, 2: 2, 3: 1, 4: 2, 5: 1},
        {1: 2, 2: 1, 3: 4, 4: 5, 5: 3},
        k=2,
    )


def e(trunc, x, coeff=F(1)):
    return {trunc.index[x]: coeff}


# -- truncation construction ------------------------------------------------


def test_collatz_window_1_4(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    assert t.states == (1, 2, 3, 4)
    # branch 1: only 1 -> 4 stays inside; 3 -> 10 escapes
    assert t.maps[0] == {t.index[1]: t.index[4]}
    assert t.escapes[0] == frozenset({3})
    # branch 2: 4 -> 2 and 2 -> 1
    assert t.maps[1] == {t.index[4]: t.index[2], t.index[2]: t.index[1]}
    assert t.escapes[1] == frozenset()


def test_swap_truncation(swap2):
    t = operators.build_truncation(swap2, None)
    assert t.maps[0] == {t.index[1]: t.index[2]}
    assert t.maps[1] == {t.index[2]: t.index[1]}
    assert t.escape_count == 0


def test_branch_window_disjoint(collatz):
    # a window of even numbers never meets the odd branch
    t = operators.build_truncation(collatz, [2, 4, 8])
    assert t.maps[0] == {}
    assert t.branch_matrix(1) == linalg.zeros(3, 3)


def test_partial_isometry_identity(collatz, swap1, alphabeta3):
    for sys, window in (
        (collatz, (1, 30)),
        (swap1, None),
        (alphabeta3, (1, 20)),
    ):
        t = operators.build_truncation(sys, window)
        for i in range(1, t.k + 1):
            m = t.branch_matrix(i)
            mt = linalg.transpose(m)
            assert linalg.mat_mul(linalg.mat_mul(m, mt), m) == m


def test_row_column_sparsity(collatz):
    t = operators.build_truncation(collatz, (1, 64))
    for i in range(1, 3):
        fwd = t.maps[i - 1]
        assert len(set(fwd.values())) == len(fwd)  # rows hit at most once


def test_interior_excludes_escape_neighbors(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    # 3 escapes forward; 4 has preimage 8 outside; 1 and 2 are interior
    assert t.interior() == frozenset({1, 2})


def test_custom_order_must_be_permutation(collatz):
    with pytest.raises(InvalidSpec):
        operators.build_truncation(collatz, (1, 4), order=(1, 2, 3))


# -- word operators -----------------------------------------------------------


def test_word_op_on_cycle(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    assert operators.apply_word_op(t, (1, 2, 2), e(t, 1)) == e(t, 1)
    assert operators.apply_word_op(t, (1, 2, 2), e(t, 3)) == {}
    assert operators.apply_word_op(t, (1, 2, 2), {}) == {}


def test_word_op_matches_dense_product(collatz):
    t = operators.build_truncation(collatz, (1, 20))
    word = (1, 2, 2, 1, 2)
    dense = linalg.identity(t.n)
    for i in word:
        dense = linalg.mat_mul(t.branch_matrix(i), dense)
    for x in t.states:
        out = operators.apply_word_op(t, word, e(t, x))
        col = [row[t.index[x]] for row in dense]
        assert out == {c: v for c, v in enumerate(col) if v}


def test_word_adjoint_is_transpose_route(collatz):
    t = operators.build_truncation(collatz, (1, 20))
    word = (1, 2, 2)
    fwd = operators.apply_word_op(t, word, e(t, 1))
    back = operators.apply_word_adjoint(t, word, fwd)
    assert back == e(t, 1)


# -- coding projections --------------------------------------------------------


def projection_oracle(sys, trunc, prefix):
    """Recompute the support by replaying codings of every window state."""
    m = len(prefix)
    keep = set()
    for y in trunc.states:
        cur = y
        ok = True
        for want in prefix:
            if sys.branch_of(cur) != want:
                ok = False
                break
            cur = sys.apply(cur)
            if cur not in trunc.index:
                ok = False
                break
        if ok:
            keep.add(trunc.index[y])
    return keep


def test_projection_support_on_window_50(collatz):
    t = operators.build_truncation(collatz, (1, 50))
    p3 = operators.projection_P(t, (1, 2, 2))
    assert p3.coordinates == frozenset(projection_oracle(collatz, t, (1, 2, 2)))
    assert {t.index[1], t.index[5]} <= p3.coordinates

    p4 = operators.projection_P(t, (1, 2, 2, 1))
    assert p4.coordinates == frozenset(projection_oracle(collatz, t, (1, 2, 2, 1)))
    assert t.index[1] in p4.coordinates
    assert t.index[5] not in p4.coordinates  # 5 codes (1,2,2,2)


def test_projection_can_be_zero(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    p = operators.projection_P(t, (2, 2, 2, 2, 2, 2))
    assert p.coordinates == frozenset()


def test_projection_idempotent_self_adjoint(collatz):
    t = operators.build_truncation(collatz, (1, 50))
    for prefix in ((1,), (2, 1), (1, 2, 2), (2, 2, 1, 2)):
        m = operators.projection_P(t, prefix).matrix()
        assert linalg.mat_mul(m, m) == m
        assert linalg.transpose(m) == m


def test_projection_matches_operator_route(collatz):
    # independent route: P = (T_I)^adj T_I applied columnwise
    t = operators.build_truncation(collatz, (1, 50))
    prefix = (1, 2, 2)
    p = operators.projection_P(t, prefix)
    for x in t.states:
        v = operators.apply_word_op(t, prefix, e(t, x))
        w = operators.apply_word_adjoint(t, prefix, v)
        assert w == p.apply(e(t, x))


# -- P_m limits -----------------------------------------------------------------


def test_pm_stabilizes_at_distinguishing_length(collatz):
    t = operators.build_truncation(collatz, (1, 10**4))
    a = {t.index[1]: F(1), t.index[5]: F(1)}
    rep = operators.verify_pm_limit(t, a, 1)
    assert rep.passed
    assert rep.stabilization_index == 4
    assert rep.eliminated == ((5, 4, "coding"),)
    assert rep.never == ()


def test_pm_trivial_for_point_mass(collatz):
    t = operators.build_truncation(collatz, (1, 100))
    rep = operators.verify_pm_limit(t, e(t, 1), 1)
    assert rep.passed and rep.stabilization_index == 1


def test_pm_escape_elimination(collatz):
    # in [1,6] the orbit of 5 leaves immediately; elimination by escape
    t = operators.build_truncation(collatz, (1, 6))
    a = {t.index[1]: F(1), t.index[5]: F(1)}
    rep = operators.verify_pm_limit(t, a, 1)
    assert rep.passed
    assert rep.eliminated == ((5, 1, "escape"),)


def test_pm_never_stabilizes_on_swap(swap1):
    t = operators.build_truncation(swap1, None)
    a = {t.index[1]: F(1), t.index[2]: F(1)}
    rep = operators.verify_pm_limit(t, a, 1)
    assert not rep.passed
    assert rep.never == (2,)
    assert rep.stabilization_index is None


def test_pm_window_too_small(collatz):
    t = operators.build_truncation(collatz, (1, 8))
    a = {t.index[7]: F(1), t.index[1]: F(1)}
    with pytest.raises(WindowTooSmall):
        operators.verify_pm_limit(t, a, 7)  # 7 exits before separating from 1


def test_pm_cap_limited(collatz):
    t = operators.build_truncation(collatz, (1, 10**4))
    a = {t.index[1]: F(1), t.index[5]: F(1)}
    with pytest.raises(WindowTooSmall):
        operators.verify_pm_limit(t, a, 1, cap=2)


# -- invariant-set subspaces ----------------------------------------------------


def test_subspace_of_empty_set(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    basis = operators.subspace_from_invariant_set(t, ())
    assert basis.dimension == 0


def test_subspace_of_full_window(swap2):
    t = operators.build_truncation(swap2, None)
    basis = operators.subspace_from_invariant_set(t, (1, 2))
    assert basis.dimension == t.n


def test_subspace_of_cycle(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    basis = operators.subspace_from_invariant_set(t, (1, 2, 4))
    assert basis.dimension == 3


def test_subspace_requires_invariance(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    with pytest.raises(InvalidSpec):
        operators.subspace_from_invariant_set(t, (1,))  # f(1) = 4 missing
    with pytest.raises(InvalidSpec):
        operators.subspace_from_invariant_set(t, (1, 5))  # 5 outside window


# -- reducing checks -------------------------------------------------------------


def test_swap_symmetric_vector_reduces(swap1):
    t = operators.build_truncation(swap1, None)
    basis = operators.make_subspace(2, [[F(1), F(1)]])
    assert operators.is_reducing(t, basis).passed


def test_swap_antisymmetric_vector_reduces(swap1):
    t = operators.build_truncation(swap1, None)
    basis = operators.make_subspace(2, [[F(1), F(-1)]])
    assert operators.is_reducing(t, basis).passed


def test_swap_k2_admits_only_trivial(swap2):
    t = operators.build_truncation(swap2, None)
    for vec in ([F(1), F(1)], [F(1), F(-1)], [F(1), F(0)]):
        basis = operators.make_subspace(2, [vec])
        rep = operators.is_reducing(t, basis)
        assert not rep.passed
        assert rep.witness is not None


def test_reducing_tolerance_mode_agrees(swap1):
    t = operators.build_truncation(swap1, None)
    basis = operators.make_subspace(2, [[F(1), F(1)]])
    assert operators.is_reducing(t, basis, tolerance=1e-9).passed


def test_interior_only_forgives_escape_edges(collatz):
    t = operators.build_truncation(collatz, (1, 4))
    basis = operators.subspace_from_invariant_set(t, (1, 2, 4))
    assert operators.is_reducing(t, basis, interior_only=True).passed


def test_invariant_sets_give_reducing_subspaces():
    # every invariant set must give a reducing subspace; exhaustive on 5 states
    sys = two_plus_three()
    t = operators.build_truncation(sys, None)
    states = sys.states()
    n = len(states)
    for mask in range(2**n):
        K = {states[j] for j in range(n) if mask >> j & 1}
        if any(sys.apply(x) not in K for x in K):
            continue
        if any(p not in K for x in K for p, _ in sys.preimages(x)):
            continue
        basis = operators.subspace_from_invariant_set(t, K)
        if basis.dimension:
            assert operators.is_reducing(t, basis).passed


# -- commutant -------------------------------------------------------------------


def dense_commutant_dimension(trunc):
    """Independent route: assemble the intertwining equations densely
    and count nullspace vectors."""
    n = trunc.n
    mats = []
    for i in range(1, trunc.k + 1):
        m = trunc.branch_matrix(i)
        mats.append(m)
        mats.append(linalg.transpose(m))
    rows = []
    for m in mats:
        for r in range(n):
            for c in range(n):
                row = [F(0)] * (n * n)
                for t_ in range(n):
                    row[r * n + t_] += m[t_][c]  # (A m)[r][c]
                    row[t_ * n + c] -= m[r][t_]  # (m A)[r][c]
                rows.append(row)
    return len(linalg.nullspace(rows))


def test_swap_k1_commutant(swap1):
    t = operators.build_truncation(swap1, None)
    rep = operators.commutant_projections(t)
    assert rep.dimension == 2
    assert rep.abelian
    assert rep.lattice_size == 4
    assert len(rep.minimal_subspaces) == 2
    spans = [b for b in rep.blocks]
    sym = [F(1), F(1)]
    anti = [F(1), F(-1)]
    assert any(b.contains(sym) for b in spans)
    assert any(b.contains(anti) for b in spans)
    assert dense_commutant_dimension(t) == 2


def test_swap_k2_commutant_is_scalars(swap2):
    t = operators.build_truncation(swap2, None)
    rep = operators.commutant_projections(t)
    assert rep.dimension == 1
    assert rep.abelian
    assert rep.lattice_size == 2
    assert len(rep.blocks) == 1 and rep.blocks[0].dimension == 2
    assert dense_commutant_dimension(t) == 1


def test_twin_cycles_commutant_is_nonabelian():
    # two isomorphic components: the commutant swaps them, so it is a
    # full 2x2 matrix algebra over the component pairing and the
    # reducing lattice is infinite; no finite count is reported
    sys = twin_two_cycles()
    t = operators.build_truncation(sys, None)
    rep = operators.commutant_projections(t)
    assert rep.dimension == 4
    assert not rep.abelian
    assert rep.nonabelian_witness is not None
    assert rep.lattice_size is None
    assert dense_commutant_dimension(t) == 4
    # beyond the 4 invariant sets: a cross-diagonal subspace also reduces
    cross = operators.make_subspace(
        4,
        [
            [F(1), F(0), F(1), F(0)],
            [F(0), F(1), F(0), F(1)],
        ],
    )
    assert operators.is_reducing(t, cross).passed
    # while the injection K -> H_K still lands in reducing subspaces
    for K in ((), (1, 2), (3, 4), (1, 2, 3, 4)):
        basis = operators.subspace_from_invariant_set(t, K)
        if basis.dimension:
            assert operators.is_reducing(t, basis).passed


def test_two_plus_three_lattice_matches_invariant_sets():
    sys = two_plus_three()
    t = operators.build_truncation(sys, None)
    rep = operators.commutant_projections(t)
    assert rep.abelian and rep.dimension == 2
    assert rep.lattice_size == 4
    assert all(rep.block_scalar)
    supports = sorted(
        tuple(sorted(t.states[c] for c, v in enumerate(vec) if v))
        for b in rep.blocks
        for vec in [[any(v[c] for v in b.vectors) for c in range(t.n)]]
    )
    assert supports == [(1, 2), (3, 4, 5)]
    assert dense_commutant_dimension(t) == 2


def test_commutant_requires_closed_system(collatz):
    t = operators.build_truncation(collatz, (1, 10))
    with pytest.raises(NotClosedSystem):
        operators.commutant_projections(t)


# -- fixed vectors ------------------------------------------------------------------


def nullspace_fixed_vectors(trunc, word):
    """Independent dense route: null(M_I - Id)."""
    dense = linalg.identity(trunc.n)
    for i in word:
        dense = linalg.mat_mul(trunc.branch_matrix(i), dense)
    a = linalg.mat_add(dense, linalg.mat_scale(linalg.identity(trunc.n), F(-1)))
    return linalg.nullspace(a)


def test_fixed_vectors_of_cycle_word(collatz):
    t = operators.build_truncation(collatz, (1, 100))
    rep = operators.fixed_vectors_of_word(t, (1, 2, 2))
    assert rep.dimension == 1
    e1 = [F(0)] * t.n
    e1[t.index[1]] = F(1)
    assert rep.basis.contains(e1)
    assert len(nullspace_fixed_vectors(t, (1, 2, 2))) == 1


def test_fixed_vectors_absent(collatz):
    t = operators.build_truncation(collatz, (1, 100))
    rep = operators.fixed_vectors_of_word(t, (1, 2))
    assert rep.dimension == 0
    assert nullspace_fixed_vectors(t, (1, 2)) == []


def test_fixed_vectors_degenerate_without_uniqueness(swap1):
    t = operators.build_truncation(swap1, None)
    rep = operators.fixed_vectors_of_word(t, (1, 1))
    assert rep.dimension == 2
    assert len(nullspace_fixed_vectors(t, (1, 1))) == 2


def test_fixed_vectors_match_nullspace_on_samples(five_x_one):
    t = operators.build_truncation(five_x_one, (1, 120))
    for word in ((1, 2, 2), (2, 2), (1, 2, 2, 2, 2, 2, 1), (2, 1)):
        rep = operators.fixed_vectors_of_word(t, word)
        dense = nullspace_fixed_vectors(t, word)
        assert rep.dimension == len(dense)
        for v in dense:
            assert rep.basis.contains(v)

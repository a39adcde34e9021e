from fractions import Fraction

import numpy as np
import pytest

from tracecert import parse
from tracecert.certkit import example42, motzkin_polynomial, verify
from tracecert.commutative import CommPoly
from tracecert.ncpoly import NcPoly, commutative_project, words_up_to
from tracecert.tsos import (
    FEASIBLE,
    INFEASIBLE,
    DegreeTooHigh,
    PutinarSearchFailure,
    RoundingFailure,
    TracialFunctional,
    build_comm_gram,
    build_gram,
    certify,
    check_conditions,
    commutative_putinar_search,
    extract_dual,
    round_certificate,
    solve,
    zero_tuple_functional,
)
from tracecert.tsos.gram import orbit_key
from tracecert.tsos.rounding import ldl

F = parse("(1 - X^2)*(1 - Y^2)")


def test_basis_sizes():
    p = build_gram(F, Fraction(1, 10), 3)
    assert p.block_sizes == [15, 7, 7]
    assert len(p.rows) == len({orbit_key(w) for w in words_up_to(2, 6)})


def test_build_gram_rejects_high_degree():
    with pytest.raises(DegreeTooHigh):
        build_gram(F, 0, 1)


def test_build_gram_rejects_non_symmetric_class():
    with pytest.raises(ValueError):
        build_gram(parse("X*Y*Z"), 0, 2)


def test_constraint_matrix_reproduces_expansion(rng):
    p = build_gram(F, 0, 2)
    blocks = []
    for size in p.block_sizes:
        M = rng.integers(-3, 4, size=(size, size))
        blocks.append([[Fraction(int(v)) for v in row] for row in (M + M.T)])
    x = p.exact_vector_from_blocks(blocks)
    lhs = p.A @ np.array([float(v) for v in x])
    expansion = p.expansion(blocks)
    assert np.allclose(lhs, [float(v) for v in p.class_vector(expansion)])


def test_trivial_problem():
    r = solve(build_gram(parse("1 - X^2"), 0, 1))
    assert r.status == FEASIBLE
    assert verify(r.certificate)
    assert [(t.gen, t.g, t.lam) for t in r.certificate.terms] == [(1, NcPoly.constant(1, 1), 1)]


@pytest.mark.parametrize("k", [1, 3])
def test_negative_constant(k):
    p = build_gram(parse("0 - 1", 2), 0, k)
    r = solve(p)
    assert r.status == INFEASIBLE
    L = r.functional
    assert L(parse("0 - 1", 2)) == -1
    check = check_conditions(L, p)
    assert check.ok
    assert check.min_eigenvalue >= 0 and check.unit_defect == 0


def test_known_level_is_feasible():
    c = example42(4)
    r = solve(build_gram(c.target, c.epsilon, c.level))
    assert r.status == FEASIBLE
    assert verify(r.certificate)


@pytest.mark.parametrize("k", [2, 3])
def test_epsilon_zero_has_dual(k):
    p = build_gram(F, 0, k)
    r = solve(p)
    assert r.status == INFEASIBLE
    check = check_conditions(r.functional, p)
    assert check.ok
    assert r.functional(F) < 0


def test_dual_json_roundtrip():
    p = build_gram(F, 0, 2)
    L = solve(p).functional
    back = TracialFunctional.from_dict(L.to_dict(), 2)
    assert back.values == pytest.approx(L.values)


def test_extract_dual_rejects_non_separating():
    p = build_gram(F, 0, 2)
    with pytest.raises(Exception):
        extract_dual(p, np.zeros(len(p.rows)))


def test_weak_duality():
    dual_problem = build_gram(F, 0, 3)
    L = solve(dual_problem).functional
    cert = solve(build_gram(F, Fraction(1, 10), 3)).certificate
    assert verify(cert)
    # every term has nonnegative value under L, so L(f + eps) >= -tol
    total = 0.0
    for t in cert.terms:
        gen = NcPoly.constant(2, 1) if t.gen == 0 else 1 - NcPoly.word((t.gen, t.gen), 2)
        total += float(t.lam) * L(t.g.adj() * gen * t.g)
    assert total >= -1e-6 * len(cert.terms)
    assert L(F + Fraction(1, 10)) == pytest.approx(total, abs=1e-6)


def test_caratheodory_bound():
    p = build_gram(F, Fraction(1, 10), 3)
    cert = solve(p).certificate
    counts = cert.terms_by_generator()
    assert all(c <= len(p.rows) for c in counts.values())


def test_ldl_exact():
    G = [[Fraction(4), Fraction(2)], [Fraction(2), Fraction(3)]]
    L, d = ldl(G)
    assert d == [4, 2]
    assert L[1][0] == Fraction(1, 2)
    L, d = ldl([[Fraction(0), Fraction(0)], [Fraction(0), Fraction(1)]])
    assert d == [0, 1]
    with pytest.raises(RoundingFailure):
        ldl([[Fraction(0), Fraction(1)], [Fraction(1), Fraction(1)]])
    with pytest.raises(RoundingFailure):
        ldl([[Fraction(1), Fraction(2)], [Fraction(2), Fraction(1)]])


def _near_singular():
    """Exact feasible blocks whose first block has a tiny eigenvalue and
    whose localizing entry sits off the rounding grid."""
    v = [Fraction(1), Fraction(1, 3), Fraction(1, 7)]
    t = Fraction(1, 10**8)
    G0 = [[v[a] * v[b] + (t if a == b else 0) for b in range(3)] for a in range(3)]
    G1 = [[Fraction(7, 5) / 10**6]]
    G2 = [[Fraction(0)]]
    p0 = build_gram(NcPoly.constant(2, 1), 0, 1)
    f = p0.expansion([G0, G1, G2])
    f = (f + f.adj()) / 2
    p = build_gram(f, 0, 1)
    blocks = [np.array([[float(x) for x in row] for row in G]) for G in (G0, G1, G2)]
    return p, blocks


def test_exact_rational_input_roundtrips():
    p = build_gram(parse("1 - X^2 + 1/4*X*X"), 0, 1)
    blocks = [np.array([[0.0, 0.0], [0.0, 0.25]]), np.array([[1.0]])]
    cert = round_certificate(p, blocks)
    assert verify(cert)
    assert sorted((t.gen, t.lam) for t in cert.terms) == [(0, Fraction(1, 4)), (1, 1)]


def test_near_singular_needs_larger_denominator():
    p, blocks = _near_singular()
    with pytest.raises(RoundingFailure):
        round_certificate(p, blocks, denominator=10**6, max_denominator=10**6)
    cert = round_certificate(p, blocks)
    assert verify(cert)


def test_commutative_gram_rows():
    g = commutative_project(F)
    p = build_comm_gram(g, Fraction(1, 10), 2)
    assert p.block_sizes == [6, 3, 3]
    assert len(p.rows) == 15


def test_commutative_search_trivial():
    x = CommPoly.var(1, 2)
    cc = commutative_putinar_search(1 - x * x, 0, 1)
    assert cc.x_terms == ((Fraction(1), CommPoly.constant(2, 1)),)
    assert cc.squares == () and cc.y_terms == ()


def test_commutative_search_motzkin():
    g = commutative_project(motzkin_polynomial())
    for k in range(3, 7):
        try:
            cc = commutative_putinar_search(g, Fraction(1, 4), k)
            break
        except PutinarSearchFailure:
            continue
    else:
        pytest.fail("no certificate up to level 6")
    assert cc.rhs() == g + Fraction(1, 4)


def test_commutative_search_negative():
    with pytest.raises(PutinarSearchFailure):
        commutative_putinar_search(CommPoly.constant(2, -1), 0, 2)


def test_certify_sorted_and_generic_agree():
    fast = certify(F, Fraction(1, 10), 4, fast_path="on")
    slow = certify(F, Fraction(1, 10), 4, fast_path="off")
    assert fast.status == slow.status == FEASIBLE
    assert verify(fast.certificate) and verify(slow.certificate)


def test_certify_zero_polynomial():
    f = parse("X*Y*Z - Z*Y*X")
    f = (f + f.adj()) / 2
    assert f.is_zero()
    r = certify(NcPoly.zero(3), Fraction(1, 5), 2)
    assert r.status == FEASIBLE
    assert verify(r.certificate)


def test_certify_nonsymmetric_class_representative():
    f = parse("X*Y*Y + Y*Y*X - 1") * -1 + 3
    r = certify(f, Fraction(1, 2), 3, fast_path="off")
    assert r.status == FEASIBLE
    assert r.certificate.target == f
    assert verify(r.certificate)


def test_certify_fast_path_on_requires_sorted():
    with pytest.raises(ValueError):
        certify(parse("X*Y*X*Y + Y*X*Y*X"), Fraction(1), 3, fast_path="on")


def test_zero_tuple_functional():
    L = zero_tuple_functional(2, 2)
    assert L(parse("1 - X*Y")) == 1


def test_dual_functional_has_gns_model():
    from tracecert.mateval import gns_truncated

    p = build_gram(F, 0, 3)
    L = solve(p).functional
    model = gns_truncated(L, 3, 2)
    table = model.moment_table(2)
    assert max(abs(table.value(w) - L.value(w)) for w in table.values) < 1e-6

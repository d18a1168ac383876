from __future__ import annotations

import random
from fractions import Fraction

import pytest

from conftest import boundary_zero_instance, toy_instance
from oracles import brute_force_polya
from qmcert.certgen import (
    HParameters,
    PolyaExpansion,
    SearchLimits,
    barycentric_homogenize,
    build_h,
    compute_alpha,
    derive_exponents,
    h_sample_witness,
    polya_iterate,
    search_certificate,
)
from qmcert.errors import KappaExhausted, OddDegreeInput, SearchExhausted
from qmcert.frame import ProblemInstance, build_curve, build_simplex
from qmcert.polyring import Y, Z, parse
from qmcert.uniposit import BinaryForm, UniPoly


def const_forms(H: dict) -> dict:
    return {b: BinaryForm(0, (Fraction(c),)) for b, c in H.items()}


@pytest.mark.parametrize("m,m_list,m0,k", [(2, (0,), 2, 1), (4, (2, 0), 2, 3), (6, (2,), 4, 2), (0, (4, 2), 4, 0)])
def test_exponents_balance_degrees(m, m_list, m0, k):
    p = derive_exponents(m, m_list, m0, k)
    assert p.H_degree == m + p.M * m0
    for mi, ei, Mi in zip(m_list, p.e, p.Mi):
        assert 0 <= ei < m0 and (mi + ei) % m0 == 0
        assert Mi >= 0
        assert p.H_degree == p.r + (2 * k + 1) * (mi + ei) + Mi * m0
    assert p.r == m % m0


def test_exponents_toy_values():
    p = derive_exponents(2, (0,), 2, 1)
    assert (p.r, p.e, p.M, p.Mi, p.H_degree) == (0, (0,), 0, (1,), 2)


def test_exponents_reject_odd():
    with pytest.raises(OddDegreeInput):
        derive_exponents(3, (0,), 2, 1)
    with pytest.raises(OddDegreeInput):
        derive_exponents(2, (1,), 2, 1)


def _h_direct(inst, params, x, y, z):
    """h at a point, evaluated without building any polynomial."""
    def hom(p, deg):
        return sum(c * x ** m[0] * y ** m[1] * z ** (deg - m[1]) for m, c in p.terms.items())

    q = sum(c * y ** j * z ** (params.m0 - j) for j, c in enumerate(inst.q.coeffs))
    val = q ** params.M * hom(inst.f, params.m)
    s2 = y * y + z * z
    corr = 0
    for gi, ai, ei, mi, Mi in zip(inst.g, params.alpha, params.e, params.m_list, params.Mi):
        G = ai * s2 ** (ei // 2) * hom(gi, mi)
        corr += G * (G - q ** ((mi + ei) // params.m0)) ** (2 * params.k) * q ** Mi
    return val - params.lam * s2 ** (params.r // 2) * corr


@pytest.mark.parametrize("k,lam", [(1, 1), (2, 3), (4, Fraction(1, 2))])
def test_build_h_matches_direct_evaluation(k, lam):
    inst = toy_instance()
    fr = build_simplex(1, inst.N)
    curve = build_curve(inst.q)
    p = derive_exponents(2, (0,), 2, k)
    p = HParameters(**{**p.__dict__, "alpha": tuple(compute_alpha(inst, fr, curve, p.e)), "lam": Fraction(lam)})
    h = build_h(inst, p)
    assert h.is_homogeneous_yz(p.H_degree)
    rng = random.Random(1)
    for _ in range(20):
        x, y, z = (Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(3))
        assert h.eval({1: x, Y: y, Z: z}) == _h_direct(inst, p, x, y, z)
    assert h.eval({1: 0, Y: 1, Z: 0}) == _h_direct(inst, p, Fraction(0), Fraction(1), Fraction(0))


def test_alpha_keeps_scaled_generators_below_one_on_curve():
    inst = toy_instance()
    fr = build_simplex(1, inst.N)
    curve = build_curve(inst.q)
    (alpha,) = compute_alpha(inst, fr, curve, (0,))
    lo, hi = fr.box()
    for k in range(41):
        x = lo + (hi - lo) * Fraction(k, 40)
        assert abs(alpha * (1 - x * x)) < 1


@pytest.mark.parametrize("text,n", [("2*Y^2 - X1^2*Y^2 + Z^2", 1), ("X1*X2*Y*Z - X2^2*Z^2 + 3*Y^2", 2),
                                    ("X1^3*Y^2 + X2*Z^2 - X3*Y*Z + 1/2*Y^2", 3)])
def test_barycentric_rewrite_is_exact(text, n):
    h = parse(text, n)
    fr = build_simplex(n, 2)
    H = barycentric_homogenize(h, fr)
    d = h.x_degree()
    assert all(sum(b) == d for b in H)
    assert PolyaExpansion(d, H, fr).reexpand() == h
    # pointwise oracle
    rng = random.Random(n)
    for _ in range(10):
        x = [Fraction(rng.randint(-6, 6), 3) for _ in range(n)]
        y, z = Fraction(rng.randint(-4, 4)), Fraction(rng.randint(0, 4))
        pt = {j + 1: v for j, v in enumerate(x)}
        ells = [l.eval(pt) for l in fr.barycentric]
        total = Fraction(0)
        for beta, form in H.items():
            term = form(y, z)
            for e, b in zip(ells, beta):
                term *= e ** b
            total += term
        pt.update({Y: y, Z: z})
        assert total == h.eval(pt)


@pytest.mark.parametrize("H", [
    {(2, 0): 1, (0, 2): 1, (1, 1): -1},
    {(2, 0): 1, (0, 2): 1, (1, 1): Fraction(-3, 2)},
    {(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1, (1, 1, 1): -1},
    {(1, 0): 1, (0, 1): 1},
])
@pytest.mark.parametrize("strict", [False, True])
def test_polya_matches_brute_force(H, strict):
    size = len(next(iter(H)))
    fr = build_simplex(size - 1, 1)
    kappa, coeffs = brute_force_polya(H, size, 14, strict)
    assert kappa is not None
    exp = polya_iterate(const_forms(H), fr, 14, strict=strict)
    assert exp.kappa == kappa
    assert {b: f.coeffs[0] for b, f in exp.coefficients.items()} == coeffs
    assert exp.reexpand() == PolyaExpansion(sum(next(iter(H))), const_forms(H), fr).reexpand()


def test_polya_exhausts_on_zero_in_simplex():
    H = const_forms({(2, 0): 1, (0, 2): 1, (1, 1): -2})  # (l0 - l1)^2
    with pytest.raises(KappaExhausted) as info:
        polya_iterate(H, build_simplex(1, 1), 10)
    assert info.value.kappa_max == 10
    assert info.value.witness is not None


def test_polya_term_cap():
    H = const_forms({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1, (1, 1, 0): -Fraction(19, 10)})
    with pytest.raises(KappaExhausted):
        polya_iterate(H, build_simplex(2, 1), 60, max_terms=50)


def test_polya_with_binary_form_coefficients():
    # (Y^2 + Z^2) (l0^2 + l1^2) - Y Z l0 l1 is positive on simplex x upper half plane
    H = {(2, 0): BinaryForm(2, (1, 0, 1)), (0, 2): BinaryForm(2, (1, 0, 1)), (1, 1): BinaryForm(2, (0, -1, 0))}
    exp = polya_iterate(H, build_simplex(1, 1), 20)
    # at kappa = 2 the middle coefficient -YZ vanishes at (1, 0)
    assert exp.kappa == 3
    # with -4YZ the form vanishes at l0 = l1, y = z: never positive
    H[(1, 1)] = BinaryForm(2, (0, -4, 0))
    with pytest.raises(KappaExhausted):
        polya_iterate(H, build_simplex(1, 1), 30)


def test_search_toy_succeeds():
    inst = toy_instance()
    seen = []
    res = search_certificate(inst, SearchLimits(), on_attempt=seen.append)
    assert seen[-1]["status"] == "success"
    assert res.trace == seen
    assert res.params.k >= 1 and res.params.lam >= 1
    h = build_h(inst, res.params)
    assert h_sample_witness(h, res.frame) is None
    H = barycentric_homogenize(h, res.frame)
    assert res.expansion.reexpand() == PolyaExpansion(h.x_degree(), H, res.frame).reexpand()


def test_search_exhausts_on_boundary_zero_instance():
    inst = boundary_zero_instance()
    limits = SearchLimits(max_k=4, max_lambda_doublings=2, max_kappa=20)
    with pytest.raises(SearchExhausted) as info:
        search_certificate(inst, limits)
    trace = info.value.trace
    assert len(trace) == 3 * 3  # lambda in {1, 2, 4}, k in {1, 2, 4}
    assert all(t["status"] != "success" for t in trace)


def test_search_rejects_odd_input():
    inst = ProblemInstance(1, [parse("1 - X1^2", 1)], parse("Y^3 + Y + 1", 1), UniPoly([1, 0, 1]), 1)
    with pytest.raises(OddDegreeInput):
        search_certificate(inst)


def test_json_round_trips():
    lim = SearchLimits(max_k=4, lambda0=Fraction(1, 2), strict=True)
    assert SearchLimits.from_json(lim.to_json()) == lim
    p = HParameters(**{**derive_exponents(2, (0,), 2, 2).__dict__, "alpha": (Fraction(1, 3),), "lam": Fraction(4)})
    assert HParameters.from_json(p.to_json()) == p

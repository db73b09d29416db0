from fractions import Fraction

import gmpy2
import pytest
from gmpy2 import mpfr

from verlinde_tools import catalog, numerics
from verlinde_tools.modular_data import validate_structure
from verlinde_tools.verlinde import fusion_table


def entries(md):
    return [complex(z) for row in md.S for z in row]


def test_trivial():
    md = catalog.gen_trivial()
    assert md.labels == ("e",)
    assert md.S == ((1,),)
    assert md.h == {"e": 0} and md.c == 0
    assert validate_structure(md).ok
    assert fusion_table(md).N == (((1,),),)


def test_z1_matches_trivial_up_to_label():
    z1, triv = catalog.gen_abelian(1), catalog.gen_trivial()
    assert z1.S == triv.S and z1.c == triv.c
    assert fusion_table(z1).N == fusion_table(triv).N


def test_z2_is_the_hadamard_matrix():
    r = 2 ** -0.5
    assert entries(catalog.gen_abelian(2)) == pytest.approx([r, r, r, -r])


def test_abelian_weights_are_documented():
    md = catalog.gen_abelian(4)
    assert md.h == {"0": 0, "1": Fraction(3, 8), "2": Fraction(1, 2), "3": Fraction(3, 8)}
    assert md.notes == catalog.ABELIAN_H_NOTE


def test_su2_level_one():
    md = catalog.gen_su2(1)
    assert md.labels == ("0", "1/2")
    r = 2 ** -0.5
    assert entries(md) == pytest.approx([r, r, r, -r])
    assert md.h == {"0": 0, "1/2": Fraction(1, 4)}
    assert md.c == 1


def test_su2_level_two_spin_half_squared():
    table = fusion_table(catalog.gen_su2(2))
    assert table.n("1/2", "1/2", "0") == 1
    assert table.n("1/2", "1/2", "1") == 1
    assert table.n("1/2", "1/2", "1/2") == 0


def test_lee_yang():
    md = catalog.gen_minimal(2, 5)
    assert md.labels == ("(1,1)", "(1,2)")
    assert md.h == {"(1,1)": 0, "(1,2)": Fraction(-1, 5)}
    assert md.c == Fraction(-22, 5)
    assert fusion_table(md).matrix("(1,2)") == ((0, 1), (1, 1))


def test_minimal_3_4_labels_and_weights():
    md = catalog.gen_minimal(3, 4)
    assert md.labels == ("(1,1)", "(1,2)", "(1,3)")
    assert [md.h[a] for a in md.labels] == [0, Fraction(1, 16), Fraction(1, 2)]
    assert md.c == Fraction(1, 2)


def test_minimal_3_4_is_isomorphic_to_ising():
    ising, m34 = catalog.gen_ising(), catalog.gen_minimal(3, 4)
    # bijection by conformal weight mod 1, confirmed by equal S columns
    by_h = {m34.h[b] % 1: b for b in m34.labels}
    bijection = {a: by_h[ising.h[a] % 1] for a in ising.labels}
    for a in ising.labels:
        for b in ising.labels:
            assert abs(ising.s(a, b) - m34.s(bijection[a], bijection[b])) < mpfr("1e-60")
    ti, tm = fusion_table(ising), fusion_table(m34)
    for a in ising.labels:
        for b in ising.labels:
            for c in ising.labels:
                assert ti.n(a, b, c) == tm.n(bijection[a], bijection[b], bijection[c])


def test_minimal_2_3_collapses_to_the_trivial_theory():
    md = catalog.gen_minimal(2, 3)
    assert md.size == 1 and md.c == 0
    assert abs(md.S[0][0] - 1) < mpfr("1e-70")
    assert fusion_table(md).N == fusion_table(catalog.gen_trivial()).N


@pytest.mark.parametrize("p, q", [(2, 4), (3, 3), (1, 2), (4, 3)])
def test_minimal_rejects_bad_parameters(p, q):
    with pytest.raises(ValueError):
        catalog.gen_minimal(p, q)


@pytest.mark.parametrize("make", [lambda: catalog.gen_abelian(0), lambda: catalog.gen_su2(0)])
def test_other_generators_reject_bad_parameters(make):
    with pytest.raises(ValueError):
        make()


def test_ising_data(ising):
    assert ising.labels == ("1", "epsilon", "sigma")
    assert [ising.h[a] for a in ising.labels] == [0, Fraction(1, 2), Fraction(1, 16)]
    r = 2 ** -0.5
    assert entries(ising) == pytest.approx([0.5, 0.5, r, 0.5, 0.5, -r, r, -r, 0])
    table = fusion_table(ising)
    assert [c for c in ising.labels if table.n("sigma", "sigma", c)] == ["1", "epsilon"]


def test_fibonacci_data(fibonacci):
    with numerics.working_precision(256):
        phi = (1 + gmpy2.sqrt(mpfr(5))) / 2
        norm = gmpy2.sqrt(2 + phi)
        expected = [[1 / norm, phi / norm], [phi / norm, -1 / norm]]
    assert all(abs(fibonacci.S[i][j] - expected[i][j]) < mpfr("1e-70") for i in range(2) for j in range(2))
    assert fusion_table(fibonacci).matrix("tau") == ((0, 1), (1, 1))


@pytest.mark.parametrize("entry", catalog.reference_models(), ids=lambda e: e.title)
def test_generated_data_is_tagged_and_valid(entry):
    md = entry.generate()
    assert md.source == "external-standard"
    assert validate_structure(md).ok


@pytest.mark.parametrize("entry", catalog.reference_models(), ids=lambda e: e.title)
def test_oracles_satisfy_the_ring_axioms(entry):
    rules = entry.oracle()
    labels = list(dict.fromkeys(a for a, _, _ in rules))
    n = lambda a, b, c: rules.get((a, b, c), 0)
    md = entry.generate()
    e = md.vacuum
    for a in labels:
        for b in labels:
            assert n(e, a, b) == int(a == b)
            assert n(a, b, e) == int(md.dual[a] == b)
            for c in labels:
                assert n(a, b, c) == n(b, a, c) >= 0


def test_precision_is_carried_into_the_data():
    md = catalog.gen_su2(3, precision_bits=400)
    assert md.precision_bits == 400
    assert md.S[0][0].precision == (400, 400)

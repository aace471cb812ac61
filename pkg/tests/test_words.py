"""Word arithmetic against naive oracles."""

import pytest
from hypothesis import given, settings, strategies as st

from smforge.words import (
    Alphabet, Word, cyclic_reduce, express_in_basis, expression_word,
    free_reduce, substitute, validate_basis,
)

from oracles import naive_cyclic_reduce, naive_member, naive_reduce, rng

p = pytest.mark.parametrize


def mk_alpha(n=3):
    al = Alphabet()
    for i in range(n):
        al.intern("g%d" % i)
    return al


ids3 = [1, 2, 3]
seqs = st.lists(st.sampled_from([1, -1, 2, -2, 3, -3]), max_size=40)


@given(seqs)
@settings(max_examples=300)
def test_free_reduce_matches_naive(seq):
    assert free_reduce(seq) == naive_reduce(seq)


@given(seqs, seqs)
@settings(max_examples=200)
def test_mul_associates_with_reduction(s1, s2):
    al = mk_alpha()
    w1, w2 = al.word(s1), al.word(s2)
    assert (w1 * w2).ltrs == naive_reduce(tuple(s1) + tuple(s2))


@given(seqs)
@settings(max_examples=200)
def test_inverse_cancels(seq):
    al = mk_alpha()
    w = al.word(seq)
    assert not (w * ~w)
    assert not (~w * w)


@given(seqs)
@settings(max_examples=200)
def test_cyclic_reduce_decomposition(seq):
    al = mk_alpha()
    w = al.word(seq)
    core, c = cyclic_reduce(w)
    assert core.ltrs == naive_cyclic_reduce(seq)
    assert c * core * ~c == w
    assert len(core) < 2 or core.ltrs[0] != -core.ltrs[-1]


def test_parse_format_round_trip():
    al = mk_alpha()
    for text in ["1", "g0", "g0^-1", "g0 g1^-1 g0 g0", "g2 g2 g2^-1 g1"]:
        w = al.parse(text)
        assert al.parse(w.format()) == w
    assert al.parse("g0 g0^-1").format() == "1"


def test_parse_rejects_unknown_and_bad_tokens():
    al = mk_alpha()
    with pytest.raises(KeyError):
        al.parse("zz")
    with pytest.raises(ValueError):
        al.parse("g0^2")


def test_typed_lengths_partition():
    al = Alphabet()
    al.intern("q0", kind="q", part=0)
    al.intern("x", kind="a", sector=1, subkind="A")
    al.intern("b1", kind="a", sector=1, subkind="b")
    al.intern("c", kind="a", sector=2, subkind="o")
    al.intern("th", kind="t")
    w = al.parse("q0 x b1^-1 c x th c^-1")
    assert w.len_q == 1 and w.len_t == 1 and w.len_a == 5
    assert w.len_a == w.len_A + w.len_b + w.len_o
    assert (w.len_A, w.len_b, w.len_o) == (2, 1, 2)


def test_substitute_is_homomorphism():
    al = mk_alpha()
    im = {1: al.parse("g1 g2"), 2: al.parse("g2^-1"), 3: al.word()}
    r = rng(1)
    for _ in range(50):
        s1 = [r.choice(ids3) * r.choice((1, -1)) for _ in range(r.randrange(8))]
        s2 = [r.choice(ids3) * r.choice((1, -1)) for _ in range(r.randrange(8))]
        w1, w2 = al.word(s1), al.word(s2)
        assert substitute(w1 * w2, im, al) == substitute(w1, im, al) * substitute(w2, im, al)
        assert substitute(~w1, im, al) == ~substitute(w1, im, al)


# -- folding ----------------------------------------------------------------

def B(al, *texts):
    return [al.parse(t) for t in texts]


@p("basis,expected", [
    (("g0", "g1"), True),
    (("g0 g0", "g1"), True),
    (("g0", "g0^-1"), False),
    (("g0 g1", "g1 g0"), True),
    (("g0 g1", "g1^-1 g0^-1"), False),
    (("g0 g1 g0^-1", "g0 g2 g0^-1"), True),
    (("g0", "g0 g1", "g1 g0"), False),
    (("g0", "g1", "g0 g1"), False),
])
def test_validate_basis_cases(basis, expected):
    al = mk_alpha()
    assert validate_basis(B(al, *basis)) is expected


def test_validate_basis_empty_cases():
    al = mk_alpha()
    assert validate_basis([]) is True
    assert validate_basis([al.word()]) is False


def test_express_spec_example():
    al = mk_alpha()
    basis = B(al, "g0 g0", "g1")
    assert express_in_basis(al.parse("g0 g0 g1"), basis) == [(0, 1), (1, 1)]
    assert express_in_basis(al.parse("g0"), basis) is None
    assert express_in_basis(al.word(), basis) == []


def test_express_empty_basis_element_raises():
    al = mk_alpha()
    with pytest.raises(ValueError):
        express_in_basis(al.parse("g0"), [al.word()])


def test_express_non_free_basis_still_works():
    al = mk_alpha()
    basis = B(al, "g0", "g0^-1")
    expr = express_in_basis(al.parse("g0 g0"), basis)
    assert expr is not None
    assert expression_word(basis, expr) == al.parse("g0 g0")


@given(st.lists(st.sampled_from([0, 1, 2]).map(lambda j: (j, 1)), max_size=6).map(
    lambda terms: [(j, s) for j, s in terms]))
@settings(max_examples=120)
def test_express_round_trip_free_basis(terms):
    al = mk_alpha()
    basis = B(al, "g0 g0", "g1", "g0 g2 g0^-1")
    assert validate_basis(basis)
    w = expression_word(basis, terms)
    expr = express_in_basis(w, basis)
    assert expr is not None
    assert expression_word(basis, expr) == w


def test_express_uniqueness_term_count_free_basis():
    # against the brute-force product oracle on a small free basis
    al = mk_alpha()
    basis = B(al, "g0 g0", "g1", "g0 g2 g0^-1")
    r = rng(2)
    for _ in range(40):
        terms = []
        for _ in range(r.randrange(5)):
            j = r.randrange(3)
            s = r.choice((1, -1))
            if terms and terms[-1] == (j, -s):
                continue
            terms.append((j, s))
        w = expression_word(basis, terms)
        expr = express_in_basis(w, basis)
        assert expression_word(basis, expr) == w
        assert len(expr) == len(terms)
        ref = naive_member(w.ltrs, [b.ltrs for b in basis], len(terms))
        assert ref is not None and len(ref) == len(terms)


def test_express_rejects_nonmembers():
    al = mk_alpha()
    basis = B(al, "g0 g0", "g1")
    for text in ["g0", "g2", "g0 g1 g2", "g0 g0 g0"]:
        assert express_in_basis(al.parse(text), basis) is None


def test_marker_style_basis():
    # the shape used by form (3) sector data: {noise * marker} plus noise letters
    al = Alphabet()
    for n in ["b1", "b2", "m1", "m2"]:
        al.intern(n)
    basis = B(al, "b1 b1 b2 m1", "b2 b1 b2 m2", "b1", "b2")
    assert validate_basis(basis)
    w = al.parse("b1 b1 b2 m1 b2 b1 b2 m2 m1^-1 b2^-1 b1^-1 b1^-1")
    expr = express_in_basis(w, basis)
    assert expr == [(0, 1), (1, 1), (0, -1)]

"""Word-metric core: reduction, BFS length, distortion tables, comparisons."""

import random

import pytest

from distortion_lab.errors import (
    DefectViolated,
    NotFoundWithinRadius,
    TorsionDetected,
)
from distortion_lab.matrices import bs_oracle
from distortion_lab.words import (
    CertificateEntry,
    DistortionCertificate,
    GeneratorAlphabet,
    GroupWord,
    GrowthFunction,
    QuasiComparison,
    ball_with_distances,
    certificate_check,
    distortion_function,
    free_oracle,
    integer_oracle,
    oracle_checker,
    quasi_compare,
    quasimorphism_lower_bound,
    reduce_letters,
    rewriting_constant,
    translation_length_estimate,
    word,
    word_length_bfs,
)

AB = GeneratorAlphabet(("a", "b"))


# ---------------------------------------------------------------------------
# reduction
# ---------------------------------------------------------------------------


def test_reduce_cancellation():
    assert reduce_letters([1, -1]) == ()
    assert reduce_letters([1, 2, -2, 1]) == (1, 1)
    assert reduce_letters([1, 2, -1]) == (1, 2, -1)


def test_reduce_idempotent_random():
    rng = random.Random(0)
    for _ in range(200):
        letters = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(0, 12))]
        once = reduce_letters(letters)
        assert reduce_letters(once) == once
        assert len(once) <= len(letters)


def test_word_algebra():
    w = word(1, 2)
    assert (w * w.inverse()).is_identity
    assert (w ** 3).letters == (1, 2, 1, 2, 1, 2)
    assert (w ** -1).letters == (-2, -1)
    assert word().is_identity


# ---------------------------------------------------------------------------
# BFS word length
# ---------------------------------------------------------------------------


def test_bfs_identity_is_zero():
    assert word_length_bfs(bs_oracle(), word(), 5) == 0
    assert word_length_bfs(free_oracle(AB), word(), 5) == 0


def test_bfs_free_group_matches_reduced_length():
    oracle = free_oracle(AB)
    rng = random.Random(1)
    for _ in range(30):
        letters = [rng.choice([1, -1, 2, -2]) for _ in range(rng.randrange(1, 6))]
        w = GroupWord(tuple(letters))
        if w.is_identity:
            continue
        assert word_length_bfs(oracle, w, 8) == len(w)


def test_bfs_doubling_relation():
    oracle = bs_oracle()
    # a b a^-1 and b b are the same element
    assert oracle.equal(word(1, 2, -1), word(2, 2))
    # the 4th power of b admits the 4-letter expression a b b a^-1
    assert word_length_bfs(oracle, word(2) ** 4, 6) == 4
    assert word_length_bfs(oracle, word(2) ** 2, 4) == 2


def test_bfs_not_found_raises():
    oracle = free_oracle(AB)
    with pytest.raises(NotFoundWithinRadius):
        word_length_bfs(oracle, word(1) ** 5, 3)


def test_bfs_quadratic_fallback_agrees():
    canon = bs_oracle()
    from distortion_lab.words import GroupOracle

    no_canon = GroupOracle(canon.alphabet, name="pairwise",
                           equal_fn=lambda u, v: canon.key(u) == canon.key(v))
    for target in (word(2, 2), word(1, 2), word(2) ** 4):
        assert word_length_bfs(no_canon, target, 5) == word_length_bfs(canon, target, 5)


# ---------------------------------------------------------------------------
# subadditivity / symmetry properties
# ---------------------------------------------------------------------------


def test_length_subadditive_and_symmetric_sampled():
    oracle = bs_oracle()
    rng = random.Random(2)
    pool = [1, -1, 2, -2]
    for _ in range(40):
        u = GroupWord(tuple(rng.choice(pool) for _ in range(rng.randrange(0, 4))))
        v = GroupWord(tuple(rng.choice(pool) for _ in range(rng.randrange(0, 4))))
        lu = word_length_bfs(oracle, u, 8)
        lv = word_length_bfs(oracle, v, 8)
        luv = word_length_bfs(oracle, u * v, 8)
        assert luv <= lu + lv
        assert word_length_bfs(oracle, u.inverse(), 8) == lu


# ---------------------------------------------------------------------------
# translation length and distortion function
# ---------------------------------------------------------------------------


def test_translation_length_identity_and_free():
    free = free_oracle(AB)
    est = translation_length_estimate(free, word(), 4, 4)
    assert all(r == 0.0 or r is None for (_, _, r) in est.terms)
    est = translation_length_estimate(free, word(1), 5, 6)
    assert est.ratios() == [1.0] * 5


def test_translation_length_flags_unreachable_terms():
    est = translation_length_estimate(free_oracle(AB), word(1), 6, max_radius=3)
    assert [ln for (_, ln, _) in est.terms] == [1, 2, 3, None, None, None]
    assert est.infimum == 1.0


def test_oracle_without_machinery_rejected():
    from distortion_lab.words import GroupOracle

    bare = GroupOracle(AB, name="bare")
    with pytest.raises(ValueError):
        bare.equal(word(1), word(2))


def test_translation_length_doubling_decreases():
    est = translation_length_estimate(bs_oracle(), word(2), 8, 9)
    ratios = est.ratios()
    assert ratios[0] == 1.0
    assert est.infimum < 1.0  # strictly compressible already within radius 9
    assert ratios[3] <= 1.0   # b^4 reachable in 4 letters


def test_distortion_function_free_is_linear():
    table = distortion_function(free_oracle(AB), word(1), 5, max_exponent=64)
    assert table == [(n, n) for n in range(1, 6)]


def test_distortion_function_integer_generator():
    alphabet = GeneratorAlphabet(("u",))
    oracle = integer_oracle(alphabet, {"u": 1})
    table = distortion_function(oracle, word(1), 6, max_exponent=64)
    assert table == [(n, n) for n in range(1, 7)]


def test_distortion_function_doubling_is_exponential():
    table = dict(distortion_function(bs_oracle(), word(2), 8, max_exponent=300))
    # with budget 2k the word a^(k-1) b^2 a^-(k-1) reaches the (2^k)-th power
    assert table[2] >= 2
    assert table[4] >= 4
    assert table[6] >= 8
    assert table[8] >= 16


def test_distortion_function_rejects_torsion():
    # the sign representation of the integers mod 2: b^2 = 1
    alphabet = GeneratorAlphabet(("s",))
    oracle = integer_oracle(alphabet, {"s": 1})
    from distortion_lab.words import GroupOracle

    mod2 = GroupOracle(alphabet, name="mod2",
                       canonical=lambda w: oracle.canonical(w) % 2)
    with pytest.raises(TorsionDetected):
        distortion_function(mod2, word(1), 4)


def test_distortion_trivial_lower_bound():
    table = distortion_function(bs_oracle(), word(2), 6, max_exponent=200)
    for n, d in table:
        assert d >= n // 1  # length(b) = 1, so D(n) >= n


# ---------------------------------------------------------------------------
# quasi-comparison
# ---------------------------------------------------------------------------


def test_quasi_compare_linear_below_quadratic():
    f = GrowthFunction.parse("linear")
    g = GrowthFunction.parse("quadratic")
    assert quasi_compare(f, g, 4, 200).witness == 1


def test_quasi_compare_quadratic_above_linear():
    f = GrowthFunction.parse("quadratic")
    g = GrowthFunction.parse("linear")
    res = quasi_compare(f, g, 3, 100)
    assert res == QuasiComparison(None, 3, 100)


def test_quasi_compare_reflexive_and_transitive_sampled():
    fns = [GrowthFunction.parse(s) for s in ("linear", "quadratic", "cubic")]
    for f in fns:
        assert quasi_compare(f, f, 3, 60).dominated
    # transitivity on the sampled chain: n <= n^2 <= n^3
    assert quasi_compare(fns[0], fns[1], 3, 60).dominated
    assert quasi_compare(fns[1], fns[2], 3, 60).dominated
    assert quasi_compare(fns[0], fns[2], 3, 60).dominated


# ---------------------------------------------------------------------------
# rewriting constant
# ---------------------------------------------------------------------------


def test_rewriting_constant_same_set_is_one():
    alphabet = GeneratorAlphabet(("u", "v", "w"))
    oracle = integer_oracle(alphabet, {"u": 1, "v": 2, "w": 3})
    assert rewriting_constant([1], [1], oracle, 6) == 1


def test_rewriting_constant_integers():
    # generators 1 versus {2, 3}: 1 = 3 - 2 costs two letters, 3 = 1+1+1 three
    alphabet = GeneratorAlphabet(("u", "v", "w"))
    oracle = integer_oracle(alphabet, {"u": 1, "v": 2, "w": 3})
    c = rewriting_constant([1], [2, 3], oracle, 8)
    assert c == 3
    # the sandwich needs c >= 3: the element 3 is one letter on one side,
    # three letters on the other


def test_rewriting_constant_doubling_group():
    oracle = bs_oracle()
    # S1 = {a, b}; S2 = {a, ab}: b = a^-1 (ab), ab = a * b
    from distortion_lab.words import GroupOracle

    combined = GroupOracle(
        GeneratorAlphabet(("a", "b", "c")),
        name="bs-extended",
        canonical=lambda w: oracle.canonical(GroupWord(tuple(
            l2 for l in w.letters
            for l2 in {1: (1,), -1: (-1,), 2: (2,), -2: (-2,), 3: (1, 2), -3: (-2, -1)}[l]
        ))),
    )
    c = rewriting_constant([1, 2], [1, 3], combined, 6)
    assert c == 2


# ---------------------------------------------------------------------------
# quasi-morphism bound
# ---------------------------------------------------------------------------


def test_quasimorphism_exact_homomorphism():
    phi = lambda w: float(sum(1 if l == 1 else -1 if l == -1 else 0 for l in w.letters))
    h = word(1) ** 5
    bound = quasimorphism_lower_bound(phi, 0.0, AB, h)
    assert bound == pytest.approx(5.0)


def test_quasimorphism_zero_value_gives_zero_bound():
    phi = lambda w: float(sum(1 if l == 1 else -1 if l == -1 else 0 for l in w.letters))
    assert quasimorphism_lower_bound(phi, 0.0, AB, word(2, 1, -2, -1)) == 0.0


def test_quasimorphism_with_defect():
    base = lambda w: float(sum(1 if l == 1 else -1 if l == -1 else 0 for l in w.letters))
    # bounded perturbation keeps the defect at most 1
    phi = lambda w: base(w) + 0.25 * ((len(w.letters) % 3) - 1)
    h = word(1) ** 10
    bound = quasimorphism_lower_bound(phi, 1.0, AB, h, samples=300)
    assert bound >= (abs(phi(h)) - 1.0) / (max(abs(phi(word(1))), abs(phi(word(2)))) + 1.0) - 1e-9
    assert bound > 3.5


def test_quasimorphism_defect_violation_detected():
    phi = lambda w: float(len(w.letters)) ** 2
    with pytest.raises(DefectViolated):
        quasimorphism_lower_bound(phi, 0.5, AB, word(1), samples=100)


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def _bs_certificate(k_max=6):
    from distortion_lab.matrices import bs_power_certificate

    return bs_power_certificate(k_max)


def test_certificate_check_doubling_passes():
    cert = _bs_certificate()
    report = certificate_check(cert, oracle_checker(bs_oracle(), word(2)))
    assert report.passed
    assert report.sup_error == 0.0


def test_certificate_check_empty_is_vacuous():
    cert = DistortionCertificate(AB, "b", [])
    report = certificate_check(cert, oracle_checker(bs_oracle(), word(2)))
    assert report.passed


def test_certificate_check_detects_mutation():
    cert = _bs_certificate()
    bad = cert.entries[3]
    mutated = CertificateEntry(bad.index, bad.length_bound, bad.exponent,
                               GroupWord(bad.word.letters[:-1] + (2,)))
    cert.entries[3] = mutated
    report = certificate_check(cert, oracle_checker(bs_oracle(), word(2)))
    assert not report.passed


def test_certificate_json_roundtrip():
    cert = _bs_certificate(4)
    cert.verification = {"samples": 10, "sup_error": 1.25e-9, "passed": True}
    data = cert.to_json_dict()
    assert data["entries"][2]["word"] == [1, 1, 2, -1, -1]
    back = DistortionCertificate.from_json_dict(data)
    assert back.entries[2].word == cert.entries[2].word
    assert back.verification["sup_error"] == 1.25e-9


def test_self_check_catches_bad_canonicalizer():
    from distortion_lab.errors import OracleInconsistent
    from distortion_lab.words import GroupOracle

    # canonical key collapses everything, equality does not: inconsistent
    bad = GroupOracle(AB, name="collapsing", canonical=lambda w: 0,
                      equal_fn=lambda u, v: u.letters == v.letters)
    with pytest.raises(OracleInconsistent):
        ball_with_distances(bad, 2, self_check=True)


def test_ball_determinism():
    d1 = ball_with_distances(bs_oracle(), 5)
    d2 = ball_with_distances(bs_oracle(), 5)
    assert list(d1.items()) == list(d2.items())


def test_distortion_tables_quasi_equivalent_across_generating_sets():
    """Tables from two generating sets of one group differ by the rewriting
    constant, in the affine domination order."""
    alphabet = GeneratorAlphabet(("u", "v", "w"))
    oracle = integer_oracle(alphabet, {"u": 1, "v": 2, "w": 3})
    c = rewriting_constant([1], [2, 3], oracle, 8)
    t1 = dict(distortion_function(oracle, word(1), 6, generators=[1], max_exponent=200))
    deep = dict(distortion_function(oracle, word(1), 6 * c + c,
                                    generators=[2, 3], max_exponent=400))
    f = GrowthFunction(lambda n: t1.get(n, t1[6]), "D1")
    g = GrowthFunction(lambda n: deep.get(max(n, 1), deep[6 * c + c]), "D2")
    res = quasi_compare(f, g, c, 6)
    assert res.dominated and res.witness <= c


def test_quasimorphism_stated_bound_value():
    # declared defect 1, value 10, generator maximum 1: bound (10-1)/(1+1)
    phi = lambda w: float(sum(1 if l == 1 else -1 if l == -1 else 0 for l in w.letters))
    bound = quasimorphism_lower_bound(phi, 1.0, AB, word(1) ** 10)
    assert bound == pytest.approx(4.5)


def test_growth_parse():
    assert GrowthFunction.parse("n^3")(2) == 8
    assert GrowthFunction.parse("quadratic")(7) == 49
    with pytest.raises(ValueError):
        GrowthFunction.parse("gibberish")

import json
import random
from fractions import Fraction

import pytest

from salemforge import linalg
from salemforge.errors import ExhaustedError, PreconditionError, ValidationError
from salemforge.intpoly import char_poly, classify, sturm_count
from salemforge.isometry import (eichler, eichler_matrix, isometry_inverse, orbit_span, parabolic_group,
                                 validate)
from salemforge.lattice import build, find_isotropic
from salemforge.search import (SCHEMA, SearchConfig, check_certificate, entropy_of, load_certificate,
                               salem_search, verify, word_matrix)

BFS = SearchConfig(strategy="bfs", max_words=10 ** 4)


def two_groups(expr):
    lat = build(expr)
    e1, e2 = find_isotropic(lat, 1)[:2]
    return lat, [parabolic_group(lat, e1), parabolic_group(lat, e2)]


@pytest.fixture(scope="module")
def rank4():
    lat, sets = two_groups("U+A2")
    return lat, sets, salem_search(sets, lat, BFS)


def test_rank4_bfs_certificate(rank4):
    lat, sets, cert = rank4
    assert cert.classification.salem_degree == 4 and cert.full_degree
    assert not cert.non_liftable_flag
    assert cert.matrix == word_matrix(cert.word, [pg.generators for pg in sets], lat)
    assert cert.char_poly == char_poly(cert.matrix)
    assert classify(cert.char_poly).salem_factor == cert.classification.salem_factor
    assert cert.stats["words_examined"] <= 10 ** 4
    assert verify(cert, lat, sets)


def test_full_degree_certificate_leaves_no_invariant_subspace(rank4):
    lat, sets, cert = rank4
    g = validate(cert.matrix, lat)
    gens = [g] + [h for pg in sets for h in pg.generators]
    for k in range(lat.rank):
        v = tuple(int(i == k) for i in range(lat.rank))
        assert orbit_span([g], v).is_full()
        assert orbit_span(gens, v).is_full()


def test_non_hyperbolic_rank4_has_no_parabolic_groups():
    lat = build("U+U")
    with pytest.raises(PreconditionError):
        parabolic_group(lat, (1, 0, 0, 0))


def test_split_signature_words_never_have_salem_factors():
    # In signature (2, 2) the complement of the (lambda, 1/lambda) eigenplane is
    # indefinite, so unit-circle conjugates cannot occur.  Check on raw
    # transvection words, bypassing the cone requirement.
    lat = build("U+U")
    e1, e2 = (1, 0, 0, 0), (0, 0, 1, 0)
    gens = [eichler_matrix(lat.gram, e1, (0, 0, 1, 0)), eichler_matrix(lat.gram, e1, (0, 0, 0, 1)),
            eichler_matrix(lat.gram, e2, (1, 0, 0, 0)), eichler_matrix(lat.gram, e2, (0, 1, 0, 0))]
    gens += [isometry_inverse(g, lat.gram) for g in gens]
    rng = random.Random(2)
    for _ in range(500):
        m = linalg.identity(4)
        for _ in range(rng.randint(1, 10)):
            m = linalg.matmul(m, rng.choice(gens))
        assert linalg.matmul(linalg.matmul(linalg.transpose(m), lat.gram), m) == lat.gram
        assert classify(char_poly(m)).salem_factor is None


def test_single_group_is_degenerate():
    lat, sets = two_groups("U+A2")
    with pytest.warns(RuntimeWarning, match="degenerate"):
        with pytest.raises(ExhaustedError) as info:
            salem_search(sets[:1], lat, BFS)
    assert info.value.degenerate


def test_budget_exhaustion_carries_stats():
    lat, sets = two_groups("U+E8")
    with pytest.raises(ExhaustedError) as info:
        salem_search(sets, lat, SearchConfig(strategy="bfs", max_words=5))
    st = info.value.stats
    assert st["words_examined"] == 5
    assert st["pruned"] + st["duplicates"] + st["classified"] + st["entry_guard_hits"] == 5


def test_entry_guard_is_counted():
    lat, sets = two_groups("U+E8")
    cfg = SearchConfig(strategy="random-walk", max_words=300, max_entry_bits=3)
    with pytest.raises(ExhaustedError) as info:
        salem_search(sets, lat, cfg)
    assert info.value.stats["entry_guard_hits"] > 0


def test_determinism_and_monotone_budget(rank4):
    lat, sets, cert = rank4
    again = salem_search(sets, lat, BFS)
    bigger = salem_search(sets, lat, SearchConfig(strategy="bfs", max_words=10 ** 5))
    assert again.dumps() == cert.dumps()
    assert bigger.word == cert.word and bigger.matrix == cert.matrix


def test_rank10_interleaved_is_deterministic():
    lat, sets = two_groups("U+E8")
    cfg = SearchConfig(strategy="mix", rng_seed=3, max_words=20000)
    a, b = salem_search(sets, lat, cfg), salem_search(sets, lat, cfg)
    assert a.dumps() == b.dumps()
    assert a.classification.salem_degree == 10 and verify(a, lat, sets)
    assert a.stats["shape_violations"] == 0


def test_parallel_matches_serial(rank4):
    lat, sets, cert = rank4
    par = salem_search(sets, lat, SearchConfig(strategy="bfs", max_words=10 ** 4, workers=2, batch_size=4))
    assert par.word == cert.word and par.stats == cert.stats


def test_partial_degree_allowed_when_not_required():
    lat, sets = two_groups("U+E8")
    cert = salem_search(sets, lat, SearchConfig(strategy="bfs", require_full_degree=False, max_words=10 ** 4))
    assert cert.classification.salem_factor is not None
    assert cert.full_degree == (cert.classification.salem_degree == 10)
    assert verify(cert, lat, sets)


def test_json_round_trip_and_tamper_detection(rank4):
    lat, sets, cert = rank4
    data = json.loads(cert.dumps())
    assert data["schema"] == SCHEMA
    d, lat2, sets2 = load_certificate(data)
    assert lat2.digest == lat.digest
    assert check_certificate(d, lat2, sets2) == []

    tampered = json.loads(cert.dumps())
    s, i, x = tampered["word"][0]
    tampered["word"][0] = [s, (i + 1) % len(sets[s].generators), x]
    diffs = check_certificate(tampered, lat, sets)
    assert diffs and "word product" in diffs[0]


def test_widened_interval_accepted_shifted_rejected(rank4):
    lat, sets, cert = rank4
    wide = json.loads(cert.dumps())
    wide["entropy"]["lower"] = str(Fraction(wide["entropy"]["lower"]) - 1)
    wide["entropy"]["upper"] = str(Fraction(wide["entropy"]["upper"]) + 1)
    wide["entropy"]["log_lower"] = "0.5"
    wide["entropy"]["log_upper"] = "9.0"
    assert check_certificate(wide, lat, sets) == []

    shifted = json.loads(cert.dumps())
    up = Fraction(shifted["entropy"]["upper"])
    shifted["entropy"]["lower"] = str(up + 1)
    shifted["entropy"]["upper"] = str(up + 2)
    assert any("does not contain" in m for m in check_certificate(shifted, lat, sets))


def test_entropy_of_examples(rank4):
    lat, sets, cert = rank4
    e0 = entropy_of(sets[0].generators[0])
    assert e0.lower == e0.upper == 1 and Fraction(e0.log_upper) == 0
    assert Fraction(entropy_of(validate(linalg.identity(4), lat)).log_lower) == 0
    tol = Fraction(1, 10 ** 8)
    e = entropy_of(validate(cert.matrix, lat), tol)
    assert e.width <= tol and e.lower > 1
    assert sturm_count(cert.classification.salem_factor, e.lower, e.upper) == 1
    neg = validate(tuple(tuple(-x for x in r) for r in linalg.identity(4)), lat)
    with pytest.raises(PreconditionError):
        entropy_of(neg)


def test_search_config_validation():
    with pytest.raises(ValidationError):
        SearchConfig(strategy="dfs")
    with pytest.raises(ValidationError):
        SearchConfig(max_words=0)
    with pytest.raises(ValidationError):
        SearchConfig(tol=0)
    assert SearchConfig(strategy="rw").strategy == "random-walk"
    cfg = SearchConfig(tol=Fraction(1, 7), rng_seed=9)
    assert SearchConfig.from_json(cfg.to_json()) == cfg


def test_mixed_lattice_generator_sets_rejected():
    lat, sets = two_groups("U+A2")
    other, osets = two_groups("U(3)+A2")
    with pytest.raises(ValidationError):
        salem_search([sets[0], osets[1]], lat, BFS)


def test_plain_matrix_generator_lists_accepted():
    lat = build("U+A2")
    e1, e2 = find_isotropic(lat, 1)[:2]
    raw = [[eichler(lat, e, w).matrix for w in ((0, 0, 1, 0), (0, 0, 0, 1))] for e in (e1, e2)]
    cert = salem_search(raw, lat, BFS)
    assert cert.classification.salem_degree == 4

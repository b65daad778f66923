import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nkphase.cnf import (
    CnfFormula, DimacsError, local_to_clauses, nk_to_cnf, parse_dimacs, read_dimacs,
    save_dimacs, write_dimacs,
)
from nkphase.core import LocalFitness, NKInstance, is_solution
from nkphase.generate import GenParams, gen_fixed_ratio
from oracles import all_assignments, formula_ok, random_instance

XOR_TABLE = (0, 1, 1, 0, 1, 0, 0, 1)
XOR_TABLE_CLAUSES = [(1, 2, 3), (1, -2, -3), (-1, 2, -3), (-1, -2, 3)]


def test_xor_clauses_exact():
    assert local_to_clauses(LocalFitness(0, (1, 2), XOR_TABLE)) == XOR_TABLE_CLAUSES


def test_each_clause_falsified_by_exactly_its_row():
    f = LocalFitness(0, (1, 2), XOR_TABLE)
    for r, c in zip(f.zero_rows, local_to_clauses(f)):
        falsifying = [a for a in all_assignments(3) if not formula_ok([c], a)]
        assert falsifying == [tuple((r >> (2 - j)) & 1 for j in range(3))]


def test_all_ones_gives_no_clauses():
    assert local_to_clauses(LocalFitness(0, (1, 2), (1,) * 8)) == []


def test_all_zeros_gives_every_polarity():
    clauses = local_to_clauses(LocalFitness(0, (1, 2), (0,) * 8))
    assert len(clauses) == 8
    assert {tuple(x > 0 for x in c) for c in clauses} == {
        (a, b, c) for a in (True, False) for b in (True, False) for c in (True, False)
    }


def test_literal_order_follows_variables():
    f = LocalFitness(4, (7, 2), (1, 1, 1, 1, 1, 1, 1, 0))
    assert local_to_clauses(f) == [(-5, -8, -3)]


def test_reduction_all_ones_instance():
    inst = NKInstance(3, 1, tuple(LocalFitness(i, ((i + 1) % 3,), (1, 1, 1, 1)) for i in range(3)))
    cnf = nk_to_cnf(inst)
    assert cnf.num_vars == 3 and cnf.clauses == ()
    assert all(cnf.satisfied_by(a) for a in all_assignments(3))


def test_reduction_clause_count_and_origins():
    inst = gen_fixed_ratio(GenParams.fixed_ratio(40, 2, 3, 8))
    cnf = nk_to_cnf(inst)
    assert len(cnf.clauses) == 3 * 40
    assert all(len({abs(x) for x in c}) == 3 for c in cnf.clauses)
    for c, (i, r) in zip(cnf.clauses, cnf.origins):
        assert inst.functions[i].table[r] == 0
        assert abs(c[0]) - 1 == i


def test_reduction_faithful_exhaustive():
    rng = random.Random(21)
    for trial in range(40):
        n = rng.randint(3, 9)
        inst = random_instance(rng, n, 2, zeros=rng.randint(0, 5))
        cnf = nk_to_cnf(inst)
        for a in all_assignments(n):
            assert is_solution(inst, a) == formula_ok(cnf.clauses, a)


def test_duplicate_clauses_are_kept():
    f0 = LocalFitness(0, (1,), (0, 1, 1, 1))
    f1 = LocalFitness(1, (0,), (0, 1, 1, 1))
    cnf = nk_to_cnf(NKInstance(2, 1, (f0, f1)))
    assert cnf.clauses == ((1, 2), (2, 1))


def test_dimacs_xor_text():
    cnf = CnfFormula(3, tuple(XOR_TABLE_CLAUSES))
    assert write_dimacs(cnf) == "p cnf 3 4\n1 2 3 0\n1 -2 -3 0\n-1 2 -3 0\n-1 -2 3 0\n"


def test_dimacs_empty_formula():
    assert write_dimacs(CnfFormula(3)) == "p cnf 3 0\n"
    assert parse_dimacs("p cnf 3 0\n") == CnfFormula(3)


def test_dimacs_origin_comments_round_trip():
    inst = gen_fixed_ratio(GenParams.fixed_ratio(10, 2, 2, 1))
    cnf = nk_to_cnf(inst)
    text = write_dimacs(cnf)
    assert text.startswith("c origin 0 ")
    assert parse_dimacs(text) == cnf


def test_dimacs_random_round_trip(tmp_path):
    rng = random.Random(4)
    clauses = []
    for _ in range(500):
        vs = rng.sample(range(1, 41), rng.randint(1, 5))
        clauses.append(tuple(v if rng.random() < 0.5 else -v for v in vs))
    cnf = CnfFormula(40, tuple(clauses))
    path = tmp_path / "f.cnf"
    save_dimacs(cnf, path)
    assert read_dimacs(path) == cnf


def test_dimacs_empty_clause_marker():
    cnf = CnfFormula(2, ((1, 2),), has_empty_clause=True)
    text = write_dimacs(cnf)
    assert text.endswith("\n0\n")
    assert parse_dimacs(text) == cnf


def test_dimacs_accepts_multi_line_clauses_and_comments():
    cnf = parse_dimacs("c hello\np cnf 3 2\n1 -2\n3 0 -1 0\n")
    assert cnf.clauses == ((1, -2, 3), (-1,))


@pytest.mark.parametrize("text, line", [
    ("p cnf x 1\n1 0\n", 1),
    ("p dnf 3 1\n1 0\n", 1),
    ("1 2 0\n", 1),
    ("p cnf 2 1\n1 3 0\n", 2),
    ("p cnf 2 1\n1 2\n", 2),
    ("p cnf 2 2\n1 2 0\n", 2),
    ("p cnf 2 1\n1 a 0\n", 2),
    ("c only a comment\n", 1),
])
def test_dimacs_errors_carry_line_numbers(text, line):
    with pytest.raises(DimacsError) as exc:
        parse_dimacs(text)
    assert exc.value.line == line


def test_formula_check():
    CnfFormula(3, ((1, -2), (3,))).check()
    with pytest.raises(ValueError):
        CnfFormula(3, ((1, -1),)).check()
    with pytest.raises(ValueError):
        CnfFormula(3, ((4,),)).check()
    with pytest.raises(ValueError):
        CnfFormula(3, ((1,),), origins=((0, 0), (0, 1)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.lists(st.integers(1, 9).flatmap(lambda v: st.sampled_from([v, -v])),
                         min_size=1, max_size=4, unique_by=abs), max_size=30))
def test_dimacs_round_trip_property(clauses):
    cnf = CnfFormula(9, tuple(tuple(c) for c in clauses))
    assert parse_dimacs(write_dimacs(cnf)) == cnf

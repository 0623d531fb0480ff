import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from facered import fixtures, io
from facered.errors import DuplicateEntry, InvalidArchive, ParseError, SchemaError
from facered.model import ConeKind, Side
from facered.reduce import reduce

SMALL_SDPA = """\
* a comment
2 =mdim
2 =nblocks
2 -1
1.0 2.0
0 1 1 1 1.0
0 2 1 1 3.0
1 1 1 2 1.0
2 1 2 2 1.0
2 2 1 1 -1.0
"""


def test_read_small_sdpa():
    p = io.read_sdpa(SMALL_SDPA)
    assert [b.kind for b in p.blocks] == [ConeKind.PSD, ConeKind.NONNEG]
    assert p.m == 2 and list(p.b) == [1.0, 2.0]
    # c = -F0 in packed coordinates
    assert p.c[0] == -1.0 and p.c[3] == -3.0
    A = p.A.toarray()
    assert A[0, 1] == pytest.approx(np.sqrt(2.0))
    assert A[1, 2] == 1.0 and A[1, 3] == -1.0


@pytest.mark.parametrize("name", ["motivating", "diag5", "dd4", "recovery3"])
def test_sdpa_round_trip(name):
    p = fixtures.build(name).problem
    text = io.write_sdpa(p)
    q = io.read_sdpa(text)
    assert q.equals(p, tol=1e-15)
    assert io.write_sdpa(q) == text


def test_sdpa_round_trip_cprank_and_planted():
    for fx in (fixtures.cprank(power=1), fixtures.planted(4)):
        q = io.read_sdpa(io.write_sdpa(fx.problem))
        assert q.equals(fx.problem, tol=1e-14)


def test_sdpa_empty_objective_line():
    from facered.model import PSD, ConicProblem
    p = ConicProblem(0, [PSD(2)], [], np.array([1.0, 0.0, 1.0]), [], [], [])
    text = io.write_sdpa(p)
    assert io.read_sdpa(text).equals(p)


@pytest.mark.parametrize("text,line,kind", [
    ("1\n1\n2\n1.0\n1 1 2 1 1.0\n", 5, ParseError),            # below the diagonal
    ("1\n1\n2\n1.0\n1 1 1 1 1.0\n1 1 1 1 2.0\n", 6, DuplicateEntry),
    ("1\n1\n-2\n1.0\n1 1 1 2 1.0\n", 5, ParseError),           # off-diagonal in a diagonal block
    ("1\n1\n2\n1.0\n1 1 3 3 1.0\n", 5, ParseError),            # outside the block
    ("1\n1\n2\n1.0\n2 1 1 1 1.0\n", 5, ParseError),            # matrix number
    ("1\n1\n2\n1.0\n1 1 1 1\n", 5, ParseError),                # too few fields
    ("1\n1\n2\n1.0\n1 1 1 1 abc\n", 5, ParseError),
    ("x\n1\n2\n1.0\n", 1, ParseError),
])
def test_sdpa_errors_have_line_numbers(text, line, kind):
    with pytest.raises(kind) as info:
        io.read_sdpa(text)
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_sdpa_cannot_hold_free_blocks():
    res = reduce(fixtures.motivating().problem, "dual")
    with pytest.raises(Exception) as info:
        io.write_sdpa(res.reduced)
    assert "free" in str(info.value).lower()


@pytest.mark.parametrize("name", ["motivating", "diag5", "dd4", "recovery3"])
def test_json_round_trip(name):
    p = fixtures.build(name).problem
    text = io.write_problem_json(p)
    q = io.read_problem_json(text)
    assert q.equals(p)
    assert io.write_problem_json(q) == text


def test_json_round_trip_with_free_block():
    res = reduce(fixtures.diag5().problem, "dual")
    q = io.read_problem_json(io.write_problem_json(res.reduced))
    assert q.equals(res.reduced)


def test_json_schema_errors():
    doc = io.problem_to_dict(fixtures.diag5().problem)
    bad = dict(doc, svec="other")
    with pytest.raises(SchemaError) as info:
        io.problem_from_dict(bad)
    assert info.value.path == "$.svec"
    with pytest.raises(SchemaError, match=r"\$\.extra"):
        io.problem_from_dict(dict(doc, extra=1))
    broken = json.loads(json.dumps(doc))
    broken["A"]["triplets"][0][1] = "x"
    with pytest.raises(SchemaError, match=r"\$\.A"):
        io.problem_from_dict(broken)
    with pytest.raises(ParseError, match="line 1"):
        io.read_problem_json("{not json")


@settings(max_examples=50, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_numbers_round_trip_exactly(v):
    assert float(json.loads(io.dumps([v]))[0]) == v


def test_solution_container():
    x = np.array([0.0, 1.5, 0.0, -2.0])
    text = io.write_solution(x=x, y=[1.0, 2.0])
    x2, y2 = io.read_solution(text)
    assert np.array_equal(x2, x) and list(y2) == [1.0, 2.0]
    assert io.read_solution(io.write_solution(y=[3.0])) == (None, pytest.approx([3.0]))
    with pytest.raises(SchemaError):
        io.read_solution('{"z": 1}')


@pytest.mark.parametrize("name", ["motivating", "diag5", "dd4", "recovery3"])
def test_chain_archive_round_trip(name):
    fx = fixtures.build(name)
    res = reduce(fx.problem, fx.side, fx.family)
    text = io.write_chain(res.chain)
    chain = io.read_chain(text)
    assert chain.side is Side.DUAL
    assert len(chain.steps) == len(res.chain.steps)
    assert io.write_chain(chain) == text


def test_primal_chain_archive_round_trip():
    fx = fixtures.cprank(power=1, form="primal")
    res = reduce(fx.problem, "primal")
    chain = io.read_chain(io.write_chain(res.chain))
    assert chain.side is Side.PRIMAL
    assert chain.steps[0].certificate.yhat is not None


def test_tampered_archive_rejected():
    res = reduce(fixtures.diag5().problem, "dual")
    doc = json.loads(io.write_chain(res.chain))
    doc["steps"][0]["certificate"]["S"]["triplets"][0][1] += 0.5
    with pytest.raises(InvalidArchive):
        io.read_chain(json.dumps(doc))
    # still readable when replay is off
    io.read_chain(json.dumps(doc), replay=False)


def test_archive_with_wrong_final_face_rejected():
    res = reduce(fixtures.diag5().problem, "dual")
    doc = json.loads(io.write_chain(res.chain))
    doc["final"][0]["U"] = {"shape": [5, 1], "rows": [[1.0], [0.0], [0.0], [0.0], [0.0]]}
    with pytest.raises(InvalidArchive):
        io.read_chain(json.dumps(doc))


def test_archive_format_checked():
    res = reduce(fixtures.diag5().problem, "dual")
    doc = json.loads(io.write_chain(res.chain))
    doc["format"] = "something-else"
    with pytest.raises(SchemaError):
        io.read_chain(json.dumps(doc))


def test_log_diag5():
    res = reduce(fixtures.diag5().problem, "dual")
    log = json.loads(io.write_log(res.report))
    assert len(log["iterations"]) == 2
    assert [it["face_dims"] for it in log["iterations"]] == [[3], [1]]
    assert log["final_search"]["certificate_found"] is False
    assert log["original"]["text"] == "(5); r=4"


def test_log_without_iterations():
    from facered.model import PSD, ConicProblem
    p = ConicProblem(0, [PSD(2)], [], np.array([1.0, 0.0, 1.0]), [], [], [])
    log = json.loads(io.write_log(reduce(p, "dual").report))
    assert log["iterations"] == []
    assert log["stop_reason"] == "no-certificate"


def test_file_helpers(tmp_path):
    p = fixtures.dd4().problem
    for name in ("p.json", "p.dat-s"):
        path = tmp_path / name
        io.write_problem(p, str(path))
        assert io.read_problem(str(path)).equals(p, tol=1e-15)

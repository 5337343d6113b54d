import random
import re
from fractions import Fraction

import pytest

from conftest import CORPUS, read
from sygus.errors import SygusError
from sygus.oracle import (
    OracleSession,
    Resolver,
    StubTable,
    Transcript,
    invoke,
    parse_reply,
    replay,
    stub_oracle_main,
    write_stub_script,
)
from sygus.session import OracleBinding, load_state
from sygus.syntax import App, Id, Identifier, bv_sort, print_term, simple_sort
from sygus.values import BitVec
from sygus.verify import FunDef, Solution, check_semantic_bounded
from sygus.reader import read_one
from sygus.syntax import parse_term

BV64 = bv_sort(64)
PBE_PAIRS = re.findall(r"\(f (#x[0-9a-f]+)\) \(target (#x[0-9a-f]+)\)", read(CORPUS / "pbe_oracle.sy"))


def bv(text):
    return BitVec(64, int(text[2:], 16))


@pytest.fixture
def target_stub(tmp_path):
    # the oracle maps each example input to the output it should have
    table = tmp_path / "target.table"
    table.write_text("".join(f"(({b}) ({b}))\n" for _, b in PBE_PAIRS))
    return table


IO_SCRIPT = """(set-logic BV)
(set-feature :oracles true)
(synth-fun f ((x (_ BitVec 64))) (_ BitVec 64))
(oracle-constraint-io f orc{attrs})
(check-synth)
"""


@pytest.fixture
def io_table(tmp_path):
    table = tmp_path / "io.table"
    table.write_text("".join(f"(({a}) ({b}))\n" for a, b in PBE_PAIRS))
    return table


def io_session(tmp_path, table, file_mode):
    st = load_state(IO_SCRIPT.format(attrs=" :file" if file_mode else ""))
    exe = write_stub_script(str(tmp_path), "orc-stub", str(table), file_mode)
    return st, OracleSession(st, Resolver({"orc": exe}))


@pytest.mark.parametrize("file_mode", [False, True], ids=["command-line", "file"])
def test_io_session_appends_ground_equalities(tmp_path, io_table, file_mode):
    st, sess = io_session(tmp_path, io_table, file_mode)
    (binding,) = sess.bindings("constraint")
    assert binding.transport == ("file" if file_mode else "command-line")
    before = len(st.constraints)
    for a, _ in PBE_PAIRS:
        sess.query(binding, [bv(a)])
    assert len(sess.transcript.calls) == 10
    added = st.constraints[before:]
    assert len(added) == 10
    for (a, b), t in zip(PBE_PAIRS, added):
        assert print_term(t).lower() == f"(= (f {a}) {b})"
    assert st.constraint_origins[before:] == ["oracle"] * 10


def test_transcript_replay_is_deterministic(tmp_path, io_table):
    dumps = []
    for _ in range(2):
        st, sess = io_session(tmp_path, io_table, False)
        (binding,) = sess.bindings("constraint")
        for a, _ in PBE_PAIRS:
            sess.query(binding, [bv(a)])
        dumps.append(sess.transcript.dump(st))
    assert dumps[0] == dumps[1]
    fresh = load_state(IO_SCRIPT.format(attrs=""))
    tr = Transcript.load(dumps[0], fresh)
    a, b = replay(fresh, tr), replay(fresh, tr)
    assert a.constraints == b.constraints
    assert len(a.constraints) == len(fresh.constraints) + 10
    assert tr.dump(fresh) == dumps[0]


def test_pbe_oracle_saturation(tmp_path, target_stub):
    st = load_state(read(CORPUS / "pbe_oracle.sy"))
    exe = write_stub_script(str(tmp_path), "binaryname", str(target_stub))
    sess = OracleSession(st, Resolver({"binaryname": exe}))
    assert sess.saturate_oracle_funs() == 10
    assert len(sess.transcript.pins) == 10
    assert sess.saturate_oracle_funs() == 0
    # with the oracle answers pinned, a lookup table over the examples checks out
    body = "x"
    for a, b in PBE_PAIRS:
        body = f"(ite (= x {a}) {b} {body})"
    lookup = parse_term(read_one(body))
    good = Solution((FunDef("define-fun", "f", (("x", BV64),), BV64, lookup),))
    bad = Solution((FunDef("define-fun", "f", (("x", BV64),), BV64, Id(Identifier("x"))),))
    assert check_semantic_bounded(st, good, transcript=sess.transcript).status == "passed-bounded"
    assert check_semantic_bounded(st, bad, transcript=sess.transcript).status == "refuted"


# stub oracle


def test_stub_table_answers(tmp_path):
    t = StubTable.parse("((1 2) (3))\n(fallback (+ x1 x2) x1)")
    assert t.answer((1, 2)) == "(3)"
    assert t.answer((5, 6)) == "(11 5)"
    assert StubTable.parse("((1) (2))").answer((7,)) is None


def test_stub_main_modes(tmp_path):
    table = tmp_path / "t"
    table.write_text('(("a b" (- 3)) (true))\n')
    assert stub_oracle_main(str(table), False, ['"a b"', "(- 3)"]) == (0, "(true)\n", "")
    q = tmp_path / "input.query"
    q.write_text('("a b" (- 3))\n')
    assert stub_oracle_main(str(table), True, [str(q)]) == (0, "(true)\n", "")
    code, _, err = stub_oracle_main(str(table), False, ["1"])
    assert code == 3 and err


# failures


def binding(invars, outvars, name="orc", transport="command-line"):
    tmpl = App(Identifier("="), (Id(Identifier(invars[0][0])), Id(Identifier(outvars[0][0]))))
    return OracleBinding("constraint", tuple(invars), tuple(outvars), tmpl, name, transport)


INT = simple_sort("Int")


def test_missing_executable():
    with pytest.raises(SygusError) as e:
        Resolver().resolve("no-such-oracle-binary-xyz")
    assert e.value.code == "E-ORACLE-SPAWN"


def test_nonzero_exit(tmp_path):
    exe = tmp_path / "bad"
    exe.write_text("#!/bin/sh\nexit 5\n")
    exe.chmod(0o755)
    with pytest.raises(SygusError) as e:
        invoke(binding([("a", INT)], [("b", INT)]), [1], Resolver({"orc": str(exe)}))
    assert e.value.code == "E-ORACLE-EXIT"


def test_timeout(tmp_path):
    exe = tmp_path / "slow"
    exe.write_text("#!/bin/sh\nsleep 5\n")
    exe.chmod(0o755)
    with pytest.raises(SygusError) as e:
        invoke(binding([("a", INT)], [("b", INT)]), [1], Resolver({"orc": str(exe)}), timeout=0.2)
    assert e.value.code == "E-ORACLE-TIMEOUT"


@pytest.mark.parametrize(
    "reply, code",
    [("(1 2)", "E-ORACLE-REPLY"), ("1", "E-ORACLE-REPLY"), ("(true)", "E-ORACLE-SORT"), ("((", "E-ORACLE-REPLY")],
)
def test_bad_replies(reply, code):
    with pytest.raises(SygusError) as e:
        parse_reply(reply, [("b", INT)])
    assert e.value.code == code


# value round trip through the stub, 100 values per call


def random_value(rng):
    kind = rng.randrange(5)
    if kind == 0:
        return rng.randint(-10**15, 10**15), INT
    if kind == 1:
        return Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 999)), simple_sort("Real")
    if kind == 2:
        return rng.random() < 0.5, simple_sort("Bool")
    if kind == 3:
        chars = [chr(rng.randint(32, 126)) for _ in range(rng.randint(0, 6))]
        return "".join(chars), simple_sort("String")
    w = rng.randint(1, 80)
    return BitVec(w, rng.getrandbits(w)), bv_sort(w)


@pytest.mark.parametrize("file_mode", [False, True], ids=["command-line", "file"])
def test_value_round_trip(tmp_path, file_mode):
    table = tmp_path / "echo.table"
    table.write_text("(fallback " + " ".join(f"x{i}" for i in range(1, 101)) + ")\n")
    exe = write_stub_script(str(tmp_path), "echo-stub", str(table), file_mode)
    rng = random.Random(1)
    for _ in range(10):
        vals = [random_value(rng) for _ in range(100)]
        ins = [(f"i{k}", s) for k, (_, s) in enumerate(vals)]
        outs = [(f"o{k}", s) for k, (_, s) in enumerate(vals)]
        b = binding(ins, outs, "echo", "file" if file_mode else "command-line")
        call = invoke(b, [v for v, _ in vals], Resolver({"echo": exe}))
        assert call.outputs == tuple(v for v, _ in vals)

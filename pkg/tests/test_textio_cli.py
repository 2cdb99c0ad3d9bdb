import random
from pathlib import Path

import pytest
from hypothesis import given, strategies as st

from affable import textio
from affable.cli import main
from affable.demo import two_point_demo
from affable.diagram import STRICT_FULL, Subdiagram
from affable.dot import count_dot, emit_dot
from affable.fixtures import branch_collapse, loop_then_chain, odometer, odometer_half
from affable.generators import random_chain, random_diagram
from affable.relations import FiniteEqRel, permutation_from_cycles
from affable.report import ReportSyntaxError, parse_report

GOLDEN = Path(__file__).parent / "golden"
X4 = (1, 2, 3, 4)


def run(capsys, *argv):
    status = main([str(a) for a in argv])
    captured = capsys.readouterr()
    return status, captured.out, captured.err


@pytest.fixture
def files(tmp_path):
    d = odometer(10)
    (tmp_path / "odo.txt").write_text(textio.emit_diagram(d))
    (tmp_path / "half.txt").write_text(textio.emit_subdiagram(odometer_half(d), {"HOST": "odo.txt"}))
    (tmp_path / "r.txt").write_text(textio.emit_relation(FiniteEqRel(X4, [[1, 2], [3, 4]])))
    (tmp_path / "s.txt").write_text(textio.emit_relation(FiniteEqRel(X4, [[1, 3], [2, 4]])))
    (tmp_path / "s_bad.txt").write_text(textio.emit_relation(FiniteEqRel(X4, [[1, 3]])))
    return tmp_path


class TestDiagramText:
    def test_round_trip(self, odo2, tree2):
        for d in (odo2, tree2, loop_then_chain(3)):
            assert textio.parse_diagram(textio.emit_diagram(d)) == d

    @given(st.integers(min_value=0, max_value=10**6))
    def test_round_trip_random(self, seed):
        d = random_diagram(random.Random(seed), depth=4)
        text = textio.emit_diagram(d)
        assert textio.parse_diagram(text) == d
        assert textio.emit_diagram(textio.parse_diagram(text)) == text

    def test_comments_and_blank_lines(self, tree2):
        text = textio.emit_diagram(tree2)
        noisy = "# a tree\n\n" + "\n".join(f"{line}   # note" if k % 2 else f"\n{line}"
                                          for k, line in enumerate(text.splitlines())) + "\n\n"
        assert textio.parse_diagram(noisy) == tree2

    @pytest.mark.parametrize("text, line, reason", [
        ("V 0 v0\nV 1 a\nE 1 e v0 zz\n", 3, "unknown"),
        ("V 0 v0\nV 1 a\nV 1 a\n", 3, "duplicate"),
        ("V 0 v0\nV 2 a\n", 2, "gap"),
        ("V 1 a\n", 1, "level 0"),
    ])
    def test_errors_name_the_line(self, text, line, reason):
        with pytest.raises(textio.ParseError) as info:
            textio.parse_diagram(text)
        assert info.value.line == line
        assert reason in str(info.value)
        assert str(info.value).startswith(f"line {line}:")

    def test_subdiagram_round_trip(self):
        d = odometer(4)
        s = odometer_half(d)
        text = textio.emit_subdiagram(s, {"HOST": "odo.txt"})
        assert textio.read_headers(text) == {"HOST": "odo.txt"}
        assert textio.parse_subdiagram(text, d).edge_ids(3) == s.edge_ids(3)

    def test_quotient_round_trip(self):
        q = branch_collapse(4)
        back = textio.parse_quotient(textio.emit_quotient(q), q.source, q.target)
        assert back.vertex_maps == q.vertex_maps and back.edge_maps == q.edge_maps
        assert back.strictness == STRICT_FULL


class TestRelationText:
    def test_relation_round_trip(self):
        r = FiniteEqRel(X4, [[1, 3], [2, 4]])
        assert textio.parse_relation(textio.emit_relation(r)) == r

    def test_unlisted_points_are_singletons(self):
        assert textio.parse_relation("P 1 2 3\nC 1 3\n").classes == ((1, 3), (2,))

    def test_permutations(self):
        g = permutation_from_cycles(X4, [(1, 2, 3, 4)])
        points, gens = textio.parse_permutations(textio.emit_permutations(X4, [g]))
        assert points == list(X4) and gens == [g]
        with pytest.raises(textio.ParseError):
            textio.parse_permutations("P 1 2\nG (1 2\n")

    def test_chain_round_trip(self):
        chain = random_chain(random.Random(3), tuple(range(6)), 4)
        assert textio.parse_chain(textio.emit_chain(chain)) == chain
        with pytest.raises(textio.ParseError, match="CHAIN 0"):
            textio.parse_chain("P 1 2\nCHAIN 1\n")

    def test_unknown_class_member(self):
        with pytest.raises(textio.ParseError) as info:
            textio.parse_relation("P 1 2\nC 1 9\n")
        assert info.value.line == 2


class TestDot:
    def test_tree_node_count(self, tree2):
        nodes, edges, marked = count_dot(emit_dot(tree2))
        assert (nodes, edges, marked) == (1 + 2 * 4, 8, 0)

    def test_highlight_everything(self):
        d = loop_then_chain(4)
        whole = Subdiagram(d, [[e.id for e in d.edges(n)] for n in range(1, 5)])
        nodes, edges, marked = count_dot(emit_dot(d, whole))
        assert edges == marked == d.num_edges()

    def test_demo_node_count(self):
        result = two_point_demo(4).result
        nodes, edges, _ = count_dot(emit_dot(result.rewritten))
        assert nodes == result.rewritten.num_vertices() == 43
        assert edges == result.rewritten.num_edges()


class TestReportGrammar:
    def test_parse(self):
        report = parse_report("STAGE a PASS fine\nSTAGE b FAIL\nMARGIN 3 4\nVALUE x 1/2\n")
        assert report.stages == [("a", True, "fine"), ("b", False, "")]
        assert report.margins == [(3, 4)] and report.values == {"x": "1/2"}
        assert not report.ok

    def test_rejects_junk(self):
        with pytest.raises(ReportSyntaxError):
            parse_report("STAGE a MAYBE\n")


class TestCommands:
    def test_validate(self, capsys, files):
        status, out, _ = run(capsys, "validate", files / "odo.txt")
        assert status == 0
        assert parse_report(out).values["vertices"] == "11"

    def test_validate_subdiagram(self, capsys, files):
        status, out, _ = run(capsys, "validate", files / "half.txt")
        assert status == 0 and parse_report(out).ok

    def test_missing_file(self, capsys, files):
        status, _, err = run(capsys, "validate", files / "nope.txt")
        assert status == 2 and "error" in err

    def test_malformed_file(self, capsys, files):
        (files / "broken.txt").write_text("V 0 v0\nE 1 e v0 zz\n")
        status, _, err = run(capsys, "validate", files / "broken.txt")
        assert status == 2 and "line 2" in err

    def test_thin_inclusive_tolerance(self, capsys, files):
        status, out, _ = run(capsys, "thin", "--sub", files / "half.txt", "--depth", 10, "--eps", "1/1024")
        assert status == 0
        assert parse_report(out).values["bound"] == "1/1024"
        status, _, _ = run(capsys, "thin", "--sub", files / "half.txt", "--depth", 10, "--eps", "1/2048")
        assert status == 1

    def test_paths_and_simple(self, capsys, files):
        status, out, _ = run(capsys, "paths", files / "odo.txt", "--level", 3)
        assert status == 0 and parse_report(out).values["paths"] == "8"
        status, out, _ = run(capsys, "simple", files / "odo.txt")
        assert status == 0 and parse_report(out).values["window.0"] == "1"

    def test_telescope_and_microscope(self, capsys, files):
        out_file = files / "t.txt"
        status, _, _ = run(capsys, "telescope", files / "odo.txt", "--cuts", "0,5,10", "--out", out_file)
        assert status == 0
        assert textio.parse_diagram(out_file.read_text()).depth == 2
        status, _, _ = run(capsys, "microscope", out_file, "--level", 1, "--out", files / "m.txt")
        assert status == 0
        assert textio.parse_diagram((files / "m.txt").read_text()).depth == 3

    def test_capacity(self, capsys, files):
        status, _, _ = run(capsys, "capacity", files / "odo.txt", "--cap-a", "3", "--cap-b", "4",
                           "--out", files / "c.txt")
        assert status == 0
        status, out, _ = run(capsys, "capacity", files / "odo.txt", "--cap-a", "3,3,3", "--cap-b", "9,9,9",
                             "--step-budget", 1, "--out", files / "c2.txt")
        assert status == 1 and "FAIL" in out

    def test_relations(self, capsys, files):
        status, out, _ = run(capsys, "rel-transversal", files / "r.txt", files / "s.txt")
        assert status == 0 and parse_report(out).values["composable"] == "16"
        status, out, _ = run(capsys, "rel-transversal", files / "r.txt", files / "s_bad.txt")
        assert status == 1 and "((2,1),(1,3))" in out
        status, out, _ = run(capsys, "rel-join", files / "r.txt", files / "s.txt")
        assert status == 0 and parse_report(out).values["classes"] == "1"

    def test_action_and_filtration(self, capsys, files):
        (files / "g.txt").write_text("P 1 2 3 4\nG (1 3)(2 4)\n")
        status, _, _ = run(capsys, "rel-from-action", files / "g.txt", "--out", files / "ga.txt")
        assert status == 0
        assert textio.parse_relation((files / "ga.txt").read_text()) == FiniteEqRel(X4, [[1, 3], [2, 4]])
        (files / "fixed.txt").write_text("P 1 2 3\nG (1 2)\n")
        status, out, _ = run(capsys, "rel-from-action", files / "fixed.txt")
        assert status == 1 and "fixed" in out
        chain = [FiniteEqRel.identity(X4), FiniteEqRel.identity(X4), FiniteEqRel(X4, [[1, 2], [3, 4]])]
        (files / "chain.txt").write_text(textio.emit_chain(chain))
        status, _, _ = run(capsys, "rel-filtration", files / "chain.txt", files / "s.txt")
        assert status == 0
        status, _, _ = run(capsys, "build-diagram", files / "chain.txt", "--out", files / "bd.txt")
        assert status == 0
        status, out, _ = run(capsys, "transverse-build", files / "chain.txt", files / "s.txt",
                             "--out-dir", files / "tb")
        assert status == 0, out
        q_text = (files / "tb" / "quotient.txt").read_text()
        status, _, _ = run(capsys, "validate", files / "tb" / "quotient.txt")
        assert status == 0 and "STRICT full" in q_text

    def test_absorption_commands(self, capsys, tmp_path):
        status, _, _ = run(capsys, "demo", "two-point", "--depth", 4, "--out-dir", tmp_path)
        assert status == 0
        flags = ["--sub", tmp_path / "y.txt", "--templates", tmp_path / "templates.txt"]
        assert run(capsys, "plant", *flags)[0] == 0
        assert run(capsys, "absorb", *flags, "--out-dir", tmp_path / "abs")[0] == 0
        assert run(capsys, "alpha", *flags)[0] == 0
        status, out, _ = run(capsys, "verify-star", *flags, "--n", 3)
        assert status == 0 and parse_report(out).margins == [(3, 4)]
        status, out, _ = run(capsys, "verify-star", *flags, "--n", 3, "--omit", "1")
        assert status == 1 and "unreached" in out
        status, _, _ = run(capsys, "verify-star", *flags, "--n", 4)
        assert status == 2
        assert run(capsys, "validate", tmp_path / "abs" / "quotient.txt")[0] == 0

    def test_dot_command(self, capsys, files):
        status, out, _ = run(capsys, "dot", files / "half.txt")
        assert status == 0
        assert count_dot(out) == (11, 20, 10)

    def test_report_file(self, capsys, files):
        status, out, _ = run(capsys, "--report", files / "rep.txt", "validate", files / "odo.txt")
        assert (files / "rep.txt").read_text() == out

    def test_shallow_demo_fails(self, capsys):
        status, out, _ = run(capsys, "demo", "two-point", "--depth", 3)
        assert status == 1 and "STAGE depth FAIL" in out

    def test_demo_depth4_matches_golden(self, capsys):
        status, out, _ = run(capsys, "demo", "two-point", "--depth", 4)
        assert status == 0
        assert out == (GOLDEN / "two_point_depth4.txt").read_text()
        assert parse_report(out).margins == [(3, 4)]

    def test_outputs_are_byte_identical(self, capsys):
        first = run(capsys, "--seed", 5, "demo", "two-point", "--depth", 4)[1]
        second = run(capsys, "--seed", 5, "demo", "two-point", "--depth", 4)[1]
        assert first == second
        assert parse_report(first).ok

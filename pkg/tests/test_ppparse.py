import random

import pytest

from vareffect.ppparse import (
    ELSE,
    Binary,
    Defined,
    Ident,
    Num,
    Opaque,
    UnbalancedDirectives,
    Unary,
    block_presence_conditions,
    parse_condition,
    render,
    scan_blocks,
    strip_consistency_checks,
)
from vareffect.ppparse.expr import ConditionParseError


@pytest.fixture
def listing1(fixtures_dir):
    path = fixtures_dir / "listing1" / "sample.c"
    return scan_blocks(path.read_bytes(), "sample.c")


class TestParseCondition:
    def test_relational_conjunction(self):
        assert parse_condition("VAR1 > 0 && VAR2 != 0") == Binary(
            "&&", Binary(">", Ident("VAR1"), Num(0)), Binary("!=", Ident("VAR2"), Num(0))
        )

    def test_defined(self):
        assert parse_condition("defined(X)") == Defined("X")
        assert parse_condition("defined X") == Defined("X")

    def test_sum_shape(self):
        assert parse_condition("A + B > 3") == Binary(">", Binary("+", Ident("A"), Ident("B")), Num(3))

    @pytest.mark.parametrize(
        "text, rendered",
        [
            ("A | B & C", "A | B & C"),
            ("(A | B) & C", "(A | B) & C"),
            ("A - (B - C)", "A - (B - C)"),
            ("A - B - C", "A - B - C"),
            ("!(A && B) || C", "!(A && B) || C"),
            ("-A * 2 < 0x10", "-A * 2 < 16"),
            ("X << 2 >= 010", "X << 2 >= 8"),
            ("F > 1.5f", "F > 1.5"),
            ("N == 3UL", "N == 3"),
        ],
    )
    def test_precedence_round_trip(self, text, rendered):
        e = parse_condition(text)
        assert render(e) == rendered
        assert parse_condition(render(e)) == e

    @pytest.mark.parametrize("text", ["", "A >", "(A", "A ? B : C", "defined(", "'c' == A", "A B"])
    def test_malformed(self, text):
        with pytest.raises(ConditionParseError):
            parse_condition(text)


class TestScanBlocks:
    def test_listing1_structure(self, listing1):
        assert len(listing1.blocks) == 1
        outer = listing1.blocks[0]
        assert (outer.start, outer.end) == (3, 11)
        assert len(outer.children) == 2
        inner, check = outer.children
        assert inner.error_only is False
        assert check.error_only is True
        assert check.expr == Unary("!", Defined("VAR3"))
        assert listing1.top_level_content

    def test_empty_file(self):
        tree = scan_blocks(b"", "empty.c")
        assert tree.blocks == []
        assert not tree.top_level_content

    def test_elif_else_chain(self):
        src = "#ifdef A\na();\n#elif B\nb();\n#else\nc();\n#endif\n"
        tree = scan_blocks(src)
        conds = [render(b.condition) for b in tree.blocks]
        assert conds == ["defined(A)", "!defined(A) && B", "!defined(A) && !B"]
        assert [(b.start, b.end) for b in tree.blocks] == [(1, 2), (3, 4), (5, 7)]
        assert tree.blocks[2].kind == ELSE and tree.blocks[2].expr is None

    def test_line_continuation_and_comments(self):
        src = (
            "/* #if NOT_A_BLOCK\n"
            "   #endif */\n"
            "#if A && \\\n"
            "    B // trailing\n"
            "x();\n"
            "#endif\n"
        )
        tree = scan_blocks(src)
        assert len(tree.blocks) == 1
        assert render(tree.blocks[0].expr) == "A && B"
        assert tree.blocks[0].start == 3

    def test_leading_whitespace_and_hash_spacing(self):
        tree = scan_blocks("   #  if A\n  # endif\n")
        assert len(tree.blocks) == 1

    @pytest.mark.parametrize(
        "src, line",
        [("#if A\n", 1), ("#endif\n", 1), ("#if A\n#else\n#else\n#endif\n", 3), ("x\n#elif A\n", 2)],
    )
    def test_unbalanced(self, src, line):
        with pytest.raises(UnbalancedDirectives) as err:
            scan_blocks(src, "bad.c")
        assert err.value.line == line

    def test_malformed_condition_degrades(self):
        tree = scan_blocks("#if A ? 1 : 0\nx();\n#endif\n")
        block = tree.blocks[0]
        assert isinstance(block.expr, Opaque)
        assert block.degraded
        assert len(tree.degraded) == 1
        # deterministic name
        again = scan_blocks("#if A ? 1 : 0\n#endif\n")
        assert again.blocks[0].expr.name == block.expr.name

    def test_round_trip_nesting_against_generator(self):
        rng = random.Random(3)

        def gen(depth):
            lines, count = [], 0
            for _ in range(rng.randint(0, 3)):
                lines.append(f"#if V{rng.randint(0, 9)} > {rng.randint(0, 3)}")
                lines.append("code();")
                count += 1
                if depth < 3:
                    sub, n = gen(depth + 1)
                    lines.extend(sub)
                    count += n
                if rng.random() < 0.5:
                    lines.append("#else")
                    lines.append("other();")
                    count += 1
                lines.append("#endif")
            return lines, count

        for _ in range(50):
            lines, expected = gen(0)
            tree = scan_blocks("\n".join(lines))
            assert sum(1 for _ in tree.walk()) == expected
            for b in tree.walk():
                assert b.start <= b.end
                for c in b.children:
                    assert b.start < c.start and c.end <= b.end


class TestStrip:
    def test_listing1(self, listing1):
        stripped = strip_consistency_checks(listing1)
        outer = stripped.blocks[0]
        assert len(outer.children) == 1
        assert render(outer.children[0].expr) == "VAR3 != 1"
        # input untouched
        assert len(listing1.blocks[0].children) == 2

    def test_nothing_to_strip(self):
        tree = scan_blocks("#if A\nx();\n#endif\n")
        assert strip_consistency_checks(tree) == tree

    def test_error_plus_comment(self):
        tree = scan_blocks('#if A\n/* explain */\n#error "bad"\n#endif\n')
        assert strip_consistency_checks(tree).blocks == []

    def test_error_with_code_is_kept(self):
        tree = scan_blocks('#if A\n#error "bad"\nx();\n#endif\n')
        assert len(strip_consistency_checks(tree).blocks) == 1

    def test_nested_error_only(self):
        src = "#if A\n#ifndef B\n#error no B\n#endif\n#endif\n"
        tree = scan_blocks(src)
        assert tree.blocks[0].error_only
        assert strip_consistency_checks(tree).blocks == []

    def test_mid_file_check_removed(self):
        src = "a();\n#ifndef X\n#error x\n#endif\n#if Y\ny();\n#endif\n"
        out = strip_consistency_checks(scan_blocks(src))
        assert [render(b.expr) for b in out.blocks] == ["Y"]

    def test_idempotent(self, listing1):
        once = strip_consistency_checks(listing1)
        assert strip_consistency_checks(once) == once


class TestPresenceConditions:
    def test_listing1_surviving_block(self, listing1):
        pcs = block_presence_conditions(strip_consistency_checks(listing1))
        rendered = [render(pc) for b, pc in pcs if b is not None]
        assert rendered == ["VAR1 > 0 && VAR2 != 0", "VAR1 > 0 && VAR2 != 0 && VAR3 != 1"]

    def test_listing1_check_block_before_strip(self, listing1):
        pcs = block_presence_conditions(listing1)
        assert render(pcs[-1][1]) == "VAR1 > 0 && VAR2 != 0 && !defined(VAR3)"

    def test_single_ifdef(self):
        pcs = block_presence_conditions(scan_blocks("#ifdef A\n#endif\n"))
        assert pcs == [(pcs[0][0], Defined("A"))]

    def test_top_level_entry(self, listing1):
        block, pc = block_presence_conditions(listing1)[0]
        assert block is None and render(pc) == "1"

import pytest

from vareffect.buildmodel import (
    BuildMapError,
    file_condition,
    glob_to_regex,
    load_aux_conditions,
    load_build_map,
)
from vareffect.logic import Var, parse_formula
from vareffect.ppparse import TRUE_EXPR, Binary, Ident, Num, Opaque
from vareffect.varmodel import FeatureDef, FeatureModel, Kind

MODEL = FeatureModel(
    {
        "ENGINE": FeatureDef("ENGINE", Kind.ENUM, (1, 2)),
        "VAR1": FeatureDef("VAR1", Kind.ENUM, (0, 1, 2)),
    }
)


def write(tmp_path, text, name="build_map.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestBuildMap:
    def test_row(self, tmp_path):
        bm = load_build_map(write(tmp_path, "pattern,condition\nsrc/gasoline/**,ENGINE == 1\n"))
        assert bm.rules[0].pattern == "src/gasoline/**"
        assert bm.rules[0].condition == Binary("==", Ident("ENGINE"), Num(1))

    def test_empty_file(self, tmp_path):
        bm = load_build_map(write(tmp_path, ""))
        assert bm.rules == () and bm.default_condition == TRUE_EXPR

    def test_first_match_wins(self, tmp_path):
        bm = load_build_map(write(tmp_path, "pattern,condition\nsrc/*.c,ENGINE == 1\nsrc/a.c,ENGINE == 2\n"))
        assert file_condition(bm, "src/a.c") == Binary("==", Ident("ENGINE"), Num(1))

    def test_unmatched_is_true(self, tmp_path):
        bm = load_build_map(write(tmp_path, "pattern,condition\nsrc/gasoline/**,ENGINE == 1\n"))
        assert file_condition(bm, "src/diesel/inj.c") == TRUE_EXPR

    def test_glob_match(self, tmp_path):
        bm = load_build_map(write(tmp_path, "pattern,condition\nsrc/gasoline/**,ENGINE == 1\n"))
        assert file_condition(bm, "src/gasoline/inj.c") == Binary("==", Ident("ENGINE"), Num(1))
        assert file_condition(bm, "./src/gasoline/deep/x.h") == Binary("==", Ident("ENGINE"), Num(1))

    def test_degraded_row(self, tmp_path):
        bm = load_build_map(write(tmp_path, "pattern,condition\nlib/*,ENGINE ==\n"))
        cond = file_condition(bm, "lib/x.c")
        assert isinstance(cond, Opaque)
        assert bm.degraded == [bm.rules[0]]

    def test_strict_aborts(self, tmp_path):
        with pytest.raises(BuildMapError) as err:
            load_build_map(write(tmp_path, "pattern,condition\nok/*,A\nlib/*,ENGINE ==\n"), strict=True)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        with pytest.raises(BuildMapError):
            load_build_map(write(tmp_path, "glob,cond\na,b\n"))

    def test_comma_in_condition(self, tmp_path):
        bm = load_build_map(write(tmp_path, 'pattern,condition\na/*,"VAR1 > 0"\n'))
        assert file_condition(bm, "a/b.c") == Binary(">", Ident("VAR1"), Num(0))


@pytest.mark.parametrize(
    "pattern, path, hit",
    [
        ("src/*.c", "src/a.c", True),
        ("src/*.c", "src/x/a.c", False),
        ("src/**", "src/x/a.c", True),
        ("**/inj.c", "inj.c", True),
        ("**/inj.c", "a/b/inj.c", True),
        ("src/?.c", "src/ab.c", False),
    ],
)
def test_glob(pattern, path, hit):
    assert (glob_to_regex(pattern).match(path) is not None) == hit


class TestAux:
    def test_load(self, tmp_path):
        p = write(tmp_path, "# interface variability\nVAR1\tVAR1=1 && defined(ENGINE)\tmsr:if1\n", "aux.txt")
        (entry,) = load_aux_conditions(p, MODEL)
        assert entry.feature == "VAR1" and entry.tag == "msr:if1"
        assert entry.formula == parse_formula("VAR1=1 && defined(ENGINE)")
        assert not entry.degraded

    def test_unknown_variables_degrade(self, tmp_path):
        p = write(tmp_path, "VAR1\tVAR1=7 || NOPE=1\tt\n", "aux.txt")
        (entry,) = load_aux_conditions(p, MODEL)
        assert entry.degraded
        assert all(v.startswith("__opaque_") for v in entry.formula.variables())

    def test_bad_line(self, tmp_path):
        p = write(tmp_path, "VAR1\t(VAR1=1\tt\nonly-one-column\n", "aux.txt")
        entries = load_aux_conditions(p, MODEL)
        assert [e.degraded for e in entries] == [True, True]
        assert all(isinstance(e.formula, Var) for e in entries)
        with pytest.raises(BuildMapError):
            load_aux_conditions(p, MODEL, strict=True)

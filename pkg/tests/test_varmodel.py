import random

import pytest

from oracles import random_formula
from vareffect.feffect import classify_formula
from vareffect.logic import FALSE, TRUE, Var, is_tautology, parse_formula
from vareffect.numtrans import domain_axioms
from vareffect.varmodel import (
    DuplicateFeature,
    FeatureDef,
    FeatureModel,
    FeatureModelError,
    Kind,
    Legacy,
    MalformedRange,
    apply_legacy,
    load_constants,
    load_feature_model,
    parse_pseudo,
)

HEADER = "name,kind,values,legacy,legacy_value\n"


def write(tmp_path, text, name="features.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestLoad:
    def test_enum(self, tmp_path):
        model = load_feature_model(write(tmp_path, HEADER + "VAR1,enum,0|1|2,none,\n"))
        f = model.features["VAR1"]
        assert f.kind is Kind.ENUM and f.values == (0, 1, 2) and f.bounded

    def test_unbounded_int(self, tmp_path):
        f = load_feature_model(write(tmp_path, HEADER + "DEBUG_LVL,int,,none,\n")).features["DEBUG_LVL"]
        assert f.kind is Kind.INT and not f.bounded

    def test_bool_legacy_fixed(self, tmp_path):
        f = load_feature_model(write(tmp_path, HEADER + "OLD_FLAG,bool,,fixed,0\n")).features["OLD_FLAG"]
        assert f.values == (0, 1)
        assert f.legacy is Legacy.FIXED and f.legacy_value == 0

    def test_listed_float_range_is_bounded(self, tmp_path):
        f = load_feature_model(write(tmp_path, HEADER + "GAIN,float,0.5|1.5,none,\n")).features["GAIN"]
        assert f.bounded and f.value_var(1.5) == "GAIN=1.5"

    def test_constant_rows_and_file(self, tmp_path):
        feats = write(tmp_path, HEADER + "PI_ISH,constant,3,none,\nVAR1,enum,0|1,none,\n")
        consts = write(tmp_path, "name,value\nCONST_ZERO,0\nMASK,0x10\n", "constants.csv")
        model = load_feature_model(feats, consts)
        assert model.constants == {"PI_ISH": 3, "CONST_ZERO": 0, "MASK": 16}
        assert "PI_ISH" not in model.features

    def test_duplicate(self, tmp_path):
        with pytest.raises(DuplicateFeature) as err:
            load_feature_model(write(tmp_path, HEADER + "A,bool,,none,\nA,bool,,none,\n"))
        assert err.value.line == 3

    @pytest.mark.parametrize("row", ["A,enum,,none,", "A,enum,1|x,none,", "A,enum,0|1,fixed,5", "A,enum,1|1,none,"])
    def test_malformed_range(self, tmp_path, row):
        with pytest.raises(MalformedRange):
            load_feature_model(write(tmp_path, HEADER + row + "\n"))

    def test_constant_feature_clash(self, tmp_path):
        feats = write(tmp_path, HEADER + "A,bool,,none,\n")
        consts = write(tmp_path, "name,value\nA,1\n", "constants.csv")
        with pytest.raises(FeatureModelError):
            load_feature_model(feats, consts)

    def test_constants_loader(self, tmp_path):
        assert load_constants(write(tmp_path, "name,value\nK,-2\n", "c.csv")) == {"K": -2}


def test_parse_pseudo():
    assert parse_pseudo("VAR1=2") == ("VAR1", "2")
    assert parse_pseudo("defined(VAR3)") == ("VAR3", None)
    assert parse_pseudo("__opaque_abc") is None


MODEL = FeatureModel(
    {
        "F": FeatureDef("F", Kind.BOOL, (0, 1), Legacy.FIXED, 0),
        "G": FeatureDef("G", Kind.BOOL, (0, 1), Legacy.RETIRED),
        "A": FeatureDef("A", Kind.BOOL, (0, 1)),
    }
)


class TestApplyLegacy:
    def test_fixed_value_true(self):
        assert apply_legacy(parse_formula("F=0 || A=1"), MODEL) == TRUE

    def test_fixed_other_value_false(self):
        assert apply_legacy(parse_formula("F=1 && A=1"), MODEL) == FALSE

    def test_fixed_defined(self):
        assert apply_legacy(parse_formula("defined(F) && A=1"), MODEL) == Var("A=1")

    def test_retired(self):
        assert apply_legacy(parse_formula("defined(G) && A=1"), MODEL) == FALSE
        assert apply_legacy(parse_formula("G=1 || A=1"), MODEL) == Var("A=1")

    def test_idempotent(self):
        f = parse_formula("(F=0 && A=1) || (G=1 && A=0) || defined(A)")
        once = apply_legacy(f, MODEL)
        assert apply_legacy(once, MODEL) == once

    def test_tautology_preserved(self):
        rng = random.Random(11)
        names = ["F=0", "F=1", "defined(F)", "G=1", "A=0", "A=1", "defined(A)"]
        axioms = domain_axioms(MODEL)
        for _ in range(300):
            f = random_formula(rng, names, 4)
            if is_tautology(f, axioms):
                assert is_tautology(apply_legacy(f, MODEL), axioms)

    def test_classification_never_becomes_dependent(self):
        axioms = domain_axioms(MODEL)
        f = parse_formula("A=1 || F=0")
        assert classify_formula(f, axioms) == "DEPENDENT"
        assert classify_formula(apply_legacy(f, MODEL), axioms) == "INDEPENDENT"

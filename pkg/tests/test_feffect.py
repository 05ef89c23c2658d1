import random

import pytest

from oracles import assignments, brute_always_matters, random_formula, toggle_oracle, truth_table
from vareffect.buildmodel import load_build_map
from vareffect.feffect import (
    Category,
    FileAnalyzer,
    PCIndex,
    UnusedFeature,
    build_index,
    classify,
    classify_all,
    classify_formula,
    collect_pcs,
    feature_effect,
    feature_level_effect,
)
from vareffect.logic import FALSE, TRUE, Var, evaluate, parse_formula
from vareffect.numtrans import domain_axioms
from vareffect.varmodel import FeatureDef, FeatureModel, Kind, Legacy, load_feature_model

P = parse_formula


class TestFeatureEffect:
    def test_single(self):
        assert feature_effect("p", [Var("p")]) == TRUE

    def test_conjunction(self):
        assert feature_effect("p", [P("A && p")]) == Var("A")

    def test_complementary_guards(self):
        assert feature_effect("p", [P("p && g"), P("p && !g")]) == TRUE

    def test_disjunction(self):
        assert feature_effect("p", [P("A || p")]) == P("!A")

    def test_empty(self):
        assert feature_effect("p", []) == FALSE

    def test_unrelated_pc_ignored(self):
        base = [P("p && A"), P("p || B")]
        names = ["A", "B", "C", "p"]
        extra = feature_effect("p", base + [P("B && C")])
        assert truth_table(extra, names) == truth_table(feature_effect("p", base), names)

    def test_unsimplified_is_equivalent(self):
        pcs = [P("A && p"), P("(p ^ B) || C")]
        names = ["A", "B", "C"]
        assert truth_table(feature_effect("p", pcs, simplified=False), names) == truth_table(
            feature_effect("p", pcs), names
        )

    def test_toggle_oracle(self):
        rng = random.Random(17)
        names = ["p", "a", "b", "c", "d", "e"]
        for _ in range(150):
            pcs = [random_formula(rng, names, rng.randint(1, 4)) for _ in range(rng.randint(1, 5))]
            fe = feature_effect("p", pcs)
            for a in assignments(names):
                assert evaluate(fe, a) == toggle_oracle("p", pcs, a)


def index_of(*texts, model=None):
    model = model or FeatureModel(
        {n: FeatureDef(n, Kind.BOOL, (0, 1)) for n in ("A", "B", "G")}
    )
    idx = PCIndex(model)
    idx.extend(P(t) for t in texts)
    return idx


class TestIndex:
    def test_dedup(self):
        idx = index_of("A=1 && B=0", "B=0 && A=1")
        assert len(idx) == 1
        assert idx.pcs("A=1") == [P("A=1 && B=0")]

    def test_registered_under_every_pseudo_variable(self):
        idx = index_of("A=1 && (B=0 || defined(G))")
        assert idx.features() == ["A", "B", "G"]
        assert idx.variables("G") == ["defined(G)"]

    def test_skips_opaque_and_unknown(self):
        idx = index_of("A=1 && __opaque_0123456789 && defined(INCLUDE_GUARD)")
        assert idx.features() == ["A"]

    def test_pc_count(self):
        idx = index_of("A=1 && B=0", "A=0", "B=1")
        assert idx.pc_count("A") == 2


class TestFeatureLevel:
    def test_true(self):
        assert feature_level_effect("A", index_of("A=1")) == TRUE

    def test_complementary_values(self):
        effects = {"A=0": Var("B=1"), "A=1": P("!B=1")}
        assert feature_level_effect("A", index_of("A=0", "A=1"), effects) == TRUE

    def test_absorbed(self):
        effects = {"A=0": Var("B=1"), "A=1": P("B=1 && G=1")}
        assert feature_level_effect("A", index_of("A=0", "A=1"), effects) == Var("B=1")

    def test_unused(self):
        with pytest.raises(UnusedFeature):
            feature_level_effect("G", index_of("A=1"))


class TestClassify:
    MODEL = FeatureModel({"VAR1": FeatureDef("VAR1", Kind.ENUM, (0, 1, 2))})

    def test_true_is_independent(self):
        assert classify_formula(TRUE) is Category.INDEPENDENT

    def test_values_without_undefined_state(self):
        axioms = domain_axioms(self.MODEL)
        assert classify_formula(P("VAR1=1 || VAR1=2"), axioms) is Category.DEPENDENT

    def test_covers_all_states_under_axioms(self):
        axioms = domain_axioms(self.MODEL)
        f = P("VAR1=0 || VAR1=1 || VAR1=2 || !defined(VAR1)")
        assert classify_formula(f) is Category.DEPENDENT
        assert classify_formula(f, axioms) is Category.INDEPENDENT


FIG2_PCS = [
    P("(VAR1=1 || VAR1=2) && VAR2=1"),
    P("(VAR1=1 || VAR1=2) && VAR2=1 && VAR3=0"),
    P("VAR2=1"),
]


@pytest.fixture
def fig2(fixtures_dir):
    root = fixtures_dir / "fig2"
    model = load_feature_model(root / "features.csv", root / "constants.csv")
    analyzer = FileAnalyzer(model, load_build_map(root / "build_map.csv"))
    return model, analyzer, collect_pcs(root / "src", analyzer)


class TestFig2:
    def test_collected_pcs(self, fig2):
        _, _, coll = fig2
        assert sorted(pc.key for pc in coll.pcs) == sorted(pc.key for pc in FIG2_PCS + [TRUE])
        assert coll.blocks == 3 and coll.dead == 0

    def test_categories_match_oracle(self, fig2):
        model, analyzer, coll = fig2
        index, _ = build_index(coll.pcs, model)
        records = {r.feature: r for r in classify_all(index, analyzer.axioms, "fig2")}
        axioms = list(analyzer.axioms)
        for name, rec in records.items():
            expected = brute_always_matters(index.variables(name), FIG2_PCS, axioms)
            assert (rec.category is Category.INDEPENDENT) == expected, name
        assert {n: str(r.category) for n, r in records.items()} == {
            "VAR1": "DEPENDENT",
            "VAR2": "INDEPENDENT",
            "VAR3": "DEPENDENT",
        }

    def test_listing_alone_makes_var2_dependent(self, fig2):
        model, analyzer, _ = fig2
        index, _ = build_index(FIG2_PCS[:2], model)
        assert classify("VAR2", index, analyzer.axioms).category is Category.DEPENDENT

    def test_same_condition_in_two_files(self, tmp_path, fig2):
        model, analyzer, _ = fig2
        for name in ("a.c", "b.c"):
            (tmp_path / name).write_text("#if VAR3 == 1\nx();\n#endif\n")
        coll = collect_pcs(tmp_path, analyzer)
        index, _ = build_index(coll.pcs, model)
        assert index.pcs("VAR3=1") == [Var("VAR3=1")]

    def test_empty_product(self, tmp_path, fig2):
        _, analyzer, _ = fig2
        coll = collect_pcs(tmp_path, analyzer)
        assert coll.pcs == [] and coll.files == 0

    def test_dead_block_dropped(self, tmp_path, fig2):
        _, analyzer, _ = fig2
        (tmp_path / "d.c").write_text("#if VAR1 == 1 && VAR1 == 2\nx();\n#endif\n")
        coll = collect_pcs(tmp_path, analyzer)
        assert coll.dead == 1 and coll.pcs == []
        assert any(i.code == "dead-block" for i in coll.issues)

    def test_parallel_matches_serial(self, tmp_path, fixtures_dir, fig2):
        _, analyzer, _ = fig2
        for i in range(6):
            (tmp_path / f"f{i}.c").write_text(f"#if VAR1 == {i % 3} || VAR2\nx();\n#endif\n")
        serial = collect_pcs(tmp_path, analyzer)
        parallel = collect_pcs(tmp_path, analyzer, jobs=2)
        assert [p.key for p in serial.pcs] == [p.key for p in parallel.pcs]


class TestLegacyIndex:
    def test_flip_and_removal(self):
        model = FeatureModel(
            {
                "A": FeatureDef("A", Kind.BOOL, (0, 1)),
                "OLD": FeatureDef("OLD", Kind.BOOL, (0, 1), Legacy.FIXED, 1),
            }
        )
        axioms = domain_axioms(model)
        pcs = [P("A=1 && OLD=1"), P("OLD=0")]
        raw, _ = build_index(pcs, model, legacy=False)
        done, dead = build_index(pcs, model)
        assert dead == 1
        assert classify("A", raw, axioms).category is Category.DEPENDENT
        assert classify("A", done, axioms).category is Category.INDEPENDENT
        assert done.features() == ["A"]

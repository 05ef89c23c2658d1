import random

from oracles import assignments, bit_table, bit_toggle, random_formula, toggle_oracle
from vareffect.logic import evaluate


def test_bit_table_matches_evaluation():
    rng = random.Random(1)
    names = list("abcdef")
    for _ in range(100):
        f = random_formula(rng, names, 4)
        t = bit_table(f, names)
        assert all(((t >> i) & 1) == evaluate(f, a) for i, a in enumerate(assignments(names)))


def test_bit_toggle_matches_toggle_oracle():
    rng = random.Random(2)
    names = list("abcde")
    for _ in range(50):
        pcs = [random_formula(rng, names, 3) for _ in range(3)]
        t = bit_toggle("c", pcs, names)
        assert all(((t >> i) & 1) == toggle_oracle("c", pcs, a) for i, a in enumerate(assignments(names)))

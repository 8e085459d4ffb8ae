"""Preset Kripke frames at cutoff 3 and depth 6, and what holds at the
bottom node of each."""
from fanmodels.bars import show, strings_upto
from fanmodels.formula import parse_formula
from fanmodels.kripke import (
    build_preset, c_set_biconditional, capC_nonclosure_witness, check_atom_persistence, evaluate,
    internal_decidable, internal_uniform, lem_countermodel, members_at,
)

std = strings_upto(3)

F = build_preset("fanc", 3, 6, seed=0)
print("fanc:", len(F.nodes), "nodes")
print("  Cp decidable at bottom:", internal_decidable(F, F.bottom, "Cp", std))
print("  C uniform at bottom:   ", internal_uniform(F, F.bottom, "C", 6)[0])
print("  c-set failures:        ", c_set_biconditional(F, F.bottom, "C", "Cp", std))

F = build_preset("fanpi", 3, 6, seed=0)
print("fanpi:", len(F.nodes), "nodes")
print("  intersection at bottom:", sorted(map(show, members_at(F, F.bottom, "capC"))))
print("  not closed under extensions at:", capC_nonclosure_witness(F))

F = build_preset("fand", 3, 6, seed=0)
print("fand: uniform at bottom:", internal_uniform(F, F.bottom, "B", 6)[0])
for name in ("fand", "fanc", "fanpi", "fanfull"):
    print(f"{name} atom persistence failures:", len(check_atom_persistence(build_preset(name, 3, 6))))

L = lem_countermodel()
for text in (r"a in b \/ ~(a in b)", "~~(a in b)"):
    print(f"two-node chain, bottom, {text}:", evaluate(L, "bot", parse_formula(text, names=["a", "b"])))

"""Star-forcing in the three condition variants: a few forced statements,
then the exhaustive monotonicity checks, then the pair that breaks
monotonicity when weakenings may grow the domain."""
from fanmodels.conditions import IN, INF, Condition
from fanmodels.starforce import (
    ForcingContext, default_terms, forcing_set, lemma_suite, literal_order_counterexample, star_force,
)

ctx = ForcingContext("B", 2, default_terms("B"))
p = Condition("B", {"": INF, "0": IN, "1": INF})
for f in ("o in C", "i in C", "C = Cp", "o in Cp"):
    print(f"{p} forces {f!r}:", star_force(p, f, ctx))
print("conditions forcing 'o in C':", len(forcing_set("o in C", ctx)), "of", ctx.N)

for v in "ABC":
    r = lemma_suite(v, max_formula_depth=3)
    print(f"variant {v}: {r.formulas} formulas over {r.conditions} conditions,"
          f" {r.distinct_values} distinct values, counterexamples: {len(r.counterexamples)}")

print("literal weakening order:", literal_order_counterexample("literal"))
print("domain-keeping order:   ", literal_order_counterexample("domain"))

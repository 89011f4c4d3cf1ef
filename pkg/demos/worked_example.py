"""
Repairing a sentence the grammar cannot parse
=============================================

"That wipes out my mornings" has no full parse in the scheduling grammar:
"wipes" is in the lexicon but nothing can be built around it. We follow the
sentence through each stage.
"""

# %%
# Load the bundled scheduling domain: grammar, frame spec, parse table,
# slot/filler statistics and the learned fitness expression.
from rose.flex import FlexConfig, mdp_parse, restarts_parse, skip_parse
from rose.fitness import score_features
from rose.glr import glr_parse
from rose.gp import GpParams
from rose.harness import grade, largest_chunk, load_domain
from rose.interlingua import format_fs
from rose.repair import evolve

d = load_domain()
tokens = "that wipes out my mornings".split()
print(len(d.grammar.rules), "rules,", len(d.spec.frames), "frames")

# %%
# A plain GLR parse finds nothing.
print("full parses:", glr_parse(d.table, tokens, d.spec))

# %%
# Skipping finds the cheapest parse over a subsequence, but it has to throw
# most of the sentence away.
best = min(skip_parse(d.table, tokens, spec=d.spec), key=lambda a: a.deviation_penalty)
print("skipped", sorted(best.skipped), "->", format_fs(best.value))

# %%
# Minimum distance parsing can also insert material. A penalty bound of 3
# is not enough here.
print("MDP 3:", len(mdp_parse(d.table, tokens, FlexConfig("mdp", 3), d.spec)), "analyses")

# %%
# Restarts segment the sentence into maximal parseable chunks.
chunks = restarts_parse(d.table, tokens, d.spec)
for i, c in enumerate(chunks):
    print(f"#{i} {c.span} {format_fs(c.value)}")
print("uncovered:", [tokens[i] for i in chunks.uncovered])

# %%
# The repair module evolves programs of MY-COMB operations over the chunks.
# Each hypothesis is scored by the fitness expression over three features:
# the number of operations, the size of the result, and the mean slot/filler
# statistic of the insertions it made.
print("fitness:", d.fitness)
hyps = evolve(chunks, d.spec, d.fitness, d.stats, GpParams(seed=0))
for h in hyps[:5]:
    print(f"{h.fitness:8.3f}  {tuple(score_features(h, d.stats))}  {h.program}")

# %%
# The winner places the time expression in the WHEN slot of the response.
top = hyps[0]
print(top.format(chunks.values))
print(format_fs(top.result, pretty=True))

# %%
# Grading against the intended meaning.
from rose.interlingua import parse_fs

gold = parse_fs("""((FRAME *RESPOND) (DEGREE NORMAL) (TYPE NEGATIVE)
 (WHEN ((FRAME *SIMPLE-TIME) (TIME-OF-DAY MORNING) (NUMBER PLURAL) (SIMPLE-UNIT-NAME TOD))))""")
print("largest chunk alone:", grade(largest_chunk(chunks), gold))
print("after repair:", grade(top.result, gold))

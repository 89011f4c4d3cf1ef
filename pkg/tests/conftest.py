import random
from pathlib import Path

import pytest

from rose.grammar import compile_tables, load_grammar
from rose.harness import load_domain

TOY_GRAMMAR = """\
# small English fragment, 11 rules
%start S
S -> NP VP : (make-frame *CLAUSE (AGENT $1) (ACT $2))
S -> VP
NP -> DET N : (make-frame *THING (HEAD $2) (DET $1))
NP -> DET ADJ N : (make-frame *THING (HEAD $3) (DET $1) (MOD $2))
NP -> PRON : (make-frame *THING (HEAD $1))
NP -> NP PP : (set-slot $1 LOC $2)
VP -> V : (make-frame *ACT (PRED $1))
VP -> V NP : (make-frame *ACT (PRED $1) (THEME $2))
VP -> VP PP : (set-slot $1 LOC $2)
VP -> PUT NP PP : (make-frame *ACT (PRED $1) (THEME $2) (LOC $3))
PP -> P NP : (make-frame *PLACE (REL $1) (GROUND $2))
the :: DET : THE
a :: DET : A
dog :: N : DOG
cat :: N : CAT
park :: N : PARK
big :: ADJ : BIG
she :: PRON : SHE
saw :: V : SEE
ran :: V : RUN
put :: PUT : PUT
in :: P : IN
with :: P : WITH
"""

TOY_WORDS = ["the", "a", "dog", "cat", "park", "big", "she", "saw", "ran", "put", "in", "with"]


@pytest.fixture(scope="session")
def toy_grammar():
    return load_grammar(TOY_GRAMMAR)


@pytest.fixture(scope="session")
def toy_table(toy_grammar):
    return compile_tables(toy_grammar)


@pytest.fixture(scope="session")
def toy_table_all(toy_grammar):
    return compile_tables(toy_grammar, "all")


def random_sentences(n, max_len, seed, min_len=1):
    rng = random.Random(seed)
    return [[rng.choice(TOY_WORDS) for _ in range(rng.randint(min_len, max_len))] for _ in range(n)]


@pytest.fixture(scope="session")
def domain():
    return load_domain()


@pytest.fixture(scope="session")
def wipes_tokens():
    return "that wipes out my mornings".split()


def corrupted_sentences(g, n, seed, max_len=10):
    """Grammatical toy sentences of bounded length, then corrupted."""
    from rose.harness import corrupt, sample_sentence

    rng = random.Random(seed)
    out = []
    while len(out) < n:
        tokens, _ = sample_sentence(g, rng)
        if len(tokens) > max_len - 1:
            continue
        noisy = corrupt(tokens, rng, TOY_WORDS, 0.15, 0.15, 0.05)
        if len(noisy) <= max_len:
            out.append(noisy)
    return out


CHUNK_PHRASES = [
    "that", "out", "my", "mornings", "bad", "fine", "great", "monday", "tuesday afternoon",
    "the morning", "i", "we", "you", "free", "busy", "on friday", "in the afternoon",
    "from monday to tuesday", "how about wednesday", "i am free", "we can meet on monday",
    "evenings", "your", "our", "terrible", "that is fine", "mornings are bad",
]


def chunk_pool(domain):
    """Distinct chunk structures of the scheduling domain."""
    from rose.flex import restarts_parse

    pool = []
    for text in CHUNK_PHRASES:
        chunks = restarts_parse(domain.table, text.split(), domain.spec)
        for v in chunks.values:
            if v not in pool:
                pool.append(v)
    return pool


def chunk_instances(domain, n, k, seed):
    rng = random.Random(seed)
    pool = chunk_pool(domain)
    return [rng.sample(pool, k) for _ in range(n)]

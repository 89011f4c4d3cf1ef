"""Robust parsing of extragrammatical input.

Pipeline pieces, each usable on its own:

* :mod:`rose.grammar`     semantic grammars and SLR tables
* :mod:`rose.glr`         generalised LR parsing
* :mod:`rose.flex`        skipping, restarts and minimum distance parsing
* :mod:`rose.interlingua` frame structures and their specification
* :mod:`rose.repair`      genetic-programming combination of chunks
* :mod:`rose.fitness`     slot statistics and the learned fitness
* :mod:`rose.harness`     corpus benchmark
"""
from .flex import ChunkSet, FlexConfig, flex_parse, mdp_parse, restarts_parse, select_best, skip_parse
from .glr import Analysis, glr_parse
from .gp import GpParams
from .grammar import Grammar, compile_tables, load_grammar, min_yield
from .interlingua import FeatureStructure, InterlinguaSpec, format_fs, load_spec, parse_fs
from .repair import evolve, eval_program, needs_repair

__version__ = "0.1.0"

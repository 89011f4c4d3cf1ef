"""Command line entry point: ``rose <command> ...``.

Every option may also come from a JSON file given with ``--config``; keys
are option names (``max-penalty`` or ``max_penalty``) and flags on the
command line win.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .fitness import FitnessExpression, load_fitness, load_stats, train_fitness, train_mi
from .flex import ChunkSet, FlexConfig, flex_parse, select_best
from .gp import GpParams
from .grammar import compile_tables, dump_grammar, dump_table, load_grammar
from .harness import (Artifacts, dump_corpus, emit_report, generate_corpus, load_corpus,
                      load_domain, run_benchmark, strategy_by_name, synthetic_domain,
                      training_examples, SyntheticSpec)
from .interlingua import dump_spec, format_fs, load_spec
from .repair import evolve, needs_repair


def _beam(text: str):
    if text.lower() in ("inf", "none", "unbounded"):
        return None
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("beam must be positive or 'inf'")
    return value


def _domain_args(p: argparse.ArgumentParser, artifacts: bool = True) -> None:
    p.add_argument("--grammar", help="grammar file (default: shipped scheduling grammar)")
    p.add_argument("--spec", help="interlingua spec file (default: shipped scheduling spec)")
    if artifacts:
        p.add_argument("--stats-file", help="slot statistics from train-stats")
        p.add_argument("--fitness-file", help="fitness expression from train-fitness")


def _gp_args(p: argparse.ArgumentParser) -> None:
    d = GpParams()
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--population", type=int, default=d.population)
    p.add_argument("--generations", type=int, default=d.generations)


def _gp_params(args) -> GpParams:
    return GpParams(population=args.population, generations=args.generations, seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rose", description="Robust parsing with chunk repair.")
    parser.add_argument("--config", help="JSON file of option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile a grammar into a parse table file")
    p.add_argument("grammar")
    p.add_argument("-o", "--output", help="table file (default: stdout)")
    p.add_argument("--entries", default="all", help="'all', 'start', or comma-separated nonterminals")

    p = sub.add_parser("parse", help="parse one sentence")
    p.add_argument("sentence", nargs="+")
    _domain_args(p)
    p.add_argument("--mode", choices=("full-parse", "skip", "restarts", "mdp"), default="restarts")
    p.add_argument("--max-penalty", type=int, default=0)
    p.add_argument("--beam", type=_beam, default=256)
    p.add_argument("--repair", action="store_true", help="combine restart chunks")
    p.add_argument("--pretty", action="store_true")
    _gp_args(p)

    p = sub.add_parser("train-stats", help="estimate slot/filler statistics from gold structures")
    p.add_argument("--corpus", required=True)
    _domain_args(p, artifacts=False)
    p.add_argument("-o", "--output", required=True)

    p = sub.add_parser("train-fitness", help="learn the hypothesis fitness expression")
    p.add_argument("--corpus", required=True)
    _domain_args(p)
    p.add_argument("-o", "--output", required=True)
    _gp_args(p)

    p = sub.add_parser("bench", help="run strategies over a corpus and write reports")
    p.add_argument("--corpus", required=True)
    _domain_args(p)
    p.add_argument("--strategies", default="mdp1,mdp3,mdp5,restarts,repair")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--beam", type=_beam, default=256)
    _gp_args(p)

    p = sub.add_parser("gen-corpus", help="sample a corrupted corpus from a grammar")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--synthetic", action="store_true",
                   help="use a generated grammar; its grammar and spec files are written next to the corpus")
    _domain_args(p, artifacts=False)
    p.add_argument("--p-delete", type=float, default=0.1)
    p.add_argument("--p-insert", type=float, default=0.1)
    p.add_argument("--p-foreign", type=float, default=0.1)
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> argparse.Namespace:
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        data = json.loads(Path(pre.config).read_text(encoding="utf-8"))
        defaults = {k.replace("-", "_"): v for k, v in data.items()}
        if "beam" in defaults and isinstance(defaults["beam"], str):
            defaults["beam"] = _beam(defaults["beam"])
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                known = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return parser.parse_args(argv)


def _domain(args, artifacts: bool = True):
    kwargs = {"grammar_path": args.grammar, "spec_path": args.spec}
    if artifacts:
        kwargs.update(stats_path=args.stats_file, fitness_path=args.fitness_file)
    return load_domain(**kwargs)


def cmd_compile(args) -> int:
    g = load_grammar(Path(args.grammar).read_text(encoding="utf-8"))
    entries = {"all": "all", "start": None}.get(args.entries, None)
    if args.entries not in ("all", "start"):
        entries = [e.strip() for e in args.entries.split(",") if e.strip()]
    table = compile_tables(g, entries)
    text = dump_table(table)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        conflicts = table.conflicts()
        print(f"{table.n_states} states, {len(conflicts)} conflict cells -> {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_parse(args) -> int:
    d = _domain(args)
    tokens = [t for s in args.sentence for t in s.split()]
    config = FlexConfig(args.mode, args.max_penalty, args.beam)
    result = flex_parse(d.table, tokens, config, d.spec)
    if isinstance(result, ChunkSet):
        for c in result:
            print(f"chunk {c.span[0]}-{c.span[1]} {c.category}: {format_fs(c.value)}")
        if result.uncovered:
            print("uncovered: " + " ".join(tokens[i] for i in result.uncovered))
        if args.repair and len(result) and needs_repair(result):
            arts = d.artifacts(_gp_params(args))
            best = evolve(result, d.spec, arts.fitness, arts.stats, arts.params)[0]
            print("hypothesis:")
            print(best.format(result.values, pretty=True))
            print("result:")
            print(format_fs(best.result, pretty=args.pretty))
        elif not len(result):
            print("NIL")
        return 0
    if not result:
        print("NIL")
        return 1
    best = select_best(result)
    print(f"penalty {best.deviation_penalty}"
          + (f" skipped {' '.join(tokens[i] for i in sorted(best.skipped))}" if best.skipped else "")
          + (f" inserted {' '.join(nt for nt, _ in best.inserted)}" if best.inserted else ""))
    print(format_fs(best.value, pretty=args.pretty))
    return 0


def cmd_train_stats(args) -> int:
    spec = _domain(args, artifacts=False).spec
    corpus = load_corpus(args.corpus, spec)
    stats = train_mi([e.gold for e in corpus], spec)
    Path(args.output).write_text(stats.to_text(), encoding="utf-8")
    print(f"{len(corpus)} structures -> {args.output}")
    return 0


def cmd_train_fitness(args) -> int:
    d = _domain(args)
    corpus = load_corpus(args.corpus, d.spec)
    stats = load_stats(args.stats_file) if args.stats_file else d.stats
    if stats is None:
        stats = train_mi([e.gold for e in corpus], d.spec)
    params = _gp_params(args)
    examples = training_examples(corpus, d.table, d.spec, stats, params=params)
    if not examples:
        print("no sentence in the corpus needs repair; nothing to train on", file=sys.stderr)
        return 1
    expr = train_fitness(examples, params)
    Path(args.output).write_text(expr.to_text(), encoding="utf-8")
    print(f"{len(examples)} ranked examples -> {args.output}: {expr}")
    return 0


def cmd_bench(args) -> int:
    d = _domain(args)
    corpus = load_corpus(args.corpus, d.spec)
    strategies = []
    for name in args.strategies.split(","):
        s = strategy_by_name(name)
        flex = FlexConfig(s.flex.mode, s.flex.max_penalty, args.beam)
        strategies.append(type(s)(s.label, flex, s.repair))
    reports = run_benchmark(corpus, d.table, d.spec, strategies, d.artifacts(_gp_params(args)))
    quality, timing = emit_report(reports, args.out_dir)
    for r in reports:
        counts = " ".join(f"{b}={c}" for b, c in r.counts.items())
        print(f"{r.label:<28} mean {r.mean_time * 1000:8.2f} ms  {counts}")
    print(f"wrote {quality} and {timing}")
    return 0


def cmd_gen_corpus(args) -> int:
    out = Path(args.output)
    if args.synthetic:
        g, spec = synthetic_domain(SyntheticSpec(seed=args.seed))
        stem = out.with_suffix("")
        Path(f"{stem}.grammar").write_text(dump_grammar(g), encoding="utf-8")
        Path(f"{stem}.spec").write_text(dump_spec(spec), encoding="utf-8")
    else:
        d = _domain(args, artifacts=False)
        g, spec = d.grammar, d.spec
    entries = generate_corpus(g, spec, args.n, args.seed, args.p_delete, args.p_insert, args.p_foreign)
    out.write_text(dump_corpus(entries), encoding="utf-8")
    print(f"{len(entries)} sentences -> {out}")
    return 0


COMMANDS = {
    "compile": cmd_compile,
    "parse": cmd_parse,
    "train-stats": cmd_train_stats,
    "train-fitness": cmd_train_fitness,
    "bench": cmd_bench,
    "gen-corpus": cmd_gen_corpus,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = _apply_config(parser, argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line interface.

Subcommands cover the full pipeline: validating a triple store, training
graph embeddings, converting questions to premise-hypothesis-label data,
training and evaluating the classifier, the candidate-set ablation, the
cross-domain transfer experiment, answering a single question, and
generating the synthetic fixture corpus.

Exit codes: 0 success, 2 configuration or usage error, 3 malformed or
unusable data, 4 model/checkpoint error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from typing import Optional

from .config import RunConfig, load_config
from .embeddings import (load_embeddings, load_word_vectors, read_anchor_file,
                         save_embeddings, train_transe)
from .errors import ConfigError, DataError, ModelError, PathNLIError
from .evaluation import (EvalReport, ablation_sweep, classification_accuracy,
                         domain_adapt, evaluate_split, format_report_table,
                         qa_accuracy, write_report_csv)
from .kg import (KnowledgeGraph, Path, distances_from, enumerate_paths,
                 load_triples_file)
from .linker import extract_entities
from .model.network import predict
from .model.params import load_checkpoint, save_checkpoint
from .model.training import train_model
from .phl import (PHLInstance, generate_phl, read_phl, read_qa_file,
                  render_text, verbalize_path, write_phl, build_hypothesis)
from .synth import (SynthConfig, build_synthetic_kg, synth_questions,
                    write_kg_file, write_qa_file)
from .templates import TemplateTable, load_templates


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("run configuration")
    group.add_argument("--config", metavar="FILE",
                       help="key=value config file; flags below override it")
    for f in dataclasses.fields(RunConfig):
        if f.type in ("str", str):
            kind, metavar, default = str, "FILE", "unset"
        else:
            kind = int if f.type in ("int", int) else float
            metavar, default = "V", f.default
        group.add_argument("--" + f.name.replace("_", "-"), type=kind,
                           dest=f.name, default=None, metavar=metavar,
                           help=f"(default {default})")


def _config(args: argparse.Namespace) -> RunConfig:
    overrides = {f.name: getattr(args, f.name, None)
                 for f in dataclasses.fields(RunConfig)}
    return load_config(getattr(args, "config", None), overrides)


def _require(value: str, key: str) -> str:
    if not value:
        raise ConfigError(
            f"missing input: give --{key} or set {key}= in the config")
    return value


def _open_input(path: str, what: str):
    try:
        return open(path, encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot read {what} {path}: {e}") from e


def _open_output(path: str, what: str):
    try:
        return open(path, "w", encoding="utf-8")
    except OSError as e:
        raise DataError(f"cannot write {what} {path}: {e}") from e


def _load_kg(path: str) -> KnowledgeGraph:
    kg = load_triples_file(path)
    kg.validate()
    return kg


def _load_templates(kg: KnowledgeGraph,
                    path: Optional[str]) -> TemplateTable:
    if path is None:
        return TemplateTable()
    with _open_input(path, "templates") as f:
        return load_templates(f, kg)


def _load_table(path: str, kg: KnowledgeGraph, word_vectors: Optional[str],
                seed: int):
    with _open_input(path, "embeddings") as f:
        table = load_embeddings(f, kg)
    if word_vectors:
        with _open_input(word_vectors, "word vectors") as f:
            table.word_vecs.update(load_word_vectors(f))
    table.oov_seed = seed
    return table


def cmd_build_kg(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    print(kg.stats_line())
    return 0


def cmd_train_embeddings(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    table, losses = train_transe(kg, cfg.dim, epochs=cfg.embed_epochs,
                                 lr=cfg.embed_lr, margin=cfg.margin,
                                 norm=cfg.norm, batch=cfg.batch,
                                 seed=cfg.seed)
    with _open_output(args.out, "embeddings") as f:
        save_embeddings(table, kg, f)
    print(f"trained {cfg.dim}-dim embeddings for {kg.n_entities} entities, "
          f"{kg.n_relations} relations over {cfg.embed_epochs} epochs")
    print(f"mean ranking loss: first={losses[0]:.4f} last={losses[-1]:.4f}")
    return 0


def cmd_gen_phl(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    templates = _load_templates(kg, cfg.templates or None)
    with _open_input(_require(cfg.qa, "qa"), "questions") as f:
        examples = read_qa_file(f)
    instances, stats = generate_phl(
        kg, templates, examples, n_candidates=cfg.n_candidates, hop=cfg.hop,
        max_len=cfg.max_len, max_paths=cfg.outer_cap,
        inner_cap=cfg.inner_cap, seed=cfg.seed,
        threshold=cfg.link_threshold)
    with _open_output(args.out, "instances") as f:
        write_phl(instances, f)
    print(f"questions: {stats.n_questions} read, {stats.n_kept} kept, "
          f"{stats.dropped_total()} dropped "
          f"(unanswerable={stats.dropped_unanswerable} "
          f"unlinkable={stats.dropped_unlinkable} "
          f"unsupported={stats.dropped_unsupported} "
          f"no_paths={stats.dropped_no_paths} "
          f"gold_overflow={stats.dropped_gold_overflow})")
    print(f"instances: {stats.n_instances} "
          f"(entail={stats.n_entail} contradict={stats.n_contradict})")
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    table = _load_table(_require(cfg.embeddings, "embeddings"), kg,
                        args.word_vectors, cfg.seed)
    with _open_input(args.phl, "instances") as f:
        instances = read_phl(f)
    init = None
    if args.init_model:
        init, _ = load_checkpoint(args.init_model)

    def hook(params, tbl, epoch, loss):
        print(f"epoch {epoch + 1}/{cfg.epochs} loss={loss:.4f}")
        return None

    result = train_model(instances, table, d_h=cfg.hidden, epochs=cfg.epochs,
                         lr=cfg.lr, batch=cfg.batch, dropout=cfg.dropout,
                         seed=cfg.seed, params=init,
                         fine_tune_embeddings=args.fine_tune_embeddings,
                         average_tail=cfg.average_tail,
                         epoch_hook=hook if not args.quiet else None)
    meta = {"dim": cfg.dim, "hidden": cfg.hidden, "seed": cfg.seed,
            "epochs": cfg.epochs, "instances": len(instances)}
    save_checkpoint(args.out, result.params, meta)
    if args.out_embeddings:
        with _open_output(args.out_embeddings, "embeddings") as f:
            save_embeddings(result.table, kg, f)
    last = result.history[-1]
    print(f"final epoch loss={last['loss']:.4f} "
          f"train_acc={last['train_acc']:.4f}")
    print(f"saved model to {args.out}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    table = _load_table(_require(cfg.embeddings, "embeddings"), kg,
                        args.word_vectors, cfg.seed)
    params, _ = load_checkpoint(args.model)
    with _open_input(args.phl, "instances") as f:
        instances = read_phl(f)
    report = evaluate_split(params, table, instances, args.split,
                            cfg.n_candidates, threshold=cfg.threshold,
                            qa_mode=args.qa_mode)
    print(format_report_table([report]))
    if args.report:
        with _open_output(args.report, "report") as f:
            write_report_csv([report], f)
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    templates = _load_templates(kg, cfg.templates or None)
    table = _load_table(_require(cfg.embeddings, "embeddings"), kg,
                        args.word_vectors, cfg.seed)
    with _open_input(args.qa_train, "questions") as f:
        train_examples = read_qa_file(f)
    with _open_input(args.qa_eval, "questions") as f:
        eval_examples = read_qa_file(f)
    try:
        sizes = sorted({int(s) for s in args.sizes.split(",") if s.strip()})
    except ValueError:
        raise ConfigError(f"--sizes must be comma-separated integers, "
                          f"got {args.sizes!r}") from None
    if not sizes or min(sizes) < 2:
        raise ConfigError("--sizes needs integers >= 2")

    def make_split(n):
        train_insts, _ = generate_phl(
            kg, templates, train_examples, n_candidates=n, hop=cfg.hop,
            max_len=cfg.max_len, max_paths=cfg.outer_cap,
            inner_cap=cfg.inner_cap, seed=cfg.seed,
            threshold=cfg.link_threshold)
        eval_insts, _ = generate_phl(
            kg, templates, eval_examples, n_candidates=n, hop=cfg.hop,
            max_len=cfg.max_len, max_paths=cfg.outer_cap,
            inner_cap=cfg.inner_cap, seed=cfg.seed + 1,
            threshold=cfg.link_threshold)
        return train_insts, eval_insts

    reports = ablation_sweep(make_split, table, sizes=sizes, d_h=cfg.hidden,
                             epochs=cfg.epochs, lr=cfg.lr, batch=cfg.batch,
                             dropout=cfg.dropout, seed=cfg.seed,
                             threshold=cfg.threshold,
                             retrain=not args.reuse_model)
    print(format_report_table(reports))
    if args.report:
        with _open_output(args.report, "report") as f:
            write_report_csv(reports, f)
    return 0


def cmd_adapt(args: argparse.Namespace) -> int:
    cfg = _config(args)
    src_kg = _load_kg(args.src_triples)
    tgt_kg = _load_kg(args.tgt_triples)
    src_table = _load_table(args.src_embeddings, src_kg, args.word_vectors,
                            cfg.seed)
    tgt_table = _load_table(args.tgt_embeddings, tgt_kg, args.word_vectors,
                            cfg.seed)
    src_params, _ = load_checkpoint(args.src_model)
    with _open_input(_require(cfg.anchors, "anchors"), "anchors") as f:
        anchors = read_anchor_file(f, src_kg, tgt_kg)
    templates = _load_templates(tgt_kg, cfg.templates or None)
    with _open_input(args.tgt_qa_train, "questions") as f:
        train_examples = read_qa_file(f)
    with _open_input(args.tgt_qa_eval, "questions") as f:
        eval_examples = read_qa_file(f)
    tgt_train, _ = generate_phl(
        tgt_kg, templates, train_examples, n_candidates=cfg.n_candidates,
        hop=cfg.hop, max_len=cfg.max_len, max_paths=cfg.outer_cap,
        inner_cap=cfg.inner_cap, seed=cfg.seed, threshold=cfg.link_threshold)
    tgt_eval, _ = generate_phl(
        tgt_kg, templates, eval_examples, n_candidates=cfg.n_candidates,
        hop=cfg.hop, max_len=cfg.max_len, max_paths=cfg.outer_cap,
        inner_cap=cfg.inner_cap, seed=cfg.seed + 1,
        threshold=cfg.link_threshold)
    result = domain_adapt(src_params, src_table, tgt_table, anchors,
                          tgt_train, tgt_eval, epochs=cfg.epochs, lr=cfg.lr,
                          batch=cfg.batch, dropout=cfg.dropout,
                          seed=cfg.seed, threshold=cfg.threshold,
                          ridge=cfg.ridge)
    print(f"anchor map rmse: {result.map_rmse:.6f}")
    print(f"warm start: final_acc={result.warm_final:.4f} "
          f"plateau_epoch={result.warm_plateau}")
    print(f"cold start: final_acc={result.cold_final:.4f} "
          f"plateau_epoch={result.cold_plateau}")
    if args.report:
        rows = []
        for name, res in (("warm", result.warm), ("cold", result.cold)):
            qa, groups = qa_accuracy(res.params, res.table, tgt_eval,
                                     cfg.threshold)
            cls = classification_accuracy(res.params, res.table, tgt_eval,
                                          cfg.threshold)
            rows.append(EvalReport(name, cfg.n_candidates, cls, qa,
                                   len(groups), len(tgt_eval)))
        with _open_output(args.report, "report") as f:
            write_report_csv(rows, f)
    return 0


def cmd_answer(args: argparse.Namespace) -> int:
    cfg = _config(args)
    kg = _load_kg(_require(cfg.kg, "kg"))
    table = _load_table(_require(cfg.embeddings, "embeddings"), kg,
                        args.word_vectors, cfg.seed)
    params, _ = load_checkpoint(args.model)
    templates = _load_templates(kg, cfg.templates or None)
    mentions = extract_entities(kg, args.question, cfg.link_threshold)
    if not mentions:
        raise DataError(f"no entities linked in question: {args.question!r}")
    query = sorted({m.entity for m in mentions})
    dist = distances_from(kg, query, limit=cfg.hop)
    pool = sorted((d, e) for e, d in dist.items()
                  if e not in query)[:cfg.answer_pool]
    answers = []
    for _, cand in pool:
        pooled: list[Path] = []
        for q in query:
            if q != cand:
                pooled.extend(enumerate_paths(kg, cand, q, cfg.max_len,
                                              cfg.outer_cap))
        pooled.sort(key=Path.sort_key)
        pooled = pooled[:cfg.outer_cap]
        if not pooled:
            continue
        premise = tuple(
            tuple(verbalize_path(kg, templates, p, cfg.inner_cap)[0])
            for p in pooled)
        hypothesis = tuple(
            build_hypothesis(kg, args.question, cand,
                             cfg.link_threshold)[:cfg.inner_cap])
        inst = PHLInstance("live", cand, premise, hypothesis, 1)
        p_entail = float(predict(params, table, inst)[0])
        if p_entail >= cfg.threshold:
            answers.append((kg.entities[cand], p_entail, inst))
    answers.sort(key=lambda a: a[0])
    for name, p_entail, inst in answers:
        if args.explain:
            print(f"{name}\t{p_entail:.4f}")
            print(f"  {render_text(kg, inst.premise[0])}")
        else:
            print(name)
    if not answers:
        print("no answer")
    return 0


def cmd_gen_synthetic(args: argparse.Namespace) -> int:
    cfg = _config(args)
    synth_cfg = SynthConfig(seed=cfg.seed)
    kg = build_synthetic_kg(synth_cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    kg_path = os.path.join(args.out_dir, "kg.txt")
    with _open_output(kg_path, "triples") as f:
        write_kg_file(kg, f)
    print(kg.stats_line())
    try:
        hops = [int(h) for h in args.hops.split(",") if h.strip()]
    except ValueError:
        raise ConfigError(f"--hops must be comma-separated integers, "
                          f"got {args.hops!r}") from None
    for hop in hops:
        questions = synth_questions(kg, hop, args.questions_per_hop,
                                    seed=cfg.seed + hop,
                                    max_gold=cfg.n_candidates - 1)
        path = os.path.join(args.out_dir, f"qa_{hop}hop.txt")
        with _open_output(path, "questions") as f:
            write_qa_file(questions, f)
        print(f"{hop}-hop: {len(questions)} questions -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathnli",
        description="Answer multi-hop questions over a knowledge graph by "
                    "classifying entailment between verbalized graph paths "
                    "and the answered question.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-kg", help="validate a triple file and print "
                                        "its summary line")
    _add_config_flags(p)
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("train-embeddings",
                       help="train translation embeddings on a triple file")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train_embeddings)

    p = sub.add_parser("gen-phl", help="convert questions to "
                                       "premise-hypothesis-label instances")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_gen_phl)

    p = sub.add_parser("train", help="train the entailment classifier")
    p.add_argument("--phl", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--word-vectors")
    p.add_argument("--init-model", help="warm-start checkpoint")
    p.add_argument("--fine-tune-embeddings", action="store_true")
    p.add_argument("--out-embeddings",
                   help="where to save fine-tuned embeddings")
    p.add_argument("--quiet", action="store_true")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a model on PHL instances")
    p.add_argument("--model", required=True)
    p.add_argument("--phl", required=True)
    p.add_argument("--split", default="eval")
    p.add_argument("--qa-mode", choices=("set", "hit1"), default="set")
    p.add_argument("--word-vectors")
    p.add_argument("--report", help="also write a CSV report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="sweep the candidate-set size")
    p.add_argument("--qa-train", required=True)
    p.add_argument("--qa-eval", required=True)
    p.add_argument("--sizes", default="4,8,16,24")
    p.add_argument("--reuse-model", action="store_true",
                   help="train once at the smallest size instead of per size")
    p.add_argument("--word-vectors")
    p.add_argument("--report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("adapt", help="fine-tune a model on a new domain "
                                     "through an anchor alignment")
    p.add_argument("--src-triples", required=True)
    p.add_argument("--src-embeddings", required=True)
    p.add_argument("--src-model", required=True)
    p.add_argument("--tgt-triples", required=True)
    p.add_argument("--tgt-embeddings", required=True)
    p.add_argument("--tgt-qa-train", required=True)
    p.add_argument("--tgt-qa-eval", required=True)
    p.add_argument("--word-vectors")
    p.add_argument("--report")
    _add_config_flags(p)
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("answer", help="answer one natural-language question")
    p.add_argument("--model", required=True)
    p.add_argument("--question", required=True)
    p.add_argument("--word-vectors")
    p.add_argument("--explain", action="store_true",
                   help="print one supporting path per answer")
    _add_config_flags(p)
    p.set_defaults(func=cmd_answer)

    p = sub.add_parser("fixtures", help="fixture corpora")
    fsub = p.add_subparsers(dest="fixture_command", required=True)
    g = fsub.add_parser("gen-synthetic",
                        help="write the synthetic movie corpus")
    g.add_argument("--out-dir", required=True)
    g.add_argument("--hops", default="1,2,3")
    g.add_argument("--questions-per-hop", type=int, default=200)
    _add_config_flags(g)
    g.set_defaults(func=cmd_gen_synthetic)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


def entry(argv=None) -> int:
    try:
        return main(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except DataError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except PathNLIError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(entry())

"""Command-line entry point: ``protozs <subcommand> ...``.

Machine-readable results go to files; logs go to standard error. Exit status
is 0 on success, 1 for configuration errors, 2 for data errors and 3 for
numerical failures.
"""

import argparse
import json
import logging
import os
import sys

from . import __version__
from .config import ENV_VAR, RunConfig, load_config
from .errors import ConfigError, DataError, ProtoZSError

logger = logging.getLogger("protozs")

_D = RunConfig()

# flag -> (RunConfig field, type, help)
_HYPER = {
    "--tau": ("tau", float, f"cosine threshold for virtual-label candidates (default {_D.tau})"),
    "--hops": ("hops", int, f"knowledge-graph hops K (default {_D.hops})"),
    "--top-n": ("top_n", int, f"words per virtual label n (default {_D.top_n})"),
    "--window": ("window", int, f"convolution window, odd (default {_D.window})"),
    "--hidden": ("hidden", int, f"encoder channels (default {_D.hidden})"),
    "--max-len": ("max_len", int, f"sentence truncation length (default {_D.max_len})"),
    "--batch": ("batch", int, f"query batch size (default {_D.batch})"),
    "--lr": ("lr", float, f"SGD learning rate (default {_D.lr})"),
    "--epochs": ("epochs", int, f"training epochs (default {_D.epochs})"),
    "--support": ("support", int, f"support instances per relation per batch (default {_D.support})"),
    "--seed": ("seed", int, f"random seed (default {_D.seed})"),
    "--m": ("m", int, f"number of unseen relations (default {_D.m})"),
    "--count": ("count", int, "augmented sentences per unseen relation (default: mean seen count)"),
    "--eps": ("eps", float, f"3CosMul denominator offset (default {_D.eps})"),
}


def _add(p, *flags):
    for flag in flags:
        field, typ, help_ = _HYPER[flag]
        p.add_argument(flag, dest=field, type=typ, default=None, help=help_)


def _paths(p, *names, required=()):
    helps = {
        "vectors": "word vector text file (word v1 ... vd per line)",
        "graph": "knowledge-graph edge CSV (source,relation_type,target)",
        "corpus": "corpus JSONL",
        "catalog": "relation catalog JSON",
    }
    for name in names:
        p.add_argument(f"--{name}", default=None, required=name in required, help=helps[name])


def _no_prompts(p):
    p.add_argument("--no-prompts", dest="prompts", action="store_const", const=False, default=None,
                   help="zero the prompt blocks (ablation)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="protozs", description="Zero-shot relation classification pipeline.",
        epilog=f"A JSON config file (--config or ${ENV_VAR}) supplies defaults; flags override it.")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS,
                        help=f"JSON config file (default ${ENV_VAR})")
    common.add_argument("--log-level", default=argparse.SUPPRESS, help="logging level (default INFO)")
    parser.add_argument("--config", default=None, help=f"JSON config file (default ${ENV_VAR})")
    parser.add_argument("--log-level", default="INFO", help="logging level (default INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_):
        return sub.add_parser(name, help=help_, parents=[common])

    p = add("synth", "write the synthetic benchmark")
    p.add_argument("--relations", type=int, default=10, help="number of relations (>= 4, default 10)")
    p.add_argument("--instances-per", type=int, default=50, help="sentences per relation (default 50)")
    p.add_argument("--dim", type=int, default=48, help="embedding dimension (default 48)")
    p.add_argument("--seed", type=int, default=7, help="random seed (default 7)")
    p.add_argument("--out", required=True, help="output directory")

    p = add("split", "zero-shot train/test split")
    _paths(p, "corpus", "catalog")
    _add(p, "--m", "--seed")
    p.add_argument("--test-fraction", type=float, default=0.2,
                   help="held-out share of each seen relation (default 0.2)")
    p.add_argument("--out", required=True, help="output directory for train/test JSONL and split.json")

    p = add("augment", "generate sentences for unseen relations")
    _paths(p, "corpus", "catalog", "vectors")
    p.add_argument("--unseen", required=True,
                   help="comma-separated relation names, or a split.json written by 'split'")
    _add(p, "--count", "--seed", "--eps")
    p.add_argument("--out", required=True, help="output JSONL")

    p = add("virtual-labels", "build virtual label embeddings")
    _paths(p, "graph", "catalog", "vectors")
    _add(p, "--tau", "--hops", "--top-n")
    p.add_argument("--out", required=True, help="output JSON: relation -> {vector, components}")

    p = add("train", "train the encoder and store prototypes")
    _paths(p, "corpus", "catalog", "vectors")
    p.add_argument("--augmented", default=None, help="augmented JSONL for unseen relations")
    p.add_argument("--labels", required=True, help="virtual labels JSON from 'virtual-labels'")
    _add(p, "--window", "--hidden", "--max-len", "--batch", "--lr", "--epochs", "--support", "--seed")
    _no_prompts(p)
    p.add_argument("--select-lr", action="store_true",
                   help="pick the learning rate from {1e-1, 1e-2, 1e-3, 1e-4} by final loss")
    p.add_argument("--checkpoint-out", required=True, help="checkpoint JSON to write")

    p = add("predict", "classify sentences with a checkpoint")
    _paths(p, "corpus", "vectors")
    p.add_argument("--checkpoint", required=True, help="checkpoint JSON from 'train'")
    _no_prompts(p)
    p.add_argument("--out", required=True, help="predictions JSONL")

    p = add("eval", "score predictions (macro P/R/F1)")
    p.add_argument("--predictions", required=True, help="predictions JSONL from 'predict'")
    p.add_argument("--unseen", default=None, help="comma-separated names or split.json")
    p.add_argument("--out", required=True, help="metrics CSV")

    p = add("sweep", "grid over tau, n, lr and m with full pipeline runs")
    _paths(p, "corpus", "catalog", "vectors", "graph")
    _add(p, "--hops", "--window", "--hidden", "--max-len", "--batch", "--epochs", "--support",
         "--seed", "--count", "--eps")
    p.add_argument("--taus", default=None, help="comma list, or 'full' for 0.0..1.0 step 0.1")
    p.add_argument("--ns", default=None, help="comma list of virtual-label sizes")
    p.add_argument("--lrs", default=None, help="comma list, or 'grid' for 1e-1..1e-4")
    p.add_argument("--ms", default=None, help="comma list of unseen relation counts")
    _no_prompts(p)
    p.add_argument("--out", required=True, help="sweep CSV")
    return parser


def _config(args):
    overrides = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    return load_config(args.config, overrides)


def _need(cfg, *names):
    for name in names:
        path = getattr(cfg, name)
        if not path:
            raise ConfigError(f"--{name} is required")
        if not os.path.exists(path):
            raise ConfigError(f"{name} file not found: {path}")


def _parse_unseen(value):
    if value is None:
        return None
    if os.path.exists(value):
        try:
            with open(value, encoding="utf-8") as fh:
                return list(json.load(fh)["unseen"])
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"cannot read unseen relations from {value}: {exc}") from exc
    return [v.strip() for v in value.split(",") if v.strip()]


def _floats(value, special=None):
    if value is None:
        return None
    if special and value in special:
        return special[value]
    try:
        return tuple(float(v) for v in value.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad number list {value!r}") from exc


def _ints(value):
    if value is None:
        return None
    try:
        return tuple(int(v) for v in value.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad integer list {value!r}") from exc


def cmd_synth(args):
    from .synth import SynthConfig, synth
    if args.relations < 4:
        raise ConfigError("--relations must be >= 4")
    paths = synth(args.out, SynthConfig(relations=args.relations, instances_per=args.instances_per,
                                        seed=args.seed, dim=args.dim))
    for kind, path in sorted(paths.items()):
        logger.info("wrote %s: %s", kind, path)


def cmd_split(args):
    from .corpus import read_catalog, read_corpus, write_corpus
    from .evaluation import make_split
    cfg = _config(args)
    _need(cfg, "corpus", "catalog")
    split = make_split(read_corpus(cfg.corpus), read_catalog(cfg.catalog), cfg.m, cfg.seed,
                       test_fraction=args.test_fraction)
    os.makedirs(args.out, exist_ok=True)
    write_corpus(os.path.join(args.out, "train.jsonl"), split.train)
    write_corpus(os.path.join(args.out, "test.jsonl"), split.test)
    with open(os.path.join(args.out, "split.json"), "w", encoding="utf-8") as fh:
        json.dump(split.to_record(), fh, indent=1, sort_keys=True)
        fh.write("\n")
    logger.info("split: %d train, %d test, unseen %s", len(split.train), len(split.test),
                ",".join(split.unseen))


def cmd_augment(args):
    from .augment import build_augmented_set
    from .corpus import read_catalog, read_corpus, write_corpus
    from .embeddings import load_vectors
    from .evaluation import augmentation_count
    cfg = _config(args)
    _need(cfg, "corpus", "catalog", "vectors")
    corpus = read_corpus(cfg.corpus)
    unseen = _parse_unseen(args.unseen)
    seen = [s for s in corpus if s.relation not in set(unseen)]
    count = cfg.count or augmentation_count(seen)
    out, stats = build_augmented_set(corpus, read_catalog(cfg.catalog), unseen, count, cfg.seed,
                                     load_vectors(cfg.vectors), eps=cfg.eps)
    write_corpus(args.out, out)
    logger.info("augment: %d sentences, %d words translated, %d out of vocabulary",
                len(out), stats.translated, stats.out_of_vocabulary)
    if stats.uncoverable:
        raise DataError(f"uncoverable unseen relations (no super-class match): {stats.uncoverable}")


def cmd_virtual_labels(args):
    from .corpus import read_catalog
    from .embeddings import load_vectors
    from .kglabel import load_graph, virtual_labels
    cfg = _config(args)
    _need(cfg, "graph", "catalog", "vectors")
    labels = virtual_labels(read_catalog(cfg.catalog), load_vectors(cfg.vectors),
                            load_graph(cfg.graph), tau=cfg.tau, K=cfg.hops, n=cfg.top_n)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump({r: v.to_record() for r, v in sorted(labels.items())}, fh, sort_keys=True)
        fh.write("\n")
    logger.info("virtual labels for %d relations", len(labels))


def read_labels(path):
    from .kglabel import VirtualLabel
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, ValueError) as exc:
        raise DataError(f"cannot read virtual labels {path}: {exc}") from exc
    return {r: VirtualLabel.from_record(r, rec) for r, rec in doc.items()}


def cmd_train(args):
    from .corpus import read_catalog, read_corpus
    from .embeddings import load_vectors
    from .encoder import init_params, save_checkpoint
    from .proto import relation_prototypes, select_learning_rate, train
    cfg = _config(args)
    _need(cfg, "corpus", "catalog", "vectors")
    if args.augmented and not os.path.exists(args.augmented):
        raise ConfigError(f"augmented file not found: {args.augmented}")
    store = load_vectors(cfg.vectors)
    catalog = read_catalog(cfg.catalog)
    vlabels = read_labels(args.labels)
    seen = read_corpus(cfg.corpus)
    augmented = read_corpus(args.augmented) if args.augmented else []
    params = init_params(store.dim, cfg.hidden, cfg.window, cfg.seed, cfg.max_len)
    tcfg = cfg.train_config()
    if args.select_lr:
        tcfg.learning_rate = select_learning_rate(seen + augmented, vlabels, params, store, tcfg, catalog)
        cfg.lr = tcfg.learning_rate
        logger.info("selected learning rate %g", tcfg.learning_rate)
    params = train(seen + augmented, vlabels, params, store, tcfg, catalog)
    protos = relation_prototypes(seen, vlabels, params, store, catalog, cfg.prompts)
    if augmented:
        protos += relation_prototypes(augmented, vlabels, params, store, catalog, cfg.prompts)
    save_checkpoint(args.checkpoint_out, params, cfg.to_dict(), protos)
    logger.info("final loss %.5f; %d prototypes", params.history[-1] if params.history else float("nan"),
                len(protos))


def cmd_predict(args):
    from .corpus import read_corpus
    from .embeddings import load_vectors
    from .encoder import load_checkpoint
    from .proto import Prototype, predict
    cfg = _config(args)
    _need(cfg, "corpus", "vectors")
    params, ck_cfg, proto_recs = load_checkpoint(args.checkpoint)
    protos = [Prototype.from_record(r) for r in proto_recs]
    sentences = read_corpus(cfg.corpus)
    use_prompts = ck_cfg.get("prompts", True) if args.prompts is None else args.prompts
    preds = predict(sentences, protos, params, load_vectors(cfg.vectors), use_prompts)
    with open(args.out, "w", encoding="utf-8") as fh:
        for s, (pred, probs) in zip(sentences, preds):
            rec = {"id": s.id, "gold": s.relation, "pred": pred,
                   "probs": {r: round(p, 8) for r, p in probs.items()}}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    logger.info("predicted %d sentences", len(preds))


def cmd_eval(args):
    from .evaluation import metrics
    gold, pred = [], []
    try:
        with open(args.predictions, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    rec = json.loads(line)
                    gold.append(rec["gold"])
                    pred.append(rec["pred"])
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read predictions {args.predictions}: {exc}") from exc
    unseen = _parse_unseen(args.unseen)
    report = metrics(pred, gold, unseen=unseen)
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(report.to_csv(unseen or ()))
    msg = "macro P %.4f R %.4f F1 %.4f" % report.macro
    if report.subset_macro is not None:
        msg += "; unseen F1 %.4f" % report.subset_macro[2]
    logger.info(msg)


def cmd_sweep(args):
    from .corpus import read_catalog, read_corpus
    from .embeddings import load_vectors
    from .evaluation import LR_GRID, TAU_GRID, sweep, sweep_csv
    from .kglabel import load_graph
    cfg = _config(args)
    _need(cfg, "corpus", "catalog", "vectors", "graph")
    rows = sweep(read_corpus(cfg.corpus), read_catalog(cfg.catalog), load_vectors(cfg.vectors),
                 load_graph(cfg.graph), cfg,
                 taus=_floats(args.taus, {"full": TAU_GRID}), ns=_ints(args.ns),
                 lrs=_floats(args.lrs, {"grid": LR_GRID}), ms=_ints(args.ms))
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(sweep_csv(rows))
    logger.info("sweep: %d grid points", len(rows))


COMMANDS = {
    "synth": cmd_synth, "split": cmd_split, "augment": cmd_augment,
    "virtual-labels": cmd_virtual_labels, "train": cmd_train, "predict": cmd_predict,
    "eval": cmd_eval, "sweep": cmd_sweep,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except ProtoZSError as exc:
        logger.error("%s", exc)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())

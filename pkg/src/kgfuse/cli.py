"""Command-line entry point.

Subcommands: stats, make-synthetic, train-structural, train-joint,
train-all, eval, gradcheck.  Flags mirror the reproduction recipe
(--dim 50, --margin 1, --batch 256, --lr 0.0005).  Exit codes: 0 success,
1 usage error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import json
import logging
import os
import subprocess
import sys
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from . import __version__
from .checkpoint import checkpoint_kind, load_joint, load_structural, \
    save_joint, save_structural
from .data import build_vocab, dataset_stats, load_triples, make_clustered, \
    make_synthetic, write_triple_file
from .errors import DataError, NumericError
from .evaluation import KnownTriples, evaluate, joint_scorer, structural_scorer
from .joint import JointModel, train_joint
from .literals import load_literal_file, store_from_arrays, write_literal_file
from .numeric import SgdConfig
from .structural import StructuralModel, train_structural
from .verify import gru_gradcheck, joint_gradcheck, structural_gradcheck

logger = logging.getLogger(__name__)


def _version_string():
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"],
                             capture_output=True, text=True, timeout=5,
                             cwd=Path(__file__).parent)
        if out.returncode == 0:
            return f"kgfuse {__version__} ({out.stdout.strip()})"
    except OSError:
        pass
    return f"kgfuse {__version__}"


def write_manifest(artifact_path, command, params):
    """Sidecar JSON capturing everything needed to re-run a command."""
    manifest = {"command": command, "params": params,
                "version": _version_string()}
    path = Path(str(artifact_path) + ".manifest.json")
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _sgd_config(lr, batch, margin, dim, epochs, seed, norm_order):
    return SgdConfig(learning_rate=lr, batch_size=batch, margin=margin,
                     dim=dim, epochs=epochs, seed=seed, norm_order=norm_order)


def _load_dataset(train, valid, test):
    files = [p for p in (train, valid, test) if p]
    vocab = build_vocab(files)
    splits = {}
    for role, path in (("train", train), ("valid", valid), ("test", test)):
        if path:
            splits[role] = load_triples(path, vocab, role)
    return vocab, splits


train_opts = [
    click.option("--lr", default=0.0005, show_default=True, help="learning rate"),
    click.option("--batch", default=256, show_default=True, help="mini-batch size"),
    click.option("--margin", default=1.0, show_default=True, help="ranking margin"),
    click.option("--dim", default=50, show_default=True, help="embedding dimension"),
    click.option("--epochs", default=1000, show_default=True),
    click.option("--seed", default=0, show_default=True),
    click.option("--norm-order", default=2, type=int, show_default=True),
]


def add_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group()
def cli():
    """Knowledge-graph embeddings with gated structural/literal fusion."""
    level = os.environ.get("KGFUSE_LOG_LEVEL", "INFO").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")


@cli.command()
@click.option("--train", required=True, type=click.Path(exists=True))
@click.option("--valid", required=True, type=click.Path(exists=True))
@click.option("--test", required=True, type=click.Path(exists=True))
def stats(train, valid, test):
    """Print dataset statistics as a single-line JSON object."""
    vocab, splits = _load_dataset(train, valid, test)
    s = dataset_stats(vocab, splits["train"], splits["valid"], splits["test"])
    click.echo(json.dumps(s.to_dict(), separators=(",", ":")))


@cli.command("make-synthetic")
@click.option("--out", required=True, type=click.Path())
@click.option("--entities", default=200, show_default=True)
@click.option("--relations", default=2, show_default=True)
@click.option("--grid-dim", default=2, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--mode", default="lattice", show_default=True,
              type=click.Choice(["lattice", "clustered"]))
@click.option("--clusters", default=10, show_default=True,
              help="cluster count (clustered mode)")
@click.option("--train-fraction", default=0.1, show_default=True,
              help="train share of all triples (clustered mode)")
def cmd_make_synthetic(out, entities, relations, grid_dim, seed, mode,
                       clusters, train_fraction):
    """Generate a synthetic KG (planted lattice or literal-clustered)."""
    outdir = Path(out)
    outdir.mkdir(parents=True, exist_ok=True)
    if mode == "lattice":
        vocab, splits, planted = make_synthetic(entities, relations, grid_dim, seed)
        (outdir / "planted_offsets.json").write_text(
            json.dumps({str(k): list(v) for k, v in planted.items()}) + "\n")
    else:
        vocab, splits, literals = make_clustered(entities, clusters, seed,
                                                 train_fraction)
        store = store_from_arrays(literals,
                                  np.zeros((vocab.n_relations, literals.shape[1]),
                                           dtype=np.float32))
        write_literal_file(outdir / "literals.leb", store, vocab)
    for role, ts in splits.items():
        write_triple_file(outdir / f"{role}.txt", vocab, ts)
    s = dataset_stats(vocab, splits["train"], splits["valid"], splits["test"])
    click.echo(json.dumps(s.to_dict(), separators=(",", ":")))
    write_manifest(outdir / "dataset", "make-synthetic",
                   {"entities": entities, "relations": relations,
                    "grid_dim": grid_dim, "seed": seed, "mode": mode,
                    "clusters": clusters, "train_fraction": train_fraction})


@cli.command("train-structural")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--valid", "valid_path", type=click.Path(exists=True))
@click.option("--test", "test_path", type=click.Path(exists=True))
@add_options(train_opts)
@click.option("--checkpoint-out", required=True, type=click.Path())
def cmd_train_structural(train_path, valid_path, test_path, lr, batch, margin,
                         dim, epochs, seed, norm_order, checkpoint_out):
    """Train translation-based structural embeddings."""
    config = _sgd_config(lr, batch, margin, dim, epochs, seed, norm_order)
    vocab, splits = _load_dataset(train_path, valid_path, test_path)
    valid = splits.get("valid")
    all_known = KnownTriples(*splits.values()) if valid is not None else None
    model = train_structural(splits["train"], vocab, config,
                             valid=valid, all_known=all_known)
    save_structural(checkpoint_out, model, vocab)
    write_manifest(checkpoint_out, "train-structural",
                   {"train": str(train_path), "valid": valid_path and str(valid_path),
                    "test": test_path and str(test_path), **asdict(config)})
    click.echo(f"saved structural checkpoint to {checkpoint_out}")


@cli.command("train-joint")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--valid", "valid_path", type=click.Path(exists=True))
@click.option("--test", "test_path", type=click.Path(exists=True))
@click.option("--structural-checkpoint", type=click.Path(exists=True),
              help="structural phase output; omit for random structural init")
@click.option("--literals", "literals_path", type=click.Path(exists=True))
@click.option("--allow-zero-literals", is_flag=True,
              help="run without a literal file (all-zero literal vectors)")
@click.option("--joint-dim", type=int, default=None,
              help="working joint dimension; default: native literal dimension")
@click.option("--missing-policy", default="zeros", show_default=True,
              type=click.Choice(["zeros", "mean"]))
@click.option("--freeze-structural", is_flag=True)
@click.option("--freeze-literals", is_flag=True)
@add_options(train_opts)
@click.option("--checkpoint-out", required=True, type=click.Path())
def cmd_train_joint(train_path, valid_path, test_path, structural_checkpoint,
                    literals_path, allow_zero_literals, joint_dim,
                    missing_policy, freeze_structural, freeze_literals,
                    lr, batch, margin, dim, epochs, seed, norm_order,
                    checkpoint_out):
    """Train the three-GRU joint model on top of structural embeddings."""
    if literals_path is None and not allow_zero_literals:
        raise click.UsageError(
            "--literals is required (or pass --allow-zero-literals)")
    config = _sgd_config(lr, batch, margin, dim, epochs, seed, norm_order)
    vocab, splits = _load_dataset(train_path, valid_path, test_path)
    if structural_checkpoint:
        structural, ck_vocab = load_structural(structural_checkpoint)
        if ck_vocab != vocab:
            raise DataError("checkpoint vocabulary does not match the dataset")
    else:
        structural = StructuralModel.initialize(vocab.n_entities,
                                                vocab.n_relations, config)
    if literals_path:
        store = load_literal_file(literals_path, vocab, missing_policy)
    else:
        lit_dim = joint_dim or config.dim
        store = store_from_arrays(
            np.zeros((vocab.n_entities, lit_dim), dtype=np.float32),
            np.zeros((vocab.n_relations, lit_dim), dtype=np.float32))
    model = JointModel.initialize(structural, store, config, joint_dim=joint_dim,
                                  freeze_structural=freeze_structural,
                                  freeze_literals=freeze_literals)
    train_joint(model, splits["train"], config)
    save_joint(checkpoint_out, model, vocab)
    write_manifest(checkpoint_out, "train-joint",
                   {"train": str(train_path),
                    "structural_checkpoint": structural_checkpoint and str(structural_checkpoint),
                    "literals": literals_path and str(literals_path),
                    "joint_dim": joint_dim, "missing_policy": missing_policy,
                    "freeze_structural": freeze_structural,
                    "freeze_literals": freeze_literals, **asdict(config)})
    click.echo(f"saved joint checkpoint to {checkpoint_out}")


@cli.command("train-all")
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--valid", "valid_path", type=click.Path(exists=True))
@click.option("--test", "test_path", type=click.Path(exists=True))
@click.option("--literals", "literals_path", type=click.Path(exists=True))
@click.option("--allow-zero-literals", is_flag=True)
@click.option("--joint-dim", type=int, default=None)
@add_options(train_opts)
@click.option("--structural-out", required=True, type=click.Path())
@click.option("--joint-out", required=True, type=click.Path())
@click.pass_context
def cmd_train_all(ctx, train_path, valid_path, test_path, literals_path,
                  allow_zero_literals, joint_dim, lr, batch, margin, dim,
                  epochs, seed, norm_order, structural_out, joint_out):
    """Chain the structural and joint training phases."""
    ctx.invoke(cmd_train_structural, train_path=train_path,
               valid_path=valid_path, test_path=test_path, lr=lr, batch=batch,
               margin=margin, dim=dim, epochs=epochs, seed=seed,
               norm_order=norm_order, checkpoint_out=structural_out)
    ctx.invoke(cmd_train_joint, train_path=train_path, valid_path=valid_path,
               test_path=test_path, structural_checkpoint=structural_out,
               literals_path=literals_path,
               allow_zero_literals=allow_zero_literals, joint_dim=joint_dim,
               missing_policy="zeros", freeze_structural=False,
               freeze_literals=False, lr=lr, batch=batch, margin=margin,
               dim=dim, epochs=epochs, seed=seed, norm_order=norm_order,
               checkpoint_out=joint_out)


@cli.command("eval")
@click.option("--checkpoint", required=True, type=click.Path(exists=True))
@click.option("--train", "train_path", required=True, type=click.Path(exists=True))
@click.option("--valid", "valid_path", type=click.Path(exists=True))
@click.option("--test", "test_path", required=True, type=click.Path(exists=True))
@click.option("--report", "report_path", required=True, type=click.Path())
@click.option("--per-query", "per_query_path", type=click.Path(),
              help="optional JSONL sidecar with per-query ranks")
@click.option("--threads", default=1, show_default=True,
              help="evaluation worker cap (scoring is vectorized; kept for "
                   "compatibility)")
def cmd_eval(checkpoint, train_path, valid_path, test_path, report_path,
             per_query_path, threads):
    """Evaluate link prediction and write the JSON report."""
    kind = checkpoint_kind(checkpoint)
    if kind == "structural":
        model, vocab = load_structural(checkpoint)
        scorer = structural_scorer(model)
    else:
        model, vocab = load_joint(checkpoint)
        scorer = joint_scorer(model)
    splits = {}
    for role, path in (("train", train_path), ("valid", valid_path),
                       ("test", test_path)):
        if path:
            splits[role] = load_triples(path, vocab, role)
    all_known = KnownTriples(*splits.values())
    report = evaluate(scorer, splits["test"], all_known, vocab.n_entities,
                      per_query_path=per_query_path)
    Path(report_path).write_text(report.to_json() + "\n", encoding="utf-8")
    write_manifest(report_path, "eval",
                   {"checkpoint": str(checkpoint), "train": str(train_path),
                    "valid": valid_path and str(valid_path),
                    "test": str(test_path), "threads": threads})
    click.echo(report.to_json())


@cli.command("gradcheck")
@click.option("--structural", "mode", flag_value="structural")
@click.option("--gru", "mode", flag_value="gru")
@click.option("--joint", "mode", flag_value="joint")
@click.option("--all", "mode", flag_value="all", default=True)
@click.option("--dim", default=3, show_default=True, help="structural dimension k")
@click.option("--joint-dim", default=4, show_default=True)
@click.option("--seed", default=0, show_default=True)
def cmd_gradcheck(mode, dim, joint_dim, seed):
    """Check analytic gradients against central finite differences."""
    checks = {}
    if mode in ("structural", "all"):
        checks["structural"] = structural_gradcheck(k=dim, seed=seed)
    if mode in ("gru", "all"):
        checks["gru"] = gru_gradcheck(k=dim, dim_j=joint_dim, seed=seed)
    if mode in ("joint", "all"):
        checks["joint"] = joint_gradcheck(k=dim, dim_j=joint_dim, seed=seed)
    worst = max(checks.values())
    for name, err in checks.items():
        click.echo(f"{name}: max relative error {err:.3e}")
    if worst >= 1e-4:
        raise NumericError(f"gradient check failed: {worst:.3e} >= 1e-4")
    click.echo("gradient checks passed (threshold 1e-4)")


def main(argv=None):
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except ValueError as exc:
        click.echo(f"invalid parameter: {exc}", err=True)
        return 1
    except DataError as exc:
        click.echo(f"data error: {exc}", err=True)
        return 2
    except NumericError as exc:
        click.echo(f"numeric failure: {exc}", err=True)
        return 3


if __name__ == "__main__":
    sys.exit(main())

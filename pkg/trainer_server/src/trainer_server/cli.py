"""CLI: prepare spans, pretrain a base, fine-tune, serve."""

from __future__ import annotations

import argparse
import logging
import sys

from .server import serve
from .spans import load_grounded, load_spans, prepare_spans, save_spans
from .training import TrainingConfig, pretrain_base, train


def cmd_prepare(args) -> int:
    rows = load_grounded(args.grounded)
    examples = prepare_spans(rows)
    save_spans(examples, args.out)
    print(f"{len(examples)}/{len(rows)} instances span-aligned -> {args.out}")
    return 0


def cmd_pretrain(args) -> int:
    examples = load_spans(args.spans)
    result = pretrain_base(
        examples, args.out, seed=args.seed, epochs=args.epochs, learning_rate=args.lr
    )
    print(result.render_loss_table())
    print(f"base checkpoint -> {result.checkpoint_dir}")
    return 0


def cmd_train(args) -> int:
    examples = load_spans(args.spans)
    val_examples = load_spans(args.val_spans) if args.val_spans else ()
    config = TrainingConfig(
        learning_rate=args.lr,
        train_batch=args.train_batch,
        eval_batch=args.eval_batch,
        seed=args.seed,
        epochs=args.epochs,
        base_model=args.base,
    )
    result = train(config, examples, val_examples, out_dir=args.out)
    print(result.render_loss_table())
    print(f"checkpoint -> {result.checkpoint_dir}")
    return 0


def cmd_serve(args) -> int:
    serve(args.checkpoint, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="trainer-server", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="grounded JSONL -> span examples")
    p.add_argument("--grounded", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_prepare)

    p = sub.add_parser("pretrain", help="build a base checkpoint from scratch")
    p.add_argument("--spans", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=3e-4)
    p.set_defaults(fn=cmd_pretrain)

    p = sub.add_parser("train", help="fine-tune from a base checkpoint")
    p.add_argument("--spans", required=True)
    p.add_argument("--val-spans")
    p.add_argument("--base", default="scratch")
    p.add_argument("--out", required=True)
    p.add_argument("--lr", type=float, default=2e-5)
    p.add_argument("--train-batch", type=int, default=16)
    p.add_argument("--eval-batch", type=int, default=16)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--epochs", type=int, default=3)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("serve", help="serve a checkpoint over HTTP")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--host", default="0.0.0.0")
    p.add_argument("--port", type=int, default=8700)
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())

"""``advstego`` command-line interface.

Exit codes: 0 success, 2 usage, 3 I/O or file format, 4 payload channel,
5 model or checkpoint.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__
from .attack import AttackConfig, fgsm
from .checkpoint import load_checkpoint, save_checkpoint
from .data import (
    gen_dataset,
    load_dataset_dir,
    load_png,
    read_manifest,
    save_png,
    stack_unit,
    write_dataset,
)
from .diffnet import TrainConfig, accuracy, init_network, predict, train
from .errors import DataFormatError, DatasetError, ModelError, StegoError
from .pipeline import run_experiment
from .report import write_report
from .stego import StegoConfig, extract, inject

EXIT_USAGE, EXIT_IO, EXIT_PAYLOAD, EXIT_MODEL = 2, 3, 4, 5
DEFAULT_SEED = 42
DEFAULT_PAYLOAD = "INERT-TEST-PAYLOAD: grant_access(user=guest)"


class UsageError(Exception):
    pass


def default_seed() -> int:
    raw = os.environ.get("ADVG_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"ADVG_SEED must be an integer, got {raw!r}") from None


def _epsilon(text: str) -> int:
    value = int(text)
    if not 0 <= value <= 255:
        raise argparse.ArgumentTypeError("epsilon must be in [0, 255]")
    return value


def _bits(text: str) -> int:
    value = int(text)
    if not 1 <= value <= 4:
        raise argparse.ArgumentTypeError("bits per channel must be in [1, 4]")
    return value


def _hidden(text: str) -> list[int]:
    try:
        dims = [int(v) for v in text.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError("hidden sizes must be comma-separated integers") from None
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError("hidden sizes must be positive")
    return dims


def _add_payload_args(p):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--payload", help=f"inline text payload (default: {DEFAULT_PAYLOAD!r})")
    src.add_argument("--payload-file", type=Path, help="read payload bytes from a file")
    src.add_argument("--payload-hex", help="payload given as hex digits")


def _payload(args) -> bytes:
    if args.payload_file is not None:
        return args.payload_file.read_bytes()
    if args.payload_hex is not None:
        try:
            return bytes.fromhex(args.payload_hex)
        except ValueError:
            raise UsageError("--payload-hex is not valid hex") from None
    text = DEFAULT_PAYLOAD if args.payload is None else args.payload
    return text.encode("utf-8")


# -- subcommands -------------------------------------------------------------

def cmd_gen_data(args):
    if args.n < 8:
        raise UsageError(f"--n must be at least 8, got {args.n}")
    ds = gen_dataset(args.n, args.seed)
    manifest = write_dataset(ds, args.out)
    print(f"wrote {len(ds.train_images)} train + {len(ds.test_images)} test images, manifest {manifest}")


def cmd_train(args):
    try:
        read_manifest(args.data)
        _, images, labels = load_dataset_dir(args.data, args.split)
    except DatasetError as exc:
        raise UsageError(str(exc)) from exc
    if not images:
        raise UsageError(f"split {args.split!r} of {args.data} is empty")
    X = stack_unit(images)
    n_classes = args.classes or max(labels) + 1
    net = init_network([X.shape[1], *args.hidden, max(n_classes, 2)], seed=args.seed)
    cfg = TrainConfig(epochs=args.epochs, learning_rate=args.lr, batch_size=args.batch_size, seed=args.seed)
    result = train(net, X, labels, cfg)
    save_checkpoint(result.network, args.out)
    if result.loss_history:
        print(f"loss: first epoch {result.loss_history[0]:.4f}, last epoch {result.loss_history[-1]:.4f}")
    print(f"final train accuracy: {accuracy(result.network, X, labels):.4f}")
    print(f"checkpoint written to {args.out}")


def cmd_predict(args):
    net = load_checkpoint(args.checkpoint)
    img = load_png(args.image)
    if img.size != net.input_dim:
        raise ModelError(f"image has {img.size} values, network expects {net.input_dim}")
    pred = predict(net, img.to_unit())
    print(f"label {pred.label} confidence {pred.confidence:.6f}")


def cmd_attack(args):
    net = load_checkpoint(args.checkpoint)
    img = load_png(args.image)
    if img.size != net.input_dim:
        raise ModelError(f"image has {img.size} values, network expects {net.input_dim}")
    label = args.label if args.label is not None else predict(net, img.to_unit()).label
    adv = fgsm(net, img, label, AttackConfig(args.epsilon))
    save_png(adv, args.out)
    after = predict(net, adv.to_unit())
    print(f"attacked with label {label}; adversarial prediction {after.label} "
          f"confidence {after.confidence:.6f}; written to {args.out}")


def cmd_inject(args):
    img = load_png(args.image)
    out = inject(img, _payload(args), StegoConfig(args.bits))
    save_png(out, args.out)
    print(f"payload injected, written to {args.out}")


def cmd_extract(args):
    payload = extract(load_png(args.image), StegoConfig(args.bits))
    if args.out is not None:
        args.out.write_bytes(payload)
    else:
        sys.stdout.buffer.write(payload)
        sys.stdout.flush()


def cmd_run_eval(args):
    net = load_checkpoint(args.checkpoint)
    try:
        ids, images, labels = load_dataset_dir(args.data, args.split)
    except DatasetError as exc:
        raise UsageError(str(exc)) from exc
    if not images:
        raise UsageError(f"no images found in {args.data} (split {args.split!r})")
    if args.limit is not None:
        ids, images = ids[:args.limit], images[:args.limit]
        labels = None if labels is None else labels[:args.limit]
    report = run_experiment(
        net, images, labels, _payload(args),
        AttackConfig(args.epsilon), StegoConfig(args.bits),
        image_ids=ids, use_true_label=args.use_true_label, seed=args.seed,
    )
    for path in write_report(report, args.out, args.format, chart=not args.no_chart):
        print(f"wrote {path}")
    for line in report.summary_lines():
        print(line)


# -- parser ------------------------------------------------------------------

def build_parser(seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advstego",
        description="FGSM adversarial perturbation and LSB payload injection toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def seed_arg(p):
        p.add_argument("--seed", type=int, default=seed,
                       help=f"random seed (default {seed}; env ADVG_SEED)")

    p = sub.add_parser("gen-data", help="generate the synthetic shapes dataset")
    p.add_argument("--n", type=int, default=400, help="number of images (>= 8)")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    seed_arg(p)
    p.set_defaults(func=cmd_gen_data)

    p = sub.add_parser("train", help="train the dense classifier on a dataset directory")
    p.add_argument("--data", type=Path, required=True, help="dataset directory with labels.csv")
    p.add_argument("--split", default="train", help="manifest split to train on (train|test|all)")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.1, help="learning rate")
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--hidden", type=_hidden, default=[128, 64], help="hidden layer sizes, e.g. 128,64")
    p.add_argument("--classes", type=int, default=None, help="number of classes (default: max label + 1)")
    p.add_argument("--out", type=Path, required=True, help="checkpoint path")
    seed_arg(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="classify one PNG")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--image", type=Path, required=True)
    seed_arg(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("attack", help="write an FGSM adversarial PNG")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--epsilon", type=_epsilon, default=8, help="step in 8-bit pixel levels")
    p.add_argument("--label", type=int, default=None, help="attack label (default: model prediction)")
    p.add_argument("--out", type=Path, required=True)
    seed_arg(p)
    p.set_defaults(func=cmd_attack)

    p = sub.add_parser("inject", help="hide a payload in a PNG")
    p.add_argument("--image", type=Path, required=True)
    _add_payload_args(p)
    p.add_argument("--bits", type=_bits, default=1, help="bits per channel byte (1-4)")
    p.add_argument("--out", type=Path, required=True)
    seed_arg(p)
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("extract", help="recover a payload from a PNG")
    p.add_argument("--image", type=Path, required=True)
    p.add_argument("--bits", type=_bits, default=1, help="bits per channel byte (1-4)")
    p.add_argument("--out", type=Path, default=None, help="write payload here instead of stdout")
    seed_arg(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("run-eval", help="run the full inject/attack/extract experiment")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True, help="dataset directory")
    p.add_argument("--split", default="test", help="manifest split to evaluate (train|test|all)")
    p.add_argument("--epsilon", type=_epsilon, default=8, help="step in 8-bit pixel levels")
    p.add_argument("--bits", type=_bits, default=1, help="bits per channel byte (1-4)")
    _add_payload_args(p)
    p.add_argument("--use-true-label", action="store_true",
                   help="attack the ground-truth label instead of the clean prediction")
    p.add_argument("--limit", type=int, default=None, help="evaluate only the first N images")
    p.add_argument("--format", choices=("json", "csv", "both"), default="both")
    p.add_argument("--no-chart", action="store_true", help="skip chart.svg")
    p.add_argument("--out", type=Path, required=True, help="output directory for report files")
    seed_arg(p)
    p.set_defaults(func=cmd_run_eval)
    return parser


def main(argv=None) -> int:
    try:
        seed = default_seed()
    except UsageError as exc:
        print(f"advstego: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    parser = build_parser(seed)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except UsageError as exc:
        print(f"advstego: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StegoError as exc:
        print(f"advstego: payload error: {exc}", file=sys.stderr)
        return EXIT_PAYLOAD
    except ModelError as exc:
        print(f"advstego: model error: {exc}", file=sys.stderr)
        return EXIT_MODEL
    except (OSError, DataFormatError) as exc:
        print(f"advstego: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())

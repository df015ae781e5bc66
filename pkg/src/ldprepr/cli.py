"""Command line front end.

Subcommands: probs, encode, perturb, train, experiment, curves, audit.
Data and parameter problems exit 1 with a one-line diagnostic; bad usage
exits 2 via argparse.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import io
from .codec import BitVector, CodecLayout, encode_matrix, normalize_rows
from .errors import LdpreprError
from .ldp import (
    RngSeed,
    audit_max_log_ratio,
    ome_params,
    ome_params_for_sensitivity,
    ome_position_probs,
    oue_params,
    paired_product_epsilon,
    sue_params,
)
from .model import MlpConfig, evaluate, init_mlp, train
from .pipeline import (
    _randomize_rows,
    emit_probability_curves,
    run_experiment,
    split,
)

__all__ = ["main", "build_parser"]


def _csv_floats(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part]


def _add_protocol_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--protocol", required=True, choices=("ome", "sue", "oue"))
    parser.add_argument("--epsilon", type=float, required=True, help="privacy budget")
    parser.add_argument("--lambda", dest="lam", type=float,
                        help="OME randomization factor (>= 1)")
    parser.add_argument("--r", type=int, help="elements per vector")
    parser.add_argument("--l", type=int, help="bits per element")
    parser.add_argument("--delta-f", type=int,
                        help="unary-encoding sensitivity (defaults to 2*r)")


def _resolve_params(parser: argparse.ArgumentParser, args, sensitivity: int | None = None):
    """Build protocol parameters from flags, treating gaps as usage errors."""
    if args.protocol == "ome":
        if args.lam is None:
            parser.error("--lambda is required for protocol 'ome'")
        if sensitivity is not None:
            return ome_params_for_sensitivity(args.epsilon, args.lam, sensitivity)
        if args.r is None or args.l is None:
            parser.error("--r and --l are required for protocol 'ome'")
        return ome_params(args.epsilon, args.lam, args.r, args.l)
    delta_f = args.delta_f if args.delta_f is not None else (
        2 * args.r if args.r is not None else None
    )
    if delta_f is None:
        parser.error(f"--delta-f (or --r) is required for protocol {args.protocol!r}")
    factory = sue_params if args.protocol == "sue" else oue_params
    return factory(args.epsilon, delta_f)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ldprepr",
        description="Locally differentially private bit representations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_probs = sub.add_parser("probs", help="print resolved randomization probabilities")
    _add_protocol_args(p_probs)

    p_encode = sub.add_parser("encode", help="encode an embedding file into a bit file")
    p_encode.add_argument("--in", dest="input", required=True)
    p_encode.add_argument("--out", dest="output", required=True)
    p_encode.add_argument("--m", type=int, default=4, help="integer bits per element")
    p_encode.add_argument("--n", type=int, default=5, help="fraction bits per element")

    p_perturb = sub.add_parser("perturb", help="randomize a bit file")
    p_perturb.add_argument("--in", dest="input", required=True)
    p_perturb.add_argument("--out", dest="output", required=True)
    _add_protocol_args(p_perturb)
    p_perturb.add_argument("--seed", type=int, default=0)

    p_train = sub.add_parser("train", help="split a data file, train, report accuracy")
    p_train.add_argument("--in", dest="input", required=True)
    p_train.add_argument("--split", type=float, default=0.8)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--hidden-units", type=int, default=128)
    p_train.add_argument("--dropout", type=float, default=0.5)
    p_train.add_argument("--learning-rate", type=float, default=0.01)
    p_train.add_argument("--decay", type=float, default=1e-6)
    p_train.add_argument("--momentum", type=float, default=0.9)
    p_train.add_argument("--batch-size", type=int, default=32)
    p_train.add_argument("--epochs", type=int, default=50)

    p_exp = sub.add_parser("experiment", help="run a config file end to end")
    p_exp.add_argument("--config", required=True)

    p_curves = sub.add_parser("curves", help="tabulate probabilities over grids")
    p_curves.add_argument("--out", dest="output", required=True)
    p_curves.add_argument("--protocols", default="ome,sue,oue",
                          help="comma-separated subset of ome,sue,oue")
    p_curves.add_argument("--epsilons", type=_csv_floats, default=[0.5, 1.0, 5.0, 10.0])
    p_curves.add_argument("--lambdas", type=_csv_floats, default=[1.0, 10.0, 50.0, 100.0])
    p_curves.add_argument("--r", type=int, default=50)
    p_curves.add_argument("--l", type=int, default=10)

    p_audit = sub.add_parser("audit", help="privacy identity and worst-case log ratio")
    _add_protocol_args(p_audit)
    p_audit.add_argument("--length", type=int,
                         help="bit-vector length audited (defaults to r*l)")
    return parser


def _cmd_probs(parser, args) -> int:
    params = _resolve_params(parser, args)
    if args.protocol == "ome":
        print(f"p1 = {params.p1!r}")
        print(f"p2 = {params.p2!r}")
    else:
        print(f"p = {params.p!r}")
    print(f"q = {params.q!r}")
    return 0


def _cmd_encode(args) -> int:
    dataset = io.load_embeddings(args.input)
    layout = CodecLayout(args.m, args.n, dataset.dim)
    X = np.stack([record.values for record in dataset.records])
    bits = encode_matrix(X, layout)
    records = [
        BitVector(label=record.label, bits=bits[i])
        for i, record in enumerate(dataset.records)
    ]
    io.write_bits(
        io.BitDataset(records=records, length=layout.total_bits,
                      num_classes=dataset.num_classes),
        args.output,
    )
    print(f"encoded {len(records)} records x {layout.total_bits} bits -> {args.output}")
    return 0


def _cmd_perturb(parser, args) -> int:
    dataset = io.load_bits(args.input)
    sensitivity = dataset.length if args.protocol == "ome" else None
    params = _resolve_params(parser, args, sensitivity=sensitivity)
    bits = np.stack([record.bits for record in dataset.records])
    noisy = _randomize_rows(bits, args.protocol, params, args.seed, 0)
    records = [
        BitVector(label=record.label, bits=noisy[i])
        for i, record in enumerate(dataset.records)
    ]
    io.write_bits(
        io.BitDataset(records=records, length=dataset.length,
                      num_classes=dataset.num_classes),
        args.output,
    )
    print(f"perturbed {len(records)} records with {args.protocol} -> {args.output}")
    return 0


def _cmd_train(args) -> int:
    with open(args.input, encoding="utf-8") as handle:
        header = handle.readline()
    if header.startswith("#emb"):
        dataset = io.load_embeddings(args.input)
        X = normalize_rows(np.stack([r.values for r in dataset.records]))
    elif header.startswith("#bits"):
        dataset = io.load_bits(args.input)
        X = np.stack([r.bits for r in dataset.records]).astype(np.float64)
    else:
        raise LdpreprError(f"{args.input}: unrecognized header {header.strip()!r}")
    y = np.array([r.label for r in dataset.records], dtype=np.int64)
    records = list(range(len(y)))
    train_idx, test_idx = split(records, args.split, RngSeed(args.seed, 0))
    config = MlpConfig(
        input_dim=X.shape[1],
        hidden_units=args.hidden_units,
        num_classes=dataset.num_classes,
        dropout_rate=args.dropout,
        learning_rate=args.learning_rate,
        decay=args.decay,
        momentum=args.momentum,
        batch_size=args.batch_size,
        epochs=args.epochs,
    )
    model = init_mlp(config, RngSeed(args.seed, 1))
    model, _ = train(model, X[train_idx], y[train_idx], seed=RngSeed(args.seed, 2))
    print(f"train_accuracy = {evaluate(model, X[train_idx], y[train_idx])!r}")
    print(f"test_accuracy = {evaluate(model, X[test_idx], y[test_idx])!r}")
    return 0


def _cmd_experiment(args) -> int:
    config = io.parse_config(args.config)
    report = run_experiment(config)
    io.write_report(report, config.output_path)
    print(
        f"mean_accuracy = {report.mean_accuracy!r} over {config.runs} runs "
        f"-> {config.output_path}"
    )
    return 0


def _cmd_curves(args) -> int:
    protocols = [p for p in args.protocols.split(",") if p]
    emit_probability_curves(
        protocols, args.epsilons, args.lambdas, args.r, args.l, args.output
    )
    print(f"curves -> {args.output}")
    return 0


def _cmd_audit(parser, args) -> int:
    params = _resolve_params(parser, args)
    if args.protocol == "ome":
        length = args.length if args.length is not None else params.sensitivity
        print(f"epsilon_identity = {paired_product_epsilon(params)!r}")
        ratio = audit_max_log_ratio(ome_position_probs(params, length), params.q, length)
    else:
        if args.length is not None:
            length = args.length
        elif args.r is not None and args.l is not None:
            length = args.r * args.l
        else:
            length = params.sensitivity
        ratio = audit_max_log_ratio(params.p, params.q, length)
    print(f"max_log_ratio = {ratio!r}")
    print(f"audited_length = {length}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "probs":
            return _cmd_probs(parser, args)
        if args.command == "encode":
            return _cmd_encode(args)
        if args.command == "perturb":
            return _cmd_perturb(parser, args)
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "experiment":
            return _cmd_experiment(args)
        if args.command == "curves":
            return _cmd_curves(args)
        if args.command == "audit":
            return _cmd_audit(parser, args)
    except (LdpreprError, OSError) as error:
        print(f"ldprepr {args.command}: {error}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())

"""
Command-line surface: gen, train, evaluate, reproduce and classes.

Exit codes: 0 success, 2 argument or configuration error, 3 acceptance
threshold failure under ``reproduce --check``.
"""

import argparse
import logging
import os
import sys
from typing import Optional, Sequence, Tuple

import pandas as pd

from .config import Config
from .datasets import DatasetFormatError, load_dataset, save_dataset
from .experiments import (
    ExperimentRunner,
    ExperimentSpec,
    build_dataset,
    check_acceptance,
    train_and_evaluate,
)
from .hybridmodel import evaluate_accuracy
from .io_utils import ModelStore, ResultsStore, format_table, records_frame
from .logger import setup_logging
from .stategen import enumerate_four_qubit_classes

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_CHECK_FAILED = 3


def parse_hidden(text: str) -> Optional[Tuple[int, ...]]:
    """'none' -> quantum-only, '' -> single tanh unit, '8,4' -> (8, 4)."""
    text = text.strip().lower()
    if text == "none":
        return None
    if not text:
        return ()
    try:
        sizes = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"Hidden sizes must be comma-separated integers or 'none', got '{text}'")
    if any(s < 1 for s in sizes):
        raise argparse.ArgumentTypeError(f"Hidden sizes must be positive, got {text}")
    return sizes


TRAINING_FLAGS = {
    "layers": "n_layers",
    "hidden": "hidden",
    "lr": "learning_rate",
    "epochs": "epochs",
    "batch_size": "batch_size",
    "entangler": "entangler",
    "init_scale": "init_scale",
    "m": "m",
}


def _add_training_flags(parser: argparse.ArgumentParser, with_m: bool = False) -> None:
    """Flags left unset fall back to Config.EXPERIMENT_DEFAULTS, then to Config.DEFAULT_*."""
    parser.add_argument("--seed", type=int, default=Config.DEFAULT_SEED, help="Seed governing all randomness")
    unset = argparse.SUPPRESS
    parser.add_argument("--layers", type=int, default=unset, help="Circuit layers")
    parser.add_argument("--hidden", type=parse_hidden, default=unset,
                        help="Hidden widths, e.g. '8' or '8,4'; 'none' for the quantum-only model")
    parser.add_argument("--lr", type=float, default=unset, help="Adam learning rate in (0, 1)")
    parser.add_argument("--epochs", type=int, default=unset)
    parser.add_argument("--batch-size", type=int, default=unset)
    parser.add_argument("--entangler", choices=Config.ENTANGLERS, default=unset)
    parser.add_argument("--init-scale", type=float, default=unset,
                        help="Initial circuit angles are uniform in [-scale, scale), scale in (0, pi]")
    if with_m:
        parser.add_argument("--m", type=int, default=unset, help="Dataset size (even)")


def _training_overrides(args: argparse.Namespace) -> dict:
    """ExperimentSpec fields for the training flags actually given."""
    given = vars(args)
    return {field: given[flag] for flag, field in TRAINING_FLAGS.items() if flag in given}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbitvqc",
        description="Hybrid variational classifiers for entanglement orbits",
    )
    parser.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    parser.add_argument("--log-file", help="Also append log records to this file")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="Generate and save a labeled dataset")
    gen.add_argument("--experiment", required=True, choices=Config.experiment_ids())
    gen.add_argument("--class", dest="class_id", type=int, choices=Config.CLASS_IDS,
                     help="Target class for four-qubit experiments")
    gen.add_argument("--target", help="Target state name for three-qubit experiments")
    gen.add_argument("--opposition", help="Opposition state name (table1)")
    gen.add_argument("--m", type=int, default=Config.DEFAULT_M, help="Sample count (even)")
    gen.add_argument("--seed", type=int, default=Config.DEFAULT_SEED)
    gen.add_argument("--out", help="Output path (default: data/<experiment>-<row>-seed<seed>.txt)")

    train = sub.add_parser("train", help="Train on a dataset file, save the model, append metrics")
    train.add_argument("--data", required=True, help="Dataset file written by 'gen'")
    _add_training_flags(train)
    train.add_argument("--out", help="Model path (default: models/<dataset name>.json)")
    train.add_argument("--results", default=Config.RESULTS_PATH, help="Append-only metrics file")

    evaluate = sub.add_parser("evaluate", help="Accuracy of a saved model on a dataset file")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--data", required=True)

    reproduce = sub.add_parser("reproduce", help="Run every row of an experiment")
    reproduce.add_argument("experiment", choices=Config.experiment_ids())
    _add_training_flags(reproduce, with_m=True)
    reproduce.add_argument("--dry-run", action="store_true", help="Print the grid without running it")
    reproduce.add_argument("--check", action="store_true", help="Exit 3 when a row misses its threshold")
    reproduce.add_argument("--best-of", type=int, default=1, help="Attempts per row, best test accuracy kept")
    reproduce.add_argument("--results", default=Config.RESULTS_PATH, help="Append-only metrics file")

    sub.add_parser("classes", help="Print the four-qubit graph-state class table")
    return parser


def select_row(experiment: str, class_id: Optional[int], target: Optional[str],
               opposition: Optional[str]) -> Tuple[str, str, Optional[str]]:
    """
    Pick the grid row a gen command refers to.

    Returns:
        (row label, target, opposition)

    Raises:
        ValueError: the flags do not identify exactly one row
    """
    rows = Config.get_experiment_rows(experiment)
    if experiment == "fig2":
        row = rows[0]
    elif experiment == "table1":
        if target not in (None, "GHZ"):
            raise ValueError("table1 always targets the GHZ orbit")
        matches = [r for r in rows if r[2] == opposition]
        if not matches:
            raise ValueError(f"table1 needs --opposition, one of {', '.join(r[2] for r in rows)}")
        row = matches[0]
    elif experiment == "table2-3q":
        matches = [r for r in rows if r[1] == target]
        if not matches:
            raise ValueError(f"table2-3q needs --target, one of {', '.join(r[1] for r in rows)}")
        row = matches[0]
    else:
        if class_id is None:
            raise ValueError(f"{experiment} needs --class (1-6)")
        row = next(r for r in rows if r[1] == str(class_id))
    return row[0], row[1], row[2]


def cmd_gen(args: argparse.Namespace) -> int:
    """Build one row's dataset and write it; reruns with the same flags give identical files."""
    row, target, opposition = select_row(args.experiment, args.class_id, args.target, args.opposition)
    spec = ExperimentSpec(args.experiment, row, target, opposition, args.seed, m=args.m)
    out = args.out or os.path.join("data", f"{args.experiment}-{row}-seed{args.seed}.txt")
    dataset = build_dataset(spec)
    save_dataset(dataset, out)
    negatives, positives = dataset.label_counts()
    print(f"Wrote {len(dataset)} samples ({negatives} labeled -1, {positives} labeled +1) to {out}")
    return EXIT_OK


def cmd_train(args: argparse.Namespace) -> int:
    """Train on a dataset file; save the model and append a MetricsRecord."""
    dataset = load_dataset(args.data)
    spec = ExperimentSpec.from_task(dataset.task, args.seed, m=len(dataset), **_training_overrides(args))
    record, model, _ = train_and_evaluate(spec, dataset)

    stem = os.path.splitext(os.path.basename(args.data))[0]
    out = args.out or os.path.join("models", f"{stem}.json")
    ModelStore().save(model, out)
    ResultsStore(args.results).append([record])
    print(format_table([record]))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    model = ModelStore().load(args.model)
    dataset = load_dataset(args.data)
    if dataset.n_qubits != model.cfg.n_qubits or dataset.pad != model.cfg.pad:
        raise ValueError(
            f"Model ({model.cfg.n_qubits} qubits, pad {model.cfg.pad}) does not fit dataset "
            f"({dataset.n_qubits} qubits, pad {dataset.pad})"
        )
    accuracy = evaluate_accuracy(model, dataset)
    print(f"Accuracy on {len(dataset)} samples of {dataset.task}: {accuracy:.4f}")
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    """Run (or with --dry-run, list) every row of an experiment."""
    runner = ExperimentRunner(args.experiment, args.seed, best_of=args.best_of, **_training_overrides(args))
    if args.dry_run:
        print(pd.DataFrame(runner.describe()).to_string(index=False))
        return EXIT_OK

    records = runner.run()
    ResultsStore(args.results).append(records)
    print(format_table(records))
    print()
    print(records_frame(records).to_csv(index=False), end="")

    failures = check_acceptance(args.experiment, records)
    for failure in failures:
        logging.warning(f"⚠️  {failure}")
    if not failures:
        logging.info(f"✅ {args.experiment}: every row meets its acceptance bound")
    if args.check and failures:
        return EXIT_CHECK_FAILED
    return EXIT_OK


def cmd_classes(args: argparse.Namespace) -> int:
    table = enumerate_four_qubit_classes()
    lu_labels = {1: "|0000>", 2: "|EPR>|00>", 3: "|EPR>|EPR>", 4: "|GHZ>|0>",
                 5: "(|0000>+|0111>+|1011>+|1100>)/2", 6: "|GHZ_4>"}
    rows = [
        {"class": c, "f_G": gc.representative.polynomial(), "graphs": gc.count, "lu_state": lu_labels[c]}
        for c, gc in sorted(table.classes.items())
    ]
    print(pd.DataFrame(rows).to_string(index=False))
    print(f"Total: {sum(table.counts)} graphs")
    return EXIT_OK


COMMANDS = {
    "gen": cmd_gen,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "reproduce": cmd_reproduce,
    "classes": cmd_classes,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Parse ``argv`` and dispatch.

    Returns:
        Process exit code
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(getattr(logging, args.log_level), log_file=args.log_file)
    try:
        return COMMANDS[args.command](args)
    except (ValueError, FileNotFoundError) as e:
        if isinstance(e, DatasetFormatError):
            logging.error(f"Invalid dataset file: {e}")
        else:
            logging.error(f"{args.command} failed: {e}", exc_info=logging.getLogger().isEnabledFor(logging.DEBUG))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

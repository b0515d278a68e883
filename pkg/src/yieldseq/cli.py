"""Command-line entry point.

    yieldseq synth      write the synthetic benchmark CSV
    yieldseq prepare    ingest, filter, window, split and scale; write the dataset
    yieldseq train      train one model kind and score it
    yieldseq compare    train FNN, LSTM and GRU on one split; MAPE table
    yieldseq gridsearch exhaustive hyperparameter search for one kind
    yieldseq rank       rank companies by predicted next-quarter EBIT/EV
    yieldseq gradcheck  finite-difference check of all three gradients

Failures exit nonzero with a single ``error<TAB>code<TAB>message`` line on stderr.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from yieldseq import datapipe as dp
from yieldseq import plotting, reports
from yieldseq.config import ConfigError, RunConfig, default_config_text, load_config
from yieldseq.evaluation import NoScorableSamples, compare_models, rank_stocks
from yieldseq.models.gradcheck import gradient_check
from yieldseq.models.io import ModelFormatError, load_model, save_model
from yieldseq.models.network import ModelKind, init_network
from yieldseq.numcore import SeededRng, ShapeError
from yieldseq.pipeline import fit_and_score, prepare
from yieldseq.synth import SynthConfig, generate
from yieldseq.training import GridSpace, grid_search

log = logging.getLogger("yieldseq")

GRADCHECK_HIDDEN = 4
GRADCHECK_INPUT = 3
GRADCHECK_STEPS = 5
GRADCHECK_EPSILON = 1e-5


class CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_synth(cfg: RunConfig, args) -> int:
    out = _out_dir(cfg)
    records = generate(SynthConfig(companies=cfg.synth_companies, quarters=cfg.synth_quarters,
                                   seed=cfg.seed))
    path = out / "synth.csv"
    dp.write_csv(records, path)
    print(f"wrote {len(records)} records for {cfg.synth_companies} companies to {path}")
    return 0


def _require_input(cfg: RunConfig):
    if not Path(cfg.input).exists():
        raise CliError("input_missing", f"input CSV {cfg.input} not found")
    return prepare(cfg)


def cmd_prepare(cfg: RunConfig, args) -> int:
    data = _require_input(cfg)
    out = _out_dir(cfg)
    reports.write_rejections(data.ingest.rejections, out / "rejections.csv")
    meta = [("train", s.company_id, str(s.start), str(s.target_period)) for s in data.train]
    meta += [("test", s.company_id, str(s.start), str(s.target_period)) for s in data.test]
    X = np.concatenate([data.X_train, data.X_test]) if len(data.test) else data.X_train
    y = np.concatenate([data.y_train, data.y_test]) if len(data.test) else data.y_train
    reports.write_dataset(out / "dataset.csv", X, y, meta)
    if data.scaler is not None:
        reports.write_scaler(data.scaler, out / "scaler.csv")
    print(f"records={len(data.ingest.records)} rejected={data.ingest.rejected} "
          f"kept_after_filter={len(data.records)} samples={len(data.train) + len(data.test)} "
          f"train={len(data.train)} test={len(data.test)}")
    return 0


def _train_kinds(cfg: RunConfig, kinds, args, tag: str):
    data = _require_input(cfg)
    if data.scaler is None:
        raise CliError("no_samples", "fewer than 2 windows; every company needs 9+ consecutive quarters")
    out = _out_dir(cfg)
    reports.write_scaler(data.scaler, out / "scaler.csv")
    results = {}
    for kind in kinds:
        t0 = time.perf_counter()
        net, hist, rep = fit_and_score(kind, data, cfg)
        log.info("%s trained in %.1fs, test MAPE %.3f%%", kind.value, time.perf_counter() - t0, rep.mape)
        save_model(net, cfg.model_path(kind) if tag == "train" else out / f"model_{kind.value}.txt")
        results[kind.value] = (net, hist, rep)
    histories = {k: v[1] for k, v in results.items()}
    rows = compare_models([v[2] for v in results.values()])
    reports.write_comparison(rows, out / f"{tag}.csv", out / f"{tag}.txt")
    if args.loss_csv:
        reports.write_losses(histories, out / f"{tag}_losses.csv")
    if not args.no_figures:
        plotting.plot_loss_curves(histories, out / f"{tag}_losses.png")
        plotting.plot_comparison(rows, out / f"{tag}.png")
    print((out / f"{tag}.txt").read_text(encoding="utf-8"), end="")
    return rows


def cmd_train(cfg: RunConfig, args) -> int:
    _train_kinds(cfg, [cfg.kind], args, "train")
    return 0


def cmd_compare(cfg: RunConfig, args) -> int:
    _train_kinds(cfg, list(cfg.kinds), args, "compare")
    return 0


def cmd_gridsearch(cfg: RunConfig, args) -> int:
    data = _require_input(cfg)
    if data.scaler is None:
        raise CliError("no_samples", "fewer than 2 windows; every company needs 9+ consecutive quarters")
    try:
        space = GridSpace(dict(cfg.grid))
    except ValueError as exc:
        raise CliError("bad_grid", str(exc)) from exc
    best, results = grid_search(cfg.kind, space, data.X_train, data.y_train, data.X_test, data.y_test,
                                cfg.hp, workers=cfg.workers)
    out = _out_dir(cfg)
    best_i = min(range(len(results)), key=lambda i: (results[i].mape, i))
    reports.write_grid(results, best_i, out / "grid.csv", out / "grid.txt")
    if not args.no_figures:
        plotting.plot_grid(results, out / "grid.png")
    print((out / "grid.txt").read_text(encoding="utf-8"), end="")
    print("best: " + ", ".join(f"{k}={v}" for k, v in results[best_i].params.items()))
    return 0


def cmd_rank(cfg: RunConfig, args) -> int:
    out = Path(cfg.out)
    model_path, scaler_path = cfg.model_path(cfg.kind), out / "scaler.csv"
    for p in (model_path, scaler_path):
        if not p.exists():
            raise CliError("artifact_missing", f"{p} not found; run `train` first")
    if not Path(cfg.input).exists():
        raise CliError("input_missing", f"input CSV {cfg.input} not found")
    net = load_model(model_path)
    scaler = reports.read_scaler(scaler_path)
    ingest = dp.ingest_csv(cfg.input)
    records = dp.filter_universe(ingest.records, cfg.top_n, cfg.excluded_sectors)
    windows, omitted = dp.latest_windows(records)
    ranking = rank_stocks(net, scaler, windows, omitted)
    reports.write_ranking(ranking, out / "ranking.csv", out / "ranking.txt")
    if not args.no_figures and ranking.entries:
        plotting.plot_ranking(ranking.entries, out / "ranking.png")
    print((out / "ranking.txt").read_text(encoding="utf-8"), end="")
    return 0


def random_check_instance(kind: ModelKind, rng: SeededRng, hidden: int = GRADCHECK_HIDDEN,
                          n_in: int = GRADCHECK_INPUT, steps: int = GRADCHECK_STEPS):
    """A small network with random weights and biases plus one random sample.

    Biases are randomised as well so no ReLU sits exactly on its kink.
    """
    width = n_in * steps if kind is ModelKind.FNN else n_in
    net = init_network(kind, width, hidden, rng)
    for name, p in net.params.items():
        if name.startswith("b_"):
            p[...] = rng.uniform(-0.5, 0.5, p.shape)
    window = rng.normal(0.0, 1.0, (steps, n_in))
    target = float(rng.normal(0.0, 1.0))
    return net, (window, target)


def gradcheck_suite(seeds=range(20), epsilon: float = GRADCHECK_EPSILON) -> dict[str, float]:
    worst = {}
    for kind in ModelKind:
        errs = []
        for s in seeds:
            net, sample = random_check_instance(kind, SeededRng(s))
            errs.append(gradient_check(net, sample, epsilon))
        worst[kind.value] = max(errs)
    return worst


def cmd_gradcheck(cfg: RunConfig, args) -> int:
    worst = gradcheck_suite(range(args.cases))
    out = _out_dir(cfg)
    lines = ["kind,max_relative_error"] + [f"{k},{v:.6e}" for k, v in worst.items()]
    (out / "gradcheck.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    for k, v in worst.items():
        print(f"{k}\t{v:.3e}\t{'ok' if v < 1e-5 else 'FAIL'}")
    return 0 if all(v < 1e-5 for v in worst.values()) else 1


COMMANDS = {
    "synth": cmd_synth, "prepare": cmd_prepare, "train": cmd_train, "compare": cmd_compare,
    "gridsearch": cmd_gridsearch, "rank": cmd_rank, "gradcheck": cmd_gradcheck,
}


COMMAND_HELP = {
    line.split()[1]: " ".join(line.split()[2:])
    for line in __doc__.splitlines() if line.strip().startswith("yieldseq ")
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file; flags override its values")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("--model", choices=[k.value for k in ModelKind], help="model kind")
    common.add_argument("--input", help="fundamentals CSV")
    common.add_argument("--epochs", type=int)
    common.add_argument("--loss-csv", action="store_true", help="also write per-epoch losses as CSV")
    common.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="yieldseq", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=COMMAND_HELP[name])
        if name == "gradcheck":
            p.add_argument("--cases", type=int, default=20, help="random instances per kind")
    sub.add_parser("print-config", help="print a config file with every default")
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.hp = cfg.hp.replace(seed=args.seed)
    if args.epochs is not None:
        cfg.hp = cfg.hp.replace(epochs=args.epochs)
    if args.out:
        cfg.out = args.out
    if args.input:
        cfg.input = args.input
    if args.model:
        cfg.kind = ModelKind(args.model)
        if args.command == "compare":
            cfg.kinds = (cfg.kind,)
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "print-config":
        print(default_config_text(), end="")
        return 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return COMMANDS[args.command](cfg, args)
    except CliError as exc:
        code, msg = exc.code, str(exc)
    except ConfigError as exc:
        code, msg = "bad_config", str(exc)
    except dp.IngestError as exc:
        code, msg = "bad_input", str(exc)
    except ModelFormatError as exc:
        code, msg = "bad_model_file", str(exc)
    except NoScorableSamples as exc:
        code, msg = "no_scorable_samples", str(exc)
    except (ShapeError, ValueError) as exc:
        code, msg = "invalid", str(exc)
    print(f"error\t{code}\t{' '.join(msg.split())}", file=sys.stderr)
    return 2


if __name__ == "__main__":
    sys.exit(main())

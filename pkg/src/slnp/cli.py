"""Command-line front end.

Commands
--------
train    fit one method and save the model (plus the trace for slnp)
compare  seeded 1-NN comparison of several methods
sweep    vary K, d or n_per_class for one or more methods
trace    fit slnp while recording the objective and one similarity row
toy      two-feature toy problem: slnp versus pca

Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numerical
failure. Outputs are written to ``--out`` only after all computation has
finished.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile
from pathlib import Path

from .alternating import fit
from .datasets import (
    DatasetManifest,
    data_root,
    find_idx_pair,
    load_csv,
    load_idx,
    load_pgm_manifest,
    random_subset,
    subsample_per_class,
    synth_two_feature_toy,
)
from .errors import ConfigError, DataError, NoWatchedSample, NumericalError
from .evaluation import METHODS, fit_method, reports_to_csv, reports_to_json, run_experiment, sweep
from .types import TrainConfig, TrainTrace


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _int_list(text: str) -> list[int]:
    """``"5"`` means seeds 0..4; ``"1,4,9"`` is taken literally."""
    parts = [p for p in text.split(",") if p.strip()]
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if len(vals) == 1 and "," not in text:
        return list(range(vals[0]))
    return vals


def _values(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None


def _size(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WxH, got {text!r}") from None
    return w, h


def _d_pca(text):
    if text is None or str(text).lower() == "none":
        return None
    return int(text)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with flat keys mirroring the flags")
    p.add_argument("--dataset", default="toy",
                   help="toy | idx:<dir or images,labels> | csv:<path> | manifest:<path>")
    p.add_argument("--label-column", default="label", help="label column of a CSV dataset")
    p.add_argument("--pool", type=int, default=1, help="average-pool IDX images by this factor")
    p.add_argument("--resize", type=_size, default=None, help="resize manifest images to WxH")
    p.add_argument("--subset", type=int, default=None,
                   help="draw this many samples from the dataset first (seeded by --subset-seed)")
    p.add_argument("--subset-seed", type=int, default=0)
    p.add_argument("--toy-size", type=int, default=40, help="samples per class of the toy set")
    p.add_argument("--toy-noise", type=float, default=10.0)
    p.add_argument("--methods", default="slnp", help=f"comma list from {','.join(METHODS)}")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--d-pca", type=_d_pca, default=None)
    p.add_argument("--n-per-class", type=int, default=None)
    p.add_argument("--seeds", type=_int_list, default=[0])
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--ridge", type=float, default=1e-8)
    p.add_argument("--include-self", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    p.add_argument("--timing", action="store_true",
                   help="fill the seconds columns (otherwise blank, keeping outputs reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slnp", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in ("train", "compare", "sweep", "trace", "toy"):
        p = sub.add_parser(name)
        _add_common(p)
        if name == "sweep":
            p.add_argument("--sweep-axis", choices=("K", "d", "n_per_class"), default="K")
            p.add_argument("--values", type=_values, default=None)
        if name == "trace":
            p.add_argument("--watch-class", type=int, default=0)
            p.add_argument("--watch-sample", type=int, default=0)
    return parser


def _load_config(argv, parser) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {args.config}: {e}") from None
    if not isinstance(cfg, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    defaults = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        action = next(a for a in sub._actions if a.dest == dest)
        if isinstance(val, (str, int, float)) and action.type is not None and not isinstance(val, bool):
            val = action.type(str(val))
        defaults[dest] = val
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def _resolve(path: str) -> Path:
    p = Path(path)
    return p if p.is_absolute() or p.exists() else data_root() / p


def load_dataset(args):
    kind, _, rest = args.dataset.partition(":")
    if kind == "toy":
        ds = synth_two_feature_toy(args.toy_size, args.toy_noise, seed=args.subset_seed)
    elif kind == "idx":
        if "," in rest:
            img, lab = (_resolve(p) for p in rest.split(",", 1))
        else:
            img, lab = find_idx_pair(_resolve(rest))
        ds = load_idx(img, lab, pool=args.pool)
    elif kind == "csv":
        col = args.label_column
        ds = load_csv(_resolve(rest), int(col) if col.isdigit() else col)
    elif kind == "manifest":
        ds = load_pgm_manifest(DatasetManifest.read(_resolve(rest)), args.resize)
    else:
        raise UsageError(f"unknown dataset kind {kind!r}")
    if args.subset is not None:
        ds = random_subset(ds, args.subset, args.subset_seed)
    return ds


def _train_config(args, **extra) -> TrainConfig:
    return TrainConfig(K=args.k, d=args.d, d_pca=args.d_pca, max_iters=args.max_iters,
                       rel_tol=args.rel_tol, ridge=args.ridge,
                       include_self=args.include_self, seed=args.seeds[0], **extra)


def _methods(args) -> list[str]:
    ms = [m.strip() for m in args.methods.split(",") if m.strip()]
    bad = [m for m in ms if m not in METHODS]
    if bad or not ms:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    return ms


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def similarity_evolution_csv(trace: TrainTrace) -> tuple[str, str]:
    """Long-format ``iter,neighbor_index,similarity`` rows of the watched
    sample, and its fixed heat-kernel affinities in input space."""
    if trace.watch is None or not trace.snapshots:
        raise NoWatchedSample("the trace did not record a watched sample")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("iter", "neighbor_index", "similarity"))
    for p, row in enumerate(trace.snapshots):
        for k, v in enumerate(row):
            w.writerow((p, k, repr(float(v))))
    heat = io.StringIO()
    w = csv.writer(heat, lineterminator="\n")
    w.writerow(("neighbor_index", "heat_similarity"))
    if trace.watch_heat is not None:
        for k, v in enumerate(trace.watch_heat):
            w.writerow((k, repr(float(v))))
    return buf.getvalue(), heat.getvalue()


def emit_similarity_evolution(trace: TrainTrace, out_path) -> tuple[Path, Path]:
    """Write :func:`similarity_evolution_csv` to ``out_path`` and
    ``<stem>_heat.csv`` beside it."""
    out_path = Path(out_path)
    evo, heat = similarity_evolution_csv(trace)
    heat_path = out_path.with_name(out_path.stem + "_heat.csv")
    atomic_write(out_path, evo)
    atomic_write(heat_path, heat)
    return out_path, heat_path


def _emit_reports(reports, args, stem) -> dict:
    out = Path(args.out)
    files = {}
    if args.format in ("csv", "both"):
        files[out / f"{stem}.csv"] = reports_to_csv(reports, args.timing)
    if args.format in ("json", "both"):
        files[out / f"{stem}.json"] = reports_to_json(reports, args.timing)
    return files


def _cmd_compare(args, ds) -> dict:
    if args.n_per_class is None:
        raise UsageError("compare requires --n-per-class")
    cfg = _train_config(args)
    reports = [run_experiment(ds, m, cfg, args.n_per_class, args.seeds) for m in _methods(args)]
    return _emit_reports(reports, args, "compare")


def _cmd_toy(args, ds) -> dict:
    n = args.n_per_class or 10
    args.methods = args.methods if args.methods != "slnp" else "slnp,pca"
    cfg = _train_config(args)
    reports = [run_experiment(ds, m, cfg, n, args.seeds) for m in _methods(args)]
    return _emit_reports(reports, args, "toy")


def _cmd_sweep(args, ds) -> dict:
    if not args.values:
        raise UsageError("sweep requires --values")
    if args.sweep_axis != "n_per_class" and args.n_per_class is None:
        raise UsageError("sweep requires --n-per-class unless sweeping it")
    cfg = _train_config(args)
    reports = []
    for m in _methods(args):
        reports += sweep(ds, m, cfg, args.sweep_axis, args.values, args.seeds, args.n_per_class)
    return _emit_reports(reports, args, "sweep")


def _train_split(args, ds):
    if args.n_per_class is None:
        return ds
    return subsample_per_class(ds, args.n_per_class, args.seeds[0])[0]


def _cmd_train(args, ds) -> dict:
    methods = _methods(args)
    if len(methods) != 1:
        raise UsageError("train takes exactly one method")
    train = _train_split(args, ds)
    model, trace = fit_method(train, methods[0], _train_config(args))
    out = Path(args.out)
    files = {}
    if trace is not None:
        if args.format in ("csv", "both"):
            files[out / "trace.csv"] = trace.to_csv(args.timing)
        if args.format in ("json", "both"):
            files[out / "trace.json"] = trace.to_json(args.timing)
    files[out / "model.npz"] = model
    return files


def _cmd_trace(args, ds) -> dict:
    if args.methods not in ("slnp",):
        raise UsageError("trace requires method slnp")
    train = _train_split(args, ds)
    cfg = _train_config(args, watch=(args.watch_class, args.watch_sample))
    res = fit(train, cfg)
    out = Path(args.out)
    evo, heat = similarity_evolution_csv(res.trace)
    files = {out / "similarity.csv": evo, out / "similarity_heat.csv": heat}
    if args.format in ("csv", "both"):
        files[out / "trace.csv"] = res.trace.to_csv(args.timing)
    if args.format in ("json", "both"):
        files[out / "trace.json"] = res.trace.to_json(args.timing)
    return files


COMMANDS = {"train": _cmd_train, "compare": _cmd_compare, "sweep": _cmd_sweep,
            "trace": _cmd_trace, "toy": _cmd_toy}


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = _load_config(argv, parser)
        if args.command == "toy":
            args.dataset = "toy"
        ds = load_dataset(args)
        files = COMMANDS[args.command](args, ds)
        for path, content in files.items():
            if isinstance(content, str):
                atomic_write(path, content)
            else:
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_name(f".{path.name}.tmp.npz")
                content.save(tmp)
                os.replace(tmp, path)
    except UsageError as e:
        print(str(e).rstrip(), file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"slnp: configuration error: {e}", file=sys.stderr)
        return 1
    except (DataError, OSError) as e:
        print(f"slnp: data error: {e}", file=sys.stderr)
        return 2
    except NumericalError as e:
        print(f"slnp: numerical failure: {e}", file=sys.stderr)
        return 3
    return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

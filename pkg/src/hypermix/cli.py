"""Command-line interface.

Subcommands: ``fit``, ``cv``, ``auc``, ``generate``, ``delete-edges``.
Every run writes a JSON manifest next to its outputs recording the
resolved configuration, input digests, seed, version and wall clock, so
results can be reproduced from the manifest alone.  Exit codes: 0 on
success, 1 on validation errors, 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .em import FitConfig, em_fit
from .errors import NumericalError, ValidationError
from .evaluation import CVGrid, auc_prediction, kfold_cv
from .hypergraph import build_hypergraph, delete_random_edges
from .io import (
    attribute_matrix_from_table,
    load_hypergraph,
    load_params,
    read_attribute_table,
    read_hyperedges,
    save_params,
    write_attribute_table,
    write_hyperedges,
    write_trace_csv,
)
from .model import ModelParams, StructuralConstants
from .synth import GenConfig, generate_attributes, generate_hypergraph

logger = logging.getLogger("hypermix")


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _write_manifest(out_path: Path, command: str, args: argparse.Namespace,
                    inputs: list[str], outputs: list[str], started: float) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "tool": "hypermix",
        "version": __version__,
        "command": command,
        "config": config,
        "seed": config.get("seed"),
        "inputs": {p: _sha256(p) for p in inputs},
        "outputs": outputs,
        "wall_clock_seconds": round(time.perf_counter() - started, 3),
    }
    with open(out_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def _load_inputs(edge_file: str, attr_file: str | None):
    if attr_file is None:
        return load_hypergraph(edge_file), None
    # The attribute table lists every node (including isolated ones), so
    # it defines the node universe and the index order.
    table = read_attribute_table(attr_file)
    h = load_hypergraph(edge_file, nodes=list(table))
    return h, attribute_matrix_from_table(table, h)


def _effective_threads(args) -> int:
    return 1 if getattr(args, "deterministic", False) else args.threads


def cmd_fit(args) -> int:
    started = time.perf_counter()
    if args.gamma > 0 and args.attributes is None:
        raise ValidationError("--gamma > 0 requires --attributes")
    h, x = _load_inputs(args.edges, args.attributes)
    config = FitConfig(k=args.k, gamma=args.gamma, seed=args.seed,
                       restarts=args.restarts, max_iters=args.max_iter,
                       tol=args.tol, threads=_effective_threads(args))
    result = em_fit(h, x, config)
    out = Path(args.out)
    save_params(out, u=result.params.u, w=result.params.w, beta=result.params.beta,
                gamma=args.gamma, seed=args.seed, final_loglik=result.final_loglik,
                max_edge_size=h.max_size, node_labels=h.node_labels)
    trace_path = out.with_suffix(".trace.csv")
    write_trace_csv(trace_path, result.loglik_trace)
    inputs = [args.edges] + ([args.attributes] if args.attributes else [])
    _write_manifest(out.with_suffix(".manifest.json"), "fit", args, inputs,
                    [str(out), str(trace_path)], started)
    print(f"fit: k={args.k} gamma={args.gamma} loglik={result.final_loglik:.6g} "
          f"iterations={result.iterations_run} "
          f"best_restart={result.restart_index_of_best}")
    if result.diagnostics:
        logger.info("diagnostics: %s", result.diagnostics)
    return 0


def _parse_k_range(text: str) -> tuple[int, ...]:
    if ":" in text:
        lo, hi = text.split(":")
        values = tuple(range(int(lo), int(hi) + 1))
    else:
        values = tuple(int(tok) for tok in text.split(","))
    if not values:
        raise ValidationError(f"empty k range {text!r}")
    return values


def _parse_gamma_grid(text: str) -> tuple[float, ...]:
    values = tuple(float(tok) for tok in text.split(","))
    for g in values:
        if not 0.0 <= g <= 1.0:
            raise ValidationError(f"gamma {g} outside [0, 1]")
    return values


def cmd_cv(args) -> int:
    started = time.perf_counter()
    h, x = _load_inputs(args.edges, args.attributes)
    grid = CVGrid(k_values=_parse_k_range(args.k_range),
                  gamma_values=_parse_gamma_grid(args.gamma_grid),
                  folds=args.folds, seed=args.seed)
    overrides = {"restarts": args.restarts, "max_iters": args.max_iter,
                 "tol": args.tol, "threads": _effective_threads(args)}
    report = kfold_cv(h, x, grid, fit_overrides=overrides)
    report.to_csv(args.out)
    _write_manifest(Path(args.out).with_suffix(".manifest.json"), "cv", args,
                    [args.edges] + ([args.attributes] if args.attributes else []),
                    [args.out], started)
    best = next(c for c in report.cells
                if c.k == report.selected_k and c.gamma == report.selected_gamma)
    print(f"selected: k={report.selected_k} gamma={report.selected_gamma} "
          f"auc={best.mean:.4f} +/- {best.std:.4f}")
    return 0


def cmd_auc(args) -> int:
    started = time.perf_counter()
    doc = load_params(args.params)
    params = ModelParams(u=doc["u"], w=doc["w"], beta=doc["beta"])
    nodes = doc["nodes"]
    raw_test = read_hyperedges(args.edges)
    raw_train = read_hyperedges(args.train_edges) if args.train_edges else []
    try:
        context = build_hypergraph(raw_test + raw_train, nodes=nodes)
    except ValidationError as exc:
        raise ValidationError(
            f"edge data is inconsistent with the fitted node universe: {exc}"
        ) from exc
    label_index = context.label_to_index()
    test_sets = [tuple(sorted(label_index[i] for i in ids)) for ids, _ in raw_test]
    constants = StructuralConstants.from_sizes(
        context.num_nodes, max(context.max_size, doc["max_edge_size"]))
    result = auc_prediction(test_sets, params, context, seed=args.seed,
                            mode=args.mode, constants=constants)
    print(f"auc={result.value:.4f} comparisons={result.comparisons} "
          f"ties={result.ties} resample_failures={result.resample_failures}")
    if args.mode == "soo":
        sizes = sorted({len(e) for e in test_sets})
        for d in sizes:
            print(f"  size={d} jaccard={(d - 1) / (d + 1):.4f}")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"auc": result.value, "comparisons": result.comparisons,
                       "ties": result.ties,
                       "resample_failures": result.resample_failures,
                       "mode": args.mode}, fh, sort_keys=True)
            fh.write("\n")
        inputs = [args.edges, args.params] + (
            [args.train_edges] if args.train_edges else [])
        _write_manifest(Path(args.out).with_suffix(".manifest.json"), "auc", args,
                        inputs, [args.out], started)
    return 0


def cmd_generate(args) -> int:
    started = time.perf_counter()
    with open(args.config, encoding="utf-8") as fh:
        base = GenConfig.from_dict(json.load(fh))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for inst in range(args.instances):
        config = GenConfig(num_nodes=base.num_nodes,
                           num_communities=base.num_communities,
                           dim_seq=base.dim_seq, rho_match=base.rho_match,
                           seed=base.seed + inst, planted_u=base.planted_u,
                           planted_w=base.planted_w)
        inst_dir = out_dir / f"instance_{inst:02d}"
        inst_dir.mkdir(exist_ok=True)
        h, truth = generate_hypergraph(config)
        x = generate_attributes(truth.u, config.rho_match,
                                config.num_communities,
                                seed=np.random.Generator(np.random.Philox(
                                    np.random.SeedSequence(config.seed).spawn(2)[1])))
        edges_path = inst_dir / "edges.txt"
        attrs_path = inst_dir / "attributes.csv"
        truth_path = inst_dir / "truth.json"
        write_hyperedges(edges_path, h)
        write_attribute_table(attrs_path, x, h.node_labels)
        save_params(truth_path, u=truth.u, w=truth.w, beta=None,
                    gamma=config.rho_match, seed=config.seed, final_loglik=None,
                    max_edge_size=h.max_size, node_labels=h.node_labels)
        written += [str(edges_path), str(attrs_path), str(truth_path)]
        print(f"instance {inst}: N={h.num_nodes} |E|={h.num_edges} "
              f"D={h.max_size} -> {inst_dir}")
    _write_manifest(out_dir / "generate.manifest.json", "generate", args,
                    [args.config], written, started)
    return 0


def cmd_delete_edges(args) -> int:
    started = time.perf_counter()
    h = load_hypergraph(args.edges)
    rng = np.random.Generator(np.random.Philox(args.seed))
    reduced, skipped = delete_random_edges(h, args.keep_fraction,
                                           args.keep_connected, rng)
    achieved = reduced.num_edges / h.num_edges
    write_hyperedges(args.out, reduced)
    _write_manifest(Path(args.out).with_suffix(".manifest.json"), "delete-edges",
                    args, [args.edges], [args.out], started)
    print(f"kept {reduced.num_edges}/{h.num_edges} edges "
          f"(fraction {achieved:.3f}, target {args.keep_fraction})")
    if achieved > args.keep_fraction + 0.5 / h.num_edges and args.keep_connected:
        print(f"warning: connectivity constraint blocked {skipped} removals; "
              "target fraction unreachable", file=sys.stderr)
    return 0


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="root random seed")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads for independent restarts/cells")
    p.add_argument("--deterministic", action="store_true",
                   help="force single-threaded, fixed-order execution")
    p.add_argument("--quiet", action="store_true", help="errors only")
    p.add_argument("--verbose", action="store_true", help="progress logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypermix",
        description="Overlapping community detection in hypergraphs with "
                    "node attributes")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit memberships on one (k, gamma) setting")
    p.add_argument("edges", help="hyperedge file")
    p.add_argument("--attributes", help="attribute CSV (required when gamma > 0)")
    p.add_argument("--k", type=int, required=True, help="number of communities")
    p.add_argument("--gamma", type=float, default=0.0,
                   help="attribute blend weight in [0, 1]")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out", default="fit_params.json", help="params document path")
    _add_common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("cv", help="k-fold cross-validation over (k, gamma)")
    p.add_argument("edges")
    p.add_argument("--attributes")
    p.add_argument("--k-range", default="2:30",
                   help="'lo:hi' inclusive or comma list")
    p.add_argument("--gamma-grid",
                   default="0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95,0.99,0.995,1.0")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iter", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-2)
    p.add_argument("--out", default="cv_report.csv")
    _add_common(p)
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("auc", help="hyperedge-prediction AUC of a fitted model")
    p.add_argument("edges", help="test hyperedge file")
    p.add_argument("params", help="fitted params document")
    p.add_argument("--train-edges",
                   help="training edges, excluded when sampling negatives")
    p.add_argument("--mode", choices=("uniform", "soo"), default="uniform")
    p.add_argument("--out", help="optional JSON result path")
    _add_common(p)
    p.set_defaults(func=cmd_auc)

    p = sub.add_parser("generate", help="sample synthetic benchmark datasets")
    p.add_argument("--config", required=True, help="generator config JSON")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--instances", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser(
        "delete-edges",
        help="randomly remove hyperedges, optionally preserving connectivity "
             "(components of the union-of-cliques adjacency over all nodes)")
    p.add_argument("edges")
    p.add_argument("--keep-fraction", type=float, required=True)
    p.add_argument("--keep-connected", action="store_true")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_delete_edges)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; those are validation errors here
        # (2 is reserved for numerical failures).
        code = exc.code if isinstance(exc.code, int) else 1
        if code == 0:
            raise  # --help / --version
        return 1
    level = logging.WARNING
    if getattr(args, "verbose", False):
        level = logging.INFO
    if getattr(args, "quiet", False):
        level = logging.ERROR
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

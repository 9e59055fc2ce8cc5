"""Command-line interface.

Exit codes: 0 on success, 2 for input or parse errors, 3 for numerical
failures (for example, every restart diverged).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from . import plots
from .bimodality import TwoComponentSpec, check_bimodal, oracle_mode_count
from .cluster import RestartConfig, assign, spontaneous_cluster
from .core import DataSet, GammaClustError, GaussianComponent, MixtureSpec
from .evaluation import (
    LabeledPartition,
    bhi,
    ch_index,
    kmeans,
    kmeans_select_ch,
    kmeans_select_gap,
    within_ss,
)
from .objective import loss_mu
from .optimizer import IterationConfig
from .selection import GammaGrid, gamma_by_range, select_gamma_aic, select_gamma_aic_two_index
from .simulate import (
    ExperimentConfig,
    five_spherical_config,
    run_experiment,
    two_ellipsoidal_config,
)

PRESETS = {
    "five-spherical": five_spherical_config,
    "two-ellipsoidal": two_ellipsoidal_config,
}


def _parse_grid(text: str) -> GammaGrid:
    """Parse lo:hi:n into a log-spaced grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like lo:hi:n, got {text!r}")
    lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
    if num == 1:
        return GammaGrid((lo,))
    return GammaGrid.log_spaced(lo, hi, num)


def _parse_vector(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")], dtype=float)


def _read_data(args: argparse.Namespace) -> DataSet:
    return gio.read_data_csv(args.input, header=not args.no_header)


def _add_input(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--input", required=True, help="numeric CSV, one observation per row")
    parser.add_argument("--no-header", action="store_true", help="CSV has no header row")


def _cmd_cluster(args: argparse.Namespace) -> int:
    data = _read_data(args)
    g_sigma = args.gamma_sigma if args.gamma_sigma is not None else args.gamma
    rcfg = RestartConfig(seed=args.seed)
    model, part = spontaneous_cluster(
        data,
        args.gamma,
        g_sigma,
        rcfg,
        IterationConfig(),
        fixed_identity=args.fixed_identity,
        refine_means=args.refine_means,
    )
    gio.write_model_json(args.out, model, part)
    print(f"clusters: {model.k}")
    print(f"proportions: {' '.join(f'{t:.4f}' for t in model.proportions)}")
    print(f"model written to {args.out}")
    if args.figure:
        if data.p == 2:
            plots.save_scatter_figure(args.figure, data, part, model)
            print(f"figure written to {args.figure}")
        else:
            print("figure skipped: scatter rendering needs 2-D data", file=sys.stderr)
    return 0


def _cmd_select_gamma(args: argparse.Namespace) -> int:
    data = _read_data(args)
    if args.method == "range":
        g = gamma_by_range(data, k_prior=args.k_prior)
        print(f"gamma {float(g):.6g}")
        return 0
    grid = _parse_grid(args.grid) if args.grid else GammaGrid.log_spaced()
    rcfg = RestartConfig(seed=args.seed)
    if args.grid_sigma:
        report = select_gamma_aic_two_index(
            data,
            grid,
            _parse_grid(args.grid_sigma),
            rcfg,
            IterationConfig(),
            refine_means=args.refine_means,
        )
    else:
        report = select_gamma_aic(
            data,
            grid,
            rcfg,
            IterationConfig(),
            fixed_identity=args.fixed_identity,
            refine_means=args.refine_means,
        )
    print("gamma_mu,gamma_sigma,k,aic")
    for rec in report.records:
        print(f"{rec.gamma_mu:.6g},{rec.gamma_sigma:.6g},{rec.k},{rec.aic:.4f}")
    print(
        f"best gamma {report.best.gamma_mu:.6g}"
        + (f" gamma_sigma {report.best.gamma_sigma:.6g}" if args.grid_sigma else "")
        + f" k {report.best.k} aic {report.best.aic:.4f}"
    )
    if args.curve_out:
        gio.write_aic_curve(args.curve_out, report)
    if args.figure:
        plots.save_aic_figure(args.figure, report)
    return 0


def _cmd_check_bimodality(args: argparse.Namespace) -> int:
    spec = TwoComponentSpec(_parse_vector(args.nu), args.sigma2, args.tau1, args.gamma)
    verdict = check_bimodal(spec)
    print(f"bimodal {str(verdict.bimodal).lower()}")
    print(f"d {verdict.d:.6g}")
    print(f"condition_low_log_lhs {verdict.log_lhs_low:.6g}")
    print(f"condition_low_log_rhs {verdict.log_rhs_low:.6g}")
    print(f"condition_high_log_lhs {verdict.log_lhs_high:.6g}")
    print(f"condition_high_log_rhs {verdict.log_rhs_high:.6g}")
    if verdict.displacement_bound is not None:
        print(f"displacement_bound {verdict.displacement_bound:.6g}")
    if args.oracle:
        print(f"oracle_mode_count {oracle_mode_count(spec)}")
    return 0


def _experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.preset:
        factory = PRESETS[args.preset]
        kwargs = {}
        if args.runs is not None:
            kwargs["runs"] = args.runs
        if args.seed is not None:
            kwargs["seed"] = args.seed
        return factory(**kwargs)
    if not args.config:
        raise ValueError("either --config or --preset is required")
    with open(args.config) as fh:
        doc = json.load(fh)
    return _config_from_doc(doc)


def _config_from_doc(doc: dict) -> ExperimentConfig:
    mix = doc["mixture"]
    components = tuple(
        GaussianComponent(np.array(c["mu"], dtype=float), np.array(c["sigma"], dtype=float))
        for c in mix["components"]
    )
    mixture = MixtureSpec(components, np.array(mix["proportions"], dtype=float))

    def grid_of(node):
        if node is None:
            return None
        if isinstance(node, list):
            return GammaGrid(tuple(float(v) for v in node))
        return GammaGrid.log_spaced(node.get("lo", 0.05), node.get("hi", 3.0), node.get("num", 10))

    kwargs = {
        "mixture": mixture,
        "n": int(doc["n"]),
        "runs": int(doc["runs"]),
        "seed": int(doc.get("seed", 0)),
        "k_prior": int(doc.get("k_prior", 2)),
        "fixed_identity": bool(doc.get("fixed_identity", False)),
        "refine_means": bool(doc.get("refine_means", False)),
        "kmeans_k_max": int(doc.get("kmeans_k_max", 8)),
        "kmeans_restarts": int(doc.get("kmeans_restarts", 4)),
        "gap_refs": int(doc.get("gap_refs", 20)),
    }
    if "methods" in doc:
        kwargs["methods"] = tuple(doc["methods"])
    grid = grid_of(doc.get("gamma_grid"))
    if grid is not None:
        kwargs["gamma_grid"] = grid
    kwargs["gamma_grid_sigma"] = grid_of(doc.get("gamma_grid_sigma"))
    if "restart" in doc:
        kwargs["restart"] = RestartConfig(**doc["restart"])
    if "iteration" in doc:
        kwargs["iteration"] = IterationConfig(**doc["iteration"])
    return ExperimentConfig(**kwargs)


def _cmd_simulate(args: argparse.Namespace) -> int:
    cfg = _experiment_config(args)
    report = run_experiment(cfg)
    written = gio.write_experiment_tables(report, args.out)
    if not args.no_figures:
        written.append(plots.save_frequency_figure(Path(args.out) / "frequencies.png", report))
    for m in cfg.methods:
        print(f"{m}: modal k = {report.modal_k(m)}, mean BHI = {report.mean_bhi[m]:.4f}")
    for path in written:
        print(f"wrote {path}")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    data = _read_data(args)
    truth = gio.read_labels_csv(args.labels)
    model, stored = gio.read_model_json(args.model)
    if stored is not None and stored.n == data.n:
        part = stored
    else:
        _, part = assign(data, model)
    score = bhi(LabeledPartition(part, truth))
    print(f"k {part.k}")
    print(f"bhi {score:.6f}")
    if 2 <= part.k < data.n:
        print(f"ch {gio.format_cell(ch_index(data, part))}")
    return 0


def _cmd_kmeans(args: argparse.Namespace) -> int:
    data = _read_data(args)
    ks = range(1, args.k_max + 1)
    if args.select == "ch":
        k, part, scores = kmeans_select_ch(data, ks, restarts=args.restarts, seed=args.seed)
        print(f"selected k {k}")
        for kk in sorted(scores):
            print(f"ch {kk} {gio.format_cell(scores[kk])}")
    elif args.select == "gap":
        k, part, scores = kmeans_select_gap(
            data, ks, b_refs=args.gap_refs, restarts=args.restarts, seed=args.seed
        )
        print(f"selected k {k}")
        for kk in sorted(scores):
            print(f"gap {kk} {scores[kk]:.6f}")
    else:
        k = args.k
        _, part = kmeans(data, k, restarts=args.restarts, seed=args.seed)
        print(f"k {k}")
    print(f"within_ss {within_ss(data, part):.6f}")
    if args.out:
        centers = np.array([data.x[part.labels == j].mean(axis=0) for j in range(part.k)])
        with open(args.out, "w") as fh:
            json.dump({"k": part.k, "centers": centers.tolist(), "labels": part.labels.tolist()}, fh, indent=2)
            fh.write("\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_loss_profile(args: argparse.Namespace) -> int:
    data = _read_data(args)
    if data.p != 1:
        raise ValueError("loss profiles are defined for one-dimensional data")
    if args.range:
        lo, hi, num = args.range.split(":")
        grid = np.linspace(float(lo), float(hi), int(num))
    else:
        pad = 0.1 * (data.x.max() - data.x.min() or 1.0)
        grid = np.linspace(float(data.x.min() - pad), float(data.x.max() + pad), 512)
    values = loss_mu(data, grid.reshape(-1, 1), args.gamma)
    gio.write_profile(args.out, grid, values)
    print(f"wrote {args.out}")
    if args.figure:
        plots.save_profile_figure(args.figure, grid, values, args.gamma)
        print(f"wrote {args.figure}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gammaclust",
        description="Spontaneous clustering: cluster-count discovery via local minima of the gamma-loss.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="run spontaneous clustering on a CSV")
    _add_input(p)
    p.add_argument("--gamma", type=float, required=True, help="index for center detection")
    p.add_argument("--gamma-sigma", type=float, default=None, help="index for covariance fitting")
    p.add_argument("--fixed-identity", action="store_true", help="keep cluster covariances at I")
    p.add_argument("--refine-means", action="store_true",
                   help="free the means during per-cluster covariance fitting")
    p.add_argument("--out", required=True, help="output model JSON")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--figure", default=None, help="optional scatter figure (2-D data)")
    p.set_defaults(func=_cmd_cluster)

    p = sub.add_parser("select-gamma", help="choose the index by range rule or AIC")
    _add_input(p)
    p.add_argument("--method", choices=("range", "aic"), required=True)
    p.add_argument("--k-prior", type=int, default=2, help="assumed cluster count for the range rule")
    p.add_argument("--grid", default=None, help="lo:hi:n log-spaced AIC grid")
    p.add_argument("--grid-sigma", default=None, help="second grid: search (gamma_mu, gamma_sigma) pairs")
    p.add_argument("--fixed-identity", action="store_true")
    p.add_argument("--refine-means", action="store_true",
                   help="free the means during per-cluster covariance fitting")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--curve-out", default=None, help="write the AIC curve as CSV")
    p.add_argument("--figure", default=None, help="render the AIC curve to a file")
    p.set_defaults(func=_cmd_select_gamma)

    p = sub.add_parser("check-bimodality", help="two-cluster existence check")
    p.add_argument("--nu", required=True, help="half-separation vector, comma separated")
    p.add_argument("--sigma2", type=float, required=True)
    p.add_argument("--tau1", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--oracle", action="store_true", help="also run the brute-force grid count")
    p.set_defaults(func=_cmd_check_bimodality)

    p = sub.add_parser("simulate", help="run a seeded experiment and write report files")
    p.add_argument("--config", default=None, help="experiment config JSON")
    p.add_argument("--preset", choices=sorted(PRESETS), default=None)
    p.add_argument("--runs", type=int, default=None, help="override preset run count")
    p.add_argument("--seed", type=int, default=None, help="override preset seed")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("evaluate", help="score a stored model against true labels")
    _add_input(p)
    p.add_argument("--labels", required=True, help="CSV with one category per row")
    p.add_argument("--model", required=True, help="model JSON")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("kmeans", help="K-means baseline")
    _add_input(p)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--k", type=int, default=None)
    group.add_argument("--select", choices=("ch", "gap"), default=None)
    p.add_argument("--k-max", type=int, default=10, help="largest candidate k for selection")
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--gap-refs", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="write centers and labels as JSON")
    p.set_defaults(func=_cmd_kmeans)

    p = sub.add_parser("loss-profile", help="emit a 1-D loss profile as two-column text")
    _add_input(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--range", default=None, help="lo:hi:n evaluation grid (default: data range)")
    p.add_argument("--out", required=True)
    p.add_argument("--figure", default=None, help="also render the profile")
    p.set_defaults(func=_cmd_loss_profile)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GammaClustError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: sample / spectrum / limits / experiment / report.

Run configs are flat INI files with sections ``[experiment]``, ``[ensemble]``
and ``[output]``; unknown sections or keys are rejected so manifests stay
self-describing. The only environment override is HEAVYEDGE_OUTPUT_DIR for
the output directory.

Exit codes: 0 success, 1 domain/config error, 2 internal error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from dataclasses import asdict

import numpy as np

from . import limit_laws
from .decomposition import ExactT1Law
from .ensembles import (
    circulant_regular_adjacency,
    matching_regular_adjacency,
    read_matrix_market,
    sample_covariance_factor,
    sample_sparse_wigner,
    sample_weighted_regular,
    write_matrix_market,
)
from .errors import DomainError
from .experiments import ExperimentConfig, RunManifest, run_experiment
from .spectral import top_k_eigs
from .tail_laws import GaussianLaw, build_crossover_law

_EXPERIMENT_KEYS = {
    "kind": str, "trials": int, "master_seed": int, "threads": int, "k": int,
    "tol": float, "maxiter": int, "eps": float, "margin": float,
    "cut_level": float, "threshold_exponent": float, "q_override": float,
    "thresholds": "floats", "spike_thetas": "floats", "plant_x": float,
    "covariance_mode": str, "joint_reference_size": int,
    "max_excluded_fraction": float,
}
_ENSEMBLE_KEYS = {
    "n": int, "mu": float, "c": float, "x0": float, "law_kind": str,
    "l": int, "m": int, "diag_variance": float,
}
_OUTPUT_KEYS = {"dir": str}


def _parse_floats(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def load_run_config(path):
    """Parse and validate an INI run config into (ExperimentConfig, outdir)."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise DomainError(f"config file not found: {path}")
    known = {"experiment": _EXPERIMENT_KEYS, "ensemble": _ENSEMBLE_KEYS,
             "output": _OUTPUT_KEYS}
    values = {}
    outdir = None
    for section in parser.sections():
        if section not in known:
            raise DomainError(f"unknown config section [{section}]")
        schema = known[section]
        for key, raw in parser.items(section):
            if key not in schema:
                raise DomainError(f"unknown key {key!r} in section [{section}]")
            kind = schema[key]
            if section == "output":
                outdir = raw
                continue
            name = {"l": "L", "m": "M"}.get(key, key)
            if kind == "floats":
                values[name] = _parse_floats(raw)
            elif kind is int:
                values[name] = int(raw)
            elif kind is float:
                values[name] = float(raw)
            else:
                values[name] = raw
    if "kind" not in values:
        raise DomainError("config must set kind in [experiment]")
    outdir = os.environ.get("HEAVYEDGE_OUTPUT_DIR", outdir)
    try:
        config = ExperimentConfig(**values)
    except TypeError as exc:
        raise DomainError(f"bad config: {exc}") from exc
    return config, outdir


def _grid(spec):
    parts = spec.split(":")
    if len(parts) != 3:
        raise DomainError("grid must be start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0.0 or stop < start:
        raise DomainError("grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _write_csv(path_or_none, header, rows, fmt="{:.6f}"):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(
            fmt.format(v) if isinstance(v, float) else str(v) for v in row
        ))
    text = "\n".join(lines) + "\n"
    if path_or_none:
        with open(path_or_none, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _entry_law(args):
    if args.law_kind == "gaussian":
        return GaussianLaw()
    beta = 2.0 * (1.0 + 1.0 / args.mu)
    return build_crossover_law(args.c, beta, args.x0)


def cmd_sample(args):
    rng = np.random.default_rng(args.seed)
    law = _entry_law(args)
    if args.kind in ("sparse_wigner", "dense_wigner"):
        p_n = float(args.n) if args.kind == "dense_wigner" else float(args.n) ** args.mu
        sample = sample_sparse_wigner(args.n, p_n, law, rng, seed=args.seed)
    elif args.kind == "band":
        adj = circulant_regular_adjacency(args.n, args.degree)
        sample = sample_weighted_regular(adj, law, rng, seed=args.seed)
    elif args.kind == "regular_graph":
        adj = matching_regular_adjacency(args.n, args.degree, rng)
        sample = sample_weighted_regular(adj, law, rng, seed=args.seed)
    elif args.kind == "covariance_factor":
        sample = sample_covariance_factor(args.L, args.M, law, rng, seed=args.seed)
    else:
        raise DomainError(f"unknown ensemble kind {args.kind!r}")
    write_matrix_market(sample, args.output)
    print(f"wrote {args.kind} sample to {args.output}")
    return 0


def cmd_spectrum(args):
    if args.input:
        sample = read_matrix_market(args.input)
    else:
        rng = np.random.default_rng(args.seed)
        law = _entry_law(args)
        p_n = float(args.n) ** args.mu
        sample = sample_sparse_wigner(args.n, p_n, law, rng, seed=args.seed)
    res = top_k_eigs(sample, args.k, tol=args.tol, method=args.method,
                     rng=np.random.default_rng(args.seed))
    rows = [(i + 1, float(lam), float(r))
            for i, (lam, r) in enumerate(zip(res.eigenvalues, res.residuals))]
    _write_csv(args.output, ["rank", "eigenvalue", "residual"], rows, fmt="{:.12g}")
    if args.output:
        print(f"wrote {len(rows)} eigenvalues to {args.output} "
              f"(converged={res.converged}, method={res.method})")
    return 0


def _limits_law(args):
    if args.law == "frechet":
        return limit_laws.FrechetLaw(args.c, args.mu)
    if args.law == "lambda1":
        return limit_laws.DeformedFrechetEdgeLaw(args.c, args.mu)
    if args.law == "covariance-edge":
        return limit_laws.CovarianceEdgeLaw(args.c, args.alpha)
    raise DomainError(f"unknown law {args.law!r}")


def cmd_limits(args):
    if args.falpha:
        if args.grid:
            xs = _grid(args.grid)
            rows = [(float(x), limit_laws.f_alpha(float(x), args.alpha)) for x in xs]
            _write_csv(args.output, ["x", "f_alpha"], rows)
        else:
            print("{:.10g}".format(limit_laws.f_alpha(args.x, args.alpha)))
        return 0
    if args.tau:
        print("{:.10g}".format(limit_laws.tau_alpha(args.alpha)))
        return 0
    if args.mp_stieltjes:
        if args.grid:
            zs = _grid(args.grid)
            rows = [(float(z), limit_laws.mp_stieltjes(float(z), args.alpha)) for z in zs]
            _write_csv(args.output, ["z", "stieltjes"], rows)
        else:
            print("{:.10g}".format(limit_laws.mp_stieltjes(args.z, args.alpha)))
        return 0
    if args.poisson_count:
        if args.grid:
            xs = _grid(args.grid)
            rows = [(float(x), limit_laws.poisson_expected_count(float(x), args.c, args.mu))
                    for x in xs]
            _write_csv(args.output, ["x", "expected_count"], rows)
        else:
            print("{:.10g}".format(
                limit_laws.poisson_expected_count(args.x, args.c, args.mu)))
        return 0
    if not args.law:
        raise DomainError("choose --law or one of --falpha/--tau/--mp-stieltjes/--poisson-count")
    law = _limits_law(args)
    if not args.grid:
        if args.x is None:
            raise DomainError("--law evaluation needs --grid or --x")
        print("{:.6f}".format(float(law.cdf(args.x))))
        return 0
    xs = _grid(args.grid)
    rows = [(float(x), float(law.cdf(float(x)))) for x in xs]
    _write_csv(args.output, ["x", "cdf"], rows)
    return 0


def cmd_experiment(args):
    config, outdir = load_run_config(args.config)
    outdir = args.output or outdir or "."
    os.makedirs(outdir, exist_ok=True)
    manifest_path = os.path.join(outdir, "manifest.json")
    trials_path = os.path.join(outdir, "trials.csv")
    created = []
    try:
        manifest = run_experiment(config)
        manifest.to_json(manifest_path)
        created.append(manifest_path)
        manifest.write_trials_csv(trials_path)
        created.append(trials_path)
    except BaseException:
        for path in created:
            try:
                os.unlink(path)
            except OSError:
                pass
        raise
    print(f"experiment {config.kind}: manifest -> {manifest_path}, "
          f"trials -> {trials_path}")
    return 0


def _render_scores(scores, indent=0):
    pad = " " * indent
    lines = []
    for key in sorted(scores):
        value = scores[key]
        if isinstance(value, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render_scores(value, indent + 2))
        elif isinstance(value, list) and value and isinstance(value[0], dict):
            for i, entry in enumerate(value):
                lines.append(f"{pad}{key}[{i}]:")
                lines.extend(_render_scores(entry, indent + 2))
        else:
            lines.append(f"{pad}{key} = {value}")
    return lines


def cmd_report(args):
    try:
        manifest = RunManifest.from_json(args.manifest)
    except FileNotFoundError as exc:
        raise DomainError(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise DomainError(f"not a manifest: {exc}") from exc
    print(f"experiment kind : {manifest.kind}")
    print(f"artifact version: {manifest.artifact_version}")
    print(f"trials          : {len(manifest.trial_seeds)} "
          f"(excluded: {len(manifest.excluded_trials)})")
    print(f"wall clock      : {manifest.wall_clock:.2f} s")
    print("scores (as stored in the manifest):")
    for line in _render_scores(manifest.scores, indent=2):
        print(line)
    outdir = args.output
    if outdir:
        os.makedirs(outdir, exist_ok=True)
        for name, block in manifest.plot_data.items():
            path = os.path.join(outdir, f"{name}_cdf.csv")
            rows = list(zip(block["x"], block["empirical_cdf"], block["analytic_cdf"]))
            _write_csv(path, ["x", "empirical_cdf", "analytic_cdf"], rows, fmt="{:.9g}")
            print(f"plot data -> {path}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="heavyedge",
        description="Spectral-edge laboratory for heavy-tailed random matrices",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_law_flags(p):
        p.add_argument("--mu", type=float, default=1.0)
        p.add_argument("--c", type=float, default=2.0)
        p.add_argument("--x0", type=float, default=3.0)
        p.add_argument("--law-kind", choices=("crossover", "gaussian"),
                       default="crossover")

    p_sample = sub.add_parser("sample", help="write an ensemble realization (MatrixMarket)")
    p_sample.add_argument("--kind", required=True,
                          choices=("sparse_wigner", "dense_wigner", "band",
                                   "regular_graph", "covariance_factor"))
    p_sample.add_argument("--n", type=int, default=500)
    p_sample.add_argument("--degree", type=int, default=11, help="k_n for graph kinds")
    p_sample.add_argument("--L", type=int, default=100)
    p_sample.add_argument("--M", type=int, default=200)
    p_sample.add_argument("--seed", type=int, default=0)
    add_law_flags(p_sample)
    p_sample.add_argument("-o", "--output", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_spec = sub.add_parser("spectrum", help="top-k eigenvalues of a file or fresh sample")
    p_spec.add_argument("--input", help="MatrixMarket file; omit to sample fresh")
    p_spec.add_argument("--n", type=int, default=500)
    p_spec.add_argument("--seed", type=int, default=0)
    p_spec.add_argument("--k", type=int, default=5)
    p_spec.add_argument("--tol", type=float, default=1e-8)
    p_spec.add_argument("--method", choices=("auto", "lanczos", "dense"), default="auto")
    add_law_flags(p_spec)
    p_spec.add_argument("-o", "--output")
    p_spec.set_defaults(func=cmd_spectrum)

    p_lim = sub.add_parser("limits", help="evaluate limit laws on a grid to CSV")
    p_lim.add_argument("--law", choices=("frechet", "lambda1", "covariance-edge"))
    p_lim.add_argument("--falpha", action="store_true")
    p_lim.add_argument("--tau", action="store_true")
    p_lim.add_argument("--mp-stieltjes", action="store_true", dest="mp_stieltjes")
    p_lim.add_argument("--poisson-count", action="store_true", dest="poisson_count")
    p_lim.add_argument("--mu", type=float, default=1.0)
    p_lim.add_argument("--c", type=float, default=2.0)
    p_lim.add_argument("--alpha", type=float, default=1.0)
    p_lim.add_argument("--x", type=float)
    p_lim.add_argument("--z", type=float)
    p_lim.add_argument("--grid", help="start:stop:step")
    p_lim.add_argument("-o", "--output")
    p_lim.set_defaults(func=cmd_limits)

    p_exp = sub.add_parser("experiment", help="run a config file, write manifest + CSV")
    p_exp.add_argument("config")
    p_exp.add_argument("-o", "--output", help="output directory")
    p_exp.set_defaults(func=cmd_experiment)

    p_rep = sub.add_parser("report", help="render a manifest (tables + plot CSV)")
    p_rep.add_argument("manifest")
    p_rep.add_argument("-o", "--output", help="directory for plot-ready CSVs")
    p_rep.set_defaults(func=cmd_report)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"internal error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

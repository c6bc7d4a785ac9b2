"""Command-line entry point, ``trioqmc`` (or ``python -m trioqmc``).

Every subcommand writes CSV, or the point-set format for ``points``, to
standard output or to ``--out``.  Study settings are taken from a study's
defaults, then from a ``--config`` file of ``key = value`` lines, then from
explicit flags.
"""

from __future__ import annotations

import argparse
import math
import sys

from .core import format_points, read_points
from .kernels import gamma_from_decay, l2_kernel, matern_kernel, weighted_kernel
from .rand import StreamKey
from .sequences import SamplerSpec, generate
from .studies import STUDIES, StudyTable, default_config, parse_sampler, run_study
from .trio import (
    discrepancy_quadratic,
    l2_discrepancy_closed,
    random_section_integrand,
    trio_decompose,
    weighted_l2_discrepancy,
)

__all__ = ["main", "build_parser", "read_config"]


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.  Dashes in keys become underscores."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _global_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads for replications")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--config", default=None, help="file of key=value study settings")
    return p


def _study_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--m-min", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--samplers", default=None, help="comma-separated sampler names")
    p.add_argument("--dims", default=None, help="comma-separated dimensions")
    return p


def _design_flags(p: argparse.ArgumentParser):
    p.add_argument("--sampler", default="sobol-scramble",
                   help="iid, lattice, lattice-shift, sobol or sobol-scramble")
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--m", type=int, default=8, help="n = 2^m")
    p.add_argument("--randomize", choices=("none", "shift", "scramble"), default=None,
                   help="override the randomization implied by --sampler")
    p.add_argument("--points", default=None, help="read the design from a point-set file")


def build_parser() -> argparse.ArgumentParser:
    g, s = _global_flags(), _study_flags()
    parser = argparse.ArgumentParser(prog="trioqmc", description="Quasi-Monte Carlo cubature experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("points", parents=[g], help="generate a design in point-set format")
    _design_flags(p)
    p.add_argument("--explicit-weights", action="store_true")

    p = sub.add_parser("disc", parents=[g], help="discrepancy of one design")
    _design_flags(p)
    p.add_argument("--kernel", choices=("l2", "weighted", "matern"), default="l2")
    p.add_argument("--gamma-decay", type=float, default=3.0, help="gamma_k^2 = k^-decay")
    p.add_argument("--theta", type=float, default=1.0, help="Matern shape parameter")

    p = sub.add_parser("trio", parents=[g], help="trio decomposition for random kernel-section integrands")
    _design_flags(p)
    p.add_argument("--kernel", choices=("l2", "weighted"), default="l2")
    p.add_argument("--gamma-decay", type=float, default=3.0)
    p.add_argument("--anchors", type=int, default=4)
    p.add_argument("--count", type=int, default=1, help="number of integrands")

    p = sub.add_parser("mvn", parents=[g, s], help="error study for the 3-d Gaussian box probability")
    p.add_argument("--transform", default=None, help="genz, affine or both comma-separated")

    p = sub.add_parser("asian", parents=[g, s], help="error study for the Asian call")
    p.add_argument("--construction", default=None, help="pca, cholesky or both comma-separated")

    p = sub.add_parser("bayes", parents=[g], help="coverage of the Bayesian 99%% bound")
    p.add_argument("--n", type=int, default=None, help="sample size, a power of two")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--problem", choices=("mvn3",), default="mvn3")

    p = sub.add_parser("study", parents=[g, s], help="run a named study")
    p.add_argument("name", choices=sorted(STUDIES))
    p.add_argument("--variants", default=None, help="kernels, transforms or constructions")
    return parser


def _study_config(args, study: str, **extra):
    cfg = default_config(study)
    if args.config:
        cfg = cfg.updated(**read_config(args.config))
    flags = {k: getattr(args, k, None) for k in
             ("seed", "threads", "m_min", "m_max", "reps", "samplers", "dims", "variants")}
    flags.update(extra)
    return cfg.updated(**{k: v for k, v in flags.items() if v is not None})


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.config:
        return int(read_config(args.config).get("seed", 0))
    return 0


def _load_design(args, command: str):
    if args.points:
        return read_points(args.points)
    key = StreamKey(_seed(args)).child(command)
    spec = parse_sampler(args.sampler, args.d, key)
    if args.randomize is not None:
        spec = SamplerSpec(spec.kind, spec.d, args.randomize, key)
    return generate(spec, args.m)


def _disc_table(args) -> StudyTable:
    design = _load_design(args, "disc")
    if args.kernel == "l2":
        spec = l2_kernel(design.d)
        value = l2_discrepancy_closed(design) if design.equal_weights else discrepancy_quadratic(spec, design)
    elif args.kernel == "weighted":
        gamma = gamma_from_decay(design.d, args.gamma_decay)
        spec = weighted_kernel(gamma)
        value = (weighted_l2_discrepancy(design, gamma) if design.equal_weights
                 else discrepancy_quadratic(spec, design))
    else:
        value = discrepancy_quadratic(matern_kernel(design.d, args.theta), design)
    return StudyTable(("kernel", "d", "n", "discrepancy"), [[args.kernel, design.d, design.n, value]])


def _trio_table(args) -> StudyTable:
    design = _load_design(args, "trio")
    if args.kernel == "l2":
        spec = l2_kernel(design.d)
    else:
        spec = weighted_kernel(gamma_from_decay(design.d, args.gamma_decay))
    dsc = discrepancy_quadratic(spec, design)
    rng = StreamKey(_seed(args)).child("trio-integrands").generator()
    rows = []
    for j in range(args.count):
        f = random_section_integrand(spec, args.anchors, rng)
        rep = trio_decompose(design, f, dsc, f.exact_variation)
        rows.append([j, rep.mu_hat, f.exact_mean, rep.error, rep.discrepancy, rep.variation, rep.confounding])
    return StudyTable(("integrand", "mu_hat", "exact_mean", "error", "discrepancy", "variation",
                       "confounding"), rows)


def _run(args) -> str:
    if args.command == "points":
        return format_points(_load_design(args, "points"), True if args.explicit_weights else None)
    if args.command == "disc":
        return _disc_table(args).to_csv()
    if args.command == "trio":
        return _trio_table(args).to_csv()
    if args.command == "mvn":
        cfg = _study_config(args, "mvn", variants=args.transform)
    elif args.command == "asian":
        cfg = _study_config(args, "asian", variants=args.construction)
    elif args.command == "bayes":
        extra = {}
        if args.n is not None:
            m = int(round(math.log2(args.n))) if args.n > 0 else -1
            if m < 0 or 1 << m != args.n:
                raise ValueError(f"--n must be a power of two, got {args.n}")
            extra = dict(m_min=m, m_max=m)
        cfg = _study_config(args, "bayes-coverage", **extra)
    else:
        cfg = _study_config(args, args.name)
    return run_study(cfg).to_csv()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = _run(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"trioqmc: error: {exc}", file=sys.stderr)
        return 2
    out = args.out
    if out is None and args.config:
        out = read_config(args.config).get("out") or None
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())

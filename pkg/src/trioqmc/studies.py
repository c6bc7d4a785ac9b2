"""Replicated numerical studies that write their results as CSV tables.

Each study takes a :class:`StudyConfig` and returns a :class:`StudyTable`.
Replications run on a thread pool but are gathered by index before any
reduction, so a table depends only on the configuration and seed.  Floats
are printed with 17 significant digits, which makes the CSV text exact.

Studies
-------
``disc-decay``
    RMS discrepancy against ``n`` for an unweighted or weighted L2 kernel.
``mvn``
    Absolute error of the 3-d Gaussian box probability.
``asian``
    Absolute error of the Asian call price.
``confounding``
    Fitted decay rates of error, discrepancy and implied confounding.
``bayes-coverage``
    Coverage of the 99% Bayesian cubature bound.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields, replace
from typing import Callable

import numpy as np

from .apps import (
    ASIAN_REFERENCE,
    MVN_REFERENCE,
    affine_integrand,
    asian_call_integrand,
    genz_integrand,
    box_probability_problem,
    asian_call_problem,
)
from .bayes import bayes_cubature, mle_fit
from .core import estimate
from .kernels import gamma_from_decay, l2_kernel, weighted_kernel
from .rand import StreamKey, fit_slope
from .sequences import SamplerSpec, generate
from .trio import (
    iid_expected_sq_disc,
    l2_discrepancy_closed,
    random_section_integrand,
    randomized_discrepancy_empirical,
    randomized_discrepancy_iid,
    weighted_l2_discrepancy,
)

__all__ = [
    "StudyConfig",
    "StudyTable",
    "STUDIES",
    "default_config",
    "parse_sampler",
    "run_study",
    "discrepancy_decay_study",
    "mvn_error_study",
    "asian_study",
    "confounding_order_study",
    "bayes_coverage_study",
]


@dataclass(frozen=True)
class StudyConfig:
    """Settings shared by all studies; a study ignores fields it does not use.

    ``samplers`` are names accepted by :func:`parse_sampler`.  ``variants``
    lists the kernel (``l2`` or ``weighted``), MVN transform or path
    construction, depending on the study.
    """

    study: str = "disc-decay"
    dims: tuple = (2,)
    m_min: int = 4
    m_max: int = 12
    reps: int = 100
    samplers: tuple = ("iid", "lattice-shift", "sobol-scramble")
    variants: tuple = ("l2",)
    seed: int = 0
    out: str | None = None
    threads: int = 1
    gamma_decay: float = 3.0
    baseline_reps: int = 1000
    test_integrands: int = 16

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("replications must be at least 1")
        if self.m_min > self.m_max or self.m_min < 0:
            raise ValueError("m range is empty")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        for name in ("dims", "samplers", "variants"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @property
    def ms(self) -> range:
        return range(self.m_min, self.m_max + 1)

    def updated(self, **changes) -> StudyConfig:
        """Copy with string-valued overrides coerced to the field types."""
        types = {f.name: f.default for f in fields(self)}
        clean = {}
        for k, v in changes.items():
            if k not in types:
                raise KeyError(f"unknown config key {k!r}")
            if isinstance(v, str):
                v = _coerce(types[k], v)
            clean[k] = v
        return replace(self, **clean)


def _coerce(default, text: str):
    text = text.strip()
    if isinstance(default, tuple):
        items = [t.strip() for t in text.split(",") if t.strip()]
        if default and isinstance(default[0], int):
            return tuple(int(t) for t in items)
        return tuple(items)
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text or None


@dataclass(frozen=True)
class StudyTable:
    header: tuple
    rows: list = field(default_factory=list)

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [r[i] for r in self.rows]

    def where(self, **match) -> list[dict]:
        """Rows as dicts, filtered by exact column values."""
        out = []
        for r in self.rows:
            row = dict(zip(self.header, r))
            if all(row[k] == v for k, v in match.items()):
                out.append(row)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.header) + "\n")
        for r in self.rows:
            buf.write(",".join(_cell(v) for v in r) + "\n")
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return ""
        return format(v, ".17g")
    return str(v)


# samplers ----------------------------------------------------------------

_SAMPLER_NAMES = {
    "iid": ("iid", "none"),
    "lattice": ("lattice", "none"),
    "lattice-shift": ("lattice", "shift"),
    "sobol": ("sobol", "none"),
    "sobol-scramble": ("sobol", "scramble+shift"),
    "sobol-scramble+shift": ("sobol", "scramble+shift"),
}


def parse_sampler(name: str, d: int, key: StreamKey = StreamKey()) -> SamplerSpec:
    """``iid``, ``lattice``, ``lattice-shift``, ``sobol`` or ``sobol-scramble``."""
    try:
        kind, rnd = _SAMPLER_NAMES[name]
    except KeyError:
        raise ValueError(f"unknown sampler {name!r}; choose from {sorted(_SAMPLER_NAMES)}") from None
    return SamplerSpec(kind, d, rnd, key)


def _is_random(spec: SamplerSpec) -> bool:
    return spec.kind == "iid" or spec.randomization != "none"


def _rep_count(spec: SamplerSpec, reps: int) -> int:
    return reps if _is_random(spec) else 1


def _designs_key(cfg: StudyConfig, *parts) -> StreamKey:
    key = StreamKey(cfg.seed).child(cfg.study)
    for label, index in parts:
        key = key.child(str(label), int(index))
    return key


def _rep_map(fn: Callable[[int], object], count: int, threads: int) -> list:
    """``[fn(0), ..., fn(count - 1)]``, in index order whatever the pool does."""
    if threads <= 1 or count <= 1:
        return [fn(r) for r in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _design(spec: SamplerSpec, key: StreamKey, m: int, r: int):
    return generate(spec.with_key(key.child("rep", r)), m)


def _slope(ms, values) -> float:
    v = np.asarray(values, dtype=float)
    if len(ms) < 3 or np.any(v <= 0) or not np.all(np.isfinite(v)):
        return math.nan
    return fit_slope(np.asarray(ms, dtype=float), np.log2(v))


# discrepancy decay -------------------------------------------------------

def discrepancy_decay_study(cfg: StudyConfig) -> StudyTable:
    """RMS discrepancy for each ``(kernel, d, sampler, n)``.

    ``scaled_disc`` divides by the RMS discrepancy of a single point from
    the same sampler, estimated from ``baseline_reps`` replications (one for
    deterministic samplers); the ``n = 1`` row, when in range, is that
    baseline.  ``rms_se`` is a delta-method standard error of ``rms_disc``.
    ``iid_theory`` is the exact RMS value for
    equally weighted IID points.  ``slope`` is the fitted decay of
    ``rms_disc`` in ``log2 n`` over the configured m range.
    """
    header = ("kernel", "d", "sampler", "n", "rms_disc", "rms_se", "scaled_disc", "iid_theory", "slope")
    rows = []
    for kernel in cfg.variants:
        if kernel not in ("l2", "weighted"):
            raise ValueError("kernel must be 'l2' or 'weighted'")
        for d in sorted(cfg.dims):
            if kernel == "l2":
                spec = l2_kernel(d)
                disc = l2_discrepancy_closed
            else:
                gamma = gamma_from_decay(d, cfg.gamma_decay)
                spec = weighted_kernel(gamma)
                disc = lambda des, g=gamma: weighted_l2_discrepancy(des, g)  # noqa: E731
            for sname in cfg.samplers:
                sampler = parse_sampler(sname, d)
                key = _designs_key(cfg, ("kernel", kernel == "weighted"), ("d", d), (sname, 0))

                def rms(m, count, key=key, sampler=sampler, disc=disc):
                    sq = np.array(_rep_map(lambda r: disc(_design(sampler, key.child("m", m), m, r)) ** 2,
                                           count, cfg.threads))
                    value = math.sqrt(float(np.mean(sq)))
                    # delta method: se(sqrt(mean)) = se(mean) / (2 sqrt(mean))
                    se = float(np.std(sq, ddof=1)) / math.sqrt(count) / (2 * value) if count > 1 and value > 0 else 0.0
                    return value, se

                base = rms(0, _rep_count(sampler, max(cfg.baseline_reps, cfg.reps)))
                block = []
                for m in cfg.ms:
                    value, se = base if m == 0 else rms(m, _rep_count(sampler, cfg.reps))
                    theory = math.sqrt(iid_expected_sq_disc(spec, 1 << m))
                    block.append([kernel, d, sname, 1 << m, value, se, value / base[0], theory])
                slope = _slope(list(cfg.ms), [b[4] for b in block])
                rows.extend(b + [slope] for b in block)
    return StudyTable(header, rows)


# applications ------------------------------------------------------------

def _error_rows(cfg, integrand, reference, variant) -> list:
    rows = []
    for sname in cfg.samplers:
        sampler = parse_sampler(sname, integrand.d)
        key = _designs_key(cfg, (variant, 0), (sname, 0))
        block = []
        for m in cfg.ms:
            errs = np.abs(np.array(_rep_map(
                lambda r: estimate(_design(sampler, key.child("m", m), m, r), integrand),
                _rep_count(sampler, cfg.reps), cfg.threads)) - reference)
            block.append([1 << m, sname, variant, float(np.median(errs)), float(np.quantile(errs, 0.9))])
        slope = _slope(list(cfg.ms), [b[3] for b in block])
        rows.extend(b + [slope] for b in block)
    return rows


def mvn_error_study(cfg: StudyConfig) -> StudyTable:
    """Median and 90% quantile of ``|mu - mu_hat|`` for the 3-d box probability.

    ``variants`` selects ``genz`` and/or ``affine``.
    """
    p = box_probability_problem()
    rows = []
    for variant in cfg.variants:
        if variant == "genz":
            f = genz_integrand(p)
        elif variant == "affine":
            f = affine_integrand(p)
        else:
            raise ValueError("mvn transform must be 'genz' or 'affine'")
        rows.extend(_error_rows(cfg, f, MVN_REFERENCE, variant))
    header = ("n", "sampler", "transform", "median_abs_err", "q90_abs_err", "slope")
    return StudyTable(header, rows)


def asian_study(cfg: StudyConfig) -> StudyTable:
    """Median and 90% quantile of the pricing error; ``variants`` are path constructions."""
    rows = []
    for variant in cfg.variants:
        f = asian_call_integrand(asian_call_problem(variant))
        rows.extend(_error_rows(cfg, f, ASIAN_REFERENCE, variant))
    header = ("n", "sampler", "construction", "median_abs_err", "q90_abs_err", "slope")
    return StudyTable(header, rows)


# confounding orders ------------------------------------------------------

def confounding_order_study(cfg: StudyConfig) -> StudyTable:
    """Decay rates on the Genz form of the 3-d box probability.

    For each sampler two settings are reported:

    ``deterministic``
        median absolute error against the RMS L2-discrepancy of the same
        designs;
    ``randomized``
        RMS error against the randomized discrepancy: ``1/sqrt(n)`` for IID,
        otherwise estimated from ``test_integrands`` random kernel sections.

    The implied confounding slope is the error slope minus the discrepancy
    slope.
    """
    f = genz_integrand(box_probability_problem())
    d = f.d
    kspec = l2_kernel(d)
    ms = list(cfg.ms)
    rows = []
    for sname in cfg.samplers:
        sampler = parse_sampler(sname, d)
        key = _designs_key(cfg, (sname, 0))
        tests = [random_section_integrand(kspec, 4, key.child("test", j).generator())
                 for j in range(cfg.test_integrands)]
        med, rmse, det_disc, rnd_disc = [], [], [], []
        for m in ms:
            designs = _rep_map(lambda r: _design(sampler, key.child("m", m), m, r),
                               _rep_count(sampler, cfg.reps), cfg.threads)
            errs = np.array([MVN_REFERENCE - estimate(des, f) for des in designs])
            med.append(float(np.median(np.abs(errs))))
            rmse.append(math.sqrt(float(np.mean(errs**2))))
            det_disc.append(math.sqrt(float(np.mean([l2_discrepancy_closed(des) ** 2 for des in designs]))))
            if sampler.kind == "iid":
                rnd_disc.append(randomized_discrepancy_iid(1 << m))
            else:
                rnd_disc.append(randomized_discrepancy_empirical(designs, tests))
        for setting, err, dsc in (("deterministic", med, det_disc), ("randomized", rmse, rnd_disc)):
            e, s = _slope(ms, err), _slope(ms, dsc)
            rows.append([sname, setting, e, s, e - s])
    header = ("sampler", "setting", "error_slope", "discrepancy_slope", "confounding_slope")
    return StudyTable(header, rows)


# Bayesian coverage -------------------------------------------------------

def bayes_coverage_study(cfg: StudyConfig) -> StudyTable:
    """Coverage of ``mu_hat -/+ 2.58 DSC s`` for the 3-d box probability.

    Each replication fits ``theta`` by maximum likelihood on one scrambled
    Sobol' design and reports the bound under optimal weights (``C^-1 c``)
    and, for comparison, equal weights at the same ``theta``.  After the
    replication rows of each ``n`` come two summary rows with ``rep = all``:
    numeric columns hold medians and ``covered`` holds the coverage fraction.
    """
    f = genz_integrand(box_probability_problem())
    sampler = SamplerSpec("sobol", f.d, "scramble+shift")
    header = ("n", "rep", "weight_mode", "theta", "s", "mu_hat", "half_width", "abs_err", "covered")
    rows = []
    for m in cfg.ms:
        key = _designs_key(cfg, ("m", m))

        def one(r, m=m, key=key):
            x = _design(sampler, key, m, r).nodes
            y = f(x)
            theta, _ = mle_fit(x, y)
            out = []
            for mode in ("optimal", "equal"):
                fit = bayes_cubature(x, y, theta, mode)
                err = abs(MVN_REFERENCE - fit.mu_hat)
                out.append([1 << m, r, mode, fit.theta, fit.s, fit.mu_hat, fit.half_width_99, err,
                            bool(err <= fit.half_width_99)])
            return out

        per_rep = _rep_map(one, cfg.reps, cfg.threads)
        for mode_i, mode in enumerate(("optimal", "equal")):
            block = [rr[mode_i] for rr in per_rep]
            rows.extend(block)
            med = [float(np.median([b[j] for b in block])) for j in range(3, 8)]
            rows.append([1 << m, "all", mode, *med, float(np.mean([b[8] for b in block]))])
    return StudyTable(header, rows)


# registry ----------------------------------------------------------------

STUDIES = {
    "disc-decay": discrepancy_decay_study,
    "mvn": mvn_error_study,
    "asian": asian_study,
    "confounding": confounding_order_study,
    "bayes-coverage": bayes_coverage_study,
}

_DEFAULTS = {
    "disc-decay": dict(dims=(2,), variants=("l2",)),
    "mvn": dict(samplers=("iid", "lattice-shift", "sobol-scramble"), variants=("genz", "affine")),
    "asian": dict(samplers=("iid", "sobol-scramble"), variants=("pca", "cholesky")),
    "confounding": dict(samplers=("iid", "sobol-scramble")),
    "bayes-coverage": dict(m_min=8, m_max=8),
}


def default_config(study: str, **overrides) -> StudyConfig:
    """The standard settings of ``study``, with keyword overrides."""
    if study not in STUDIES:
        raise ValueError(f"unknown study {study!r}; choose from {sorted(STUDIES)}")
    return StudyConfig(study=study, **{**_DEFAULTS[study], **overrides})


def run_study(cfg: StudyConfig) -> StudyTable:
    if cfg.study not in STUDIES:
        raise ValueError(f"unknown study {cfg.study!r}; choose from {sorted(STUDIES)}")
    return STUDIES[cfg.study](cfg)

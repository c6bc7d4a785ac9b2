import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trioqmc.kernels import l2_kernel
from trioqmc.studies import (
    STUDIES,
    StudyConfig,
    StudyTable,
    default_config,
    parse_sampler,
    run_study,
)
from trioqmc.trio import iid_expected_sq_disc


def _floats(table, column, **match):
    return np.array([float(r[column]) for r in table.where(**match)])


# configuration -------------------------------------------------------------

def test_config_rejects_zero_reps():
    with pytest.raises(ValueError):
        StudyConfig(reps=0)


def test_config_rejects_empty_m_range():
    with pytest.raises(ValueError):
        StudyConfig(m_min=5, m_max=4)


def test_config_rejects_zero_threads():
    with pytest.raises(ValueError):
        StudyConfig(threads=0)


@given(st.integers(0, 15), st.integers(0, 5))
def test_config_m_range_is_inclusive(m_min, width):
    cfg = StudyConfig(m_min=m_min, m_max=m_min + width)
    assert list(cfg.ms) == list(range(m_min, m_min + width + 1))


def test_updated_coerces_strings():
    cfg = StudyConfig().updated(reps="7", dims="3,5", samplers="iid, sobol", gamma_decay="2.5",
                                out="x.csv")
    assert cfg.reps == 7
    assert cfg.dims == (3, 5)
    assert cfg.samplers == ("iid", "sobol")
    assert cfg.gamma_decay == 2.5
    assert cfg.out == "x.csv"


def test_updated_rejects_unknown_key():
    with pytest.raises(KeyError):
        StudyConfig().updated(colour="red")


def test_updated_validates():
    with pytest.raises(ValueError):
        StudyConfig().updated(reps="0")


def test_default_config_unknown_study():
    with pytest.raises(ValueError):
        default_config("nope")


def test_every_registered_study_has_defaults():
    for name in STUDIES:
        assert default_config(name).study == name


@pytest.mark.parametrize("name", ["iid", "lattice", "lattice-shift", "sobol", "sobol-scramble"])
def test_parse_sampler_names_round_trip(name):
    assert parse_sampler(name, 3).name.startswith(name.split("-")[0])


def test_parse_sampler_unknown():
    with pytest.raises(ValueError):
        parse_sampler("halton", 2)


# table output ----------------------------------------------------------------

def test_csv_formats_exactly():
    t = StudyTable(("a", "b", "c", "d"), [[1, 0.1, True, math.nan]])
    lines = t.to_csv().splitlines()
    assert lines[0] == "a,b,c,d"
    assert lines[1] == "1,0.10000000000000001,1,"
    assert float(lines[1].split(",")[1]) == 0.1


def test_csv_parses_back():
    t = run_study(default_config("mvn", m_min=4, m_max=6, reps=3))
    parsed = list(csv.reader(io.StringIO(t.to_csv())))
    assert tuple(parsed[0]) == t.header
    assert len(parsed) == len(t.rows) + 1
    for row, orig in zip(parsed[1:], t.rows):
        assert float(row[3]) == orig[3]


@pytest.mark.parametrize("study,over", [
    ("disc-decay", dict(m_min=0, m_max=5, reps=6, baseline_reps=6, samplers=("iid", "sobol-scramble"))),
    ("mvn", dict(m_min=4, m_max=6, reps=6)),
    ("asian", dict(m_min=4, m_max=6, reps=6)),
    ("confounding", dict(m_min=4, m_max=6, reps=6, test_integrands=3)),
    ("bayes-coverage", dict(m_min=4, m_max=5, reps=4)),
])
def test_bit_reproducible_across_threads(study, over):
    one = run_study(default_config(study, threads=1, **over)).to_csv()
    four = run_study(default_config(study, threads=4, **over)).to_csv()
    again = run_study(default_config(study, threads=1, **over)).to_csv()
    assert one == four == again


def test_seed_changes_output():
    a = run_study(default_config("mvn", m_min=4, m_max=5, reps=3, seed=0)).to_csv()
    b = run_study(default_config("mvn", m_min=4, m_max=5, reps=3, seed=1)).to_csv()
    assert a != b


def test_row_order_follows_config_keys():
    t = run_study(default_config("mvn", m_min=4, m_max=6, reps=2))
    keys = [(r["transform"], r["sampler"], r["n"]) for r in t.where()]
    expected = [(v, s, 1 << m) for v in ("genz", "affine") for s in ("iid", "lattice-shift", "sobol-scramble")
                for m in range(4, 7)]
    assert keys == expected


# discrepancy decay -----------------------------------------------------------

@pytest.fixture(scope="module")
def iid_decay():
    return run_study(default_config("disc-decay", samplers=("iid",), m_min=0, m_max=10, reps=100))


def test_iid_rms_matches_theory_within_3se(iid_decay):
    spec = l2_kernel(2)
    for row in iid_decay.where():
        theory = math.sqrt(iid_expected_sq_disc(spec, row["n"]))
        assert row["iid_theory"] == pytest.approx(theory, rel=1e-15)
        assert abs(row["rms_disc"] - theory) <= 3 * row["rms_se"], row


def test_scaled_is_one_at_n_equals_one(iid_decay):
    (row,) = iid_decay.where(n=1)
    assert row["scaled_disc"] == 1.0


def test_iid_slope_near_one_half(iid_decay):
    assert -0.6 <= iid_decay.where()[0]["slope"] <= -0.4


def test_scrambled_sobol_slope_d2():
    t = run_study(default_config("disc-decay", samplers=("sobol-scramble",), m_min=4, m_max=12, reps=10,
                                 baseline_reps=10))
    slopes = set(_floats(t, "slope"))
    assert len(slopes) == 1
    assert slopes.pop() <= -0.85


def test_deterministic_sampler_has_zero_se():
    t = run_study(default_config("disc-decay", samplers=("sobol",), m_min=1, m_max=4, reps=5))
    assert np.all(_floats(t, "rms_se") == 0.0)


def test_weighted_kernel_variant_runs():
    t = run_study(default_config("disc-decay", variants=("weighted",), samplers=("sobol-scramble",),
                                 dims=(3,), m_min=2, m_max=5, reps=4, baseline_reps=4))
    assert {r["kernel"] for r in t.where()} == {"weighted"}
    assert np.all(np.diff(_floats(t, "rms_disc")) < 0)


def test_unknown_kernel_variant():
    with pytest.raises(ValueError):
        run_study(default_config("disc-decay", variants=("gauss",), reps=1))


# application studies ---------------------------------------------------------

@pytest.fixture(scope="module")
def mvn_table():
    return run_study(default_config("mvn", samplers=("sobol-scramble",), m_min=4, m_max=12, reps=30))


def test_mvn_sobol_median_mostly_decreasing(mvn_table):
    med = _floats(mvn_table, "median_abs_err", transform="genz")
    assert np.sum(np.diff(med) >= 0) <= 1


def test_genz_beats_affine_for_n_at_least_64(mvn_table):
    for m in range(6, 13):
        (g,) = mvn_table.where(transform="genz", n=1 << m)
        (a,) = mvn_table.where(transform="affine", n=1 << m)
        assert g["median_abs_err"] < a["median_abs_err"]


def test_quantile_at_least_median(mvn_table):
    for row in mvn_table.where():
        assert row["q90_abs_err"] >= row["median_abs_err"]


def test_unknown_mvn_transform():
    with pytest.raises(ValueError):
        run_study(default_config("mvn", variants=("polar",), reps=1))


def test_asian_pca_slope_steeper_than_cholesky():
    t = run_study(default_config("asian", samplers=("sobol-scramble",), m_min=6, m_max=12, reps=40))
    pca = _floats(t, "slope", construction="pca")[0]
    chol = _floats(t, "slope", construction="cholesky")[0]
    assert pca < chol


# confounding -------------------------------------------------------------------

@pytest.fixture(scope="module")
def confounding_table():
    return run_study(default_config("confounding", m_min=4, m_max=11, reps=40))


def test_confounding_slope_is_exact_difference(confounding_table):
    for row in confounding_table.where():
        assert row["confounding_slope"] == row["error_slope"] - row["discrepancy_slope"]


@pytest.mark.parametrize("setting", ["deterministic", "randomized"])
def test_iid_error_and_confounding_slopes(confounding_table, setting):
    (row,) = confounding_table.where(sampler="iid", setting=setting)
    assert abs(row["error_slope"] + 0.5) <= 0.15
    assert abs(row["confounding_slope"]) <= 0.15


def test_iid_randomized_discrepancy_is_exact(confounding_table):
    (row,) = confounding_table.where(sampler="iid", setting="randomized")
    assert row["discrepancy_slope"] == pytest.approx(-0.5, abs=1e-12)


def test_sobol_deterministic_confounding_negative(confounding_table):
    (row,) = confounding_table.where(sampler="sobol-scramble", setting="deterministic")
    assert row["confounding_slope"] < 0


# Bayesian coverage -------------------------------------------------------------

@pytest.fixture(scope="module")
def coverage_small():
    return run_study(default_config("bayes-coverage", m_min=6, m_max=6, reps=32))


def test_half_widths_positive(coverage_small):
    assert np.all(_floats(coverage_small, "half_width") > 0)


def test_summary_rows(coverage_small):
    for mode in ("optimal", "equal"):
        per_rep = coverage_small.where(weight_mode=mode, n=64)
        summary = [r for r in per_rep if r["rep"] == "all"]
        reps = [r for r in per_rep if r["rep"] != "all"]
        assert len(summary) == 1 and len(reps) == 32
        assert summary[0]["covered"] == np.mean([r["covered"] for r in reps])
        assert summary[0]["theta"] == np.median([r["theta"] for r in reps])


def test_modes_share_theta(coverage_small):
    opt = [r["theta"] for r in coverage_small.where(weight_mode="optimal") if r["rep"] != "all"]
    eq = [r["theta"] for r in coverage_small.where(weight_mode="equal") if r["rep"] != "all"]
    assert opt == eq


def test_coverage_does_not_collapse_at_large_n(coverage_small):
    big = run_study(default_config("bayes-coverage", m_min=10, m_max=10, reps=32))
    (lo,) = [r for r in coverage_small.where(weight_mode="optimal") if r["rep"] == "all"]
    (hi,) = [r for r in big.where(weight_mode="optimal") if r["rep"] == "all"]
    print(f"coverage n=64: {lo['covered']:.3f}  n=1024: {hi['covered']:.3f}")
    assert hi["covered"] >= lo["covered"] - 0.15

"""Command-line front end: ingest study tables, evaluate BFF curves and
points, and run the oracle validation grid.

Input is a CSV file with header
    test,sided,stat,nu,k,m,n,n1,n2,rho,design
(empty cells for absent fields), or a JSON list of row objects with the same
field names when the file ends in .json.  Correlation studies are entered as
(rho, n) pairs; the Fisher transform happens at ingestion.

Exit codes: 0 success, 1 validation failure, 2 usage/parse error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .bayes_factors import Sidedness, StatFamily, TestStatistic
from .effect_map import DesignKind, DesignTag, fisher_z
from .evidence import (
    BffCurve,
    EffectGrid,
    FixedR,
    MmapR,
    StudySet,
    bff_curve,
    evidence_thresholds,
    mmap_r,
    per_study_log_bf,
)
from .priors import jeffreys_log_prior_gamma, jeffreys_log_prior_nm

DEFAULT_LEVELS = (-1.0, -3.0, -5.0)
DEFAULT_R_MAX = 200.0
CONFIG_ENV_VAR = "BFFKIT_CONFIG"

_CSV_FIELDS = ("test", "sided", "stat", "nu", "k", "m", "n", "n1", "n2", "rho", "design")


class ParseError(ValueError):
    pass


def _fmt(x: float) -> str:
    """Locale-independent 10-significant-digit formatting."""
    return format(x, ".10g")


def _opt_float(row: dict, key: str, row_no: int) -> float | None:
    raw = row.get(key)
    if raw is None or str(raw).strip() == "":
        return None
    try:
        return float(raw)
    except ValueError:
        raise ParseError(f"row {row_no}: field '{key}' is not a number: {raw!r}")


def _opt_int(row: dict, key: str, row_no: int) -> int | None:
    val = _opt_float(row, key, row_no)
    if val is None:
        return None
    if val != int(val):
        raise ParseError(f"row {row_no}: field '{key}' must be an integer, got {val}")
    return int(val)


_DESIGNS = {tag.value: tag for tag in DesignTag}
_TESTS = {"z": StatFamily.Z, "t": StatFamily.T, "chisq": StatFamily.CHI_SQ, "f": StatFamily.F}
_SIDED = {"one": Sidedness.ONE_SIDED, "two": Sidedness.TWO_SIDED}

_TWO_SAMPLE_TAGS = (DesignTag.TWO_SAMPLE_Z, DesignTag.TWO_SAMPLE_T)


def _study_from_row(row: dict, row_no: int) -> tuple[TestStatistic, DesignKind]:
    test = str(row.get("test") or "").strip().lower()
    if test not in _TESTS:
        raise ParseError(f"row {row_no}: unknown test {row.get('test')!r}")
    family = _TESTS[test]

    design_raw = str(row.get("design") or "").strip().lower()
    if design_raw not in _DESIGNS:
        raise ParseError(f"row {row_no}: unknown design {row.get('design')!r}")
    tag = _DESIGNS[design_raw]

    n = _opt_int(row, "n", row_no)
    n1 = _opt_int(row, "n1", row_no)
    n2 = _opt_int(row, "n2", row_no)
    try:
        if tag in _TWO_SAMPLE_TAGS:
            design = DesignKind(tag, n1=n1, n2=n2)
        else:
            design = DesignKind(tag, n=n)
    except ValueError as exc:
        raise ParseError(f"row {row_no}: {exc}")

    sided_raw = str(row.get("sided") or "").strip().lower()
    sided = _SIDED.get(sided_raw) if sided_raw else None
    if sided_raw and sided is None:
        raise ParseError(f"row {row_no}: unknown sidedness {row.get('sided')!r}")

    stat = _opt_float(row, "stat", row_no)
    rho = _opt_float(row, "rho", row_no)
    if (stat is None) == (rho is None):
        raise ParseError(f"row {row_no}: exactly one of 'stat' or 'rho' is required")

    try:
        if rho is not None:
            if family is not StatFamily.Z or tag is not DesignTag.CORRELATION_Z:
                raise ParseError(
                    f"row {row_no}: rho entry requires test=z, design=correlation_z"
                )
            if n is None:
                raise ParseError(f"row {row_no}: rho entry requires n")
            statistic = fisher_z(rho, n, sided) if sided else fisher_z(rho, n)
        elif family in (StatFamily.Z, StatFamily.T):
            if sided is None:
                raise ParseError(f"row {row_no}: z/t rows require 'sided'")
            statistic = TestStatistic(
                family, stat, sided, nu=_opt_float(row, "nu", row_no)
            )
        else:
            statistic = TestStatistic(
                family,
                stat,
                k=_opt_float(row, "k", row_no),
                m=_opt_float(row, "m", row_no),
            )
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"row {row_no}: {exc}")
    return statistic, design


def load_studies(path: str) -> StudySet:
    """Read a study table (CSV, or JSON when the extension is .json)."""
    if path.endswith(".json"):
        with open(path, encoding="utf-8") as fh:
            try:
                rows = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON in {path}: {exc}")
        if not isinstance(rows, list):
            raise ParseError(f"{path}: expected a JSON list of row objects")
        pairs = [_study_from_row(row, i + 1) for i, row in enumerate(rows)]
    else:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ParseError(f"{path}: empty file")
            unknown = set(reader.fieldnames) - set(_CSV_FIELDS)
            if unknown:
                raise ParseError(f"{path}: unknown columns {sorted(unknown)}")
            pairs = [
                _study_from_row(row, i + 2)  # header is line 1
                for i, row in enumerate(reader)
            ]
    if not pairs:
        raise ParseError(f"{path}: no study rows")
    try:
        return StudySet.build(pairs, label=os.path.basename(path))
    except ValueError as exc:
        raise ParseError(str(exc))


def _load_config() -> dict:
    path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read config {path}: {exc}")
    if not isinstance(cfg, dict):
        raise ParseError(f"config {path}: expected a JSON object")
    return cfg


def _policy_from_args(args) -> "FixedR | MmapR":
    if args.r is not None:
        return FixedR(args.r)
    return MmapR(args.r_max)


def cmd_point(args) -> int:
    studies = load_studies(args.file)
    if not args.omega > 0.0:
        raise ParseError(f"omega must be > 0, got {args.omega}")
    if args.r is not None:
        r_star = args.r
    else:
        res = mmap_r(studies, args.omega, args.r_max)
        r_star = res.r_star
        if res.at_boundary:
            print(f"# warning: r* at search boundary r_max={_fmt(args.r_max)}")
    per_study = per_study_log_bf(studies, args.omega, r_star)
    print(f"omega = {_fmt(args.omega)}")
    print(f"r = {_fmt(r_star)}" if args.r is not None else f"r_star = {_fmt(r_star)}")
    print(f"log_bf10 = {_fmt(sum(per_study))}")
    for i, value in enumerate(per_study):
        print(f"study {i}: log_bf10 = {_fmt(value)}")
    return 0


def _jeffreys_for(prior_family: str, k: float | None):
    if prior_family == "gamma":
        return lambda r: jeffreys_log_prior_gamma(r, k)
    return jeffreys_log_prior_nm


def summarize_rows(
    rows: list[tuple[float, float, float]],
    prior_family: str,
    k: float | None,
    policy_is_mmap: bool,
    levels: tuple[float, ...],
) -> list[str]:
    """Summary lines for a curve given its (omega, r_star, log_bf10) rows.

    Works from the printed row values only, so re-summarizing a parsed file
    reproduces the file's own summary byte for byte.  Crossings follow the
    objective curve (log BF plus the log Jeffreys prior at r_star) under an
    MMAP policy, the plain log-BF curve under fixed r.
    """
    omegas = np.array([r[0] for r in rows])
    rstars = np.array([r[1] for r in rows])
    logbf = np.array([r[2] for r in rows])
    if policy_is_mmap:
        jeffreys = _jeffreys_for(prior_family, k)
        objective = logbf + np.array([jeffreys(r) for r in rstars])
    else:
        objective = logbf
    best = int(np.argmax(logbf))
    lines = [
        f"# prior_family: {prior_family}" + (f" k={_fmt(k)}" if k is not None else ""),
        f"# policy: {'mmap' if policy_is_mmap else 'fixed'}",
        f"# omega_star: {_fmt(float(omegas[best]))}",
        f"# r_star_at_max: {_fmt(float(rstars[best]))}",
        f"# max_log_bf10: {_fmt(float(logbf[best]))}",
    ]
    for level in levels:
        above = np.nonzero(objective >= level)[0]
        if len(above) == 0 or above[-1] == len(objective) - 1:
            lines.append(f"# crossing level={_fmt(level)}: absent")
            continue
        j = int(above[-1])
        w = omegas[j] + (level - objective[j]) * (omegas[j + 1] - omegas[j]) / (
            objective[j + 1] - objective[j]
        )
        lines.append(f"# crossing level={_fmt(level)}: {_fmt(float(w))}")
    return lines


def parse_curve_file(path: str):
    """Parse a written curve CSV back into rows and summary metadata."""
    rows: list[tuple[float, float, float]] = []
    meta: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "omega,r_star,log_bf10":
            raise ParseError(f"{path}: unexpected curve header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = value.strip()
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}: bad curve row {line!r}")
            rows.append((float(parts[0]), float(parts[1]), float(parts[2])))
    return rows, meta


def cmd_curve(args) -> int:
    studies = load_studies(args.file)
    if args.omega_min > args.omega_max:
        raise ParseError(
            f"empty grid: omega-min {args.omega_min} > omega-max {args.omega_max}"
        )
    grid = EffectGrid.from_range(args.omega_min, args.omega_max, args.omega_step)
    policy = _policy_from_args(args)
    curve = bff_curve(studies, grid, policy)
    levels = tuple(args.levels)
    prior_family = "gamma" if studies.uses_gamma_prior else "normal_moment"
    k = studies.studies[0].stat.k if studies.uses_gamma_prior else None

    # round first, then summarize from the rounded values: re-parsing the
    # file and re-summarizing must reproduce the summary exactly
    rows = [
        (
            float(_fmt(p.omega)),
            float(_fmt(p.r_star)),
            float(_fmt(p.log_bf10)),
        )
        for p in curve.points
    ]
    summary = summarize_rows(rows, prior_family, k, isinstance(policy, MmapR), levels)
    out_lines = ["omega,r_star,log_bf10"]
    out_lines += [f"{_fmt(a)},{_fmt(b)},{_fmt(c)}" for a, b, c in rows]
    out_lines += summary
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(out_lines) + "\n")
    for line in summary:
        print(line)
    boundary = [p.omega for p in curve.points if p.at_r_boundary]
    if boundary:
        print(f"# warning: r* at search boundary for {len(boundary)} grid point(s)")
    return 0


def _validate_tuple_grid(family: str, count: int, rng) -> list[tuple]:
    """Randomized (statistic, tau_sq, r) tuples kept inside quadrature-friendly
    ranges, rejecting near-zero log BF so relative error is well defined."""
    from .priors import PriorFamily, PriorSpec

    out = []
    while len(out) < count:
        tau_sq = float(rng.uniform(0.05, 5.0))
        r = float(rng.uniform(1.0, 3.5))
        if family in ("z_one", "z_two"):
            stat_val = float(rng.uniform(-3.5, 3.5))
            sided = Sidedness.ONE_SIDED if family == "z_one" else Sidedness.TWO_SIDED
            stat = TestStatistic(StatFamily.Z, stat_val, sided)
            if family == "z_one":
                prior = PriorSpec(PriorFamily.NORMAL_MOMENT_POSITIVE, tau_sq, r)
            else:
                prior = PriorSpec(PriorFamily.NORMAL_MOMENT_TWO_SIDED, tau_sq, r)
        elif family in ("t_one", "t_two"):
            stat_val = float(rng.uniform(-3.5, 3.5))
            nu = float(rng.uniform(4.0, 60.0))
            sided = Sidedness.ONE_SIDED if family == "t_one" else Sidedness.TWO_SIDED
            stat = TestStatistic(StatFamily.T, stat_val, sided, nu=nu)
            if family == "t_one":
                prior = PriorSpec(PriorFamily.NORMAL_MOMENT_POSITIVE, tau_sq, r)
            else:
                prior = PriorSpec(PriorFamily.NORMAL_MOMENT_TWO_SIDED, tau_sq, r)
        elif family == "chisq":
            k = float(rng.integers(1, 8))
            stat = TestStatistic(StatFamily.CHI_SQ, float(rng.uniform(0.1, 25.0)), k=k)
            prior = PriorSpec(PriorFamily.GAMMA_NONLOCAL, tau_sq, r, k=k)
        elif family == "f":
            k = float(rng.integers(1, 8))
            m = float(rng.uniform(5.0, 120.0))
            stat = TestStatistic(StatFamily.F, float(rng.uniform(0.05, 12.0)), k=k, m=m)
            prior = PriorSpec(PriorFamily.GAMMA_NONLOCAL, tau_sq, r, k=k)
        else:
            raise ParseError(f"unknown validation family {family!r}")
        from .bayes_factors import log_bf10

        closed = log_bf10(stat, tau_sq, r)
        if abs(closed) < 0.05:
            continue  # relative comparison needs the log away from zero
        out.append((stat, prior, closed))
    return out


_VALIDATE_FAMILIES = {
    "z": ("z_one", "z_two"),
    "t": ("t_one", "t_two"),
    "chisq": ("chisq",),
    "f": ("f",),
}


def cmd_validate(args) -> int:
    from .oracle import marginal_bf_quadrature, rate_harness

    requested = [f.strip() for f in args.families.split(",") if f.strip()]
    for fam in requested:
        if fam not in _VALIDATE_FAMILIES:
            raise ParseError(f"unknown family {fam!r}; choose from z,t,chisq,f")
    checks = [c for fam in requested for c in _VALIDATE_FAMILIES[fam]]
    rng = np.random.default_rng(args.seed)
    all_pass = True
    for check in checks:
        tuples = _validate_tuple_grid(check, args.tuples, rng)
        max_rel = 0.0
        for stat, prior, closed in tuples:
            oracle_val = marginal_bf_quadrature(stat, prior)
            max_rel = max(max_rel, abs(closed - oracle_val) / abs(closed))
        ok = max_rel <= 1e-7
        all_pass &= ok
        print(
            f"check=oracle_{check} tuples={len(tuples)} "
            f"max_rel_err={max_rel:.3e} {'pass' if ok else 'FAIL'}"
        )
    if args.rate:
        fam_map = {
            "z": StatFamily.Z,
            "t": StatFamily.T,
            "chisq": StatFamily.CHI_SQ,
            "f": StatFamily.F,
        }
        for fam in requested:
            rep = rate_harness(
                fam_map[fam],
                r=1.0,
                beta=0.5,
                gamma=0.3,
                n_grid=[100, 1000, 10000],
                seed=args.seed,
                replicates=args.replicates,
            )
            slope_ok = abs(rep.h0_slope_vs_log_n - rep.h0_target_slope) <= 0.5
            h1_ok = all(d < 0 for d in np.diff([0.0, *rep.h1_median_log_bf01]))
            ok = slope_ok and h1_ok
            all_pass &= ok
            print(
                f"check=rate_{fam} h0_slope={rep.h0_slope_vs_log_n:.3f} "
                f"target={rep.h0_target_slope:.3f} "
                f"h1_decreasing={h1_ok} {'pass' if ok else 'FAIL'}"
            )
    print("overall " + ("pass" if all_pass else "FAIL"))
    return 0 if all_pass else 1


def _build_parser(config: dict) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bffkit",
        description="Bayes factor functions from z, t, chi-square, and F statistics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_policy(p):
        group = p.add_mutually_exclusive_group()
        group.add_argument("--r", type=float, default=None, help="fixed prior shape r >= 1")
        group.add_argument(
            "--mmap", action="store_true", help="maximize r by MMAP (default)"
        )
        p.add_argument(
            "--r-max",
            type=float,
            default=float(config.get("r_max", DEFAULT_R_MAX)),
            help="upper bound of the MMAP search on r",
        )

    p_point = sub.add_parser("point", help="combined log BF at one effect size")
    p_point.add_argument("--file", required=True)
    p_point.add_argument("--omega", type=float, required=True)
    add_policy(p_point)
    p_point.set_defaults(func=cmd_point)

    p_curve = sub.add_parser("curve", help="BFF curve over an effect-size grid")
    p_curve.add_argument("--file", required=True)
    p_curve.add_argument(
        "--omega-min", type=float, default=float(config.get("omega_min", 0.005))
    )
    p_curve.add_argument(
        "--omega-max", type=float, default=float(config.get("omega_max", 1.0))
    )
    p_curve.add_argument(
        "--omega-step", type=float, default=float(config.get("omega_step", 0.005))
    )
    add_policy(p_curve)
    p_curve.add_argument("--out", required=True, help="output CSV path")
    p_curve.add_argument(
        "--levels",
        type=lambda s: tuple(float(x) for x in s.split(",")),
        default=tuple(config.get("levels", DEFAULT_LEVELS)),
        help='log-BF reporting levels, e.g. "-1,-3,-5"',
    )
    p_curve.set_defaults(func=cmd_curve)

    p_val = sub.add_parser("validate", help="closed form vs quadrature oracle")
    p_val.add_argument("--families", default="z,t,chisq,f")
    p_val.add_argument("--tuples", type=int, default=50)
    p_val.add_argument("--seed", type=int, default=20240801)
    p_val.add_argument("--rate", action="store_true", help="also run the rate harness")
    p_val.add_argument("--replicates", type=int, default=500)
    p_val.set_defaults(func=cmd_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        config = _load_config()
        parser = _build_parser(config)
        args = parser.parse_args(argv)
        return args.func(args)
    except (ValueError, OSError) as exc:
        # ParseError and precondition violations are usage errors
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError) as exc:
        # non-convergence, quadrature failure, impossible brackets
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands: constants, verify-halfspace, verify-cone, rayleigh-sweep and
residuals.  Flags may also come from a flat ``key=value`` file given with
``--config``; flags on the command line win.

Exit codes: 0 success, 2 invalid parameters, 3 degenerate cone, 4 a report
with negative slack, 5 quadrature not converged, 6 non-monotone Rayleigh
sweep, 7 PDE residual above tolerance.
"""

import argparse
import csv
import io
import itertools
import json
import sys

import numpy as np

from .constants import ExtremalProfile, ProblemParams, SharpConstantReport, format_number, sharp_constant_cone, sharp_constant_report
from .errors import DegenerateCone, FinslerKatoError, ParameterError, QuadratureNotConverged
from .extremal import ExtremalSolution, residual_sweep
from .finsler import ProductNorm, parse_norm
from .quadrature import QuadratureSpec
from .testfunctions import cutoff_extremal, random_bump
from .verify import check_inequality_cone, check_inequality_halfspace, is_nonincreasing, rayleigh_sweep, reports_csv

EXIT_PARAM = 2
EXIT_DEGENERATE = 3
EXIT_VIOLATION = 4
EXIT_QUADRATURE = 5
EXIT_NONMONOTONE = 6
EXIT_RESIDUAL = 7

MONOTONE_BUDGET = 1e-9

DEFAULTS = {
    "N": "4",
    "beta": "2",
    "alpha": "0",
    "norm": "euclidean",
    "r_in": "0.25",
    "r_out": "4.5",
    "res": "64,32,32",
    "format": "csv",
    "out": None,
    "k_override": None,
    "seed": "0",
    "count": "5",
    "j_min": "1",
    "j_max": "4",
    "cutoff": "sine",
    "extremal": "1",
}


def _number_list(text, kind=float):
    try:
        return [kind(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ParameterError(f"cannot parse number list {text!r}") from exc


def _int_value(text, name):
    try:
        value = float(text)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"{name} must be an integer, got {text!r}") from exc
    if not value.is_integer():
        raise ParameterError(f"{name} must be an integer, got {text!r}")
    return int(value)


def load_config(path):
    """Flat ``key=value`` lines; ``#`` starts a comment; dashes equal underscores."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ParameterError(f"{path}:{lineno}: expected key=value")
            key = key.strip().replace("-", "_")
            if key not in DEFAULTS:
                raise ParameterError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = value.strip()
    return values


class RunConfig:
    """Validated settings shared by all subcommands."""

    def __init__(self, command, raw):
        self.command = command
        self.raw = raw
        n_values = [_int_value(v, "N") for v in _number_list(raw["N"], str)]
        betas = _number_list(raw["beta"])
        alphas = _number_list(raw["alpha"])
        if not n_values or not betas or not alphas:
            raise ParameterError("N, beta and alpha need at least one value each")
        self.params = [ProblemParams(n, b, a) for n, b, a in itertools.product(n_values, betas, alphas)]
        self.norms = {n: parse_norm(raw["norm"], n - 1) for n in sorted(set(n_values))}
        res = _number_list(raw["res"], str)
        if len(res) != 3:
            raise ParameterError(f"--res needs three integers nr,na,ns, got {raw['res']!r}")
        self.res = tuple(_int_value(v, "res") for v in res)
        try:
            radii = float(raw["r_in"]), float(raw["r_out"])
        except ValueError as exc:
            raise ParameterError(f"cannot parse truncation radii: {exc}") from exc
        self.quadrature = QuadratureSpec(*radii, *self.res)
        self.format = raw["format"]
        if self.format not in ("csv", "json"):
            raise ParameterError(f"--format must be csv or json, got {self.format!r}")
        self.out = raw["out"]
        self.k_override = raw["k_override"]
        self.seed = _int_value(raw["seed"], "seed")
        self.count = _int_value(raw["count"], "count")
        if self.count < 0:
            raise ParameterError("--count must be >= 0")
        self.j_min = _int_value(raw["j_min"], "j-min")
        self.j_max = _int_value(raw["j_max"], "j-max")
        self.cutoff = raw["cutoff"]
        if self.cutoff not in ("sine", "dyadic"):
            raise ParameterError(f"--cutoff must be sine or dyadic, got {self.cutoff!r}")
        self.extremal = raw["extremal"] not in ("0", "false", "no")

    def k_value(self, K):
        """--k-override as a number, or as a multiple of K when written like ``10K``."""
        text = str(self.k_override).strip()
        try:
            if text.upper().endswith("K"):
                factor = text[:-1].strip().rstrip("*")
                return (float(factor) if factor else 1.0) * K
            return float(text)
        except ValueError as exc:
            raise ParameterError(f"cannot parse --k-override {text!r}") from exc


def _emit(config, rows, fields):
    if config.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in fields})
        text = buf.getvalue()
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_ready(row):
    out = {}
    for key, value in row.items():
        try:
            number = float(value)
        except (TypeError, ValueError):
            out[key] = value
            continue
        out[key] = int(number) if key in ("N", "j") else number
    return out


def cmd_constants(config):
    try:
        reports = [sharp_constant_report(p) for p in config.params]
    except DegenerateCone as exc:
        _fail(exc)
        return EXIT_DEGENERATE
    rows = [r.row() for r in reports]
    if config.format == "json":
        rows = [_json_ready(r) for r in rows]
    _emit(config, rows, SharpConstantReport.FIELDS)
    return 0


def _suite(config, params, product):
    rng = np.random.default_rng(config.seed)
    members = [random_bump(product, rng) for _ in range(config.count)]
    if config.extremal:
        if params.alpha == 0.0:
            profile = ExtremalProfile.halfspace(params.N, params.beta)
        else:
            profile = ExtremalProfile.cone(params.N, params.beta, params.alpha)
        sol = ExtremalSolution(product, profile)
        members.append(cutoff_extremal(sol, 1e-2, 1e2, config.cutoff))
    return members


def _cmd_verify(config, cone):
    reports = []
    try:
        for params in config.params:
            product = ProductNorm(config.norms[params.N])
            for u in _suite(config, params, product):
                q = config.quadrature
                if u.support is not None:
                    q = QuadratureSpec(min(q.r_in, u.support[0]), max(q.r_out, u.support[1]), *config.res)
                k = None
                if config.k_override is not None:
                    k = config.k_value(sharp_constant_cone(params))
                if cone:
                    reports.append(check_inequality_cone(u, product, params.N, params.beta, params.alpha, q, k))
                else:
                    reports.append(check_inequality_halfspace(u, product, params.N, params.beta, q, k))
    except QuadratureNotConverged as exc:
        _fail(exc)
        return EXIT_QUADRATURE
    except DegenerateCone as exc:
        _fail(exc)
        return EXIT_DEGENERATE
    if config.format == "json":
        _emit(config, [r.to_dict() for r in reports], None)
    else:
        _write_text(config, reports_csv(reports))
    bad = [r for r in reports if not r.holds]
    if bad:
        sys.stderr.write(f"{len(bad)} report(s) with slack below -error_estimate\n")
        return EXIT_VIOLATION
    return 0


def _write_text(config, text):
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_verify_halfspace(config):
    for p in config.params:
        if p.alpha != 0.0:
            raise ParameterError("verify-halfspace takes alpha = 0 only; use verify-cone")
    return _cmd_verify(config, cone=False)


def cmd_verify_cone(config):
    return _cmd_verify(config, cone=True)


def cmd_rayleigh_sweep(config):
    if config.j_max < config.j_min:
        raise ParameterError(f"empty sweep: j-min={config.j_min} > j-max={config.j_max}")
    if config.j_min < 1:
        raise ParameterError("j-min must be >= 1 so that r_j < R_j")
    js = range(config.j_min, config.j_max + 1)
    rows = []
    status = 0
    try:
        for p in config.params:
            sweep = rayleigh_sweep(config.norms[p.N], p.N, p.beta, js, p.alpha, config.cutoff, *config.res)
            if not is_nonincreasing([r.quotient for r in sweep], MONOTONE_BUDGET):
                status = EXIT_NONMONOTONE
            for r in sweep:
                row = {"N": p.N, "beta": format_number(p.beta), "alpha": format_number(p.alpha), **r.row()}
                rows.append(row)
    except QuadratureNotConverged as exc:
        _fail(exc)
        return EXIT_QUADRATURE
    fields = ("N", "beta", "alpha", "j", "r_j", "R_j", "quotient", "quotient_over_K")
    if config.format == "json":
        rows = [_json_ready(r) for r in rows]
    _emit(config, rows, fields)
    if status:
        sys.stderr.write("Rayleigh quotient column is not nonincreasing\n")
    return status


def cmd_residuals(config):
    rows = []
    failed = False
    grid_rho = np.linspace(0.5, 2.0, 10)
    grid_theta = np.linspace(0.1, 1.4, 10)
    for p in config.params:
        base = config.norms[p.N]
        sol = ExtremalSolution.halfspace(base, p.N, p.beta)
        rel = 1e-4 if base.family.value == "euclidean" else 1e-3
        for r in residual_sweep(sol, grid_rho, grid_theta, rel=rel):
            failed |= not r.passed
            rows.append(
                {
                    "N": p.N,
                    "beta": format_number(p.beta),
                    "rho": format_number(r.rho),
                    "theta": format_number(r.theta),
                    "residual": format_number(r.residual),
                    "tolerance": format_number(r.tolerance),
                    "pass": "true" if r.passed else "false",
                }
            )
    if config.format == "json":
        rows = [_json_ready(r) for r in rows]
    _emit(config, rows, ("N", "beta", "rho", "theta", "residual", "tolerance", "pass"))
    return EXIT_RESIDUAL if failed else 0


COMMANDS = {
    "constants": cmd_constants,
    "verify-halfspace": cmd_verify_halfspace,
    "verify-cone": cmd_verify_cone,
    "rayleigh-sweep": cmd_rayleigh_sweep,
    "residuals": cmd_residuals,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="finsler-kato", description="Sharp constants and checks of the Finsler trace-Hardy inequality.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value file; flags override it")
        p.add_argument("--N", dest="N", help="dimension(s), comma separated")
        p.add_argument("--beta", help="weight(s), comma separated")
        p.add_argument("--alpha", help="cone angle(s) in radians, comma separated")
        p.add_argument("--norm", help="euclidean | pnorm:<p> | quad:<row-major entries> | diag:<entries>")
        p.add_argument("--r-in", dest="r_in", help="inner truncation radius")
        p.add_argument("--r-out", dest="r_out", help="outer truncation radius")
        p.add_argument("--res", help="resolutions nr,na,ns")
        p.add_argument("--format", help="csv or json")
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--k-override", dest="k_override", help="replace the constant, e.g. 0.7 or 10K")
        p.add_argument("--seed", help="seed of the random bump suite")
        p.add_argument("--count", help="number of random bumps per parameter set")
        p.add_argument("--j-min", dest="j_min", help="first sweep index")
        p.add_argument("--j-max", dest="j_max", help="last sweep index")
        p.add_argument("--cutoff", help="sine or dyadic")
        p.add_argument("--extremal", help="1 to add a cutoff extremal to the verify suite, 0 to skip")
    return parser


def _fail(exc):
    code = getattr(exc, "code", "ERROR")
    message = str(exc).replace("\n", " ")
    sys.stderr.write(f"error: {code}: {message}\n")


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        raw = dict(DEFAULTS)
        if args.config:
            try:
                raw.update(load_config(args.config))
            except OSError as exc:
                raise ParameterError(f"cannot read config: {exc}") from exc
        for key in DEFAULTS:
            value = getattr(args, key, None)
            if value is not None:
                raw[key] = value
        config = RunConfig(args.command, raw)
        return COMMANDS[args.command](config)
    except ParameterError as exc:
        _fail(exc)
        return EXIT_PARAM
    except FinslerKatoError as exc:
        _fail(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

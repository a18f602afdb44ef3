"""longmem command-line interface.

Subcommands: simulate, figure, rate-table, lowerbound. Every CSV carries a
'#' provenance header (version, resolved configuration, seed).

Exit status: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from .. import __version__, lowerbound, models, rates, simulate
from ..errors import DomainError, NumericalError
from ..svclass import Envelope
from . import csvio, figures

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4

DEFAULTS = {
    "model": "arfima0d0", "d": 0.4, "sigma2": 1.0, "tau2": 1.0, "alpha": 0.0,
    "n": 1000, "seed": 0, "reps": 1,
    "m_min": 10, "m_max": 500, "m_step": 1, "m": None,
    "envelope": "log_inverse", "rho": 1.0, "beta": 1.0, "c": 1.0,
    "ell": 1.0, "tau": 0.5, "ns": "",
    "out_dir": ".", "svg": False, "threads": 1,
    "ell_sweep": False, "degenerate": False, "dump_lambdas": False,
}
SUBCOMMAND_DEFAULTS = {
    "lowerbound": {"n": 1024, "reps": 500},
}
INT_KEYS = {"n", "seed", "reps", "m_min", "m_max", "m_step", "m", "threads"}
FLOAT_KEYS = {"d", "sigma2", "tau2", "alpha", "rho", "beta", "c", "ell", "tau"}
BOOL_KEYS = {"svg", "ell_sweep", "degenerate", "dump_lambdas"}
ELL_GRID = (0.25, 0.5, 1.0, 2.0, 4.0)


@dataclass
class RunConfig:
    subcommand: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None

    def echo(self, keys):
        return {k: self.values[k] for k in keys}


def parse_int(text):
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text}")
    return int(v)


def _coerce(key, raw):
    if raw is None:
        return None
    if key in BOOL_KEYS:
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    try:
        if key in INT_KEYS:
            return parse_int(raw)
        if key in FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise DomainError(f"invalid value for {key}: {raw!r}") from None
    return str(raw).strip()


def read_config_file(path):
    """Plain-text ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            k = k.replace("-", "_")
            if k not in DEFAULTS:
                raise DomainError(f"{path}:{lineno}: unknown key {k!r}")
            out[k] = v
    return out


def resolve(args) -> RunConfig:
    """defaults < subcommand defaults < config file < command-line flags."""
    vals = dict(DEFAULTS)
    vals.update(SUBCOMMAND_DEFAULTS.get(args.command, {}))
    if getattr(args, "config", None):
        vals.update(read_config_file(args.config))
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            vals[k] = v
    vals = {k: _coerce(k, v) for k, v in vals.items()}
    cfg = RunConfig(args.command, vals)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.n is None or cfg.n < 1:
        raise DomainError("n must be positive")
    if cfg.reps < 1:
        raise DomainError("reps must be positive")
    if cfg.seed < 0:
        raise DomainError("seed must be non-negative")
    if cfg.threads < 1:
        raise DomainError("threads must be positive")
    if cfg.subcommand == "figure":
        if not 2 <= cfg.m_min <= cfg.m_max <= cfg.n // 2:
            raise DomainError(f"bandwidth range must satisfy 2 <= m_min <= m_max <= n/2 = {cfg.n // 2}")
        if cfg.m_step < 1:
            raise DomainError("m_step must be positive")
    out = cfg.out_dir
    os.makedirs(out, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise OSError(f"output directory {out!r} is not writable")


def build_model(cfg):
    kind = cfg.model
    if kind in ("arfima0d0", "arfima", "good"):
        return models.arfima(cfg.d, cfg.sigma2)
    if kind in ("arfima_noise", "medium"):
        return models.arfima_noise(cfg.d, cfg.sigma2, cfg.tau2)
    if kind == "horror":
        return models.horror()
    if kind == "generic_sv":
        return models.generic_sv(cfg.alpha, models.log_power_L(cfg.rho))
    raise DomainError(f"unknown model {kind!r}; choose arfima0d0, arfima_noise, horror or generic_sv")


def build_envelope(cfg):
    kind = cfg.envelope
    if kind == "power":
        return Envelope.power(cfg.c, cfg.beta)
    if kind == "log_inverse":
        return Envelope.log_inverse(cfg.rho)
    if kind in ("loglog_inverse", "loglog"):
        return Envelope.loglog_inverse()
    raise DomainError(f"unknown envelope {kind!r}; choose power, log_inverse or loglog_inverse")


def _model_keys(cfg):
    keys = ["model", "n", "reps"]
    if cfg.model in ("arfima0d0", "arfima", "good", "arfima_noise", "medium"):
        keys += ["d", "sigma2"]
    if cfg.model in ("arfima_noise", "medium"):
        keys.append("tau2")
    if cfg.model == "generic_sv":
        keys += ["alpha", "rho"]
    return keys


def _envelope_keys(cfg):
    keys = ["envelope"]
    if cfg.envelope == "power":
        keys += ["c", "beta"]
    elif cfg.envelope == "log_inverse":
        keys.append("rho")
    return keys


def _emit(path, text, header):
    csvio.write(path, text)
    for line in header:
        print(f"# {line}")
    print(path)


def cmd_simulate(cfg):
    model = build_model(cfg)
    gamma = models.autocovariance(model, cfg.n - 1)
    emb = simulate.build_embedding(gamma, cfg.n)
    X = simulate.sample_array(emb, cfg.n, cfg.seed, cfg.reps, workers=cfg.threads)
    header = csvio.provenance(dict(cfg.echo(_model_keys(cfg)), model_id=model.model_id), cfg.seed)
    cols = ["t"] + ([f"x{r}" for r in range(cfg.reps)] if cfg.reps > 1 else ["x"])
    rows = [[t + 1, *map(float, X[:, t])] for t in range(cfg.n)]
    name = f"simulate_{model.kind}_n{cfg.n}_seed{cfg.seed}.csv"
    path = os.path.join(cfg.out_dir, name)
    _emit(path, csvio.render(cols, rows, header), header)
    return [path]


def cmd_figure(cfg, name):
    b = figures.make_figure(name, n=cfg.n, seed=cfg.seed, m_min=cfg.m_min, m_max=cfg.m_max,
                            step=cfg.m_step, svg_out=cfg.svg, d=cfg.d, sigma2=cfg.sigma2,
                            tau2=cfg.tau2)
    stem = os.path.join(cfg.out_dir, f"figure_{name}_n{cfg.n}_seed{cfg.seed}")
    paths = [stem + ".csv"]
    header = csvio.provenance(b.metadata, cfg.seed)
    _emit(paths[0], b.csv_text, header)
    if b.svg_text is not None:
        # the SVG carries the same provenance as an XML comment
        prov = "\n".join(f"<!-- {line} -->" for line in header)
        csvio.write(stem + ".svg", prov + "\n" + b.svg_text)
        paths.append(stem + ".svg")
        print(stem + ".svg")
    return paths


RATE_COLUMNS = ["n", "t_n", "rate", "m", "cond_stochastic", "cond_ratio",
                "cond_technical", "error"]


def parse_ns(text):
    text = (text or "").strip()
    if not text:
        return []
    try:
        ns = [float(s) for s in text.replace(";", ",").split(",") if s.strip()]
    except ValueError:
        raise DomainError(f"invalid n list {text!r}") from None
    if any(not v > 0 for v in ns):
        raise DomainError("sample sizes must be positive")
    return ns


def cmd_rate_table(cfg):
    env = build_envelope(cfg)
    ns = parse_ns(cfg.ns)
    rows = [[int(r.n) if float(r.n).is_integer() else r.n, r.t_n, r.rate, r.m,
             r.cond_stochastic, r.cond_ratio, r.cond_technical, r.error]
            for r in rates.rate_table(env, ns)]
    header = csvio.provenance(dict(cfg.echo(_envelope_keys(cfg)), ns=cfg.ns))
    path = os.path.join(cfg.out_dir, f"rate_table_{env.kind}.csv")
    _emit(path, csvio.render(RATE_COLUMNS, rows, header), header)
    return [path]


LB_COLUMNS = ["n", "ell", "tau", "reps", "m", "alpha_n", "mean_lambda", "var_lambda",
              "second_moment", "p_accept", "risk_floor", "gph_risk", "gph_risk_minus",
              "gph_risk_plus", "se_mean_lambda", "se_p_accept", "se_gph_risk"]


def run_lowerbound(cfg, ell, env):
    if cfg.degenerate:
        pair = lowerbound.degenerate_pair(cfg.n)
    else:
        pair = models.make_lower_bound_pair(cfg.n, ell, env)
    m = cfg.m if cfg.m is not None else rates.suggested_bandwidth(env, cfg.n)
    exp = lowerbound.TwoPointExperiment(pair, cfg.n, cfg.reps, cfg.seed, cfg.tau)
    return lowerbound.run_experiment(exp, m, keep_lambdas=cfg.dump_lambdas)


def cmd_lowerbound(cfg):
    env = build_envelope(cfg)
    ells = ELL_GRID if cfg.ell_sweep else (cfg.ell,)
    reports = [run_lowerbound(cfg, ell, env) for ell in ells]
    keys = ["n", "reps", "tau", "m", "ell", "ell_sweep", "degenerate"] + _envelope_keys(cfg)
    echo = cfg.echo(keys)
    echo["m"] = reports[0].m
    header = csvio.provenance(echo, cfg.seed)
    rows = [[r.to_row()[c] for c in LB_COLUMNS] for r in reports]
    tag = "sweep" if cfg.ell_sweep else f"ell{cfg.ell:g}"
    path = os.path.join(cfg.out_dir, f"lowerbound_{env.kind}_n{cfg.n}_{tag}_seed{cfg.seed}.csv")
    _emit(path, csvio.render(LB_COLUMNS, rows, header), header)
    paths = [path]
    if cfg.dump_lambdas:
        lam_rows = [[r.ell, i, float(v)] for r in reports for i, v in enumerate(r.lambdas)]
        lpath = path[:-4] + "_lambdas.csv"
        csvio.write(lpath, csvio.render(["ell", "replicate", "lambda"], lam_rows, header))
        paths.append(lpath)
    return paths


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value file; flags override it")
    common.add_argument("--n", type=parse_int, help="sample size")
    common.add_argument("--seed", type=parse_int)
    common.add_argument("--reps", type=parse_int, help="number of replicates")
    common.add_argument("--out-dir", dest="out_dir")
    common.add_argument("--threads", type=parse_int, help="worker cap")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--model", help="arfima0d0, arfima_noise, horror or generic_sv")
    model.add_argument("--d", type=float, help="memory parameter, |d| < 1/2")
    model.add_argument("--sigma2", type=float)
    model.add_argument("--tau2", type=float, help="noise variance (arfima_noise)")
    model.add_argument("--alpha", type=float, help="memory parameter (generic_sv)")

    env = argparse.ArgumentParser(add_help=False)
    env.add_argument("--envelope", help="power, log_inverse or loglog_inverse")
    env.add_argument("--rho", type=float)
    env.add_argument("--beta", type=float)
    env.add_argument("--c", type=float)

    p = argparse.ArgumentParser(prog="longmem", description="Long-memory estimation toolkit")
    p.add_argument("--version", action="version", version=f"longmem {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("simulate", parents=[common, model], help="simulate sample paths to CSV")

    f = sub.add_parser("figure", parents=[common, model], help="bandwidth scan figure")
    f.add_argument("name", choices=figures.FIGURES)
    f.add_argument("--m-min", dest="m_min", type=parse_int)
    f.add_argument("--m-max", dest="m_max", type=parse_int)
    f.add_argument("--m-step", dest="m_step", type=parse_int)
    f.add_argument("--svg", action="store_true", default=None, help="also write an SVG plot")

    r = sub.add_parser("rate-table", parents=[common, env], help="critical scale and rate per n")
    r.add_argument("--ns", help="comma-separated sample sizes, e.g. 1e3,1e4")

    lb = sub.add_parser("lowerbound", parents=[common, env], help="two-point Monte Carlo")
    lb.add_argument("--ell", type=float)
    lb.add_argument("--tau", type=float)
    lb.add_argument("--m", type=parse_int, help="GPH bandwidth (default: suggested)")
    lb.add_argument("--ell-sweep", dest="ell_sweep", action="store_true", default=None,
                    help="run the grid 1/4, 1/2, 1, 2, 4")
    lb.add_argument("--degenerate", action="store_true", default=None,
                    help="alpha_n = 0 pair (both hypotheses white noise)")
    lb.add_argument("--dump-lambdas", dest="dump_lambdas", action="store_true", default=None)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve(args)
        if args.command == "simulate":
            cmd_simulate(cfg)
        elif args.command == "figure":
            cmd_figure(cfg, args.name)
        elif args.command == "rate-table":
            cmd_rate_table(cfg)
        elif args.command == "lowerbound":
            cmd_lowerbound(cfg)
    except (DomainError, ValueError) as exc:
        print(f"longmem: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"longmem: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"longmem: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

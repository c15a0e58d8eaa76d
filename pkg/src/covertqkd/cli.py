"""Command-line interface: evaluators, sweeps, simulations, and oracle runs.

Subcommands: chi2, rate-sweep, covertness, simulate, verify, nogo.

Configuration comes from an INI-style file (sections [channel], [ppm],
[budgets], [cutoffs], [run]; unknown keys are rejected), selected by
--config or the COVERTQKD_CONFIG environment variable, and every value can
be overridden by a flag.  Identical config plus seed produces bit-identical
output files: floats are written with repr (shortest round trip), JSON keys
are sorted, and nothing emits timestamps.

Exit codes: 0 success, 2 validation error, 3 numerical non-convergence,
4 oracle failure.

Rate-sweep CSV columns: sweep_var, lambda1, log_h_bits, hmin_bits,
leak_ir_bits, pa_penalty_bits, net_key_bits, rate_per_symbol, eta, f_meas,
error.  Covertness CSV columns: ell, lambda1, log_h_bits, chi2, error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from covertqkd import figures, oracle
from covertqkd.fockcore import (
    CutoffError,
    LossyThermalChannel,
    coherent_ket,
    tensor,
    trace_distance,
    vacuum_ket,
)
from covertqkd.finitefield import FieldSpec, HashFunction, preimage
from covertqkd.infotheory import displaced_thermal_chi2_table
from covertqkd.protocol import (
    CovertnessBudget,
    NoGoInputs,
    PPMConfig,
    average_ppm_state,
    covertness_lambda1,
    covertness_log_h,
    nogo_max_key,
    probe_chi2_converged,
    protocol_state,
    rate_report,
    sub_blocks_for_target_lambda1,
)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_CONVERGENCE = 3
EXIT_ORACLE_FAILURE = 4

SWEEP_COLUMNS = (
    "sweep_var",
    "lambda1",
    "log_h_bits",
    "hmin_bits",
    "leak_ir_bits",
    "pa_penalty_bits",
    "net_key_bits",
    "rate_per_symbol",
    "eta",
    "f_meas",
    "error",
)

COVERTNESS_COLUMNS = ("ell", "lambda1", "log_h_bits", "chi2", "error")

CONFIG_SCHEMA = {
    "channel": ("tau_e", "nbar_e", "tau_n", "nbar_n", "alpha"),
    "ppm": ("sub_blocks", "m_x", "m_v"),
    "budgets": ("lambda2", "delta_pa", "eps_ir", "delta_smooth", "reconciliation_efficiency"),
    "cutoffs": ("fock", "env"),
    "run": ("seed", "output", "format", "printed_sign", "nats"),
}

CONFIG_ENV_VAR = "COVERTQKD_CONFIG"


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters; defaults follow the worked bosonic example."""

    tau_e: float = 0.9994
    nbar_e: float = 11.0
    tau_n: float = 0.99
    nbar_n: float = 0.01
    alpha: float = 0.6
    sub_blocks: int = 100
    m_x: int = 2
    m_v: int = 2
    lambda2: float = 1e-3
    delta_pa: float = 1e-6
    eps_ir: float = 1e-6
    delta_smooth: float = 1e-10
    reconciliation_efficiency: float = 1.0
    fock: int = 40
    env: int = 0
    seed: int = 20240801
    output: str = ""
    format: str = "csv"
    printed_sign: bool = False
    nats: bool = False

    def validate(self) -> "RunConfig":
        if not 0.0 <= self.tau_e <= 1.0 or not 0.0 <= self.tau_n <= 1.0:
            raise ValueError("transmissivities must lie in [0, 1]")
        if self.nbar_e < 0 or self.nbar_n < 0:
            raise ValueError("mean photon numbers must be >= 0")
        if self.fock < 2:
            raise ValueError("fock cutoff must be >= 2")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown output format {self.format!r}")
        PPMConfig(self.sub_blocks, self.m_x, self.m_v)
        CovertnessBudget(self.lambda2, self.delta_pa, self.eps_ir)
        return self

    def ppm(self) -> PPMConfig:
        return PPMConfig(self.sub_blocks, self.m_x, self.m_v)

    def budget(self) -> CovertnessBudget:
        return CovertnessBudget(self.lambda2, self.delta_pa, self.eps_ir)


def load_config_file(path: str) -> dict:
    """Parse the key=value config file; unknown sections or keys are errors."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ValueError(f"config file {path!r} not found")
    values: dict = {}
    for section in parser.sections():
        if section not in CONFIG_SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in CONFIG_SCHEMA[section]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            values[key] = raw
    return values


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw):
    kind = _FIELD_TYPES[name]
    if kind == "bool":
        if isinstance(raw, bool):
            return raw
        return str(raw).strip().lower() in ("1", "true", "yes", "on")
    if kind == "int":
        return int(str(raw), 0)
    if kind == "float":
        return float(raw)
    return str(raw)


def build_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if path:
        file_values = load_config_file(path)
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in file_values.items()})
    overrides = {}
    for name in _FIELD_TYPES:
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = _coerce(name, value)
    return replace(cfg, **overrides).validate()


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: str, columns, rows) -> None:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in columns))
    text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _write_json(path: str, payload) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def parse_grid(spec: str) -> list[float]:
    """Grid syntax: 'start:stop:count' (inclusive, linear) or comma list."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError("grid must be start:stop:count or a comma list")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("grid count must be >= 1")
        if count == 1:
            return [start]
        stepsize = (stop - start) / (count - 1)
        return [start + i * stepsize for i in range(count)]
    return [float(x) for x in spec.split(",") if x.strip()]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_chi2(cfg: RunConfig, args) -> int:
    """Convergence table for the probe-output chi-squared divergence."""
    beta = math.sqrt(cfg.tau_e) * cfg.alpha
    n_out = (1.0 - cfg.tau_e) * cfg.nbar_e
    if cfg.tau_e >= 1.0 and cfg.alpha != 0.0:
        sys.stdout.write(
            "support violation: the probe is the identity on pure inputs, "
            "chi2(E(alpha)||E(0)) is infinite\n"
        )
        return EXIT_OK
    rows, converged = displaced_thermal_chi2_table(
        beta, n_out, start=args.start, step=args.step,
        max_cutoff=args.max_cutoff, rel_tol=args.rel_tol,
    )
    # both argument orders: they coincide for this displaced-thermal pair
    # (equal photon-number spectra), which the generic evaluator confirms
    # at desk scale in the test suite
    table = [
        {"cutoff": c, "chi2_1_vs_0": v, "chi2_0_vs_1": v, "ln_one_plus_chi2": l}
        for c, v, l in rows
    ]
    payload = {
        "beta": beta,
        "n_out": n_out,
        "converged": converged,
        "rel_tol": args.rel_tol,
        "final_chi2": rows[-1][1],
        "final_ln_one_plus_chi2": rows[-1][2],
        "table": table,
    }
    if cfg.format == "json" or not cfg.output:
        header = f"chi2 convergence (beta={beta!r}, n_out={n_out!r})\n"
        sys.stdout.write(header)
        for r in table:
            sys.stdout.write(
                f"  cutoff={r['cutoff']:5d}  chi2={r['chi2_1_vs_0']!r}  "
                f"ln(1+chi2)={r['ln_one_plus_chi2']!r}\n"
            )
        sys.stdout.write(
            f"converged={converged} final_chi2={rows[-1][1]!r} "
            f"final_ln_one_plus_chi2={rows[-1][2]!r}\n"
        )
        if cfg.output:
            _write_json(cfg.output, payload)
    else:
        _write_csv(
            cfg.output,
            ("cutoff", "chi2_1_vs_0", "chi2_0_vs_1", "ln_one_plus_chi2"),
            table,
        )
    if not converged:
        sys.stderr.write(f"chi2 not converged by cutoff {args.max_cutoff}\n")
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def _sweep_point(cfg: RunConfig, var: str, value: float) -> tuple[dict, dict]:
    """Returns (flat CSV row, full structured report document) for one point."""
    point = {var: value}
    row = {c: "" for c in SWEEP_COLUMNS}
    row["sweep_var"] = value
    document: dict = {"sweep_var": value}
    try:
        rep = rate_report(
            cfg.ppm(),
            tau_e=point.get("tau_e", cfg.tau_e),
            nbar_e=point.get("nbar_e", cfg.nbar_e),
            tau_n=point.get("tau_n", cfg.tau_n),
            nbar_n=point.get("nbar_n", cfg.nbar_n),
            alpha=point.get("alpha", cfg.alpha),
            budget=cfg.budget(),
            delta_smooth=cfg.delta_smooth,
            reconciliation_efficiency=cfg.reconciliation_efficiency,
            cutoff=cfg.fock,
            printed_sign=cfg.printed_sign,
        )
        row.update(rep.as_flat_record())
        document.update(asdict(rep))
    except Exception as exc:  # per-point failures land in the error column
        message = f"{type(exc).__name__}: {exc}".replace(",", ";")
        row["error"] = message
        document["error"] = message
    return row, document


def cmd_rate_sweep(cfg: RunConfig, args) -> int:
    """One CSV row per grid point; failures recorded in the error column."""
    grid = parse_grid(args.grid)
    if not grid:
        raise ValueError("sweep grid is empty")
    if args.sweep_var not in ("tau_n", "nbar_n", "alpha", "tau_e", "nbar_e"):
        raise ValueError(f"unsupported sweep variable {args.sweep_var!r}")
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(lambda v: _sweep_point(cfg, args.sweep_var, v), grid))
    else:
        results = [_sweep_point(cfg, args.sweep_var, v) for v in grid]
    rows = [r for r, _ in results]
    if cfg.format == "json":
        _write_json(cfg.output, {"sweep_var": args.sweep_var,
                                 "reports": [doc for _, doc in results]})
    else:
        _write_csv(cfg.output, SWEEP_COLUMNS, rows)
    if args.figure:
        if not cfg.output or cfg.format != "csv":
            raise ValueError("--figure requires csv format with an output path")
        skipped = figures.render_rate_figure(cfg.output, args.figure)
        if skipped:
            sys.stderr.write(f"figure: skipped {skipped} error rows\n")
    return EXIT_OK


def cmd_covertness(cfg: RunConfig, args) -> int:
    """lambda1 and required coordination bits over a sub-block grid."""
    grid = [int(x) for x in parse_grid(args.ell_grid)]
    chi2 = probe_chi2_converged(cfg.tau_e, cfg.nbar_e, cfg.alpha)
    if args.target_lambda1 is not None:
        sized = sub_blocks_for_target_lambda1(
            cfg.m_x * cfg.m_v, chi2, args.target_lambda1
        )
        sys.stderr.write(
            f"sub-blocks meeting lambda1 <= {args.target_lambda1!r}: {sized}\n"
        )
    rows = []
    for ell in grid:
        row = {c: "" for c in COVERTNESS_COLUMNS}
        row["ell"] = ell
        row["chi2"] = chi2
        try:
            ppm = PPMConfig(ell, cfg.m_x, cfg.m_v)
            row["lambda1"] = covertness_lambda1(ppm, chi2)
            row["log_h_bits"] = covertness_log_h(ppm, chi2, cfg.lambda2, nats=cfg.nats)
        except Exception as exc:
            row["error"] = f"{type(exc).__name__}: {exc}".replace(",", ";")
        rows.append(row)
    if cfg.format == "json":
        _write_json(cfg.output, {"chi2": chi2, "rows": rows})
    else:
        _write_csv(cfg.output, COVERTNESS_COLUMNS, rows)
    if args.figure:
        if not cfg.output or cfg.format != "csv":
            raise ValueError("--figure requires csv format with an output path")
        figures.render_covertness_figure(cfg.output, args.figure)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    """Desk-scale protocol assembly with measured covertness distances."""
    ppm = cfg.ppm()
    probe = LossyThermalChannel(cfg.tau_e, cfg.nbar_e, cfg.fock, cfg.env)
    idle = vacuum_ket(cfg.fock)
    nonidle = coherent_ket(cfg.alpha, cfg.fock, allow_truncation=True)
    avg = average_ppm_state(ppm, probe, idle, nonidle, allow_truncation=True)
    rho0 = probe.apply(idle.density(), allow_truncation=True)
    idle_n = tensor(*[rho0] * ppm.n)

    if args.full_codebook:
        sigma = avg
        codebook_info = {"full_codebook": True, "h": ppm.m_v ** ppm.sub_blocks}
    else:
        spec = FieldSpec(*_field_params(ppm.m_v), ppm.sub_blocks)
        rng = np.random.default_rng(cfg.seed)
        nonzero = [u for u in spec.all_vectors() if any(s != 0 for s in u)]
        u = nonzero[int(rng.integers(len(nonzero)))]
        k = args.hash_k
        z = tuple(int(rng.integers(ppm.m_v)) for _ in range(k))
        book = preimage(HashFunction(spec, u, k), z)
        sigma = protocol_state(ppm, probe, idle, nonidle, book, allow_truncation=True)
        codebook_info = {
            "full_codebook": False,
            "u": list(u),
            "z": list(z),
            "k": k,
            "h": book.h,
        }
        if args.codebook_out:
            with open(args.codebook_out, "w") as fh:
                fh.write(book.to_text())

    chi2 = probe_chi2_converged(cfg.tau_e, cfg.nbar_e, cfg.alpha)
    lam1 = covertness_lambda1(ppm, chi2)
    payload = {
        "config": {"sub_blocks": ppm.sub_blocks, "m_x": ppm.m_x, "m_v": ppm.m_v,
                   "fock": cfg.fock, "seed": cfg.seed},
        "codebook": codebook_info,
        "resolvability_distance": trace_distance(sigma, avg),
        "covertness_distance": trace_distance(sigma, idle_n),
        "ppm_average_distance": trace_distance(avg, idle_n),
        "lambda1": lam1,
        "pinsker_bound_full_norm": 2.0 * lam1,
    }
    _write_json(cfg.output, payload)
    return EXIT_OK


def _field_params(m_v: int) -> tuple[int, int]:
    """Decompose m_v into (prime, extension degree); errors when not a prime power."""
    for p in range(2, m_v + 1):
        if m_v % p == 0:
            e = 0
            rest = m_v
            while rest % p == 0:
                rest //= p
                e += 1
            if rest != 1:
                raise ValueError(f"m_v={m_v} is not a prime power")
            return p, e
    raise ValueError(f"m_v={m_v} is not a prime power")


def cmd_verify(cfg: RunConfig, args) -> int:
    """Run the oracle suite; nonzero exit when any check fails."""
    results = oracle.run_all(seed=cfg.seed)
    report = oracle.format_report(results)
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(report)
    sys.stdout.write(report)
    return EXIT_OK if all(r.passed for r in results) else EXIT_ORACLE_FAILURE


def cmd_nogo(cfg: RunConfig, args) -> int:
    """Key-length ceiling when the adversary fully controls the channel."""
    ng = NoGoInputs(args.eps, args.delta, args.mu, args.log_dim_c)
    bound = nogo_max_key(ng)
    payload = {
        "eps": args.eps,
        "delta": args.delta,
        "mu": args.mu,
        "log_dim_c": args.log_dim_c,
        "max_key_bits": bound,
        "unbounded": math.isinf(bound),
    }
    _write_json(cfg.output, payload)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_config_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--config", help=f"config file (also env {CONFIG_ENV_VAR})")
    groups = {
        "channel params": ("tau_e", "nbar_e", "tau_n", "nbar_n", "alpha"),
        "ppm params": ("sub_blocks", "m_x", "m_v"),
        "budgets": ("lambda2", "delta_pa", "eps_ir", "delta_smooth",
                    "reconciliation_efficiency"),
        "cutoffs": ("fock", "env"),
        "run": ("seed", "output", "format", "printed_sign", "nats"),
    }
    for title, names in groups.items():
        grp = sub.add_argument_group(title)
        for name in names:
            grp.add_argument(f"--{name.replace('_', '-')}", dest=name, default=None)


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertqkd",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("chi2", help="probe chi-squared convergence table")
    p.add_argument("--start", type=int, default=8)
    p.add_argument("--step", type=int, default=8)
    p.add_argument("--max-cutoff", type=int, default=32768)
    p.add_argument("--rel-tol", type=float, default=1e-4)
    _add_config_flags(p)
    p.set_defaults(func=cmd_chi2)

    p = subs.add_parser("rate-sweep", help="rate report over a parameter grid (CSV)")
    p.add_argument("--sweep-var", default="tau_n",
                   help="tau_n | nbar_n | alpha | tau_e | nbar_e")
    p.add_argument("--grid", required=True, help="start:stop:count or comma list")
    p.add_argument("--figure", default="", help="render the rate figure to this path")
    p.add_argument("--jobs", type=int, default=1)
    _add_config_flags(p)
    p.set_defaults(func=cmd_rate_sweep)

    p = subs.add_parser("covertness", help="lambda1 and log h over a sub-block grid")
    p.add_argument("--ell-grid", required=True, help="start:stop:count or comma list")
    p.add_argument("--figure", default="", help="render the covertness figure to this path")
    p.add_argument("--target-lambda1", type=float, default=None,
                   help="also report the block count sized to this lambda1")
    _add_config_flags(p)
    p.set_defaults(func=cmd_covertness)

    p = subs.add_parser("simulate", help="desk-scale protocol + covertness measurement")
    p.add_argument("--full-codebook", action="store_true")
    p.add_argument("--hash-k", type=int, default=1)
    p.add_argument("--codebook-out", default="")
    _add_config_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = subs.add_parser("verify", help="run all oracle checks")
    _add_config_flags(p)
    p.set_defaults(func=cmd_verify)

    p = subs.add_parser("nogo", help="full-control key-length ceiling")
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--log-dim-c", type=float, default=0.0)
    _add_config_flags(p)
    p.set_defaults(func=cmd_nogo)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (ValueError, CutoffError) as exc:
        sys.stderr.write(f"configuration error: {exc}\n")
        return EXIT_VALIDATION
    try:
        return args.func(cfg, args)
    except (ValueError, CutoffError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_VALIDATION
    except RuntimeError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_NO_CONVERGENCE


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``chensieve {tables,constant,scan,empirical,omega}``.

Settings are resolved as defaults < config file (``--config``, key=value) <
environment (``CHENSIEVE_<KEY>``) < explicit flags.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, fields, replace

from .errors import ConvergenceError, DomainError, ResourceError

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_USAGE = 64
EXIT_NUMERIC = 70
ENV_PREFIX = "CHENSIEVE_"
FORMATS = ("json", "csv", "text")


@dataclass(frozen=True)
class RunConfig:
    tol: float = 1.0            # multiplier on the per-dimension default tolerances
    omega_step: float = 1e-3
    omega_u_max: float = 20.0
    pmax: int = 10**6
    format: str = "json"
    exact_omega: bool = False
    seeds: str = ""             # optional JSON file {"2": H(s_2), ..., "10": H(s_10)}

    def __post_init__(self):
        if not (self.tol > 0 and self.omega_step > 0 and self.omega_u_max > 3):
            raise DomainError("tolerances and omega grid settings must be positive")
        if self.format not in FORMATS:
            raise DomainError(f"format must be one of {', '.join(FORMATS)}")
        if self.pmax < 1000:
            raise DomainError("pmax must be at least 1000")


def _coerce(name, text):
    kind = {f.name: f.type for f in fields(RunConfig)}[name]
    if kind == "bool":
        return str(text).strip().lower() in ("1", "true", "yes", "on")
    if kind == "int":
        return int(float(text))
    if kind == "float":
        return float(text)
    return str(text).strip()


def parse_config_text(text: str) -> dict:
    out = {}
    names = {f.name for f in fields(RunConfig)}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line {n}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_").lower()
        if key not in names:
            raise DomainError(f"config line {n}: unknown key {key!r}")
        out[key] = _coerce(key, val)
    return out


def resolve_config(path: str | None = None, env=None, **overrides) -> RunConfig:
    env = os.environ if env is None else env
    values = {}
    if path:
        with open(path) as fh:
            values.update(parse_config_text(fh.read()))
    for f in fields(RunConfig):
        key = ENV_PREFIX + f.name.upper()
        if key in env:
            values[f.name] = _coerce(f.name, env[key])
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        if "invalid choice" in message or "required: command" in message:
            self.print_usage(sys.stderr)
            self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")
        super().error(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chensieve", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="key=value settings file")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, formats=FORMATS):
        sp.add_argument("--format", choices=formats, help="output format")
        sp.add_argument("--out", help="write output to this file instead of stdout")

    t = sub.add_parser("tables", help="regenerate the H and h lower-bound tables")
    common(t, ("json", "csv"))
    t.add_argument("--seeds", help="JSON file of seed values H(s_2)..H(s_10)")

    c = sub.add_parser("constant", help="evaluate all terms and the final constant")
    common(c, ("json", "text"))
    c.add_argument("--kappa1-inv", type=float, default=None, help="1/kappa1 (default 13.27)")
    c.add_argument("--kappa2-inv", type=float, default=None, help="1/kappa2 (default 8.24)")
    c.add_argument("--kappa1", type=float, default=None, help="kappa1 as a decimal")
    c.add_argument("--kappa2", type=float, default=None, help="kappa2 as a decimal")
    c.add_argument("--tol", type=float, default=None, help="scale factor on default tolerances")
    c.add_argument("--exact-omega", action="store_true", default=None,
                   help="use Buchstab's omega without the 0.561522 cap")
    c.add_argument("--no-savings", action="store_true", help="zero every double-sieve saving")
    c.add_argument("--seeds", help="JSON file of seed values H(s_2)..H(s_10)")

    s = sub.add_parser("scan", help="rank the constant over a grid of (1/kappa1, 1/kappa2)")
    common(s, ("csv", "json"))
    s.add_argument("--grid", required=True, help="CSV of inverse-kappa pairs")
    s.add_argument("--tol", type=float, default=None, help="scale factor on default tolerances")

    e = sub.add_parser("empirical", help="brute-force D(N), D12(N), Theta(N) report")
    common(e, ("csv", "json"))
    e.add_argument("--n-max", type=int, default=10**6, help="largest N (default 10^6)")
    e.add_argument("--step", type=int, default=None,
                   help="N runs over step, 2*step, ..., n-max (default: powers of ten)")
    e.add_argument("--pmax", type=int, default=None, help="singular-series truncation")

    o = sub.add_parser("omega", help="evaluate Buchstab's omega")
    common(o, ("json", "csv", "text"))
    o.add_argument("--u", type=float, nargs="+", required=True, help="arguments u >= 1")
    o.add_argument("--step", type=float, default=None, help="grid step (default 1e-3)")
    o.add_argument("--u-max", type=float, default=None, help="grid extent (default 20)")
    return p


def _load_seeds(path):
    from .bound_tables import SEEDS
    if not path:
        return SEEDS
    with open(path) as fh:
        data = json.load(fh)
    return {int(k): float(v) for k, v in data.items()}


def _cmd_tables(args, cfg):
    from .bound_tables import BoundTable
    table = BoundTable.build(_load_seeds(cfg.seeds))
    return table.to_csv() if cfg.format == "csv" else table.to_json() + "\n"


def _format_terms(terms, fmt):
    if fmt == "json":
        return terms.to_json() + "\n"
    lines = [f"{'term':<6}{'value':>14}{'main':>14}{'saving':>12}"]
    for i in sorted(terms.F):
        saving = terms.G.get(i, 0.0)
        lines.append(f"F{i:<5}{terms.F[i]:>14.6f}{terms.main(i):>14.6f}{saving:>12.6f}")
    lines.append(f"final {terms.final:>14.6f}")
    return "\n".join(lines) + "\n"


def _cmd_constant(args, cfg):
    from .constant_engine import KappaParams, compute_terms, REFERENCE_KAPPA1_INV, REFERENCE_KAPPA2_INV
    k1 = args.kappa1 if args.kappa1 is not None else 1.0 / (args.kappa1_inv or REFERENCE_KAPPA1_INV)
    k2 = args.kappa2 if args.kappa2 is not None else 1.0 / (args.kappa2_inv or REFERENCE_KAPPA2_INV)
    from .bound_tables import BoundTable
    params = KappaParams(k1, k2, omega_cap_mode=not cfg.exact_omega)
    table = BoundTable.build(_load_seeds(cfg.seeds))
    terms = compute_terms(params, table, double_sieve=not args.no_savings, tol_scale=cfg.tol)
    return _format_terms(terms, "json" if cfg.format == "csv" else cfg.format)


def _read_grid(path):
    pairs = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].strip().startswith("#"):
                continue
            try:
                a, b = float(row[0]), float(row[1])
            except ValueError:
                continue          # header
            pairs.append((a, b))
    return pairs


def _cmd_scan(args, cfg):
    from .constant_engine import scan
    pairs = _read_grid(args.grid)
    res = scan([(1.0 / a, 1.0 / b) for a, b in pairs], tol_scale=cfg.tol)
    for (k1, k2), why in res.skipped:
        print(f"skipped 1/kappa1={1 / k1:.6g}, 1/kappa2={1 / k2:.6g}: {why}", file=sys.stderr)
    rows = [(1 / p.kappa1, 1 / p.kappa2, v) for p, v in res.ranked]
    if cfg.format == "json":
        return json.dumps([{"kappa1_inv": a, "kappa2_inv": b, "final": v} for a, b, v in rows],
                          indent=2) + "\n"
    out = ["rank,kappa1_inv,kappa2_inv,final"]
    out += [f"{r},{a:.10g},{b:.10g},{v:.10g}" for r, (a, b, v) in enumerate(rows, 1)]
    return "\n".join(out) + "\n"


def _cmd_empirical(args, cfg):
    import io
    from .empirical import empirical_report, write_report_csv
    if args.n_max < 4:
        raise DomainError("n-max must be at least 4")
    if args.step:
        if args.step < 2 or args.step % 2:
            raise DomainError("step must be an even integer >= 2")
        Ns = [n for n in range(args.step, args.n_max + 1, args.step) if n >= 4]
    else:
        Ns, n = [], 10
        while n <= args.n_max:
            Ns.append(n)
            n *= 10
    rows = empirical_report(Ns, cfg.pmax)
    if cfg.format == "json":
        from dataclasses import asdict
        return json.dumps([asdict(r) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    write_report_csv(rows, buf)
    return buf.getvalue()


def _cmd_omega(args, cfg):
    from .special_functions import buchstab_omega, omega_grid
    grid = omega_grid(cfg.omega_step, cfg.omega_u_max)
    vals = [(u, float(buchstab_omega(u, grid))) for u in args.u]
    if cfg.format == "json":
        return json.dumps([{"u": u, "omega": w} for u, w in vals]) + "\n"
    if cfg.format == "csv":
        return "u,omega\n" + "".join(f"{u:.10g},{w:.10g}\n" for u, w in vals)
    return "".join(f"{w:.7f}\n" for _, w in vals)


_COMMANDS = {"tables": _cmd_tables, "constant": _cmd_constant, "scan": _cmd_scan,
             "empirical": _cmd_empirical, "omega": _cmd_omega}
_DEFAULT_FORMAT = {"tables": "json", "constant": "json", "scan": "csv",
                   "empirical": "csv", "omega": "text"}


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        overrides = {
            "format": args.format,
            "tol": getattr(args, "tol", None),
            "exact_omega": getattr(args, "exact_omega", None),
            "pmax": getattr(args, "pmax", None),
            "omega_step": getattr(args, "step", None) if args.command == "omega" else None,
            "omega_u_max": getattr(args, "u_max", None),
            "seeds": getattr(args, "seeds", None),
        }
        cfg = resolve_config(args.config, **overrides)
        if args.format is None and "format" not in _explicit_format(args.config):
            cfg = replace(cfg, format=_DEFAULT_FORMAT[args.command])
        text = _COMMANDS[args.command](args, cfg)
    except (DomainError, ResourceError, ValueError, OSError) as e:
        print(f"chensieve: error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except ConvergenceError as e:
        print(f"chensieve: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def _explicit_format(config_path):
    found = {}
    if config_path and os.path.exists(config_path):
        with open(config_path) as fh:
            found.update(parse_config_text(fh.read()))
    if ENV_PREFIX + "FORMAT" in os.environ:
        found["format"] = os.environ[ENV_PREFIX + "FORMAT"]
    return found


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()

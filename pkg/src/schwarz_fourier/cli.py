"""Command-line front end: experiment tables as CSV and the invariant suites.

Exit codes: 0 success, 1 verification failure, 2 configuration or geometry
error, 3 non-convergence.
"""
from __future__ import annotations

import argparse
import configparser
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, dtd, geometry, kernels, schwarz, verify

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_DIVERGED = 0, 1, 2, 3

DEFAULT_EPSILON_N = (5, 10, 20, 30, 40, 60, 80)


class ConfigError(ValueError):
    pass


@dataclass
class CsvTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)
    provenance: list[str] = field(default_factory=list)
    footer: list[str] = field(default_factory=list)

    def add(self, *values):
        if len(values) != len(self.columns):
            raise ValueError("row length does not match the header")
        self.rows.append(list(values))

    def render(self) -> str:
        out = io.StringIO()
        for line in self.provenance:
            out.write(f"# {line}\n")
        out.write(",".join(self.columns) + "\n")
        for row in self.rows:
            out.write(",".join(_fmt(v) for v in row) + "\n")
        for line in self.footer:
            out.write(f"# {line}\n")
        return out.getvalue()


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9g}"
    return str(v)


# option table: name -> (type, help); every flag may also come from --config
OPTIONS = {
    "m": (float, "centre offset of disc B2"),
    "R": (float, "radius of disc B2"),
    "theta1": (str, "B1 intersection angle (contraction-sweep: range lo:hi)"),
    "theta2": (float, "B2 intersection angle"),
    "N": (str, "order, or comma list / lo:hi range where several are accepted"),
    "n1": (int, "node count on the circle of B1"),
    "n2": (int, "node count on the circle of B2"),
    "n2_factor": (float, "use n2 = factor * R * n1 rounded to even when n2 is not given"),
    "variant": (str, "exact | projection | interpolation"),
    "mode": (str, "additive | multiplicative"),
    "samples": (int, "samples along the arc (or theta1 values for contraction-sweep)"),
    "grid_only": (bool, "restrict interpolation profiles to grid nodes"),
    "tol": (float, "stopping tolerance on the interface update"),
    "max_sweeps": (int, "maximum number of Schwarz sweeps"),
    "seed": (int, "seed for random test vectors in verify"),
    "solution": (str, "manufactured solution: log_source | harmonic_polynomial"),
    "k": (int, "degree of the harmonic polynomial solution"),
    "x0": (str, "source point 'x,y' of the log solution"),
}


def _read_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"bad config {path}: {exc}") from exc
    values = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            name = key.replace("-", "_")
            if name not in OPTIONS:
                raise ConfigError(f"unknown config key {key!r}")
            values[name] = raw
    return values


def _convert(name: str, raw):
    typ = OPTIONS[name][0]
    if isinstance(raw, str) and typ is not str:
        if typ is bool:
            low = raw.strip().lower()
            if low not in ("1", "0", "true", "false", "yes", "no"):
                raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
            return low in ("1", "true", "yes")
        try:
            return typ(raw)
        except ValueError as exc:
            raise ConfigError(f"{name}: cannot parse {raw!r}") from exc
    return raw


def resolve(args: argparse.Namespace) -> dict:
    """Merge config file values with flags; flags win."""
    merged = _read_config(args.config) if getattr(args, "config", None) else {}
    for name in OPTIONS:
        v = getattr(args, name, None)
        if v is not None and v is not False:
            merged[name] = v
    return {k: _convert(k, v) for k, v in merged.items()}


def _int_list(text: str) -> list[int]:
    text = str(text)
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            return list(range(lo, hi + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad integer list {text!r}") from exc


def _single_N(cfg, default=None) -> int | None:
    if "N" not in cfg:
        return default
    values = _int_list(cfg["N"])
    if len(values) != 1:
        raise ConfigError("this command takes a single N")
    return values[0]


def _theta1_float(cfg) -> float | None:
    if "theta1" not in cfg:
        return None
    try:
        return float(cfg["theta1"])
    except ValueError as exc:
        raise ConfigError(f"bad theta1 {cfg['theta1']!r}") from exc


def _pair_from(cfg) -> geometry.DiscPair:
    has_md = "m" in cfg or "R" in cfg
    t1 = _theta1_float(cfg)
    has_angles = t1 is not None or "theta2" in cfg
    if has_md == has_angles:
        raise ConfigError("give either --m/--R or --theta1/--theta2")
    if has_md:
        if "m" not in cfg or "R" not in cfg:
            raise ConfigError("both --m and --R are required")
        return geometry.discs_from_angles(*geometry.angles_from_discs(cfg["m"], cfg["R"]))
    if t1 is None or "theta2" not in cfg:
        raise ConfigError("both --theta1 and --theta2 are required")
    return geometry.discs_from_angles(t1, cfg["theta2"])


def _grid_for(cfg, pair: geometry.DiscPair, N: int | None):
    n1 = cfg.get("n1") or (2 * (N + 1) if N is not None else None)
    if n1 is None:
        return None
    n2 = cfg.get("n2") or geometry.auto_n2(pair.R, n1, cfg.get("n2_factor", 1.0))
    return geometry.snap_to_grids(pair.theta1_star, pair.theta2_star, n1, n2)


def _provenance(command: str, cfg: dict, target: str) -> list[str]:
    echo = " ".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return [
        f"tool: schwarz-fourier {__version__}",
        f"command: {command}",
        f"config: {echo}" if echo else "config: (defaults)",
        f"target: {target}",
    ]


def _pair_lines(pair: geometry.DiscPair) -> list[str]:
    return [
        f"geometry: theta1_star={pair.theta1_star:.9g} theta2_star={pair.theta2_star:.9g} "
        f"m={pair.m:.9g} R={pair.R:.9g}"
    ]


def _snap_lines(sc: geometry.SnappedScenario) -> list[str]:
    return [
        f"snapped: n1={sc.n1} n2={sc.n2} ell1={sc.ell1} ell2={sc.ell2} "
        f"theta1_int={sc.theta1_int:.9g} theta2_int={sc.theta2_int:.9g}"
    ]


# commands ------------------------------------------------------------------


def cmd_geometry(cfg) -> tuple[CsvTable, int]:
    pair = _pair_from(cfg)
    sc = _grid_for(cfg, pair, None) if "n1" in cfg else None
    cols = ["theta1_star", "theta2_star", "m", "R", "C1", "degenerate"]
    if sc is not None:
        cols += ["n1", "n2", "ell1", "ell2", "theta1_int", "theta2_int", "C1_int"]
    table = CsvTable(cols, provenance=_provenance("geometry", cfg, "disc geometry and arc contraction constant"))
    row = [
        pair.theta1_star,
        pair.theta2_star,
        pair.m,
        pair.R,
        geometry.contraction_exact(pair.theta1_star, pair.theta2_star),
        pair.degenerate,
    ]
    if sc is not None:
        row += [sc.n1, sc.n2, sc.ell1, sc.ell2, sc.theta1_int, sc.theta2_int]
        row.append(geometry.contraction_exact(sc.theta1_int, sc.theta2_int))
    table.add(*row)
    if pair.degenerate:
        print("warning: degenerate geometry (coincident discs)", file=sys.stderr)
    return table, EXIT_OK


def cmd_epsilon_table(cfg) -> tuple[CsvTable, int]:
    Ns = _int_list(cfg["N"]) if "N" in cfg else list(DEFAULT_EPSILON_N)
    if min(Ns) < 4:
        raise ConfigError("epsilon-table needs N >= 4")
    table = CsvTable(
        ["N", "r_star", "epsilon", "bound"],
        provenance=_provenance("epsilon-table", cfg, "epsilon at the positivity radius and its closed-form bound"),
    )
    for N in Ns:
        rs = kernels.positivity_radius_theory(N)
        table.add(N, rs, kernels.epsilon_quadrature(N, rs), kernels.epsilon_bound(N))
    return table, EXIT_OK


def cmd_kernel_scan(cfg) -> tuple[CsvTable, int]:
    Ns = _int_list(cfg["N"]) if "N" in cfg else list(range(4, 101))
    if min(Ns) < 4 or max(Ns) > 200:
        raise ConfigError("kernel-scan needs N within [4, 200]")
    table = CsvTable(
        ["N", "delta_th", "delta_num", "inv_delta_th", "inv_delta_num", "q", "status"],
        provenance=_provenance("kernel-scan", cfg, "positivity distance of the truncated kernel, q(N)"),
    )
    for N in Ns:
        try:
            rep = kernels.positivity_radius_numeric(N)
        except kernels.ResolutionError as exc:
            dth = 1.0 - kernels.positivity_radius_theory(N)
            table.add(N, dth, None, 1.0 / dth, None, None, f"resolution error: {exc}")
            continue
        table.add(
            N, rep.delta_theory, rep.delta_numeric, 1.0 / rep.delta_theory, 1.0 / rep.delta_numeric, rep.q, "ok"
        )
    return table, EXIT_OK


def cmd_dtd_profile(cfg) -> tuple[CsvTable, int]:
    pair = _pair_from(cfg)
    variant = cfg.get("variant", "projection")
    samples = cfg.get("samples", 401)
    N = _single_N(cfg)
    prov = _provenance("dtd-profile", cfg, "interface map profile along Gamma2")
    prov += _pair_lines(pair)
    if variant == "exact":
        prof = dtd.dtd_exact_profile(pair, 1.0, samples)
        lo, hi = pair.gamma2
        thetas = np.concatenate([[lo], prof.thetas, [hi]])
        values = np.concatenate([[prof.endpoint_values[0]], prof.values, [prof.endpoint_values[1]]])
        radii = np.concatenate([[1.0], prof.radii, [1.0]])
        marks = np.zeros(thetas.size, dtype=bool)
    elif variant == "projection":
        if N is None:
            raise ConfigError("the projection profile needs --N")
        prof = dtd.dtd_projection_profile(pair, N, 1.0, samples)
        thetas, values, radii = prof.thetas, prof.values, prof.radii
        marks = np.zeros(thetas.size, dtype=bool)
    elif variant == "interpolation":
        if N is None and "n1" not in cfg:
            raise ConfigError("the interpolation profile needs --N or --n1")
        sc = _grid_for(cfg, pair, N)
        N = sc.n1 // 2 - 1
        prov += _snap_lines(sc)
        prof = dtd.interp_bound_profile(sc, samples, bool(cfg.get("grid_only", False)))
        thetas, values, radii, marks = prof.thetas, prof.values, prof.radii, prof.grid_marks
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    rs = kernels.positivity_radius_theory(N) if N is not None and N >= 4 else None
    table = CsvTable(["theta_tilde", "value", "r", "in_B1_plus", "is_grid_node"], provenance=prov)
    for t, v, r, g in zip(thetas, values, radii, marks):
        table.add(t, v, r, None if rs is None else bool(r <= rs), bool(g))
    return table, EXIT_OK


def _theta_range(cfg, R):
    rng_text = cfg.get("theta1")
    if rng_text is None:
        return (0.05, math.pi / 2 - 0.05) if R == 1.0 else (0.05, math.pi - 0.05)
    try:
        lo, hi = (float(x) for x in str(rng_text).split(":"))
    except ValueError as exc:
        raise ConfigError(f"contraction-sweep expects --theta1 lo:hi, got {rng_text!r}") from exc
    return lo, hi


def cmd_contraction_sweep(cfg) -> tuple[CsvTable, int]:
    R = cfg.get("R", 1.0)
    if R < 1.0:
        raise ConfigError("contraction-sweep needs R >= 1")
    Ns = _int_list(cfg["N"]) if "N" in cfg else [40]
    lo, hi = _theta_range(cfg, R)
    factor = cfg.get("n2_factor", 1.0)
    table = CsvTable(
        ["theta1_star", "N", "n1", "n2", "theta1_int", "theta2_int", "C_bound", "C_continuous", "C_int"],
        provenance=_provenance("contraction-sweep", cfg, "interpolation contraction bound versus theta1"),
    )
    for t1 in np.linspace(lo, hi, cfg.get("samples", 60)):
        for N in Ns:
            n1 = cfg.get("n1") or 2 * (N + 1)
            try:
                if R == 1.0:
                    sc = geometry.snap_symmetric(t1, n1)
                    cont = geometry.contraction_symmetric(t1)
                else:
                    t2 = math.pi - math.asin(math.sin(t1) / R)
                    n2 = cfg.get("n2") or geometry.auto_n2(R, n1, factor)
                    sc = geometry.snap_to_grids(t1, t2, n1, n2)
                    cont = geometry.contraction_unequal(t1, R)
            except geometry.GeometryError as exc:
                table.footer.append(f"skipped theta1={t1:.9g} N={N}: {exc}")
                continue
            table.add(
                t1,
                N,
                sc.n1,
                sc.n2,
                sc.theta1_int,
                sc.theta2_int,
                dtd.interp_contraction_bound(sc),
                cont,
                geometry.contraction_exact(sc.theta1_int, sc.theta2_int),
            )
    return table, EXIT_OK


def _solution(cfg, pair):
    kind = cfg.get("solution", "log_source")
    if kind == "log_source":
        raw = cfg.get("x0", "-1.5,0.5")
        try:
            x0 = tuple(float(v) for v in str(raw).split(","))
        except ValueError as exc:
            raise ConfigError(f"bad x0 {raw!r}") from exc
        if len(x0) != 2:
            raise ConfigError("x0 needs two coordinates")
        return schwarz.manufactured(kind, pair, x0=x0)
    return schwarz.manufactured(kind, pair, k=cfg.get("k", 2))


def cmd_schwarz_run(cfg) -> tuple[CsvTable, int]:
    pair = _pair_from(cfg)
    variant = cfg.get("variant", "exact")
    mode = cfg.get("mode", "additive")
    N = _single_N(cfg)
    prov = _provenance("schwarz-run", cfg, "Schwarz iteration convergence and contraction bounds")
    prov += _pair_lines(pair)
    c1 = geometry.contraction_exact(pair.theta1_star, pair.theta2_star)
    if variant == "interpolation":
        if N is None and "n1" not in cfg:
            raise ConfigError("the interpolation variant needs --N or --n1")
        scenario = _grid_for(cfg, pair, N)
        prov += _snap_lines(scenario)
        b1 = dtd.interp_contraction_bound(scenario, 1)
        b2 = dtd.interp_contraction_bound(scenario, 2)
        bound = max(b1, b2) if mode == "additive" else b1 * b2
        N = None
    else:
        scenario = pair
        bound = c1 if mode == "additive" else c1 * c1
    try:
        config = schwarz.SchwarzConfig(
            scenario,
            variant,
            mode,
            N=N,
            max_sweeps=cfg.get("max_sweeps", 100),
            tol=cfg.get("tol", 1e-8),
            trace_samples=cfg.get("samples", 101),
        )
    except (ValueError, geometry.GeometryError) as exc:
        raise ConfigError(str(exc)) from exc
    ms = _solution(cfg, config.pair)
    trace = schwarz.run(config, ms.trace, exact=ms.evaluator)
    table = CsvTable(
        ["sweep", "update", "update_gamma1", "update_gamma2", "error", "node_error", "ratio", "bound"],
        provenance=prov,
    )
    for i in range(trace.sweeps):
        ratio = trace.ratios[i - 1] if i > 0 else None
        table.add(
            i + 1,
            trace.updates[i],
            trace.updates_gamma1[i],
            trace.updates_gamma2[i],
            trace.errors[i],
            trace.node_errors[i],
            ratio,
            bound,
        )
    try:
        rate = schwarz.observed_rate(trace)
    except schwarz.InsufficientDataError:
        rate = None
    table.footer.append(f"observed_rate={_fmt(rate) or 'n/a'} bound={_fmt(bound)} C1={_fmt(c1)}")
    table.footer.append(f"converged={'true' if trace.converged else 'false'} sweeps={trace.sweeps}")
    return table, EXIT_OK if trace.converged else EXIT_DIVERGED


COMMANDS = {
    "geometry": cmd_geometry,
    "epsilon-table": cmd_epsilon_table,
    "kernel-scan": cmd_kernel_scan,
    "dtd-profile": cmd_dtd_profile,
    "contraction-sweep": cmd_contraction_sweep,
    "schwarz-run": cmd_schwarz_run,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="schwarz-fourier", description="Schwarz-Fourier domain decomposition experiments"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        for opt, (typ, help_) in OPTIONS.items():
            flag = "--" + opt.replace("_", "-")
            if typ is bool:
                p.add_argument(flag, action="store_true", default=None, help=help_)
            else:
                p.add_argument(flag, type=typ, default=None, help=help_)
        p.add_argument("--config", help="INI-like file with option values")
        p.add_argument("--out", help="write CSV here instead of stdout")
    p = sub.add_parser("verify")
    p.add_argument("suite", nargs="?", default="all", choices=(*verify.SUITES, "all"))
    p.add_argument("--seed", type=int, default=0)
    return parser


def _run_verify(args) -> int:
    results = verify.run_suite(args.suite, args.seed)
    for r in results:
        print(f"{'PASS' if r.ok else 'FAIL'} {r.suite}: {r.name} ({r.detail})")
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} invariants hold")
    return EXIT_OK if not failed else EXIT_VERIFY


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return _run_verify(args)
    try:
        cfg = resolve(args)
        table, code = COMMANDS[args.command](cfg)
    except (ConfigError, geometry.GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = table.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())

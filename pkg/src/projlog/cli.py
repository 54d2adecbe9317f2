"""Command-line front end.

    python3 -m projlog [common options] COMMAND [options]

Common options may appear before or after the command.  A JSON config file
(--config) supplies defaults for any RunConfig field; flags override it.
Invalid input exits with status 2 and a one-line diagnostic on stderr.
Output goes to --out (stdout by default) as CSV or JSON; grid rows are in
row-major order with the real part of z_1 varying slowest.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import io as pio
from .geometry import homog_from_chart
from .measures import MeasureError, dimension_estimate, dirac
from .potentials import PotentialField, atom_mass_diagnostic, eval_G, eval_U, eval_V, grad_norm, ma_density
from .quadrature import alpha_n, cma, mc_integrate_pn
from .riesz import critical_exponents, lp_threshold_probe
from .verify import SUITES, run_verify

COMMANDS = ("potential", "ma-density", "atom-scan", "riesz", "dimension", "exponents", "constants", "verify")
DERIVATIVE_COMMANDS = ("ma-density", "atom-scan")


class ConfigError(ValueError):
    """Invalid command-line or config-file input."""


@dataclass(frozen=True)
class RunConfig:
    command: str | None = None
    measure: str | None = None
    n: int | None = None
    eps: float = 0.0
    grid: str = "-2:2:41"
    radii: str | None = None
    alpha: float | None = None
    p_list: str = "1.5,3"
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    # command specific
    kind: str = "V"
    k: int | None = None
    point: str | None = None
    eps_list: str = "0.2,0.1,0.05"
    radius_factor: float = 10.0
    resolutions: str = "32,64,128"
    half_width: float | None = None
    max_centers: int = 2000
    gamma: float | None = None
    N: int | None = None
    samples: int = 100_000
    suite: str = "all"


CONFIG_FIELDS = {f.name for f in fields(RunConfig)} - {"command"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with RunConfig defaults")
    p.add_argument("--measure", default=S, help="measure file (JSON)")
    p.add_argument("--n", type=int, default=S, help="complex dimension (1, 2 or 3)")
    p.add_argument("--eps", type=float, default=S, help="regularization eps >= 0")
    p.add_argument("--grid", default=S, help="a:b:m, an m x m grid on [a,b]^2 in the z_1 plane")
    p.add_argument("--radii", default=S, help="lo:hi:num geometric radius grid")
    p.add_argument("--alpha", type=float, default=S, help="Riesz exponent")
    p.add_argument("--p-list", dest="p_list", default=S, help="comma-separated exponents p")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--out", default=S, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=S)


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = _Parser(prog="projlog", description="Projective logarithmic potentials toolkit")
    _common(parser)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sp = sub.add_parser("potential", help="U, V or G values on a grid")
    sp.add_argument("--kind", choices=("U", "V", "G"), default=S)
    sp = sub.add_parser("ma-density", help="Monge-Ampere / k-Hessian density on a grid")
    sp.add_argument("--k", type=int, default=S)
    sp = sub.add_parser("atom-scan", help="Monge-Ampere mass near a point as eps decreases")
    sp.add_argument("--point", default=S, help="interleaved re,im coordinates (default: heaviest atom)")
    sp.add_argument("--eps-list", dest="eps_list", default=S)
    sp.add_argument("--radius-factor", dest="radius_factor", type=float, default=S)
    sp = sub.add_parser("riesz", help="L^p refinement probe of the Riesz potential")
    sp.add_argument("--resolutions", default=S)
    sp.add_argument("--half-width", dest="half_width", type=float, default=S)
    sp = sub.add_parser("dimension", help="concentration dimension estimate")
    sp.add_argument("--max-centers", dest="max_centers", type=int, default=S)
    sp = sub.add_parser("exponents", help="critical integrability exponents")
    sp.add_argument("--gamma", type=float, default=S)
    sp.add_argument("--N", type=int, default=S, help="real ambient dimension (default 2n)")
    sp = sub.add_parser("constants", help="alpha_n and Monge-Ampere constants")
    sp.add_argument("--samples", type=int, default=S, help="Monte Carlo sample count")
    sp = sub.add_parser("verify", help="run property suites")
    sp.add_argument("--suite", default=S, help=f"one of {', '.join(SUITES + ('all',))}")
    for cmd in sub.choices.values():
        _common(cmd)
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            d = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON ({exc.msg})") from None
    if not isinstance(d, dict):
        raise ConfigError("config file must hold a JSON object")
    bad = set(d) - CONFIG_FIELDS
    if bad:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(bad))}")
    return d


def _floats(text, what: str) -> list[float]:
    items = text if isinstance(text, (list, tuple)) else str(text).split(",")
    try:
        vals = [float(t) for t in items if str(t).strip()]
    except ValueError:
        raise ConfigError(f"{what} must be comma-separated numbers") from None
    if not vals:
        raise ConfigError(f"{what} is empty")
    return vals


def parse_grid(text: str) -> tuple[float, float, int]:
    parts = str(text).split(":")
    try:
        a, b, m = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) != 3:
            raise ValueError
    except (ValueError, IndexError):
        raise ConfigError(f"grid must look like a:b:m, got {text!r}") from None
    if not a < b or m < 2:
        raise ConfigError("grid needs a < b and m >= 2")
    return a, b, m


def parse_radii(text: str) -> tuple[float, float, int]:
    parts = str(text).split(":")
    try:
        lo, hi, num = float(parts[0]), float(parts[1]), int(parts[2])
        if len(parts) != 3:
            raise ValueError
    except (ValueError, IndexError):
        raise ConfigError(f"radii must look like lo:hi:num, got {text!r}") from None
    if not 0 < lo < hi or num < 3:
        raise ConfigError("radii need 0 < lo < hi and num >= 3")
    return lo, hi, num


#: options whose values may begin with "-" (e.g. --grid -2:2:101)
_SIGNED_OPTIONS = ("--grid", "--point", "--eps-list", "--p-list")


def _join_signed(argv: list[str]) -> list[str]:
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in _SIGNED_OPTIONS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def parse_config(argv=None) -> RunConfig:
    """Parse flags, merge an optional config file beneath them, validate."""
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = vars(build_parser().parse_args(_join_signed(argv)))
    base = {}
    if "config" in ns:
        base = _load_config(ns.pop("config"))
    base.update({k: v for k, v in ns.items() if k != "command"})
    cfg = replace(RunConfig(), command=ns.get("command"), **base)
    return validate(cfg)


def validate(cfg: RunConfig) -> RunConfig:
    if cfg.command is None:
        raise ConfigError(f"missing command; choose from {', '.join(COMMANDS)}")
    if cfg.eps is None or not cfg.eps >= 0:
        raise ConfigError("eps must be >= 0")
    if cfg.command in DERIVATIVE_COMMANDS and not cfg.eps > 0:
        raise ConfigError("derivatives require eps > 0")
    if cfg.n is not None and cfg.n not in (1, 2, 3):
        raise ConfigError("n must be 1, 2 or 3")
    if cfg.format not in ("csv", "json"):
        raise ConfigError("format must be csv or json")
    if cfg.command in ("potential", "ma-density"):
        parse_grid(cfg.grid)
    if cfg.command == "potential" and cfg.kind not in ("U", "V", "G"):
        raise ConfigError("kind must be U, V or G")
    if cfg.command in ("potential", "ma-density", "atom-scan", "riesz", "dimension") and not cfg.measure:
        raise ConfigError(f"{cfg.command} needs --measure")
    if cfg.command == "dimension" and cfg.radii is None:
        raise ConfigError("dimension needs --radii lo:hi:num")
    if cfg.radii is not None:
        parse_radii(cfg.radii)
    if cfg.command == "riesz" and cfg.alpha is None:
        raise ConfigError("riesz needs --alpha")
    if cfg.command == "exponents":
        if cfg.gamma is None or cfg.n is None:
            raise ConfigError("exponents needs --gamma and --n")
    if cfg.command == "constants" and cfg.samples < 100:
        raise ConfigError("samples must be >= 100")
    if cfg.command == "verify" and cfg.suite not in SUITES + ("all",):
        raise ConfigError(f"unknown suite {cfg.suite!r}")
    if cfg.seed is None or int(cfg.seed) != cfg.seed:
        raise ConfigError("seed must be an integer")
    return cfg


# ----------------------------------------------------------------------------
# commands


def _measure(cfg: RunConfig, space_needed: str):
    try:
        mu, space = pio.load_measure(cfg.measure)
    except OSError as exc:
        raise ConfigError(f"cannot read measure {cfg.measure}: {exc.strerror}") from None
    if space_needed == "affine" and space != "affine":
        raise ConfigError(f"this command needs an affine measure, got {space}")
    if space_needed == "projective" and space != "projective":
        raise ConfigError(f"this command needs a projective measure, got {space}")
    n = mu.dim - 1 if space == "projective" else mu.dim
    if space != "real" and cfg.n is not None and cfg.n != n:
        raise ConfigError(f"--n {cfg.n} does not match the measure dimension {n}")
    return mu, space, n


def _grid_points(cfg: RunConfig, n: int) -> tuple[np.ndarray, np.ndarray]:
    a, b, m = parse_grid(cfg.grid)
    t = np.linspace(a, b, m)
    X, Y = np.meshgrid(t, t, indexing="ij")
    z1 = (X + 1j * Y).ravel()
    Z = np.zeros((z1.size, n), dtype=complex)
    Z[:, 0] = z1
    return z1, Z


def cmd_potential(cfg: RunConfig) -> str:
    kind = cfg.kind
    mu, space, n = _measure(cfg, "projective" if kind == "G" else "affine")
    z1, Z = _grid_points(cfg, n)
    nan = np.full(z1.size, np.nan)
    grad, dens = nan, nan
    if kind == "G":
        vals = eval_G(mu, homog_from_chart(Z, 0))
    elif kind == "U":
        vals = eval_U(mu, Z)
    else:
        vals = eval_V(mu, Z, cfg.eps)
        if cfg.eps > 0:
            fld = PotentialField(mu, cfg.eps)
            grad = grad_norm(fld, Z)
            dens = ma_density(fld, Z)
    header = ["re_z1", "im_z1", "value", "grad_norm", "ma_density"]
    rows = zip(z1.real, z1.imag, vals, grad, dens)
    meta = {"command": "potential", "kind": kind, "n": n, "eps": cfg.eps}
    return pio.table_text(header, rows, cfg.format, meta)


def cmd_ma_density(cfg: RunConfig) -> str:
    mu, _, n = _measure(cfg, "affine")
    k = n if cfg.k is None else cfg.k
    if not 1 <= k <= n:
        raise ConfigError(f"k must lie in [1, {n}]")
    z1, Z = _grid_points(cfg, n)
    dens, clamped = ma_density(PotentialField(mu, cfg.eps), Z, k, return_clamped=True)
    header = ["re_z1", "im_z1", "density", "clamped"]
    rows = zip(z1.real, z1.imag, dens, clamped)
    meta = {"command": "ma-density", "n": n, "k": k, "eps": cfg.eps, "cma": cma(n)}
    return pio.table_text(header, rows, cfg.format, meta)


def cmd_atom_scan(cfg: RunConfig) -> str:
    mu, _, n = _measure(cfg, "affine")
    if cfg.point is None:
        a = mu.points[int(np.argmax(mu.weights))]
    else:
        x = _floats(cfg.point, "point")
        if len(x) != 2 * n:
            raise ConfigError(f"point needs {2 * n} real coordinates")
        a = np.asarray(x[0::2]) + 1j * np.asarray(x[1::2])
    eps_list = _floats(cfg.eps_list, "eps-list")
    if any(e <= 0 for e in eps_list):
        raise ConfigError("derivatives require eps > 0")
    if any(b >= a_ for a_, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps-list must be strictly descending")
    fac = cfg.radius_factor
    if not fac > 0:
        raise ConfigError("radius-factor must be positive")
    rows = atom_mass_diagnostic(mu, a, eps_list, lambda e: fac * e)
    header = ["eps", "radius", "mass"]
    meta = {"command": "atom-scan", "n": n, "point": [[float(c.real), float(c.imag)] for c in a]}
    return pio.table_text(header, [(r.eps, r.radius, r.mass) for r in rows], cfg.format, meta)


def cmd_riesz(cfg: RunConfig) -> str:
    mu, _, _ = _measure(cfg, "any")
    if not 0 < cfg.alpha < mu.ambient_dim:
        raise ConfigError(f"alpha must lie in (0, {mu.ambient_dim})")
    p_list = _floats(cfg.p_list, "p-list")
    if any(p < 1 for p in p_list):
        raise ConfigError("p values must be >= 1")
    try:
        res = [int(r) for r in _floats(cfg.resolutions, "resolutions")]
    except OverflowError:
        raise ConfigError("resolutions must be finite") from None
    if any(r < 2 for r in res) or any(b <= a for a, b in zip(res, res[1:])):
        raise ConfigError("resolutions must be ascending integers >= 2")
    P = mu.real_points()
    center = P.mean(axis=0)
    hw = cfg.half_width
    if hw is None:
        hw = max(1.0, 1.5 * float(np.sqrt(((P - center) ** 2).sum(axis=1)).max()))
    if not hw > 0:
        raise ConfigError("half-width must be positive")
    probe = lp_threshold_probe(mu, cfg.alpha, p_list, res, center=center, half_width=hw)
    header = ["p", "resolution", "norm", "ratio", "power_ratio", "excluded"]
    rows = [(r.p, r.resolution, r.norm, r.ratio, r.power_ratio, r.excluded) for r in probe.rows]
    meta = {
        "command": "riesz",
        "alpha": cfg.alpha,
        "half_width": hw,
        "diagnosis": {pio.fmt(p): d for p, d in probe.diagnosis.items()},
    }
    return pio.table_text(header, rows, cfg.format, meta)


def _key_value(pairs, cfg: RunConfig, command: str) -> str:
    if cfg.format == "csv":
        return pio.csv_text(["quantity", "value"], pairs)
    obj = {"schema": pio.SCHEMA_VERSION, "command": command}
    obj.update(dict(pairs))
    return pio.json_text(obj)


def cmd_dimension(cfg: RunConfig) -> str:
    mu, _, _ = _measure(cfg, "any")
    lo, hi, num = parse_radii(cfg.radii)
    est = dimension_estimate(mu, lo, hi, num, cfg.max_centers)
    pairs = [
        ("gamma", est.gamma),
        ("slope", est.slope),
        ("residual", est.residual),
        ("flat", est.flat),
        ("undersampled", est.undersampled),
        ("min_ball_count", est.min_ball_count),
        ("n_centers", est.profile.n_centers),
    ]
    pairs += [(f"q@{pio.fmt(r)}", q) for r, q in zip(est.profile.radii, est.profile.values)]
    return _key_value(pairs, cfg, "dimension")


def cmd_exponents(cfg: RunConfig) -> str:
    try:
        rep = critical_exponents(cfg.gamma, cfg.n, cfg.N, cfg.alpha)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return _key_value(list(rep.as_dict().items()), cfg, "exponents")


def cmd_constants(cfg: RunConfig) -> str:
    ns = (cfg.n,) if cfg.n is not None else (1, 2, 3)
    pairs = []
    for n in ns:
        a = np.zeros(n + 1, dtype=complex)
        a[0] = 1.0
        mean, se = mc_integrate_pn(lambda P: eval_G(dirac(a), P), n, cfg.samples, cfg.seed)
        pairs += [
            (f"alpha_{n}_quadrature", alpha_n(n)),
            (f"alpha_{n}_monte_carlo", -mean),
            (f"alpha_{n}_monte_carlo_se", se),
            (f"alpha_{n}_closed_form", 1.0 / (2 * n)),
            (f"cma_{n}", cma(n)),
            (f"radial_c_{n}", n / math.sqrt(2.0)),
        ]
    return _key_value(pairs, cfg, "constants")


HANDLERS = {
    "potential": cmd_potential,
    "ma-density": cmd_ma_density,
    "atom-scan": cmd_atom_scan,
    "riesz": cmd_riesz,
    "dimension": cmd_dimension,
    "exponents": cmd_exponents,
    "constants": cmd_constants,
}


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
        if cfg.command == "verify":
            if cfg.out is None:
                return run_verify(cfg.suite, cfg.seed)
            with open(cfg.out, "w", encoding="utf-8") as fh:
                return run_verify(cfg.suite, cfg.seed, stream=fh)
        text = HANDLERS[cfg.command](cfg)
        pio.write_text(cfg.out, text)
        return 0
    except (ConfigError, MeasureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc.filename}: {exc.strerror}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point: ``revdecoupling <subcommand> [options]``.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import scipy.fft

from .curvature import curvature_samples
from .errors import ConfigError, RevDecouplingError
from .fourierlab.fitting import fit_loglog
from .fourierlab.lemma import hessian_identity_check, lemma_derivative_check
from .fourierlab.norms import DEFAULT_BUDGET, ExperimentRecord, prop5_experiment
from .fourierlab.presets import PRESETS, get_preset, run_experiment
from .partition.flatness import flatness_batch
from .partition.geometry import RevolutionSurface
from .partition.manifest import PartitionManifest, build_partition
from .profile import make_profile
from .structure import decompose_interval, find_curvature_zeros

log = logging.getLogger("revdecoupling")

THREADS_ENV = "REVDECOUPLING_THREADS"
SUBCOMMANDS = ("analyze", "partition", "verify", "experiment", "prop5", "lemma-check")


@dataclass
class RunConfig:
    profile: dict = field(default_factory=lambda: {"kind": "torus", "params": {}, "domain": None})
    delta: list = field(default_factory=lambda: [2.0**-8])
    p: list = field(default_factory=lambda: [4.0])
    q: float = 4.0
    family: list = field(default_factory=lambda: ["constant"])
    seed: int = 0
    out_dir: str = "."
    threads: int = 0  # 0: not set
    memory_budget: int = DEFAULT_BUDGET
    extra: dict = field(default_factory=dict)

    def validate(self):
        if not self.profile or not self.profile.get("kind"):
            raise ConfigError("profile: missing profile kind")
        for name in ("delta", "p", "family"):
            if not getattr(self, name):
                raise ConfigError(f"{name}: list must be nonempty")
        for d in self.delta:
            if not 0 < d < 1:
                raise ConfigError(f"delta: delta must lie in (0,1) (got {d:g})")
        for p in self.p:
            if not p >= 1:
                raise ConfigError(f"p: exponents must be >= 1 (got {p:g})")
        if self.threads < 0:
            raise ConfigError("threads: must be positive")
        if self.memory_budget < 1:
            raise ConfigError("memory_budget: must be positive")
        return self

    def make_profile(self):
        prof = self.profile
        domain = prof.get("domain")
        return make_profile(prof["kind"], domain=tuple(domain) if domain else None, **prof.get("params", {}))

    def to_dict(self):
        return asdict(self)


def _normalize_profile(value, where="profile"):
    if isinstance(value, str):
        return {"kind": value, "params": {}, "domain": None}
    if isinstance(value, dict) and "kind" in value:
        return {"kind": value["kind"], "params": dict(value.get("params", {})), "domain": value.get("domain")}
    raise ConfigError(f"{where}: expected a kind name or an object with 'kind'")


def _as_list(value, name, cast):
    items = value if isinstance(value, list) else [value]
    try:
        return [cast(v) for v in items]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: {exc}") from None


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("config: top level must be a JSON object")
    known = {f for f in RunConfig.__dataclass_fields__ if f != "extra"}
    if "profile" not in data:
        raise ConfigError("profile: missing profile")
    cfg = RunConfig()
    cfg.profile = _normalize_profile(data["profile"])
    if "domain" in data:
        cfg.profile["domain"] = _as_list(data["domain"], "domain", float)
    if "delta" in data:
        cfg.delta = _as_list(data["delta"], "delta", float)
    if "p" in data:
        cfg.p = _as_list(data["p"], "p", float)
    if "family" in data:
        cfg.family = _as_list(data["family"], "family", str)
    for name, cast in (("q", float), ("seed", int), ("out_dir", str), ("threads", int), ("memory_budget", int)):
        if name in data:
            try:
                setattr(cfg, name, cast(data[name]))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{name}: {exc}") from None
    cfg.extra = {k: v for k, v in data.items() if k not in known and k != "domain"}
    return cfg.validate()


def load_config(path) -> RunConfig:
    """Read a flat JSON config; errors name the offending line or field."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return config_from_dict(data)


# ----------------------------------------------------------------------------- argument parsing


def _floats(text):
    return [float(eval_number(t)) for t in text.split(",") if t.strip()]


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def eval_number(token: str) -> float:
    """Float or power of two written as ``2^-8``."""
    token = token.strip()
    if token.startswith("2^"):
        return 2.0 ** float(token[2:])
    return float(token)


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError("expected key=value")
    key, value = text.split("=", 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override its values")
    common.add_argument("--profile", help="profile kind (cone, torus, quasi_torus, perturbed_cone, power_series)")
    common.add_argument("--param", action="append", type=_param, default=[], metavar="KEY=VALUE",
                        help="profile parameter, JSON value (repeatable)")
    common.add_argument("--domain", type=_floats, help="profile domain lo,hi")
    common.add_argument("--delta", type=_floats, help="comma-separated deltas (2^-8 style accepted)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out-dir", help="directory for outputs and the resolved-config echo")
    common.add_argument("--threads", type=int, help=f"FFT worker threads (env {THREADS_ENV})")
    common.add_argument("--memory-budget", type=int, help="largest DFT grid, in cells")
    common.add_argument("--log-level", default="INFO")

    parser = argparse.ArgumentParser(prog="revdecoupling", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="curvature table and degeneracy classification")
    a.add_argument("--samples", type=int, default=201)

    pt = sub.add_parser("partition", parents=[common], help="build and certify the flat-box partition")
    pt.add_argument("--out", help="manifest JSON path (default <out-dir>/manifest.json)")
    pt.add_argument("--cap", type=float, default=0.25, help="upper bound for the half-widths around zeros")
    pt.add_argument("--eta", type=float, default=0.5, help="remainder domination ratio")
    pt.add_argument("-C", "--constant", type=float, default=1000.0, help="containment constant")

    v = sub.add_parser("verify", parents=[common], help="re-certify a manifest")
    v.add_argument("manifest")
    v.add_argument("-C", "--constant", type=float, default=1000.0)

    e = sub.add_parser("experiment", parents=[common], help="decoupling ratios on a preset surface")
    e.add_argument("--preset", choices=PRESETS, default="torus")
    e.add_argument("--p", type=_floats)
    e.add_argument("--q", type=float)
    e.add_argument("--family", type=lambda t: t.split(","))
    e.add_argument("--oversample", type=int, default=2)
    e.add_argument("--spacing-factor", type=float, default=0.5, help="lattice spacing as a multiple of delta")
    e.add_argument("--reduce2d", action="store_true", help="meridian-plane 2-D reduction")
    e.add_argument("--region", help='JSON, e.g. {"r":[0.8,1.2],"alpha":[-0.2,0.2]}')
    e.add_argument("--out", help="CSV path (default <out-dir>/experiment.csv)")
    e.add_argument("--deterministic", action="store_true", help="write 0 in the seconds column")

    p5 = sub.add_parser("prop5", parents=[common], help="segment baseline: ratio against the tube count")
    p5.add_argument("--N", type=_ints, default=[8, 16, 32, 64, 128])
    p5.add_argument("--p", type=_floats)
    p5.add_argument("--family", type=lambda t: t.split(","))
    p5.add_argument("--out", help="CSV path (default <out-dir>/prop5.csv)")

    lc = sub.add_parser("lemma-check", parents=[common], help="derivative table and Hessian identity")
    lc.add_argument("--n", type=int, default=3)
    lc.add_argument("--k", type=_ints, help="annulus indices (default 1..K)")
    lc.add_argument("--maxorder", type=int, default=3)
    return parser


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.profile:
        cfg.profile = _normalize_profile(args.profile)
    if args.param:
        cfg.profile["params"].update(dict(args.param))
    if args.domain:
        cfg.profile["domain"] = args.domain
    if args.delta:
        cfg.delta = args.delta
    for name in ("p", "q", "family"):
        if getattr(args, name, None) is not None:
            setattr(cfg, name, getattr(args, name))
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out_dir:
        cfg.out_dir = args.out_dir
    if args.memory_budget:
        cfg.memory_budget = args.memory_budget
    # thread budget: flag, then config file, then environment, then 1
    if args.threads is not None:
        cfg.threads = args.threads
    elif not cfg.threads:
        try:
            cfg.threads = int(os.environ.get(THREADS_ENV, "1"))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer") from None
    return cfg.validate()


def _echo(cfg: RunConfig, args, name: str, out_dir: Path):
    data = cfg.to_dict()
    data["command"] = args.command
    data["arguments"] = {k: v for k, v in sorted(vars(args).items()) if k not in ("config",)}
    (out_dir / f"{name}.config.json").write_text(json.dumps(data, indent=2, sort_keys=True, default=str) + "\n")


# ----------------------------------------------------------------------------- subcommands


def cmd_analyze(cfg, args, out_dir):
    p = cfg.make_profile()
    lo, hi = p.domain
    radii = np.linspace(lo, hi, args.samples)
    with open(out_dir / "curvature.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["r", "K", "lambda_rad", "lambda_ang"])
        for s in curvature_samples(p, radii):
            w.writerow([repr(s.r), repr(s.K), repr(s.lambda_rad), repr(s.lambda_ang)])
    zeros = find_curvature_zeros(p)
    decomp = decompose_interval(p, zeros)
    for z, iv in decomp.degenerate:
        log.info("zero r=%.12g case=%s n=%d Delta=%.6g", z.r, z.case, z.n, z.delta)
    payload = {"profile": p.describe(), "zeros": [z.to_dict() for z in zeros], "decomposition": decomp.to_dict()}
    (out_dir / "zeros.json").write_text(json.dumps(payload, indent=2) + "\n")
    return 0


def cmd_partition(cfg, args, out_dir):
    p = cfg.make_profile()
    out = Path(args.out) if args.out else out_dir / "manifest.json"
    if len(cfg.delta) != 1:
        raise ConfigError("delta: partition takes a single delta")
    try:
        m = build_partition(p, cfg.delta[0], cap=args.cap, eta=args.eta, C=args.constant)
    except RuntimeError as exc:
        log.error("%s", exc)
        return 1
    for line in m.log:
        log.info("%s", line)
    out.write_text(m.to_json() + "\n")
    log.info("wrote %d boxes to %s", len(m), out)
    return 0


def verify_manifest(m: PartitionManifest, C: float = 1000.0):
    """(flatness failures, tiling problems) of a manifest."""
    reports = flatness_batch(m.frames, RevolutionSurface(m.profile), m.footprints, m.delta, C)
    bad = sum(not r for r in reports)
    return bad, tiling_defects(m.footprints, m.profile.domain)


def tiling_defects(footprints, domain, tol: float = 1e-9) -> list:
    """Gaps or overlaps: every row must be tiled by its sectors and rows must tile the domain."""
    rows = {}
    for fp in footprints:
        rows.setdefault((fp.r1, fp.r2), []).append((fp.alpha1, fp.alpha2))
    problems = []
    for (r1, r2), arcs in rows.items():
        arcs.sort()
        if abs(arcs[0][0]) > tol or abs(arcs[-1][1] - 2 * math.pi) > tol:
            problems.append(f"row [{r1},{r2}) does not span [0, 2pi)")
        for (a1, a2), (b1, b2) in zip(arcs, arcs[1:]):
            if abs(a2 - b1) > tol:
                problems.append(f"row [{r1},{r2}): gap or overlap at alpha={a2}")
    keys = sorted(rows)
    if abs(keys[0][0] - domain[0]) > tol or abs(keys[-1][1] - domain[1]) > tol:
        problems.append("rows do not span the domain")
    for (a1, a2), (b1, b2) in zip(keys, keys[1:]):
        if abs(a2 - b1) > tol:
            problems.append(f"radial gap or overlap at r={a2}")
    return problems


def cmd_verify(cfg, args, out_dir):
    m = PartitionManifest.from_dict(json.loads(Path(args.manifest).read_text()))
    bad, problems = verify_manifest(m, args.constant)
    log.info("%d boxes, %d flatness failures, %d tiling problems", len(m), bad, len(problems))
    for msg in problems[:20]:
        log.error("%s", msg)
    return 1 if bad or problems else 0


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


def cmd_experiment(cfg, args, out_dir):
    preset = get_preset(args.preset, cfg.make_profile() if args.profile or args.config else None)
    if args.region:
        preset = type(preset)(preset.name, preset.case, preset.profile, json.loads(args.region))
    records = []
    for delta in cfg.delta:
        manifest = preset.manifest(delta)
        for p in cfg.p:
            for family in cfg.family:
                rec = run_experiment(preset, delta, p, cfg.q, family, cfg.seed, args.spacing_factor * delta,
                                     args.oversample, cfg.memory_budget, args.reduce2d, cfg.threads, manifest)
                if args.deterministic:
                    rec.seconds = 0.0
                log.info("%s delta=%g p=%g q=%g %s: ratio=%.6g (%d boxes)", preset.name, delta, p, cfg.q, family,
                         rec.ratio, rec.num_boxes)
                records.append(rec)
    out = Path(args.out) if args.out else out_dir / "experiment.csv"
    _write_csv(out, ExperimentRecord.CSV_FIELDS, [r.row() for r in records])
    fits = {}
    for p in cfg.p:
        for family in cfg.family:
            sel = [r for r in records if r.p == p and r.family == family]
            if len({r.delta for r in sel}) >= 3:
                fit = fit_loglog([1 / r.delta for r in sel], [r.ratio for r in sel])
                fits[f"p={p:g},family={family}"] = asdict(fit)
    if fits:
        out.with_suffix(".fit.json").write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_prop5(cfg, args, out_dir):
    delta = cfg.delta[0] if args.delta else 2.0**-10
    families = cfg.family if args.family or args.config else ["smooth-indicator"]
    rows, fits = [], {}
    for p in cfg.p:
        for family in families:
            recs = [prop5_experiment(N, delta, p, family, cfg.seed) for N in args.N]
            rows += [[r.N, delta, p, family, r.ratio] for r in recs]
            if len(args.N) >= 3:
                fit = fit_loglog(args.N, [r.ratio for r in recs])
                fits[f"p={p:g},family={family}"] = asdict(fit)
                log.info("p=%g %s: slope %.4f +- %.4f (reference %.4f)", p, family, fit.slope, fit.stderr,
                         0.5 - 1 / p)
    out = Path(args.out) if args.out else out_dir / "prop5.csv"
    _write_csv(out, ["N", "delta", "p", "family", "ratio"], rows)
    if fits:
        out.with_suffix(".fit.json").write_text(json.dumps(fits, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_lemma(cfg, args, out_dir):
    p = cfg.make_profile()
    delta = cfg.delta[0] if args.delta else 2.0**-12
    ks = args.k
    if ks is None:
        from .partition.rescaled import normalized_model
        from .partition.stages import dyadic_annuli

        _, n, zero, model = normalized_model(p)
        ks = sorted({a.k for a in dyadic_annuli(n, model.effective_delta(delta), zero.delta / model.R) if a.k >= 1})
    table_rows, hess_rows, failed = [], [], False
    for k in ks:
        t = lemma_derivative_check(p, k, args.n, args.maxorder, delta)
        table_rows += [[k, t.s, a, b, v] for (a, b), v in sorted(t.maxima.items())]
        table_rows.append([k, t.s, "phi", "phi", t.phi_max])
        h = hessian_identity_check(p, k, args.n, delta)
        hess_rows.append([k, h.s, h.rel_error, h.matrix_error, h.eig_min, h.eig_max, h.det_min, h.det_max])
        ok = h.rel_error <= 1e-4 and 0.1 <= h.eig_min and h.eig_max <= 10
        failed |= not ok
        log.info("k=%d s=%g: hessian rel error %.3g, eigenvalues [%.3g, %.3g]%s", k, h.s, h.rel_error, h.eig_min,
                 h.eig_max, "" if ok else "  FAIL")
    _write_csv(out_dir / "lemma.csv", ["k", "s", "p", "q", "max_abs"], table_rows)
    _write_csv(out_dir / "hessian.csv", ["k", "s", "rel_error", "matrix_error", "eig_min", "eig_max", "det_min",
                                         "det_max"], hess_rows)
    return 1 if failed else 0


HANDLERS = {
    "analyze": cmd_analyze,
    "partition": cmd_partition,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
    "prop5": cmd_prop5,
    "lemma-check": cmd_lemma,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _echo(cfg, args, args.command, out_dir)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    try:
        with scipy.fft.set_workers(cfg.threads):
            return HANDLERS[args.command](cfg, args, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (RevDecouplingError, ValueError, RuntimeError) as exc:
        log.error("%s", exc)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()

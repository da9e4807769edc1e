"""Command line driver: experiment configs, runs, checks and bubble extraction.

Config files are flat ``key = value`` text with ``#`` comments::

    target = sphere:2            # or curve:path/to/points.csv
    initial = perturbed:0.3,0    # identity | mode:k | perturbed:cx,cy | mobius:ax,ay | random:amp | coeffs:path
    max_mode = 64
    t_max = 20
    output = out/perturbed
    seed = 7

Every FlowConfig field is accepted as a key.  All floats are written with
17 significant digits, so outputs round-trip exactly and repeat byte for
byte for a fixed config and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import diagnostics, flow, oracles, spectral, targets
from .diagnostics import ConcentrationEvent, StaleEvent
from .flow import FlowConfig, FlowState, Trajectory
from .spectral import BoundaryField, MobiusParams

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_CONCENTRATION, EXIT_REJECTED, EXIT_CHECK = 0, 1, 2, 3, 4, 5
TERMINATION_EXIT = {
    "converged": EXIT_OK,
    "t_max_reached": EXIT_OK,
    "concentration_detected": EXIT_CONCENTRATION,
    "step_rejected_floor": EXIT_REJECTED,
}
SERIES_COLUMNS = ("t", "E", "E_half", "dissipation", "residual", "max_local_energy", "degree")

_INT_KEYS = {"max_mode", "grid_size", "radius_levels", "max_steps"}
_STR_KEYS = {"scheme", "dt_policy"}
_BOOL_KEYS = {"reproject"}
_OPTIONAL_KEYS = {"grid_size", "dt", "delta_conc"}
_FLOW_KEYS = {f.name for f in dataclasses.fields(FlowConfig)}
_OTHER_KEYS = {"target", "initial", "output", "seed", "interpolation", "tubular_radius",
               "initial_modes", "random_decay"}


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


# -- serialization ------------------------------------------------------------

def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json(obj) -> str:
    """Deterministic JSON with 17-digit floats; non-finite floats become null."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{_json(str(k))}: {_json(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    return _json(obj)


def loads(text: str):
    return json.loads(text)


def field_record(u: BoundaryField) -> dict:
    c = u.coeffs
    return {"max_mode": u.max_mode, "n_components": u.n_components,
            "re": c.real.tolist(), "im": c.imag.tolist()}


def field_from_record(rec: dict) -> BoundaryField:
    re = np.asarray(rec["re"], dtype=float)
    im = np.asarray(rec["im"], dtype=float)
    return BoundaryField(re + 1j * im)


def _nan(x):
    return None if x is None or not math.isfinite(x) else x


def snapshot_record(state: FlowState, scalars: dict) -> dict:
    return {"t": state.t, "step": state.step_count,
            "diagnostics": {k: _nan(v) for k, v in scalars.items()},
            "field": field_record(state.field)}


def event_record(ev: ConcentrationEvent, snapshot_index: int) -> dict:
    return {"t": ev.t, "snapshot": snapshot_index, "center": [ev.center.real, ev.center.imag],
            "radius": ev.radius, "local_energy": ev.local_energy, "threshold": ev.threshold}


def event_from_record(rec: dict) -> ConcentrationEvent:
    cx, cy = rec["center"]
    return ConcentrationEvent(complex(cx, cy), float(rec["radius"]), float(rec["local_energy"]),
                              float(rec["t"]), float(rec["threshold"]))


def read_ndjson(path: Path) -> list:
    with open(path) as fh:
        return [loads(line) for line in fh if line.strip()]


def write_ndjson(path: Path, records) -> None:
    with open(path, "w", newline="\n") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


# -- configuration ------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    target: str = "sphere:2"
    initial: str = "identity"
    flow: FlowConfig = FlowConfig()
    output: Path = Path("out")
    seed: int = 0
    interpolation: str = "trigonometric"
    tubular_radius: float | None = None
    initial_modes: int | None = None
    random_decay: float = 2.0
    base_dir: Path = Path(".")

    def canonical(self) -> dict:
        """The resolved settings as a flat dict (written to summary.json)."""
        out = {"target": self.target, "initial": self.initial, "seed": self.seed,
               "interpolation": self.interpolation, "tubular_radius": self.tubular_radius,
               "initial_modes": self.initial_modes, "random_decay": self.random_decay}
        out.update(dataclasses.asdict(self.flow))
        return out


def parse_text(text: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(line.split()[0], f"line {lineno} is not of the form key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("", f"line {lineno} has an empty key")
        if key in entries:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        entries[key] = value
    return entries


def _convert(key: str, value: str):
    v = value.strip()
    if key in _OPTIONAL_KEYS and v.lower() in ("none", "null", ""):
        return None
    try:
        if key in _INT_KEYS:
            return int(v)
        if key in _BOOL_KEYS:
            if v.lower() in ("true", "yes", "1"):
                return True
            if v.lower() in ("false", "no", "0"):
                return False
            raise ValueError(v)
        if key in _STR_KEYS:
            return v
        out = float(v)
    except ValueError:
        raise ConfigError(key, f"cannot parse value {value!r}") from None
    if not math.isfinite(out):
        raise ConfigError(key, "value must be finite")
    return out


def build_config(entries: dict[str, str], base_dir: Path = Path("."),
                 overrides: dict[str, str] | None = None) -> ExperimentConfig:
    entries = dict(entries)
    entries.update(overrides or {})
    for key in entries:
        if key not in _FLOW_KEYS and key not in _OTHER_KEYS:
            raise ConfigError(key, "unknown key")
    flow_kw = {k: _convert(k, v) for k, v in entries.items() if k in _FLOW_KEYS}
    try:
        cfg = FlowConfig(**flow_kw)
    except ValueError as exc:
        bad = next((k for k in flow_kw if k in str(exc)), next(iter(flow_kw), "flow"))
        raise ConfigError(bad, str(exc)) from None
    try:
        seed = int(entries.get("seed", "0"))
        if seed < 0:
            raise ValueError
    except ValueError:
        raise ConfigError("seed", "seed must be a nonnegative integer") from None
    interp = entries.get("interpolation", "trigonometric")
    if interp not in ("trigonometric", "spline"):
        raise ConfigError("interpolation", "must be 'trigonometric' or 'spline'")
    rho = entries.get("tubular_radius")
    modes = entries.get("initial_modes")
    exp = ExperimentConfig(
        target=entries.get("target", "sphere:2"),
        initial=entries.get("initial", "identity"),
        flow=cfg,
        output=Path(entries.get("output", "out")),
        seed=seed,
        interpolation=interp,
        tubular_radius=None if rho is None else _convert("tubular_radius", rho),
        initial_modes=None if modes is None else int(_convert("max_mode", modes)),
        random_decay=_convert("random_decay", entries.get("random_decay", "2")),
        base_dir=base_dir,
    )
    # validate the target and initial specs eagerly so errors name their key
    make_target(exp)
    _initial_kind(exp.initial)
    return exp


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config", f"file {path} does not exist")
    return build_config(parse_text(path.read_text()), path.parent, overrides)


def _resolve(exp: ExperimentConfig, p: str) -> Path:
    q = Path(p)
    return q if q.is_absolute() else exp.base_dir / q


def make_target(exp: ExperimentConfig) -> targets.TargetManifold:
    kind, _, arg = exp.target.partition(":")
    if kind == "sphere":
        try:
            n = int(arg or "2")
        except ValueError:
            raise ConfigError("target", "sphere target needs an integer ambient dimension") from None
        if n < 2:
            raise ConfigError("target", "sphere ambient dimension must be at least 2")
        return targets.SphereTarget(n, 0.5 if exp.tubular_radius is None else exp.tubular_radius)
    if kind == "curve":
        path = _resolve(exp, arg)
        if not path.is_file():
            raise ConfigError("target", f"curve file {path} does not exist")
        try:
            pts = targets.load_curve_csv(path)
            return targets.build_curve(pts, exp.interpolation, rho=exp.tubular_radius)
        except ValueError as exc:
            raise ConfigError("target", str(exc)) from None
    raise ConfigError("target", f"unknown target {exp.target!r} (use sphere:n or curve:path)")


def _floats(key: str, text: str, count: int) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(key, f"cannot parse {text!r}") from None
    if len(vals) != count or not all(map(math.isfinite, vals)):
        raise ConfigError(key, f"expected {count} comma-separated numbers, got {text!r}")
    return vals


def _initial_kind(spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "identity" and not arg:
        return kind, None
    if kind == "mode":
        try:
            return kind, int(arg)
        except ValueError:
            raise ConfigError("initial", "mode needs an integer, e.g. mode:2") from None
    if kind == "perturbed":
        return kind, _floats("initial", arg, 2)
    if kind == "mobius":
        ax, ay = _floats("initial", arg, 2)
        if not math.hypot(ax, ay) < 1:
            raise ConfigError("initial", "mobius parameter must lie in the open unit disc")
        return kind, complex(ax, ay)
    if kind == "random":
        return kind, _floats("initial", arg, 1)[0]
    if kind == "coeffs" and arg:
        return kind, arg
    raise ConfigError("initial", f"unknown initial data {spec!r}")


def _mobius_modes(a: complex) -> int:
    # Blaschke tail |a|^k drops below 1e-16
    return int(min(8192, max(64, math.ceil(37.0 / max(1e-12, 1.0 - abs(a))))))


def make_initial(exp: ExperimentConfig, target: targets.TargetManifold) -> BoundaryField:
    kind, arg = _initial_kind(exp.initial)
    K = exp.flow.max_mode
    n = target.ambient_dim
    if kind == "coeffs":
        path = _resolve(exp, arg)
        if not path.is_file():
            raise ConfigError("initial", f"coefficient file {path} does not exist")
        recs = read_ndjson(path)
        rec = recs[-1]
        return field_from_record(rec.get("field", rec))

    if isinstance(target, targets.CurveTarget):
        L = target.length

        def along(k):
            return lambda phi: target.point(np.mod(L * k * phi / spectral.TWO_PI, L))
        base = spectral.from_function(along(1), K, spectral.default_grid(K, 4.0))
    else:
        base = spectral.mode_field(1, K)
        if n > 2:
            base = BoundaryField(np.vstack([base.coeffs, np.zeros((n - 2, 2 * K + 1))]))

    if kind == "identity":
        return base
    if kind == "mode":
        if isinstance(target, targets.CurveTarget):
            return spectral.from_function(along(arg), K, spectral.default_grid(K, 4.0))
        if abs(arg) > K:
            raise ConfigError("initial", "mode exceeds max_mode")
        u = spectral.mode_field(arg, K)
        if n > 2:
            u = BoundaryField(np.vstack([u.coeffs, np.zeros((n - 2, 2 * K + 1))]))
        return u
    if kind == "perturbed":
        shift = np.zeros(n)
        shift[:2] = arg
        return base + spectral.constant_field(shift, K)
    if kind == "mobius":
        Kp = exp.initial_modes or _mobius_modes(arg)
        return spectral.compose_with_mobius(base, MobiusParams(arg), Kp)
    rng = np.random.default_rng(exp.seed)
    noise = spectral.random_field(rng, n, K, decay=exp.random_decay, amplitude=arg)
    return base + noise


# -- run ----------------------------------------------------------------------

def _snapshot_scalars(traj: Trajectory, state: FlowState) -> dict:
    i = state.step_count
    s = traj.series
    return {name: s[name][i] for name in ("E", "E_half", "dissipation", "residual", "max_local_energy", "degree")}


def write_outputs(outdir: Path, exp: ExperimentConfig, traj: Trajectory) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    s = traj.series
    with open(outdir / "series.csv", "w", newline="\n") as fh:
        fh.write(",".join(SERIES_COLUMNS) + "\n")
        for i in range(len(s["t"])):
            fh.write(",".join(format_float(s[c][i]) for c in SERIES_COLUMNS) + "\n")
    write_ndjson(outdir / "snapshots.ndjson",
                 (snapshot_record(st, _snapshot_scalars(traj, st)) for st in traj.snapshots))
    times = [st.t for st in traj.snapshots]
    write_ndjson(outdir / "events.ndjson",
                 (event_record(ev, times.index(ev.t) if ev.t in times else -1) for ev in traj.events))
    fin = traj.final
    idx = fin.step_count
    summary = {
        "termination": traj.termination,
        "final": {"t": fin.t, "steps": fin.step_count, "E": s["E"][idx], "E_half": s["E_half"][idx],
                  "residual": s["residual"][idx], "degree": s["degree"][idx]},
        "snapshots": len(traj.snapshots),
        "events": len(traj.events),
        "config": exp.canonical(),
    }
    (outdir / "summary.json").write_text(dumps(summary) + "\n")


def run_experiment(exp: ExperimentConfig, outdir: Path | None = None, log=print) -> int:
    outdir = exp.base_dir / exp.output if outdir is None else outdir
    target = make_target(exp)
    u0 = make_initial(exp, target)
    if u0.n_components != target.ambient_dim:
        raise ConfigError("initial", f"initial data has {u0.n_components} components, "
                                     f"target lives in R^{target.ambient_dim}")
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            traj = flow.run(u0, exp.flow, target)
    except (FloatingPointError, targets.OutsideTubularNeighborhood, np.linalg.LinAlgError) as exc:
        log(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    if not all(math.isfinite(x) for x in traj.series["E"]):
        log("numeric failure: non-finite energy")
        return EXIT_NUMERIC
    write_outputs(outdir, exp, traj)
    fin = traj.final.step_count
    log(f"{traj.termination}: t = {format_float(traj.final.t)}, E = {format_float(traj.series['E'][fin])}, "
        f"residual = {format_float(traj.series['residual'][fin])}, events = {len(traj.events)}")
    return TERMINATION_EXIT[traj.termination]


def cmd_run(config_path, sweep: str | None = None, output: str | None = None, seed: int | None = None) -> int:
    overrides = {}
    if seed is not None:
        overrides["seed"] = str(seed)
    try:
        if sweep is None:
            exp = load_config(config_path, overrides)
            outdir = Path(output) if output is not None else None
            return run_experiment(exp, outdir)
        key, _, values = sweep.partition("=")
        key = key.strip()
        if not values:
            raise ConfigError(key or "sweep", "sweep must look like key=v1,v2,...")
        base = load_config(config_path, overrides)
        root = Path(output) if output is not None else base.base_dir / base.output
        codes = []
        for v in values.split(","):
            v = v.strip()
            exp = load_config(config_path, {**overrides, key: v})
            print(f"[{key}={v}]")
            codes.append(run_experiment(exp, root / f"{key}={v}"))
        return max(codes)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


# -- check --------------------------------------------------------------------

def _ellipse(samples: int = 64) -> targets.CurveTarget:
    t = spectral.TWO_PI * np.arange(samples) / samples
    return targets.build_curve(np.column_stack([2 * np.cos(t), np.sin(t)]))


def identity_checks() -> list[tuple[str, float, float]]:
    """(name, value, tolerance) rows; a row passes when value <= tolerance."""
    rng = np.random.default_rng(20240601)
    rows = []
    fields = [spectral.random_field(rng, int(rng.integers(1, 5)), int(rng.integers(1, 33)), decay=1.0)
              for _ in range(10)]

    worst = max(abs(spectral.dirichlet_energy(u) - spectral.half_energy(u)) / spectral.half_energy(u)
                for u in fields)
    rows.append(("energy identity E = E_half", worst, 1e-12))
    rows.append(("dirichlet energy matches area quadrature",
                 max(abs(spectral.dirichlet_energy(u) - oracles.disc_energy_quadrature(u, radial=40))
                     / spectral.half_energy(u) for u in fields[:4]), 1e-10))
    rows.append(("trace identity |u_phi| = |u_r|",
                 max(diagnostics.trace_identity_defect(u) for u in fields), 1e-12))

    u = fields[0]
    M = spectral.default_grid(u.max_mode, 2.0)
    r = 0.5
    phi = spectral.grid_angles(16)
    ref = oracles.poisson_eval(spectral.sample(u, 4 * M), r, phi)
    rows.append(("harmonic extension vs Poisson integral",
                 float(np.max(np.abs(spectral.eval_extension(u, r, phi) - ref))), 1e-12))
    h = 1e-3
    s = spectral.sample(u, 32768)
    idx = np.arange(0, s.grid_size, s.grid_size // 16)
    fd = oracles.poisson_radial_derivative(s, h, idx)
    spec = spectral.synthesize(spectral.dtn(u), s.grid_size)[idx]
    scale = float(np.max(np.abs(spec))) + 1.0
    rows.append(("dtn vs Poisson finite difference (h = 1e-3)",
                 float(np.max(np.abs(fd - spec))) / scale, 20 * h))

    sphere = targets.SphereTarget(3)
    wobble = spectral.random_field(rng, 3, 6, decay=2.0, amplitude=0.2)

    def on_sphere(p):
        q = np.column_stack([np.cos(p), np.sin(p), np.zeros_like(p)]) + spectral.eval_trace(wobble, p)
        return q / np.linalg.norm(q, axis=1, keepdims=True)
    v = spectral.from_function(on_sphere, 24)
    rows.append(("Pythagorean split, sphere S^2", diagnostics.pythagoras_check(v, sphere), 1e-11))
    ell = _ellipse()
    w = spectral.from_function(lambda p: ell.point(np.mod(ell.length * p / spectral.TWO_PI, ell.length)), 16)
    rows.append(("Pythagorean split, ellipse", diagnostics.pythagoras_check(w, ell), 1e-11))

    circle = targets.SphereTarget(2)
    ident = spectral.mode_field(1, 4)
    z = np.array([0.8, 0.85j, -0.9, 0.6 - 0.6j])
    lhs, rhs, valid = diagnostics.dist_laplace_terms(ident, circle, z, h=1e-3)
    exact = 1.0 / np.abs(z)
    rows.append(("distance Laplacian = 1/|z| for e^{i phi}",
                 float(np.max(np.abs(lhs[:, 0] - exact))) if np.all(valid) else math.inf, 1e-5))
    rows.append(("Hessian term = 1/|z| for e^{i phi}", float(np.max(np.abs(rhs[:, 0] - exact))), 1e-12))

    rows.append(("stationarity of e^{ik phi}, k = 1..3",
                 max(flow.residual_norm(spectral.mode_field(k, 8), circle) for k in (1, 2, 3)), 1e-12))
    m = MobiusParams(0.3 - 0.2j, 0.7)
    g = spectral.random_field(rng, 2, 8, decay=1.0)
    rows.append(("conformal invariance of E",
                 abs(spectral.dirichlet_energy(spectral.compose_with_mobius(g, m, 32))
                     - spectral.dirichlet_energy(g)), 1e-8))
    return rows


def cmd_check() -> int:
    try:
        rows = identity_checks()
    except Exception as exc:  # any crash in the suite counts as a failure
        print(f"FAIL  identity suite raised {type(exc).__name__}: {exc}")
        return EXIT_CHECK
    width = max(len(r[0]) for r in rows)
    ok = True
    for name, value, tol in rows:
        passed = bool(value <= tol)
        ok &= passed
        print(f"{'PASS' if passed else 'FAIL'}  {name:<{width}}  {value:.3e} <= {tol:.1e}")
    print("all checks passed" if ok else "identity check failed")
    return EXIT_OK if ok else EXIT_CHECK


# -- bubble -------------------------------------------------------------------

def _summary_config(run_dir: Path) -> ExperimentConfig | None:
    path = run_dir / "summary.json"
    if not path.is_file():
        return None
    cfg = loads(path.read_text()).get("config", {})
    entries = {k: str(v) for k, v in cfg.items() if v is not None and k in ("target", "interpolation", "tubular_radius")}
    try:
        return build_config(entries, run_dir)
    except ConfigError:
        return None


def cmd_bubble(snapshot_path, event_index: int, output: str | None = None, out_mode: int = 128) -> int:
    path = Path(snapshot_path)
    if path.is_dir():
        path = path / "snapshots.ndjson"
    run_dir = path.parent
    events_path = run_dir / "events.ndjson"
    if not path.is_file() or not events_path.is_file():
        print(f"error: need {path} and {events_path}", file=sys.stderr)
        return EXIT_CONFIG
    events = read_ndjson(events_path)
    if not 0 <= event_index < len(events):
        print(f"error: event index {event_index} out of range (have {len(events)} events)", file=sys.stderr)
        return EXIT_CONFIG
    rec = events[event_index]
    event = event_from_record(rec)
    snaps = read_ndjson(path)
    match = [s for s in snaps if s["t"] == rec["t"]]
    if not match:
        print(f"error: no snapshot at t = {format_float(rec['t'])} for event {event_index}", file=sys.stderr)
        return EXIT_CONFIG
    u = field_from_record(match[-1]["field"])
    exp = _summary_config(run_dir)
    target = make_target(exp) if exp is not None else targets.SphereTarget(u.n_components)
    try:
        b = diagnostics.extract_bubble(u, event, target, out_mode=out_mode)
    except StaleEvent as exc:
        print(f"stale event: {exc}", file=sys.stderr)
        return EXIT_CONCENTRATION
    outdir = Path(output) if output is not None else run_dir
    outdir.mkdir(parents=True, exist_ok=True)
    record = {"event": event_index, "t": event.t, "center": [b.center.real, b.center.imag],
              "scale": b.scale, "energy": b.energy, "residual": b.residual,
              "conformality_defect": b.conformality_defect, "field": field_record(b.field)}
    write_ndjson(outdir / "bubble.ndjson", [record])
    print(f"bubble: scale = {format_float(b.scale)}, energy = {format_float(b.energy)}, "
          f"conformality_defect = {format_float(b.conformality_defect)}")
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="plateauflow", description="Half-harmonic map heat flow on the circle.")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="integrate the flow from a config file")
    r.add_argument("config")
    r.add_argument("--sweep", help="key=v1,v2,... runs one experiment per value")
    r.add_argument("--output", help="output directory (overrides the config)")
    r.add_argument("--seed", type=int, help="random seed (overrides the config)")
    sub.add_parser("check", help="run the identity suite")
    b = sub.add_parser("bubble", help="extract a bubble from a recorded concentration event")
    b.add_argument("snapshot", help="snapshots.ndjson or its run directory")
    b.add_argument("index", type=int)
    b.add_argument("--output")
    b.add_argument("--out-mode", type=int, default=128)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.sweep, args.output, args.seed)
    if args.command == "check":
        return cmd_check()
    return cmd_bubble(args.snapshot, args.index, args.output, args.out_mode)


if __name__ == "__main__":
    sys.exit(main())

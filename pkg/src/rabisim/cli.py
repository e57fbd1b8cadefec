"""Batch front-end: JSON run configuration in, CSV and metadata files out.

Four modes share one config document shape; each mode owns a fixed set
of sections and any key outside that set is rejected with its full
path.  Outputs are deterministic: repeated runs of the same config
produce byte-identical files.

CSV contracts (column order frozen, '.' decimal, %.17g floats,
RFC 4180 quoting, CRLF line ends):

  phase_diagram.csv / ground_state.csv
      g,omega_c,<requested quantities in canonical order>,converged,flag_reason
  quench.csv
      t,f,occupation,qfi,negativity,mutual_info,min_variance
  wigner.csv / wigner_t<time>.csv
      x,p,w   (long format, x outer loop)
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import BathSpec, QuenchProtocol, run_quench
from .observables import wigner_function
from .operators import DensityMatrix, FockCutoff, ModelParams, partial_trace
from .phase_diagram import QUANTITIES, SweepSpec, compute_point, run_sweep
from .spectrum import diagonalize_model

log = logging.getLogger(__name__)

MODES = ("phase-diagram", "quench", "ground-state", "wigner")
QUENCH_COLUMNS = ("t", "f", "occupation", "qfi", "negativity", "mutual_info", "min_variance")
DEFAULT_OMEGA_C = 0.1
DEFAULT_SNAPSHOT_TIMES = (10.0, 35.0, 55.0, 95.0)
DEFAULT_GRID_AXIS = (-8.0, 8.0, 161)


class ConfigSyntaxError(ValueError):
    """Malformed document: bad JSON, wrong types, unknown or missing keys."""


class ConfigPhysicsError(ValueError):
    """Well-formed document whose numbers violate a model constraint."""


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run: every default already applied."""

    mode: str
    output_dir: Path | None = None
    model: ModelParams | None = None
    cutoff: FockCutoff | None = None
    bath: BathSpec | None = None
    protocol: QuenchProtocol | None = None
    sweep: SweepSpec | None = None
    grid: tuple | None = None  # ((xmin, xmax, xn), (pmin, pmax, pn))


_MISSING = object()

_CHECKS = {
    "number": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
    "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
    "string": lambda v: isinstance(v, str),
    "boolean": lambda v: isinstance(v, bool),
    "array": lambda v: isinstance(v, list),
    "object": lambda v: isinstance(v, dict),
}


class _Section:
    """One config object; take() pops typed keys, finish() rejects the rest."""

    def __init__(self, data, path: str):
        if not isinstance(data, dict):
            raise ConfigSyntaxError(f"{path or 'config'}: expected an object")
        self.data = dict(data)
        self.path = path

    def _at(self, key: str) -> str:
        return f"{self.path}.{key}" if self.path else key

    def take(self, key: str, kind: str, default=_MISSING):
        if key not in self.data:
            if default is _MISSING:
                raise ConfigSyntaxError(f"{self._at(key)}: required")
            return default
        val = self.data.pop(key)
        if not _CHECKS[kind](val):
            raise ConfigSyntaxError(
                f"{self._at(key)}: expected {kind}, got {type(val).__name__}"
            )
        return val

    def take_numbers(self, key: str, default=_MISSING):
        arr = self.take(key, "array", default)
        if arr is default and key not in self.data:
            return default
        for i, v in enumerate(arr):
            if not _CHECKS["number"](v):
                raise ConfigSyntaxError(
                    f"{self._at(key)}[{i}]: expected number, got {type(v).__name__}"
                )
        return [float(v) for v in arr]

    def subsection(self, key: str) -> "_Section | None":
        if key not in self.data:
            return None
        return _Section(self.take(key, "object"), self._at(key))

    def finish(self):
        if self.data:
            keys = ", ".join(sorted(self._at(k) for k in self.data))
            raise ConfigSyntaxError(f"unknown key(s): {keys}")


def _physics(path: str, build):
    try:
        return build()
    except ValueError as exc:
        raise ConfigPhysicsError(f"{path}: {exc}") from exc


def _parse_model(root: _Section, need_g: bool):
    """Shared model section; returns (params or factory, n_max)."""
    sec = root.subsection("model") or _Section({}, "model")
    omega_c = float(sec.take("omega_c", "number", DEFAULT_OMEGA_C))
    constrained = sec.take("constrained", "boolean", True)
    omega_q = sec.take("omega_q", "number", None)
    if omega_q is None:
        if constrained:
            if omega_c <= 0:
                raise ConfigPhysicsError("model.omega_c: must be positive")
            omega_q = 1.0 / omega_c
        else:
            raise ConfigSyntaxError("model.omega_q: required when constrained is false")
    omega_q = float(omega_q)
    g = sec.take("g", "number", None) if need_g else None
    if need_g and g is None:
        raise ConfigSyntaxError("model.g: required")
    sec.finish()
    return omega_c, omega_q, float(g) if g is not None else None, constrained


def _parse_cutoff(root: _Section) -> FockCutoff:
    sec = root.subsection("cutoff") or _Section({}, "cutoff")
    n_max = sec.take("n_max", "integer", 50)
    sec.finish()
    return _physics("cutoff.n_max", lambda: FockCutoff(n_max))


def _parse_bath(root: _Section, omega_c: float) -> BathSpec:
    sec = root.subsection("bath") or _Section({}, "bath")
    gamma_c = float(sec.take("gamma_c", "number", 0.01 * omega_c))
    gamma_q = float(sec.take("gamma_q", "number", 0.01 * omega_c))
    temperature = float(sec.take("temperature", "number", 0.0))
    omega_0 = sec.take("omega_0", "number", None)
    omega_0 = float(omega_0) if omega_0 is not None else omega_c
    sec.finish()
    return _physics(
        "bath", lambda: BathSpec(gamma_c, gamma_q, temperature=temperature, omega_0=omega_0)
    )


def _parse_quench(root: _Section, output_dir) -> RunConfig:
    omega_c, omega_q, _, constrained = _parse_model(root, need_g=False)
    cutoff = _parse_cutoff(root)
    bath = _parse_bath(root, omega_c)
    sec = root.subsection("protocol")
    if sec is None:
        raise ConfigSyntaxError("protocol: required for quench mode (at least protocol.g0)")
    g0 = float(sec.take("g0", "number"))
    g_prime = sec.take("g_prime", "number", None)
    g_prime = float(g_prime) if g_prime is not None else g0 + 0.3
    t_max = float(sec.take("t_max", "number", 100.0))
    dt = float(sec.take("dt", "number", 0.01))
    stride = sec.take("record_stride", "integer", 100)
    snaps = sec.take_numbers("snapshot_times", None)
    if snaps is None:
        snaps = [t for t in DEFAULT_SNAPSHOT_TIMES if t <= t_max]
    sec.finish()
    protocol = _physics(
        "protocol",
        lambda: QuenchProtocol(
            g0=g0, g_prime=g_prime, t_max=t_max, dt=dt,
            record_stride=stride, snapshot_times=tuple(snaps),
        ),
    )
    model = _physics(
        "model", lambda: ModelParams(omega_c, omega_q, g0, constrained=constrained)
    )
    root.finish()
    return RunConfig(
        mode="quench", output_dir=output_dir, model=model, cutoff=cutoff,
        bath=bath, protocol=protocol,
    )


def _parse_sweep(root: _Section) -> SweepSpec:
    sec = root.subsection("sweep") or _Section({}, "sweep")
    defaults = SweepSpec()
    g_values = sec.take_numbers("g_values", None)
    omega_c_values = sec.take_numbers("omega_c_values", None)
    quantities = sec.take("quantities", "array", None)
    if quantities is not None:
        for i, q in enumerate(quantities):
            if not isinstance(q, str):
                raise ConfigSyntaxError(f"sweep.quantities[{i}]: expected string")
    n_max = sec.take("n_max", "integer", 50)
    constrained = sec.take("constrained", "boolean", True)
    omega_q = sec.take("omega_q", "number", None)
    sec.finish()
    ordered = None
    if quantities is not None:
        if not quantities:
            raise ConfigSyntaxError("sweep.quantities: need at least one quantity")
        extras = [q for q in quantities if q not in QUANTITIES]
        if extras:
            raise ConfigPhysicsError(f"sweep.quantities: unknown quantity {extras[0]!r}")
        ordered = tuple(q for q in QUANTITIES if q in set(quantities))
    return _physics(
        "sweep",
        lambda: SweepSpec(
            g_values=tuple(g_values) if g_values is not None else defaults.g_values,
            omega_c_values=tuple(omega_c_values)
            if omega_c_values is not None
            else defaults.omega_c_values,
            quantities=ordered if ordered is not None else QUANTITIES,
            n_max=n_max,
            constrained=constrained,
            omega_q=float(omega_q) if omega_q is not None else None,
        ),
    )


def _parse_grid(root: _Section) -> tuple:
    sec = root.subsection("grid") or _Section({}, "grid")
    axes = []
    for name in ("x", "p"):
        ax = sec.subsection(name) or _Section({}, f"grid.{name}")
        lo = float(ax.take("min", "number", DEFAULT_GRID_AXIS[0]))
        hi = float(ax.take("max", "number", DEFAULT_GRID_AXIS[1]))
        pts = ax.take("points", "integer", DEFAULT_GRID_AXIS[2])
        ax.finish()
        if hi <= lo:
            raise ConfigSyntaxError(f"grid.{name}: max must exceed min")
        if pts < 2:
            raise ConfigSyntaxError(f"grid.{name}.points: need at least 2")
        axes.append((lo, hi, pts))
    sec.finish()
    return tuple(axes)


def parse_config(text: str, mode: str | None = None) -> RunConfig:
    """Validate a JSON run configuration and resolve every default.

    `mode` supplies the subcommand when the document omits its own
    "mode" key; when both are present they must agree.  Raises
    ConfigSyntaxError for structural trouble and ConfigPhysicsError
    when a well-typed value breaks a model constraint.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(f"config is not valid JSON: {exc}") from exc
    root = _Section(doc, "")
    if not root.data and mode is None:
        raise ConfigSyntaxError(
            "config is empty: required keys are mode (one of "
            + ", ".join(MODES)
            + "); quench mode also requires protocol.g0, "
            "ground-state and wigner modes require model.g"
        )
    doc_mode = root.take("mode", "string", None)
    if doc_mode is not None and doc_mode not in MODES:
        raise ConfigSyntaxError(f"mode: expected one of {', '.join(MODES)}, got {doc_mode!r}")
    if doc_mode is not None and mode is not None and doc_mode != mode:
        raise ConfigSyntaxError(
            f"mode: config says {doc_mode!r} but the {mode!r} subcommand was invoked"
        )
    resolved = doc_mode or mode
    if resolved is None:
        raise ConfigSyntaxError("mode: required (one of " + ", ".join(MODES) + ")")

    out = root.take("output_dir", "string", None)
    output_dir = Path(out) if out is not None else None

    if resolved == "quench":
        return _parse_quench(root, output_dir)
    if resolved == "phase-diagram":
        sweep = _parse_sweep(root)
        root.finish()
        return RunConfig(mode=resolved, output_dir=output_dir, sweep=sweep)
    # ground-state and wigner share the model+cutoff sections
    omega_c, omega_q, g, constrained = _parse_model(root, need_g=True)
    cutoff = _parse_cutoff(root)
    model = _physics("model", lambda: ModelParams(omega_c, omega_q, g, constrained=constrained))
    grid = None
    if resolved == "wigner":
        grid = _parse_grid(root)
    root.finish()
    return RunConfig(mode=resolved, output_dir=output_dir, model=model, cutoff=cutoff, grid=grid)


def serialize_config(config: RunConfig) -> str:
    """Inverse of parse_config: parse(serialize(c)) == c."""
    doc: dict = {"mode": config.mode}
    if config.output_dir is not None:
        doc["output_dir"] = str(config.output_dir)
    if config.model is not None:
        m = config.model
        doc["model"] = {
            "omega_c": m.omega_c, "omega_q": m.omega_q, "constrained": m.constrained,
        }
        if config.mode in ("ground-state", "wigner"):
            doc["model"]["g"] = m.g
    if config.cutoff is not None:
        doc["cutoff"] = {"n_max": config.cutoff.n_max}
    if config.bath is not None:
        b = config.bath
        doc["bath"] = {
            "gamma_c": b.gamma_c, "gamma_q": b.gamma_q,
            "temperature": b.temperature, "omega_0": b.omega_0,
        }
    if config.protocol is not None:
        p = config.protocol
        doc["protocol"] = {
            "g0": p.g0, "g_prime": p.g_prime, "t_max": p.t_max, "dt": p.dt,
            "record_stride": p.record_stride, "snapshot_times": list(p.snapshot_times),
        }
    if config.sweep is not None:
        s = config.sweep
        doc["sweep"] = {
            "g_values": list(s.g_values), "omega_c_values": list(s.omega_c_values),
            "quantities": list(s.quantities), "n_max": s.n_max,
            "constrained": s.constrained,
        }
        if s.omega_q is not None:
            doc["sweep"]["omega_q"] = s.omega_q
    if config.grid is not None:
        doc["grid"] = {
            name: {"min": lo, "max": hi, "points": pts}
            for name, (lo, hi, pts) in zip(("x", "p"), config.grid)
        }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return f"{float(value):.17g}"


def _csv_writer(rows, header):
    def write(path: Path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\r\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(v) for v in row])

    return write


def _json_writer(payload: dict):
    def write(path: Path):
        path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")

    return write


def _wigner_rows(grid):
    rows = []
    for i, x in enumerate(grid.x_values):
        for j, p in enumerate(grid.p_values):
            rows.append((x, p, grid.values[i, j]))
    return rows


def _snapshot_name(t: float) -> str:
    return f"wigner_t{t:g}.csv"


def _metadata(config: RunConfig, extra: dict | None = None) -> dict:
    payload = {
        "version": __version__,
        "mode": config.mode,
        "config": json.loads(serialize_config(config)),
    }
    if extra:
        payload.update(extra)
    return payload


def _plan_phase_diagram(config: RunConfig, workers: int):
    grid = run_sweep(config.sweep, workers=workers)
    header = ["g", "omega_c", *config.sweep.quantities, "converged", "flag_reason"]
    rows = []
    for i, g in enumerate(grid.g_values):
        for j, w in enumerate(grid.omega_c_values):
            row = [g, w]
            row += [grid.values[name][i, j] for name in config.sweep.quantities]
            row += [bool(grid.converged[i, j]), grid.flag_reasons[i][j]]
            rows.append(row)
    n_flagged = int(grid.converged.size - grid.converged.sum())
    meta = _metadata(config, {"points": len(rows), "flagged_points": n_flagged})
    return [
        ("metadata.json", _json_writer(meta)),
        ("phase_diagram.csv", _csv_writer(rows, header)),
    ]


def _plan_quench(config: RunConfig):
    result = run_quench(config.model, config.protocol, config.bath, cutoff=config.cutoff)
    rows = []
    for k, t in enumerate(result.times):
        rows.append([t] + [result.series[name][k] for name in QUENCH_COLUMNS[1:]])
    files = [("quench.csv", _csv_writer(rows, list(QUENCH_COLUMNS)))]
    for t, grid in result.wigner_snapshots:
        files.append((_snapshot_name(t), _csv_writer(_wigner_rows(grid), ["x", "p", "w"])))
    meta = _metadata(config, {"diagnostics": result.diagnostics})
    return [("metadata.json", _json_writer(meta))] + files


def _plan_ground_state(config: RunConfig):
    m = config.model
    spec = SweepSpec(
        g_values=(m.g,) if m.g > 0 else (0.0,),
        omega_c_values=(m.omega_c,),
        n_max=config.cutoff.n_max,
        constrained=False,
        omega_q=m.omega_q,
    )
    rec = compute_point(spec, m.g, m.omega_c)
    header = ["g", "omega_c", *QUANTITIES, "converged", "flag_reason"]
    row = [rec["g"], rec["omega_c"], *[rec[q] for q in QUANTITIES],
           rec["converged"], rec["flag_reason"]]
    meta = _metadata(config, {"converged": bool(rec["converged"])})
    return [
        ("metadata.json", _json_writer(meta)),
        ("ground_state.csv", _csv_writer([row], header)),
    ]


def _plan_wigner(config: RunConfig):
    m, cutoff = config.model, config.cutoff
    es = diagonalize_model(m, cutoff)
    rho = DensityMatrix.from_state(es.ground_state(), (2, cutoff.cavity_dim))
    rho_c = partial_trace(rho, "cavity")
    (xlo, xhi, xn), (plo, phi, pn) = config.grid
    grid = wigner_function(rho_c, np.linspace(xlo, xhi, xn), np.linspace(plo, phi, pn))
    meta = _metadata(config, {"integral": float(grid.integral())})
    return [
        ("metadata.json", _json_writer(meta)),
        ("wigner.csv", _csv_writer(_wigner_rows(grid), ["x", "p", "w"])),
    ]


def execute(config: RunConfig, workers: int = 1) -> list:
    """Run the configured job and write its files; list of paths on success.

    All numbers are computed before the first byte is written, and a
    failure while writing removes everything written so far: the output
    directory never holds a partial result set.
    """
    if config.output_dir is None:
        raise ConfigSyntaxError("output_dir: required (config key or --output)")
    if config.mode == "phase-diagram":
        plan = _plan_phase_diagram(config, workers)
    elif config.mode == "quench":
        plan = _plan_quench(config)
    elif config.mode == "ground-state":
        plan = _plan_ground_state(config)
    else:
        plan = _plan_wigner(config)

    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, write in plan:
            path = out / name
            write(path)
            written.append(path)
    except BaseException:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    log.info("wrote %d files to %s", len(written), out)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="rabisim",
        description="Ground-state sweeps and quench dynamics of a dipole-coupled "
        "cavity-qubit system, written out as CSV plus JSON metadata.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode)
        p.add_argument("--config", required=True, type=Path, help="JSON run configuration")
        p.add_argument("--output", type=Path, default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="grid workers (phase-diagram)")
        p.add_argument("--verbose", action="store_true")
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        text = args.config.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        config = parse_config(text, mode=args.mode)
        if args.output is not None:
            config = replace(config, output_dir=args.output)
        files = execute(config, workers=args.workers)
    except ConfigSyntaxError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConfigPhysicsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # runtime failure after validation
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in files:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())

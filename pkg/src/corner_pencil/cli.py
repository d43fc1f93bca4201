"""Command-line front end: configuration ingestion and report emission.

Machine-readable results are JSON (sorted keys, two-space indent); bulk
numeric dumps are CSV, each accompanied by a rendered PNG figure unless
``--no-plot`` is given.  Exit codes: 0 smooth outcomes, 2 non-smooth
outcomes, 3 indeterminate, 1 errors (JSON error object on stderr).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import plots
from .config import SideId, ValidatedConfig, load_config
from .errors import BadGridSize, ConfigError, CornerPencilError
from .pencil import det_log
from .spectrum import BandQuery, BandResult, locate_eigenvalues
from .tangential import (
    Trace,
    check_condition4,
    check_condition4prime,
    consistency_check,
    parse_trace,
    rhs_membership,
    tangential_system,
    zero_trace,
)
from .verdict import decide, explain
from .verify import SingularField, nonlocal_bc_residual, pde_residual, sobolev_probe

SCHEMA_VERSION = 1


@dataclass
class RunManifest:
    """One CLI invocation, validated before any work happens."""

    subcommand: str
    config_path: Path | None = None
    band: tuple[float, float] = (-1.0, 0.0)
    re_range: float = 10.0
    n: int = 48
    mode: str = "homogeneous"
    trace_paths: list[Path] = field(default_factory=list)
    out_path: Path | None = None
    seed: int = 0
    plot: bool = True
    extra: dict = field(default_factory=dict)

    def check(self) -> None:
        if self.config_path is not None and not self.config_path.exists():
            raise ConfigError(f"config file not found: {self.config_path}")
        for p in self.trace_paths:
            if not p.exists():
                raise ConfigError(f"trace file not found: {p}")
        if self.n < 8 or self.n % 2 != 0:
            raise BadGridSize(f"grid size must be even and >= 8, got {self.n}")
        if not self.band[0] < self.band[1]:
            raise ConfigError(f"band must satisfy c1 < c2, got {self.band}")


def _emit_json(doc: dict, out_path: Path | None) -> None:
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out_path is None:
        sys.stdout.write(text)
    else:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text(text)


def _error_json(exc: Exception) -> None:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "error": {"type": type(exc).__name__, "message": str(exc)},
    }
    for attr in ("j", "sigma", "k", "s"):
        if hasattr(exc, attr):
            doc["error"][attr] = getattr(exc, attr)
    sys.stderr.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _band_query(manifest: RunManifest) -> BandQuery:
    return BandQuery(
        c1=manifest.band[0], c2=manifest.band[1], re_range=manifest.re_range, n=manifest.n
    )


def _load_trace_set(path: Path, config: ValidatedConfig) -> tuple[dict[SideId, Trace], dict[SideId, complex] | None]:
    """Trace-set manifest: {"sides": [{"j", "sigma", "trace", "bv0"?}, ...]}."""
    doc = json.loads(path.read_text())
    traces: dict[SideId, Trace] = {side: zero_trace() for side in config.sides()}
    bv0: dict[SideId, complex] = {}
    have_bv0 = False
    for entry in doc.get("sides", []):
        side = SideId(int(entry["j"]), int(entry["sigma"]))
        traces[side] = parse_trace(str(entry["trace"]), base_dir=path.parent)
        if "bv0" in entry:
            have_bv0 = True
            raw = entry["bv0"]
            bv0[side] = complex(raw[0], raw[1]) if isinstance(raw, list) else complex(raw)
    return traces, (bv0 if have_bv0 else None)


def _sibling(out_path: Path | None, stem_suffix: str, ext: str, default_stem: str) -> Path:
    if out_path is None:
        return Path(f"{default_stem}{stem_suffix}{ext}")
    return out_path.with_name(out_path.stem + stem_suffix + ext)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_validate(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    from .config import config_to_dict

    _emit_json(
        {"schema_version": SCHEMA_VERSION, "valid": True, "config": config_to_dict(config)},
        manifest.out_path,
    )
    return 0


def _cmd_spectrum(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    result = locate_eigenvalues(config, _band_query(manifest))
    doc = {"schema_version": SCHEMA_VERSION, **result.to_dict()}
    _emit_json(doc, manifest.out_path)
    eig_csv = manifest.extra.get("eigenfunctions")
    if eig_csv:
        _write_eigenfunction_csv(Path(eig_csv), config, result)
    if manifest.plot and manifest.out_path is not None:
        plots.save_spectrum_figure(_sibling(manifest.out_path, "_band", ".png", "spectrum"), result)
    return 0


def _write_eigenfunction_csv(path: Path, config: ValidatedConfig, result: BandResult) -> None:
    from .pencil import discretize

    pen = discretize(config, result.n)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eig_index", "member", "angle", "omega", "re", "im"])
        for idx, rec in enumerate(result.records):
            for mem, member in enumerate(rec.eigenbasis):
                for j in range(1, config.n_angles + 1):
                    for om, val in zip(pen.nodes[j - 1], member[j - 1]):
                        writer.writerow(
                            [idx, mem, j, repr(float(om)), repr(val.real), repr(val.imag)]
                        )


def _cmd_tangential(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    system = tangential_system(config)
    _emit_json({"schema_version": SCHEMA_VERSION, **system.to_dict()}, manifest.out_path)
    return 0


def _cmd_consistency(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    system = tangential_system(config)
    if not manifest.trace_paths:
        raise ConfigError("consistency needs --traces <trace-set.json>")
    traces, _ = _load_trace_set(manifest.trace_paths[0], config)
    if manifest.extra.get("rhs"):
        in_s, report = rhs_membership(system, traces, config.epsilon)
        doc = {
            "schema_version": SCHEMA_VERSION,
            "membership": "InS" if in_s else "NotInS",
            **report.to_dict(),
        }
        ok = in_s
    else:
        report = consistency_check(system, traces, config.epsilon)
        doc = {"schema_version": SCHEMA_VERSION, **report.to_dict()}
        ok = report.consistent
    _emit_json(doc, manifest.out_path)
    if manifest.plot and manifest.out_path is not None:
        plots.save_consistency_figure(
            _sibling(manifest.out_path, "_partials", ".png", "consistency"), report
        )
    return 0 if ok else 2


def _cmd_decide(manifest: RunManifest) -> int:
    from .verify import corroborate

    config = load_config(manifest.config_path)
    result = locate_eigenvalues(config, _band_query(manifest))
    result = corroborate(config, result, seed=manifest.seed)
    system = tangential_system(config)
    if manifest.mode == "nonhomogeneous":
        sets = [
            _load_trace_set(p, config)[0] for p in manifest.trace_paths
        ]
        condition = check_condition4(config, system, sets, config.epsilon)
    else:
        samples = [_load_trace_set(p, config) for p in manifest.trace_paths]
        condition = check_condition4prime(config, system, samples, config.epsilon)
    verdict = decide(config, result, system, condition, mode=manifest.mode)
    doc = {"schema_version": SCHEMA_VERSION, **verdict.to_dict()}
    _emit_json(doc, manifest.out_path)
    if manifest.extra.get("explain"):
        sys.stderr.write(explain(verdict))
    return verdict.exit_code()


def _cmd_singular(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    result = locate_eigenvalues(config, _band_query(manifest))
    index = int(manifest.extra.get("index", 0))
    member = int(manifest.extra.get("member", 0))
    if not result.records:
        raise ConfigError("no band eigenvalues: nothing to build a singular field from")
    if not (0 <= index < len(result.records)):
        raise ConfigError(f"--index {index} out of range; {len(result.records)} eigenvalue(s)")
    record = result.records[index]
    if not (0 <= member < len(record.eigenbasis)):
        raise ConfigError(f"--member {member} out of range")
    field = SingularField.from_record(config, record, result.n, member=member)

    samples_csv = _sibling(manifest.out_path, "_field", ".csv", "singular")
    samples_csv.parent.mkdir(parents=True, exist_ok=True)
    eps = config.epsilon
    radii = eps * np.geomspace(1e-2, 1.0, 24)
    with open(samples_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["angle", "r", "omega", "re", "im"])
        for j in range(1, config.n_angles + 1):
            oms = np.linspace(-config.angle(j), config.angle(j), 17)
            for r in radii:
                vals = field.value(j, np.full(len(oms), r), oms)
                for om, val in zip(oms, vals):
                    writer.writerow([j, repr(float(r)), repr(float(om)), repr(val.real), repr(val.imag)])

    probe1 = sobolev_probe(field, 1)
    probe2 = sobolev_probe(field, 2)
    probes_csv = _sibling(manifest.out_path, "_probes", ".csv", "singular")
    with open(probes_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["delta", "I1", "I2"])
        for d, v1, v2 in zip(probe1.deltas, probe1.values, probe2.values):
            writer.writerow([repr(float(d)), repr(float(v1)), repr(float(v2))])

    doc = {
        "schema_version": SCHEMA_VERSION,
        "lambda": [record.lam0.real, record.lam0.imag],
        "classification": record.classification,
        "pde_residual": pde_residual(field, config, sample_count=100, seed=manifest.seed),
        "bc_residual": nonlocal_bc_residual(field, config),
        "probe_order1": probe1.to_dict(),
        "probe_order2": probe2.to_dict(),
        "field_csv": str(samples_csv),
        "probes_csv": str(probes_csv),
    }
    if manifest.plot:
        doc["field_figure"] = str(
            plots.save_field_figure(_sibling(manifest.out_path, "_field", ".png", "singular"), field)
        )
        doc["probe_figure"] = str(
            plots.save_probe_figure(
                _sibling(manifest.out_path, "_probes", ".png", "singular"), [probe1, probe2]
            )
        )
    _emit_json(doc, manifest.out_path)
    return 0


def _cmd_detgrid(manifest: RunManifest) -> int:
    config = load_config(manifest.config_path)
    grid_spec = manifest.extra.get("grid", "81x41")
    try:
        n_re, n_im = (int(p) for p in grid_spec.lower().split("x"))
    except ValueError as exc:
        raise ConfigError(f"bad --grid {grid_spec!r}, expected like 81x41") from exc
    c1, c2 = manifest.band
    re_vals = np.linspace(-manifest.re_range, manifest.re_range, n_re)
    im_vals = np.linspace(c1, c2, n_im)
    logdet = np.empty((n_re, n_im))
    for i, re_part in enumerate(re_vals):
        for k, im_part in enumerate(im_vals):
            try:
                logdet[i, k] = det_log(config, complex(re_part, im_part), manifest.n)[0]
            except CornerPencilError:
                logdet[i, k] = -np.inf

    grid_csv = _sibling(manifest.out_path, "_grid", ".csv", "detgrid")
    grid_csv.parent.mkdir(parents=True, exist_ok=True)
    with open(grid_csv, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["re", "im", "logdet"])
        for i, re_part in enumerate(re_vals):
            for k, im_part in enumerate(im_vals):
                writer.writerow([repr(float(re_part)), repr(float(im_part)), repr(float(logdet[i, k]))])

    doc = {
        "schema_version": SCHEMA_VERSION,
        "csv": str(grid_csv),
        "grid": [n_re, n_im],
        "re_range": [float(re_vals[0]), float(re_vals[-1])],
        "im_range": [float(im_vals[0]), float(im_vals[-1])],
    }
    if manifest.plot:
        finite = logdet[np.isfinite(logdet)]
        floor = finite.min() if finite.size else 0.0
        doc["figure"] = str(
            plots.save_detgrid_figure(
                _sibling(manifest.out_path, "_grid", ".png", "detgrid"),
                re_vals,
                im_vals,
                np.where(np.isfinite(logdet), logdet, floor),
            )
        )
    _emit_json(doc, manifest.out_path)
    return 0


_COMMANDS = {
    "validate": _cmd_validate,
    "spectrum": _cmd_spectrum,
    "tangential": _cmd_tangential,
    "consistency": _cmd_consistency,
    "decide": _cmd_decide,
    "singular": _cmd_singular,
    "detgrid": _cmd_detgrid,
}


def run(manifest: RunManifest) -> int:
    """Execute one validated manifest; returns the process exit code."""
    manifest.check()
    return _COMMANDS[manifest.subcommand](manifest)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corner-pencil",
        description="Decide Sobolev smoothness of nonlocal corner problems from pencil spectra.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required, help="problem JSON file")
        p.add_argument("--band", default="-1,0", help="c1,c2 with c1 <= Im lambda < c2")
        p.add_argument("--re-range", type=float, default=10.0, dest="re_range")
        p.add_argument("--n", type=int, default=48, help="grid points per angle (even, >= 8)")
        p.add_argument("--out", default=None, help="write the JSON report here (default stdout)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--no-plot", action="store_true", help="skip companion PNG figures")

    for name in ("validate", "tangential"):
        common(sub.add_parser(name))
    common(sub.add_parser("spectrum"))
    sub.choices["spectrum"].add_argument(
        "--eigenfunctions", default=None, help="also dump eigenfunction samples to this CSV"
    )
    p_cons = sub.add_parser("consistency")
    common(p_cons)
    p_cons.add_argument("--traces", required=True, help="trace-set JSON file")
    p_cons.add_argument("--rhs", action="store_true", help="phrase the verdict as data-space membership")
    p_dec = sub.add_parser("decide")
    common(p_dec)
    p_dec.add_argument("--mode", choices=("homogeneous", "nonhomogeneous"), default="homogeneous")
    p_dec.add_argument("--v-traces", nargs="*", default=[], dest="v_traces", help="trace-set JSON files")
    p_dec.add_argument("--explain", action="store_true", help="print a human-readable report to stderr")
    p_sing = sub.add_parser("singular")
    common(p_sing)
    p_sing.add_argument("--index", type=int, default=0, help="which band eigenvalue")
    p_sing.add_argument("--member", type=int, default=0, help="which eigenbasis member")
    p_grid = sub.add_parser("detgrid")
    common(p_grid)
    p_grid.add_argument("--grid", default="81x41", help="determinant samples, RExIM")
    return parser


def _manifest_from_args(args: argparse.Namespace) -> RunManifest:
    try:
        c1, c2 = (float(p) for p in args.band.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad --band {args.band!r}, expected c1,c2") from exc
    extra = {}
    for key in ("eigenfunctions", "rhs", "index", "member", "grid", "explain"):
        if hasattr(args, key):
            extra[key] = getattr(args, key)
    trace_paths = []
    if getattr(args, "traces", None):
        trace_paths.append(Path(args.traces))
    for p in getattr(args, "v_traces", []) or []:
        trace_paths.append(Path(p))
    return RunManifest(
        subcommand=args.subcommand,
        config_path=Path(args.config) if args.config else None,
        band=(c1, c2),
        re_range=args.re_range,
        n=args.n,
        mode=getattr(args, "mode", "homogeneous"),
        trace_paths=trace_paths,
        out_path=Path(args.out) if args.out else None,
        seed=args.seed,
        plot=not args.no_plot,
        extra=extra,
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        manifest = _manifest_from_args(args)
        return run(manifest)
    except CornerPencilError as exc:
        _error_json(exc)
        return 1
    except OSError as exc:
        _error_json(exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())

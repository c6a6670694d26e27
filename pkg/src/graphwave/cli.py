"""Command-line pipelines over network spec files.

Subcommands: validate, simulate, spectrum, resolvent, report.  Every command
that writes outputs also writes a run manifest (resolved config, seed,
versions, output paths) sufficient to reproduce those outputs bit for bit.
Exit codes: 0 success/agreement, 1 validation or agreement failure, 2 spec
parse/schema error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import os
import platform
import sys as _sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import DEFAULT_RESOLUTION, NetworkSpec, load_network
from .damping import check_property_P, classify_continuity
from .errors import EnergyUnderflow, GraphWaveError, SpecFormatError, WindowTooShort
from .fem import assemble, build_mesh, dump_matrices
from .graph import validate_structure
from .simulate import State, default_dt, fit_exponential, fit_power, run
from .spectral import classify_stability, eigenvalues, resolved_band_limit, resolvent_scan

EXP_SLOPE_MAX = 0.1
POLY_SLOPE_BAND = (0.3, 0.7)
POLY_EXPONENT_BAND = (3.2, 4.8)
EXP_R2_MIN = 0.98
STABILITY_MARGIN = 1e-8


def build_system(spec: NetworkSpec):
    mesh = build_mesh(spec.graph, spec.cells, damping=spec.damping)
    return assemble(mesh, spec.damping)


def predict_regime(structure, prop, cont) -> str:
    """Map the hypothesis checks onto the predicted decay regime."""
    if not structure.passed:
        if not structure.has_kv_edge:
            return "not-asymptotically-stable"
        return "invalid-structure"
    if not prop.overall:
        return "indeterminate"
    return "exponential" if cont.case == "I" else "polynomial-t-2"


def _modal_vector(sysd, modes: tuple[int, ...]) -> np.ndarray:
    import scipy.linalg as la

    mu, vecs = la.eigh(sysd.K.toarray(), sysd.M.toarray())
    out = np.zeros(sysd.n)
    for k in modes:
        vec = vecs[:, k - 1]
        vec = vec * np.sign(vec[int(np.argmax(np.abs(vec)))] or 1.0)
        out = out + vec
    return out


def _parse_state_spec(label: str, text: str, sysd) -> np.ndarray:
    if text == "zero":
        return np.zeros(sysd.n)
    if text.startswith("modes:"):
        try:
            modes = tuple(int(k) for k in text[len("modes:"):].split(","))
        except ValueError:
            raise SpecFormatError(f"--{label}: cannot parse mode list {text!r}") from None
        if not modes or min(modes) < 1 or max(modes) > sysd.n:
            raise SpecFormatError(f"--{label}: mode indices must lie in [1, {sysd.n}]")
        return _modal_vector(sysd, modes)
    raise SpecFormatError(f"--{label}: unknown state spec {text!r} (use 'zero' or 'modes:1,2')")


def _initial_state(sysd, u0_spec: str, v0_spec: str) -> State:
    u = _parse_state_spec("u0", u0_spec, sysd)
    v = _parse_state_spec("v0", v0_spec, sysd)
    e0 = sysd.energy(u, v)
    if e0 > 0:
        scale = 1.0 / np.sqrt(e0)
        u, v = u * scale, v * scale
    return State(u, v, 0.0)


def _fit_dict(fit) -> dict:
    d = dataclasses.asdict(fit)
    d["window"] = list(d["window"])
    return d


def _json_dump(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_manifest(out_dir: Path, command: str, spec_path, spec: NetworkSpec,
                    flags: dict, seed: int, outputs: list[str],
                    name: str = "manifest.json") -> None:
    manifest = {
        "command": command,
        "spec_path": str(spec_path),
        "spec": spec.document,
        "flags": flags,
        "seed": seed,
        "versions": {
            "graphwave": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": platform.python_version(),
        },
        "outputs": sorted(outputs),
    }
    _json_dump(out_dir / name, manifest)


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("GRAPHWAVE_THREADS")
    return max(1, int(env)) if env else 1


def _validation_bundle(spec: NetworkSpec, strict_leaves: bool):
    structure = validate_structure(spec.graph, spec.damping, strict_leaves=strict_leaves)
    prop = check_property_P(spec.graph, spec.damping,
                            tol=spec.tolerances.get("node_tol"))
    cont = classify_continuity(spec.graph, spec.damping,
                               tol=spec.tolerances.get("continuity_tol"))
    predicted = predict_regime(structure, prop, cont)
    labels = spec.graph.vertex_labels
    report = {
        "structure": {
            "overall": structure.overall,
            "has_kv_edge": structure.has_kv_edge,
            "elastic_components": [
                {
                    "edges": [spec.graph.edge_labels[i] for i in c.edge_ids],
                    "is_tree": c.is_tree,
                    "leaf_attachment_ok": c.leaf_attachment_ok,
                }
                for c in structure.elastic_components
            ],
            "messages": list(structure.messages),
        },
        "property_check": {
            "overall": prop.overall,
            "node_values": {labels[v]: prop.node_values[v] for v in prop.node_values},
            "messages": list(prop.messages),
        },
        "continuity": {
            "case": cont.case,
            "node_values": {labels[v]: list(cont.node_values[v]) for v in cont.node_values},
        },
        "predicted": predicted,
    }
    return structure, prop, cont, predicted, report


def cmd_validate(args) -> int:
    spec = load_network(args.spec, default_resolution=args.resolution)
    structure, prop, cont, predicted, report = _validation_bundle(spec, args.strict_leaves)
    print(f"structure: {structure.overall}")
    for msg in structure.messages:
        print(f"  - {msg}")
    print(f"damping property check: {'pass' if prop.overall else 'fail'}")
    for msg in prop.messages:
        print(f"  - {msg}")
    print(f"coefficient continuity: case {cont.case}")
    print(f"predicted regime: {predicted}")
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        _json_dump(out, report)
        _write_manifest(out.parent, "validate", args.spec, spec,
                        {"strict_leaves": args.strict_leaves, "resolution": args.resolution},
                        args.seed, [out.name], name=out.stem + ".manifest.json")
    ok = structure.passed and prop.overall
    return 0 if ok else 1


def cmd_simulate(args) -> int:
    spec = load_network(args.spec, default_resolution=args.resolution)
    sysd = build_system(spec)
    state0 = _initial_state(sysd, args.u0, args.v0)
    dt = args.dt if args.dt is not None else default_dt(sysd)
    trace = run(sysd, state0, dt=dt, T=args.T, sample_every=args.sample_every)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    trace.write_csv(out)
    outputs = [out.name]

    window = tuple(args.fit_window) if args.fit_window else (0.1 * args.T, args.T)
    fits: dict = {"window": list(window), "exponential": None, "power": None, "errors": {}}
    for name, fitter in (("exponential", fit_exponential), ("power", fit_power)):
        try:
            fits[name] = _fit_dict(fitter(trace, window))
        except (WindowTooShort, EnergyUnderflow) as exc:
            fits["errors"][name] = str(exc)
    fit_path = out.with_name(out.stem + ".fit.json")
    _json_dump(fit_path, fits)
    outputs.append(fit_path.name)

    if args.dump_matrices:
        outputs += [p.name for p in dump_matrices(sysd, out.parent)]
    _write_manifest(out.parent, "simulate", args.spec, spec,
                    {"dt": dt, "T": args.T, "sample_every": args.sample_every,
                     "u0": args.u0, "v0": args.v0, "fit_window": list(window),
                     "resolution": args.resolution},
                    args.seed, outputs, name=out.stem + ".manifest.json")
    print(f"steps: {int(round(args.T / dt))}  E(0) = {trace.E0:.6g}  "
          f"E(T) = {trace.E[-1]:.6g}  max dissipation residual = "
          f"{float(np.max(trace.diss_residual)):.3e}")
    return 0


def cmd_spectrum(args) -> int:
    spec = load_network(args.spec, default_resolution=args.resolution)
    sysd = build_system(spec)
    spectrum = eigenvalues(sysd)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    spectrum.write_csv(out)
    outputs = [out.name]
    if args.dump_matrices:
        outputs += [p.name for p in dump_matrices(sysd, out.parent)]
    _write_manifest(out.parent, "spectrum", args.spec, spec,
                    {"resolution": args.resolution}, args.seed, outputs,
                    name=out.stem + ".manifest.json")
    print(f"{len(spectrum.eigenvalues)} eigenvalues, max Re = {spectrum.max_real:.6g}")
    return 0


def cmd_resolvent(args) -> int:
    spec = load_network(args.spec, default_resolution=args.resolution)
    sysd = build_system(spec)
    beta_max = args.beta_max if args.beta_max is not None else resolved_band_limit(sysd)
    beta_min = args.beta_min if args.beta_min is not None else beta_max / 100.0
    scan = resolvent_scan(sysd, beta_min, beta_max, points=args.points,
                          threads=_threads(args))
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    scan.write_csv(out)
    scan_meta = {"slope": scan.slope, "fit_band": list(scan.fit_band), "n_fit": scan.n_fit}
    meta_path = out.with_name(out.stem + ".scan.json")
    _json_dump(meta_path, scan_meta)
    _write_manifest(out.parent, "resolvent", args.spec, spec,
                    {"beta_min": beta_min, "beta_max": beta_max, "points": args.points,
                     "resolution": args.resolution},
                    args.seed, [out.name, meta_path.name], name=out.stem + ".manifest.json")
    print(f"scan [{beta_min:.4g}, {beta_max:.4g}] x {args.points}: "
          f"log-log slope = {scan.slope:.4f}")
    return 0


def cmd_report(args) -> int:
    spec = load_network(args.spec, default_resolution=args.resolution)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []

    structure, prop, cont, predicted, vreport = _validation_bundle(spec, args.strict_leaves)
    _json_dump(out_dir / "validate.json", vreport)
    outputs.append("validate.json")
    print(f"predicted regime: {predicted}")

    sysd = build_system(spec)
    spectrum = eigenvalues(sysd)
    spectrum.write_csv(out_dir / "spectrum.csv")
    outputs.append("spectrum.csv")
    stable = spectrum.max_real < -STABILITY_MARGIN
    print(f"max Re(lambda) = {spectrum.max_real:.6g}")

    # scanning an undamped system would chase resolvent singularities
    scan = scan_fine = verdict = None
    if stable:
        beta_max = resolved_band_limit(sysd)
        beta_min = beta_max / 100.0
        threads = _threads(args)
        scan = resolvent_scan(sysd, beta_min, beta_max, points=args.points,
                              threads=threads)
        scan.write_csv(out_dir / "resolvent.csv")
        outputs.append("resolvent.csv")
        refined_cells = {eid: 2 * c for eid, c in spec.cells.items()}
        mesh_fine = build_mesh(spec.graph, refined_cells, damping=spec.damping)
        sys_fine = assemble(mesh_fine, spec.damping)
        scan_fine = resolvent_scan(sys_fine, beta_min, beta_max, points=args.points,
                                   threads=threads)
        scan_fine.write_csv(out_dir / "resolvent_refined.csv")
        outputs.append("resolvent_refined.csv")
        print(f"resolvent slope: {scan.slope:.4f} (refined mesh: {scan_fine.slope:.4f})")
        verdict = classify_stability(spectrum, scan)

    decay_fit = None
    fit_error = None
    if predicted == "exponential":
        T, window, fitter = 50.0, (5.0, 50.0), fit_exponential
    elif predicted == "polynomial-t-2":
        T, window, fitter = 200.0, (20.0, 200.0), fit_power
    else:
        T, window, fitter = (10.0, None, None) if predicted == "not-asymptotically-stable" else (0.0, None, None)
    if T > 0:
        state0 = _initial_state(sysd, "modes:1,2", "zero")
        dt = default_dt(sysd)
        sample_every = max(1, int(round((T / dt) / 20000)))
        trace = run(sysd, state0, dt=dt, T=T, sample_every=sample_every)
        trace.write_csv(out_dir / "trace.csv")
        outputs.append("trace.csv")
        if fitter is not None:
            try:
                decay_fit = fitter(trace, window)
            except (WindowTooShort, EnergyUnderflow) as exc:
                fit_error = str(exc)

    if predicted == "exponential":
        agreement = (
            stable
            and scan is not None
            and abs(scan.slope) <= EXP_SLOPE_MAX
            and abs(scan_fine.slope) <= EXP_SLOPE_MAX
            and decay_fit is not None
            and decay_fit.r_squared >= EXP_R2_MIN
        )
    elif predicted == "polynomial-t-2":
        lo, hi = POLY_SLOPE_BAND
        plo, phi = POLY_EXPONENT_BAND
        agreement = (
            stable
            and scan is not None
            and lo <= scan.slope <= hi
            and lo <= scan_fine.slope <= hi
            and decay_fit is not None
            and plo <= decay_fit.rate <= phi
        )
    elif predicted == "not-asymptotically-stable":
        agreement = spectrum.max_real >= -STABILITY_MARGIN
    else:
        agreement = False

    report = {
        "predicted": predicted,
        "asymptotically_stable": bool(stable),
        "max_real_part": spectrum.max_real,
        "spectral_classification": verdict.classification if verdict else None,
        "resolvent_slope": scan.slope if scan else None,
        "resolvent_slope_refined": scan_fine.slope if scan_fine else None,
        "slope_mesh_stable": bool(abs(scan.slope - scan_fine.slope) <= 0.1)
        if scan and scan_fine else None,
        "decay_fit": _fit_dict(decay_fit) if decay_fit is not None else None,
        "decay_fit_error": fit_error,
        "agreement": bool(agreement),
    }
    _json_dump(out_dir / "report.json", report)
    outputs.append("report.json")
    if args.dump_matrices:
        outputs += [p.name for p in dump_matrices(sysd, out_dir)]
    _write_manifest(out_dir, "report", args.spec, spec,
                    {"resolution": args.resolution, "points": args.points,
                     "strict_leaves": args.strict_leaves},
                    args.seed, outputs)
    print("measured:"
          + (f" slope={scan.slope:.3f}" if scan else " (no scan)")
          + (f", decay rate/exponent={decay_fit.rate:.3f} (r2={decay_fit.r_squared:.3f})"
             if decay_fit else "")
          + f" -> agreement: {agreement}")
    return 0 if agreement else 1


def _add_common(p) -> None:
    p.add_argument("spec", help="network spec JSON file")
    p.add_argument("--resolution", type=int, default=DEFAULT_RESOLUTION,
                   help="default cells per unit length for edges without 'cells'")
    p.add_argument("--seed", type=int, default=0, help="seed recorded in the manifest")
    p.add_argument("--threads", type=int, default=None,
                   help="parallel resolvent evaluations (default: GRAPHWAVE_THREADS or 1)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="graphwave",
        description="Damped wave networks on metric graphs: validation, "
                    "simulation, and spectral stability diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check structure, damping hypotheses, and regime")
    _add_common(p)
    p.add_argument("--strict-leaves", action="store_true",
                   help="require K-V attachment even at Dirichlet leaves")
    p.add_argument("--out", default=None, help="write the JSON report here")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate", help="time-integrate and record the energy trace")
    _add_common(p)
    p.add_argument("--dt", type=float, default=None, help="time step (default: h_min/2)")
    p.add_argument("--T", type=float, default=50.0, help="final time")
    p.add_argument("--sample-every", type=int, default=1)
    p.add_argument("--u0", default="modes:1,2", help="'zero' or 'modes:1,2'")
    p.add_argument("--v0", default="zero", help="'zero' or 'modes:1,2'")
    p.add_argument("--fit-window", type=float, nargs=2, default=None,
                   metavar=("T0", "T1"))
    p.add_argument("--out", default="trace.csv")
    p.add_argument("--dump-matrices", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="eigenvalues of the quadratic pencil")
    _add_common(p)
    p.add_argument("--out", default="spectrum.csv")
    p.add_argument("--dump-matrices", action="store_true")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("resolvent", help="resolvent norms along the imaginary axis")
    _add_common(p)
    p.add_argument("--beta-min", type=float, default=None)
    p.add_argument("--beta-max", type=float, default=None)
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out", default="resolvent.csv")
    p.set_defaults(func=cmd_resolvent)

    p = sub.add_parser("report", help="predicted vs measured regime, consolidated")
    _add_common(p)
    p.add_argument("--strict-leaves", action="store_true")
    p.add_argument("--points", type=int, default=41)
    p.add_argument("--out-dir", default="report")
    p.add_argument("--dump-matrices", action="store_true")
    p.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpecFormatError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 2
    except GraphWaveError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    _sys.exit(main())

"""Command-line front end: ``run``, ``mms`` and ``compare``.

Exit codes: 0 success, 1 verification target missed (``mms``), 2 invalid
configuration, 3 equation-of-state domain abort, 4 secant non-convergence,
5 positivity failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .cases import BUILTIN, CaseDefinition, CaseError, from_dict, load_case
from .diagnostics import COST_MODEL, fmt, write_summary
from .eos import EosDomainError
from .grid import total_energy
from .solver import run
from .spatial import FluxError
from .temporal import PositivityError, SecantConvergenceError
from .verification import MMS_MESHES, MmsConfig, run_mms_convergence

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_EOS = 3
EXIT_SECANT = 4
EXIT_POSITIVITY = 5

PROFILE_COLUMNS = ("x", "rho", "u", "P", "T", "e", "Gamma", "Z")

# variant keys accepted by ``compare`` and the case field each one sets
VARIANT_KEYS = {"phi": "variable_set", "mode": "mode", "order": "order", "rhobar": "rhobar",
                "cells": "n_cells", "cfl": "cfl", "limiter": "limiter"}
_CASTS = {"order": int, "n_cells": int, "cfl": float}


def _case_overrides(args) -> dict:
    return {"variable_set": getattr(args, "phi", None), "mode": getattr(args, "mode", None),
            "order": getattr(args, "order", None), "n_cells": getattr(args, "cells", None),
            "cfl": getattr(args, "cfl", None), "rhobar": getattr(args, "rhobar", None),
            "t_final": getattr(args, "t_final", None), "limiter": getattr(args, "limiter", None)}


def resolve_case(name: str, config: str | None = None, **overrides) -> CaseDefinition:
    """Built-in or file case, then the JSON config file, then explicit flags."""
    case = load_case(name)
    if config:
        path = Path(config)
        try:
            data = json.loads(path.read_text())
        except FileNotFoundError:
            raise CaseError(f"config file {path} not found") from None
        except json.JSONDecodeError as exc:
            raise CaseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
        if not isinstance(data, dict):
            raise CaseError(f"{path}: top-level JSON value must be an object")
        case = from_dict(data, base=None if "base" in data else case)
    try:
        return case.with_overrides(**overrides)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, EosDomainError):
            raise
        raise CaseError(str(exc)) from exc


def parse_variant(text: str) -> dict:
    """``"mode=simplified,phi=e"`` or a bare mode name into case overrides."""
    out = {}
    for item in filter(None, (p.strip() for p in text.split(","))):
        if "=" not in item:
            out["mode"] = item
            continue
        key, value = (s.strip() for s in item.split("=", 1))
        if key not in VARIANT_KEYS:
            raise CaseError(f"unknown variant key {key!r} in {text!r}; "
                            f"known: {sorted(VARIANT_KEYS)}")
        field = VARIANT_KEYS[key]
        try:
            out[field] = _CASTS.get(field, str)(value)
        except ValueError:
            raise CaseError(f"bad value {value!r} for {key}") from None
    return out


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_profiles(path: Path, snapshots) -> None:
    """Long-format profiles: one row per cell per snapshot time."""
    rows = []
    for t, prof in snapshots:
        cols = [np.broadcast_to(t, prof["x"].shape)] + [prof[c] for c in PROFILE_COLUMNS]
        rows.extend(zip(*cols))
    _write_rows(path, ("t",) + PROFILE_COLUMNS, rows)


def _plot(path: Path, x, curves: dict, title: str) -> bool:
    """SVG of density, velocity and pressure; skipped quietly without matplotlib."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return False
    plt.rcParams["svg.hashsalt"] = "phieuler"
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, key in zip(axes, ("rho", "u", "P")):
        for label, prof in curves.items():
            ax.plot(x, prof[key], lw=1, label=label)
        ax.set_xlabel("x")
        ax.set_title(key)
    if len(curves) > 1:
        axes[0].legend(fontsize=7)
    fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return True


def cmd_run(args) -> int:
    case = resolve_case(args.case, args.config, **_case_overrides(args))
    out = Path(args.out or f"runs/{case.name}")
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(case.to_dict(), indent=2, sort_keys=True))
    times = sorted(set(args.snapshots or []) | {case.t_final})
    result = run(case, snapshot_times=times, max_steps=args.max_steps)
    snaps = [(t, result.profiles(f)) for t, f in result.snapshots]
    if not snaps or snaps[-1][0] != result.t:
        snaps.append((result.t, result.profiles()))
    write_profiles(out / "profiles.csv", snaps)
    result.ledger.write_csv(out / "imbalance.csv")
    summary = result.summary()
    summary.pop("wall_time_s")  # keeps summary.json byte-identical between runs
    write_summary(out / "summary.json", run=summary, cost_model=COST_MODEL,
                  config=case.to_dict())
    if not args.no_plot:
        _plot(out / "profiles.svg", snaps[-1][1]["x"], {case.name: snaps[-1][1]},
              f"{case.name}  t = {result.t:.6g}")
    sec = result.secant
    print(f"{case.name}: {result.n_steps} steps to t = {result.t:.6g}, "
          f"I = {result.imbalance:.3e}, EoS calls = {result.counters.total}"
          + (f", secant avg {sec.average:.4f} max {sec.max}" if sec.samples else ""))
    print(f"wrote {out}/")
    return EXIT_OK


def cmd_mms(args) -> int:
    meshes = [int(m) for m in args.meshes.split(",")] if args.meshes else list(MMS_MESHES)
    if len(meshes) < 2 or any(b <= a for a, b in zip(meshes, meshes[1:])):
        raise CaseError("--meshes needs at least two strictly increasing cell counts")
    if len(meshes) < 5:
        print(f"note: {len(meshes) - 1} refinements; at least 4 are recommended",
              file=sys.stderr)
    config = MmsConfig()
    if args.zero_amplitudes:
        config = config.zero_amplitudes()
    res = run_mms_convergence(meshes, order=args.order, variable_set=args.phi,
                              limiter=args.limiter, config=config, dt_policy=args.dt_policy,
                              cfl=args.cfl, jobs=args.jobs)
    out = Path(args.out or "runs/mms")
    out.mkdir(parents=True, exist_ok=True)
    res.write_csv(out / "convergence.csv")
    names = list(res.errors)
    print("n_cells " + " ".join(f"{'e_' + n:>11s} {'rate':>6s}" for n in names))
    for k, n in enumerate(meshes):
        cells = []
        for name in names:
            rate = res.rates[name][k - 1] if k else float("nan")
            rate_s = "n/a" if not np.isfinite(rate) else f"{rate:.3f}"
            cells.append(f"{res.errors[name][k]:11.4e} {rate_s:>6s}")
        print(f"{n:7d} " + " ".join(cells))
    final = res.final_rate
    if not np.isfinite(final):
        print("rates not applicable (errors at round-off)")
        return EXIT_OK
    ok = abs(final - args.order) <= 0.2
    print(f"final rate {final:.3f} for order {args.order}: {'ok' if ok else 'MISSED'}")
    return EXIT_OK if ok else EXIT_VERIFICATION


def _variant_run(task):
    label, case = task
    result = run(case)
    prof = result.profiles()
    prof["Et"] = total_energy(result.field, case.eos)
    return label, prof, result.summary()


def relative_linf(a, b, positive: bool = True) -> float:
    """Per-cell relative L-infinity difference; sign-changing fields scale by max |b|."""
    a, b = np.asarray(a, float), np.asarray(b, float)
    if positive:
        return float(np.max(np.abs(a - b) / np.abs(b)))
    scale = np.max(np.abs(b))
    return float(np.max(np.abs(a - b)) / scale) if scale > 0 else float(np.max(np.abs(a - b)))


def compare_variants(case: CaseDefinition, variants: list[str], jobs: int = 1):
    """Run every variant of ``case``; returns ``(labels, profiles, summaries, pairwise)``."""
    tasks = [(v, case.with_overrides(**parse_variant(v))) for v in variants]
    if len({c.n_cells for _, c in tasks}) > 1:
        raise CaseError("variants must share the mesh to compare per cell")
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_variant_run, tasks))
    else:
        outcomes = [_variant_run(t) for t in tasks]
    labels = [o[0] for o in outcomes]
    profs = {o[0]: o[1] for o in outcomes}
    summaries = {o[0]: o[2] for o in outcomes}
    pairwise = {}
    for i, a in enumerate(labels):
        for b in labels[i + 1:]:
            pa, pb = profs[a], profs[b]
            pairwise[f"{a} vs {b}"] = {
                "rho": relative_linf(pa["rho"], pb["rho"]),
                "P": relative_linf(pa["P"], pb["P"]),
                "T": relative_linf(pa["T"], pb["T"]),
                "Et": relative_linf(pa["Et"], pb["Et"]),
                "u": relative_linf(pa["u"], pb["u"], positive=False)}
    return labels, profs, summaries, pairwise


def cmd_compare(args) -> int:
    if not args.variants or len(args.variants) < 2:
        raise CaseError("compare needs at least two --variants")
    case = resolve_case(args.case, args.config, n_cells=args.cells, t_final=args.t_final)
    labels, profs, summaries, pairwise = compare_variants(case, args.variants, args.jobs)
    out = Path(args.out or f"runs/{case.name}-compare")
    out.mkdir(parents=True, exist_ok=True)
    keys = ("rho", "u", "P", "T", "Et")
    base = labels[0]
    header = ["x"] + [f"{k}[{v}]" for v in labels for k in keys]
    header += [f"d_{k}[{v}]" for v in labels[1:] for k in keys]
    cols = [profs[base]["x"]] + [profs[v][k] for v in labels for k in keys]
    cols += [profs[v][k] - profs[base][k] for v in labels[1:] for k in keys]
    _write_rows(out / "comparison.csv", header, zip(*cols))
    write_summary(out / "comparison.json", pairwise_relative_linf=pairwise, runs=summaries,
                  config=case.to_dict(), variants=labels)
    if not args.no_plot:
        _plot(out / "comparison.svg", profs[base]["x"], profs, f"{case.name} variants")
    width = max(len(k) for k in pairwise)
    print(f"{'pair':<{width}s}  {'rho':>9s} {'u':>9s} {'P':>9s} {'T':>9s} {'Et':>9s}")
    for pair, d in pairwise.items():
        print(f"{pair:<{width}s}  " + " ".join(f"{d[k]:9.2e}" for k in ("rho", "u", "P", "T", "Et")))
    for label in labels:
        print(f"{label}: I = {summaries[label]['imbalance_final']:.3e}, "
              f"EoS calls = {summaries[label]['eos_calls']['total_calls']}")
    print(f"wrote {out}/")
    return EXIT_OK


def _floats(text):
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phieuler",
                                description="1-D Euler solver with a conservative "
                                            "thermodynamic-variable update.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="integrate one case")
    r.add_argument("case", help=f"built-in case ({', '.join(sorted(BUILTIN))}) or JSON file")
    r.add_argument("--phi", choices=["T", "P", "e", "h", "s"])
    r.add_argument("--mode", choices=["secant", "simplified", "reference-et"])
    r.add_argument("--order", type=int, choices=[1, 2])
    r.add_argument("--cells", type=int)
    r.add_argument("--cfl", type=float)
    r.add_argument("--rhobar", choices=["n", "np1", "mean"])
    r.add_argument("--limiter", choices=["barth-jespersen", "none"])
    r.add_argument("--t-final", type=float)
    r.add_argument("--max-steps", type=int)
    r.add_argument("--snapshots", type=_floats, help="comma-separated output times")
    r.add_argument("--config", help="JSON file overriding case fields")
    r.add_argument("--out")
    r.add_argument("--no-plot", action="store_true")
    r.set_defaults(func=cmd_run)

    m = sub.add_parser("mms", help="manufactured-solution convergence sweep")
    m.add_argument("--order", type=int, choices=[1, 2], default=2)
    m.add_argument("--meshes", help="comma-separated cell counts (default 50,...,800)")
    m.add_argument("--phi", choices=["T", "P", "e", "h", "s", "Et"], default="T")
    m.add_argument("--limiter", choices=["barth-jespersen", "none"], default="none")
    m.add_argument("--dt-policy", choices=["dx2", "cfl"], default="dx2")
    m.add_argument("--cfl", type=float, default=0.5)
    m.add_argument("--zero-amplitudes", action="store_true")
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(func=cmd_mms)

    c = sub.add_parser("compare", help="run variants of one case and diff them per cell")
    c.add_argument("case")
    c.add_argument("--variants", nargs="+",
                   help="e.g. rhobar=n rhobar=np1 or mode=simplified,phi=e")
    c.add_argument("--cells", type=int)
    c.add_argument("--t-final", type=float)
    c.add_argument("--config")
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--out")
    c.add_argument("--no-plot", action="store_true")
    c.set_defaults(func=cmd_compare)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EosDomainError as exc:
        print(f"error: equation of state domain: {exc}", file=sys.stderr)
        return EXIT_EOS
    except FluxError as exc:
        print(f"error: degenerate flux: {exc}", file=sys.stderr)
        return EXIT_EOS
    except SecantConvergenceError as exc:
        print(f"error: secant search: {exc}", file=sys.stderr)
        return EXIT_SECANT
    except PositivityError as exc:
        print(f"error: positivity: {exc}", file=sys.stderr)
        return EXIT_POSITIVITY
    except (CaseError, ValueError) as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

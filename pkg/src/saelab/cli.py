"""Command-line front end: ``sae <subcommand> [options]``.

Every subcommand prints one JSON document (or CSV with ``--format csv``) to
stdout, or writes it to ``--out`` and prints a one-line summary instead.
Numbers carry 12 significant digits; complex values become ``{"re", "im"}``
in JSON and ``<name>_re, <name>_im`` column pairs in CSV; non-finite reals
are written as the strings ``inf``, ``-inf``, ``nan``. Exit status is 0 on
success, 1 on invalid input and 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources

import numpy as np

from saelab import ccr, dynamics, forms, operators, spectral
from saelab import witness as W
from saelab.actions import DIRICHLET, LAPLACIAN, BoundaryCondition, FormalAction, parse_action, parse_bc
from saelab.errors import NumericalError, ValidationError
from saelab.geometry import HalfLine, Interval, Line, TruncatedLine
from saelab.grid import inner, make_grid, sample

SIG_DIGITS = 12


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def _num(x: float):
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return float(f"{x:.{SIG_DIGITS}g}") + 0.0  # + 0.0 folds -0 into 0


def to_jsonable(obj):
    """Recursively round numbers and convert numpy / complex values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    return obj


def _cell(v) -> list[tuple[str, str]]:
    if isinstance(v, dict) and set(v) == {"re", "im"}:
        return [("_re", _csv_scalar(v["re"])), ("_im", _csv_scalar(v["im"]))]
    return [("", _csv_scalar(v))]


def _csv_scalar(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    if isinstance(v, (list, dict)):
        return json.dumps(v, separators=(",", ":"))
    return str(v)


def to_csv(doc: dict) -> str:
    """The result table if there is one, else ``key,value`` rows of the result."""
    result = doc["result"]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    table = result.get("table")
    if table:
        header, rows = None, []
        for row in table:
            cells = []
            for k, v in row.items():
                cells.extend((k + suffix, s) for suffix, s in _cell(v))
            if header is None:
                header = [c[0] for c in cells]
            rows.append([c[1] for c in cells])
        w.writerow(header)
        w.writerows(rows)
    else:
        w.writerow(["key", "value"])
        for k, v in result.items():
            for suffix, s in _cell(v):
                w.writerow([k + suffix, s])
    return buf.getvalue()


def render(doc: dict, fmt: str) -> str:
    if fmt == "csv":
        return to_csv(doc)
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def schema_name(doc: dict) -> str:
    sub = doc["params"].get("action_name")
    return f"{doc['command']}-{sub}" if sub else doc["command"]


def load_schema(name: str) -> dict:
    path = resources.files("saelab").joinpath("schemas", f"{name}.json")
    return json.loads(path.read_text(encoding="utf-8"))


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------

def _pair(text: str) -> tuple[float, float]:
    try:
        a, b = (float(v) for v in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'a,b', got {text!r}") from exc
    return a, b


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _ints(text: str) -> list[int]:
    return [int(v) for v in _floats(text)]


def _range(text: str) -> range:
    lo, hi = _pair(text)
    return range(int(lo), int(hi) + 1)


def _bc(args) -> BoundaryCondition:
    return parse_bc(args.bc, args.theta)


def _geometry(args):
    if getattr(args, "line", None) is not None:
        return TruncatedLine(args.line)
    a, b = args.interval
    return Interval(a, b)


def _action(args) -> FormalAction:
    pot = None
    if args.action == "schrodinger":
        if args.potential != "harmonic":
            raise ValidationError("schrodinger needs --potential harmonic")
        pot = W.polynomial([0, 0, 1], label="x^2")
    return parse_action(args.action, pot)


def _map(fn, items, jobs: int):
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _reference_levels(action, bc, geom, count):
    """Closed-form levels for the configurations that have them, else ``None``s."""
    if action.kind == "schrodinger" and isinstance(geom, TruncatedLine):
        return [2 * n + 1.0 for n in range(count)]
    if action.kind in ("momentum", "laplacian") and bc.kind != "maximal":
        if bc.kind == "dirichlet" and action.kind == "laplacian":
            pts = operators.point_spectrum_bc(action, bc, geom, range(1, count + 1))
            return [lam for lam, _ in pts]
        if bc.wraps:
            half = count // 2 + 2
            pts = operators.point_spectrum_bc(action, bc, geom, range(-half, half + 1))
            return [lam for lam, _ in pts]
    return None


def cmd_spectrum(args):
    action, bc, geom = _action(args), _bc(args), _geometry(args)
    op = operators.assemble(action, bc, make_grid(geom, args.n_grid))
    dec = spectral.eigendecompose(op, backend=args.backend)
    lam = dec.eigenvalues[: args.modes]
    ref = _reference_levels(action, bc, geom, args.modes)
    rows = []
    for k, val in enumerate(lam):
        if ref is None:
            r = None
        elif action.kind == "momentum" or bc.wraps:
            r = min(ref, key=lambda z: abs(z - val))
        else:
            r = ref[k]
        rel = None if r is None else abs(val - r) / max(1.0, abs(r))
        rows.append({"n": k + (1 if bc.kind == "dirichlet" and action.kind == "laplacian" else 0),
                     "eigenvalue": float(val), "reference": r, "rel_err": rel})
    res = dec.residuals()[: args.modes]
    return {"operator": op.name, "gram_defect": dec.gram_defect(),
            "max_residual": float(np.max(res)) if res.size else 0.0, "table": rows}


def _datum(kind: str, grid):
    if kind == "smooth":
        return dynamics.smooth_datum(grid)
    if kind == "step":
        return dynamics.step_datum(grid)
    if kind == "bump":
        return sample(W.standard_bump(), grid)
    raise ValidationError(f"unknown datum {kind!r}")


def cmd_evolve(args):
    bc = _bc(args)
    grid = make_grid(Interval(0.0, 1.0), args.n_grid)
    op = operators.assemble(LAPLACIAN, bc, grid)
    dec = spectral.eigendecompose(op)
    psi0 = _datum(args.datum, grid)
    rows = []
    for t in args.t:
        psi = dynamics.propagate(dec, psi0, t)
        rows.append({"t": t, "norm": math.sqrt(max(inner(psi, psi).real, 0.0)),
                     "overlap": inner(psi0, psi), "bc_residual": dynamics.bc_violation(op, psi)})
    return {"operator": op.name, "datum": args.datum, "table": rows}


def _suite_chunk(spec):
    seed, count, n_grid = spec
    return dynamics.propagator_suite(seed, count, N=n_grid)


def cmd_check_propagator(args):
    # cases are generated in fixed chunks of 10 so --jobs never changes the draws
    seeds = np.random.SeedSequence(args.seed).spawn(math.ceil(args.cases / 10))
    specs = []
    for k, ss in enumerate(seeds):
        specs.append((int(ss.generate_state(1)[0]), min(10, args.cases - 10 * k), args.n_grid))
    cases = [c for chunk in _map(_suite_chunk, specs, args.jobs) for c in chunk]
    rows = []
    for c in cases:
        r = c.report
        prof = [d for _, d in r.continuity_profile]
        rows.append({"bc": c.bc, "theta": c.theta, "t1": c.t1, "t2": c.t2,
                     "unitarity_defect": r.unitarity_defect, "group_defect": r.group_defect,
                     "commutation_defect": r.commutation_defect, "bc_residual": r.bc_residual,
                     "generator_defect": r.generator_defect, "generator_norm": r.generator_norm,
                     "continuity_monotone": bool(np.all(np.diff(prof) < 0))})
    keys = ("unitarity_defect", "group_defect", "commutation_defect", "bc_residual")
    summary = {k: max(row[k] for row in rows) if rows else 0.0 for k in keys}
    ok = all(v <= 1e-8 for v in summary.values()) and all(r["continuity_monotone"] for r in rows)
    return {"cases": len(rows), "max_defects": summary, "passed": ok, "table": rows}


def cmd_series_exp(args):
    grid = make_grid(Interval(0.0, 1.0), args.n_grid)
    op = operators.assemble(LAPLACIAN, DIRICHLET, grid)
    rep = dynamics.series_exponential(op, _datum(args.datum, grid), args.t, max_terms=args.max_terms)
    stride = max(1, len(rep.log10_term_norms) // 200)
    table = [{"n": int(k), "log10_term_norm": float(v)}
             for k, v in enumerate(rep.log10_term_norms) if k % stride == 0]
    return {"datum": args.datum, "t": args.t, "terms_used": rep.terms_used, "converged": rep.converged,
            "peak_ratio_log10": rep.peak_ratio_log10, "final_error": rep.final_error,
            "overflow_index": rep.overflow_index, "verdict": rep.verdict, "table": table}


def _nonunique_one(spec):
    t, n_grid = spec
    r = dynamics.nonuniqueness_demo(W.standard_bump(), t, N=n_grid)
    return {"t": t, "distance": r.distance, **r.bc_residuals,
            "outside_mass_dirichlet": r.outside_mass["dirichlet"],
            "outside_mass_periodic": r.outside_mass["periodic"],
            "dirichlet_modes": r.dirichlet_modes, "periodic_modes": r.periodic_modes,
            "truncated": r.truncated}


def cmd_nonunique(args):
    rows = _map(_nonunique_one, [(t, args.n_grid) for t in args.t], args.jobs)
    return {"datum": "standard bump", "table": rows}


def _trials_12i():
    return [W.quadratic_12i(), W.constant(1.0)]


def cmd_hermiticity(args):
    action = parse_action(args.action)
    bc = _bc(args)
    a, b = args.interval
    if bc.kind == "maximal":
        trials = _trials_12i()
    elif bc.kind == "dirichlet":
        trials = [W.sine_mode(n, a, b) for n in (1, 2, 3)]
    else:
        L = b - a
        trials = [W.plane_wave((bc.theta + 2 * np.pi * n) / L, a, b) for n in (-1, 0, 1, 2)]
    d = operators.hermiticity_defect(action, bc, trials, Interval(a, b))
    return {"action": action.kind, "bc": bc.kind, "theta": bc.theta,
            "trials": [t.label for t in trials], "defect": d}


WITNESSES = {
    "quadratic-12i": W.quadratic_12i,
    "gaussian": W.gaussian,
    "bump": W.standard_bump,
}


def cmd_expectation(args):
    action = parse_action(args.action)
    psi = WITNESSES[args.witness]()
    a, b = args.interval
    val = operators.expectation(action, psi, Interval(a, b), N=args.n_grid)
    return {"action": action.kind, "witness": psi.label, "value": val}


def cmd_point_spectrum(args):
    action, bc = parse_action(args.action), _bc(args)
    a, b = args.interval
    pts = operators.point_spectrum_bc(action, bc, Interval(a, b), args.range)
    return {"action": action.kind, "bc": bc.kind, "theta": bc.theta,
            "table": [{"k": k, "eigenvalue": lam, "eigenfunction": w.label} for k, (lam, w) in enumerate(pts)]}


GEOMETRIES = {"interval": lambda: Interval(0.0, 1.0), "half-line": HalfLine, "line": Line}


def cmd_deficiency(args):
    actions = [args.action] if args.action else ["momentum", "laplacian"]
    geoms = [args.geometry] if args.geometry else list(GEOMETRIES)
    rows = []
    for act in actions:
        for g in geoms:
            r = operators.deficiency_indices(parse_action(act), GEOMETRIES[g]())
            rows.append({"action": act, "geometry": g, "n_plus": r.n_plus, "n_minus": r.n_minus})
    return {"table": rows}


FORM_FACTORIES = {
    "dirichlet": forms.dirichlet_energy,
    "position": forms.position_form,
    "delta": forms.delta_at_zero,
    "x2": forms.x2_form,
}


def _form_bound(args):
    rng = np.random.default_rng(args.seed)
    if args.form == "coulomb":
        form = forms.radial_coulomb(args.z)
        alphas = (0.5, 1.0, 2.0, 4.0)
        trials = [forms.hydrogenic_trial(a * args.z / 2) for a in alphas]
        m = -args.z**2 / 4 if args.m is None else args.m
        labels = [f"r exp(-{a * args.z / 2:g} r)" for a in alphas]
    elif args.form == "dirichlet":
        form = forms.dirichlet_energy()
        trials = forms.random_dirichlet_trials(rng, args.trials)
        m = math.pi**2 if args.m is None else args.m
        labels = [f"trial {k}" for k in range(len(trials))]
    elif args.form == "x2":
        form = forms.x2_form()
        trials = [W.gaussian(float(a), float(c)) for a, c in zip(rng.uniform(0.5, 4, args.trials),
                                                                   rng.uniform(-2, 2, args.trials))]
        m = 0.0 if args.m is None else args.m
        labels = [t.label for t in trials]
    else:
        raise ValidationError(f"no trial family for form {args.form!r}")
    rep = forms.lower_bound_check(form, trials, m)
    rows = [{"trial": lab, "rayleigh_quotient": q, "margin": mg, "passed": p}
            for lab, q, mg, p in zip(labels, rep.quotients, rep.margins, rep.passed)]
    return {"form": form.kind, "m": m, "all_pass": rep.all_pass, "min_quotient": rep.min_quotient,
            "min_margin": rep.min_margin, "table": rows}


def _form_witness(args):
    form = forms.position_form()
    ns = range(1, args.n + 1)
    return {"form": form.kind, "table": [{"n": n, "value": forms.unboundedness_witness(form, n)} for n in ns]}


CLOSEDNESS = {
    "delta-narrowing": (forms.delta_at_zero, forms.narrowing_gaussians, (1, 4, 16, 64, 256, 1024)),
    "x2-window": (forms.x2_form, forms.windowed_gaussians, (2, 4, 6, 8, 10)),
}


def _form_closedness(args):
    if args.scenario == "position-domain":
        rep = forms.operator_closedness_probe((1, 2, 3, 4, 5))
        rows = [{"n": n, "l2_distance": d, "image_distance": g}
                for n, d, g in zip(rep.n_list, rep.l2_distance, rep.image_distance)]
        return {"scenario": args.scenario, "verdict": rep.verdict, "domain_escape": rep.domain_escape,
                "table": rows}
    make_form, make_seq, ns = CLOSEDNESS[args.scenario]
    rep = forms.closedness_probe(make_form(), make_seq(), ns)
    pairs = list(rep.pair_energies) + [None]
    rows = [{"n": n, "l2_distance": d, "energy": e, "pair_energy": p}
            for n, d, e, p in zip(rep.n_list, rep.l2_distance, rep.energies, pairs)]
    return {"scenario": args.scenario, "verdict": rep.verdict, "form_cauchy": rep.form_cauchy,
            "l2_convergent": rep.l2_convergent, "energy_convergent": rep.energy_convergent,
            "limit_energy": rep.limit_energy, "table": rows}


SEMICONTINUITY = {
    "delta-notch": (forms.delta_at_zero, forms.notched_gaussians),
    "x2-notch": (forms.x2_form, forms.notched_gaussians),
    "x2-constant": (forms.x2_form, lambda: forms.constant_sequence(W.gaussian())),
}


def _form_semicontinuity(args):
    make_form, make_seq = SEMICONTINUITY[args.scenario]
    rep = forms.semicontinuity_probe(make_form(), make_seq())
    return {"scenario": args.scenario, "verdict": rep.verdict, "liminf": rep.liminf,
            "limit_energy": rep.limit_energy,
            "table": [{"n": n, "energy": e} for n, e in zip(rep.n_list, rep.energies)]}


def _form_from_form(args):
    rows = []
    for N in args.n_grid:
        g = make_grid(Interval(0.0, 1.0), N)
        A = forms.operator_from_form(g).entries
        L = operators.assemble(LAPLACIAN, DIRICHLET, g).entries
        rows.append({"N": N, "max_entry_diff": float(np.max(np.abs(A - L))), "max_entry": float(np.max(np.abs(L)))})
    return {"table": rows}


FORM_ACTIONS = {
    "bound": _form_bound,
    "witness": _form_witness,
    "closedness": _form_closedness,
    "semicontinuity": _form_semicontinuity,
    "from-form": _form_from_form,
}


def cmd_forms(args):
    return FORM_ACTIONS[args.action_name](args)


def _ccr_chunk(spec):
    seed, count, max_dim, scaled = spec
    s = ccr.ccr_sweep(seed, count, max_dim, scaled)
    return s.min_eps, s.all_satisfied, s.trivial_count


def cmd_ccr(args):
    out = {}
    if args.n is not None:
        pair = ccr.truncated_qp(args.n)
        r = ccr.popa_check(pair)
        out.update({"n": args.n, "eps": r.eps, "norm_q": r.norm_q, "norm_p": r.norm_p,
                    "bound": r.bound, "satisfied": r.satisfied, "regime": r.regime})
    if args.random:
        chunk = 1000
        seeds = np.random.SeedSequence(args.seed).spawn(math.ceil(args.random / chunk))
        specs = [(int(ss.generate_state(1)[0]), min(chunk, args.random - chunk * k), args.max_dim, args.scaled)
                 for k, ss in enumerate(seeds)]
        parts = _map(_ccr_chunk, specs, args.jobs)
        out["random"] = {"count": args.random, "min_eps": min(p[0] for p in parts),
                         "all_satisfied": all(p[1] for p in parts),
                         "trivial_count": sum(p[2] for p in parts)}
    if not out:
        raise ValidationError("ccr needs --n and/or --random")
    return out


def _demo_12i(args):
    psi = W.quadratic_12i()
    one = W.constant(1.0)
    iv = Interval(0.0, 1.0)
    val = operators.expectation(LAPLACIAN, psi, iv, N=args.n_grid)
    return {"witness": psi.label, "expectation": val,
            "boundary_form": operators.boundary_form(LAPLACIAN, psi, psi, iv),
            "hermiticity_defect_maximal": operators.hermiticity_defect(LAPLACIAN, parse_bc("maximal"), [psi, one], iv)}


def _demo_hd2(args):
    # psi = x(1-x): -psi'' = 2 is not in the Dirichlet domain, so <psi, H^2 psi> is not <H psi, H psi>
    p = np.polynomial.Polynomial([0.0, 1.0, -1.0])
    grid = make_grid(Interval(0.0, 1.0), args.n_grid)
    op = operators.assemble(LAPLACIAN, DIRICHLET, grid)
    v = op.restrict(sample(W.polynomial(p.coef, label="x(1-x)"), grid))
    w = op.weights
    Hv = op.entries @ v
    sq = (p.deriv(2) ** 2).integ()
    pairing = (p * p.deriv(4)).integ()
    return {"norm_sq_of_action": float(sq(1.0) - sq(0.0)),
            "formal_fourth_derivative_pairing": float(pairing(1.0) - pairing(0.0)),
            "action_at_endpoints": [float(-p.deriv(2)(0.0)), float(-p.deriv(2)(1.0))],
            "discrete_norm_sq": float(np.sum(w * np.abs(Hv) ** 2)),
            "discrete_psi_h2_psi": complex(np.sum(w * np.conj(v) * (op.entries @ Hv)))}


def _demo_matrix_element(args):
    rows = []
    for n in range(args.max_index + 1):
        for m in range(args.max_index + 1):
            d = operators.matrix_element_defect(n, m, args.theta)
            rows.append({"n": n, "m": m, "defect": d,
                         "closed_form": operators.matrix_element_defect_closed_form(n, m)})
    return {"theta": args.theta, "table": rows}


DEMOS = {"paradox-12i": _demo_12i, "paradox-hd2": _demo_hd2, "matrix-element": _demo_matrix_element}


def cmd_demo(args):
    return DEMOS[args.action_name](args)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(p, seed=False, jobs=False):
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", help="write the data here and print a summary line to stdout")
    if seed:
        p.add_argument("--seed", type=int, default=0, help="RNG seed (SAE_SEED overrides)")
    if jobs:
        p.add_argument("--jobs", type=int, default=1, help="worker processes for the sweep")


def _bc_args(p, default="dirichlet"):
    p.add_argument("--bc", choices=("dirichlet", "periodic", "quasi_periodic", "maximal"), default=default)
    p.add_argument("--theta", type=float, default=0.0, help="quasi-periodic phase")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sae", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of an assembled operator",
                       epilog="CSV columns: n, eigenvalue, reference, rel_err")
    p.add_argument("--action", choices=("laplacian", "momentum", "position", "schrodinger"), default="laplacian")
    p.add_argument("--potential", choices=("harmonic",), default=None)
    _bc_args(p)
    p.add_argument("--interval", type=_pair, default=(0.0, 1.0))
    p.add_argument("--line", type=float, default=None, help="use the truncated line [-L, L]")
    p.add_argument("--n-grid", type=int, default=2000)
    p.add_argument("--modes", type=int, default=10)
    p.add_argument("--backend", choices=spectral.BACKENDS, default="lapack")
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("evolve", help="spectral propagation of a datum on [0, 1]",
                       epilog="CSV columns: t, norm, overlap_re, overlap_im, bc_residual")
    _bc_args(p)
    p.add_argument("--datum", choices=("smooth", "step", "bump"), default="bump")
    p.add_argument("--t", type=_floats, default=[0.0, 0.01, 0.1])
    p.add_argument("--n-grid", type=int, default=500)
    _common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("check-propagator", help="unitarity/group/continuity/commutation on random cases",
                       epilog="CSV columns: bc, theta, t1, t2, unitarity_defect, group_defect, commutation_defect, "
                              "bc_residual, generator_defect, generator_norm, continuity_monotone")
    p.add_argument("--cases", type=int, default=50)
    p.add_argument("--n-grid", type=int, default=200)
    _common(p, seed=True, jobs=True)
    p.set_defaults(func=cmd_check_propagator)

    p = sub.add_parser("series-exp", help="truncated exponential series against the propagator",
                       epilog="CSV columns: n, log10_term_norm (subsampled to about 200 rows)")
    p.add_argument("--datum", choices=("smooth", "step"), default="smooth")
    p.add_argument("--t", type=float, default=0.01)
    p.add_argument("--n-grid", type=int, default=1000)
    p.add_argument("--max-terms", type=int, default=2_000_000)
    _common(p)
    p.set_defaults(func=cmd_series_exp)

    p = sub.add_parser("nonunique", help="Dirichlet vs periodic evolution of one compactly supported state",
                       epilog="CSV columns: t, distance, dirichlet_left, dirichlet_right, periodic_jump, "
                              "outside_mass_dirichlet, outside_mass_periodic, dirichlet_modes, periodic_modes, truncated")
    p.add_argument("--t", type=_floats, default=[0.0, 0.01])
    p.add_argument("--n-grid", type=int, default=2000)
    _common(p, jobs=True)
    p.set_defaults(func=cmd_nonunique)

    p = sub.add_parser("hermiticity", help="largest boundary form over a trial set")
    p.add_argument("--action", choices=("momentum", "laplacian"), default="laplacian")
    _bc_args(p, default="maximal")
    p.add_argument("--interval", type=_pair, default=(0.0, 1.0))
    _common(p)
    p.set_defaults(func=cmd_hermiticity)

    p = sub.add_parser("expectation", help="<psi, A psi> by quadrature of the symbolic action")
    p.add_argument("--action", choices=("position", "momentum", "laplacian"), default="laplacian")
    p.add_argument("--witness", choices=sorted(WITNESSES), default="quadratic-12i")
    p.add_argument("--interval", type=_pair, default=(0.0, 1.0))
    p.add_argument("--n-grid", type=int, default=2000)
    _common(p)
    p.set_defaults(func=cmd_expectation)

    p = sub.add_parser("point-spectrum", help="closed-form eigenpairs under a boundary condition",
                       epilog="CSV columns: k, eigenvalue, eigenfunction")
    p.add_argument("--action", choices=("momentum", "laplacian"), default="laplacian")
    _bc_args(p)
    p.add_argument("--interval", type=_pair, default=(0.0, 1.0))
    p.add_argument("--range", type=_range, default=range(-3, 4), help="index range lo,hi (inclusive)")
    _common(p)
    p.set_defaults(func=cmd_point_spectrum)

    p = sub.add_parser("deficiency", help="deficiency indices table",
                       epilog="CSV columns: action, geometry, n_plus, n_minus")
    p.add_argument("--action", choices=("momentum", "laplacian"), default=None)
    p.add_argument("--geometry", choices=sorted(GEOMETRIES), default=None)
    _common(p)
    p.set_defaults(func=cmd_deficiency)

    p = sub.add_parser("forms", help="quadratic-form experiments")
    fsub = p.add_subparsers(dest="action_name", required=True)
    q = fsub.add_parser("bound", help="lower-bound check", epilog="CSV columns: trial, rayleigh_quotient, margin, passed")
    q.add_argument("--form", choices=("dirichlet", "coulomb", "x2"), default="dirichlet")
    q.add_argument("--z", type=float, default=2.0)
    q.add_argument("--m", type=float, default=None)
    q.add_argument("--trials", type=int, default=200)
    _common(q, seed=True)
    q = fsub.add_parser("witness", help="position-form unboundedness witnesses", epilog="CSV columns: n, value")
    q.add_argument("--n", type=int, default=20)
    _common(q)
    q = fsub.add_parser("closedness", help="closedness probe on a scripted sequence",
                        epilog="CSV columns: n, l2_distance, energy, pair_energy (or image_distance)")
    q.add_argument("--scenario", choices=(*CLOSEDNESS, "position-domain"), default="delta-narrowing")
    _common(q)
    q = fsub.add_parser("semicontinuity", help="lower-semicontinuity probe", epilog="CSV columns: n, energy")
    q.add_argument("--scenario", choices=sorted(SEMICONTINUITY), default="delta-notch")
    _common(q)
    q = fsub.add_parser("from-form", help="operator of the discrete Dirichlet energy vs assembled Laplacian",
                        epilog="CSV columns: N, max_entry_diff, max_entry")
    q.add_argument("--n-grid", type=_ints, default=[4, 64, 512])
    _common(q)
    p.set_defaults(func=cmd_forms)

    p = sub.add_parser("ccr", help="commutator defect and the log norm bound")
    p.add_argument("--n", type=int, default=None, help="truncated oscillator dimension")
    p.add_argument("--random", type=int, default=0, help="number of random Hermitian pairs")
    p.add_argument("--max-dim", type=int, default=8)
    p.add_argument("--scaled", action="store_true")
    _common(p, seed=True, jobs=True)
    p.set_defaults(func=cmd_ccr)

    p = sub.add_parser("demo", help="domain paradoxes")
    dsub = p.add_subparsers(dest="action_name", required=True)
    q = dsub.add_parser("paradox-12i")
    q.add_argument("--n-grid", type=int, default=2000)
    _common(q)
    q = dsub.add_parser("paradox-hd2")
    q.add_argument("--n-grid", type=int, default=1000)
    _common(q)
    q = dsub.add_parser("matrix-element", epilog="CSV columns: n, m, defect_re, defect_im, closed_form_re, closed_form_im")
    q.add_argument("--max-index", type=int, default=8)
    q.add_argument("--theta", type=float, default=0.0)
    _common(q)
    p.set_defaults(func=cmd_demo)
    return ap


def _params(args) -> dict:
    skip = {"command", "func", "format", "out", "jobs"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if isinstance(v, range):
            v = [v.start, v.stop - 1]
        out[k] = v
    return out


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if hasattr(args, "seed") and os.environ.get("SAE_SEED"):
        try:
            args.seed = int(os.environ["SAE_SEED"])
        except ValueError:
            print("error: SAE_SEED must be an integer", file=sys.stderr)
            return 1
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 1
    try:
        result = args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    doc = to_jsonable({"command": args.command, "params": _params(args), "result": result})
    text = render(doc, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"{args.command}: wrote {args.format} to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line entry point: ``junctionlab <subcommand> [flags]``.

Every subcommand accepts ``--config FILE`` (JSON with the same keys as the long
flags, dashes replaced by underscores); explicit flags override the file.
Artifacts go to ``--out``, else $JUNCTIONLAB_OUT, else the config's ``out``, else ./junctionlab-out.
Exit codes: 0 success, 1 invalid input, 2 numerical failure or failed experiment.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import networks
from .errors import JunctionLabError, ValidationError
from .geometry import PlanarNetwork, dumps_network, load_network, regions, topology_signature

BUILTIN_NETWORKS = {
    "triod": lambda: networks.triod(),
    "bumped-triod": lambda: networks.triod(bumps=(0.1, -0.08, 0.05)),
    "h-horizontal": lambda: networks.h_network("horizontal"),
    "h-vertical": lambda: networks.h_network("vertical"),
    "five-leaf": lambda: networks.five_leaf_partition(),
}

# built-in defaults per subcommand; config file and flags override these
DEFAULTS = {
    "color": {"net": "triod", "enumerate": False},
    "flow": {"net": "bumped-triod", "T": 0.1, "spacing": 0.02, "snapshot_every": 0.005},
    "expander": {"k": 3, "cls": None, "R": 4.0, "sigma": None, "T": 1.0, "spacing": 0.02, "angles": None},
    "heteroclinic": {"pair": [1, 2]},
    "ustar": {},
    "gamma": {},
    "ac-run": {"net": "bumped-triod", "eps": 0.08, "rho": 0.75, "grid_h": None, "T": 0.1,
               "ansatz_variant": "rho", "snapshot_every": 0.005},
    "converge": {"net": "bumped-triod", "eps": [0.08, 0.05, 0.03], "T": 0.1, "rho": 0.75, "ansatz_variant": "rho"},
    "unique": {"k": 4, "cls": None, "R": 2.0, "sigma_pair": [0.02, 0.04], "spacing_pair": None,
               "spacing": 0.01, "angles": None},
    "separate": {"k": 4, "R": 2.0, "sigma": None, "spacing": 0.01, "angles": None},
    "report": {},
}


class UsageError(ValidationError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="junctionlab", description="Curvature-flow networks and vector Allen-Cahn junctions.")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    def add(name, help_):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", help="JSON file with default values for the flags")
        s.add_argument("--out", help="output directory")
        return s

    s = add("color", "three-color the regions of a network")
    s.add_argument("--net", help="network JSON file or builtin name")
    s.add_argument("--enumerate", action="store_const", const=True, help="also list every proper coloring")

    s = add("flow", "evolve a network by curvature")
    s.add_argument("--net")
    s.add_argument("--T", type=float)
    s.add_argument("--spacing", type=float)
    s.add_argument("--snapshot-every", type=float)

    s = add("expander", "expanding self-similar evolution from k half-lines")
    s.add_argument("--k", type=int)
    s.add_argument("--class", dest="cls")
    s.add_argument("--R", type=float)
    s.add_argument("--sigma", type=float)
    s.add_argument("--T", type=float)
    s.add_argument("--spacing", type=float)
    s.add_argument("--angles", type=float, nargs="+")

    s = add("heteroclinic", "heteroclinic profile between two minima")
    s.add_argument("--pair", type=int, nargs=2)

    add("ustar", "three-sector entire solution")
    add("gamma", "pairwise geodesic distances and junction angles")

    s = add("ac-run", "glued initial data and parabolic solve for one eps")
    s.add_argument("--net")
    s.add_argument("--eps", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--grid-h", type=float)
    s.add_argument("--T", type=float)
    s.add_argument("--ansatz-variant", choices=["rho", "delta"])
    s.add_argument("--snapshot-every", type=float)

    s = add("converge", "eps-convergence ladder")
    s.add_argument("--net")
    s.add_argument("--eps", type=float, nargs="+")
    s.add_argument("--T", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--ansatz-variant", choices=["rho", "delta"])

    s = add("unique", "same-class uniqueness experiment")
    s.add_argument("--k", type=int)
    s.add_argument("--class", dest="cls")
    s.add_argument("--R", type=float)
    s.add_argument("--sigma-pair", type=float, nargs=2)
    s.add_argument("--spacing-pair", type=float, nargs=2)
    s.add_argument("--spacing", type=float)
    s.add_argument("--angles", type=float, nargs="+")

    s = add("separate", "different-class separation experiment")
    s.add_argument("--k", type=int)
    s.add_argument("--R", type=float)
    s.add_argument("--sigma", type=float)
    s.add_argument("--spacing", type=float)
    s.add_argument("--angles", type=float, nargs="+")

    add("report", "collect experiment reports found in the output directory")
    return p


def resolve_options(ns: argparse.Namespace) -> dict:
    opts = dict(DEFAULTS[ns.command])
    conf = {}
    if ns.config:
        try:
            conf = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read config {ns.config}: {exc}") from exc
        if not isinstance(conf, dict):
            raise ValidationError("config must be a JSON object")
        conf = {k.replace("-", "_"): v for k, v in conf.items()}
        if "class" in conf:
            conf["cls"] = conf.pop("class")
        unknown = set(conf) - set(opts) - {"out"}
        if unknown:
            raise ValidationError(f"unknown config keys for {ns.command}: {sorted(unknown)}")
        opts.update({k: v for k, v in conf.items() if k != "out"})
    for k in opts:
        v = getattr(ns, k, None)
        if v is not None:
            opts[k] = v
    out = ns.out or os.environ.get("JUNCTIONLAB_OUT") or conf.get("out") or "junctionlab-out"
    opts["out"] = Path(out)
    return opts


def _network(spec) -> PlanarNetwork:
    if spec in BUILTIN_NETWORKS:
        return BUILTIN_NETWORKS[spec]()
    try:
        return load_network(spec)
    except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ValidationError(f"cannot load network {spec!r}: {exc}") from exc


def _write(out: Path, name: str, data) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    p = out / name
    if isinstance(data, bytes):
        p.write_bytes(data)
    else:
        p.write_text(data)
    return p


def _json(obj) -> str:
    from .experiments import _clean
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def _positive(name, v):
    if v is None or not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
        raise ValidationError(f"{name} must be a positive number")
    return float(v)


# =============================================================================
# Subcommands
# =============================================================================


def cmd_color(o) -> int:
    from .coloring import enumerate_colorings, three_color
    net = _network(o["net"])
    part = regions(net)
    c = three_color(net)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["region_id", "gap", "color"])
    for r in part.regions:
        w.writerow([r.id, f"{r.gap[0]}-{r.gap[1]}", c[r.id]])
    text = buf.getvalue()
    sys.stdout.write(text)
    _write(o["out"], "colors.csv", text)
    if o["enumerate"]:
        rows = "\n".join(",".join(map(str, x.colors)) for x in enumerate_colorings(net)) + "\n"
        _write(o["out"], "colorings.csv", rows)
    return 0


def cmd_flow(o) -> int:
    from .flow import FlowConfig, evolve
    from .render import to_svg
    net = _network(o["net"])
    cfg = FlowConfig(t_end=_positive("T", o["T"]), target_spacing=_positive("spacing", o["spacing"]),
                     snapshot_every=_positive("snapshot-every", o["snapshot_every"]))
    tr = evolve(net, cfg)
    out = o["out"]
    _write(out, "flow_diagnostics.csv", tr.diagnostics_csv())
    _write(out, "flow_final.json", dumps_network(tr.final()))
    r = net.domain.size
    _write(out, "flow.svg", to_svg([net.polylines(), tr.final().polylines()], (-r, r, -r, r), boundary_radius=r,
                                   caption=f"t={cfg.t_end:g}"))
    _write(out, "flow_summary.json", _json({
        "signature": topology_signature(tr.final()), "max_junction_residual": tr.max_junction_residual,
        "length_increase": tr.length_increase, "length_0": net.total_length(), "length_T": tr.final().total_length()}))
    print(f"flow: {len(tr.snapshots)} snapshots, signature {topology_signature(tr.final())}")
    return 0


def cmd_expander(o) -> int:
    from .flow import FlowConfig, curvature_stats, expander_classes, expander_evolution, expander_profile_residual, \
        self_similarity_error
    k = int(o["k"])
    R = _positive("R", o["R"])
    cfg = FlowConfig(t_end=_positive("T", o["T"]), target_spacing=_positive("spacing", o["spacing"]),
                     snapshot_every=0.05 * o["T"])
    cls = o["cls"]
    if cls is None:
        cls = next(iter(expander_classes(k, o["angles"], R, o["sigma"], cfg.target_spacing)))
    tr = expander_evolution(k, cls, R, o["sigma"], cfg, angles_deg=o["angles"])
    t1 = float(tr.times[-1])
    sse = self_similarity_error(tr, t1)
    late = [d for t, d in sse if t >= 0.25 * t1]
    prof, kmax = expander_profile_residual(tr.final(), t=t1, radius=R / 2)
    stats = curvature_stats(tr)
    out = o["out"]
    _write(out, "expander_diagnostics.csv", tr.diagnostics_csv())
    _write(out, "expander_final.json", dumps_network(tr.final()))
    _write(out, "expander_summary.json", _json({
        "k": k, "class": cls, "R": R, "signature_T": topology_signature(tr.final()),
        "self_similarity_max": max(late) if late else 0.0, "profile_residual": prof, "max_curvature": kmax,
        "sqrt_t_k_ratio": stats.ratio(0.25 * t1, t1)}))
    print(f"expander k={k} class {cls}: self-similarity {max(late) if late else 0.0:.3g}, profile {prof:.3g}")
    return 0


def cmd_heteroclinic(o) -> int:
    from .potential import heteroclinic, standard_potential, tail_fit
    i, j = (int(x) for x in o["pair"])
    W = standard_potential()
    tab = heteroclinic(W, i, j)
    rate, r2 = tail_fit(tab)
    _write(o["out"], f"heteroclinic_{i}_{j}.csv", tab.to_csv())
    _write(o["out"], f"heteroclinic_{i}_{j}.json", _json({
        "pair": [i, j], "action": tab.action(), "equipartition_error": tab.equipartition_error(W),
        "speed": tab.speed, "tail_rate": rate, "tail_r2": r2, "residual": tab.residual}))
    print(f"heteroclinic {i}->{j}: action {tab.action():.8f}")
    return 0


def cmd_ustar(o) -> int:
    from .potential import compute_u_star, standard_potential
    W = standard_potential()
    us = compute_u_star(W)
    _write(o["out"], "ustar.csv", us.field.to_csv())
    r = 0.9 * us.R_star
    sector = [float(np.hypot(*(us(r * np.array([math.cos(a), math.sin(a)])) - W.minima[k])))
              for k, a in enumerate(us.sector_centres)]
    _write(o["out"], "ustar.json", _json({
        "R_star": us.R_star, "h": us.field.grid.h, "residual": us.residual, "wall_angles": list(us.wall_angles),
        "sector_limit_error": sector}))
    print(f"u*: residual {us.residual:.3g}")
    return 0


def cmd_gamma(o) -> int:
    from .potential import gamma_matrix, junction_angles, standard_potential
    W = standard_potential()
    G = gamma_matrix(W)
    ang = junction_angles(G)
    _write(o["out"], "gamma.json", _json({"gamma": G.tolist(), "junction_angles": list(ang)}))
    print("gamma:", " ".join(f"{G[a, b]:.6f}" for a, b in ((0, 1), (0, 2), (1, 2))))
    return 0


def cmd_ac_run(o) -> int:
    from .allen_cahn import (Ansatz, AnsatzParams, check_resolution, extract_nodal_set, initial_and_boundary_data,
                             potential_artifacts, solve, sup_difference)
    from .coloring import three_color
    from .flow import FlowConfig, evolve
    from .geometry import hausdorff_distance
    from .render import to_pgm, to_svg
    eps = _positive("eps", o["eps"])
    p = AnsatzParams(eps, rho=float(o["rho"]), variant=o["ansatz_variant"])
    h = eps / 4 if o["grid_h"] is None else _positive("grid-h", o["grid_h"])
    check_resolution(p, h)
    T = _positive("T", o["T"])
    net = _network(o["net"])
    art = potential_artifacts()
    col = three_color(net)
    tr = evolve(net, FlowConfig(t_end=T, snapshot_every=_positive("snapshot-every", o["snapshot_every"])))
    psi, bc = initial_and_boundary_data(tr, col, art, p, h)
    sol = solve(psi, bc, art.W, eps, T)
    A = Ansatz(tr, col, art, p)
    rows = ["t,sup_u_minus_n,hausdorff_nodal"]
    for t, u in sol:
        d = sup_difference(u, A.field(u.grid, t, bc.mask))[0][1]
        ns = extract_nodal_set(u, art.W.minima, mask=~bc.mask)
        hd = hausdorff_distance(ns.polylines(), tr.at(t).polylines()) if not ns.empty else math.inf
        rows.append(f"{t:.10g},{d:.10g},{hd:.10g}")
    out = o["out"]
    u = sol[-1][1]
    _write(out, "ac_metrics.csv", "\n".join(rows) + "\n")
    _write(out, "ac_final_field.csv", u.to_csv())
    _write(out, "ac_final.pgm", to_pgm(u, art.W.minima))
    r = net.domain.size
    _write(out, "ac_final.svg", to_svg([tr.final().polylines(), extract_nodal_set(u, art.W.minima, mask=~bc.mask).polylines()],
                                       (-r, r, -r, r), boundary_radius=r, caption=f"eps={eps:g} t={T:g}"))
    print(rows[-1])
    return 0


def _finish(rep, out) -> int:
    rep.write(out)
    print(f"{rep.scenario}: {'PASS' if rep.passed else 'FAIL'} {json.dumps(rep.flags, sort_keys=True)}")
    return 0 if rep.passed else 2


def cmd_converge(o) -> int:
    from .experiments import convergence_study
    ladder = [_positive("eps", e) for e in o["eps"]]
    rep = convergence_study(_network(o["net"]), ladder, T=_positive("T", o["T"]), rho=float(o["rho"]),
                            variant=o["ansatz_variant"])
    return _finish(rep, o["out"])


def cmd_unique(o) -> int:
    from .experiments import expander_config, uniqueness_experiment
    from .flow import bridge_signatures
    k = int(o["k"])
    R = _positive("R", o["R"])
    cls = o["cls"] or (bridge_signatures()["horizontal"] if k == 4 else "1(2,3)")
    if o["spacing_pair"]:
        perts = tuple({"target_spacing": _positive("spacing", s)} for s in o["spacing_pair"])
    else:
        perts = tuple({"sigma": _positive("sigma", s)} for s in o["sigma_pair"])
    angles = o["angles"] or ((45.0, 135.0, 225.0, 315.0) if k == 4 else None)
    rep = uniqueness_experiment(cls, k, perts, R=R, cfg=expander_config(_positive("spacing", o["spacing"])),
                                angles_deg=angles)
    return _finish(rep, o["out"])


def cmd_separate(o) -> int:
    from .experiments import class_separation, expander_config
    rep = class_separation(int(o["k"]), R=_positive("R", o["R"]), cfg=expander_config(_positive("spacing", o["spacing"])),
                           angles_deg=o["angles"], sigma=o["sigma"])
    return _finish(rep, o["out"])


def cmd_report(o) -> int:
    from .experiments import ExperimentReport
    out = o["out"]
    files = sorted(Path(out).glob("*_report.json")) if Path(out).is_dir() else []
    if not files:
        raise ValidationError(f"no experiment reports in {out}")
    rows = ["scenario,passed,flags"]
    for f in files:
        rep = ExperimentReport.from_json(f.read_text())
        flags = ";".join(f"{k}={'1' if v else '0'}" for k, v in sorted(rep.flags.items()))
        rows.append(f"{rep.scenario},{int(rep.passed)},{flags}")
    text = "\n".join(rows) + "\n"
    _write(out, "summary.csv", text)
    sys.stdout.write(text)
    return 0


COMMANDS = {
    "color": cmd_color, "flow": cmd_flow, "expander": cmd_expander, "heteroclinic": cmd_heteroclinic,
    "ustar": cmd_ustar, "gamma": cmd_gamma, "ac-run": cmd_ac_run, "converge": cmd_converge,
    "unique": cmd_unique, "separate": cmd_separate, "report": cmd_report,
}


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        if ns.command is None:
            parser.print_help(sys.stderr)
            return 1
        opts = resolve_options(ns)
        return COMMANDS[ns.command](opts)
    except JunctionLabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()

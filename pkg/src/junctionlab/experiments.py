"""Reproducible runs: eps-convergence ladders, same-class uniqueness and class separation."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .allen_cahn import (
    Ansatz,
    AnsatzParams,
    check_resolution,
    extract_nodal_set,
    initial_and_boundary_data,
    potential_artifacts,
    residual_diagnostics,
    solve,
    sup_difference,
)
from .coloring import Coloring, three_color
from .errors import ClassMismatch, NoAlternateClass
from .flow import FlowConfig, FlowTrajectory, _clip, bridge_signatures, evolve, expander_evolution
from .geometry import PlanarNetwork, hausdorff_distance, topology_signature
from .render import to_pgm, to_svg


def _clean(x):
    """JSON-safe copy with floats rounded to 12 significant digits."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if not math.isfinite(x) else float(f"{x:.12g}")
    return x


@dataclass
class ExperimentReport:
    scenario: str
    params: dict
    metrics: list[dict] = field(default_factory=list)  # one row per eps / run, tagged with its grid
    pairs: list[dict] = field(default_factory=list)  # trajectory distances
    flags: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)
    figures: dict = field(default_factory=dict, repr=False)  # file name -> str | bytes

    @property
    def passed(self) -> bool:
        return bool(self.flags) and all(self.flags.values())

    def to_dict(self) -> dict:
        return _clean({"scenario": self.scenario, "params": self.params, "metrics": self.metrics,
                       "pairs": self.pairs, "flags": self.flags, "passed": self.passed, "notes": self.notes})

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        d = json.loads(text)
        return cls(d["scenario"], d["params"], d["metrics"], d["pairs"], d["flags"], d.get("notes", []))

    def metrics_csv(self) -> str:
        rows = self.metrics or self.pairs
        buf = io.StringIO()
        if not rows:
            return ""
        keys = list(rows[0])
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys)
        for r in rows:
            w.writerow([_fmt_cell(r.get(k)) for k in keys])
        return buf.getvalue()

    def write(self, outdir) -> list[Path]:
        out = Path(outdir)
        out.mkdir(parents=True, exist_ok=True)
        written = []
        for name, data in [("report.json", self.to_json()), ("metrics.csv", self.metrics_csv())] + sorted(self.figures.items()):
            p = out / f"{self.scenario}_{name}"
            if isinstance(data, bytes):
                p.write_bytes(data)
            else:
                p.write_text(data)
            written.append(p)
        return written


def _fmt_cell(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return " ".join(_fmt_cell(x) for x in v)
    return v


def strictly_decreasing(xs) -> bool:
    return all(b < a for a, b in zip(xs, xs[1:]))


# =============================================================================
# eps-convergence
# =============================================================================


def convergence_study(net0: PlanarNetwork, eps_ladder, coloring: Coloring | None = None,
                      grid_rule=lambda eps: eps / 4, T: float = 0.1, rho: float = 0.75,
                      variant: str = "rho", flow_cfg: FlowConfig | None = None,
                      snapshot_every: float = 0.005, residual_times=None, scenario: str = "converge") -> ExperimentReport:
    """Flow once, then per eps: glued initial data, parabolic solve, sup|u - n| and nodal-set distance.

    Flags require both columns to decrease strictly along the ladder and the bulk
    residual of the ansatz to vanish to 1e-10.
    """
    ladder = [float(e) for e in eps_ladder]
    if not ladder or any(b >= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("eps ladder must be non-empty and strictly decreasing")
    params = [AnsatzParams(e, rho=rho, variant=variant) for e in ladder]
    for p in params:
        check_resolution(p, grid_rule(p.eps))
    art = potential_artifacts()
    coloring = coloring or three_color(net0)
    cfg = flow_cfg or FlowConfig(t_end=T, snapshot_every=snapshot_every)
    tr = evolve(net0, cfg)
    if residual_times is None:
        residual_times = (0.0, T / 2, T)

    rep = ExperimentReport(scenario, _clean({
        "eps_ladder": ladder, "T": T, "rho": rho, "variant": variant, "grid_rule": "h = eps/4"
        if all(abs(grid_rule(e) - e / 4) < 1e-15 for e in ladder) else [grid_rule(e) for e in ladder],
        "coloring": list(coloring.colors), "signature": topology_signature(net0),
        "flow_spacing": cfg.target_spacing, "snapshot_every": snapshot_every,
    }))
    last = None
    for p in params:
        h = grid_rule(p.eps)
        psi, bc = initial_and_boundary_data(tr, coloring, art, p, h)
        sol = solve(psi, bc, art.W, p.eps, T)
        A = Ansatz(tr, coloring, art, p)
        sups, hds, amb = [], [], []
        for t, u in sol:
            n = A.field(u.grid, t, bc.mask)
            sups.append(sup_difference(u, n)[0][1])
            ns = extract_nodal_set(u, art.W.minima, mask=~bc.mask)
            hds.append(hausdorff_distance(ns.polylines(), tr.at(t).polylines()) if not ns.empty else math.inf)
            amb.append(ns.ambiguous_fraction)
        res = residual_diagnostics(tr, coloring, art, p, times=residual_times, h=h)
        rep.metrics.append({
            "eps": p.eps, "h": h, "grid": f"{psi.grid.nx}x{psi.grid.ny}",
            "sup_u_minus_n": max(sups), "sup_u_minus_n_T": sups[-1],
            "hausdorff_nodal": max(hds), "hausdorff_nodal_T": hds[-1],
            "ambiguous_fraction": max(amb),
            "bulk_residual": float(res.bulk.max()), "tube_residual_scaled": float(res.tube.max() * p.eps**2),
            "node_residual_t_weighted": res.node_t_weighted,
        })
        last = (p, sol[-1][1], tr.final())
    rep.metrics = _clean(rep.metrics)
    rep.flags = {
        "sup_decreasing": strictly_decreasing([m["sup_u_minus_n"] for m in rep.metrics]),
        "hausdorff_decreasing": strictly_decreasing([m["hausdorff_nodal"] for m in rep.metrics]),
        "bulk_residual_zero": all(m["bulk_residual"] <= 1e-10 for m in rep.metrics),
    }
    p, u, net = last
    ns = extract_nodal_set(u, art.W.minima)
    r = net.domain.size
    rep.figures["final.svg"] = to_svg([net.polylines(), ns.polylines()], (-r, r, -r, r), boundary_radius=r,
                                      caption=f"eps={p.eps:g} t={T:g}")
    rep.figures["final.pgm"] = to_pgm(u, art.W.minima)
    return rep


# =============================================================================
# Self-similar expanders
# =============================================================================


def _rotate(polys, deg):
    a = math.radians(deg)
    M = np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])
    return [p @ M.T for p in polys]


def _expander_run(k_lines, class_sig, R, cfg, angles_deg, sigma=None, target_spacing=None, rotation_deg=0.0):
    if target_spacing is not None:
        cfg = replace(cfg, target_spacing=target_spacing)
    angles = np.asarray(angles_deg, dtype=float) + rotation_deg
    tr = expander_evolution(k_lines, class_sig, R, sigma, cfg, angles_deg=angles)
    net = tr.final()
    sig0 = topology_signature(tr.snapshots[0][1])
    return tr, sig0, _rotate(net.polylines(), -rotation_deg)


def _default_angles(k):
    return tuple(float(a) for a in 90.0 + 360.0 * np.arange(k) / k)


def expander_config(target_spacing: float = 0.01) -> FlowConfig:
    return FlowConfig(t_end=1.0, target_spacing=target_spacing, snapshot_every=0.05)


def uniqueness_experiment(class_sig: str, k_lines: int, perturbations=({"sigma": 0.02}, {"sigma": 0.04}),
                          R: float = 2.0, cfg: FlowConfig | None = None, angles_deg=None,
                          tol_fraction: float = 0.02, scenario: str = "unique") -> ExperimentReport:
    """Two initializations of one class; the t=1 networks must agree within tol inside B_{R/2}.

    Each perturbation is a dict with any of ``sigma``, ``target_spacing`` and
    ``rotation_deg`` (the whole configuration is rotated and the result rotated back).
    This checks a necessary consequence of uniqueness: insensitivity of the
    evolution to admissible initialization details within a class.
    """
    cfg = cfg or expander_config()
    angles_deg = tuple(angles_deg) if angles_deg is not None else _default_angles(k_lines)
    runs = []
    for pert in perturbations:
        bad = set(pert) - {"sigma", "target_spacing", "rotation_deg"}
        if bad:
            raise ValueError(f"unknown perturbation keys {sorted(bad)}")
        runs.append(_expander_run(k_lines, class_sig, R, cfg, angles_deg, **pert))
    sigs = [s for _, s, _ in runs]
    if any(s != class_sig for s in sigs):
        raise ClassMismatch(f"initial signatures {sigs} differ from the requested class {class_sig!r}")
    tol = tol_fraction * R
    A, B = _clip(runs[0][2], R / 2), _clip(runs[1][2], R / 2)
    d = hausdorff_distance(A, B, resolution=cfg.target_spacing / 8)
    rep = ExperimentReport(scenario, _clean({
        "k_lines": k_lines, "class": class_sig, "R": R, "angles_deg": list(angles_deg),
        "perturbations": list(perturbations), "target_spacing": cfg.target_spacing, "t_end": cfg.t_end,
        "uniqueness_tol": tol,
    }))
    for (tr, sig, _), pert in zip(runs, perturbations):
        rep.metrics.append(_clean({"run": json.dumps(pert, sort_keys=True), "signature_t0": sig,
                                   "signature_t1": topology_signature(tr.final()),
                                   "max_junction_residual": tr.max_junction_residual}))
    rep.pairs.append(_clean({"a": 0, "b": 1, "hausdorff_in_half_disk": d, "relative": d / R}))
    rep.flags = {"within_tolerance": d <= tol}
    rep.notes.append("continuous-level uniqueness is tested through a necessary consequence: "
                     "insensitivity of the t=1 network to initialization details within one class")
    rep.figures["overlay.svg"] = to_svg([A, B], (-R / 2, R / 2, -R / 2, R / 2),
                                        caption=f"d_H={d:.4g} tol={tol:.4g}")
    return rep


def class_separation(k_lines: int = 4, R: float = 2.0, cfg: FlowConfig | None = None, angles_deg=None,
                     classes: tuple[str, str] | None = None, sigma: float | None = None,
                     tol_fraction: float = 0.02, scenario: str = "separate") -> ExperimentReport:
    """Run two classes from the same half-lines; pass iff they end >= 10 tol apart with distinct signatures."""
    if k_lines != 4:
        raise NoAlternateClass(f"class separation needs k=4 half-lines (two bridge classes), got {k_lines}")
    cfg = cfg or expander_config()
    angles_deg = tuple(angles_deg) if angles_deg is not None else (45.0, 135.0, 225.0, 315.0)
    if classes is None:
        b = bridge_signatures(angles_deg)
        classes = (b["horizontal"], b["vertical"])
    sigma = 0.01 * R if sigma is None else sigma
    runs = [_expander_run(k_lines, c, R, cfg, angles_deg, sigma=sigma) for c in classes]
    tol = tol_fraction * R
    A, B = _clip(runs[0][2], R / 2), _clip(runs[1][2], R / 2)
    d = hausdorff_distance(A, B, resolution=cfg.target_spacing / 8)
    finals = [topology_signature(tr.final()) for tr, _, _ in runs]
    rep = ExperimentReport(scenario, _clean({
        "k_lines": k_lines, "classes": list(classes), "R": R, "sigma": sigma, "angles_deg": list(angles_deg),
        "target_spacing": cfg.target_spacing, "t_end": cfg.t_end, "uniqueness_tol": tol,
    }))
    for (tr, sig, _), c in zip(runs, classes):
        rep.metrics.append(_clean({"run": c, "signature_t0": sig, "signature_t1": topology_signature(tr.final()),
                                   "max_junction_residual": tr.max_junction_residual}))
    rep.pairs.append(_clean({"a": 0, "b": 1, "hausdorff_in_half_disk": d, "relative": d / R}))
    rep.flags = {"signatures_differ": finals[0] != finals[1], "separated": d >= 10 * tol}
    rep.figures["overlay.svg"] = to_svg([A, B], (-R / 2, R / 2, -R / 2, R / 2),
                                        caption=f"d_H={d:.4g} 10*tol={10 * tol:.4g}")
    return rep

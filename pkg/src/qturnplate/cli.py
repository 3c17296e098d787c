"""Command-line front end.

    qturnplate spectrum --spec ring.json
    qturnplate evolve --spec ring.json --site 1 --format svg --out trace.svg
    qturnplate effective --spec ring.json --out eff.json && qturnplate fit --spec eff.json

Sites are 1-based on the command line and in every output file.
Exit codes: 0 success (also when no fit exists), 2 bad input, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qturnplate import dynamics, fock, perturb, symmetry, turnplate
from qturnplate.errors import InputError, NumericError
from qturnplate.ring import RingSpec, build_hamiltonian, gauge_normalize, load_spec, total_phase
from qturnplate.svg import line_chart

COMMANDS = ("spectrum", "blocks", "fit", "evolve", "effective", "fock", "report")
FORMATS = ("csv", "json", "svg")


@dataclass
class RunConfig:
    command: str
    spec_path: str
    t_max: float | None = None
    steps: int = dynamics.DEFAULT_STEPS
    tol: float = turnplate.DEFAULT_TOL
    z_max: int = turnplate.DEFAULT_ZMAX
    n_max: int = fock.DEFAULT_NMAX
    output: str | None = None
    format: str = "json"
    site: int = 1
    threshold: float = 0.99
    weak_links: tuple[int, ...] | None = None  # 0-based
    cluster_tol: float = symmetry.DEGENERACY_TOL
    input_state: tuple[complex, ...] = field(default=(1.0, 1.0, 1.0))
    density_out: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise InputError(f"unknown command {self.command!r}")
        if self.steps < 2:
            raise InputError("--steps must be >= 2")
        if self.tol <= 0:
            raise InputError("--tol must be > 0")
        if self.z_max < 1:
            raise InputError("--zmax must be >= 1")
        if self.n_max < 0:
            raise InputError("--nmax must be >= 0")
        if not 0 < self.threshold <= 1:
            raise InputError("--threshold must be in (0, 1]")
        if self.format not in FORMATS:
            raise InputError(f"--format must be one of {FORMATS}")
        if self.t_max is not None and self.t_max <= 0:
            raise InputError("--tmax must be > 0")


def sig(x: float) -> float:
    """Round to 12 significant digits for stable output."""
    x = float(x)
    if x == 0 or not math.isfinite(x):
        return 0.0 if x == 0 else x
    return float(f"{x:.12g}")


def clean(obj):
    if isinstance(obj, dict):
        return {k: clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return sig(obj)
    if isinstance(obj, complex):
        return [sig(obj.real), sig(obj.imag)]
    return obj


def dumps(obj) -> str:
    return json.dumps(clean(obj), indent=2) + "\n"


def emit(cfg: RunConfig, text: str, path: str | None = None) -> None:
    path = path or cfg.output
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def parse_links(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    try:
        links = tuple(int(x) - 1 for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise InputError(f"bad --weak-links {text!r}") from exc
    if not links:
        raise InputError("--weak-links is empty")
    return links


def parse_amplitudes(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(x.replace(" ", "")) for x in text.split(","))
    except ValueError as exc:
        raise InputError(f"bad --input {text!r}") from exc


# -- analysis helpers shared by several commands ---------------------------------


def analyse_spectrum(spec: RingSpec, cfg: RunConfig) -> dict:
    sym = symmetry.detect_symmetry(spec)
    labeled = symmetry.label_spectrum(spec, sym, cfg.cluster_tol)
    det, pred = symmetry.char_poly_check(spec)
    out = {
        "n_sites": spec.n_sites,
        "total_phase": total_phase(spec),
        "symmetry": {"n": sym.n, "p": sym.p},
        "eigenvalues": labeled.values,
        "labels": labeled.labels,
        "char_poly": {"det": complex(det), "predicted": pred},
    }
    if sym.n > 1:
        blocks = []
        for b in symmetry.block_reduce(spec, sym):
            offset = 2.0 * math.prod(spec.magnitudes[: sym.p]) * math.cos(b.total_phase)
            blocks.append({"label": b.label, "total_phase": b.total_phase, "cos_offset": offset, "eigenvalues": b.eigenvalues()})
        out["blocks"] = blocks
    return out


def fit_spec(spec: RingSpec, cfg: RunConfig) -> turnplate.MatchingFit | None:
    labeled = symmetry.label_spectrum(spec, None, cfg.cluster_tol)
    return turnplate.fit_matching(labeled, cfg.tol, cfg.z_max)


def effective_of(spec: RingSpec, cfg: RunConfig):
    weak = cfg.weak_links if cfg.weak_links is not None else perturb.default_weak_links(spec)
    if not weak:
        return None
    return perturb.reduce_ring(spec, weak)


def predicted_tau(spec: RingSpec, cfg: RunConfig) -> tuple[float | None, str]:
    fit = fit_spec(spec, cfg)
    if fit is not None:
        return fit.tau, "exact"
    try:
        red = effective_of(spec, cfg)
    except (InputError, NumericError):
        red = None
    if red is not None and red[0].matrix.shape[0] >= 3:
        heff, _ = red
        ering = heff.as_ring()
        efit = fit_spec(ering, cfg)
        if efit is not None:
            return efit.tau, "effective"
    return None, "none"


def default_tmax(spec: RingSpec, cfg: RunConfig) -> float:
    if cfg.t_max is not None:
        return cfg.t_max
    tau, _ = predicted_tau(spec, cfg)
    return 3.2 * tau if tau is not None else 10.0


# -- commands ---------------------------------------------------------------------


def cmd_spectrum(cfg: RunConfig, spec: RingSpec) -> None:
    res = analyse_spectrum(spec, cfg)
    if cfg.format == "csv":
        lines = ["index,eigenvalue,label"]
        lines += [f"{i + 1},{v:.12g},{l}" for i, (v, l) in enumerate(zip(res["eigenvalues"], res["labels"]))]
        emit(cfg, "\n".join(lines) + "\n")
    elif cfg.format == "svg":
        vals = np.asarray(res["eigenvalues"])
        emit(cfg, line_chart(np.arange(1, len(vals) + 1), [vals], ["E"], title="Spectrum", xlabel="index", ylabel="E"))
    else:
        emit(cfg, dumps(res))


def cmd_blocks(cfg: RunConfig, spec: RingSpec) -> None:
    sym = symmetry.detect_symmetry(spec)
    out = []
    for b in symmetry.block_reduce(spec, sym):
        entry = {"label": b.label, "total_phase": b.total_phase}
        if isinstance(b.ring, symmetry.ScalarBlock):
            entry["scalar"] = {"mag": b.ring.magnitude, "total_phase": b.ring.total_phase}
        else:
            entry["spec"] = b.ring.to_dict()
        entry["eigenvalues"] = b.eigenvalues()
        out.append(entry)
    emit(cfg, dumps({"symmetry": {"n": sym.n, "p": sym.p}, "blocks": out}))


def cmd_fit(cfg: RunConfig, spec: RingSpec) -> None:
    fit = fit_spec(spec, cfg)
    emit(cfg, dumps({"fit": None if fit is None else fit.to_dict()}))


def cmd_evolve(cfg: RunConfig, spec: RingSpec) -> None:
    h = build_hamiltonian(spec)
    psi0 = np.zeros(spec.n_sites, dtype=complex)
    psi0[cfg.site - 1] = 1.0
    trace = dynamics.probability_trace(h, psi0, default_tmax(spec, cfg), cfg.steps)
    if cfg.format == "csv":
        emit(cfg, trace.to_csv())
    elif cfg.format == "svg":
        labels = [f"site {i + 1}" for i in range(spec.n_sites)]
        emit(cfg, line_chart(trace.times, trace.series, labels, title="Site probabilities", y_range=(0.0, 1.0)))
    else:
        peaks = {f"p{i + 1}": dynamics.detect_transfer_time(trace, i + 1, cfg.threshold) for i in range(spec.n_sites)}
        emit(cfg, dumps({"input_site": cfg.site, "threshold": cfg.threshold, "peaks": peaks}))


def cmd_effective(cfg: RunConfig, spec: RingSpec) -> None:
    red = effective_of(spec, cfg)
    if red is None:
        raise InputError("no weak links (pass --weak-links)")
    heff, man = red
    out = {}
    n = heff.matrix.shape[0]
    if n >= 3 and n % 2 == 1:
        out.update(heff.as_ring().to_dict())
    out["manifold_sites"] = [s + 1 for s in man.site_indices]
    out["g"] = heff.g
    out["first_order_norm"] = heff.first_order_norm
    out["matrix"] = [[complex(z) for z in row] for row in heff.matrix]
    if man.site_indices:
        psi0 = np.zeros(spec.n_sites, dtype=complex)
        psi0[man.site_indices[0]] = 1.0
        t_max = default_tmax(spec, cfg)
        out["leakage"] = perturb.manifold_leakage(build_hamiltonian(spec), man, psi0, t_max, cfg.steps)
    emit(cfg, dumps(out))


def _fock_run(cfg: RunConfig, spec: RingSpec):
    psi = np.asarray(cfg.input_state, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    if len(psi) - 1 > cfg.n_max:
        raise InputError(f"input has {len(psi) - 1} photons but --nmax is {cfg.n_max}")
    t_max = default_tmax(spec, cfg)
    sym = symmetry.detect_symmetry(spec)
    site = cfg.site - 1
    hop = fock.measure_hop(spec, site, sym.p, t_max, cfg.steps, cfg.threshold) if sym.n > 1 else None
    times = dynamics.time_grid(t_max, cfg.steps)
    raw = fock.fidelity_trace(spec, psi, site, times, cfg.n_max)
    ident = fock.fidelity_trace(spec, psi, site, times, cfg.n_max, hop) if hop else raw
    return psi, hop, raw, ident, t_max


def cmd_fock(cfg: RunConfig, spec: RingSpec) -> None:
    psi, hop, raw, ident, t_max = _fock_run(cfg, spec)
    if cfg.density_out:
        st = fock.evolve_fock(spec, psi, cfg.site - 1, cfg.n_max, [t_max])[0]
        Path(cfg.density_out).write_text(fock.reduce_mode(st, cfg.site - 1, cfg.n_max).to_json() + "\n")
    if cfg.format == "csv":
        if cfg.output is None:
            sys.stdout.write(raw.to_csv())
            return
        out = Path(cfg.output)
        out.write_text(raw.to_csv())
        out.with_name(out.stem + ".identified" + out.suffix).write_text(ident.to_csv())
    elif cfg.format == "svg":
        labels = [f"site {i + 1}" for i in range(spec.n_sites)]
        emit(cfg, line_chart(ident.times, ident.series, labels, title="Phase-identified fidelity", ylabel="F(t)", y_range=(0.0, 1.0)))
    else:
        hop_d = None
        if hop is not None:
            hop_d = {
                "first_hop_site": hop.first_hop_site + 1,
                "hop_time": hop.hop_time,
                "theta": hop.theta,
                "orbit": [s + 1 for s in hop.orbit],
                "site_phases": list(hop.site_phases),
            }
        emit(
            cfg,
            dumps(
                {
                    "input": [complex(z) for z in psi],
                    "hop": hop_d,
                    "peaks_identified": {
                        f"f_site{i + 1}": dynamics.detect_transfer_time(ident, i + 1, cfg.threshold) for i in range(spec.n_sites)
                    },
                }
            ),
        )


def build_report(cfg: RunConfig, spec: RingSpec) -> dict:
    spec_res = analyse_spectrum(spec, cfg)
    sym = symmetry.detect_symmetry(spec)
    fit = fit_spec(spec, cfg)
    report = {
        "spec": spec.to_dict(),
        "total_phase": spec_res["total_phase"],
        "symmetry": spec_res["symmetry"],
        "spectrum": {"eigenvalues": spec_res["eigenvalues"], "labels": spec_res["labels"]},
        "fit": None if fit is None else fit.to_dict(),
        "effective": None,
        "predicted_tau": None,
        "tau_source": "none",
        "target_site": None,
        "measured_tau": None,
        "leakage": None,
        "fidelities": None,
    }
    tau, source = predicted_tau(spec, cfg)
    report["predicted_tau"], report["tau_source"] = tau, source
    h = build_hamiltonian(spec)
    red = None
    try:
        red = effective_of(spec, cfg)
    except (InputError, NumericError):
        pass
    if red is not None and red[1].site_indices:
        heff, man = red
        efit = fit_spec(heff.as_ring(), cfg) if heff.matrix.shape[0] >= 3 else None
        report["effective"] = {
            "manifold_sites": [s + 1 for s in man.site_indices],
            "g": heff.g,
            "fit": None if efit is None else efit.to_dict(),
        }
        if tau is not None:
            psi0 = np.zeros(spec.n_sites, dtype=complex)
            psi0[man.site_indices[0]] = 1.0
            report["leakage"] = perturb.manifold_leakage(h, man, psi0, 3 * tau, cfg.steps)
    if tau is not None and sym.n > 1:
        t_max = cfg.t_max if cfg.t_max is not None else 3.2 * tau
        psi0 = np.zeros(spec.n_sites, dtype=complex)
        psi0[0] = 1.0
        trace = dynamics.probability_trace(h, psi0, t_max, cfg.steps)
        target = 1 + sym.p
        report["target_site"] = target
        report["measured_tau"] = dynamics.detect_transfer_time(trace, target, cfg.threshold)
        norm, _ = gauge_normalize(spec)
        shift = symmetry.shift_operator(spec.n_sites, sym.p)
        fit_used = fit
        if fit_used is None:
            fit_used = turnplate.MatchingFit(2 * math.pi / tau, 0.0, (), 0.0, sym.n)
        rep = turnplate.verify_turnplate(build_hamiltonian(norm), shift, fit_used, np.eye(spec.n_sites)[0], sym.n)
        report["fidelities"] = rep.step_fidelities
    return report


def cmd_report(cfg: RunConfig, spec: RingSpec) -> None:
    emit(cfg, dumps(build_report(cfg, spec)))


HANDLERS = {
    "spectrum": cmd_spectrum,
    "blocks": cmd_blocks,
    "fit": cmd_fit,
    "evolve": cmd_evolve,
    "effective": cmd_effective,
    "fock": cmd_fock,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qturnplate", description="Quantum state turnplates on rings with complex couplings.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--spec", required=True, help="ring spec JSON")
    ap.add_argument("--tmax", type=float, default=None, help="time window (default 3.2 x predicted period)")
    ap.add_argument("--steps", type=int, default=dynamics.DEFAULT_STEPS)
    ap.add_argument("--tol", type=float, default=turnplate.DEFAULT_TOL)
    ap.add_argument("--zmax", type=int, default=turnplate.DEFAULT_ZMAX)
    ap.add_argument("--nmax", type=int, default=fock.DEFAULT_NMAX)
    ap.add_argument("--out", default=None)
    ap.add_argument("--format", choices=FORMATS, default="json")
    ap.add_argument("--site", type=int, default=1, help="input site, 1-based")
    ap.add_argument("--threshold", type=float, default=0.99)
    ap.add_argument("--weak-links", default=None, help="comma-separated 1-based link numbers")
    ap.add_argument("--cluster-tol", type=float, default=symmetry.DEGENERACY_TOL)
    ap.add_argument("--input", default="1,1,1", help="single-mode input amplitudes c0,c1,... (normalized)")
    ap.add_argument("--density-out", default=None, help="write the reduced state of --site at --tmax as JSON")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(
        command=ns.command,
        spec_path=ns.spec,
        t_max=ns.tmax,
        steps=ns.steps,
        tol=ns.tol,
        z_max=ns.zmax,
        n_max=ns.nmax,
        output=ns.out,
        format=ns.format,
        site=ns.site,
        threshold=ns.threshold,
        weak_links=parse_links(ns.weak_links),
        cluster_tol=ns.cluster_tol,
        input_state=parse_amplitudes(ns.input),
        density_out=ns.density_out,
    )


def run(cfg: RunConfig) -> int:
    cfg.validate()
    spec = load_spec(cfg.spec_path)
    if not 1 <= cfg.site <= spec.n_sites:
        raise InputError(f"--site must be in 1..{spec.n_sites}")
    HANDLERS[cfg.command](cfg, spec)
    return 0


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    try:
        return run(config_from_args(ns))
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

"""
Command Line

Configuration-driven entry point. Each subcommand writes its CSV/JSON
artifacts into the output directory and prints a one-line summary; the exit
code is 0 when every produced verdict passes, 1 on a failed verdict or a
toolkit error (diagnostics in error.json) and 2 on a configuration error, in
which case nothing is written.

    vs-stabcert profile --config run.json --out results
    vs-stabcert verify-lemmas --only interaction1,interaction2

Dependencies:
    - numpy: For probe states
"""
#%%
import argparse
import dataclasses
import glob
import json
import logging
import os
import sys

import numpy as np

from .config import load_config
from .errors import ConfigError, StabCertError
from .evolve import (
    bound_report, compare_horizons, evolution_grid, evolve_nonlinear, green_probe,
    initial_perturbation, track_phase, track_phase_oc,
)
from .lemma_verify import verify_all
from .model import OVERCOMPRESSIVE, check_assumptions, get_model
from .profile import rest_point_data, solve_profile
from .spectral import check_condition_D, linearized_coefficients
from .templates import ExcitedKernel, decaying_shape

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("profile", "evans", "evolve", "track", "verify-lemmas", "verify-bounds", "report")
EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2
#%%
def write_json(payload, folder, name):
    os.makedirs(folder, exist_ok=True)
    with open(os.path.join(folder, name), "w") as f:
        json.dump(payload, f, indent=4, sort_keys=True)


def _profile(cfg, model):
    return solve_profile(model, cfg.profile)


def _params(cfg, model, profile):
    return cfg.templates.params(model, ell=profile.ell, eta=profile.eta)


def _evolve(cfg, model, profile):
    controls = cfg.evolution
    x = evolution_grid(model, profile, controls)
    u0 = initial_perturbation(controls.shape, controls.E0, x, profile=profile, model=model)
    return evolve_nonlinear(model, profile, u0, controls.T, controls, x)


def _track(cfg, model, profile, field, params):
    kernel = ExcitedKernel(params)
    if profile.shock.kind == OVERCOMPRESSIVE:
        return track_phase_oc(field, kernel, model, profile, cfg.evolution, params=params)
    return track_phase(field, kernel, model, profile, cfg.evolution)
#%%
def run_profile(cfg, out):
    model = cfg.model.build()
    profile = _profile(cfg, model)
    profile.write(out, cfg.profile.tol_profile)
    probes = [model.u_minus, model.u_plus] + list(profile.values[:, ::max(1, profile.grid.size // 50)].T)
    report = check_assumptions(model, probes)
    write_json(report.to_dict(), out, "assumptions.json")
    ok = profile.residual <= cfg.profile.tol_profile and report.all_passed
    print(f"profile {model.name}: residual {profile.residual:.2e}, eta {profile.eta:.4f}, "
          f"ell {profile.ell}, kind {profile.shock.kind}, hypotheses {'pass' if report.all_passed else 'FAIL'}")
    return ok


def run_evans(cfg, out):
    model = cfg.model.build()
    profile = _profile(cfg, model)
    options = dataclasses.replace(cfg.spectral, threads=cfg.threads)
    record = check_condition_D(linearized_coefficients(model, profile), profile.ell, options)
    record.write(out)
    print(f"evans {model.name}: outer winding {record.winding}, origin winding "
          f"{record.inner_winding} (ell {record.ell_expected}), {record.message}")
    return record.verdict


def run_evolve(cfg, out):
    model = cfg.model.build()
    profile = _profile(cfg, model)
    field = _evolve(cfg, model, profile)
    field.write(out, cfg.evolution.tol_cons)
    print(f"evolve {model.name}: T={field.times[-1]:g}, {field.steps} steps, "
          f"sup|w(T)| {field.sup_norms()[-1]:.3e}, conservation {field.conservation_error:.2e}")
    return field.conservation_error <= cfg.evolution.tol_cons


def run_track(cfg, out):
    model = cfg.model.build()
    profile = _profile(cfg, model)
    field = _evolve(cfg, model, profile)
    track = _track(cfg, model, profile, field, _params(cfg, model, profile))
    track.write(out)
    print(f"track {model.name}: delta(T) {np.round(track.delta[-1], 6).tolist()}, "
          f"delta_inf {np.round(track.delta_infinity, 6).tolist()} ({track.method}), "
          f"{track.iterations} iterations")
    return track.verdict


def run_verify_lemmas(cfg, out):
    lax_model = get_model("burgers")
    uc_model = get_model("coupled_quadratic")
    p_lax = cfg.templates.params(lax_model)
    uc_eta = cfg.templates.eta or rest_point_data(uc_model).eta_estimate
    p_uc = cfg.templates.params(uc_model, eta=uc_eta)
    if cfg.templates.l_shape == "constant":
        p_uc = p_uc.replace(l_shape=decaying_shape(uc_eta))
    verification = cfg.verification
    checks = verify_all(p_lax, p_uc, verification.grid(), only=verification.lemmas or None,
                        n_draws=verification.n_draws, seed=cfg.seed, threads=cfg.threads)
    grouped = {}
    for check in checks:
        grouped.setdefault(check.lemma_id, []).append(check.to_dict())
    for lemma_id, items in grouped.items():
        write_json({"lemma_id": lemma_id, "checks": items,
                    "verdict": all(item["verdict"] for item in items)},
                   out, f"lemma_{lemma_id}.json")
    passed = sum(check.verdict for check in checks)
    print(f"verify-lemmas: {passed}/{len(checks)} checks pass")
    return passed == len(checks)


def run_verify_bounds(cfg, out):
    model = cfg.model.build()
    profile = _profile(cfg, model)
    params = _params(cfg, model, profile)
    field = _evolve(cfg, model, profile)
    track = _track(cfg, model, profile, field, params)
    report = bound_report(field, track, params, profile, t_fit_min=cfg.evolution.t_fit_min)
    report.write(out)
    verification = cfg.verification
    horizons = compare_horizons(report, tol_growth=verification.tol_growth)
    write_json(horizons.to_dict(), out, "horizons.json")
    probe = green_probe(model, profile, params, verification.probe_y0, verification.probe_widths,
                        verification.probe_T, cfg.evolution)
    write_json(probe.to_dict(), out, "green_probe.json")
    ceilings = report.ceilings
    print(f"verify-bounds {model.name}: pointwise {ceilings['pointwise']:.3g}, "
          f"zeta/E0 {ceilings['zeta'] / max(field.E0, 1e-300):.3g}, slopes {report.lp_slopes}, "
          f"ceiling growth {horizons.growth}, green C {probe.fitted_C}")
    return report.verdict and horizons.verdict and probe.verdict


def run_report(cfg, out):
    """Collect the verdict of every JSON artifact in out into report.json."""
    verdicts = {}
    for path in sorted(glob.glob(os.path.join(out, "*.json"))):
        name = os.path.basename(path)
        if name == "report.json":
            continue
        with open(path) as f:
            payload = json.load(f)
        if isinstance(payload, dict) and "verdict" in payload:
            verdicts[name] = bool(payload["verdict"])
    ok = bool(verdicts) and all(verdicts.values())
    write_json({"checks": verdicts, "verdict": ok}, out, "report.json")
    print(f"report: {sum(verdicts.values())}/{len(verdicts)} artifacts pass")
    return ok


RUNNERS = {
    "profile": run_profile,
    "evans": run_evans,
    "evolve": run_evolve,
    "track": run_track,
    "verify-lemmas": run_verify_lemmas,
    "verify-bounds": run_verify_bounds,
    "report": run_report,
}
#%%
def build_parser():
    parser = argparse.ArgumentParser(prog="vs-stabcert",
                                     description="Stability checks for viscous shock profiles")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", default=None, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="Output directory (overrides output_dir)")
    parser.add_argument("--only", default=None, help="Comma-separated lemma ids")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--verbose", action="store_true")
    return parser


def resolve_config(args):
    """Load the configuration and apply the command-line overrides."""
    cfg = load_config(args.config)
    changes = {}
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.threads is not None:
        changes["threads"] = args.threads
    if args.only is not None:
        lemmas = tuple(v.strip() for v in args.only.split(",") if v.strip())
        changes["verification"] = dataclasses.replace(cfg.verification, lemmas=lemmas)
    return cfg.replace(**changes) if changes else cfg


def run(subcommand, cfg):
    """
    Run one subcommand.

    Args:
        subcommand (str): One of SUBCOMMANDS
        cfg (RunConfig): Validated configuration

    Returns:
        int: Exit code

    Side Effects:
        Writes artifacts, or error.json on a toolkit error, into cfg.output_dir
    """
    out = cfg.output_dir
    try:
        ok = RUNNERS[subcommand](cfg, out)
    except ConfigError:
        raise
    except StabCertError as exc:
        logger.error("%s failed: %s", subcommand, exc)
        payload = exc.to_dict()
        payload["subcommand"] = subcommand
        payload["verdict"] = False
        write_json(payload, out, "error.json")
        return EXIT_FAIL
    return EXIT_PASS if ok else EXIT_FAIL


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        return run(args.subcommand, cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

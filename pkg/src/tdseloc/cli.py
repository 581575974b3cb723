"""Command line runner: ``tdseloc run <config> [--suite S ...] [--out DIR] [--seed N] [--quiet]``.

Exit codes: 0 every enabled criterion passed, 1 some criterion failed,
2 usage or configuration error, 3 numeric or resource failure (partial
artifacts are kept and flagged in manifest.json).
"""

import argparse
import json
import logging
import subprocess
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from . import criteria as crit
from . import lemmalab as lab
from .channel import cook_wave_operator
from .config import ExperimentConfig, load, resolve_suites
from .decomposition import diagnostics
from .errors import ConfigError, DomainError, InsufficientDataError, NumericError, ResourceError
from .potential import validate_hypotheses
from .propagator import evolve

log = logging.getLogger("tdseloc")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def version_string() -> str:
    """``git describe`` of the source tree when available, else the package version."""
    try:
        r = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=Path(__file__).parent,
                           capture_output=True, text=True, timeout=5)
        if r.returncode == 0 and r.stdout.strip():
            return f"{__version__}+g{r.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _covers(times, *needed) -> bool:
    return all(any(abs(t - s) < 1e-9 for t in times) for s in needed)


class Runner:
    def __init__(self, cfg: ExperimentConfig, out: Path, quiet: bool = False):
        self.cfg = cfg
        self.out = Path(out)
        self.quiet = quiet
        self.checks = []
        self.artifacts = []
        self.timings = {}
        self.traj = self.series = self.rep = None

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg, flush=True)

    def _record(self, checks) -> None:
        for c in checks:
            self.checks.append(c)
            self.say("  " + c.line())

    # ------------------------------------------------------------ suites
    def validate_potential(self) -> None:
        cfg = self.cfg
        t = np.linspace(0, cfg.evolution.T_hor, 64)
        rep = validate_hypotheses(cfg.potential, cfg.grid, t)
        (self.out / "validation.json").write_text(json.dumps(lab._jsonable(rep.to_dict()), indent=2))
        self.artifacts.append("validation.json")
        self._record([crit.Check(f"potential hypotheses ({cfg.potential.family})", rep.passed,
                                 max(rep.suprema.values()) if rep.suprema else 0.0, rep.bound)])

    def simulate(self) -> None:
        cfg = self.cfg
        self.traj = evolve(cfg.initial_state(), cfg.potential, cfg.evolution, cfg.grid)
        self.traj.save(self.out / "trajectory.bin")
        self.artifacts.append("trajectory.bin")
        if self.traj.warnings:
            self.say(f"  note: boundary mass above {cfg.evolution.boundary_warn:g} at {len(self.traj.warnings)} snapshots")

    def cook(self) -> None:
        self.series = cook_wave_operator(self.cfg.channel, self.traj)
        self.series.to_csv(self.out / "cook.csv")
        self.artifacts.append("cook.csv")
        if self.traj.T >= 128:
            self._record(crit.cook_criteria(self.series))

    def decompose(self) -> None:
        cfg = self.cfg
        self.rep = diagnostics(self.traj, cfg.microloc, cfg.microloc.n, cfg.report_times,
                               u_plus=self.series.u_plus, tolerance=cfg.tolerance)
        self.rep.to_csv(self.out / "decomposition.csv")
        (self.out / "decomposition.json").write_text(json.dumps(lab._jsonable(self.rep.to_json()), indent=2, default=float))
        self.artifacts += ["decomposition.csv", "decomposition.json"]
        self._record(crit.identity_check(self.rep, cfg.tolerance))
        times = self.rep.times
        if _covers(times, 10.0, 20.0, 200.0) and sum(10 <= t <= 200 for t in times) >= 4:
            self._record(crit.theorem_bounds(self.rep))
        if _covers(times, *crit.DYADIC):
            self._record(crit.weak_localization(self.rep))

    def lemma_lab(self) -> None:
        res = lab.run_all(self.cfg.seed)
        lab.write_report(res, self.out / "lemma_report.json")
        self.artifacts.append("lemma_report.json")
        self._record(crit.space_frequency(res) + crit.lemma_sweeps(res) + crit.lemma_other(res))

    # ------------------------------------------------------------ driver
    def manifest(self, status: str, error: str | None = None) -> dict:
        return {
            "version": version_string(),
            "config_source": self.cfg.source,
            "config": self.cfg.to_dict(),
            "config_ini": self.cfg.to_ini(),
            "status": status,
            "partial": status == "error",
            "error": error,
            "seed": self.cfg.seed,
            "tolerances": {"decomposition_identity": self.cfg.tolerance,
                           "boundary_warn": self.cfg.evolution.boundary_warn},
            "timings_s": self.timings,
            "artifacts": self.artifacts,
            "checks": [c.to_dict() for c in self.checks],
            "trajectory_warnings": self.traj.warnings if self.traj is not None else [],
        }

    def run(self) -> int:
        self.out.mkdir(parents=True, exist_ok=True)
        steps = {"validate-potential": self.validate_potential, "simulate": self.simulate, "cook": self.cook,
                 "decompose": self.decompose, "lemma-lab": self.lemma_lab}
        status, error, code = "ok", None, EXIT_PASS
        try:
            for name in self.cfg.suites:
                self.say(f"[{name}]")
                t0 = time.perf_counter()
                steps[name]()
                self.timings[name] = round(time.perf_counter() - t0, 3)
        except (NumericError, ResourceError, InsufficientDataError, MemoryError) as e:
            status, error, code = "error", f"{type(e).__name__}: {e}", EXIT_NUMERIC
            self.say(f"aborted: {error}")
        finally:
            if self.cfg.plots and status == "ok":
                try:
                    from .report import write_figures
                    self.artifacts += write_figures(self.out, self.traj, self.series, self.rep)
                except ImportError:
                    self.say("  note: matplotlib unavailable, figures skipped")
            (self.out / "manifest.json").write_text(json.dumps(self.manifest(status, error), indent=2, default=float))
        if code == EXIT_PASS and not all(c.passed for c in self.checks):
            code = EXIT_FAIL
        n_pass = sum(c.passed for c in self.checks)
        self.say(f"{n_pass}/{len(self.checks)} checks passed; artifacts in {self.out}")
        return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tdseloc", description="Microlocal decomposition experiments")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run the suites of a config file")
    r.add_argument("config")
    r.add_argument("--suite", action="append", help="suite to run (repeatable, overrides the config)")
    r.add_argument("--out", help="artifact directory")
    r.add_argument("--seed", type=int, help="seed for lemma-lab trials")
    r.add_argument("--quiet", action="store_true")
    return p


def run(config_path, suites=None, out=None, seed=None, quiet=False) -> int:
    try:
        cfg = load(config_path)
        kw = {}
        if suites:
            kw["suites"] = resolve_suites(suites)
        if seed is not None:
            kw["seed"] = seed
        if out is not None:
            kw["out"] = str(out)
        if kw:
            cfg = replace(cfg, **kw)
    except (ConfigError, DomainError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    return Runner(cfg, Path(cfg.out), quiet).run()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "run":
        return run(args.config, args.suite, args.out, args.seed, args.quiet)
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

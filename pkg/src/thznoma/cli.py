"""Command-line front end: config, sweeps, CSV emission, self-validation.

Subcommands:
    outage        near/far outage probability vs far-user target rate
    sumrate       mean sum rate vs transmit power, with reference link
    validate      closed-form-vs-Monte-Carlo and PA conformance checks
    print-config  echo the fully resolved scenario in config grammar

Exit codes: 0 success, 1 config error, 2 runtime error, 3 validation
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__, allocation
from .allocation import (PaRequest, fair_pa, fair_pa_iterative,
                         improved_fair_pa)
from .config import ConfigError, ScenarioConfig, parse_config, render_config
from .ergodic import (WhitenedCovariance, build_effective_matrices,
                      closed_form_capacity, ergodic_capacity_mc_oracle)
from .montecarlo import (OUTAGE_SCHEMES, SUMRATE_SCHEMES, SweepSpec,
                         run_outage_sweep, run_sumrate_sweep)
from .noma import LinkBudget, PowerAllocation

_DEFAULT_SEED = 12345
_OUTAGE_GRID = "0.5:6:0.5"
_SUMRATE_GRID = "0:30:6"


def _parse_grid(text: str) -> tuple:
    """Inclusive start:stop:step grid; a bare number is a one-point grid."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return (float(parts[0]),)
        if len(parts) != 3:
            raise ValueError
        start, stop, step = (float(p) for p in parts)
    except ValueError:
        raise ConfigError("grid", "start:stop:step or a single number", text) from None
    if step <= 0 or stop < start:
        raise ConfigError("grid", "step > 0 and stop >= start", text)
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(start + k * step for k in range(count))


def _parse_schemes(text: str, allowed: tuple) -> tuple:
    schemes = tuple(s.strip() for s in text.split(",") if s.strip())
    for s in schemes:
        if s not in allowed:
            raise ConfigError("schemes", f"a comma list from {allowed}", s)
    if not schemes:
        raise ConfigError("schemes", "a non-empty comma list", text)
    return schemes


def _load_scenario(args) -> ScenarioConfig:
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    return parse_config(args.config, overrides)


def _fmt(v) -> str:
    return f"{float(v):.12g}"


def _write_atomic(path: str, data: str):
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_manifest(out_dir: str, command: str, cfg: ScenarioConfig, seed: int,
                    outputs: list):
    manifest = {
        "command": command,
        "config": cfg.as_dict(),
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "outputs": outputs,
    }
    path = os.path.join(out_dir, f"{command}_manifest.json")
    _write_atomic(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _cmd_outage(args) -> int:
    cfg = _load_scenario(args)
    schemes = _parse_schemes(args.schemes, allocation.SCHEMES) \
        if args.schemes else OUTAGE_SCHEMES
    spec = SweepSpec(variable="target_rate", grid=_parse_grid(args.grid),
                     trials=cfg.trials, schemes=schemes, master_seed=args.seed)
    result = run_outage_sweep(spec, cfg)
    lines = ["target_rate,scheme,user,outage,stderr"]
    for i, rate in enumerate(result.grid):
        for scheme in result.schemes:
            s = result.series[scheme]
            lines.append(",".join([_fmt(rate), scheme, "far",
                                   _fmt(s["far_outage"][i]),
                                   _fmt(s["far_outage_stderr"][i])]))
            lines.append(",".join([_fmt(rate), scheme, "near",
                                   _fmt(s["near_outage"][i]),
                                   _fmt(s["near_outage_stderr"][i])]))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "outage.csv")
    _write_atomic(csv_path, "\n".join(lines) + "\n")
    _write_manifest(args.out, "outage", cfg, args.seed, ["outage.csv"])
    print(f"wrote {csv_path} ({len(result.grid)} grid points, "
          f"{cfg.trials} trials/point)")
    return 0


def _cmd_sumrate(args) -> int:
    cfg = _load_scenario(args)
    schemes = _parse_schemes(args.schemes, SUMRATE_SCHEMES) \
        if args.schemes else SUMRATE_SCHEMES
    spec = SweepSpec(variable="tx_power_dbm", grid=_parse_grid(args.grid),
                     trials=cfg.trials, schemes=schemes, master_seed=args.seed)
    result = run_sumrate_sweep(spec, cfg)
    lines = ["tx_power_dbm,scheme,sum_rate,stderr"]
    for i, dbm in enumerate(result.grid):
        for scheme in result.schemes:
            s = result.series[scheme]
            lines.append(",".join([_fmt(dbm), scheme,
                                   _fmt(s["sum_rate"][i]),
                                   _fmt(s["sum_rate_stderr"][i])]))
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "sumrate.csv")
    _write_atomic(csv_path, "\n".join(lines) + "\n")
    _write_manifest(args.out, "sumrate", cfg, args.seed, ["sumrate.csv"])
    print(f"wrote {csv_path} ({len(result.grid)} grid points, "
          f"{cfg.trials} trials/point)")
    return 0


def _random_psd(rng: np.random.Generator, dim: int) -> np.ndarray:
    a = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    r = a @ a.conj().T
    return r * (dim / np.trace(r).real)


def _cmd_validate(args) -> int:
    cfg = _load_scenario(args)
    tol = args.tolerance_se
    rng = np.random.default_rng(args.seed)
    failures = 0

    print(f"closed form vs Monte Carlo oracle (tolerance {tol:g} std errors)")
    for case in range(6):
        dim = int(rng.integers(2, 6))
        cov = WhitenedCovariance(_random_psd(rng, dim))
        for snr_db in (0.0, 10.0):
            lb = LinkBudget(10.0 ** (snr_db / 10.0), 1.0)
            pa = PowerAllocation((0.8, 0.2))
            a_eff, b_eff = build_effective_matrices(pa, lb, cov, 0)
            closed = closed_form_capacity(a_eff, b_eff, lb)
            mc, se = ergodic_capacity_mc_oracle(pa, lb, cov, 0, 200000, rng)
            margin = abs(closed - mc) / se if se > 0 else 0.0
            ok = margin <= tol
            failures += not ok
            print(f"  case {case} dim {dim} snr {snr_db:4.1f} dB: "
                  f"closed {closed:.6f} mc {mc:.6f} ({margin:.2f} SE) "
                  f"{'ok' if ok else 'FAIL'}")

    print("power allocation conformance")
    lb = LinkBudget(cfg.tx_power_w, cfg.noise_power_w)
    worst = 0.0
    for _ in range(2000):
        gain = float(10.0 ** rng.uniform(-16, -10))
        rate = float(rng.uniform(0.0, 6.0))
        req = PaRequest(gain, lb, rate)
        direct, loop = fair_pa(req), fair_pa_iterative(req)
        diff = max(abs(a - b) for a, b in zip(direct.allocation.coefficients,
                                              loop.allocation.coefficients))
        worst = max(worst, diff)
        imp, imp_loop = improved_fair_pa(req), fair_pa_iterative(req, improved=True)
        diff = max(abs(a - b) for a, b in zip(imp.allocation.coefficients,
                                              imp_loop.allocation.coefficients))
        worst = max(worst, diff)
        if direct.feasible_far:
            agree = direct.allocation.coefficients == imp.allocation.coefficients
        else:
            agree = (direct.allocation.coefficients == (1.0, 0.0)
                     and imp.allocation.coefficients == (0.0, 1.0))
        if not agree:
            failures += 1
            print(f"  branch disagreement at gain {gain:g} rate {rate:g}")
    ok = worst <= 1e-9
    failures += not ok
    print(f"  pseudocode-loop worst deviation {worst:.3g} {'ok' if ok else 'FAIL'}")

    if failures:
        print(f"validation FAILED ({failures} violations)")
        return 3
    print("validation passed")
    return 0


def _cmd_print_config(args) -> int:
    cfg = _load_scenario(args)
    sys.stdout.write(render_config(cfg))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="thznoma",
        description="Link-level sweeps for a RIS-assisted NOMA-MIMO THz downlink.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid_default):
        p.add_argument("--config", default=None, help="scenario INI file")
        p.add_argument("--seed", type=int, default=_DEFAULT_SEED,
                       help="master seed (default %(default)s)")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte Carlo trials per grid point")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default from config)")
        p.add_argument("--out", default=".", help="output directory")
        if grid_default is not None:
            p.add_argument("--grid", default=grid_default,
                           help="start:stop:step (default %(default)s)")
            p.add_argument("--schemes", default=None,
                           help="comma list of schemes to run")

    p_out = sub.add_parser("outage", help="outage vs far-user target rate")
    common(p_out, _OUTAGE_GRID)
    p_out.set_defaults(func=_cmd_outage)

    p_sum = sub.add_parser("sumrate", help="sum rate vs transmit power (dBm)")
    common(p_sum, _SUMRATE_GRID)
    p_sum.set_defaults(func=_cmd_sumrate)

    p_val = sub.add_parser("validate", help="numerical self-checks")
    common(p_val, None)
    p_val.add_argument("--tolerance-se", type=float, default=3.0,
                       help="agreement tolerance in std errors (default %(default)s)")
    p_val.set_defaults(func=_cmd_validate)

    p_cfg = sub.add_parser("print-config", help="echo the resolved scenario")
    common(p_cfg, None)
    p_cfg.set_defaults(func=_cmd_print_config)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: reads a ``key = value`` config and writes CSV or JSON tables."""

from __future__ import annotations

import argparse
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import analysis, errmodels, parity, verify
from .dynamics import sample_ensemble
from .exceptions import ConfigError, ImpossibleBranchError, NumericalError
from .models import CqdParams, DetuningParams, HoleMixingParams
from .parity import DetectorModel, ProtocolConfig, StateAmplitudes
from .qcore import density_from_pure
from .units import internal_to_ns, ns_to_internal

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_BRANCH = 0, 2, 3, 4

_PARAM_KEYS = {
    "params.omega0_mev": "omega0",
    "params.omega_l_mev": "omega_l",
    "params.rabi_mev": "rabi",
    "params.v_f_mev": "v_f",
    "params.v_xx_mev": "v_xx",
    "params.gamma_x_mev": "gamma_x",
}
_SCALAR_KEYS = {
    "detector.eta": float,
    "protocol.wait_time_ns": float,
    "protocol.repetitions": int,
    "protocol.pulse_time_ns": float,
    "protocol.pulse_mode": str,
    "run.seed": int,
    "run.shots": int,
    "spatial.delta_r_nm": float,
    "spatial.omega0_ev": float,
    "holemix.points": int,
}
_LIST_KEYS = {
    "state.amplitudes": float,
    "sweep.r_list": int,
    "sweep.eta_grid": float,
    "holemix.eps_list": float,
    "detune.delta_grid_mev": float,
    "verify.alpha_grid": float,
}
KNOWN_KEYS = frozenset(_PARAM_KEYS) | frozenset(_SCALAR_KEYS) | frozenset(_LIST_KEYS)


def parse_config_text(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment, lists are comma separated."""
    out: dict[str, object] = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {n}: duplicate key {key!r}")
        try:
            if key in _LIST_KEYS:
                out[key] = [_LIST_KEYS[key](v.strip()) for v in value.split(",") if v.strip()]
            elif key in _PARAM_KEYS:
                out[key] = float(value)
            else:
                out[key] = _SCALAR_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"line {n}: bad value {value!r} for {key}") from None
    return out


@dataclass
class RunConfig:
    params: CqdParams = field(default_factory=CqdParams.canonical)
    detector: DetectorModel = field(default_factory=DetectorModel)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    amplitudes: StateAmplitudes = field(default_factory=StateAmplitudes.uniform)
    seed: int = 42
    shots: int = 1000
    r_list: list[int] = field(default_factory=lambda: [1, 2, 3, 5])
    eta_grid: list[float] = field(default_factory=lambda: [round(0.1 * k, 10) for k in range(11)])
    delta_r_nm: float = 5.0
    omega0_ev: float = 2.0
    eps_list: list[float] = field(default_factory=lambda: [0.0, 0.01, 0.02, 0.05])
    holemix_points: int = 201
    delta_grid_mev: list[float] = field(default_factory=lambda: [0.0, 0.01, 0.02, 0.05, 0.1])
    alpha_grid: list[float] = field(default_factory=lambda: [round(0.1 * k, 10) for k in range(11)])

    @classmethod
    def from_mapping(cls, m: dict[str, object]) -> RunConfig:
        try:
            base = CqdParams.canonical()
            params = CqdParams(**{f: m.get(k, getattr(base, f)) for k, f in _PARAM_KEYS.items()})
            detector = DetectorModel(efficiency=m.get("detector.eta", 0.5))
            wait = m.get("protocol.wait_time_ns")
            pulse = m.get("protocol.pulse_time_ns")
            protocol = ProtocolConfig(
                wait_time=None if wait is None else ns_to_internal(wait),
                repetitions=m.get("protocol.repetitions", 1),
                pulse_time=None if pulse is None else ns_to_internal(pulse),
                pulse_mode=m.get("protocol.pulse_mode", "ideal"),
            )
            amps = m.get("state.amplitudes")
            if amps is not None:
                if len(amps) != 4:
                    raise ConfigError("state.amplitudes needs four values (a00, a01, a10, a11)")
                amplitudes = StateAmplitudes.normalized(*amps)
            else:
                amplitudes = StateAmplitudes.uniform()
            cfg = cls(params=params, detector=detector, protocol=protocol, amplitudes=amplitudes)
        except ConfigError:
            raise
        except (ValueError, ArithmeticError) as exc:
            raise ConfigError(str(exc)) from None
        for key, attr in (("run.seed", "seed"), ("run.shots", "shots"), ("sweep.r_list", "r_list"),
                          ("sweep.eta_grid", "eta_grid"), ("spatial.delta_r_nm", "delta_r_nm"),
                          ("spatial.omega0_ev", "omega0_ev"), ("holemix.eps_list", "eps_list"),
                          ("holemix.points", "holemix_points"), ("detune.delta_grid_mev", "delta_grid_mev"),
                          ("verify.alpha_grid", "alpha_grid")):
            if key in m:
                setattr(cfg, attr, m[key])
        return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return RunConfig.from_mapping(parse_config_text(text))


# -- output ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def render(header: Sequence[str], rows: Sequence[Sequence], fmt: str) -> str:
    if fmt == "json":
        records = [{h: (float(v) if isinstance(v, np.floating) else v) for h, v in zip(header, r)} for r in rows]
        return json.dumps(records, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(v) for v in r) + "\n")
    return buf.getvalue()


# -- commands ----------------------------------------------------------------

Table = tuple[list[str], list[tuple]]


def _initial_state(cfg: RunConfig):
    return density_from_pure(cfg.amplitudes.to_state())


def cmd_run(cfg: RunConfig) -> Table:
    if cfg.shots < 1:
        raise ConfigError("shots must be >= 1")
    outcomes = parity.run_protocol_batch(_initial_state(cfg), cfg.params, cfg.detector, cfg.protocol,
                                         cfg.seed, cfg.shots)
    rows = []
    for k, o in enumerate(outcomes):
        t = None if o.detection_time is None else internal_to_ns(o.detection_time)
        rows.append((k, cfg.seed, o.variant, t, float(o.even_fidelity())))
    return ["shot", "seed", "outcome", "detection_time", "posterior_even_fidelity"], rows


def cmd_sweep_eta(cfg: RunConfig) -> Table:
    try:
        rows = analysis.sweep_efficiency(cfg.r_list, cfg.eta_grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return ["eta", "r", "avg_fidelity"], rows


def cmd_spatial(cfg: RunConfig) -> Table:
    try:
        sp = errmodels.SpatialParams.from_energy(cfg.delta_r_nm, cfg.omega0_ev)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    f = errmodels.spatial_mode_overlap(sp.alpha())
    return ["alpha", "f", "three_f"], [(sp.alpha(), f, 3 * f)]


def cmd_holemix(cfg: RunConfig) -> Table:
    p = cfg.params
    if cfg.holemix_points < 2:
        raise ConfigError("holemix.points must be >= 2")
    grid = np.linspace(0.0, p.pi_pulse_time, cfg.holemix_points)
    rows = []
    for eps in cfg.eps_list:
        try:
            hm = HoleMixingParams.matched(p, eps)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        scan = errmodels.holemix_pulse_scan(p, hm, p.detuning, grid)
        rows += [(float(t), eps, float(a), float(b)) for t, a, b in zip(scan.t, scan.pop_01, scan.pop_biexciton)]
    return ["t", "eps", "pop01", "popXX"], rows


def cmd_detune(cfg: RunConfig) -> Table:
    """Dots at omega_L +- delta; transfer maximum and relative phase after a resonant pi pulse."""
    p = cfg.params
    rows = []
    for delta in cfg.delta_grid_mev:
        d = DetuningParams(p.omega_l + delta, p.omega_l - delta, p.omega_l, p.gamma_x, p.gamma_x)
        p_max, _ = errmodels.detuned_excitation_transfer(p.rabi, delta)
        phase = errmodels.detuned_excitation_phase(p, d, p.pi_pulse_time).phase
        rows.append((delta, p_max, phase))
    return ["delta", "pmax", "phase"], rows


def cmd_verify(cfg: RunConfig) -> Table:
    try:
        return ["alpha", "p_odd_second"], [(a, verify.verification_probability(a)) for a in cfg.alpha_grid]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def cmd_traj(cfg: RunConfig) -> Table:
    """Raw monitored-relaxation trajectories after one pulse."""
    if cfg.shots < 1:
        raise ConfigError("shots must be >= 1")
    exp = parity.ParityExperiment(cfg.params, cfg.detector, cfg.protocol)
    start = exp.post_pulse_state(_initial_state(cfg))
    records = sample_ensemble(start, exp.h_relax, [exp.channel], exp.wait, cfg.seed, cfg.shots)
    rows = []
    for rec in records:
        first = internal_to_ns(rec.jump_times[0]) if rec.jump_times else None
        rows.append((rec.stream, rec.seed, rec.dn_total, first, float(rec.no_jump_norm),
                     float(rec.final_state.populations(parity.EVEN_LABELS))))
    return ["trajectory", "seed", "clicks", "first_click", "no_click_norm", "even_population"], rows


COMMANDS: dict[str, Callable[[RunConfig], Table]] = {
    "run": cmd_run,
    "sweep-eta": cmd_sweep_eta,
    "spatial": cmd_spatial,
    "holemix": cmd_holemix,
    "detune": cmd_detune,
    "verify": cmd_verify,
    "traj": cmd_traj,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dotparity", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--shots", type=int)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=COMMANDS[name].__doc__)
        if name == "sweep-eta":
            sp.add_argument("--r", type=int, nargs="+", dest="r_list")
            sp.add_argument("--eta", type=float, nargs="+", dest="eta_grid")
        elif name == "spatial":
            sp.add_argument("--delta-r-nm", type=float)
            sp.add_argument("--omega0-ev", type=float)
        elif name == "holemix":
            sp.add_argument("--eps", type=float, nargs="+", dest="eps_list")
        elif name == "detune":
            sp.add_argument("--delta-mev", type=float, nargs="+", dest="delta_grid_mev")
        elif name == "verify":
            sp.add_argument("--alpha", type=float, nargs="+", dest="alpha_grid")
    return parser


_OVERRIDES = ("seed", "shots", "r_list", "eta_grid", "delta_r_nm", "omega0_ev", "eps_list",
              "delta_grid_mev", "alpha_grid")


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        for name in _OVERRIDES:
            v = getattr(args, name, None)
            if v is not None:
                setattr(cfg, name, v)
        header, rows = COMMANDS[args.command](cfg)
        text = render(header, rows, args.format)
    except ValueError as exc:  # ConfigError and parameter validation
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ImpossibleBranchError as exc:
        print(f"impossible branch: {exc}", file=sys.stderr)
        return EXIT_BRANCH
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

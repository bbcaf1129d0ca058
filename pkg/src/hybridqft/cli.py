"""Command-line driver: flat ``key = value`` configs in, CSV files out.

Subcommands::

    hybridqft run CONFIG            trajectories (exact / trotter / both), angles, cost
    hybridqft angles CONFIG         angle table of one Trotter step
    hybridqft hardware CONFIG       trap and gate parameter sheet
    hybridqft cost CONFIG           per-step gate counts and digital estimates
    hybridqft dump-circuit CONFIG   one Trotter step as text

Exit codes: 0 success, 1 configuration error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import ast
import math
import operator
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from . import circuits, cost, evolve, hardware, models

# key -> (type, default, help).  ``None`` default means required when it applies.
KEYS: dict[str, tuple[type, object, str]] = {
    "model": (str, None, "yukawa | schwinger"),
    "b": (float, None, "lattice spacing"),
    "N": (int, None, "number of lattice sites (even, >= 2)"),
    "cutoff": (int, None, "boson cutoff (Yukawa: n_max; Schwinger: window half-width)"),
    "g": (float, None, "coupling"),
    "m_psi": (float, None, "fermion mass (yukawa)"),
    "m_phi": (float, None, "scalar mass (yukawa)"),
    "m": (float, None, "fermion mass (schwinger)"),
    "M": (int, None, "reference link occupation (schwinger)"),
    "dt": (float, None, "Trotter step"),
    "t_total": (float, None, "total evolution time, a multiple of dt"),
    "solver": (str, "both", "exact | trotter | both"),
    "frame": (str, "interleaved", "Yukawa free-scalar placement: interleaved | lumped"),
    "ancilla": (str, "exact", "Yukawa ancilla angles: exact | literal"),
    "boundary": (str, "plain", "wrap-around hopping sign: plain | jordan_wigner"),
    "boson_report": (str, "absolute", "mean boson number: absolute | relative (minus M)"),
    "stride": (int, 1, "sample every stride Trotter steps"),
    "output_dir": (str, ".", "directory for output files"),
    "prefix": (str, "", "file-name prefix (default: model name)"),
    "threads": (int, 0, "solver threads, 0 = numba default"),
    # trap (hardware subcommand)
    "n_ions": (int, 0, "ions in the chain (yukawa); 0 = N + 1"),
    "omega_x_khz": (float, None, "transverse trap frequency / 2pi"),
    "omega_z_khz": (float, 0.0, "axial trap frequency / 2pi; 0 = fit to trap_freqs_khz"),
    "trap_freqs_khz": (tuple, (), "measured transverse mode frequencies / 2pi, descending"),
    "eta": (float, None, "Lamb-Dicke parameter of the Raman beams"),
    "tau_us": (float, None, "spin-phonon gate time"),
    "eta_tilde": (float, None, "Lamb-Dicke parameter of the standing wave (schwinger)"),
    "tau_aa_us": (float, None, "phonon-phonon gate time (schwinger)"),
    "theta_sa": (float, 0.0, "override spin-phonon angle on the sheet (schwinger); 0 = compiled"),
    "hopping_khz": (float, 0.0, "local-mode phonon hopping rate / 2pi for the feasibility check"),
}

MODEL_KEYS = {
    "yukawa": ("b", "N", "cutoff", "g", "m_psi", "m_phi", "dt", "t_total"),
    "schwinger": ("b", "N", "cutoff", "g", "m", "M", "dt", "t_total"),
}
CHOICES = {
    "model": tuple(MODEL_KEYS),
    "solver": ("exact", "trotter", "both"),
    "frame": circuits.FRAME_POLICIES,
    "ancilla": circuits.ANCILLA_MODES,
    "boundary": models.BOUNDARIES,
    "boson_report": ("absolute", "relative"),
}
# phrases in parameter validation messages that identify the offending key
_BLAME = [("lattice spacing", "b"), ("electric-field cutoff", "cutoff"), ("boson cutoff", "cutoff"),
          ("M - cutoff", "M"), ("t_total", "t_total"), ("dt", "dt"), ("N", "N")]


class ConfigError(ValueError):
    def __init__(self, msg: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {msg}" if line else msg)


# values ---------------------------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": math.sqrt, "exp": math.exp, "log": math.log, "log2": math.log2}
_CONSTS = {"pi": math.pi}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return node.value
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.Name) and node.id in _CONSTS:
        return _CONSTS[node.id]
    if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and node.func.id in _FUNCS
            and len(node.args) == 1 and not node.keywords):
        return _FUNCS[node.func.id](_eval(node.args[0]))
    raise ValueError("not an arithmetic expression")


def eval_number(text: str) -> float | int:
    """Arithmetic with ``+ - * / **``, ``pi`` and ``sqrt/exp/log/log2``."""
    try:
        return _eval(ast.parse(text.strip(), mode="eval"))
    except (SyntaxError, ValueError, TypeError, ZeroDivisionError, OverflowError) as exc:
        raise ValueError(f"cannot read {text!r} as a number ({exc})") from None


def _convert(key: str, raw: str, line: int):
    typ = KEYS[key][0]
    if typ is str:
        if key in CHOICES and raw not in CHOICES[key]:
            raise ConfigError(f"{key} must be one of {list(CHOICES[key])}, got {raw!r}", line)
        return raw
    try:
        if typ is tuple:
            return tuple(float(eval_number(x)) for x in raw.split(",") if x.strip())
        v = eval_number(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}", line) from None
    if typ is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{key} must be an integer, got {raw!r}", line)
        return int(v)
    return float(v)


# config ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    """Validated configuration.  ``values`` holds every key after defaults."""

    values: dict
    params: object
    lines: dict = field(default_factory=dict, compare=False)

    def __getattr__(self, key):
        values = self.__dict__.get("values", {})
        if key in values:
            return values[key]
        raise AttributeError(key)

    @property
    def model(self) -> str:
        return self.values["model"]

    @property
    def file_prefix(self) -> str:
        return self.values["prefix"] or self.model

    def path(self, suffix: str, output_dir: str | None = None) -> Path:
        d = Path(output_dir if output_dir is not None else self.values["output_dir"])
        return d / f"{self.file_prefix}_{suffix}"

    def require(self, *keys):
        missing = [k for k in keys if self.values.get(k) is None]
        if missing:
            raise ConfigError(f"missing key(s) for this command: {', '.join(missing)}")


def parse_config(text: str) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Unknown keys, repeated keys, bad values and parameter invariant
    violations raise :class:`ConfigError` carrying the line number.
    """
    raw, lines = {}, {}
    for no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", no)
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", no)
        if key in raw:
            raise ConfigError(f"key {key!r} repeated (first on line {lines[key]})", no)
        if not val:
            raise ConfigError(f"empty value for {key!r}", no)
        raw[key], lines[key] = val, no
    if "model" not in raw:
        raise ConfigError("model missing")
    values = {k: _convert(k, v, lines[k]) for k, v in raw.items()}
    model = values["model"]
    own = set(MODEL_KEYS[model])
    for other in MODEL_KEYS.values():
        for k in set(other) - own:
            if k in values:
                raise ConfigError(f"key {k!r} does not apply to model {model}", lines[k])
    missing = [k for k in MODEL_KEYS[model] if k not in values]
    if missing:
        raise ConfigError(f"missing key(s) for model {model}: {', '.join(missing)}")
    for k, (_, default, _) in KEYS.items():
        values.setdefault(k, default)
    if values["stride"] < 1:
        raise ConfigError(f"stride must be >= 1, got {values['stride']}", lines.get("stride"))
    if values["threads"] < 0:
        raise ConfigError(f"threads must be >= 0, got {values['threads']}", lines.get("threads"))
    cls = models.YukawaParams if model == "yukawa" else models.SchwingerParams
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = cls(**{k: values[k] for k in MODEL_KEYS[model]})
    except ValueError as exc:
        msg = str(exc)
        key = next((k for phrase, k in _BLAME if msg.startswith(phrase) or f" {phrase}" in msg), None)
        raise ConfigError(msg, lines.get(key)) from None
    return RunConfig(values, params, lines)


def format_config(cfg: RunConfig) -> str:
    """Config text that parses back to an equal configuration."""
    own = set(MODEL_KEYS[cfg.model])
    out = []
    for k, (typ, default, _) in KEYS.items():
        v = cfg.values.get(k)
        skip = any(k in keys for keys in MODEL_KEYS.values()) and k not in own
        if skip or v is None or (k not in own and k != "model" and v == default):
            continue
        if typ is tuple:
            v = ", ".join(repr(float(x)) for x in v)
        elif typ is float:
            v = repr(float(v))
        out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"


def load_config(path: str) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


# commands -------------------------------------------------------------------------

def _write(path: Path, text: str, quiet: bool):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if not quiet:
        print(f"wrote {path}")


def _set_threads(n: int):
    if n > 0:
        import numba
        numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _compile(cfg: RunConfig):
    return circuits.compile_circuit(cfg.params, frame=cfg.frame, ancilla=cfg.ancilla)


def exact_trajectory(cfg: RunConfig) -> evolve.Trajectory:
    p = cfg.params
    if cfg.model == "yukawa":
        H = models.yukawa_hamiltonian(p, ancilla=False, boundary=cfg.boundary)
    else:
        H = models.schwinger_hamiltonian(p, boundary=cfg.boundary)
    psi0 = models.initial_state(p)
    obs = evolve.Observer(p, psi0, boson=cfg.boson_report)
    times = evolve.sample_times(p.t_total, p.dt, cfg.stride)
    return evolve.exact_evolve(H, psi0, times, obs)


def trotter_trajectory(cfg: RunConfig, progress=None) -> evolve.Trajectory:
    p = cfg.params
    circ = _compile(cfg)
    psi0 = models.initial_state(p, ancilla=cfg.model == "yukawa")
    obs = evolve.Observer(p, psi0, boson=cfg.boson_report)
    return evolve.run_trotter(circ, psi0, obs, stride=cfg.stride, progress=progress)


def cost_reports(cfg: RunConfig) -> list[cost.CostReport]:
    p = cfg.params
    reps = [cost.count_circuit(_compile(cfg).with_steps(1))]
    # a one-qubit boson register (cutoff 1) has no digital shift circuit to estimate
    if p.cutoff >= 2:
        reps.append(cost.digital_estimate(cfg.model, p.N, p.cutoff))
        reps.append(cost.digital_estimate(cfg.model, p.N, p.cutoff, breakdown=True))
    return reps


def hardware_sheet(cfg: RunConfig) -> hardware.HardwareSheet:
    p = cfg.params
    hop = hardware.from_khz(cfg.hopping_khz) if cfg.hopping_khz else None
    if cfg.model == "yukawa":
        cfg.require("omega_x_khz", "eta", "tau_us")
        n_ions = cfg.n_ions or p.N + 1
        wx = hardware.from_khz(cfg.omega_x_khz)
        if cfg.omega_z_khz:
            wz = hardware.from_khz(cfg.omega_z_khz)
        elif cfg.trap_freqs_khz:
            if len(cfg.trap_freqs_khz) != n_ions:
                raise ConfigError(f"trap_freqs_khz has {len(cfg.trap_freqs_khz)} entries, "
                                  f"n_ions is {n_ions}", cfg.lines.get("trap_freqs_khz"))
            wz = hardware.fit_axial_frequency(wx, hardware.from_khz(cfg.trap_freqs_khz), n_ions)
        else:
            raise ConfigError("hardware needs omega_z_khz or trap_freqs_khz")
        try:
            trap = hardware.TrapConfig(n_ions, wx, wz, cfg.eta)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return hardware.yukawa_sheet(p, trap, cfg.tau_us * 1e-6, hopping_rate=hop)
    cfg.require("omega_x_khz", "eta", "tau_us", "eta_tilde", "tau_aa_us")
    return hardware.schwinger_sheet(p, hardware.from_khz(cfg.omega_x_khz), cfg.eta,
                                    cfg.tau_us * 1e-6, cfg.eta_tilde, cfg.tau_aa_us * 1e-6,
                                    theta=cfg.theta_sa or None, hopping_rate=hop)


def _has_trap(cfg: RunConfig) -> bool:
    return cfg.omega_x_khz is not None and cfg.eta is not None and cfg.tau_us is not None


def cmd_run(cfg, out, quiet):
    kinds = ("exact", "trotter") if cfg.solver == "both" else (cfg.solver,)
    for kind in kinds:
        if kind == "exact":
            traj = exact_trajectory(cfg)
        else:
            def progress(k, n):
                if not quiet and (k % max(1, n // 10) == 0 or k == n):
                    print(f"trotter step {k}/{n}", file=sys.stderr)
            traj = trotter_trajectory(cfg, progress)
        _write(cfg.path(f"{kind}.csv", out), traj.to_csv(), quiet)
    _write(cfg.path("angles.csv", out), _angles_text(cfg), quiet)
    _write(cfg.path("cost.csv", out), cost.reports_csv(cost_reports(cfg)), quiet)
    if _has_trap(cfg):
        _write(cfg.path("hardware.csv", out), hardware_sheet(cfg).to_csv(), quiet)


def _angles_text(cfg):
    if cfg.model == "yukawa":
        return circuits.angles_csv(circuits.yukawa_angles(cfg.params, cfg.ancilla))
    return circuits.angles_csv(circuits.schwinger_angles(cfg.params))


def cmd_angles(cfg, out, quiet):
    _write(cfg.path("angles.csv", out), _angles_text(cfg), quiet)
    if not quiet:
        for c in circuits.angle_conflicts():
            print(f"note: {c.name}: printed {c.printed} vs formula {c.formula:.6g} "
                  f"(ratio {c.ratio:.4f}); {c.note}")


def cmd_hardware(cfg, out, quiet):
    sheet = hardware_sheet(cfg)
    _write(cfg.path("hardware.csv", out), sheet.to_csv(), quiet)
    if not quiet:
        for c in sheet.checks:
            print(c)


def cmd_cost(cfg, out, quiet):
    reps = cost_reports(cfg)
    _write(cfg.path("cost.csv", out), cost.reports_csv(reps), quiet)
    _write(cfg.path("cost.json", out), cost.reports_json(reps) + "\n", quiet)


def cmd_dump(cfg, out, quiet):
    _write(cfg.path("circuit.txt", out), circuits.dump_circuit(_compile(cfg)), quiet)


COMMANDS = {"run": cmd_run, "angles": cmd_angles, "hardware": cmd_hardware,
            "cost": cmd_cost, "dump-circuit": cmd_dump}


def run(cfg: RunConfig, command: str = "run", output_dir: str | None = None,
        quiet: bool = True) -> int:
    """Execute a subcommand; returns the exit code."""
    _set_threads(cfg.threads)
    try:
        COMMANDS[command](cfg, output_dir, quiet)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (evolve.KrylovError, FloatingPointError, MemoryError) as exc:
        print(f"solver failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="hybridqft", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=list(COMMANDS))
    ap.add_argument("config", help="key = value configuration file")
    ap.add_argument("-o", "--output-dir", default=None, help="overrides output_dir")
    ap.add_argument("-q", "--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {args.config}: {exc}", file=sys.stderr)
        return 1
    return run(cfg, args.command, args.output_dir, args.quiet)


if __name__ == "__main__":
    sys.exit(main())

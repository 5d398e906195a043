"""Run configuration, initial states, figure presets, sweeps and file output.

Config files are flat ``key = value`` text with dotted section names::

    model.n_qubits = 2
    model.nu = 10
    dissipation.kappa = 0.1
    initial.qubits = eq5(a=0.1, b=0.45, c=0.45, f=0, normalize=true)
    initial.resonator = thermal(0.5)

Energies and rates are given in units of the coupling omega, and times as
omega*t.  The qubit-qubit term counts ordered pairs, so a coupling quoted
for unordered pairs corresponds to half the ``model.chi`` value.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import entanglement as ent
from . import linalg
from .convex_roof import RoofOptions, i_tangle_convex_roof
from .evolution import (
    DensityMatrix, PhysicalityError, PhysicalityReport, Trajectory, evolve, physicality_report,
)
from .linalg import CompositeSpace, partial_trace
from .model import ModelParams

log = logging.getLogger(__name__)

MEASURES = ("qubit_resonator_tangle", "pairwise_tangles", "entropy", "i_tangle")
CUTOFF_STEP = 4
CUTOFF_TOL = 1e-4
DEFAULT_KAPPA_SWEEP = (0.01, 0.05, 0.1, 0.5, 1.0, 5.0)


@dataclass(frozen=True)
class MixedEq5:
    """a|ee><ee| + b|eg><eg| + (1-a)|gg><gg| + f|eg><ge| + f*|ge><eg| + c|ge><ge|."""

    a: float
    b: float = 0.0
    c: float = 0.0
    f: complex = 0.0
    normalize: bool = False

    @property
    def raw_trace(self) -> float:
        return 1.0 + self.b + self.c

    def matrix(self) -> np.ndarray:
        # two-qubit basis order |ee>, |eg>, |ge>, |gg>
        m = np.zeros((4, 4), dtype=complex)
        m[0, 0] = self.a
        m[1, 1] = self.b
        m[2, 2] = self.c
        m[3, 3] = 1.0 - self.a
        m[1, 2] = self.f
        m[2, 1] = np.conj(self.f)
        tr = float(np.trace(m).real)
        if self.normalize:
            if tr <= 0:
                raise ValueError(f"mixed initial state has non-positive trace {tr}")
            m = m / tr
        elif abs(tr - 1.0) > 1e-10:
            raise ValueError(f"mixed initial state has trace {tr:.6g} (set normalize=true to rescale)")
        w = np.linalg.eigvalsh(m)
        if w[0] < -1e-10:
            raise ValueError(f"mixed initial state is not positive: eigenvalue {w[0]:.6g}")
        return m

    def text(self) -> str:
        f = complex(self.f)
        f_text = _fmt(f.real) if f.imag == 0 else repr(f).strip("()")
        return (
            f"eq5(a={_fmt(self.a)}, b={_fmt(self.b)}, c={_fmt(self.c)}, f={f_text}, "
            f"normalize={'true' if self.normalize else 'false'})"
        )


@dataclass(frozen=True)
class ScenarioConfig:
    model: ModelParams = field(default_factory=ModelParams)
    initial_qubits: str | MixedEq5 = "e"
    initial_resonator: str = "vacuum"
    t_max: float = 50.0
    n_points: int = 2000
    method: str = "direct"
    atol: float = 1e-12
    check_cutoff: bool = False
    measures: tuple[str, ...] = ()
    csv: str | None = None
    svg: str | None = None
    roof_restarts: int = 8

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("grid needs at least two points")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if isinstance(self.initial_qubits, MixedEq5):
            if self.model.n_qubits != 2:
                raise ValueError("the eq5 mixed state is defined for two qubits only")
        else:
            q = self.initial_qubits
            if len(q) != self.model.n_qubits or set(q) - {"e", "g"}:
                raise ValueError(f"initial.qubits {q!r} must be {self.model.n_qubits} letters from 'e'/'g'")
        kind, arg = parse_resonator(self.initial_resonator)
        if kind == "fock" and arg > self.model.n_max:
            raise ValueError(f"fock({int(arg)}) exceeds the cutoff n_max={self.model.n_max}")
        for m in self.measures:
            if m not in MEASURES:
                raise ValueError(f"unknown measure {m!r}; choose from {MEASURES}")
        if self.method not in ("direct", "exponential"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.n_points)

    @property
    def active_measures(self) -> tuple[str, ...]:
        if self.measures:
            return self.measures
        if self.model.n_qubits == 1:
            return ("qubit_resonator_tangle", "entropy")
        return ("pairwise_tangles", "entropy")

    def with_(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)


def _fmt(x: float) -> str:
    return repr(float(x))


def parse_resonator(text: str) -> tuple[str, float]:
    t = text.strip().lower()
    if t in ("vacuum", "fock(0)"):
        return "vacuum", 0.0
    m = re.fullmatch(r"(fock|thermal)\(\s*([^)]+?)\s*\)", t)
    if not m:
        raise ValueError(f"initial.resonator {text!r} must be vacuum, fock(n) or thermal(nbar)")
    kind, value = m.group(1), float(m.group(2))
    if kind == "fock" and (value != int(value) or value < 0):
        raise ValueError(f"fock level must be a non-negative integer, got {value}")
    if kind == "thermal" and value < 0:
        raise ValueError(f"thermal occupation must be >= 0, got {value}")
    return kind, value


def parse_qubits(text: str) -> str | MixedEq5:
    t = text.strip()
    m = re.fullmatch(r"eq5\((.*)\)", t, flags=re.IGNORECASE)
    if not m:
        return t.lower()
    kwargs: dict = {}
    for part in m.group(1).split(","):
        if not part.strip():
            continue
        key, _, value = part.partition("=")
        key, value = key.strip().lower(), value.strip()
        if key in ("a", "b", "c"):
            kwargs[key] = float(value)
        elif key == "f":
            kwargs[key] = complex(value.replace(" ", ""))
        elif key == "normalize":
            kwargs[key] = _parse_bool(value)
        else:
            raise ValueError(f"unknown eq5 parameter {key!r}")
    if "a" not in kwargs:
        raise ValueError("eq5 needs at least the parameter a")
    return MixedEq5(**kwargs)


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def thermal_populations(n_bar: float, n_max: int) -> tuple[np.ndarray, float]:
    """Truncated geometric distribution renormalized on 0..n_max, plus the discarded mass."""
    if n_bar == 0:
        p = np.zeros(n_max + 1)
        p[0] = 1.0
        return p, 0.0
    q = n_bar / (1.0 + n_bar)
    p = (1.0 - q) * q ** np.arange(n_max + 1)
    lost = q ** (n_max + 1)
    return p / p.sum(), float(lost)


def resonator_state(text: str, n_max: int) -> tuple[np.ndarray, float]:
    kind, arg = parse_resonator(text)
    if kind == "thermal":
        p, lost = thermal_populations(arg, n_max)
        return np.diag(p).astype(complex), lost
    n = 0 if kind == "vacuum" else int(arg)
    if n > n_max:
        raise ValueError(f"fock({n}) exceeds the cutoff n_max={n_max}")
    m = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    m[n, n] = 1.0
    return m, 0.0


def qubit_state(state: str | MixedEq5) -> np.ndarray:
    if isinstance(state, MixedEq5):
        return state.matrix()
    kets = [linalg.KET_E if ch == "e" else linalg.KET_G for ch in state]
    return linalg.dm(linalg.kron_all(kets))


def build_initial_state(cfg: ScenarioConfig, space: CompositeSpace | None = None) -> DensityMatrix:
    space = space or cfg.model.space
    rho_q = qubit_state(cfg.initial_qubits)
    rho_r, _ = resonator_state(cfg.initial_resonator, cfg.model.n_max)
    rho = DensityMatrix(np.kron(rho_q, rho_r), space)
    rho.validate()
    return rho


# ---------------------------------------------------------------- config text

_KEYS = {
    "model.n_qubits": ("model", "n_qubits", int),
    "model.nu": ("model", "nu", float),
    "model.omega": ("model", "omega", float),
    "model.v_gate": ("model", "v_gate", float),
    "model.e_j": ("model", "e_j", float),
    "model.chi": ("model", "chi", float),
    "dissipation.kappa": ("model", "kappa", float),
    "dissipation.gamma": ("model", "gamma", float),
    "dissipation.gamma_cross": ("model", "gamma_cross", float),
    "dissipation.n_bar": ("model", "n_bar", float),
    "numerics.n_max": ("model", "n_max", int),
    "numerics.rwa": ("model", "rwa", _parse_bool),
    "numerics.t_max": ("cfg", "t_max", float),
    "numerics.n_points": ("cfg", "n_points", int),
    "numerics.method": ("cfg", "method", str),
    "numerics.atol": ("cfg", "atol", float),
    "numerics.check_cutoff": ("cfg", "check_cutoff", _parse_bool),
    "initial.qubits": ("cfg", "initial_qubits", parse_qubits),
    "initial.resonator": ("cfg", "initial_resonator", str),
    "output.csv": ("cfg", "csv", str),
    "output.svg": ("cfg", "svg", str),
    "output.measures": ("cfg", "measures", lambda v: tuple(s.strip() for s in v.split(",") if s.strip())),
}
# energies scaled by omega when building the model
_SCALED = {"nu", "v_gate", "e_j", "chi", "kappa", "gamma", "gamma_cross"}


def parse_config_text(text: str) -> ScenarioConfig:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        values[key] = value
    return config_from_mapping(values)


def config_from_mapping(values: dict[str, str]) -> ScenarioConfig:
    model_kw: dict = {}
    cfg_kw: dict = {}
    for key, value in values.items():
        section, attr, conv = _KEYS[key]
        (model_kw if section == "model" else cfg_kw)[attr] = conv(value)
    omega = model_kw.get("omega", 1.0)
    for attr in _SCALED & model_kw.keys():
        model_kw[attr] = model_kw[attr] * omega
    n_qubits = model_kw.get("n_qubits", 1)
    cfg_kw.setdefault("initial_qubits", "e" * n_qubits)
    return ScenarioConfig(model=ModelParams(**model_kw), **cfg_kw)


def config_to_text(cfg: ScenarioConfig) -> str:
    m = cfg.model
    omega = m.omega
    lines = []
    for key, (section, attr, _) in _KEYS.items():
        if section == "model":
            value = getattr(m, attr)
            if attr in _SCALED:
                value = value / omega
        else:
            value = getattr(cfg, attr)
        if value is None or (key == "output.measures" and not value):
            continue
        if isinstance(value, bool):
            text = "true" if value else "false"
        elif isinstance(value, MixedEq5):
            text = value.text()
        elif isinstance(value, float):
            text = _fmt(value)
        elif isinstance(value, tuple):
            text = ", ".join(value)
        else:
            text = str(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"


def load_config(path: str | Path) -> ScenarioConfig:
    return parse_config_text(Path(path).read_text())


def set_config_value(cfg: ScenarioConfig, key: str, value: str) -> ScenarioConfig:
    """Return ``cfg`` with one dotted key replaced (value given as config text)."""
    if key not in _KEYS:
        raise ValueError(f"unknown key {key!r}")
    values = dict(line.split(" = ", 1) for line in config_to_text(cfg).splitlines())
    values[key] = value
    return config_from_mapping(values)


# ---------------------------------------------------------------- observables

def column_names(cfg: ScenarioConfig) -> list[str]:
    n = cfg.model.n_qubits
    meas = cfg.active_measures
    cols = ["omega_t"]
    if "qubit_resonator_tangle" in meas:
        cols.append("tangle_qr")
    if "pairwise_tangles" in meas and n >= 2:
        cols += [f"tangle_q{i + 1}q{j + 1}" for i in range(n) for j in range(i + 1, n)]
    if "i_tangle" in meas and n >= 2:
        cols += [f"itangle_q{j + 1}_rest" for j in range(n)]
    if "entropy" in meas:
        cols.append("entropy")
    cols += ["mean_n", "trace_dev", "min_eig"]
    if "qubit_resonator_tangle" in meas:
        cols.append("leakage")
    return cols


def make_observer(cfg: ScenarioConfig):
    space = cfg.model.space
    meas = cfg.active_measures
    n = cfg.model.n_qubits
    qubits = list(space.qubits)
    phonons = np.arange(cfg.model.n_max + 1)
    roof = RoofOptions(restarts=cfg.roof_restarts)

    def observe(rho: np.ndarray) -> dict[str, float]:
        try:
            return measure(rho)
        except ValueError as exc:
            # the state passed the integrator's abort bounds but not the stricter measure checks
            raise PhysicalityError(f"state rejected by an entanglement measure: {exc}") from exc

    def measure(rho: np.ndarray) -> dict[str, float]:
        out: dict[str, float] = {}
        if "qubit_resonator_tangle" in meas:
            red = ent.effective_two_level_reduce(rho, space, 0)
            out["tangle_qr"] = ent.tangle_two_qubit(red.rho)
            out["leakage"] = red.leakage
        if "pairwise_tangles" in meas and n >= 2:
            for (i, j), v in ent.pairwise_tangles(rho, space).items():
                out[f"tangle_q{i + 1}q{j + 1}"] = v
        if "i_tangle" in meas and n >= 2:
            rho_q = partial_trace(rho, space, qubits)
            for j in range(n):
                order = [j] + [k for k in range(n) if k != j]
                t = rho_q.reshape([2] * (2 * n)).transpose(order + [k + n for k in order])
                out[f"itangle_q{j + 1}_rest"] = i_tangle_convex_roof(
                    t.reshape(2 ** n, 2 ** n), (2, 2 ** (n - 1)), roof
                ).value
        if "entropy" in meas:
            out["entropy"] = ent.von_neumann_entropy(partial_trace(rho, space, qubits))
        res = partial_trace(rho, space, [space.resonator])
        out["mean_n"] = float(np.real(np.diagonal(res)) @ phonons)
        return out

    return observe


# ---------------------------------------------------------------- running

@dataclass
class ScenarioResult:
    config: ScenarioConfig
    trajectory: Trajectory
    report: PhysicalityReport
    columns: list[str]
    table: np.ndarray
    notes: list[str] = field(default_factory=list)
    csv_path: Path | None = None
    svg_path: Path | None = None

    def column(self, name: str) -> np.ndarray:
        return self.table[:, self.columns.index(name)]


def _tangle_columns(columns: Sequence[str]) -> list[str]:
    return [c for c in columns if c.startswith("tangle_") or c.startswith("itangle_")]


def simulate(cfg: ScenarioConfig) -> tuple[Trajectory, np.ndarray, list[str]]:
    rho0 = build_initial_state(cfg)
    traj = evolve(
        rho0, cfg.model, cfg.times, method=cfg.method, atol=cfg.atol, observe=make_observer(cfg)
    )
    columns = column_names(cfg)
    data = {"omega_t": traj.times, "trace_dev": traj.trace_dev, "min_eig": traj.min_eig}
    data.update(traj.observables)
    table = np.column_stack([np.asarray(data[c], dtype=float) for c in columns])
    return traj, table, columns


def converge_cutoff(cfg: ScenarioConfig, max_raises: int = 2):
    """Rerun at n_max + 4 until the tangle columns move by at most 1e-4."""
    traj, table, columns = simulate(cfg)
    tcols = [columns.index(c) for c in _tangle_columns(columns)]
    delta = math.inf
    for _ in range(max_raises + 1):
        bigger = cfg.with_(model=cfg.model.with_(n_max=cfg.model.n_max + CUTOFF_STEP))
        traj2, table2, _ = simulate(bigger)
        delta = float(np.max(np.abs(table2[:, tcols] - table[:, tcols]))) if tcols else 0.0
        if delta <= CUTOFF_TOL:
            break
        log.info("cutoff n_max=%d not converged (delta %.2e), raising", cfg.model.n_max, delta)
        cfg, traj, table = bigger, traj2, table2
    traj.meta["cutoff_converged"] = delta <= CUTOFF_TOL
    traj.meta["cutoff_delta"] = delta
    traj.meta["n_max"] = cfg.model.n_max
    return cfg, traj, table, columns


def run_scenario(cfg: ScenarioConfig, write: bool = True) -> ScenarioResult:
    notes = []
    if isinstance(cfg.initial_qubits, MixedEq5) and cfg.initial_qubits.normalize:
        notes.append(f"eq5 initial state renormalized from trace {cfg.initial_qubits.raw_trace:.6g}")
    kind, arg = parse_resonator(cfg.initial_resonator)
    if kind == "thermal":
        _, lost = thermal_populations(arg, cfg.model.n_max)
        notes.append(f"thermal resonator truncated at n_max={cfg.model.n_max}, renormalized mass {lost:.3e}")
    if cfg.check_cutoff:
        cfg, traj, table, columns = converge_cutoff(cfg)
    else:
        traj, table, columns = simulate(cfg)
    result = ScenarioResult(cfg, traj, physicality_report(traj), columns, table, notes)
    if write:
        from .io import write_csv
        from .plotting import plot_scenario

        if cfg.csv:
            result.csv_path = write_csv(result, cfg.csv)
        if cfg.svg:
            result.svg_path = plot_scenario(result, cfg.svg)
    return result


# ---------------------------------------------------------------- presets and sweeps

@dataclass(frozen=True)
class Preset:
    name: str
    base: ScenarioConfig
    sweep_key: str | None = None
    values: tuple[float, ...] = ()
    note: str = ""

    def configs(self, out_dir: str | Path | None = None) -> list[ScenarioConfig]:
        if self.sweep_key is None:
            return [_with_outputs(self.base, out_dir, self.name)]
        return sweep_configs(self.base, self.sweep_key, self.values, out_dir, self.name)


def _with_outputs(cfg: ScenarioConfig, out_dir, stem: str) -> ScenarioConfig:
    if out_dir is None:
        return cfg
    out = Path(out_dir)
    return cfg.with_(csv=str(out / f"{stem}.csv"), svg=str(out / f"{stem}.svg"))


def sweep_tag(key: str, value: float) -> str:
    return f"{key.rsplit('.', 1)[-1]}{format(float(value), 'g')}"


def sweep_configs(
    base: ScenarioConfig,
    key: str,
    values: Sequence[float | str],
    out_dir: str | Path | None = None,
    stem: str | None = None,
) -> list[ScenarioConfig]:
    """One config per value, output files named ``<stem>_<key><value>.csv``."""
    out = []
    for v in values:
        cfg = set_config_value(base, key, str(v))
        if out_dir is not None or base.csv:
            directory = Path(out_dir) if out_dir is not None else Path(base.csv).parent
            name = stem or (Path(base.csv).stem if base.csv else "run")
            tag = f"{name}_{sweep_tag(key, float(v))}"
            cfg = cfg.with_(csv=str(directory / f"{tag}.csv"), svg=str(directory / f"{tag}.svg"))
        out.append(cfg)
    return out


def _run_quiet(cfg: ScenarioConfig) -> ScenarioResult:
    return run_scenario(cfg)


def run_many(configs: Sequence[ScenarioConfig], jobs: int = 1) -> list[ScenarioResult]:
    """Run independent configs, optionally in separate processes."""
    if jobs <= 1 or len(configs) <= 1:
        return [run_scenario(c) for c in configs]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_quiet, configs))


_COMMON = dict(nu=10.0, omega=1.0, v_gate=1.0, e_j=10.0)
_FIG3_STATE = MixedEq5(a=0.1, b=0.45, c=0.45, f=0.0, normalize=True)


def _presets() -> dict[str, Preset]:
    m = lambda **kw: ModelParams(**{**_COMMON, **kw})  # noqa: E731
    fig6 = Preset(
        "fig6",
        ScenarioConfig(
            model=m(n_qubits=3, gamma=0.01, gamma_cross=0.001, n_bar=0.5),
            initial_qubits="eee",
            initial_resonator="thermal(0.5)",
        ),
        note="three qubits, thermal resonator and bath at nbar=0.5",
    )
    return {
        "fig1": Preset(
            "fig1",
            ScenarioConfig(model=m(n_qubits=1), initial_qubits="e", measures=("qubit_resonator_tangle", "entropy")),
            "dissipation.kappa",
            DEFAULT_KAPPA_SWEEP,
            "single qubit from |e,0>, resonator loss sweep",
        ),
        "fig2": Preset(
            "fig2",
            ScenarioConfig(model=m(n_qubits=2), initial_qubits="eg"),
            "dissipation.kappa",
            DEFAULT_KAPPA_SWEEP,
            "two qubits from |e,g;0>, resonator loss sweep",
        ),
        "fig3": Preset(
            "fig3",
            ScenarioConfig(
                model=m(n_qubits=2, gamma_cross=0.001, n_bar=0.5),
                initial_qubits=_FIG3_STATE,
                initial_resonator="thermal(0.5)",
            ),
            "dissipation.gamma",
            (0.01, 0.1, 0.7),
            "mixed two-qubit start (a=0.1, b=c=0.45, f=0, renormalized), qubit decay sweep",
        ),
        "fig4": Preset(
            "fig4",
            ScenarioConfig(model=m(n_qubits=2, n_bar=0.5), initial_qubits="ee"),
            "model.chi",
            (30.0, 15.0, 0.01),
            "two qubits from |e,e;0>, lossless, qubit-qubit coupling sweep",
        ),
        "fig5": Preset(
            "fig5",
            ScenarioConfig(model=m(n_qubits=2, gamma=0.01, gamma_cross=0.001), initial_qubits="ee"),
            "dissipation.n_bar",
            (0.01, 0.1, 0.5),
            "two qubits from |e,e;0>, bath occupation sweep",
        ),
        "fig6": fig6,
        "fig7": replace(fig6, name="fig7"),
    }


PRESET_NAMES = tuple(f"fig{i}" for i in range(1, 8))


def preset(name: str) -> Preset:
    table = _presets()
    if name not in table:
        raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESET_NAMES)}")
    return table[name]

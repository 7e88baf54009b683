"""Experiment configuration, orchestration and persistence.

A run is described by a JSON file (schema in the README).  :func:`load_config`
validates it into an :class:`ExperimentConfig`, :func:`run` dispatches on the
experiment kind and writes, into the output directory,

* ``manifest.json``: the normalized config, seed, package versions, artifact list,
* ``result.json``: the numerical record of the run,
* field CSVs (``r,value``) and plot-data CSVs,
* PNG figures of the plot data unless plotting is switched off.

Numbers in CSV files are written with ``repr``, so equal configs give
byte-identical CSVs.  Figures are drawn with matplotlib on the Agg canvas, imported
only when a figure is requested.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import platform
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, CriteriaFailed, InvalidParameter, NoConvergence
from .functional import (
    State,
    SystemParams,
    fiber_coefficients,
    fiber_energy,
    fiber_maximizer,
)
from .grid import RadialGrid, field_to_csv, make_grid

KINDS = ("soliton", "ground", "multi", "sweep", "nonexist", "spectrum", "check")

_TOP_KEYS = {"kind", "problem", "grid", "solver", "seed", "output", "plots"} | set(KINDS)
_PROBLEM_KEYS = ("K", "p", "beta", "rho")
_SECTION_KEYS = {
    "soliton": {"p": float, "N": int, "r_max": float, "tol": float},
    "ground": {},
    "multi": {"m": int, "n_seeds": int, "refine_N": int},
    "sweep": {"betas": list},
    "nonexist": {"n_steps": int, "s_min": float, "N": int},
    "spectrum": {"ell_max": int, "clr_constant": float, "with_multiplier": bool},
    "check": {"m": int, "theta_m": float},
}
_SECTION_DEFAULTS = {
    "soliton": {"N": 8192, "r_max": 20.0, "tol": 1e-8},
    "ground": {},
    "multi": {"m": 2, "n_seeds": 24, "refine_N": 16384},
    "sweep": {},
    "nonexist": {"n_steps": 16, "s_min": 1e-3, "N": 8192},
    "spectrum": {"ell_max": 8, "clr_constant": 1.0, "with_multiplier": False},
    "check": {"m": 1},
}

_PAIR = {"K": 2, "p": 4.0, "rho": [1.0, 1.0]}
# built-in configs used when the CLI gets no --config
EXAMPLES = {
    "soliton": {"kind": "soliton", "soliton": {"p": 4.0}},
    "ground": {"kind": "ground", "problem": dict(_PAIR, beta=[[1.0, 5.0], [5.0, 1.0]])},
    "multi": {"kind": "multi", "problem": dict(_PAIR, beta=[[1.0, 50.0], [50.0, 1.0]]),
              "multi": {"m": 2}},
    "sweep": {"kind": "sweep", "problem": dict(_PAIR, beta=[[1.0, 100.0], [100.0, 1.0]]),
              "sweep": {"betas": [100.0, 316.22776601683796, 1000.0, 3162.2776601683795, 10000.0]}},
    "nonexist": {"kind": "nonexist", "problem": dict(_PAIR, beta=[[1.0, -1.0], [-1.0, 1.0]])},
    "spectrum": {"kind": "spectrum", "problem": {"K": 1, "p": 4.0, "beta": [[1.0]], "rho": [1.0]}},
    "check": {"kind": "check", "problem": dict(_PAIR, beta=[[1.0, 0.5], [0.5, 1.0]])},
}


@dataclass
class ExperimentConfig:
    kind: str
    problem: SystemParams | None
    grid: dict
    solver: dict
    options: dict
    output: Path
    seed: int = 0
    plots: bool = True
    raw: dict = field(default_factory=dict, repr=False)

    def solve_options(self):
        from .solver import SolveOptions

        return SolveOptions(**dict(self.solver, seed=self.seed))

    def make_grid(self) -> RadialGrid | None:
        """The configured grid, or None when r_max is left to the solver."""
        if self.grid.get("r_max") is None:
            return None
        return make_grid(int(self.grid.get("N", 2048)), float(self.grid["r_max"]),
                         self.grid.get("kind", "uniform"))

    def normalized(self) -> dict:
        out = {
            "kind": self.kind,
            "seed": self.seed,
            "output": str(self.output),
            "plots": self.plots,
            "grid": self.grid,
            "solver": self.solver,
            self.kind: self.options,
        }
        if self.problem is not None:
            out["problem"] = self.problem.to_dict()
        return out


# ---------------------------------------------------------------------------
# config parsing


def _line_of(text: str, key: str) -> int | None:
    needle = f'"{key}"'
    for n, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return n
    return None


def _fail(text: str, path: str, message: str):
    key = path.split(".")[-1]
    line = _line_of(text, key) if text else None
    where = f" (line {line})" if line is not None else ""
    raise ConfigError(f"{path}{where}: {message}")


def _number(text, path, value, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(text, path, f"expected a number, got {type(value).__name__}")
    if kind is int:
        if float(value) != int(value):
            _fail(text, path, "expected an integer")
        return int(value)
    if not math.isfinite(value):
        _fail(text, path, "must be finite")
    return float(value)


def _section(text, name, data, schema, defaults):
    if data is None:
        data = {}
    if not isinstance(data, dict):
        _fail(text, name, "expected an object")
    out = dict(defaults)
    for key, value in data.items():
        if key not in schema:
            _fail(text, f"{name}.{key}", f"unknown field (allowed: {', '.join(sorted(schema))})")
        kind = schema[key]
        path = f"{name}.{key}"
        if value is None:
            out[key] = None
        elif kind is bool:
            if not isinstance(value, bool):
                _fail(text, path, "expected true or false")
            out[key] = value
        elif kind is list:
            if not isinstance(value, list) or not value:
                _fail(text, path, "expected a nonempty list")
            out[key] = [_number(text, f"{path}[{i}]", v) for i, v in enumerate(value)]
        elif kind is str:
            if not isinstance(value, str):
                _fail(text, path, "expected a string")
            out[key] = value
        else:
            out[key] = _number(text, path, value, kind)
    return out


def _problem(text, data) -> SystemParams:
    if not isinstance(data, dict):
        _fail(text, "problem", "expected an object")
    for key in _PROBLEM_KEYS:
        if key not in data:
            raise ConfigError(f"missing required field 'problem.{key}'")
    extra = set(data) - set(_PROBLEM_KEYS)
    if extra:
        _fail(text, f"problem.{sorted(extra)[0]}", "unknown field")
    K = _number(text, "problem.K", data["K"], int)
    p = _number(text, "problem.p", data["p"])
    beta, rho = data["beta"], data["rho"]
    if not isinstance(beta, list) or not all(isinstance(row, list) for row in beta):
        _fail(text, "problem.beta", "expected a K x K nested list")
    if not isinstance(rho, list):
        _fail(text, "problem.rho", "expected a list of K masses")
    beta = [[_number(text, "problem.beta", v) for v in row] for row in beta]
    rho = [_number(text, "problem.rho", v) for v in rho]
    try:
        return SystemParams(K, p, beta, rho)
    except (InvalidParameter, ValueError) as exc:
        _fail(text, "problem", str(exc))


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Validate JSON config text; ``overrides`` (kind, seed, output, plots) take precedence."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("the config must be a JSON object")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    for key in data:
        if key not in _TOP_KEYS:
            _fail(text, key, f"unknown field (allowed: {', '.join(sorted(_TOP_KEYS))})")
    if "kind" not in data:
        raise ConfigError("missing required field 'kind'")
    kind = data["kind"]
    if kind not in KINDS:
        _fail(text, "kind", f"must be one of {', '.join(KINDS)}, got {kind!r}")
    options = _section(text, kind, data.get(kind), _SECTION_KEYS[kind], _SECTION_DEFAULTS[kind])

    problem = None
    if kind == "soliton":
        if "problem" in data:
            problem = _problem(text, data["problem"])
            options.setdefault("p", problem.p)
        if options.get("p") is None:
            raise ConfigError("missing required field 'soliton.p' (or 'problem')")
    else:
        if "problem" not in data:
            raise ConfigError("missing required field 'problem'")
        problem = _problem(text, data["problem"])
    if kind == "sweep" and "betas" not in options:
        raise ConfigError("missing required field 'sweep.betas'")
    if kind == "check" and options["m"] > 1 and options.get("theta_m") is None:
        raise ConfigError("check.theta_m is required when check.m > 1")

    grid = _section(text, "grid", data.get("grid"), {"N": int, "r_max": float, "kind": str},
                    {"N": 2048, "r_max": None, "kind": "uniform"})
    if grid["kind"] not in ("uniform", "graded"):
        _fail(text, "grid.kind", "must be 'uniform' or 'graded'")
    from .solver import SolveOptions

    schema = {f.name: type(f.default) for f in fields(SolveOptions) if f.name != "seed"}
    solver = _section(text, "solver", data.get("solver"), schema, {})
    seed = _number(text, "seed", data.get("seed", 0), int)
    plots = data.get("plots", True)
    if not isinstance(plots, bool):
        _fail(text, "plots", "expected true or false")
    output = data.get("output", f"runs/{kind}")
    if not isinstance(output, (str, os.PathLike)):
        _fail(text, "output", "expected a path string")
    cfg = ExperimentConfig(kind, problem, grid, solver, options, Path(output), seed, plots, data)
    try:
        cfg.solve_options()
    except InvalidParameter as exc:
        raise ConfigError(f"solver: {exc}") from exc
    return cfg


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text, overrides)


# ---------------------------------------------------------------------------
# artifacts


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


class ArtifactWriter:
    """Single writer for one output directory; every file goes through :meth:`text`."""

    def __init__(self, out: Path):
        self.out = Path(out)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"output directory {out} is not writable: {exc.strerror}") from exc
        if not os.access(self.out, os.W_OK):
            raise ConfigError(f"output directory {out} is not writable")
        self.files: list = []

    def text(self, name: str, content: str) -> Path:
        path = self.out / name
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(content)
        os.replace(tmp, path)
        self.files.append(name)
        return path

    def json(self, name: str, obj) -> Path:
        return self.text(name, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")

    def csv(self, name: str, header, rows) -> Path:
        return self.text(name, _csv_text(header, rows))

    def figure(self, name: str, fig) -> Path:
        path = self.out / name
        fig.savefig(path, dpi=120, metadata={"Software": None})
        self.files.append(name)
        return path


def _versions() -> dict:
    import scipy

    return {
        "artifact": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _state_csvs(writer: ArtifactWriter, state: State, prefix: str = "") -> None:
    for i, comp in enumerate(state.components):
        writer.text(f"{prefix}u_{i}.csv", field_to_csv(comp))
    header = ["r"] + [f"u_{i}" for i in range(state.K)]
    rows = np.column_stack([state.grid.nodes, state.values.T])
    writer.csv(f"{prefix}profiles.csv", header, rows.tolist())


def _fiber_samples(state: State, params: SystemParams, n: int = 201):
    c = fiber_coefficients(state, params)
    su = fiber_maximizer(c, params)
    s = np.geomspace(su / 4, su * 4, n)
    return su, [(float(x), fiber_energy(c, float(x), params)) for x in s]


# ---------------------------------------------------------------------------
# figures (matplotlib is imported here only)


def _new_figure(xlabel: str, ylabel: str):
    from matplotlib.backends.backend_agg import FigureCanvasAgg
    from matplotlib.figure import Figure

    fig = Figure(figsize=(5.0, 3.6), tight_layout=True)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    return fig, ax


def plot_profiles(writer, name, r, values, title=""):
    fig, ax = _new_figure("r", "u_i(r)")
    for i, v in enumerate(np.atleast_2d(values)):
        ax.plot(r, v, label=f"u_{i}")
    ax.legend()
    ax.set_title(title)
    writer.figure(name, fig)


def plot_fiber(writer, name, samples, su):
    fig, ax = _new_figure("s", "J(s * u)")
    s, phi = zip(*samples)
    ax.semilogx(s, phi)
    ax.axvline(su, color="k", lw=0.8, ls="--")
    writer.figure(name, fig)


def plot_history(writer, name, history):
    fig, ax = _new_figure("iteration", "reduced energy")
    ax.plot(np.arange(len(history)), history)
    writer.figure(name, fig)


def plot_sweep(writer, name, betas, energies, slope):
    fig, ax = _new_figure("beta", "c_1(beta)")
    ax.loglog(betas, energies, "o-")
    ax.set_title(f"fitted slope {slope:.3f}")
    writer.figure(name, fig)


def plot_nonexistence(writer, name, s, energies, c1):
    fig, ax = _new_figure("s_n", "J(s_u * u^n)")
    ax.semilogx(s, energies, "o-")
    ax.axhline(c1, color="k", lw=0.8, ls="--")
    writer.figure(name, fig)


def plot_spectrum(writer, name, counts):
    fig, ax = _new_figure("l", "negative eigenvalues")
    for i, row in enumerate(counts):
        ax.plot(np.arange(len(row)), row, "o-", label=f"component {i}")
    ax.legend()
    writer.figure(name, fig)


# ---------------------------------------------------------------------------
# pipelines; each returns (result dict, status, message)


def _run_soliton(cfg, writer):
    from .soliton import gn_constant, solve_kwong, theta_1

    opts = cfg.options
    p = float(opts["p"])
    sol = solve_kwong(p, make_grid(int(opts["N"]), float(opts["r_max"])), float(opts["tol"]))
    writer.text("soliton.csv", field_to_csv(sol.w))
    C = gn_constant(p, sol)
    result = dict(sol.metadata(), nehari_residual=sol.nehari_residual,
                  pohozaev_residual=sol.pohozaev_residual, ode_residual=sol.ode_residual(),
                  C_p=C, theta_1=theta_1(p, C))
    writer.text("soliton.json", sol.metadata_json() + "\n")
    if cfg.plots:
        plot_profiles(writer, "soliton.png", sol.w.grid.nodes, sol.w.values, f"p = {p:g}")
    return result, 0, "ok"


def _solve_ground(cfg):
    from .solver import gaussian_init, minimize_on_SM, suggest_grid

    params = cfg.problem
    grid = cfg.make_grid() or suggest_grid(params, int(cfg.grid["N"]))
    return minimize_on_SM(params, gaussian_init(params, grid, cfg.seed), cfg.solve_options())


def _decoupled(params):
    from .soliton import decoupled_levels

    try:
        return [float(x) for x in decoupled_levels(params)]
    except (InvalidParameter, NoConvergence):
        return None


def _run_ground(cfg, writer):
    params = cfg.problem
    rep = _solve_ground(cfg)
    c = fiber_coefficients(rep.state, params)
    levels = _decoupled(params)
    result = dict(rep.summary(), fiber={"A": c.A, "B": c.B}, decoupled_levels=levels,
                  below_decoupled=None if levels is None else bool(rep.energy < min(levels)))
    _state_csvs(writer, rep.state)
    su, samples = _fiber_samples(rep.state, params)
    writer.csv("fiber.csv", ["s", "phi"], samples)
    writer.csv("history.csv", ["iteration", "reduced_energy"], list(enumerate(rep.history)))
    if cfg.plots:
        plot_profiles(writer, "profiles.png", rep.state.grid.nodes, rep.state.values,
                      f"J = {rep.energy:.6g}")
        plot_fiber(writer, "fiber.png", samples, su)
        if rep.history:
            plot_history(writer, "history.png", rep.history)
    status = 0 if rep.converged else NoConvergence.exit_code
    return result, status, rep.message


def _run_multi(cfg, writer):
    from .solver import multi_level_search

    opts = cfg.options
    search = multi_level_search(cfg.problem, int(opts["m"]), cfg.solve_options(), cfg.make_grid(),
                                int(opts["n_seeds"]), int(opts["refine_N"]))
    rows, levels = [], []
    for k, rep in enumerate(search):
        _state_csvs(writer, rep.state, f"level_{k}_")
        rows.append([k, rep.energy, rep.m_residual, rep.el_res, int(rep.converged)])
        levels.append(rep.summary())
    writer.csv("levels.csv", ["level", "energy", "m_residual", "el_residual", "converged"], rows)
    if cfg.plots:
        for k, rep in enumerate(search):
            plot_profiles(writer, f"level_{k}_profiles.png", rep.state.grid.nodes, rep.state.values,
                          f"level {k}: J = {rep.energy:.6g}")
    result = {"levels": levels, "requested": search.requested, "found": len(search),
              "shortfall": search.shortfall, "attempts": search.attempts,
              "decoupled_levels": _decoupled(cfg.problem)}
    msg = "shortfall: fewer distinct orbits than requested" if search.shortfall else "ok"
    return result, 0, msg


def _run_sweep(cfg, writer):
    from .solver import beta_sweep_c1

    table = beta_sweep_c1(cfg.problem, cfg.options["betas"], cfg.solve_options(),
                          int(cfg.grid["N"]))
    writer.text("sweep.csv", table.to_csv())
    rows = [asdict(r) for r in table.rows]
    result = {"rows": rows, "slope": table.slope()}
    valid = table.valid()
    if cfg.plots and valid:
        plot_sweep(writer, "sweep.png", [r.beta for r in valid], [r.energy for r in valid],
                   table.slope())
    ok = all(r.converged for r in table.rows)
    return result, 0 if ok else NoConvergence.exit_code, "ok" if ok else "some rows did not converge"


def _run_nonexist(cfg, writer):
    from .solver import nonexistence_demo

    opts = cfg.options
    table = nonexistence_demo(cfg.problem, int(opts["n_steps"]), cfg.solve_options(),
                              float(opts["s_min"]), int(opts["N"]))
    writer.text("nonexistence.csv", table.to_csv())
    pos = [r for r in table.rows if r.positive]
    result = {"c1": table.c1, "slot": table.slot, "rows": [asdict(r) for r in table.rows],
              "all_above_c1": all(r.energy > table.c1 for r in pos)}
    if cfg.plots and pos:
        plot_nonexistence(writer, "nonexistence.png", [r.s_n for r in pos],
                          [r.energy for r in pos], table.c1)
    return result, 0, "ok"


def _run_spectrum(cfg, writer):
    from .spectral import count_negative_eigenvalues, morse_index_component, morse_potential

    params = cfg.problem
    opts = cfg.options
    rep = _solve_ground(cfg)
    if not rep.converged:
        raise NoConvergence(f"ground state did not converge ({rep.message})")
    reports, rows, counts = [], [], []
    for i in range(params.K):
        W = morse_potential(rep.state, i, params)
        sr = count_negative_eigenvalues(W, int(opts["ell_max"]), float(opts["clr_constant"]))
        morse = morse_index_component(rep.state, i, params, with_multiplier=opts["with_multiplier"])
        reports.append(dict(sr.to_dict(), component=i, morse_index=morse))
        counts.append(list(sr.counts_by_ell))
        rows.extend([i, ell, c] for ell, c in enumerate(sr.counts_by_ell))
    writer.csv("spectrum.csv", ["component", "ell", "count"], rows)
    _state_csvs(writer, rep.state)
    if cfg.plots:
        plot_spectrum(writer, "spectrum.png", counts)
    return {"ground": rep.summary(), "components": reports}, 0, "ok"


def _run_check(cfg, writer):
    from . import conditions as cond
    from .soliton import default_soliton_grid, gn_constant, solve_kwong, theta_1

    params = cfg.problem
    opts = cfg.options
    out = {"betacond": cond.check_betacond(params).to_dict()}
    off = params.beta[~np.eye(params.K, dtype=bool)]
    if np.all(off == off[0]):
        try:
            out["threshold"] = cond.coupling_threshold(params)
        except InvalidParameter as exc:
            out["threshold"] = None
            out["threshold_note"] = str(exc)
    try:
        C = gn_constant(params.p, solve_kwong(params.p, default_soliton_grid()))
        theta = theta_1(params.p, C) if opts["m"] == 1 else float(opts["theta_m"])
        out["level_condition"] = cond.check_c0_condition(params, int(opts["m"]), theta, C).to_dict()
        out["C_p"] = C
    except InvalidParameter as exc:
        out["level_condition_note"] = str(exc)
    diag = np.diag(params.beta)
    if 4.0 <= params.p <= 14.0 / 3.0 and np.all(off == off[0]) and params.K >= 2:
        if np.all(params.rho == params.rho[0]):
            out["uniform"] = cond.check_uniform_special(params.K, params.p, diag, float(off[0])).to_dict()
    rows = []
    for name in ("betacond", "level_condition", "uniform"):
        if name in out:
            r = out[name]
            rows.append([name, r["lhs"], r["rhs"], r["margin"], int(r["satisfied"]),
                         " ".join(str(i) for i in r["witness_subset"])])
    writer.csv("conditions.csv", ["condition", "lhs", "rhs", "margin", "satisfied", "witness"], rows)
    lines = [f"{'condition':<16}{'lhs':>22}{'rhs':>22}{'margin':>22}  witness"]
    for name, lhs, rhs, margin, sat, wit in rows:
        lines.append(f"{name:<16}{lhs:>22.15g}{rhs:>22.15g}{margin:>22.15g}  {{{wit}}}"
                     + ("" if sat else "  (fails)"))
    if out.get("threshold") is not None:
        lines.append(f"coupling threshold beta* = {out['threshold']:.15g}")
    out["table"] = "\n".join(lines)
    return out, 0, "ok"


_PIPELINES = {
    "soliton": _run_soliton,
    "ground": _run_ground,
    "multi": _run_multi,
    "sweep": _run_sweep,
    "nonexist": _run_nonexist,
    "spectrum": _run_spectrum,
    "check": _run_check,
}


@dataclass
class RunResult:
    status: int
    message: str
    result: dict
    out: Path
    files: list


def run(cfg: ExperimentConfig) -> RunResult:
    """Execute one experiment and write its artifacts; module errors propagate."""
    writer = ArtifactWriter(cfg.output)
    result, status, message = _PIPELINES[cfg.kind](cfg, writer)
    writer.json("result.json", {"kind": cfg.kind, "status": status, "message": message,
                                "result": result})
    manifest = {"config": cfg.normalized(), "seed": cfg.seed, "versions": _versions(),
                "artifacts": sorted(writer.files + ["manifest.json"])}
    writer.json("manifest.json", manifest)
    return RunResult(status, message, result, writer.out, list(writer.files))


# ---------------------------------------------------------------------------
# acceptance suite


def reproduce_all(suite: str = "quick", out: str | Path | None = None, ids=None, frozen=None,
                  echo=print) -> list:
    """Run the acceptance criteria of ``suite``; writes acceptance.csv/json when ``out`` is given.

    Raises CriteriaFailed (after writing the table) if any criterion fails.
    """
    from . import acceptance

    if ids is None:
        if suite not in ("quick", "full"):
            raise InvalidParameter(f"suite must be 'quick' or 'full', got {suite!r}")
        ids = acceptance.QUICK if suite == "quick" else acceptance.FULL
    bad = [i for i in ids if i not in acceptance.CRITERIA]
    if bad:
        raise InvalidParameter(f"unknown criterion ids {bad}")
    results = []
    for cid in ids:
        res = acceptance.run_criteria([cid], acceptance.FROZEN if frozen is None else frozen)[0]
        if echo is not None:
            echo(res.line())
        results.append(res)
    if out is not None:
        writer = ArtifactWriter(Path(out))
        writer.csv("acceptance.csv", ["criterion", "name", "passed", "seconds", "limit_seconds"],
                   [[r.cid, r.name, int(r.passed), round(r.seconds, 3), r.limit_seconds]
                    for r in results])
        writer.json("acceptance.json", [asdict(r) for r in results])
        writer.json("manifest.json", {"suite": suite, "criteria": list(ids), "versions": _versions(),
                                      "artifacts": sorted(writer.files + ["manifest.json"])})
    failed = [r.cid for r in results if not r.passed]
    if failed:
        raise CriteriaFailed(f"failed criteria: {', '.join(map(str, failed))}")
    return results


__all__ = [
    "ArtifactWriter",
    "ExperimentConfig",
    "KINDS",
    "RunResult",
    "load_config",
    "parse_config",
    "reproduce_all",
    "run",
]

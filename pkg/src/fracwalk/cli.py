"""Config-driven command line: solve / simulate / compare / diffusion / aggregate.

Every command reads one JSON config, writes delimiter-separated artifacts
under an output prefix, and is fully deterministic: identical config bytes
produce identical output bytes regardless of thread count.  Each artifact
carries the package version and the SHA-256 digest of the config that
produced it (a comment line in CSV files, fields in JSON reports).
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path
from typing import Callable

import click
import numpy as np

from . import __version__
from .diffusion import (
    Boundary,
    LatticeSpec,
    aggregation_diagnostic,
    scaling_limit_experiment,
    solve_vo_heat_backward,
    solve_vo_heat_forward,
)
from .laplace import InversionConfig, solve_laplace
from .montecarlo import RngSpec, empirical_transition, occupation_at, simulate_paths
from .process import SemiMarkovModel, TransitionGrid, model_from_dict
from .solvers import (
    DiscretizationConfig,
    solve_backward_caputo,
    solve_backward_volterra,
    solve_forward_rl,
    solve_forward_volterra,
    solve_renewal,
)

_SOLVERS: dict[str, Callable] = {
    "renewal": solve_renewal,
    "backward_caputo": solve_backward_caputo,
    "forward_rl": solve_forward_rl,
    "backward_volterra": solve_backward_volterra,
    "forward_volterra": solve_forward_volterra,
}


def _load_config(path: str) -> tuple[dict, str]:
    raw = Path(path).read_bytes()
    return json.loads(raw), hashlib.sha256(raw).hexdigest()


def _header(digest: str) -> str:
    return f"# fracwalk {__version__} config-sha256={digest}\n"


def _write_grid(path: Path, grid: TransitionGrid, digest: str) -> None:
    with open(path, "w") as fh:
        fh.write(_header(digest))
        fh.write("t,i,j,p\n")
        n = grid.values.shape[1]
        for m, t in enumerate(grid.t_grid):
            for i in range(n):
                for j in range(n):
                    fh.write(f"{t:.17g},{i},{j},{grid.values[m, i, j]:.17g}\n")


def _write_json(path: Path, payload: dict, digest: str) -> None:
    payload = {"artifact_version": __version__, "config_digest": digest, **payload}
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _model(cfg: dict) -> SemiMarkovModel:
    return model_from_dict(cfg["model"])


def _disc(cfg: dict) -> DiscretizationConfig:
    kwargs = {k: cfg[k] for k in ("forward_substeps", "refine_cells", "refine_points") if k in cfg}
    return DiscretizationConfig(dt=float(cfg["dt"]), n_steps=int(cfg["n_steps"]), **kwargs)


def _solve_one(method: str, model: SemiMarkovModel, cfg: dict) -> TransitionGrid:
    disc = _disc(cfg)
    if method == "laplace":
        stride = int(cfg.get("laplace_stride", 100))
        return solve_laplace(model, disc.t_grid()[::stride], InversionConfig())
    if method not in _SOLVERS:
        raise click.ClickException(f"unknown solver {method!r}; options: {sorted(_SOLVERS) + ['laplace']}")
    return _SOLVERS[method](model, disc)


def _lattice(cfg: dict) -> LatticeSpec:
    doc = cfg["lattice"]

    def profile(spec: dict) -> Callable[[float], float]:
        kind = spec.get("kind", "constant")
        if kind == "constant":
            v = float(spec["value"])
            return lambda x: v
        if kind == "two_region":
            left, right = float(spec["left"]), float(spec["right"])
            interface = float(spec.get("interface", 0.0))
            return lambda x: left if x < interface else right
        raise click.ClickException(f"unknown profile kind {kind!r}")

    k_fn = profile(doc["k"]) if "k" in doc else (lambda x: 1.0)
    return LatticeSpec(
        x_min=float(doc["x_min"]),
        x_max=float(doc["x_max"]),
        epsilon=float(doc["epsilon"]),
        alpha_fn=profile(doc["alpha"]),
        k_fn=k_fn,
        boundary=Boundary(doc.get("boundary", "Reflecting")),
    )


def _common(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="JSON config file")(fn)
    fn = click.option("--out", "out_prefix", default="out", help="output path prefix")(fn)
    fn = click.option("--threads", default=1, type=int, help="worker threads (speed only, never results)")(fn)
    return fn


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Semi-Markov CTRW experiments: solvers, samplers, scaling limits."""


@main.command()
@_common
def solve(config_path: str, out_prefix: str, threads: int) -> None:
    """Solve a model's transition probabilities with one method."""
    cfg, digest = _load_config(config_path)
    grid = _solve_one(cfg.get("solver", "backward_caputo"), _model(cfg), cfg)
    out = Path(f"{out_prefix}_grid.csv")
    _write_grid(out, grid, digest)
    click.echo(f"wrote {out} ({grid.provenance.value}, {len(grid.t_grid)} times)")


@main.command()
@_common
def simulate(config_path: str, out_prefix: str, threads: int) -> None:
    """Simulate paths; dump trajectories and occupation tables."""
    cfg, digest = _load_config(config_path)
    model = _model(cfg)
    rng = RngSpec(int(cfg.get("seed", 0)), int(cfg.get("stream_id", 0)))
    t_max = float(cfg["t_max"])
    n_paths = int(cfg["n_paths"])
    start = int(cfg.get("start", 0))
    n_dump = min(n_paths, int(cfg.get("dump_paths", 100)))
    paths = simulate_paths(model, t_max, n_dump, rng, start=start, time_changed=bool(cfg.get("time_changed", False)))
    paths_file = Path(f"{out_prefix}_paths.csv")
    with open(paths_file, "w") as fh:
        fh.write(_header(digest))
        fh.write("path_id,n,state,T_n,J_n\n")
        for pid, p in enumerate(paths):
            holds = list(p.holding_times) + [float("nan")]
            for k, (s, t, j) in enumerate(zip(p.states, p.jump_times, holds)):
                fh.write(f"{pid},{k},{s},{t:.17g},{j:.17g}\n")
    t_evals = [float(t) for t in cfg.get("t_evals", [t_max])]
    counts = occupation_at(model, t_evals, n_paths, rng, start=start)
    hist_file = Path(f"{out_prefix}_occupation.csv")
    with open(hist_file, "w") as fh:
        fh.write(_header(digest))
        fh.write("t,j,estimate,std_error\n")
        for m, t in enumerate(t_evals):
            est = counts[m] / n_paths
            se = np.sqrt(est * (1 - est) / n_paths)
            for j in range(model.n_states):
                fh.write(f"{t:.17g},{j},{est[j]:.17g},{se[j]:.17g}\n")
    click.echo(f"wrote {paths_file} and {hist_file}")


@main.command()
@_common
def compare(config_path: str, out_prefix: str, threads: int) -> None:
    """Solve with several methods and report pairwise sup-norm distances.

    Exits nonzero if any pair exceeds its tolerance.
    """
    cfg, digest = _load_config(config_path)
    model = _model(cfg)
    methods = cfg.get("methods", ["backward_caputo", "laplace"])
    if len(methods) < 2:
        raise click.ClickException("compare needs at least two methods")
    tol = float(cfg.get("tolerance", 1e-2))
    disc = _disc(cfg)
    stride = int(cfg.get("laplace_stride", 100))

    grids: dict[str, TransitionGrid] = {}
    mc: dict | None = None
    for method in methods:
        if method == "monte_carlo":
            rng = RngSpec(int(cfg.get("seed", 0)), int(cfg.get("stream_id", 0)))
            n_paths = int(cfg.get("n_paths", 100000))
            t_evals = disc.t_grid()[::stride]
            t_evals = t_evals[t_evals > 0]
            counts = occupation_at(model, t_evals, n_paths, rng, start=int(cfg.get("start", 0)))
            est = counts / n_paths
            mc = {"t": t_evals, "est": est, "se": np.sqrt(est * (1 - est) / n_paths)}
        else:
            grids[method] = _solve_one(method, model, cfg)
            _write_grid(Path(f"{out_prefix}_{method}.csv"), grids[method], digest)

    start = int(cfg.get("start", 0))
    pairs = []
    ok_all = True
    names = list(grids)
    for a_i in range(len(names)):
        for b_i in range(a_i + 1, len(names)):
            a, b = names[a_i], names[b_i]
            ga, gb = grids[a], grids[b]
            common = np.intersect1d(np.round(ga.t_grid, 12), np.round(gb.t_grid, 12))
            ia = np.searchsorted(np.round(ga.t_grid, 12), common)
            ib = np.searchsorted(np.round(gb.t_grid, 12), common)
            dist = float(np.abs(ga.values[ia] - gb.values[ib]).max())
            ok = dist <= tol
            ok_all &= ok
            pairs.append({"pair": [a, b], "sup_distance": dist, "tolerance": tol, "pass": ok})
    if mc is not None:
        for name, g in grids.items():
            idx = np.searchsorted(np.round(g.t_grid, 12), np.round(mc["t"], 12))
            dev = np.abs(mc["est"] - g.values[idx, start, :])
            bound = np.maximum(4 * mc["se"], tol)
            dist = float(dev.max())
            ok = bool((dev <= bound).all())
            ok_all &= ok
            pairs.append({"pair": ["monte_carlo", name], "sup_distance": dist, "tolerance": f"max(4*se, {tol})", "pass": ok})
    report = Path(f"{out_prefix}_compare.json")
    _write_json(report, {"pairs": pairs, "all_pass": bool(ok_all)}, digest)
    for p in pairs:
        click.echo(f"{p['pair'][0]} vs {p['pair'][1]}: {p['sup_distance']:.3e} ({'pass' if p['pass'] else 'FAIL'})")
    click.echo(f"wrote {report}")
    if not ok_all:
        failing = [p for p in pairs if not p["pass"]]
        raise click.ClickException("tolerance exceeded for: " + ", ".join(str(p["pair"]) for p in failing))


@main.command()
@_common
def diffusion(config_path: str, out_prefix: str, threads: int) -> None:
    """Variable-order heat solves or the Monte Carlo convergence experiment."""
    cfg, digest = _load_config(config_path)
    mode = cfg.get("mode", "forward")
    if mode == "convergence":
        lat = cfg["lattice"]

        def profile(spec):
            if spec.get("kind", "constant") == "constant":
                v = float(spec["value"])
                return lambda x: v
            left, right, itf = float(spec["left"]), float(spec["right"]), float(spec.get("interface", 0.0))
            return lambda x: left if x < itf else right

        report = scaling_limit_experiment(
            profile(lat["alpha"]),
            profile(lat["k"]) if "k" in lat else (lambda x: 1.0),
            [float(e) for e in cfg["eps_list"]],
            float(cfg["t_eval"]),
            int(cfg["n_paths"]),
            RngSpec(int(cfg.get("seed", 0)), int(cfg.get("stream_id", 0))),
            x_min=float(lat["x_min"]),
            x_max=float(lat["x_max"]),
            dt=float(cfg.get("dt", 2e-3)),
        )
        out = Path(f"{out_prefix}_convergence.json")
        _write_json(out, {"t_eval": report.t_eval, "entries": report.to_dicts()}, digest)
        for e in report.entries:
            click.echo(f"eps={e.epsilon}: L1={e.l1_distance:.4f} (mc_se={e.mc_se:.4f})")
        click.echo(f"wrote {out}")
        return
    spec = _lattice(cfg)
    t_grid = [float(t) for t in cfg["t_grid"]]
    dt = float(cfg["dt"])
    if mode == "forward":
        grid = solve_vo_heat_forward(spec, float(cfg.get("source", 0.0)), t_grid, dt, substeps=int(cfg.get("substeps", 1)))
    elif mode == "backward":
        grid = solve_vo_heat_backward(spec, float(cfg.get("target", 0.0)), t_grid, dt)
    else:
        raise click.ClickException(f"unknown mode {mode!r}")
    out = Path(f"{out_prefix}_density.csv")
    with open(out, "w") as fh:
        fh.write(_header(digest))
        fh.write("t,y,p\n")
        for m, t in enumerate(grid.t_grid):
            for j, y in enumerate(grid.x):
                fh.write(f"{t:.17g},{y:.17g},{grid.values[m, j]:.17g}\n")
    click.echo(f"wrote {out}")


@main.command()
@_common
def aggregate(config_path: str, out_prefix: str, threads: int) -> None:
    """Mass-in-region time series for a forward heat solution."""
    cfg, digest = _load_config(config_path)
    spec = _lattice(cfg)
    t_grid = [float(t) for t in cfg["t_grid"]]
    grid = solve_vo_heat_forward(spec, float(cfg.get("source", 0.0)), t_grid, float(cfg["dt"]))
    lo, hi = (float(v) for v in cfg["region"])
    masses = aggregation_diagnostic(grid, (lo, hi))
    out = Path(f"{out_prefix}_aggregate.csv")
    with open(out, "w") as fh:
        fh.write(_header(digest))
        fh.write("t,mass\n")
        for t, m in zip(grid.t_grid, masses):
            fh.write(f"{t:.17g},{m:.17g}\n")
    click.echo(f"wrote {out}")


if __name__ == "__main__":
    sys.exit(main())

"""Config-driven experiment runner with reproducible CSV outputs.

Each subcommand reads one JSON config, validates it fully before any
computation, runs the corresponding pipeline, and writes bit-exact CSV
files plus a manifest sidecar carrying the config hash, the seeds used,
and per-stage wall times.  Reruns with the same config and seeds produce
byte-identical CSV bodies regardless of the thread count.
"""

import hashlib
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__
from .core import Alphabet, MarkovMeasure, format_float, markov_from_json
from .entropy import finite_horizon_entropy_curve, write_entropy_curve_csv
from .errors import ConfigError, LdbayesError
from .gibbs import FiniteRangePotential, GibbsModel, build_gibbs_model
from .hypermix import hypermixing_profile, write_profile_csv
from .posterior import (
    LossSpec,
    ThetaGrid,
    check_loss_assumption,
    consistency_curve,
    log_partition_curve,
    log_partition_dp,
    theta_neighborhood,
    write_posterior_csv,
)
from .posterior import _posterior_from_ell
from .simulate import (
    LangevinSpec,
    ObservedSystemSpec,
    generate_observation,
    sample_langevin,
    write_langevin_csv,
    write_path_text,
)
from .variational import (
    compare_dp_vs_variational,
    solve_V,
    theta_min,
    write_variational_csv,
)

EXPERIMENTS = (
    "pressure",
    "entropy-rate",
    "partition",
    "posterior",
    "variational",
    "hypermix",
    "simulate",
    "consistency",
)



def config_hash(cfg: dict) -> str:
    canonical = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def _need(doc: dict, key: str, path: str):
    if key not in doc:
        raise ConfigError(f"{path}.{key}" if path else key, "missing required field")
    return doc[key]


def _alphabet(labels, path: str) -> Alphabet:
    if not isinstance(labels, list) or not labels:
        raise ConfigError(path, "expected a nonempty list of symbol labels")
    try:
        return Alphabet(tuple(str(s) for s in labels))
    except (ValueError, LdbayesError) as exc:
        raise ConfigError(path, str(exc)) from exc


def _theta_points(doc, path: str) -> np.ndarray:
    if isinstance(doc, list):
        return np.asarray(doc, dtype=float)
    if isinstance(doc, dict):
        start = _need(doc, "start", path)
        stop = _need(doc, "stop", path)
        count = _need(doc, "count", path)
        if int(count) < 1:
            raise ConfigError(f"{path}.count", "must be a positive integer")
        return np.linspace(float(start), float(stop), int(count))
    raise ConfigError(path, "expected a list of points or {start, stop, count}")


def parse_grid(points: np.ndarray, cfg: dict) -> ThetaGrid:
    prior = cfg.get("prior")
    if prior is None:
        return ThetaGrid.uniform(points)
    prior = np.asarray(prior, dtype=float)
    try:
        return ThetaGrid(points, prior)
    except (ValueError, LdbayesError) as exc:
        raise ConfigError("grid.prior", str(exc)) from exc


def parse_family(cfg: dict):
    """Build (models, grid, s_alphabet) from the family section."""
    fam = _need(cfg, "family", "")
    kind = _need(fam, "kind", "family")
    if kind == "scaled-potential":
        alphabet = _alphabet(_need(fam, "alphabet", "family"), "family.alphabet")
        r = int(_need(fam, "range", "family"))
        shape = np.asarray(_need(fam, "shape", "family"), dtype=float)
        points = _theta_points(_need(fam, "thetas", "family"), "family.thetas")
        depth = int(fam.get("certify_depth", 8))
        try:
            models = [
                build_gibbs_model(FiniteRangePotential(alphabet, r, th * shape), depth)
                for th in points
            ]
        except (ValueError, LdbayesError) as exc:
            raise ConfigError("family.shape", str(exc)) from exc
        return models, parse_grid(points, fam), alphabet
    if kind == "delta":
        alphabet = _alphabet(_need(fam, "alphabet", "family"), "family.alphabet")
        points = np.arange(alphabet.size, dtype=float)
        models = []
        for i in range(alphabet.size):
            probs = np.zeros(alphabet.size)
            probs[i] = 1.0
            models.append(MarkovMeasure.iid(alphabet, probs))
        return models, parse_grid(points, fam), alphabet
    if kind == "markov-list":
        docs = _need(fam, "models", "family")
        if not isinstance(docs, list) or not docs:
            raise ConfigError("family.models", "expected a nonempty list of model documents")
        try:
            models = [markov_from_json(doc) for doc in docs]
        except (KeyError, ValueError, LdbayesError) as exc:
            raise ConfigError("family.models", str(exc)) from exc
        alphabet = models[0].alphabet
        if any(m.alphabet != alphabet for m in models):
            raise ConfigError("family.models", "all models must share one alphabet")
        points = _theta_points(
            fam.get("thetas", list(range(len(models)))), "family.thetas"
        )
        if points.shape != (len(models),):
            raise ConfigError("family.thetas", "grid size must match the model count")
        return models, parse_grid(points, fam), alphabet
    raise ConfigError("family.kind", f"unknown family kind {kind!r}")


def parse_source(doc: dict, path: str):
    kind = _need(doc, "kind", path)
    if kind == "markov":
        try:
            return markov_from_json(doc)
        except (KeyError, ValueError, LdbayesError) as exc:
            raise ConfigError(path, str(exc)) from exc
    if kind == "gibbs":
        alphabet = _alphabet(_need(doc, "alphabet", path), f"{path}.alphabet")
        r = int(_need(doc, "range", path))
        if "table" in doc:
            table = np.asarray(doc["table"], dtype=float)
        else:
            table = float(_need(doc, "theta", path)) * np.asarray(
                _need(doc, "shape", path), dtype=float
            )
        try:
            return build_gibbs_model(
                FiniteRangePotential(alphabet, r, table), int(doc.get("certify_depth", 8))
            )
        except (ValueError, LdbayesError) as exc:
            raise ConfigError(path, str(exc)) from exc
    raise ConfigError(f"{path}.kind", f"unknown source kind {kind!r}")


def parse_observation(cfg: dict) -> ObservedSystemSpec:
    obs = _need(cfg, "observation", "")
    source = parse_source(_need(obs, "source", "observation"), "observation.source")
    channel = obs.get("channel")
    obs_alphabet = None
    if "alphabet" in obs:
        obs_alphabet = _alphabet(obs["alphabet"], "observation.alphabet")
    if channel is not None:
        channel = np.asarray(channel, dtype=float)
    try:
        return ObservedSystemSpec(source, obs_alphabet, channel)
    except (ValueError, LdbayesError) as exc:
        raise ConfigError("observation.channel", str(exc)) from exc


def parse_loss(cfg: dict, s_alphabet: Alphabet, a_alphabet: Alphabet) -> LossSpec:
    doc = _need(cfg, "loss", "")
    r = int(_need(doc, "range", "loss"))
    table = np.asarray(_need(doc, "table", "loss"), dtype=float)
    expected = (s_alphabet.size**r, a_alphabet.size**r)
    if table.ndim == 1 and table.size == expected[0] * expected[1]:
        table = table.reshape(expected)
    modulus = None
    if "modulus_lipschitz" in doc:
        slope = float(doc["modulus_lipschitz"])
        if slope < 0:
            raise ConfigError("loss.modulus_lipschitz", "must be nonnegative")
        modulus = lambda d: slope * d  # noqa: E731
    try:
        return LossSpec(s_alphabet, a_alphabet, r, table, modulus)
    except (ValueError, LdbayesError) as exc:
        raise ConfigError("loss.table", str(exc)) from exc


def _t_values(cfg: dict) -> list:
    values = _need(cfg, "t_values", "")
    if not isinstance(values, list) or not values:
        raise ConfigError("t_values", "expected a nonempty increasing list")
    out = [int(v) for v in values]
    if any(b <= a for a, b in zip(out, out[1:])) or out[0] < 1:
        raise ConfigError("t_values", "must be strictly increasing positive integers")
    return out


def _y_seeds(cfg: dict, base_seed: int) -> list:
    if "y_seeds" in cfg:
        seeds = cfg["y_seeds"]
        if not isinstance(seeds, list) or not seeds:
            raise ConfigError("y_seeds", "expected a nonempty list of integers")
        return [int(s) for s in seeds]
    return [base_seed + i for i in range(int(cfg.get("n_y_seeds", 3)))]


REQUIRED_SECTIONS = {
    "pressure": ("family",),
    "entropy-rate": ("eta", "mu", "t_values"),
    "partition": ("family", "observation", "loss", "t_values"),
    "posterior": ("family", "observation", "loss", "t"),
    "variational": ("family", "observation", "loss", "t", "m"),
    "hypermix": ("cls",),
    "simulate": ("samples",),
    "consistency": ("family", "observation", "loss", "t_values", "m"),
}


def validate_config(kind: str, cfg: dict) -> list:
    """All invariant violations in one pass; empty list means runnable."""
    diags = []
    if kind not in EXPERIMENTS:
        return [f"experiment: unknown kind {kind!r}"]
    declared = cfg.get("experiment")
    if declared is not None and declared != kind:
        diags.append(
            f"experiment: config declares {declared!r} but the {kind} subcommand was invoked"
        )
    for section in REQUIRED_SECTIONS[kind]:
        if section not in cfg:
            diags.append(f"{section}: missing required field")
    if diags:
        return diags

    def attempt(fn):
        try:
            return fn()
        except ConfigError as exc:
            diags.append(str(exc))
        except (ValueError, KeyError, TypeError, LdbayesError) as exc:
            diags.append(f"config: {exc}")
        return None

    bundle = None
    if "family" in REQUIRED_SECTIONS[kind]:
        bundle = attempt(lambda: parse_family(cfg))
    if kind == "pressure" and bundle is not None:
        if not all(isinstance(m, GibbsModel) for m in bundle[0]):
            diags.append("family.kind: pressure needs a potential family (scaled-potential)")
    obs = None
    if "observation" in REQUIRED_SECTIONS[kind]:
        obs = attempt(lambda: parse_observation(cfg))
    loss = None
    if "loss" in REQUIRED_SECTIONS[kind] and bundle is not None and obs is not None:
        a_alpha = obs.obs_alphabet or obs.source_markov.alphabet
        loss = attempt(lambda: parse_loss(cfg, bundle[2], a_alpha))
    if "t_values" in REQUIRED_SECTIONS[kind]:
        attempt(lambda: _t_values(cfg))
    if kind == "entropy-rate":
        attempt(lambda: _parse_markov(cfg, "eta"))
        attempt(lambda: _parse_markov(cfg, "mu"))
    if kind == "hypermix":
        if not isinstance(cfg.get("cls"), (int, float)) or cfg.get("cls", 0) <= 0:
            diags.append("cls: must be a positive number")
    if kind == "simulate":
        attempt(lambda: _parse_samples(cfg))
    if kind in ("variational", "consistency"):
        m = cfg.get("m")
        if not isinstance(m, int) or m < 2:
            diags.append("m: must be an integer depth of at least 2")
        elif bundle is not None and obs is not None:
            joint = (bundle[2].size * obs.source_markov.alphabet.size) ** m
            if joint > 10**6:
                diags.append(f"m: joint word count {joint} exceeds the 1e6 guard")
        if obs is not None and obs.channel is not None:
            ident = obs.channel.shape[0] == obs.channel.shape[1] and np.allclose(
                obs.channel, np.eye(obs.channel.shape[0])
            )
            if not ident:
                diags.append(
                    "observation.channel: the variational pipeline needs the "
                    "observation law itself; only the identity channel is supported"
                )
    if kind in ("posterior", "variational"):
        if not isinstance(cfg.get("t"), int) or cfg["t"] < 1:
            diags.append("t: must be a positive integer")
    if loss is not None and loss.modulus is not None and bundle is not None:
        deficit = check_loss_assumption(
            [loss] * len(bundle[0]), bundle[1], n_probes=64, seed=0
        )
        if deficit > 1e-9:
            diags.append(
                f"loss.modulus_lipschitz: continuity probe found deficit {deficit:g}"
            )
    return diags


def _parse_markov(cfg: dict, key: str) -> MarkovMeasure:
    try:
        return markov_from_json(_need(cfg, key, ""))
    except (KeyError, ValueError, LdbayesError) as exc:
        raise ConfigError(key, str(exc)) from exc


def _parse_samples(cfg: dict):
    doc = _need(cfg, "samples", "")
    kind = _need(doc, "kind", "samples")
    if kind in ("markov", "gibbs"):
        source = parse_source(_need(doc, "source", "samples"), "samples.source")
        t = int(_need(doc, "t", "samples"))
        if t < 1:
            raise ConfigError("samples.t", "must be a positive integer")
        return ("path", source, t)
    if kind == "langevin":
        grad_kind = _need(doc, "gradient", "samples")
        if grad_kind == "quadratic":
            rho = float(_need(doc, "rho", "samples"))
            grad = lambda x: rho * x  # noqa: E731
        elif grad_kind == "double-well":
            a = float(_need(doc, "a", "samples"))
            grad = lambda x: x**3 - a * x  # noqa: E731
        else:
            raise ConfigError("samples.gradient", f"unknown gradient kind {grad_kind!r}")
        x0 = np.asarray(_need(doc, "x0", "samples"), dtype=float)
        dt = float(_need(doc, "dt", "samples"))
        t_steps = int(_need(doc, "t_steps", "samples"))
        if t_steps < 1:
            raise ConfigError("samples.t_steps", "must be a positive integer")
        try:
            return ("langevin", LangevinSpec(grad, dt, x0), t_steps)
        except (ValueError, LdbayesError) as exc:
            raise ConfigError("samples", str(exc)) from exc
    raise ConfigError("samples.kind", f"unknown sample kind {kind!r}")


class _Run:
    """Tracks outputs, stage times, and seeds for one manifest."""

    def __init__(self, outdir: Path, cfg: dict):
        self.outdir = outdir
        self.hash = config_hash(cfg)
        self.outputs = []
        self.stages = {}
        self.seeds = []
        self._t0 = None
        self._stage = None

    def start(self, stage: str):
        self._stage = stage
        self._t0 = time.perf_counter()

    def finish(self):
        self.stages[self._stage] = time.perf_counter() - self._t0

    def emit(self, name: str, writer) -> None:
        path = self.outdir / name
        writer(path)
        self.outputs.append(name)

    def manifest(self, status: str) -> dict:
        return {
            "artifact_version": __version__,
            "config_hash": self.hash,
            "status": status,
            "seeds": self.seeds,
            "stage_seconds": self.stages,
            "outputs": self.outputs,
        }

    def write_manifest(self, status: str) -> None:
        with open(self.outdir / "manifest.json", "w") as fh:
            json.dump(self.manifest(status), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def cleanup(self) -> None:
        for name in self.outputs:
            (self.outdir / name).unlink(missing_ok=True)


def _write_rows(path, header: str, rows) -> None:
    lines = [header]
    for row in rows:
        lines.append(",".join(str(c) if isinstance(c, (int, str)) else format_float(c) for c in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _pmap(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def run_pressure(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    models, grid, _ = parse_family(cfg)
    run.start("pressure")
    values = _pmap(lambda m: m.pressure, models, threads)
    run.finish()
    rows = [(grid.points[i], values[i]) for i in range(len(models))]
    run.emit("pressures.csv", lambda p: _write_rows(p, "theta,pressure", rows))


def run_entropy_rate(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    eta = _parse_markov(cfg, "eta")
    mu = _parse_markov(cfg, "mu")
    t_values = _t_values(cfg)
    run.start("entropy-curve")
    rows = finite_horizon_entropy_curve(eta, mu, t_values)
    run.finish()
    run.emit("entropy_curve.csv", lambda p: write_entropy_curve_csv(p, rows))


def run_partition(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    models, grid, _ = parse_family(cfg)
    obs = parse_observation(cfg)
    a_alpha = obs.obs_alphabet or obs.source_markov.alphabet
    loss = parse_loss(cfg, _family_alphabet(models), a_alpha)
    t_values = _t_values(cfg)
    run.seeds.append(seed)
    run.start("observation")
    y = generate_observation(obs, t_values[-1] + loss.range - 1, seed)
    run.finish()
    run.start("partition")
    curves = _pmap(lambda m: log_partition_curve(m, loss, y, t_values), models, threads)
    run.finish()
    rows = [
        (grid.points[i], t, curves[i][j])
        for i in range(len(models))
        for j, t in enumerate(t_values)
    ]
    run.emit("partition.csv", lambda p: _write_rows(p, "theta,t,log_partition", rows))


def _family_alphabet(models) -> Alphabet:
    first = models[0]
    return first.markov.alphabet if isinstance(first, GibbsModel) else first.alphabet


def run_posterior(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    models, grid, _ = parse_family(cfg)
    obs = parse_observation(cfg)
    a_alpha = obs.obs_alphabet or obs.source_markov.alphabet
    loss = parse_loss(cfg, _family_alphabet(models), a_alpha)
    t = int(_need(cfg, "t", ""))
    run.seeds.append(seed)
    run.start("observation")
    y = generate_observation(obs, t + loss.range - 1, seed)
    run.finish()
    run.start("posterior")
    ell = np.array(_pmap(lambda m: log_partition_dp(m, loss, y, t), models, threads))
    result = _posterior_from_ell(grid, ell, t)
    run.finish()
    run.emit("posterior.csv", lambda p: write_posterior_csv(p, grid, result))


def run_variational(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    models, grid, _ = parse_family(cfg)
    obs = parse_observation(cfg)
    loss = parse_loss(cfg, _family_alphabet(models), obs.source_markov.alphabet)
    t = int(_need(cfg, "t", ""))
    m = int(_need(cfg, "m", ""))
    seeds = _y_seeds(cfg, seed)
    run.seeds.extend(seeds)
    run.start("variational")
    rows = compare_dp_vs_variational(models, loss, obs.source_markov, grid, t, m, seeds)
    run.finish()
    run.emit("variational.csv", lambda p: write_variational_csv(p, rows))


def run_hypermix(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    profile = hypermixing_profile(float(_need(cfg, "cls", "")))
    ells_doc = cfg.get("ells", {"from_factor": 1.0, "to_factor": 100.0, "count": 50})
    if isinstance(ells_doc, list):
        ells = np.asarray(ells_doc, dtype=float)
    else:
        ells = np.linspace(
            profile.ell0 * float(ells_doc.get("from_factor", 1.0)),
            profile.ell0 * float(ells_doc.get("to_factor", 100.0)),
            int(ells_doc.get("count", 50)),
        )
    run.start("profile")
    run.emit("profile.csv", lambda p: write_profile_csv(p, profile, ells))
    run.finish()


def run_simulate(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    parsed = _parse_samples(cfg)
    run.seeds.append(seed)
    if parsed[0] == "path":
        _, source, t = parsed
        spec = ObservedSystemSpec(source)
        run.start("sample")
        sample = generate_observation(spec, t, seed)
        run.finish()
        run.emit("path.txt", lambda p: write_path_text(p, sample))
    else:
        _, spec, t_steps = parsed
        run.start("sample")
        trajectory = sample_langevin(spec, t_steps, seed)
        run.finish()
        run.emit("langevin.csv", lambda p: write_langevin_csv(p, trajectory))


def run_consistency(cfg: dict, run: _Run, seed: int, threads: int) -> None:
    models, grid, _ = parse_family(cfg)
    obs = parse_observation(cfg)
    loss = parse_loss(cfg, _family_alphabet(models), obs.source_markov.alphabet)
    t_values = _t_values(cfg)
    m = int(_need(cfg, "m", ""))
    radius = float(cfg.get("radius", 0.25))
    theta_tol = float(cfg.get("theta_tol", 0.05))
    seeds = _y_seeds(cfg, seed)
    run.seeds.extend(seeds)

    run.start("observation")
    paths = [generate_observation(obs, t_values[-1] + loss.range - 1, s) for s in seeds]
    run.finish()

    run.start("partition")
    curves = {}
    for si, y in enumerate(paths):
        curves[si] = _pmap(lambda mdl: log_partition_curve(mdl, loss, y, t_values), models, threads)
    run.finish()
    rows = [
        (seeds[si], grid.points[i], t, curves[si][i][j])
        for si in range(len(paths))
        for i in range(len(models))
        for j, t in enumerate(t_values)
    ]
    run.emit("partition.csv", lambda p: _write_rows(p, "seed,theta,t,log_partition", rows))

    run.start("posterior")
    post_rows = []
    for si in range(len(paths)):
        for j, t in enumerate(t_values):
            ell = np.array([curves[si][i][j] for i in range(len(models))])
            result = _posterior_from_ell(grid, ell, t)
            post_rows.extend(
                (seeds[si], t, grid.points[i], result.weights[i]) for i in range(len(models))
            )
    run.finish()
    run.emit(
        "posterior.csv",
        lambda p: _write_rows(p, "seed,t,theta,posterior_weight", post_rows),
    )

    run.start("variational")
    results = _pmap(lambda mdl: solve_V(mdl, loss, obs.source_markov, m), models, threads)
    run.finish()
    var_rows = [
        (grid.points[i], m, res.v_m, res.diagnostics["optimality"], res.diagnostics["iterations"])
        for i, res in enumerate(results)
    ]
    run.emit(
        "variational.csv",
        lambda p: _write_rows(p, "theta,m,V_m,optimality,solver_iters", var_rows),
    )

    run.start("consistency")
    v_values = np.array([res.v_m for res in results])
    argmin = theta_min(v_values, theta_tol)
    mask = theta_neighborhood(grid, grid.points[argmin], radius)
    con_rows = []
    for si, y in enumerate(paths):
        curve = consistency_curve(models, grid, loss, y, t_values, mask)
        con_rows.extend((seeds[si], t, mass) for t, mass in curve)
    run.finish()
    run.emit("consistency.csv", lambda p: _write_rows(p, "seed,t,mass_outside", con_rows))


RUNNERS = {
    "pressure": run_pressure,
    "entropy-rate": run_entropy_rate,
    "partition": run_partition,
    "posterior": run_posterior,
    "variational": run_variational,
    "hypermix": run_hypermix,
    "simulate": run_simulate,
    "consistency": run_consistency,
}


def _load_config(config_path: str):
    try:
        with open(config_path) as fh:
            return json.load(fh)
    except OSError as exc:
        click.echo(f"config: cannot read {config_path}: {exc}", err=True)
        sys.exit(2)
    except json.JSONDecodeError as exc:
        click.echo(f"config: invalid JSON: {exc}", err=True)
        sys.exit(2)


def _execute(kind: str, config_path: str, out: str, seed, threads: int) -> None:
    cfg = _load_config(config_path)
    diags = validate_config(kind, cfg)
    if diags:
        for diag in diags:
            click.echo(diag, err=True)
        sys.exit(2)
    outdir = Path(out) if out else Path(cfg.get("out", "."))
    outdir.mkdir(parents=True, exist_ok=True)
    base_seed = int(seed) if seed is not None else int(cfg.get("seed", 0))
    run = _Run(outdir, cfg)
    run.write_manifest("running")
    try:
        RUNNERS[kind](cfg, run, base_seed, threads)
    except LdbayesError as exc:
        run.cleanup()
        run.write_manifest("failed")
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    run.write_manifest("complete")
    for name in run.outputs:
        click.echo(str(outdir / name))
    sys.exit(0)


def _experiment_command(kind: str):
    @click.option("--threads", type=int, default=1, show_default=True)
    @click.option("--seed", type=int, default=None, help="Overrides the config seed.")
    @click.option("--out", type=click.Path(), default=None, help="Output directory.")
    @click.option("--config", required=True, type=click.Path())
    def command(config, out, seed, threads):
        _execute(kind, config, out, seed, threads)

    command.__name__ = kind.replace("-", "_")
    return command


@click.group()
@click.version_option(version=__version__)
def main():
    """Posterior-consistency experiments on finite-alphabet systems."""


for _kind in EXPERIMENTS:
    main.command(name=_kind)(_experiment_command(_kind))


@main.command(name="validate")
@click.option("--config", required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None, hidden=True)
@click.option("--seed", type=int, default=None, hidden=True)
@click.option("--threads", type=int, default=1, hidden=True)
def validate_command(config, out, seed, threads):
    """Check a config against every module invariant without running it."""
    cfg = _load_config(config)
    kind = cfg.get("experiment")
    if kind is None:
        click.echo("experiment: missing required field", err=True)
        sys.exit(2)
    diags = validate_config(kind, cfg)
    for diag in diags:
        click.echo(diag, err=True)
    sys.exit(2 if diags else 0)


if __name__ == "__main__":
    main()

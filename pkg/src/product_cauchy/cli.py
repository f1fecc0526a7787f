"""product-cauchy command-line driver.

Every subcommand writes a CSV (floats with 17 significant digits) and a JSON
summary into --out.  CSV content depends only on the config and seed; wall
times go to the JSON report only.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import click
import numpy as np

from . import checks
from . import littlewood_paley as lp
from . import tb_probe as tb
from .cauchy_ops import (
    ExtensionQuery,
    apply_truncated,
    extend,
    flat_oracle,
    quadrant_decomposition,
    t_sweep,
)
from .config import RunConfig, load_config
from .errors import ConfigError, DomainError, ProductCauchyError
from .surface import GridSpec, ProductSurface


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


@dataclass
class ReportRecord:
    command: str
    config_hash: str
    checks: list = dc_field(default_factory=list)
    wall_time: float = 0.0
    summary: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_dict(self) -> dict:
        return {"command": self.command, "config_hash": self.config_hash, "checks": self.checks,
                "passed": self.passed, "wall_time": self.wall_time, "summary": self.summary}


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _out_dir(out: str) -> Path:
    p = Path(out)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {p}: {exc}") from exc
    return p


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    path.write_text(buf.getvalue())


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")


class Ctx:
    def __init__(self, config: RunConfig, out: Path, fast: bool):
        self.config = config
        self.out = out
        self.fast = fast
        self.t0 = time.perf_counter()

    @property
    def surface(self) -> ProductSurface:
        return self.config.surface.build()

    @property
    def grid(self) -> GridSpec:
        return self.config.build_grid(self.fast)

    def record(self, command: str, results=(), summary=None) -> ReportRecord:
        rec = ReportRecord(command, self.config.config_hash(),
                           [{"name": r.name, "value": r.value, "threshold": r.threshold,
                             "passed": r.passed} for r in results], 0.0, summary or {})
        rec.wall_time = time.perf_counter() - self.t0
        write_json(self.out / f"{command}_report.json", rec.to_dict())
        return rec


def _run(fn):
    """Map library errors to a message and exit status 2."""
    try:
        return fn()
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    except (ProductCauchyError, OSError) as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        sys.exit(2)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="JSON run configuration.")
@click.option("--out", default="out", show_default=True, help="Output directory.")
@click.option("--seed", type=int, default=None, help="Seed for randomized suites.")
@click.option("--fast", is_flag=True, help="Halve the window and double the spacing.")
@click.pass_context
def main(ctx, config_path, out, seed, fast):
    """Product Cauchy transform verification driver."""
    def build():
        cfg = load_config(config_path, {"seed": seed})
        return Ctx(cfg, _out_dir(out), fast)

    ctx.obj = _run(build)


@main.command()
@click.option("--target", default=None, help="Acceptance criterion number or name.")
@click.option("--list", "list_only", is_flag=True, help="List the acceptance targets.")
@click.pass_obj
def verify(c: Ctx, target, list_only):
    """Run the invariant suite, or one acceptance criterion with --target."""
    if list_only:
        for num, (name, _) in checks.CRITERIA.items():
            click.echo(f"{num:2d} {name}")
        return

    def go():
        if target is None:
            results = checks.invariant_suite(c.surface, c.grid, c.config.seed)
        else:
            try:
                results = [checks.run_criterion(target, fast=c.fast, seed=c.config.seed)]
            except KeyError as exc:
                raise ConfigError(str(exc)) from exc
        write_csv(c.out / "verify.csv", ["name", "value", "threshold", "passed"],
                  [(r.name, r.value, r.threshold, r.passed) for r in results])
        rec = c.record("verify", results, {"details": [r.detail for r in results]})
        for r in results:
            click.echo(r.line())
        return rec

    rec = _run(go)
    sys.exit(0 if rec.passed else 1)


@main.command()
@click.option("--kind", type=click.Choice(["t", "tb", "reproducing"]), default=None)
@click.pass_obj
def sweep(c: Ctx, kind):
    """t-sweep, Tb-limit sweep or reproducing-formula sweep."""
    cfg = c.config
    kind = kind or cfg.sweep

    def go():
        S, grid = c.surface, c.grid
        if kind == "t":
            field = cfg.field.build(cfg.seed)
            qc = cfg.build_quadrature(grid)
            rep = t_sweep(field, S, cfg.selector, sorted(cfg.t_schedule, reverse=True), grid=grid,
                          reference=cfg.reference, config=qc)
            write_csv(c.out / "sweep.csv", ["t1", "t2", "l2_error", "max_error"], rep.csv_rows())
            summary = {"kind": "t", "slope": rep.slope, "reference": rep.reference,
                       "monotone": rep.monotone_decreasing()}
        elif kind == "tb":
            psi1 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 0.25, S.curve1)
            psi2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, S.curve2)
            phi2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0)
            rep = tb.tb_limit(S, psi1, psi2, phi2, sorted(cfg.R_schedule))
            write_csv(c.out / "sweep.csv", ["R", "abs_pairing", "sup_F_deviation"],
                      zip(rep.schedule, rep.l2_errors, rep.max_errors))
            summary = {"kind": "tb", "slope": rep.slope, "monotone": rep.monotone_decreasing()}
        else:
            g1 = GridSpec(grid.X, grid.h)
            b = lp.ParaAccretiveFunction.from_curve(S.curve1, g1)
            f = np.exp(-1.0 / np.clip(1 - g1.nodes**2, 1e-300, None)) * (np.abs(g1.nodes) < 1)
            ep, em = lp.reproducing_check(b, f, cfg.kmax)
            write_csv(c.out / "sweep.csv", ["k", "e_plus", "e_minus"],
                      zip(range(1, cfg.kmax + 1), ep, em))
            summary = {"kind": "reproducing", "e_plus_decreasing": bool(np.all(np.diff(ep) < 0)),
                       "e_minus_decreasing": bool(np.all(np.diff(em) < 0))}
        c.record("sweep", (), summary)
        click.echo(json.dumps(_jsonable(summary), sort_keys=True))

    _run(go)


@main.command("extend")
@click.pass_obj
def extend_cmd(c: Ctx):
    """Evaluate G over a (t1, t2, quadrant) lattice at the configured points."""
    cfg = c.config

    def go():
        S = c.surface
        field = cfg.field.build(cfg.seed)
        z1 = np.array([p[0] for p in cfg.points], float)
        z2 = np.array([p[1] for p in cfg.points], float)
        rows, worst = [], 0.0
        sums = []
        for t1 in cfg.t1_lattice:
            for t2 in cfg.t2_lattice:
                q = quadrant_decomposition(field, S, (t1, t2), (z1, z2))
                for tag in ("++", "+-", "-+", "--"):
                    G = extend(field, S, ExtensionQuery.at(S, z1, z2, t1, t2, tag))
                    res = np.abs(G - q.quadrant(tag))
                    worst = max(worst, float(res.max()) if res.size else 0.0)
                    for i in range(z1.size):
                        rows.append((t1, t2, tag, z1[i], z2[i], G[i].real, G[i].imag, res[i]))
                for i in range(z1.size):
                    sums.append((t1, t2, z1[i], z2[i], q.jump()[i].real, q.jump()[i].imag,
                                 q.P[i].real, q.P[i].imag, (-q.total()[i]).real,
                                 (-q.total()[i]).imag, q.C[i].real, q.C[i].imag))
        write_csv(c.out / "extend.csv",
                  ["t1", "t2", "quadrant", "x1", "x2", "G_re", "G_im", "residual"], rows)
        write_csv(c.out / "extend_sums.csv",
                  ["t1", "t2", "x1", "x2", "jump_re", "jump_im", "P_re", "P_im",
                   "minus_total_re", "minus_total_im", "C_re", "C_im"], sums)
        summary = {"max_residual": worst}
        c.record("extend", (), summary)
        click.echo(json.dumps(summary))

    _run(go)


@main.command("tb-probe")
@click.pass_obj
def tb_probe_cmd(c: Ctx):
    """BMO, mixed weak boundedness and Tb-limit probes on the configured surface."""
    def go():
        S = c.surface
        rows, verdicts = [], {}
        psi = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, "one")
        for i, curve in enumerate(S.curves, start=1):
            base = max(tb.bmo_probe(curve, x, tb.bmo_samples(x, -3, 3), psi) for x in (-2.0, 0.0, 3.0))
            wide = max(tb.bmo_probe(curve, x, tb.bmo_samples(x, -4, 4), psi) for x in (-2.0, 0.0, 3.0))
            rows += [(f"bmo_axis{i}", "R=2^-3..2^3", base), (f"bmo_axis{i}", "R=2^-4..2^4", wide)]
            verdicts[f"bmo_axis{i}"] = abs(wide - base) / base < 0.1
        f = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0)
        g2 = tb.make_bump(tb.DEFAULT_ORDER, 0.0, 1.0, S.curve2)
        for mz, thr in ((False, -0.9), (True, -1.8)):
            fit = tb.mixed_wbp_decay(S, (f, f, f, g2), [8, 16, 32], mz)
            pid = "mixed_wbp_mean_zero" if mz else "mixed_wbp_plain"
            rows += [(pid, f"d={d:g}", v) for d, v in zip(fit.separations, fit.values)]
            rows.append((pid, "slope", fit.slope))
            verdicts[pid] = fit.slope <= thr
        rep = tb.tb_limit(S, tb.make_bump(tb.DEFAULT_ORDER, 0.0, 0.25, S.curve1), g2, f,
                          sorted(c.config.R_schedule))
        rows += [("tb_limit", f"R={R:g}", v) for R, v in zip(rep.schedule, rep.l2_errors)]
        verdicts["tb_limit"] = rep.monotone_decreasing() and rep.l2_errors[-1] <= 1e-3 * rep.l2_errors[0]
        write_csv(c.out / "tb_probe.csv", ["probe_id", "parameter", "value"], rows)
        c.record("tb-probe", (), verdicts)
        click.echo(json.dumps(_jsonable(verdicts), sort_keys=True))

    _run(go)


@main.command("lp-stats")
@click.pass_obj
def lp_stats(c: Ctx):
    """Square-function energies per (k1, k2) and the almost-orthogonality fit."""
    cfg = c.config

    def go():
        S, grid = c.surface, c.grid
        rng = (lp.ScaleRange(*cfg.scale_range) if cfg.scale_range
               else lp.ScaleRange.default_for(grid)).validate(grid)
        b1 = lp.ParaAccretiveFunction.from_curve(S.curve1, grid)
        b2 = lp.ParaAccretiveFunction.from_curve(S.curve2, grid)
        f = cfg.field.build(cfg.seed).sample(grid).values
        res = lp.square_function(b1, b2, rng, f, cfg.p)
        write_csv(c.out / "lp_stats.csv", ["k1", "k2", "l2_energy"],
                  [(k1, k2, e) for (k1, k2), e in sorted(res.energies.items())])
        probe = np.random.default_rng(cfg.seed).standard_normal(grid.n)
        try:
            eps = lp.orthogonality_decay(b1, rng, probe).epsilon_hat
        except DomainError:
            eps = None
        summary = {"ratio": res.ratio, "epsilon_hat": eps, "scales": [rng.kmin, rng.kmax]}
        c.record("lp-stats", (), summary)
        click.echo(json.dumps(summary, sort_keys=True))

    _run(go)


@main.command()
@click.pass_obj
def oracle(c: Ctx):
    """Flat-curve FFT oracle against the truncated transform along the t schedule."""
    cfg = c.config

    def go():
        flat = ProductSurface.flat()
        grid = c.grid
        field = cfg.field.build(cfg.seed)
        orc = flat_oracle(field, flat, grid=grid).values
        qc = cfg.build_quadrature(grid)
        rows = []
        for t in sorted(cfg.t_schedule, reverse=True):
            Ct = apply_truncated(field, flat, t, "QQ", grid=grid, config=qc).values
            rows.append((t, float(np.linalg.norm(Ct - orc) / np.linalg.norm(orc))))
        write_csv(c.out / "oracle.csv", ["t", "rel_l2"], rows)
        summary = {"final_rel_l2": rows[-1][1]}
        c.record("oracle", (), summary)
        click.echo(json.dumps(summary))

    _run(go)


if __name__ == "__main__":  # pragma: no cover
    main()

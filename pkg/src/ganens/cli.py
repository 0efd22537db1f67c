"""Command-line entry point: toy, pairwise, optimize, select, quality, gap.

Every command is deterministic under fixed flags and seed, and every output
file carries its provenance (flags, seeds, metric config, tool version).
Exit codes: 0 success, 1 usage, 2 data/validation, 3 numeric failure.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .errors import DataError, GanensError, NumericError, ParameterError
from .metrics import MetricConfig
from .objective import (
    EnsembleEvaluator,
    EnsembleGenome,
    ObjectiveVector,
    build_union,
    pairwise_matrix,
)
from .optimize import SearchConfig, SelectionManifest, search, select_best
from .report import compute_gap, quality_rows
from .simulate import emit_pool, load_profile_spec
from .store import load_pool, write_embeddings

_METRIC_CHOICES = click.Choice(["dnc", "fid"])
_ALGO_CHOICES = click.Choice(["exhaustive", "random", "nsga2"])


def _provenance(command: str, **flags) -> dict:
    return {"tool": "ganens", "version": __version__, "command": command, "flags": flags}


def _metric_config(metric: str, k: int, standardize: bool) -> MetricConfig:
    return MetricConfig(kind=metric, k=k, standardize=standardize)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


@click.group()
@click.version_option(__version__, prog_name="ganens")
def cli() -> None:
    """Select a Pareto-optimal ensemble of generators from embedding files."""


@cli.command("toy")
@click.argument("spec", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the spec seed.")
def cmd_toy(spec: Path, out: Path, seed: int | None) -> None:
    """Fabricate a synthetic pool from a profile spec and write its manifest."""
    sim = load_profile_spec(spec)
    effective_seed = sim.seed if seed is None else seed
    manifest = emit_pool(list(sim.modes), sim.real_samples, list(sim.profiles), out, effective_seed)
    click.echo(str(manifest))


@cli.command("pairwise")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--metric", type=_METRIC_CHOICES, default="dnc", show_default=True)
@click.option("--k", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--standardize", is_flag=True, default=False)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--sample", type=click.IntRange(min=1), default=None, help="Rows per generator.")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def cmd_pairwise(manifest, metric, k, standardize, seed, sample, out) -> None:
    """Compute the symmetric pairwise metric matrix over the pool."""
    pool = load_pool(manifest)
    cfg = _metric_config(metric, k, standardize)
    matrix = pairwise_matrix(pool, cfg, sample_per_generator=sample, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    provenance = _provenance(
        "pairwise",
        manifest=str(manifest), metric=metric, k=k, standardize=standardize,
        seed=seed, sample=sample,
    )
    matrix.write_csv(out / "pairwise.csv", provenance=provenance)
    click.echo(str(out / "pairwise.csv"))


def _run_search(pool, metric, k, standardize, algo, budget, population, crossover,
                mutation, seed, sample, total):
    cfg = _metric_config(metric, k, standardize)
    evaluator = EnsembleEvaluator(
        pool, cfg, seed=seed, total=total, sample_per_generator=sample
    )
    search_cfg = SearchConfig(
        algorithm=algo, budget=budget, population=population,
        crossover_rate=crossover, mutation_rate=mutation, seed=seed,
    )
    return search(pool, evaluator, search_cfg)


def _front_payload(pool, result, provenance: dict) -> dict:
    index_ids = pool.ids
    entries = []
    for genome, objectives in result.front.entries:
        entries.append({
            "ids": [index_ids[i] for i in genome.indices()],
            "intra": objectives.intra,
            "inter": objectives.inter,
            "member_count": objectives.member_count,
        })
    return {
        "provenance": provenance,
        "orientation": result.front.orientation.value,
        "front": entries,
    }


def _scatter_lines(result) -> list[str]:
    on_front = {genome.bits for genome, _ in result.front.entries}
    lines = ["intra,inter,on_front,member_count"]
    for genome, objectives in result.evaluations:
        flag = 1 if genome.bits in on_front else 0
        lines.append(
            f"{objectives.intra!r},{objectives.inter!r},{flag},{objectives.member_count}"
        )
    return lines


@cli.command("optimize")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--metric", type=_METRIC_CHOICES, default="dnc", show_default=True)
@click.option("--k", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--standardize", is_flag=True, default=False)
@click.option("--algo", type=_ALGO_CHOICES, default="nsga2", show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--population", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--crossover", type=click.FloatRange(0, 1), default=0.9, show_default=True)
@click.option("--mutation", type=click.FloatRange(0, 1), default=None, help="Default 1/|pool|.")
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--sample", type=click.IntRange(min=1), default=None, help="Rows per generator for the pairwise matrix.")
@click.option("--total", type=click.IntRange(min=1), default=None, help="Union size; default is the real-set size.")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def cmd_optimize(manifest, metric, k, standardize, algo, budget, population, crossover,
                 mutation, seed, sample, total, out) -> None:
    """Search ensemble space and emit the Pareto front plus all evaluated points."""
    pool = load_pool(manifest)
    result = _run_search(
        pool, metric, k, standardize, algo, budget, population, crossover,
        mutation, seed, sample, total,
    )
    provenance = _provenance(
        "optimize",
        manifest=str(manifest), metric=metric, k=k, standardize=standardize,
        algo=algo, budget=budget, population=population, crossover=crossover,
        mutation=mutation, seed=seed, sample=sample, total=total,
    )
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "front.json", _front_payload(pool, result, provenance))
    scatter = out / "scatter.csv"
    scatter.write_text("\n".join(_scatter_lines(result)) + "\n", encoding="utf-8")
    _write_json(out / "scatter.csv.meta.json", {"provenance": provenance})
    click.echo(f"front size {len(result.front.entries)} of {len(result.evaluations)} evaluations")


def _selection_payload(selection: SelectionManifest, provenance: dict) -> dict:
    return {
        "provenance": provenance,
        "chosen": list(selection.chosen),
        "quotas": dict(selection.quotas),
        "objectives": {
            "intra": selection.objectives.intra,
            "inter": selection.objectives.inter,
            "member_count": selection.objectives.member_count,
        },
        "front_size": selection.front_size,
        "total": selection.total,
    }


def _select_from_front_file(front_path: Path, total: int) -> SelectionManifest:
    # Selection straight from an exported front: maximize effective delta,
    # break ties by fewer members then by sorted id list.
    doc = json.loads(front_path.read_text(encoding="utf-8"))
    entries = doc.get("front", [])
    if not entries:
        raise DataError(f"front file '{front_path}' holds no entries")
    orientation = doc.get("orientation", "higher")
    sign = 1.0 if orientation == "higher" else -1.0
    best = min(
        entries,
        key=lambda e: (-sign * float(e["intra"]), int(e["member_count"]), sorted(e["ids"])),
    )
    ids = sorted(best["ids"])
    n = len(ids)
    if total < n:
        raise ParameterError(f"total {total} is smaller than ensemble size {n}")
    base, extra = divmod(total, n)
    quotas = {gid: base + (1 if pos < extra else 0) for pos, gid in enumerate(ids)}
    cfg = MetricConfig() if orientation == "higher" else MetricConfig(kind="fid")
    objectives = ObjectiveVector(
        intra=float(best["intra"]), inter=float(best["inter"]),
        member_count=int(best["member_count"]), metric=cfg,
    )
    return SelectionManifest(
        chosen=tuple(ids), quotas=quotas, objectives=objectives,
        front_size=len(entries), total=total,
    )


@cli.command("select")
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--front", "front_file", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--metric", type=_METRIC_CHOICES, default="dnc", show_default=True)
@click.option("--k", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--standardize", is_flag=True, default=False)
@click.option("--algo", type=_ALGO_CHOICES, default="nsga2", show_default=True)
@click.option("--budget", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--population", type=click.IntRange(min=2), default=50, show_default=True)
@click.option("--crossover", type=click.FloatRange(0, 1), default=0.9, show_default=True)
@click.option("--mutation", type=click.FloatRange(0, 1), default=None)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--sample", type=click.IntRange(min=1), default=None)
@click.option("--total", type=click.IntRange(min=1), default=None)
@click.option("--emit-union", is_flag=True, default=False, help="Also write the union embedding file.")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def cmd_select(manifest, front_file, metric, k, standardize, algo, budget, population,
               crossover, mutation, seed, sample, total, emit_union, out) -> None:
    """Pick the best ensemble and write its selection manifest (and optionally S*)."""
    if manifest is None and front_file is None:
        raise click.UsageError("provide --manifest (to search) or --front (to reuse a front)")
    out.mkdir(parents=True, exist_ok=True)
    provenance = _provenance(
        "select",
        manifest=str(manifest) if manifest else None,
        front=str(front_file) if front_file else None,
        metric=metric, k=k, standardize=standardize, algo=algo, budget=budget,
        population=population, crossover=crossover, mutation=mutation,
        seed=seed, sample=sample, total=total, emit_union=emit_union,
    )
    pool = load_pool(manifest) if manifest is not None else None
    if front_file is not None:
        if total is None and pool is None:
            raise click.UsageError("--total is required when selecting from a front file alone")
        budget_total = total if total is not None else pool.real.rows
        selection = _select_from_front_file(front_file, budget_total)
        selection = SelectionManifest(
            chosen=selection.chosen, quotas=selection.quotas,
            objectives=selection.objectives, front_size=selection.front_size,
            total=selection.total, provenance=provenance,
        )
    else:
        result = _run_search(
            pool, metric, k, standardize, algo, budget, population, crossover,
            mutation, seed, sample, total,
        )
        selection = select_best(result.front, pool, total=total, provenance=provenance)
    _write_json(out / "selection.json", _selection_payload(selection, provenance))
    if emit_union:
        if pool is None:
            raise click.UsageError("--emit-union needs --manifest to load the embeddings")
        ids = set(selection.chosen)
        genome = EnsembleGenome.from_indices(
            (i for i, (record, _) in enumerate(pool.members) if record.id in ids),
            pool.size,
            pool.ref,
        )
        write_embeddings(build_union(genome, pool, selection.total, seed), out / "union.emb")
    click.echo(",".join(selection.chosen))


@cli.command("quality")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--selection", type=click.Path(exists=True, dir_okay=False, path_type=Path), default=None)
@click.option("--k", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--seed", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--include-all", is_flag=True, default=False, help="Add an all-generators union row.")
@click.option("--out", required=True, type=click.Path(file_okay=False, path_type=Path))
def cmd_quality(manifest, selection, k, seed, include_all, out) -> None:
    """Per-generator (and union) FID, density, and coverage against the real set."""
    pool = load_pool(manifest)
    selected = None
    if selection is not None:
        doc = json.loads(Path(selection).read_text(encoding="utf-8"))
        try:
            selected = SelectionManifest(
                chosen=tuple(doc["chosen"]),
                quotas={k_: int(v) for k_, v in doc["quotas"].items()},
                objectives=ObjectiveVector(
                    intra=float(doc["objectives"]["intra"]),
                    inter=float(doc["objectives"]["inter"]),
                    member_count=int(doc["objectives"]["member_count"]),
                    metric=MetricConfig(),
                ),
                front_size=int(doc["front_size"]),
                total=int(doc["total"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(f"selection file '{selection}' is malformed: {exc}") from None
    rows = quality_rows(pool, k=k, seed=seed, selection=selected, include_all=include_all)
    out.mkdir(parents=True, exist_ok=True)
    provenance = _provenance(
        "quality",
        manifest=str(manifest), selection=str(selection) if selection else None,
        k=k, seed=seed, include_all=include_all,
    )
    table = ["label,fid,density,coverage"]
    scatter = ["label,diversity,fidelity"]
    for row in rows:
        table.append(f"{row.label},{row.fid!r},{row.density!r},{row.coverage!r}")
        scatter.append(f"{row.label},{row.coverage!r},{row.density!r}")
    (out / "quality.csv").write_text("\n".join(table) + "\n", encoding="utf-8")
    (out / "quality_scatter.csv").write_text("\n".join(scatter) + "\n", encoding="utf-8")
    _write_json(out / "quality.csv.meta.json", {"provenance": provenance})
    for row in rows:
        click.echo(
            f"{row.label}: fid {row.fid:.3f} density {row.density:.3f} coverage {row.coverage:.3f}"
        )


@cli.command("gap")
@click.argument("gmean_real", type=float)
@click.argument("gmean_synth", type=float)
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None)
def cmd_gap(gmean_real: float, gmean_synth: float, out: Path | None) -> None:
    """Real-synthetic percentage gap from a pair of downstream g-means."""
    report = compute_gap(gmean_real, gmean_synth)
    click.echo(
        f"g-mean real {report.gmean_real:.3f} synthetic {report.gmean_synth:.3f} "
        f"gamma_rs {report.formatted()}"
    )
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        _write_json(out / "gap.json", {
            "provenance": _provenance("gap", gmean_real=gmean_real, gmean_synth=gmean_synth),
            "gmean_real": report.gmean_real,
            "gmean_synth": report.gmean_synth,
            "gamma_rs": report.gamma_rs,
            "gamma_rs_printed": report.formatted(),
        })


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, prog_name="ganens", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        click.echo("aborted", err=True)
        return 1
    except NumericError as exc:
        click.echo(f"numeric error: {exc}", err=True)
        return 3
    except (DataError, ParameterError, GanensError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except OSError as exc:
        click.echo(f"i/o error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

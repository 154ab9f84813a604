"""Command-line frontend: filter -> compose -> replace, plus stats.

Each phase reads and writes plain files so the human curation loop stays
file-based. Every output is accompanied by a run manifest recording the
resolved configuration, seed, and paths. Exit codes: 0 success, 2 usage or
configuration error, 3 I/O error, 4 domain validation error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .errors import ConfigError, DataError, ValidationError
from .filters import FilterConfig, load_pos_criteria, load_sensitive_words, run_pipeline
from .fitness import fitness
from .ga import GaConfig, evolve
from .ingest import (
    compute_real_distribution,
    load_distribution,
    load_pool,
    save_distribution,
    write_pool,
)
from .model import FitnessWeights, Script, SentencePool, validate_script
from .postprocess import ReplacementRequest, Strategy, ga_replace, greedy_replace
from .report import (
    compare_scripts,
    export_distribution,
    render_breakdown,
    render_stats,
    script_stats,
)

logger = logging.getLogger("phonoscript")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


@dataclass
class RunManifest:
    """Reproducibility record written alongside every output file."""

    subcommand: str
    config: dict
    seed: int | None
    inputs: dict
    outputs: dict
    duration_seconds: float
    version: str = __version__

    def write(self, anchor: Path) -> None:
        path = Path(str(anchor) + ".manifest.json")
        path.write_text(json.dumps(asdict(self), indent=2, ensure_ascii=False), encoding="utf-8")


def write_script_file(path: Path, script: Script, pool: SentencePool) -> None:
    n_s, n = script.shape
    obj = {
        "shape": [n_s, n],
        "sets": [
            [{"id": sid, "text": pool.get(sid).text} for sid in group]
            for group in script.sets
        ],
    }
    path.write_text(json.dumps(obj, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def read_script_file(path: Path) -> Script:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: not a valid script file: {exc}") from exc
    sets = obj.get("sets")
    if not isinstance(sets, list) or not sets:
        raise DataError(f"{path}: script file has no sets")
    try:
        return Script(tuple(tuple(int(e["id"]) for e in group) for group in sets))
    except (TypeError, KeyError) as exc:
        raise DataError(f"{path}: malformed script entry: {exc}") from exc


def _parse_weights(text: str) -> FitnessWeights:
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"--weights expects three comma-separated numbers, got {text!r}")
    try:
        w1, w2, w3 = (float(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"--weights: {exc}") from exc
    return FitnessWeights(w1, w2, w3)


def _optional_number(text, kind=float):
    if text is None:
        return None
    if isinstance(text, (int, float)):
        return kind(text)
    if str(text).lower() in ("none", "off"):
        return None
    try:
        return kind(text)
    except ValueError as exc:
        raise ConfigError(f"expected a number or 'none', got {text!r}") from exc


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: config file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: config file must hold a JSON object")
    return obj


def _resolve(args: argparse.Namespace, config: dict, key: str, default=None):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _load_d_real(args, config, inventory):
    dreal_path = _resolve(args, config, "dreal")
    corpus_path = _resolve(args, config, "corpus")
    if dreal_path and corpus_path:
        raise ConfigError("give either --dreal or --corpus, not both")
    if dreal_path:
        result = load_distribution(dreal_path, inventory)
    elif corpus_path:
        result = compute_real_distribution(corpus_path, inventory)
    else:
        raise ConfigError("a reference distribution is required: pass --dreal or --corpus")
    if result.empty:
        logger.warning("reference distribution is empty; all similarities will be 0")
    return result.vector


def _ga_config(args, config) -> GaConfig:
    weights = _resolve(args, config, "weights")
    if isinstance(weights, str):
        weights = _parse_weights(weights)
    elif isinstance(weights, (list, tuple)):
        weights = FitnessWeights(*[float(w) for w in weights])
    elif weights is None:
        weights = FitnessWeights()
    try:
        return GaConfig(
            population_size=int(_resolve(args, config, "population", 25_000)),
            shape=(
                int(_resolve(args, config, "sets", 20)),
                int(_resolve(args, config, "set_size", 20)),
            ),
            weights=weights,
            patience=int(_resolve(args, config, "patience", 50)),
            max_generations=int(_resolve(args, config, "max_generations", 1000)),
            seed=int(_resolve(args, config, "seed", 0)),
            workers=int(_resolve(args, config, "workers", 1)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def cmd_filter(args: argparse.Namespace) -> int:
    start = time.monotonic()
    config = _load_config_file(args.config)
    pool, rejects = load_pool(args.input)
    words = frozenset()
    words_path = _resolve(args, config, "sensitive_words")
    if words_path:
        words = load_sensitive_words(words_path)
    criteria = ()
    criteria_path = _resolve(args, config, "pos_criteria")
    if criteria_path:
        criteria = load_pos_criteria(criteria_path)
    filter_config = FilterConfig(
        required_length=_optional_number(_resolve(args, config, "length", 10), int),
        charset=_resolve(args, config, "charset", "han"),
        sensitive_words=words,
        pos_criteria=criteria,
        perplexity_threshold=_optional_number(
            _resolve(args, config, "perplexity_threshold", 4.0)
        ),
        intelligibility_threshold=_optional_number(
            _resolve(args, config, "intelligibility_threshold", 1.0)
        ),
    )
    filtered, report = run_pipeline(pool, filter_config)
    output = Path(args.output)
    write_pool(output, filtered)
    report_obj = report.to_dict()
    report_obj["rejected_input_lines"] = len(rejects)
    Path(str(output) + ".report.json").write_text(
        json.dumps(report_obj, indent=2, ensure_ascii=False), encoding="utf-8"
    )
    logger.info(
        "kept %d of %d sentences (%s)",
        report.survivors,
        report.input_size,
        ", ".join(f"{k}: {v}" for k, v in report.removed.items()),
    )
    manifest = RunManifest(
        subcommand="filter",
        config={
            "required_length": filter_config.required_length,
            "charset": filter_config.charset,
            "sensitive_words": sorted(filter_config.sensitive_words),
            "pos_criteria_sets": len(filter_config.pos_criteria),
            "perplexity_threshold": filter_config.perplexity_threshold,
            "intelligibility_threshold": filter_config.intelligibility_threshold,
        },
        seed=None,
        inputs={"pool": str(args.input)},
        outputs={"pool": str(output), "report": str(output) + ".report.json"},
        duration_seconds=time.monotonic() - start,
    )
    manifest.write(output)
    return EXIT_OK


def cmd_compose(args: argparse.Namespace) -> int:
    start = time.monotonic()
    config = _load_config_file(args.config)
    pool, _ = load_pool(args.input)
    d_real = _load_d_real(args, config, pool.inventory)
    ga_config = _ga_config(args, config)
    best, breakdown, trace = evolve(pool, d_real, ga_config)

    output = Path(args.output)
    write_script_file(output, best, pool)
    Path(str(output) + ".fitness.txt").write_text(
        render_breakdown(breakdown) + "\n", encoding="utf-8"
    )
    trace_csv = Path(str(output) + ".trace.csv")
    trace.write_csv(trace_csv)
    from .figures import save_trace_figure

    trace_png = trace_csv.with_suffix(".png")
    save_trace_figure(trace, trace_png)
    if _resolve(args, config, "corpus"):
        save_distribution(Path(str(output) + ".dreal.json"), pool.inventory, d_real)
    logger.info(
        "composed %dx%d script, fitness %.6f over %d generations",
        *best.shape,
        breakdown.total,
        trace.records[-1].generation,
    )
    manifest = RunManifest(
        subcommand="compose",
        config={
            "population_size": ga_config.population_size,
            "shape": list(ga_config.shape),
            "weights": [ga_config.weights.w1, ga_config.weights.w2, ga_config.weights.w3],
            "patience": ga_config.patience,
            "max_generations": ga_config.max_generations,
            "workers": ga_config.workers,
        },
        seed=ga_config.seed,
        inputs={
            "pool": str(args.input),
            "dreal": _resolve(args, config, "dreal"),
            "corpus": _resolve(args, config, "corpus"),
        },
        outputs={
            "script": str(output),
            "fitness": str(output) + ".fitness.txt",
            "trace": str(trace_csv),
            "trace_figure": str(trace_png),
        },
        duration_seconds=time.monotonic() - start,
    )
    manifest.write(output)
    return EXIT_OK


def cmd_replace(args: argparse.Namespace) -> int:
    start = time.monotonic()
    config = _load_config_file(args.config)
    pool, _ = load_pool(args.pool)
    script = read_script_file(Path(args.input))
    validate_script(script, pool)
    d_real = _load_d_real(args, config, pool.inventory)
    from .postprocess import load_unwanted

    unwanted = load_unwanted(args.unwanted)
    strategy = Strategy(_resolve(args, config, "strategy", "greedy"))
    ga_config = _ga_config(args, config)
    request = ReplacementRequest(
        script=script, unwanted=unwanted, strategy=strategy, config=ga_config
    )
    slots = request.slots()
    n_s, n = script.shape
    fraction = len(slots) / (n_s * n) if slots else 0.0
    if slots and fraction <= 0.10 and strategy is Strategy.GA:
        logger.info(
            "hint: only %.0f%% of the script is flagged; the greedy strategy usually wins at low replacement fractions",
            100 * fraction,
        )
    elif fraction > 0.10 and strategy is Strategy.GREEDY:
        logger.info(
            "hint: %.0f%% of the script is flagged; the ga strategy usually wins at high replacement fractions",
            100 * fraction,
        )

    output = Path(args.output)
    outputs = {"script": str(output), "fitness": str(output) + ".fitness.txt"}
    if not slots:
        result, breakdown = script, fitness(script, pool, d_real, ga_config.weights)
    elif strategy is Strategy.GREEDY:
        result, breakdown = greedy_replace(request, pool, d_real, ga_config.weights)
    else:
        result, breakdown, trace = ga_replace(request, pool, d_real, ga_config)
        trace_csv = Path(str(output) + ".trace.csv")
        trace.write_csv(trace_csv)
        from .figures import save_trace_figure

        save_trace_figure(trace, trace_csv.with_suffix(".png"))
        outputs["trace"] = str(trace_csv)
        outputs["trace_figure"] = str(trace_csv.with_suffix(".png"))
    write_script_file(output, result, pool)
    Path(str(output) + ".fitness.txt").write_text(
        render_breakdown(breakdown) + "\n", encoding="utf-8"
    )
    logger.info("replaced %d sentence(s), fitness %.6f", len(slots), breakdown.total)
    manifest = RunManifest(
        subcommand="replace",
        config={
            "strategy": strategy.value,
            "population_size": ga_config.population_size,
            "weights": [ga_config.weights.w1, ga_config.weights.w2, ga_config.weights.w3],
            "patience": ga_config.patience,
            "max_generations": ga_config.max_generations,
        },
        seed=ga_config.seed,
        inputs={
            "script": str(args.input),
            "pool": str(args.pool),
            "unwanted": str(args.unwanted),
        },
        outputs=outputs,
        duration_seconds=time.monotonic() - start,
    )
    manifest.write(output)
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    start = time.monotonic()
    config = _load_config_file(args.config)
    pool, _ = load_pool(args.pool)
    script = read_script_file(Path(args.input))
    validate_script(script, pool)
    d_real = _load_d_real(args, config, pool.inventory)
    stats = script_stats(script, pool, d_real)
    print(render_stats(stats))
    outputs: dict = {}
    if args.compare:
        other = read_script_file(Path(args.compare))
        validate_script(other, pool)
        other_stats = script_stats(other, pool, d_real)
        comparison = compare_scripts(stats, other_stats)
        print()
        print(comparison.format())
    if args.export:
        export_path = Path(args.export)
        export_distribution(pool.inventory, stats.histogram, d_real, export_path)
        from .figures import save_distribution_figure

        figure_path = export_path.with_suffix(".png")
        save_distribution_figure(pool.inventory, stats.histogram, d_real, figure_path)
        outputs = {"distribution": str(export_path), "figure": str(figure_path)}
        manifest = RunManifest(
            subcommand="stats",
            config={},
            seed=None,
            inputs={"script": str(args.input), "pool": str(args.pool)},
            outputs=outputs,
            duration_seconds=time.monotonic() - start,
        )
        manifest.write(export_path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phonoscript",
        description="Compose phonetically balanced, phonetically rich recording scripts.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file presetting any flag")
        p.add_argument("--verbose", action="store_true", help="debug logging")

    def add_dreal(p):
        p.add_argument("--dreal", help="reference distribution snapshot (JSON)")
        p.add_argument("--corpus", help="reference corpus in record format; counted on the fly")

    def add_ga(p):
        p.add_argument("--seed", type=int, help="RNG seed (default 0)")
        p.add_argument("--workers", type=int, help="parallel scoring workers (default 1)")
        p.add_argument("--sets", type=int, help="number of sets (default 20)")
        p.add_argument("--set-size", dest="set_size", type=int,
                       help="sentences per set (default 20)")
        p.add_argument("--population", type=int, help="population size, even (default 25000)")
        p.add_argument("--patience", type=int,
                       help="generations without improvement before stopping (default 50)")
        p.add_argument("--max-generations", dest="max_generations", type=int,
                       help="hard generation cap (default 1000)")
        p.add_argument("--weights", help="w1,w2,w3 fitness weights (default 1,2,1)")

    p = sub.add_parser("filter", help="reduce a raw pool to candidate sentences")
    p.add_argument("--input", required=True, help="raw pool, one JSON record per line")
    p.add_argument("--output", required=True, help="filtered pool path")
    p.add_argument("--length", help="required character count, or 'none' (default 10)")
    p.add_argument("--charset", help="character class rule: han or any (default han)")
    p.add_argument("--sensitive-words", dest="sensitive_words",
                   help="file with one banned word per line")
    p.add_argument("--pos-criteria", dest="pos_criteria",
                   help="JSON file with include/start/end tag arrays")
    p.add_argument("--perplexity-threshold", dest="perplexity_threshold",
                   help="max kept perplexity, or 'none' (default 4.0)")
    p.add_argument("--intelligibility-threshold", dest="intelligibility_threshold",
                   help="min kept intelligibility, or 'none' (default 1.0)")
    add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("compose", help="evolve a balanced script from candidates")
    p.add_argument("--input", required=True, help="filtered candidate pool")
    p.add_argument("--output", required=True, help="script file to write")
    add_dreal(p)
    add_ga(p)
    add_common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("replace", help="replace flagged sentences in a script")
    p.add_argument("--input", required=True, help="script file")
    p.add_argument("--pool", required=True, help="candidate pool")
    p.add_argument("--output", required=True, help="replaced script path")
    p.add_argument("--unwanted", required=True,
                   help="file of flagged sentences: id or set:position per line")
    p.add_argument("--strategy", choices=["greedy", "ga"], help="replacement strategy")
    add_dreal(p)
    add_ga(p)
    add_common(p)
    p.set_defaults(func=cmd_replace)

    p = sub.add_parser("stats", help="report script statistics")
    p.add_argument("--input", required=True, help="script file")
    p.add_argument("--pool", required=True, help="candidate pool")
    p.add_argument("--export", help="write a unit,script,real CSV (plus figure) here")
    p.add_argument("--compare", help="second script file to diff against")
    add_dreal(p)
    add_common(p)
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        logger.error("%s", exc)
        return EXIT_USAGE
    except (DataError, OSError) as exc:
        logger.error("%s", exc)
        return EXIT_IO
    except ValidationError as exc:
        logger.error("%s", exc)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())

"""Pipeline orchestration: declarative config, staged execution, and an
artifact manifest.

Every stage writes data-only artifacts (CSV/JSON) under the output
directory and registers them in manifest.json.  All artifact content is
a pure function of the config and inputs; wall-clock timings live in a
dedicated manifest key so the rest stays byte-comparable across runs.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from . import corpus as corpus_mod
from . import embeddings as emb
from . import hawkes as hk
from . import memes as memes_mod
from . import semgraph as sg
from . import trends as trends_mod
from .errors import ConfigError, DependencyError, SocioscopeError

logger = logging.getLogger("socioscope")

STAGES = ("ingest", "trends", "embed", "graph", "memes", "hawkes", "report")

STAGE_DEPS = {
    "ingest": (),
    "trends": ("ingest",),
    "embed": ("ingest",),
    "graph": ("embed",),
    "memes": ("ingest",),
    "hawkes": ("memes",),
    "report": ("ingest",),
}


@dataclass(frozen=True)
class TrendsParams:
    rolling_window: int = 7
    edge_window: int = 14
    penalty_points: int = 25
    penalty_hi: float = 50.0
    penalty_lo: float = 0.5


@dataclass(frozen=True)
class GraphParams:
    edge_fraction: float = 0.002
    threshold: float | None = None  # overrides edge_fraction when set
    sample_pairs: int = 200_000
    ego_seeds: tuple[str, ...] = ()
    hops: int = 2
    layout_iterations: int = 150


@dataclass(frozen=True)
class MemeParams:
    eps: int = 8
    min_pts: int = 5
    reference: str | None = None
    max_distance: int = 8


@dataclass(frozen=True)
class HawkesParams:
    draws: int = 800
    burn_in: int = 300
    tau_days: float = 1.0
    max_lag_days: float = 3.0
    min_events: int = 30
    target_label: str | None = None


@dataclass(frozen=True)
class PipelineConfig:
    inputs: tuple[str, ...]
    out_dir: str
    format: str = "jsonl"
    image_dir: str | None = None
    terms: tuple[str, ...] = ()
    trends: TrendsParams = TrendsParams()
    embedding: emb.CbowConfig = emb.CbowConfig()
    graph: GraphParams = GraphParams()
    memes: MemeParams = MemeParams()
    hawkes: HawkesParams = HawkesParams()
    seed: int = 0
    deterministic: bool = True
    workers: int = 1

    def semantic_dict(self) -> dict:
        """Fields that affect results (out_dir and workers excluded)."""
        return {
            "inputs": list(self.inputs),
            "format": self.format,
            "image_dir": self.image_dir,
            "terms": list(self.terms),
            "trends": vars(self.trends).copy(),
            "embedding": self.embedding.to_dict(),
            "graph": {**vars(self.graph), "ego_seeds": list(self.graph.ego_seeds)},
            "memes": vars(self.memes).copy(),
            "hawkes": vars(self.hawkes).copy(),
            "seed": self.seed,
            "deterministic": self.deterministic,
        }

    def config_hash(self) -> str:
        canon = json.dumps(self.semantic_dict(), sort_keys=True)
        return hashlib.sha256(canon.encode()).hexdigest()


def _take(section: dict, cls, path: str):
    known = {f for f in cls.__dataclass_fields__}
    for key in section:
        if key not in known:
            raise ConfigError(f"unknown key {key!r}", field=path)
    converted = {}
    for key, value in section.items():
        if isinstance(value, list):
            value = tuple(value)
        converted[key] = value
    try:
        return cls(**converted)
    except TypeError as exc:
        raise ConfigError(str(exc), field=path) from exc


def load_config(path, overrides: dict | None = None) -> PipelineConfig:
    """Parse and validate a JSON config file.

    ``overrides`` (CLI flags) take precedence over file values, which
    take precedence over defaults.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found", field=str(path))
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}", field=str(path)) from exc
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object", field=str(path))
    raw = dict(raw)
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    known_top = set(PipelineConfig.__dataclass_fields__)
    for key in raw:
        if key not in known_top:
            raise ConfigError(f"unknown key {key!r}", field=f"config.{key}")

    sections = {
        "trends": (TrendsParams, "config.trends"),
        "embedding": (emb.CbowConfig, "config.embedding"),
        "graph": (GraphParams, "config.graph"),
        "memes": (MemeParams, "config.memes"),
        "hawkes": (HawkesParams, "config.hawkes"),
    }
    kwargs = {}
    for key, value in raw.items():
        if key in sections:
            cls, fpath = sections[key]
            if not isinstance(value, dict):
                raise ConfigError("expected an object", field=fpath)
            kwargs[key] = _take(value, cls, fpath)
        elif isinstance(value, list):
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value

    if "inputs" not in kwargs or not kwargs["inputs"]:
        raise ConfigError("at least one input file is required", field="config.inputs")
    if "out_dir" not in kwargs:
        raise ConfigError("out_dir is required", field="config.out_dir")
    try:
        config = PipelineConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc), field="config") from exc

    for p in config.inputs:
        if not Path(p).is_file():
            raise ConfigError(f"input file not found: {p}", field="config.inputs")
    if config.image_dir is not None and not Path(config.image_dir).is_dir():
        raise ConfigError(
            f"image directory not found: {config.image_dir}", field="config.image_dir"
        )
    if config.memes.reference is not None and not Path(config.memes.reference).is_file():
        raise ConfigError(
            f"reference file not found: {config.memes.reference}",
            field="config.memes.reference",
        )
    if config.format not in ("jsonl", "csv"):
        raise ConfigError(
            f"format must be jsonl or csv, got {config.format!r}", field="config.format"
        )
    return config


def _input_fingerprint(config: PipelineConfig) -> str:
    digest = hashlib.sha256()
    for p in config.inputs:
        digest.update(Path(p).read_bytes())
    return digest.hexdigest()


def _stage_seed(config: PipelineConfig, stage: str) -> int:
    ss = np.random.SeedSequence((config.seed, STAGES.index(stage)))
    return int(ss.generate_state(1)[0])


class _Run:
    """Mutable state shared by the stages of one execute() call."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out = Path(config.out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out / "manifest.json"
        self.manifest = self._load_manifest()
        self._corpus = None

    def _load_manifest(self) -> dict:
        if self.manifest_path.is_file():
            try:
                m = json.loads(self.manifest_path.read_text())
                if (
                    m.get("config_hash") == self.config.config_hash()
                    and m.get("tool_version") == __version__
                ):
                    return m
            except (json.JSONDecodeError, OSError):
                pass
        return {
            "tool_version": __version__,
            "seed": self.config.seed,
            "config_hash": self.config.config_hash(),
            "input_fingerprint": _input_fingerprint(self.config),
            "stages": {},
            "timings": {},
        }

    def save_manifest(self) -> None:
        with open(self.manifest_path, "w", encoding="utf-8") as f:
            json.dump(self.manifest, f, indent=2, sort_keys=True)
            f.write("\n")

    def stage_complete(self, stage: str) -> bool:
        entry = self.manifest["stages"].get(stage)
        if not entry or entry.get("status") != "success":
            return False
        return all((self.out / rel).is_file() for rel in entry["artifacts"])

    def corpus(self):
        if self._corpus is None:
            handles = [
                corpus_mod.ingest_posts(p, format=self.config.format,
                                        image_store=self.config.image_dir)
                for p in self.config.inputs
            ]
            self._corpus = _merge_handles(handles)
        return self._corpus

    def path(self, rel: str) -> Path:
        p = self.out / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        return p


def _merge_handles(handles):
    if len(handles) == 1:
        return handles[0]
    merged_posts = []
    seen = set()
    report = corpus_mod.IngestReport()
    for h in handles:
        for post in h.posts:
            if post.key in seen:
                report.skipped_duplicate += 1
                continue
            seen.add(post.key)
            merged_posts.append(post)
        report.accepted += h.report.accepted
        report.skipped_invalid_record += h.report.skipped_invalid_record
        report.skipped_missing_field += h.report.skipped_missing_field
        report.skipped_bad_timestamp += h.report.skipped_bad_timestamp
        report.skipped_duplicate += h.report.skipped_duplicate
        report.missing_image_refs += h.report.missing_image_refs
    report.accepted = len(merged_posts)
    return corpus_mod._build_handle(merged_posts, report)


def execute(config: PipelineConfig, stages=None, force: bool = False):
    """Run the requested stages in dependency order.

    Returns (exit_code, manifest).  A completed stage with an unchanged
    config is skipped unless ``force``; a missing dependency that is
    neither completed nor requested raises ``DependencyError``.
    """
    requested = list(STAGES) if stages is None else list(stages)
    for s in requested:
        if s not in STAGES:
            raise ConfigError(f"unknown stage: {s}", field="stages")
    ordered = [s for s in STAGES if s in requested]

    run = _Run(config)
    for s in ordered:
        for dep in STAGE_DEPS[s]:
            if dep in ordered or run.stage_complete(dep):
                continue
            raise DependencyError(f"stage {s!r} requires stage: {dep}")

    exit_code = 0
    for s in ordered:
        if not force and run.stage_complete(s):
            logger.info("stage %s: up to date, skipping", s)
            continue
        logger.info("stage %s: running", s)
        started = time.monotonic()
        try:
            artifacts = _STAGE_FUNCS[s](run)
        except SocioscopeError as exc:
            logger.error("stage %s failed: %s", s, exc)
            run.manifest["stages"][s] = {"status": "failed", "error": str(exc),
                                         "artifacts": []}
            run.manifest["timings"][s] = round(time.monotonic() - started, 3)
            run.save_manifest()
            exit_code = 1
            break
        run.manifest["stages"][s] = {"status": "success", "artifacts": sorted(artifacts)}
        run.manifest["timings"][s] = round(time.monotonic() - started, 3)
        run.save_manifest()
    return exit_code, run.manifest


def _map_tasks(run: _Run, tasks, fn):
    """Run independent tasks, optionally on a thread pool; results are
    keyed so output order never depends on completion order."""
    if run.config.deterministic or run.config.workers <= 1:
        return {key: fn(key, *args) for key, *args in tasks}
    out = {}
    with ThreadPoolExecutor(max_workers=run.config.workers) as pool:
        futures = {key: pool.submit(fn, key, *args) for key, *args in tasks}
        for key, fut in futures.items():
            out[key] = fut.result()
    return out


def _stage_ingest(run: _Run) -> list[str]:
    corpus = run.corpus()
    artifacts = []

    rel = "ingest/report.json"
    with open(run.path(rel), "w", encoding="utf-8") as f:
        json.dump(corpus.report.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    artifacts.append(rel)

    per_comm = {
        c: {
            "posts": corpus.community_posts(c),
            "first_day": corpus.day_range(c)[0].isoformat(),
            "last_day": corpus.day_range(c)[1].isoformat(),
        }
        for c in corpus.communities
    }
    stats = {
        "posts": len(corpus.posts),
        "communities": per_comm,
        "distinct_tokens": len(corpus.term_index),
        "distinct_images": len(corpus.image_index),
    }
    rel = "ingest/corpus_stats.json"
    with open(run.path(rel), "w", encoding="utf-8") as f:
        json.dump(stats, f, indent=2, sort_keys=True)
        f.write("\n")
    artifacts.append(rel)
    return artifacts


def _normalized_terms(config: PipelineConfig) -> list[str]:
    out = []
    for term in config.terms:
        toks = corpus_mod.tokenize(term)
        if toks:
            out.append(toks[0])
    return sorted(set(out))


def _stage_trends(run: _Run) -> list[str]:
    corpus = run.corpus()
    cfg = run.config.trends
    terms = _normalized_terms(run.config)
    artifacts = []
    ratio_rows = []

    tasks = [
        ((term, community),)
        for term in terms for community in corpus.communities
    ]

    def one(key):
        term, community = key
        series = trends_mod.build_term_series(corpus, term, community)
        result = {"series": series}
        if len(series) >= 2 * cfg.edge_window:
            result["ratio"] = trends_mod.increase_ratio(series, cfg.edge_window)
        if len(series) >= 4:
            pens = trends_mod.default_penalty_schedule(
                len(series), cfg.penalty_points, cfg.penalty_hi, cfg.penalty_lo
            )
            result["changepoints"] = trends_mod.rank_changepoints(series.fraction, pens)
        return result

    results = _map_tasks(run, tasks, lambda key: one(key))

    for (term, community), res in sorted(results.items()):
        series = res["series"]
        rel = f"trends/{term}_{community}.csv"
        trends_mod.series_to_csv(series, run.path(rel), cfg.rolling_window)
        artifacts.append(rel)
        if "changepoints" in res:
            rel = f"trends/{term}_{community}_changepoints.json"
            trends_mod.changepoints_to_json(res["changepoints"], series.days, run.path(rel))
            artifacts.append(rel)
        if "ratio" in res:
            ratio_rows.append([term, community, repr(res["ratio"])])

    rel = "trends/increase_ratios.csv"
    with open(run.path(rel), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["term", "community", "increase_ratio"])
        w.writerows(ratio_rows)
    artifacts.append(rel)
    return artifacts


def _stage_embed(run: _Run) -> list[str]:
    corpus = run.corpus()
    cfg = replace(run.config.embedding, seed=_stage_seed(run.config, "embed"))
    model = emb.train_cbow(corpus, cfg)
    emb.save_model(model, run.path("embed/model/meta.json").parent)
    return [
        "embed/model/meta.json",
        "embed/model/vocab.tsv",
        "embed/model/input_vectors.npy",
        "embed/model/output_vectors.npy",
    ]


def _stage_graph(run: _Run) -> list[str]:
    cfg = run.config.graph
    model = emb.load_model(Path(run.config.out_dir) / "embed" / "model")
    artifacts = []
    seed = _stage_seed(run.config, "graph")

    if cfg.threshold is not None:
        threshold = cfg.threshold
        cdf_est = None
    else:
        cdf_est = emb.threshold_for_fraction(
            model, cfg.edge_fraction, cfg.sample_pairs, seed
        )
        threshold = cdf_est.threshold

    rel = "graph/threshold.json"
    with open(run.path(rel), "w", encoding="utf-8") as f:
        json.dump({
            "threshold": threshold,
            "edge_fraction": None if cfg.threshold is not None else cfg.edge_fraction,
            "sample_pairs": None if cdf_est is None else cdf_est.sample_pairs,
        }, f, indent=2, sort_keys=True)
        f.write("\n")
    artifacts.append(rel)

    if cdf_est is not None:
        rel = "graph/similarity_cdf.csv"
        values, cum = cdf_est.cdf()
        step = max(1, len(values) // 10_000)
        with open(run.path(rel), "w", encoding="utf-8", newline="") as f:
            w = csv.writer(f)
            w.writerow(["cosine", "cum_fraction"])
            for i in range(0, len(values), step):
                w.writerow([repr(float(values[i])), repr(float(cum[i]))])
        artifacts.append(rel)

    graph = sg.build_similarity_graph(model, threshold)
    graph = sg.with_communities(graph, seed=seed)
    rel = "graph/graph.json"
    sg.write_json_graph(graph, run.path(rel))
    artifacts.append(rel)
    rel = "graph/graph.gexf"
    sg.write_gexf(graph, run.path(rel))
    artifacts.append(rel)

    for seed_word in cfg.ego_seeds:
        toks = corpus_mod.tokenize(seed_word)
        if not toks or toks[0] not in set(graph.nodes):
            logger.warning("ego seed %r not in graph, skipping", seed_word)
            continue
        ego = sg.ego_network(graph, toks[0], cfg.hops)
        ego = sg.with_communities(ego, seed=seed)
        ego = sg.with_layout(ego, cfg.layout_iterations, seed=seed)
        for ext, writer in (("json", sg.write_json_graph), ("gexf", sg.write_gexf)):
            rel = f"graph/ego_{toks[0]}.{ext}"
            writer(ego, run.path(rel))
            artifacts.append(rel)
    return artifacts


def _stage_memes(run: _Run) -> list[str]:
    if run.config.image_dir is None:
        raise ConfigError("memes stage requires image_dir", field="config.image_dir")
    corpus = run.corpus()
    cfg = run.config.memes
    artifacts = []

    rel_cache = "memes/hashes.csv"
    hashes, skipped = memes_mod.hash_corpus_images(
        corpus, run.config.image_dir, run.path(rel_cache)
    )
    artifacts.append(rel_cache)
    logger.info("hashed %d images (%d undecodable/missing)", len(hashes), skipped)

    clusters = memes_mod.cluster_hashes(hashes, cfg.eps, cfg.min_pts)
    if cfg.reference:
        reference = memes_mod.load_reference_csv(cfg.reference)
        clusters = memes_mod.annotate_clusters(clusters, reference, cfg.max_distance)

    rel = "memes/clusters.json"
    memes_mod.clusters_to_json(clusters, corpus, run.path(rel))
    artifacts.append(rel)

    rel = "memes/cluster_members.json"
    members = {
        str(c.cluster_id): sorted({h.image_ref for h in c.members})
        for c in clusters
    }
    with open(run.path(rel), "w", encoding="utf-8") as f:
        json.dump(members, f, indent=2, sort_keys=True)
        f.write("\n")
    artifacts.append(rel)

    for c in clusters:
        if c.cluster_id == -1:
            continue
        series = memes_mod.cluster_series(corpus, c)
        for community in sorted(series):
            rel = f"memes/series/cluster_{c.cluster_id}_{community}.csv"
            trends_mod.series_to_csv(series[community], run.path(rel),
                                     run.config.trends.rolling_window)
            artifacts.append(rel)
    return artifacts


def _cluster_event_log(corpus, refs, seed):
    stamps = []
    seen = set()
    for ref in refs:
        for key in corpus.image_index.get(ref, ()):
            if key not in seen:
                seen.add(key)
                post = corpus.post(key)
                stamps.append((post.timestamp, post.community))
    if not stamps:
        return None
    return hk.event_log_from_timestamps(
        sorted(stamps), names=corpus.communities, resolution_s=1.0, seed=seed
    )


def _stage_hawkes(run: _Run) -> list[str]:
    corpus = run.corpus()
    cfg = run.config.hawkes
    artifacts = []
    members_path = Path(run.config.out_dir) / "memes" / "cluster_members.json"
    clusters_path = Path(run.config.out_dir) / "memes" / "clusters.json"
    members = json.loads(members_path.read_text())
    cluster_meta = {
        str(row["cluster_id"]): row
        for row in json.loads(clusters_path.read_text())
    }

    kern = hk.ExponentialKernel(tau=cfg.tau_days, t_max=cfg.max_lag_days)
    base_seed = _stage_seed(run.config, "hawkes")

    eligible = []
    for cid in sorted(members, key=lambda c: int(c)):
        if int(cid) == -1:
            continue
        log = _cluster_event_log(corpus, members[cid], seed=base_seed + int(cid))
        if log is not None and len(log) >= cfg.min_events:
            eligible.append((cid, log))

    def fit_one(cid, log):
        fc = hk.FitConfig(
            draws=cfg.draws, burn_in=cfg.burn_in, kernel=kern,
            seed=base_seed + int(cid),
        )
        return hk.fit_gibbs(log, fc)

    results = _map_tasks(run, [((cid,), log) for cid, log in eligible],
                         lambda key, log: fit_one(key[0], log))

    fits = {}
    for (cid,), fit in sorted(results.items()):
        log = dict(eligible)[cid]
        rel = f"hawkes/events/cluster_{cid}.csv"
        hk.write_event_log(log, run.path(rel))
        artifacts.extend([rel, rel + ".json"])
        rel = f"hawkes/fits/cluster_{cid}.json"
        hk.fit_to_json(fit, run.path(rel))
        artifacts.append(rel)
        fits[cid] = (log, fit)

    for mode in ("dest_percent", "source_normalized"):
        mats = [
            hk.attribution_matrix(fit, log, mode).matrix
            for log, fit in fits.values()
        ]
        rel = f"hawkes/influence_{mode}.csv"
        if mats:
            mean_mat = np.nanmean(np.stack(mats), axis=0)
            infl = hk.InfluenceMatrix(mean_mat, mode, corpus.communities)
            hk.influence_to_csv(infl, run.path(rel))
        else:
            with open(run.path(rel), "w", encoding="utf-8", newline="") as f:
                csv.writer(f).writerow(["source\\dest"] + list(corpus.communities))
        artifacts.append(rel)

    rel = "hawkes/ks_results.csv"
    with open(run.path(rel), "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f)
        w.writerow(["source", "dest", "D", "p", "significant"])
        if cfg.target_label:
            labeled_ids = {
                cid for cid, meta in cluster_meta.items()
                if meta.get("label") == cfg.target_label
            }
            group_a = [fit for cid, (_, fit) in sorted(fits.items()) if cid in labeled_ids]
            group_b = [fit for cid, (_, fit) in sorted(fits.items()) if cid not in labeled_ids]
            if len(group_a) >= 5 and len(group_b) >= 5:
                kk = len(corpus.communities)
                for s in range(kk):
                    for d in range(kk):
                        stat, p, sig = hk.compare_influence(group_a, group_b, (s, d))
                        w.writerow([
                            corpus.communities[s], corpus.communities[d],
                            repr(stat), repr(p), str(sig).lower(),
                        ])
            else:
                logger.warning(
                    "need >= 5 fits per group for KS comparison "
                    "(labeled=%d, other=%d); table left empty",
                    len(group_a), len(group_b),
                )
    artifacts.append(rel)
    return artifacts


def _stage_report(run: _Run) -> list[str]:
    out = Path(run.config.out_dir)
    summary = {"tool_version": __version__, "seed": run.config.seed}

    stats_path = out / "ingest" / "corpus_stats.json"
    if stats_path.is_file():
        summary["corpus"] = json.loads(stats_path.read_text())

    ratios_path = out / "trends" / "increase_ratios.csv"
    if ratios_path.is_file():
        with open(ratios_path, newline="") as f:
            rows = list(csv.DictReader(f))
        summary["increase_ratios"] = rows
        tops = {}
        for row in rows:
            cp_path = out / "trends" / f"{row['term']}_{row['community']}_changepoints.json"
            if cp_path.is_file():
                cps = json.loads(cp_path.read_text())
                tops[f"{row['term']}/{row['community']}"] = cps[:3]
        summary["top_changepoints"] = tops

    meta_path = out / "embed" / "model" / "meta.json"
    if meta_path.is_file():
        summary["embedding"] = json.loads(meta_path.read_text())

    graph_path = out / "graph" / "graph.json"
    if graph_path.is_file():
        payload = json.loads(graph_path.read_text())
        comms = {
            n["community"] for n in payload["nodes"] if n.get("community") is not None
        }
        summary["graph"] = {
            "nodes": len(payload["nodes"]),
            "edges": len(payload["links"]),
            "communities": len(comms),
            "threshold": payload["threshold"],
        }

    clusters_path = out / "memes" / "clusters.json"
    if clusters_path.is_file():
        rows = json.loads(clusters_path.read_text())
        real = [r for r in rows if r["cluster_id"] != -1]
        summary["memes"] = {
            "clusters": len(real),
            "labeled": sum(1 for r in real if "label" in r),
            "noise_images": sum(
                r["size"] for r in rows if r["cluster_id"] == -1
            ),
        }

    ks_path = out / "hawkes" / "ks_results.csv"
    if ks_path.is_file():
        with open(ks_path, newline="") as f:
            rows = list(csv.DictReader(f))
        summary["hawkes"] = {
            "fitted_clusters": len(list((out / "hawkes" / "fits").glob("*.json")))
            if (out / "hawkes" / "fits").is_dir() else 0,
            "ks_pairs": len(rows),
            "significant_pairs": [
                {"source": r["source"], "dest": r["dest"], "p": float(r["p"])}
                for r in rows if r["significant"] == "true"
            ],
        }

    rel = "report/summary.json"
    with open(run.path(rel), "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write("\n")
    return [rel]


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "trends": _stage_trends,
    "embed": _stage_embed,
    "graph": _stage_graph,
    "memes": _stage_memes,
    "hawkes": _stage_hawkes,
    "report": _stage_report,
}

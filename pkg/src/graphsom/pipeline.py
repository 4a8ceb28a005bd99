"""End-to-end runs: configuration, result documents, and the pipeline stages.

Every output is a JSON document with a ``schema`` name and ``schema_version``
so files are self-describing. Documents are serialized with a fixed key
order, which makes repeated runs byte-identical.
"""

from __future__ import annotations

import json
import os
from collections import Counter
from dataclasses import dataclass
from typing import IO, Mapping

import numpy as np

from .cluster import kernel_kmeans, partition_stats, q_modularity, spectral_clustering
from .errors import ParseError, UsageError
from .graph import Partition, WeightedGraph, load_edge_list, summary_graph
from .layout import Rect, constrained_full_layout, force_directed_layout, som_map_scene
from .linalg import heat_kernel, spectral_embedding
from .render import export_dot, render_svg
from .som import SomGrid, SomModel, batch_kernel_som, default_radius, som_partition, \
    spectral_som, u_matrix

__all__ = [
    "PARTITION_SCHEMA",
    "REPORT_SCHEMA",
    "ATTRIBUTE_SUMMARY_SCHEMA",
    "SCHEMA_VERSION",
    "RunConfig",
    "AttributeTable",
    "parse_attribute_table",
    "attribute_summary",
    "document_bytes",
    "read_document",
    "load_partition_document",
    "partition_for_graph",
    "model_from_document",
    "run_cluster",
    "run_attribute_summary",
    "run_layout",
    "run_stats",
]

PARTITION_SCHEMA = "graphsom/partition"
REPORT_SCHEMA = "graphsom/report"
ATTRIBUTE_SUMMARY_SCHEMA = "graphsom/attribute-summary"
SCHEMA_VERSION = 1

METHODS = ("spectral", "kernel-kmeans", "spectral-som", "kernel-som")
_SOM_METHODS = ("spectral-som", "kernel-som")
_KERNEL_METHODS = ("kernel-kmeans", "kernel-som")

DEFAULT_K = 50
DEFAULT_BETA = 0.05
DEFAULT_EPOCHS = 100
DEFAULT_RESTARTS = 10
SUMMARY_ITERATIONS = 500
FULL_ITERATIONS = 1000

_SUMMARY_FRAME = Rect(0.0, 0.0, 800.0, 800.0)

# which optional knobs make sense for each method; anything else is a typo
_METHOD_KNOBS = {
    "spectral": ("k", "p", "restarts"),
    "kernel-kmeans": ("k", "beta", "restarts"),
    "spectral-som": ("p", "grid", "epochs", "radius"),
    "kernel-som": ("beta", "grid", "epochs", "radius"),
}


@dataclass(frozen=True)
class RunConfig:
    """One clustering run: input, method, knobs, seed, output paths.

    Optional knobs default to ``None`` meaning "not given"; method-specific
    defaults are filled in by :meth:`resolved`. Knobs that do not apply to
    the chosen method are rejected outright so typos fail loudly.
    """

    input: str
    method: str
    seed: int
    out: str
    report: str | None = None
    k: int | None = None
    p: int | None = None
    beta: float | None = None
    grid: tuple[int, int] | None = None
    epochs: int | None = None
    radius: tuple[float, float] | None = None
    restarts: int | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise UsageError(
                f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        allowed = _METHOD_KNOBS[self.method]
        for name in ("k", "p", "beta", "grid", "epochs", "radius", "restarts"):
            if getattr(self, name) is not None and name not in allowed:
                raise UsageError(f"--{name} does not apply to method {self.method}")
        if self.method in _SOM_METHODS and self.grid is None:
            raise UsageError(f"--grid is required for method {self.method}")
        if self.k is not None and self.k < 1:
            raise UsageError(f"--k must be at least 1, got {self.k}")
        if self.p is not None and self.p < 1:
            raise UsageError(f"--p must be at least 1, got {self.p}")
        if self.beta is not None and not (np.isfinite(self.beta) and self.beta >= 0):
            raise UsageError(f"--beta must be a nonnegative number, got {self.beta}")
        if self.grid is not None:
            rows, cols = self.grid
            if rows < 1 or cols < 1:
                raise UsageError(f"--grid must be at least 1x1, got {rows}x{cols}")
        if self.epochs is not None and self.epochs < 1:
            raise UsageError(f"--epochs must be at least 1, got {self.epochs}")
        if self.radius is not None:
            start, end = self.radius
            if not (np.isfinite(start) and np.isfinite(end) and start >= end > 0):
                raise UsageError(
                    f"--radius must satisfy start >= end > 0, got {start},{end}")
        if self.restarts is not None and self.restarts < 1:
            raise UsageError(f"--restarts must be at least 1, got {self.restarts}")

    def resolved(self) -> dict:
        """Full configuration with method-specific defaults filled in.

        Defaults: k=50 clusters, beta=0.05, 100 epochs, 10 restarts; p falls
        back to k for spectral clustering and to the unit count for the
        spectral map; the radius schedule falls back to the grid default.
        """
        cfg = {"input": str(self.input), "method": self.method,
               "seed": int(self.seed), "out": str(self.out),
               "report": None if self.report is None else str(self.report),
               "k": None, "p": None, "beta": None, "grid": None,
               "epochs": None, "radius": None, "restarts": None}
        m = self.method
        if m in ("spectral", "kernel-kmeans"):
            cfg["k"] = DEFAULT_K if self.k is None else int(self.k)
            cfg["restarts"] = (DEFAULT_RESTARTS if self.restarts is None
                               else int(self.restarts))
        if m == "spectral":
            cfg["p"] = cfg["k"] if self.p is None else int(self.p)
        if m in _KERNEL_METHODS:
            cfg["beta"] = DEFAULT_BETA if self.beta is None else float(self.beta)
        if m in _SOM_METHODS:
            rows, cols = self.grid
            cfg["grid"] = {"rows": int(rows), "cols": int(cols)}
            cfg["epochs"] = DEFAULT_EPOCHS if self.epochs is None else int(self.epochs)
            radius = (default_radius(SomGrid(int(rows), int(cols)))
                      if self.radius is None else self.radius)
            cfg["radius"] = [float(radius[0]), float(radius[1])]
            if m == "spectral-som":
                cfg["p"] = (int(rows) * int(cols) if self.p is None else int(self.p))
        return cfg


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def document_bytes(doc: dict) -> bytes:
    """Serialize a document dict to its canonical UTF-8 form."""
    return (json.dumps(doc, indent=2, ensure_ascii=False,
                       default=_json_default) + "\n").encode("utf-8")


def _write_bytes(path, data: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(data)


def _read_text(source) -> str:
    if hasattr(source, "read"):
        raw = source.read()
        return raw.decode("utf-8") if isinstance(raw, bytes) else raw
    try:
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {source}: {exc}") from exc


def read_document(path) -> dict:
    """Read a JSON document file, mapping malformed content to ParseError."""
    text = _read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from exc
    if not isinstance(doc, dict):
        raise ParseError("document root must be a JSON object")
    return doc


def load_partition_document(path) -> dict:
    doc = read_document(path)
    if doc.get("schema") != PARTITION_SCHEMA:
        raise ParseError(
            f"not a partition document (schema {doc.get('schema')!r})")
    table = doc.get("assignment")
    if not isinstance(table, dict) or not table:
        raise ParseError("partition document lacks an assignment table")
    for label, cluster in table.items():
        if not isinstance(cluster, int):
            raise ParseError(f"cluster id for {label!r} must be an integer")
    return doc


def partition_for_graph(doc: dict, g: WeightedGraph) -> Partition:
    """Rebuild the Partition of ``g`` recorded in a partition document.

    The document must cover exactly the graph's vertex labels; a vertex on
    either side without a counterpart is reported by name.
    """
    table = doc["assignment"]
    for label in g.labels:
        if label not in table:
            raise UsageError(f"partition does not cover vertex {label!r}")
    extra = set(table) - set(g.labels)
    if extra:
        raise UsageError(
            f"partition mentions vertex {sorted(extra)[0]!r} not in the graph")
    assignment = np.array([table[label] for label in g.labels], dtype=np.int64)
    k = doc.get("num_clusters", int(assignment.max()) + 1)
    try:
        return Partition(assignment, int(k), str(doc.get("method", "")),
                         doc.get("params", {}))
    except ValueError as exc:
        raise ParseError(f"inconsistent partition document: {exc}") from exc


def model_from_document(doc: dict) -> SomModel:
    """Rebuild the trained map stored under a document's ``model`` key."""
    block = doc.get("model")
    if block is None:
        raise UsageError("document holds no trained map; "
                         "pass a partition produced by a som method")
    try:
        grid = SomGrid(int(block["grid"]["rows"]), int(block["grid"]["cols"]))
        return SomModel(grid,
                        np.array(block["gamma"], dtype=np.float64),
                        np.array(block["assignment"], dtype=np.int64),
                        np.array(block["energy_trace"], dtype=np.float64),
                        block.get("params", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed model block: {exc}") from exc


def _model_block(model: SomModel) -> dict:
    return {"grid": {"rows": model.grid.rows, "cols": model.grid.cols},
            "params": dict(model.params),
            "energy_trace": model.energy_trace,
            "assignment": model.assignment,
            "gamma": model.gamma}


def partition_document(g: WeightedGraph, part: Partition, config: dict,
                       model: SomModel | None = None) -> dict:
    doc = {"schema": PARTITION_SCHEMA,
           "schema_version": SCHEMA_VERSION,
           "method": part.method_tag,
           "seed": config.get("seed"),
           "num_clusters": int(part.k),
           "params": dict(part.params),
           "assignment": {label: int(c)
                          for label, c in zip(g.labels, part.assignment)}}
    if model is not None:
        doc["model"] = _model_block(model)
    return doc


def report_document(g: WeightedGraph, part: Partition, config: dict) -> dict:
    """Statistics report: size distribution plus both modularity variants.

    The q scores are rounded to 4 decimals; everything else is exact.
    """
    stats = partition_stats(g, part)
    return {
        "schema": REPORT_SCHEMA,
        "schema_version": SCHEMA_VERSION,
        "config": config,
        "graph": {"vertices": g.num_vertices, "edges": g.num_edges,
                  "total_weight": g.total_weight},
        "partition": {
            "num_clusters": stats.num_clusters,
            "num_singletons": stats.num_singletons,
            "max_size": stats.max_size,
            "median_size": stats.median_size,
            "third_quartile_size": stats.third_quartile_size,
            "q_modularity": round(q_modularity(g, part, weighted=True), 4),
            "q_modularity_unweighted": round(q_modularity(g, part, weighted=False), 4),
        },
    }


def _load_graph(path) -> WeightedGraph:
    if not hasattr(path, "read") and not os.path.exists(path):
        raise ParseError(f"cannot read {path}: no such file")
    try:
        return load_edge_list(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def run_cluster(config: RunConfig) -> dict:
    """Cluster a graph per the config; write the partition and any report.

    Returns ``{"partition": doc, "report": doc or None}`` with the documents
    that were written.
    """
    cfg = config.resolved()
    g = _load_graph(config.input)
    method = config.method
    model = None
    if method == "spectral":
        part = spectral_clustering(g, cfg["p"], cfg["k"], config.seed,
                                   cfg["restarts"]).partition
    elif method == "kernel-kmeans":
        kern = heat_kernel(g.laplacian(), cfg["beta"])
        part = kernel_kmeans(kern, cfg["k"], config.seed, cfg["restarts"]).partition
    else:
        grid = SomGrid(cfg["grid"]["rows"], cfg["grid"]["cols"])
        radius = (cfg["radius"][0], cfg["radius"][1])
        if method == "spectral-som":
            model = spectral_som(g, cfg["p"], grid, cfg["epochs"], radius,
                                 config.seed)
        else:
            kern = heat_kernel(g.laplacian(), cfg["beta"])
            model = batch_kernel_som(kern, grid, cfg["epochs"], radius,
                                     config.seed)
        part = som_partition(model)

    pdoc = partition_document(g, part, cfg, model)
    _write_bytes(config.out, document_bytes(pdoc))
    rdoc = None
    if config.report is not None:
        rdoc = report_document(g, part, cfg)
        _write_bytes(config.report, document_bytes(rdoc))
    return {"partition": pdoc, "report": rdoc}


@dataclass(frozen=True, eq=False)
class AttributeTable:
    """Per-vertex attribute records with keys typed numeric or categorical."""

    numeric_keys: tuple[str, ...]
    categorical_keys: tuple[str, ...]
    records: Mapping[str, Mapping[str, float | str]]

    def __post_init__(self):
        object.__setattr__(self, "records",
                           {v: dict(kv) for v, kv in dict(self.records).items()})


def parse_attribute_table(source: str | os.PathLike | IO) -> AttributeTable:
    """Read a tab-separated attribute table.

    Data lines are ``vertex<TAB>key<TAB>value``. An optional first line
    ``!schema<TAB>key:numeric<TAB>key:categorical...`` declares key types;
    undeclared keys are categorical. Values of numeric keys must parse as
    finite reals. Blank lines and ``#`` comments are skipped.
    """
    text = _read_text(source)
    numeric: set[str] = set()
    categorical: set[str] = set()
    records: dict[str, dict[str, float | str]] = {}
    saw_schema = False
    saw_data = False
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = line.rstrip("\r\n").split("\t")
        if parts[0] == "!schema":
            if saw_schema or saw_data:
                raise ParseError("!schema must be the first content line",
                                 lineno)
            saw_schema = True
            for entry in parts[1:]:
                key, sep, kind = entry.partition(":")
                if not sep or not key:
                    raise ParseError(f"bad schema entry {entry!r}, "
                                     "expected key:numeric or key:categorical",
                                     lineno)
                if kind == "numeric":
                    numeric.add(key)
                elif kind == "categorical":
                    categorical.add(key)
                else:
                    raise ParseError(f"unknown attribute type {kind!r}", lineno)
                if key in numeric and key in categorical:
                    raise ParseError(f"key {key!r} declared both numeric "
                                     "and categorical", lineno)
            continue
        if len(parts) != 3:
            raise ParseError("expected vertex<TAB>key<TAB>value", lineno)
        vertex, key, raw = parts
        if not vertex.strip() or not key.strip():
            raise ParseError("vertex and key must be nonempty", lineno)
        vertex, key = vertex.strip(), key.strip()
        saw_data = True
        if key in numeric:
            try:
                value: float | str = float(raw)
            except ValueError:
                raise ParseError(f"numeric key {key!r} has non-numeric "
                                 f"value {raw!r}", lineno) from None
            if not np.isfinite(value):
                raise ParseError(f"numeric key {key!r} has non-finite "
                                 f"value {raw!r}", lineno)
        else:
            categorical.add(key)
            value = raw
        record = records.setdefault(vertex, {})
        if key in record:
            raise ParseError(f"duplicate attribute {key!r} for vertex "
                             f"{vertex!r}", lineno)
        record[key] = value
    if not records:
        raise ParseError("attribute table holds no records")
    return AttributeTable(tuple(sorted(numeric)), tuple(sorted(categorical)),
                          records)


def attribute_summary(partition_doc: dict, table: AttributeTable) -> dict:
    """Per-cluster attribute statistics.

    Numeric keys get the mean and population standard deviation over the
    cluster members that carry the key; categorical keys get a frequency
    distribution sorted by descending count. Members without a key are
    excluded and counted as missing.
    """
    assignment = partition_doc["assignment"]
    unknown = sorted(set(table.records) - set(assignment))
    if unknown:
        raise UsageError(
            f"attribute table mentions vertex {unknown[0]!r} not in the partition")
    k = int(partition_doc.get("num_clusters", max(assignment.values()) + 1))
    members: list[list[str]] = [[] for _ in range(k)]
    for label, cluster in assignment.items():
        if not 0 <= cluster < k:
            raise ParseError(f"cluster id {cluster} for vertex {label!r} "
                             f"outside 0..{k - 1}")
        members[cluster].append(label)

    clusters = []
    for c in range(k):
        labels = members[c]
        size = len(labels)
        numeric = {}
        for key in table.numeric_keys:
            vals = [table.records[lb][key] for lb in labels
                    if key in table.records.get(lb, ())]
            entry: dict[str, object] = {"count": len(vals),
                                        "missing": size - len(vals)}
            if vals:
                arr = np.array(vals, dtype=np.float64)
                entry["mean"] = float(arr.mean())
                entry["std"] = float(arr.std())
            else:
                entry["mean"] = None
                entry["std"] = None
            numeric[key] = entry
        categorical = {}
        for key in table.categorical_keys:
            vals = [table.records[lb][key] for lb in labels
                    if key in table.records.get(lb, ())]
            counts = Counter(vals)
            present = len(vals)
            dist = [{"value": value, "count": count,
                     "fraction": count / present}
                    for value, count in sorted(counts.items(),
                                               key=lambda kv: (-kv[1], kv[0]))]
            categorical[key] = {"count": present, "missing": size - present,
                                "distribution": dist}
        clusters.append({"cluster": c, "size": size,
                         "numeric": numeric, "categorical": categorical})
    return {"schema": ATTRIBUTE_SUMMARY_SCHEMA,
            "schema_version": SCHEMA_VERSION,
            "numeric_keys": list(table.numeric_keys),
            "categorical_keys": list(table.categorical_keys),
            "clusters": clusters}


def run_attribute_summary(partition_path, attributes_path,
                          out_path=None) -> dict:
    """Summarize an attribute table per cluster; optionally write the document."""
    doc = load_partition_document(partition_path)
    table = parse_attribute_table(attributes_path)
    summary = attribute_summary(doc, table)
    if out_path is not None:
        _write_bytes(out_path, document_bytes(summary))
    return summary


def _training_data(g: WeightedGraph, model: SomModel):
    """Rebuild the feature view the map was trained on, from its params."""
    method = str(model.params.get("method", ""))
    if method == "kernel-som":
        beta = model.params.get("beta")
        if beta is None:
            raise UsageError("model does not record the beta it was trained with")
        return heat_kernel(g.laplacian(), float(beta))
    if method == "spectral-som":
        p = model.params.get("p")
        if p is None:
            raise UsageError("model does not record the embedding width p")
        return spectral_embedding(g.laplacian(), int(p))
    raise UsageError(f"cannot rebuild training data for method {method!r}")


def run_layout(mode: str, input_path, *, partition_path=None, model_path=None,
               svg_path, dot_path=None, iterations=None, seed=0):
    """Render a scene for a graph and a stored partition or map.

    Modes: ``summary`` draws the cluster summary graph force-directed;
    ``map`` draws glyphs on the unit lattice over the u-matrix; ``full``
    draws every vertex inside its unit's cell. ``map`` and ``full`` need a
    document with a model block. Returns the scene that was rendered.
    """
    if mode not in ("summary", "map", "full"):
        raise UsageError(f"unknown mode {mode!r}; expected summary, map, or full")
    if (partition_path is None) == (model_path is None):
        raise UsageError("exactly one of --partition and --model is required")
    if mode in ("map", "full") and model_path is None:
        raise UsageError(f"mode {mode} requires --model")
    if iterations is not None and iterations < 1:
        raise UsageError(f"--iterations must be at least 1, got {iterations}")
    if mode == "map" and iterations is not None:
        raise UsageError("--iterations does not apply to map mode")

    g = _load_graph(input_path)
    if mode == "summary":
        doc = load_partition_document(partition_path or model_path)
        part = partition_for_graph(doc, g)
        sg = summary_graph(g, part)
        scene = force_directed_layout(
            sg, SUMMARY_ITERATIONS if iterations is None else iterations,
            _SUMMARY_FRAME, seed)
        svg = render_svg(scene)
        dot_subject = sg
    else:
        doc = load_partition_document(model_path)
        model = model_from_document(doc)
        if model.num_vertices != g.num_vertices:
            raise UsageError(
                f"model was trained on {model.num_vertices} vertices, "
                f"graph has {g.num_vertices}")
        if mode == "map":
            part = som_partition(model)
            sg = summary_graph(g, part)
            scene = som_map_scene(model, sg)
            raster = u_matrix(model, _training_data(g, model)).upsampled(8)
            svg = render_svg(scene, umatrix=raster)
            dot_subject = sg
        else:
            scene = constrained_full_layout(
                g, model, FULL_ITERATIONS if iterations is None else iterations,
                seed)
            svg = render_svg(scene)
            dot_subject = g

    _write_bytes(svg_path, svg)
    if dot_path is not None:
        _write_bytes(dot_path, export_dot(dot_subject, scene))
    return scene


def run_stats(input_path, partition_path) -> dict:
    """Report document for a stored partition against its graph."""
    g = _load_graph(input_path)
    doc = load_partition_document(partition_path)
    part = partition_for_graph(doc, g)
    config = {"input": str(input_path), "partition": str(partition_path),
              "method": doc.get("method")}
    return report_document(g, part, config)

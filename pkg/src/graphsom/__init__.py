"""Spectral and kernel self-organizing-map clustering for weighted graphs."""

from .cluster import (
    KMeansResult,
    PartitionStats,
    kernel_distance_sq,
    kernel_kmeans,
    kmeans,
    partition_stats,
    q_modularity,
    spectral_clustering,
)
from .errors import NumericalError, ParseError, UsageError
from .graph import (
    ClusterSummaryGraph,
    Partition,
    SummaryEdge,
    SummaryNode,
    WeightedGraph,
    load_edge_list,
    summary_graph,
)
from .layout import (
    CELL_SIDE,
    LayoutScene,
    Rect,
    constrained_full_layout,
    force_directed_layout,
    som_map_scene,
)
from .linalg import (
    EigenDecomposition,
    KernelMatrix,
    eigendecompose_symmetric,
    heat_kernel,
    kernel_feature_coordinates,
    spectral_embedding,
)
from .pipeline import (
    AttributeTable,
    RunConfig,
    attribute_summary,
    document_bytes,
    load_partition_document,
    model_from_document,
    parse_attribute_table,
    partition_for_graph,
    read_document,
    run_attribute_summary,
    run_cluster,
    run_layout,
    run_stats,
)
from .render import DEFAULT_PALETTE, export_dot, render_svg
from .som import (
    SomGrid,
    SomModel,
    UMatrix,
    batch_kernel_som,
    batch_som,
    default_radius,
    som_partition,
    spectral_som,
    u_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "NumericalError",
    "ParseError",
    "UsageError",
    "WeightedGraph",
    "Partition",
    "SummaryNode",
    "SummaryEdge",
    "ClusterSummaryGraph",
    "load_edge_list",
    "summary_graph",
    "EigenDecomposition",
    "KernelMatrix",
    "eigendecompose_symmetric",
    "heat_kernel",
    "spectral_embedding",
    "kernel_feature_coordinates",
    "KMeansResult",
    "PartitionStats",
    "kmeans",
    "kernel_kmeans",
    "spectral_clustering",
    "kernel_distance_sq",
    "q_modularity",
    "partition_stats",
    "SomGrid",
    "SomModel",
    "UMatrix",
    "batch_som",
    "batch_kernel_som",
    "spectral_som",
    "u_matrix",
    "som_partition",
    "default_radius",
    "Rect",
    "LayoutScene",
    "CELL_SIDE",
    "force_directed_layout",
    "som_map_scene",
    "constrained_full_layout",
    "render_svg",
    "export_dot",
    "DEFAULT_PALETTE",
    "RunConfig",
    "AttributeTable",
    "run_cluster",
    "run_attribute_summary",
    "run_layout",
    "run_stats",
    "parse_attribute_table",
    "attribute_summary",
    "document_bytes",
    "read_document",
    "load_partition_document",
    "partition_for_graph",
    "model_from_document",
    "__version__",
]

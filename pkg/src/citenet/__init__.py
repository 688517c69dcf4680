"""Citation-network analytics: knowledge scores, value laws, layout, topics."""

from .community import Partition, label_propagation, modularity, nmi
from .graph_store import (
    CitationGraph,
    GraphDataError,
    IngestOptions,
    PaperRecord,
    annual_counts,
    ingest,
    snapshot,
    temporal_violations,
)
from .kqi import (
    EncodingTree,
    EntropyReport,
    KqiScores,
    aggregate_scores,
    build_encoding_tree,
    kqi_per_node,
    kqi_total,
    shannon_entropy_h1,
    structural_entropy,
)
from .laws import LawSeries, SlopeFit, count_connected_subgraphs, fit_loglog, law_series
from .topic_tree import (
    ConceptCorpus,
    CooccurrenceGraph,
    TopicTree,
    build_cooccurrence,
    build_topic_tree,
    keyword_mutual_information,
    label_topics,
)
from .vsan import (
    BlockGraph,
    LayoutConfig,
    PositionMap,
    build_block_graph,
    fine_tune,
    force_layout,
    layout_blocks,
    layout_quality,
    layout_subgraphs,
    segment_graph,
    stitch,
    vsan_pipeline,
)

__version__ = "0.1.0"

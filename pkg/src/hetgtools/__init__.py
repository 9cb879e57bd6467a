"""Heterogeneous-graph toolkit.

Builds composed (metapath) semantic graphs with trie-guided reuse,
restructures them around a maximum bipartite matching into
community-shaped subgraphs, and replays aggregation traces against an
LRU vertex-feature buffer to quantify computation, memory-access, and
replacement reductions.
"""

from .model import (
    Csr,
    EdgeFileError,
    HetGraph,
    HetgError,
    InfeasibleConfigError,
    InvalidMetapathError,
    Metapath,
    Relation,
    RelationSpec,
    SchemaError,
    SemanticGraph,
    SynthConfig,
    VertexType,
    generate_synthetic,
    load_graph,
    parse_synth_config,
    relation_adjacency,
    rng_stream,
    save_graph,
)
from .builder import (
    Builder,
    CallbackTrie,
    CompositionError,
    CostReport,
    GenerationPlan,
    SemanticCache,
    compose,
    enumerate_metapaths,
    init_trie,
    store_semantic_graph,
)
from .restructure import (
    BackbonePartition,
    Diagnostics,
    Matching,
    PartitionSubgraph,
    PartitionVerificationError,
    load_partition,
    maximum_matching,
    partition_graph,
    restructure,
    save_partition,
    verify_partition,
)
from .bufsim import (
    LayoutComparison,
    SimConfig,
    SimReport,
    TraceUnit,
    compare_layouts,
    graph_schedule,
    restructured_schedule,
    simulate_buffer,
)

__version__ = "0.1.0"

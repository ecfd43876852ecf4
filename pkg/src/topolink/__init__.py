"""Topology-aware link prediction.

Blends node centrality and neighborhood-similarity scores into per-edge
features for a GraphSAGE-style encoder, trains it end to end against
sampled negatives, and evaluates with AUC / average precision / Hits@k.
Includes a CLI harness for multi-seed experiments, measure-combination
ablations and weight sweeps.
"""

from .errors import (
    AlignmentError,
    ConvergenceError,
    ConversionError,
    GraphConstructionError,
    LoadError,
    NumericError,
    ParseError,
    SamplingError,
    ShapeError,
    SplitError,
    TopolinkError,
    TrainingAbort,
)
from .graph import (
    Graph,
    ParseReport,
    build_graph,
    load_edge_file,
    load_feature_file,
    load_node_features,
    parse_edge_list,
    save_edge_list,
)
from .split import DataSplit, load_split_bundle, sample_negatives, save_split_bundle, split_edges
from .topo import (
    CENTRALITIES,
    SIMILARITIES,
    NodeScores,
    TopoScore,
    adamic_adar,
    betweenness_centrality,
    degree_centrality,
    eigenvector_centrality,
    jaccard,
    minmax_normalize,
    resource_allocation,
    topo_score,
)
from .tensor import SparseInput, Tensor, backward, bce_loss, load_checkpoint, save_checkpoint
from .optim import Adam
from .layers import (
    EncoderConfig,
    SageLayerParams,
    baseline_sage_forward,
    edge_sage_forward,
    encode,
    init_encoder,
)
from .metrics import MetricsReport, auc, average_precision, confusion, hits_at_k
from .train import (
    HeadParams,
    TrainConfig,
    TrainedModel,
    evaluate,
    head_forward,
    head_score,
    train,
)

__version__ = "0.1.0"

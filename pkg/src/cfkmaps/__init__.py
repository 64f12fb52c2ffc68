"""Critical Fortuin-Kasteleyn planar maps from burger words.

A library and CLI around the correspondence between fully reduced words
on the five-letter burger alphabet and subgraph-decorated planar maps:
word reduction and matching, exact small-size enumeration, rejection
samplers, loop statistics, and certified local neighborhoods of the
infinite-volume limit.
"""

from .words import (
    Word,
    Matching,
    Reduction,
    parse_word,
    format_word,
    word_to_text,
    word_from_text,
    reduce_word,
    match_locally,
    word_distance,
    dual_word,
)
from .model import ModelParams, letter_weight, word_probability, p_from_q, q_from_p
from .sampler import (
    InfiniteWordSource,
    RetryCapExceeded,
    enumerate_Wn,
    sample_Wn,
    sample_Wn_batch,
)
from .maps import (
    Ball,
    CombinatorialMap,
    MapError,
    SubgraphRootedMap,
    ball,
    canonical_key,
    dual,
    dual_subgraph,
    enumerate_maps,
    enumerate_rooted_maps,
    isomorphic,
    loop_count_euler,
    loop_count_trace,
    map_distance,
    map_from_text,
    map_to_text,
    validate,
)
from .bijection import (
    ArchGraph,
    BijectionError,
    TriangulationSplit,
    build_arch_graph,
    arch_graph_to_word,
    split_triangulation,
    tutte_map,
    psi,
    psi_inverse,
    dual_image,
    loop_tree_encode,
    loop_tree_decode,
    enumerate_plane_trees,
)

__version__ = "0.1.0"

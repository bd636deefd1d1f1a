"""senseforge: word sense induction, selection, and evaluation toolkit."""

from .clustering import (Assignment, Cluster, ClusterModel, CrpParams, SenseGraph,
                         cosine_distance, cosine_similarity, crp_cluster,
                         kmeans_adaptive, kmeans_assign, load_model,
                         personalized_pagerank, random_walk_disambiguate,
                         reduce_small_clusters, save_model,
                         sense_graph_from_inventory)
from .embeddings import (ContextSpec, EmbeddingStore, average_vector, context_vector,
                         default_stopwords, definition_vector, example_vector,
                         load_embeddings, load_stopwords)
from .lexicon import (Sense, SenseInventory, WordType, ambiguous_types,
                      dump_inventory, load_inventory, senses_with_definition,
                      senses_with_example)
from .metrics import (AlignedTriple, Confusion, LabeledInstances, RhoResult,
                      WsiReport, confusion_matrix, paired_f1, parse_alignments,
                      rho, v_score, wsi_report)
from .sense_select import (AttentionParams, SenseEmbeddingTable, SenseWeights,
                           att_context, att_scores, att_weights, avg_weights,
                           concat_token, grad_check, init_att_ini, top_sense,
                           weighted_sense)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]

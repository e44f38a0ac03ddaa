"""Subsequence retrieval over sequence databases with a reference-net metric index."""

from .baselines import (MVIndex, WorkCounter, build_mv_index, compare_pruning,
                        linear_scan_range, mv_range_query, mv_select_references)
from .distances import (DistanceSpec, Violation, check_consistency, check_metric_axioms, dfd,
                        dtw, erp, euclidean, hamming, levenshtein, make_distance)
from .errors import *  # noqa: F401,F403
from .kernels import BACKEND
from .matching import (NearestMatch, SegmentMatch, SubseqIndex, SubsequencePair,
                       brute_force_oracle, build_index, candidate_pairs, expand_candidate,
                       query_type1, query_type2, query_type3)
from .refnet import NetConfig, NetReport, NetStats, RangeResult, ReferenceNet
from .segmentation import (QuerySegment, SegmentationParams, WindowRef,
                           extract_query_segments, partition_windows)
from .sequence import (Dataset, Element, Sequence, Span, element_distance, load_dataset,
                       parse_string_dataset, parse_timeseries_dataset)

__version__ = "0.1.0"

"""Stroke fragmentation into lines and circular arcs with a structured HMM."""
from .features import ObservationSeq, Observation, extract_observations
from .fragmenter import FragConfig, Fragmentation, PrimitiveKind, Segment, fragment, segments_from_path
from .geometry import DegenerateStroke, RawStroke, ResampleConfig, ResampledStroke, choose_resample_step, resample
from .hmm import StatePath, path_log_score, viterbi
from .model_zoo import HmmModel, ModelParams, build_ergodic_baseline, build_model, build_structured_model

__version__ = "0.1.0"

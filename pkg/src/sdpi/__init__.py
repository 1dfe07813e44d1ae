"""Strong data processing (contraction) coefficients of finite channels."""

__version__ = "0.1.0"

from sdpi.model import Channel, Distribution, ChannelError, parse_channel, dump_channel, validate_pair
from sdpi.divergence import DivergenceKind, df, df_binary, mutual_information
from sdpi.binary_solver import BinaryProblem, BinarySolution, ratio_at, diagonal_limit, solve_binary
from sdpi.contraction import (
    ContractionResult,
    EnvelopeCurve,
    eta_f,
    hellinger_diameter,
    sandwich_bounds,
    trace_envelope,
)
from sdpi.post_sdpi import PostProblem, PostResult, mixture_post_ratio, post_ratio, post_eta
from sdpi.oracle import (
    OracleReport, binary_dominates, envelope_dominates, lagrangian_gap, sample_ratio,
    verify_post, verify_reduction,
)

__all__ = [
    "Channel", "Distribution", "ChannelError", "parse_channel", "dump_channel", "validate_pair",
    "DivergenceKind", "df", "df_binary", "mutual_information",
    "BinaryProblem", "BinarySolution", "ratio_at", "diagonal_limit", "solve_binary",
    "ContractionResult", "EnvelopeCurve", "eta_f", "hellinger_diameter", "sandwich_bounds",
    "trace_envelope", "PostProblem", "PostResult", "post_ratio", "post_eta", "mixture_post_ratio",
    "OracleReport", "sample_ratio", "verify_reduction", "lagrangian_gap", "binary_dominates",
    "envelope_dominates", "verify_post",
]

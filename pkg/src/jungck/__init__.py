"""Common fixed points of contraction pairs: certification, Jungck iteration, finite oracle."""
from .contraction_pair import (
    AffineMap,
    CertificationReport,
    SelfMapPair,
    certify_finite,
    certify_sampled,
    check_inequality_at,
    m_value,
)
from .control_functions import (
    Constant,
    ControlTriple,
    ExprFunction,
    Identity,
    Power,
    Saturating,
    check_altering_distance,
    check_control_pair,
)
from .expr_lang import evaluate, parse, to_text
from .finite_oracle import generate_instance, oracle_report, run_campaign, verify_theorems
from .jungck_solver import (
    cauchy_crossing_indices,
    check_inclusion,
    extract_poc,
    iterate,
    lemma_limit_estimates,
    resolve_T_preimage,
)
from .metric_core import EuclideanDomain, FiniteMetricSpace, distance, validate_metric

__version__ = "0.1.0"

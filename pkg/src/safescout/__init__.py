"""Active identification of safe Voronoi cells from binary trust feedback."""
from .classifier import ClassificationResult, SafeRegionClassifier, classify, threshold
from .environment import EnvironmentSpec, nearest_center, table1_environment, validate
from .estimation import CellStatistics, c_measure, estimate, estimation_error, record_observation
from .learner import ActiveParameterLearner, LearnerConfig, RunLog, replay, run
from .oracle import TrustOracle
from .policy import PolicyConfig, check_elimination, distribution_form, select_next

__all__ = [
    "ActiveParameterLearner", "CellStatistics", "ClassificationResult", "EnvironmentSpec",
    "LearnerConfig", "PolicyConfig", "RunLog", "SafeRegionClassifier", "TrustOracle",
    "c_measure", "check_elimination", "classify", "distribution_form", "estimate",
    "estimation_error", "nearest_center", "record_observation", "replay", "run",
    "select_next", "table1_environment", "threshold", "validate",
]

__version__ = "0.1.0"

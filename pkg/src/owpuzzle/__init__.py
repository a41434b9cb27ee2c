"""Probability estimation from distributional inverters, and its Kolmogorov-complexity consequences."""
from ._kernels import BACKEND
from .dist import BitString, FiniteDistribution, SeededRng, statistical_distance
from .estimator import check_guarantee, estimate_probability
from .hashing import HashFamily, HashFunction, sample_hash
from .inverter import ConstantInverter, ExactInverter, NoisyInverter
from .puzzle import PuzzleInstance, distributional_security, samp_candidate
from .qsim import Circuit, Gate, output_distribution

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BitString", "Circuit", "ConstantInverter", "ExactInverter", "FiniteDistribution",
    "Gate", "HashFamily", "HashFunction", "NoisyInverter", "PuzzleInstance", "SeededRng",
    "check_guarantee", "distributional_security", "estimate_probability", "output_distribution",
    "samp_candidate", "sample_hash", "statistical_distance",
]

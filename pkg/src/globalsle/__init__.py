"""Global multiple SLE: Loewner numerics, partition functions, lattice models and resampling dynamics."""

from .combinatorics import LinkPattern, catalan, enumerate_patterns
from .conformal import DomainSpec, Mobius, Parameters, make_parameters, poisson_kernel
from .loewner import Curve, DrivingFunction, extract_driver, sample_chordal_sle
from .multisle import MultiCurveState, n_kappa, resample_step, run_resampling_chain
from .partition import BoundaryConfig, PartitionProvider

__version__ = "0.1.0"

__all__ = ["LinkPattern", "catalan", "enumerate_patterns", "DomainSpec", "Mobius", "Parameters", "make_parameters",
           "poisson_kernel", "Curve", "DrivingFunction", "extract_driver", "sample_chordal_sle", "MultiCurveState",
           "n_kappa", "resample_step", "run_resampling_chain", "BoundaryConfig", "PartitionProvider"]

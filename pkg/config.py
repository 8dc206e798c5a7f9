import os
import logging
import tempfile

# Logging level from environment variable
LOG_LEVEL = os.getenv('CULAB_LOG_LEVEL', 'INFO').upper()

# Configure logging
logging.basicConfig(level=getattr(logging, LOG_LEVEL, logging.INFO),
                   format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

# Default seed for instance generation and suites
DEFAULT_SEED = int(os.getenv('CULAB_SEED', '20240601'))

# Directory for generated instances and reports
OUTPUT_DIR = os.getenv('CULAB_OUTPUT_DIR', os.path.join(tempfile.gettempdir(), 'culab_output'))

# Make sure the output directory exists
os.makedirs(OUTPUT_DIR, exist_ok=True)

# Numeric tolerances
NORMALITY_TOL = 1e-10      # relative to max(1, ||x||^2)
EIGENBASIS_TOL = 1e-9      # relative to max(1, ||x||)
CLUSTER_REL_TOL = 1e-8     # eigenvalue clustering, relative to ||x||
UNITARY_TOL = 1e-10
WITNESS_TOL = 1e-9
TRIANGLE_TOL = 1e-9
MATCH_TOL = 1e-12          # distances closer than this are treated as equal

# Cauchy construction safety cap and the per-step envelope decay it must show
MAX_EXACT_LIFT_STEPS = 40
EXACT_LIFT_MIN_DECAY = 1.8


class CuLabError(Exception):
    """Base class for every error raised by the laboratory."""


class ConfigError(CuLabError):
    """Malformed experiment configuration or command line input."""


class RegionMismatch(CuLabError):
    """Objects living on different regions or target dimensions were combined."""


class DomainError(CuLabError):
    """A point, atom or eigenvalue lies outside the region beyond its resolution."""


class PreconditionError(CuLabError):
    """An operation was called outside its documented precondition."""


class NormalityError(CuLabError):
    """A matrix failed the normality or unitarity certificate."""


class CertificateError(CuLabError):
    """A cover certificate or the lifting bound failed after construction."""


class ConvergenceError(CuLabError):
    """A sequence did not converge at the required rate."""


class ScheduleError(CuLabError):
    """Unknown suite, unknown instance id or an unusable output path."""

"""Classical simulation and optimization of quantum partial search with
several target blocks and several target items per block."""

from .config import QuerySchedule, SearchGeometry, validate_geometry
from .errors import QPartialError

__version__ = "0.1.0"

__all__ = ["QPartialError", "QuerySchedule", "SearchGeometry", "__version__", "validate_geometry"]

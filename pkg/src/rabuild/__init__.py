"""Chamber systems of regular right-angled buildings, with unfoldable
complexes of groups, verified coverings, and symmetry certificates."""

from .building import Building
from .coxeter import CoxeterSystem
from .graphprod import GraphProduct

__all__ = ["Building", "CoxeterSystem", "GraphProduct"]
__version__ = "0.1.0"

"""finsite: a finite-site workbench.

Finite categories as composition tables, sites and their sieve topologies,
sheafification, chase-built models, and the lattice-embedding corollary,
each backed by executable law checks at desk scale.
"""

from .fincat import FinCategory, FunctorData, NatTransData, SetValuedFunctor
from .site import Family, SiteSpec
from .models import Model, ModelBound

__all__ = [
    "FinCategory", "FunctorData", "NatTransData", "SetValuedFunctor",
    "Family", "SiteSpec", "Model", "ModelBound",
]

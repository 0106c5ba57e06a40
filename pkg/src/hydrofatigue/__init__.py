"""Phase field simulation of hydrogen-assisted fatigue crack growth.

Subpackages cover constitutive functions (material), quadrilateral finite
elements and structured mesh generation (elements, mesh), sparse operator
assembly for the coupled deformation-diffusion-damage problem (assembly),
the staggered time-stepping driver (solver), a semi-analytical smooth
specimen S-N engine (homog), post-processing (post) and a JSON-configured
command line interface (config, cli).
"""

__version__ = "0.1.0"

from .material import (  # noqa: F401
    GAS_CONSTANT,
    Environment,
    FatigueLaw,
    MATERIAL_PRESETS,
    MaterialParams,
    Split,
)

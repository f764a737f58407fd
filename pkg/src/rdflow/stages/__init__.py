"""Built-in flow stages: placement, legalization, routing, netlist mapping.

Each stage is a pure function over a frozen design (plus stage-specific
inputs) returning new data; callers apply results explicitly. All stages
are deterministic for a fixed seed.
"""

from .place import PlacementResult, apply_placement, place_global  # noqa: F401
from .legalize import legalize  # noqa: F401
from .synth import synthesize  # noqa: F401
from .groute import gr_nets_from_design, route_global, route_gr_nets  # noqa: F401
from .droute import route_detailed  # noqa: F401

"""Mapping stage: verify every instance resolves to a library cell.

No restructuring happens here; netlists arrive already mapped. The stage
exists so flows can swap in a real synthesis tool while the built-in
path just validates the mapping and passes the design through.
"""

from __future__ import annotations

from ..errors import UnmappedCell
from ..model import Design
from ..timinglib import TimingLibrary


def synthesize(design: Design, library: TimingLibrary) -> Design:
    """Check that each instance's master exists in the timing library."""
    for name in sorted(design.instances):
        inst = design.instances[name]
        if inst.master_name not in library.cells:
            raise UnmappedCell(inst.master_name, name)
    return design

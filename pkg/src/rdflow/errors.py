"""Exception hierarchy shared by all rdflow modules.

Parsers raise ParseError subclasses only; anything else escaping a parser
is a bug (the fuzz suite enforces this). Checker, timing, stage, and flow
errors each get a small family so callers can catch at the right width.
"""


class RdflowError(Exception):
    """Base class for every error raised by this package."""


# ---------------------------------------------------------------- parsing


class ParseError(RdflowError):
    """Malformed input text. Carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BehavioralConstruct(ParseError):
    """Non-structural Verilog (always blocks, assigns with expressions)."""


class MissingTemplate(ParseError):
    """Liberty table references an undefined lu_table_template."""


class UnknownLayerRef(ParseError):
    """Geometry references a layer not declared in the technology."""


class UnitsMismatch(ParseError):
    """DEF distance units conflict with the LEF-derived database units."""


class AdjustmentOutOfRange(ParseError):
    """Capacity adjustment addresses an edge outside the gcell grid."""


class NonAxisParallelSegment(ParseError):
    """Global-route segment varies in more than one coordinate."""


# ------------------------------------------------------------ design model


class DesignError(RdflowError):
    """Design database invariant violation."""


class UnresolvedReference(DesignError):
    def __init__(self, name, context):
        self.name = name
        self.context = context
        super().__init__(f"unresolved reference '{name}' ({context})")


class Unplaced(DesignError):
    """Operation requires a placed instance."""


class FrozenDesign(DesignError):
    """Mutation attempted on a frozen design."""


# ------------------------------------------------------------ translation


class SegmentOffGrid(RdflowError):
    """Route segment endpoint falls outside the gcell grid."""


class UnknownNet(RdflowError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"net '{name}' not present in the design")


# --------------------------------------------------------------- checking


class CheckError(RdflowError):
    """Checker precondition failure."""


class UnplacedInstance(CheckError):
    pass


class MissingRule(CheckError):
    def __init__(self, layer):
        self.layer = layer
        super().__init__(f"layer '{layer}' has no spacing rule")


# ----------------------------------------------------------------- timing


class TimingError(RdflowError):
    pass


class CombinationalLoop(TimingError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("combinational loop: " + " -> ".join(self.cycle))


class UnmappedCell(TimingError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"instance master '{name}' not in the timing library")


class EmptyGraph(TimingError):
    pass


class ZeroDelay(TimingError):
    pass


class NoClock(TimingError):
    pass


# ----------------------------------------------------------------- stages


class StageError(RdflowError):
    pass


class InsufficientArea(StageError):
    pass


class CannotLegalize(StageError):
    pass


class UnreachablePin(StageError):
    def __init__(self, net, pin):
        self.net = net
        self.pin = pin
        super().__init__(f"net '{net}' pin '{pin}' is outside the routing grid")


class NoAccessPoint(StageError):
    def __init__(self, net, pin):
        self.net = net
        self.pin = pin
        super().__init__(f"net '{net}' pin '{pin}' has no track-reachable access point")


# ------------------------------------------------------------------- flow


class FlowError(RdflowError):
    pass


class ConfigError(FlowError):
    """Malformed flow configuration file."""


class StageOrderError(ConfigError):
    pass


class MissingPlaceholder(ConfigError):
    def __init__(self, stage, placeholder):
        self.stage = stage
        self.placeholder = placeholder
        super().__init__(f"stage '{stage}': command template lacks {{{placeholder}}}")


class UnknownStage(ConfigError):
    pass


class StageFailed(FlowError):
    def __init__(self, stage, detail):
        self.stage = stage
        self.detail = detail
        super().__init__(f"stage '{stage}' failed: {detail}")


class ToolNotFound(FlowError):
    def __init__(self, stage, tool):
        self.stage = stage
        self.tool = tool
        super().__init__(f"stage '{stage}': external tool '{tool}' not found")


class UnknownLayer(FlowError):
    def __init__(self, layer):
        self.layer = layer
        super().__init__(f"unknown layer '{layer}'")

"""Flow orchestration: config parsing, stage execution, plot emitters."""

from .config import DEFAULT_STAGES, STAGE_KINDS, FlowConfig, StageConfig, \
    parse_config, validate_config  # noqa: F401
from .runner import RunRecord, StageRecord, builtin_stage_kinds, \
    run_flow  # noqa: F401
from .plots import CongestionPlot, PlacementPlot, RoutedPlot, \
    emit_congestion_plot, emit_placement_plot, emit_routed_plot  # noqa: F401

"""Flow execution: stage dispatch, run directories, caching, records.

Every stage reads and writes real files in its own numbered directory
under the run directory, so external tools and builtins are
interchangeable. A stage is skipped when a cache entry keyed by its
kind, implementation, command, options, seed, and input digests points
at output files whose digests still match. record.jsonl carries the
full per-stage log including wall times; metrics.jsonl carries only
deterministic numbers so equal-seed runs compare byte for byte.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import shlex
import shutil
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..check import sorted_violations
from ..check.connectivity import check_connectivity
from ..check.congestion import congestion_map
from ..check.drc import check_min_area, check_shorts, check_spacing
from ..check.legality import check_legality
from ..check.metrics import route_metrics
from ..errors import ConfigError, FlowError, RdflowError, StageFailed, \
    ToolNotFound
from ..io.deffmt import parse_def, write_def
from ..io.guides import parse_guides, write_guides
from ..io.ispd08 import parse_gr_solution, write_gr_input, write_gr_solution
from ..io.lef import parse_lef
from ..io.liberty import parse_liberty
from ..io.sdc import parse_sdc
from ..io.verilog import parse_verilog, write_verilog
from ..model import Constraints, Design, Instance, attach_masters, \
    derive_gcell_grid
from ..sta import build_timing_graph, compute_slack, critical_path, \
    derive_clock_period, propagate, timing_report
from ..stages import apply_placement, gr_nets_from_design, legalize, \
    place_global, route_detailed, route_gr_nets, synthesize
from ..translate import translate
from .config import MANDATORY_PLACEHOLDERS, FlowConfig, StageConfig, \
    validate_config

# artifacts each stage kind consumes; their digests key the cache
_INPUTS = {
    "synth": ("verilog", "liberty"),
    "globalPlace": ("def", "lef"),
    "detailPlace": ("def", "lef"),
    "legalize": ("def", "lef"),
    "sta": ("verilog", "liberty", "sdc"),
    "size": ("verilog", "liberty", "sdc"),
    "globalRoute": ("def", "lef"),
    "translateGuides": ("routes", "def", "lef"),
    "detailRoute": ("def", "lef", "guide"),
    "check": ("def", "lef"),
}

# artifact -> output file name inside the stage directory
_OUT_FILES = {
    "synth": {"verilog": "out.v"},
    "globalPlace": {"def": "out.def"},
    "detailPlace": {"def": "out.def"},
    "legalize": {"def": "out.def"},
    "sta": {"report": "out.report"},
    "size": {"verilog": "out.v"},
    "globalRoute": {"routes": "out.routes"},
    "translateGuides": {"guide": "out.guide"},
    "detailRoute": {"def": "out.def"},
    "check": {"report": "out.report"},
}


@dataclass
class StageRecord:
    kind: str
    impl: str
    status: str  # ok | cached | failed
    wall_time: float = 0.0
    input_digests: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    output_digests: dict[str, str] = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    detail: str = ""


@dataclass
class RunRecord:
    design: str
    seed: int
    run_dir: Path
    stages: list[StageRecord] = field(default_factory=list)
    artifacts: dict[str, Path] = field(default_factory=dict)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _int_option(st: StageConfig, name: str, default: int) -> int:
    try:
        return int(st.options.get(name, default))
    except ValueError:
        raise ConfigError(
            f"stage '{st.kind}': option {name} must be an integer") from None


def _float_option(st: StageConfig, name: str, default: float) -> float:
    try:
        return float(st.options.get(name, default))
    except ValueError:
        raise ConfigError(
            f"stage '{st.kind}': option {name} must be a number") from None


class _Ctx:
    def __init__(self, cfg: FlowConfig, stage: StageConfig, stage_dir: Path,
                 state: dict):
        self.cfg = cfg
        self.stage = stage
        self.stage_dir = stage_dir
        self.state = state

    def read(self, artifact: str) -> str:
        path = self.state.get(artifact)
        if path is None:
            raise StageFailed(self.stage.kind,
                              f"missing input artifact '{artifact}'")
        return Path(path).read_text()

    def write(self, artifact: str, text: str) -> Path:
        path = self.stage_dir / _OUT_FILES[self.stage.kind][artifact]
        path.write_text(text)
        return path

    def load_design(self) -> Design:
        tech, masters = parse_lef(self.read("lef"))
        design = parse_def(self.read("def"),
                           expected_dbu=tech.dbu_per_micron)
        attach_masters(design, masters)
        design.technology = tech
        design.freeze()
        return design


def _bi_synth(ctx: _Ctx):
    netlist = parse_verilog(ctx.read("verilog"))
    lib = parse_liberty(ctx.read("liberty"))
    design = Design(netlist.name)
    for inst in netlist.instances:
        design.add_instance(Instance(name=inst.name, master_name=inst.master))
    synthesize(design, lib)
    out = ctx.write("verilog", write_verilog(netlist))
    metrics = {"instances": len(netlist.instances),
               "nets": len(netlist.net_names())}
    return {"verilog": out}, metrics


def _bi_global_place(ctx: _Ctx):
    design = ctx.load_design()
    iterations = _int_option(ctx.stage, "iterations", 20)
    result = place_global(design, iterations=iterations, seed=ctx.cfg.seed)
    apply_placement(design, result)
    out = ctx.write("def", write_def(design))
    return {"def": out}, {"hpwl": result.hpwl}


def _bi_legalize(ctx: _Ctx):
    design = ctx.load_design()
    result = legalize(design)
    apply_placement(design, result)
    out = ctx.write("def", write_def(design))
    return {"def": out}, {"hpwl": result.hpwl}


def _bi_sta(ctx: _Ctx):
    netlist = parse_verilog(ctx.read("verilog"))
    lib = parse_liberty(ctx.read("liberty"))
    sdc_path = ctx.state.get("sdc")
    cons = parse_sdc(Path(sdc_path).read_text()) if sdc_path else Constraints()
    graph = build_timing_graph(netlist, lib, cons)
    propagate(graph)
    period = cons.clock_period
    if period is None:
        period = derive_clock_period(graph)
        cons = dataclasses.replace(cons, clock_period=period)
    compute_slack(graph, cons)
    out = ctx.write("report", timing_report(graph))
    _, delay = critical_path(graph)
    return {"report": out}, {
        "clockPeriodPs": graph.clock_period,
        "criticalDelayPs": delay,
        "wnsPs": graph.wns,
        "tnsPs": graph.tns,
    }


def _grid_of(design: Design):
    return design.gcell_grid if design.gcell_grid is not None \
        else derive_gcell_grid(design)


def _bi_global_route(ctx: _Ctx):
    design = ctx.load_design()
    grid = _grid_of(design)
    nets = gr_nets_from_design(design, grid)
    penalty = _float_option(ctx.stage, "penalty", 4.0)
    sol = route_gr_nets(grid, nets, penalty=penalty)
    out = ctx.write("routes", write_gr_solution(sol))
    cmap = congestion_map(sol, grid)
    metrics = {"nets": len(sol.nets), "usage": cmap.total_usage(),
               "overflow": cmap.total_overflow()}
    return {"routes": out}, metrics


def _bi_translate(ctx: _Ctx):
    design = ctx.load_design()
    layers = len(design.technology.routing_layers)
    sol = parse_gr_solution(ctx.read("routes"), num_layers=layers)
    radius = _int_option(ctx.stage, "radius", 1)
    guides = translate(sol, _grid_of(design), design, radius=radius)
    out = ctx.write("guide", write_guides(guides))
    rects = sum(len(v) for v in guides.per_net.values())
    return {"guide": out}, {"nets": len(guides.per_net), "rects": rects}


def _bi_detail_route(ctx: _Ctx):
    design = ctx.load_design()
    names = {l.name for l in design.technology.routing_layers}
    guides = parse_guides(ctx.read("guide"), routing_layers=names)
    rounds = _int_option(ctx.stage, "rounds", 3)
    route_detailed(design, guides, rounds=rounds)
    out = ctx.write("def", write_def(design))
    m = route_metrics(design, guides)
    routed = sum(1 for n in design.nets.values() if n.routing)
    return {"def": out}, {
        "routedNets": routed,
        "wirelength": m.total_wirelength,
        "vias": m.via_count,
        "wrongWay": m.wrong_way_length,
        "coverage": round(m.guide_coverage, 6),
        "shorts": len(check_shorts(design)),
    }


def _violation_lines(violations, limit=20):
    return ["  " + v.line() for v in sorted_violations(violations)[:limit]]


def _bi_check(ctx: _Ctx):
    design = ctx.load_design()
    sections = [
        ("legality", check_legality(design)),
        ("shorts", check_shorts(design)),
        ("spacing", check_spacing(design)),
        ("minArea", check_min_area(design)),
    ]
    open_nets = []
    checked = 0
    for name in sorted(design.nets):
        net = design.nets[name]
        if len(net.pins) < 2:
            continue
        checked += 1
        if check_connectivity(design, net):
            open_nets.append(name)
    lines = [f"check report for design {design.name}"]
    metrics = {}
    for title, violations in sections:
        metrics[title] = len(violations)
        lines.append(f"{title}: {len(violations)} violations")
        lines.extend(_violation_lines(violations))
    metrics["openNets"] = len(open_nets)
    metrics["checkedNets"] = checked
    lines.append(f"connectivity: {len(open_nets)} open of {checked} nets")
    lines.extend(f"  open {n}" for n in open_nets[:20])
    out = ctx.write("report", "\n".join(lines) + "\n")
    return {"report": out}, metrics


_BUILTINS = {
    "synth": _bi_synth,
    "globalPlace": _bi_global_place,
    "legalize": _bi_legalize,
    "sta": _bi_sta,
    "globalRoute": _bi_global_route,
    "translateGuides": _bi_translate,
    "detailRoute": _bi_detail_route,
    "check": _bi_check,
}


def builtin_stage_kinds() -> tuple[str, ...]:
    return tuple(sorted(_BUILTINS))


def _resolve_command(ctx: _Ctx) -> list[str]:
    mapping = {"workdir": str(ctx.stage_dir), "seed": str(ctx.cfg.seed)}
    for artifact, path in ctx.state.items():
        if path is not None:
            mapping[f"in.{artifact}"] = str(path)
    for artifact, fname in _OUT_FILES[ctx.stage.kind].items():
        mapping[f"out.{artifact}"] = str(ctx.stage_dir / fname)
    out = ctx.stage.command
    for name, value in mapping.items():
        out = out.replace("{" + name + "}", value)
    return shlex.split(out)


def _run_external(ctx: _Ctx):
    argv = _resolve_command(ctx)
    if not argv:
        raise StageFailed(ctx.stage.kind, "empty command after substitution")
    search = os.environ.get("RDF_TOOL_PATH", "")
    path = os.environ.get("PATH", os.defpath)
    exe = shutil.which(argv[0],
                       path=search + os.pathsep + path if search else path)
    if exe is None:
        raise ToolNotFound(ctx.stage.kind, argv[0])
    argv[0] = exe
    proc = subprocess.run(argv, cwd=ctx.stage_dir, capture_output=True,
                          text=True)
    (ctx.stage_dir / "stdout.log").write_text(proc.stdout)
    (ctx.stage_dir / "stderr.log").write_text(proc.stderr)
    if proc.returncode != 0:
        tail = proc.stderr.strip().splitlines()[-3:]
        raise StageFailed(ctx.stage.kind,
                          f"exit code {proc.returncode}: {' | '.join(tail)}")
    outputs = {}
    mandatory = {ph[len("out."):] for ph in
                 MANDATORY_PLACEHOLDERS[ctx.stage.kind]
                 if ph.startswith("out.")}
    for artifact, fname in _OUT_FILES[ctx.stage.kind].items():
        path = ctx.stage_dir / fname
        if path.exists():
            outputs[artifact] = path
        elif artifact in mandatory:
            raise StageFailed(ctx.stage.kind,
                              f"tool did not produce {fname}")
    return outputs, {}


def _cache_key(st: StageConfig, seed: int, digests: dict[str, str]) -> str:
    blob = json.dumps({
        "kind": st.kind, "impl": st.impl, "command": st.command,
        "options": st.options, "seed": seed, "inputs": digests,
    }, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _try_cache(cache: dict, key: str, run_dir: Path):
    entry = cache.get(key)
    if entry is None:
        return None
    outputs = {}
    digests = {}
    for artifact, (rel, digest) in entry["outputs"].items():
        path = run_dir / rel
        if not path.exists() or _digest(path) != digest:
            return None
        outputs[artifact] = path
        digests[artifact] = digest
    return outputs, digests, entry.get("metrics", {})


def run_flow(cfg: FlowConfig, run_dir=None, force: bool = False,
             until: str | None = None) -> RunRecord:
    """Execute the configured stages; returns the full run record.

    force re-executes every stage even on cache hits; until stops after
    the named stage. Raises StageFailed/ToolNotFound on the first broken
    stage, with the partial record already on disk in record.jsonl.
    """
    validate_config(cfg)
    kinds = [s.kind for s in cfg.stages]
    if until is not None and until not in kinds:
        raise ConfigError(f"until stage '{until}' is not in the stage list")
    for key in ("verilog", "liberty", "lef", "def"):
        if not cfg.design_files[key].exists():
            raise ConfigError(f"design file missing: {cfg.design_files[key]}")
    sdc = cfg.design_files.get("sdc")
    if sdc is not None and not sdc.exists():
        raise ConfigError(f"design file missing: {sdc}")

    base = Path(run_dir) if run_dir is not None else cfg.base_dir / "run"
    base.mkdir(parents=True, exist_ok=True)
    cache_path = base / "cache.json"
    cache = json.loads(cache_path.read_text()) if cache_path.exists() else {}

    state: dict[str, Path | None] = {
        "verilog": None, "liberty": None, "lef": None, "def": None,
        "sdc": None, "gr": None, "routes": None, "guide": None,
        "report": None,
    }
    for key, path in cfg.design_files.items():
        state[key] = path

    record = RunRecord(design=cfg.design_files["def"].stem, seed=cfg.seed,
                       run_dir=base)
    record_log = (base / "record.jsonl").open("w")
    metrics_log = (base / "metrics.jsonl").open("w")

    def log_stage(idx: int, sr: StageRecord):
        record.stages.append(sr)
        entry = dataclasses.asdict(sr)
        entry["stage"] = idx
        record_log.write(json.dumps(entry, sort_keys=True) + "\n")
        record_log.flush()
        if sr.status != "failed":
            metrics_log.write(json.dumps(
                {"stage": idx, "kind": sr.kind, "metrics": sr.metrics},
                sort_keys=True) + "\n")
            metrics_log.flush()

    try:
        for idx, st in enumerate(cfg.stages, start=1):
            stage_dir = base / f"{idx:02d}-{st.kind}"
            stage_dir.mkdir(exist_ok=True)
            ctx = _Ctx(cfg, st, stage_dir, state)

            if st.kind == "globalRoute":
                design = ctx.load_design()
                grid = _grid_of(design)
                gr_path = stage_dir / "in.gr"
                gr_path.write_text(
                    write_gr_input(grid, gr_nets_from_design(design, grid)))
                state["gr"] = gr_path

            digests = {a: _digest(Path(state[a]))
                       for a in _INPUTS[st.kind] if state.get(a) is not None}
            key = _cache_key(st, cfg.seed, digests)

            cached = None if force else _try_cache(cache, key, base)
            sr = StageRecord(kind=st.kind, impl=st.impl, status="ok",
                             input_digests=digests)
            if cached is not None:
                outputs, out_digests, metrics = cached
                sr.status = "cached"
                sr.outputs = {a: str(p.relative_to(base))
                              for a, p in outputs.items()}
                sr.output_digests = out_digests
                sr.metrics = metrics
            else:
                started = time.perf_counter()
                try:
                    if st.impl == "builtin":
                        outputs, metrics = _BUILTINS[st.kind](ctx)
                    else:
                        outputs, metrics = _run_external(ctx)
                except FlowError as e:
                    sr.status = "failed"
                    sr.detail = str(e)
                    log_stage(idx, sr)
                    raise
                except (RdflowError, OSError, ValueError) as e:
                    sr.status = "failed"
                    sr.detail = f"{type(e).__name__}: {e}"
                    log_stage(idx, sr)
                    raise StageFailed(st.kind, sr.detail) from e
                sr.wall_time = round(time.perf_counter() - started, 6)
                if st.kind == "globalRoute":
                    outputs = dict(outputs)
                    outputs["gr"] = state["gr"]
                sr.outputs = {a: str(p.relative_to(base))
                              for a, p in outputs.items()}
                sr.output_digests = {a: _digest(Path(p))
                                     for a, p in outputs.items()}
                sr.metrics = metrics
                cache[key] = {
                    "outputs": {a: [sr.outputs[a], sr.output_digests[a]]
                                for a in outputs},
                    "metrics": metrics,
                }
                cache_path.write_text(json.dumps(cache, sort_keys=True,
                                                 indent=1))
            log_stage(idx, sr)
            for artifact, path in (outputs if cached is None
                                   else cached[0]).items():
                state[artifact] = Path(path)
            if st.kind == until:
                break
    finally:
        record_log.close()
        metrics_log.close()

    record.artifacts = {a: p for a, p in state.items() if p is not None}
    lines = [f"flow report: design {record.design}, seed {cfg.seed}"]
    for idx, sr in enumerate(record.stages, start=1):
        nums = " ".join(f"{k}={v}" for k, v in sorted(sr.metrics.items()))
        lines.append(f"{idx:2d} {sr.kind:<16} {sr.status:<7} {nums}")
    (base / "report.txt").write_text("\n".join(lines) + "\n")
    return record

"""Flow configuration: a line-oriented, sectioned key-value file.

The first contentful line must be the schema header `rdf-config 1`.
Sections are `[design]` (input file paths, resolved relative to the
config file), `[flow]` (the ordered stage list and the run seed), and
one optional `[stage.KIND]` per stage with its implementation choice,
external command template, and free-form options. `#` starts a comment.

Example:

    rdf-config 1
    [design]
    verilog = bench.v
    liberty = bench.lib
    lef = bench.lef
    def = bench.def
    sdc = bench.sdc
    [flow]
    stages = synth globalPlace legalize sta globalRoute translateGuides detailRoute check
    seed = 7
    [stage.detailRoute]
    impl = builtin
    rounds = 3
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import (ConfigError, MissingPlaceholder, StageOrderError,
                      UnknownStage)

STAGE_KINDS = ("synth", "globalPlace", "detailPlace", "sta", "size",
               "legalize", "globalRoute", "translateGuides", "detailRoute",
               "check")

DEFAULT_STAGES = ("synth", "globalPlace", "legalize", "sta", "globalRoute",
                  "translateGuides", "detailRoute", "check")

# a stage is legal once ANY of its prerequisites ran earlier; () means none
_PREREQS = {
    "synth": (),
    "globalPlace": ("synth",),
    "detailPlace": ("globalPlace",),
    "legalize": ("globalPlace", "detailPlace"),
    "sta": ("synth",),
    "size": ("sta",),
    "globalRoute": ("legalize", "detailPlace"),
    "translateGuides": ("globalRoute",),
    "detailRoute": ("translateGuides",),
    "check": ("globalPlace",),
}

# placeholders an external command template must reference
MANDATORY_PLACEHOLDERS = {
    "synth": ("in.verilog", "out.verilog"),
    "globalPlace": ("in.def", "out.def"),
    "detailPlace": ("in.def", "out.def"),
    "legalize": ("in.def", "out.def"),
    "sta": ("in.verilog", "out.report"),
    "size": ("in.verilog", "out.verilog"),
    "globalRoute": ("in.gr", "out.routes"),
    "translateGuides": ("in.routes", "out.guide"),
    "detailRoute": ("in.def", "in.guide", "out.def"),
    "check": ("in.def", "out.report"),
}

# stages with no built-in implementation
EXTERNAL_ONLY = ("detailPlace", "size")

ARTIFACTS = ("verilog", "liberty", "lef", "def", "sdc", "gr", "routes",
             "guide", "report")

DESIGN_FILE_KEYS = ("verilog", "liberty", "lef", "def", "sdc")

_PLACEHOLDER_RE = re.compile(r"\{([A-Za-z][A-Za-z0-9._]*)\}")


@dataclass
class StageConfig:
    kind: str
    impl: str = "builtin"
    command: str = ""
    options: dict[str, str] = field(default_factory=dict)


@dataclass
class FlowConfig:
    design_files: dict[str, Path] = field(default_factory=dict)
    stages: list[StageConfig] = field(default_factory=list)
    seed: int = 1
    base_dir: Path = field(default_factory=Path)


def parse_config(text: str, base_dir=".") -> FlowConfig:
    """Parse config text; path values resolve against base_dir."""
    base = Path(base_dir)
    cfg = FlowConfig(base_dir=base)
    section: str | None = None
    stage_sections: dict[str, dict[str, str]] = {}
    flow_keys: dict[str, str] = {}
    seen_header = False
    seen_sections: set[str] = set()
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not seen_header:
            if line != "rdf-config 1":
                raise ConfigError(
                    f"line {ln}: expected header 'rdf-config 1', got {line!r}")
            seen_header = True
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section in seen_sections:
                raise ConfigError(f"line {ln}: duplicate section [{section}]")
            seen_sections.add(section)
            if section.startswith("stage."):
                kind = section[len("stage."):]
                if kind not in STAGE_KINDS:
                    raise UnknownStage(f"line {ln}: unknown stage '{kind}'")
                stage_sections[kind] = {}
            elif section not in ("design", "flow"):
                raise ConfigError(f"line {ln}: unknown section [{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {ln}: empty key")
        if section is None:
            raise ConfigError(f"line {ln}: key outside any section")
        if section == "design":
            if key not in DESIGN_FILE_KEYS:
                raise ConfigError(f"line {ln}: unknown design file '{key}'")
            if key in cfg.design_files:
                raise ConfigError(f"line {ln}: duplicate design file '{key}'")
            cfg.design_files[key] = base / value
        elif section == "flow":
            if key in flow_keys:
                raise ConfigError(f"line {ln}: duplicate flow key '{key}'")
            flow_keys[key] = value
        else:
            kind = section[len("stage."):]
            if key in stage_sections[kind]:
                raise ConfigError(
                    f"line {ln}: duplicate key '{key}' in [{section}]")
            stage_sections[kind][key] = value

    if not seen_header:
        raise ConfigError("empty config: missing 'rdf-config 1' header")

    names = flow_keys.pop("stages", " ".join(DEFAULT_STAGES)).split()
    if "seed" in flow_keys:
        try:
            cfg.seed = int(flow_keys.pop("seed"))
        except ValueError:
            raise ConfigError("flow seed must be an integer") from None
    if flow_keys:
        raise ConfigError(f"unknown flow key '{sorted(flow_keys)[0]}'")

    for kind in names:
        if kind not in STAGE_KINDS:
            raise UnknownStage(f"unknown stage '{kind}'")
        keys = dict(stage_sections.get(kind, {}))
        impl = keys.pop("impl", "builtin")
        if impl not in ("builtin", "external"):
            raise ConfigError(f"stage '{kind}': impl must be builtin or "
                              f"external, got '{impl}'")
        command = keys.pop("command", "")
        cfg.stages.append(StageConfig(kind=kind, impl=impl, command=command,
                                      options=keys))
    configured = set(stage_sections) - {s.kind for s in cfg.stages}
    if configured:
        raise ConfigError(f"[stage.{sorted(configured)[0]}] configured but "
                          "not in the stage list")
    return cfg


def _known_placeholders(kind: str) -> set[str]:
    names = {"workdir", "seed"}
    names.update(f"in.{a}" for a in ARTIFACTS)
    names.update(ph for ph in MANDATORY_PLACEHOLDERS[kind]
                 if ph.startswith("out."))
    return names


def validate_config(cfg: FlowConfig) -> FlowConfig:
    """Reject bad stage orders, impls, and command templates."""
    if not cfg.stages:
        raise ConfigError("no stages to run")
    for key in ("verilog", "liberty", "lef", "def"):
        if key not in cfg.design_files:
            raise ConfigError(f"[design] is missing '{key}'")
    seen: list[str] = []
    for st in cfg.stages:
        if st.kind not in STAGE_KINDS:
            raise UnknownStage(f"unknown stage '{st.kind}'")
        if st.kind in seen:
            raise ConfigError(f"stage '{st.kind}' listed twice")
        prereqs = _PREREQS[st.kind]
        if prereqs and not any(p in seen for p in prereqs):
            raise StageOrderError(
                f"stage '{st.kind}' requires one of {'/'.join(prereqs)} "
                "to run earlier")
        if st.impl == "builtin":
            if st.kind in EXTERNAL_ONLY:
                raise ConfigError(
                    f"stage '{st.kind}' has no builtin implementation")
            if st.command:
                raise ConfigError(
                    f"stage '{st.kind}': builtin stages take no command")
        else:
            if not st.command.strip():
                raise ConfigError(
                    f"stage '{st.kind}': external stages need a command")
            used = set(_PLACEHOLDER_RE.findall(st.command))
            for ph in MANDATORY_PLACEHOLDERS[st.kind]:
                if ph not in used:
                    raise MissingPlaceholder(st.kind, ph)
            unknown = used - _known_placeholders(st.kind)
            if unknown:
                raise ConfigError(
                    f"stage '{st.kind}': unknown placeholder "
                    f"{{{sorted(unknown)[0]}}}")
        seen.append(st.kind)
    return cfg

"""Data-center snapshot files.

A snapshot is line-oriented text with bracketed sections, in this order::

    # vmconsol data-center snapshot
    [meta]        schema_version = 1
    [config]      generator settings, one ``key = value`` per line
    [pms]         id,cpu,mem,net            (capacities; GHz, MB, Mbps)
    [vms]         id,cpu,mem,net,dirty_rate,host
    [bandwidth]   a,b,fraction              (one line per PM pair a < b)
    [end]

Floats are written with ``repr`` so loading reproduces them bit for bit,
and save -> load -> save yields an identical file.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from .errors import SnapshotParseError
from .model import PhysicalMachine, ResourceVector, VirtualMachine
from .topology import NetworkModel, TreeTopology
from .workload import DataCenter, GenConfig

SCHEMA_VERSION = 1
HEADER = "# vmconsol data-center snapshot"
SECTIONS = ("meta", "config", "pms", "vms", "bandwidth", "end")
COLUMNS = {
    "pms": ("id", "cpu", "mem", "net"),
    "vms": ("id", "cpu", "mem", "net", "dirty_rate", "host"),
    "bandwidth": ("a", "b", "fraction"),
}
CONFIG_FIELDS = (
    "n_pm", "mean_rsc", "sd_rsc", "pr", "mean_bw", "sd_bw", "df",
    "ports_per_switch", "link_capacity_mbps", "seed", "pm_cpu", "pm_mem", "pm_net",
)
INT_FIELDS = {"n_pm", "ports_per_switch", "seed", "id", "host", "a", "b"}


def _num(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def dumps(dc: DataCenter) -> str:
    cfg = dc.config
    cap = cfg.pm_capacity
    values = dataclasses.asdict(cfg)
    values.update(pm_cpu=cap.cpu, pm_mem=cap.mem, pm_net=cap.net)
    lines = [HEADER, "[meta]", f"schema_version = {SCHEMA_VERSION}", "[config]"]
    lines += [f"{k} = {_num(values[k])}" for k in CONFIG_FIELDS]
    lines += ["[pms]", ",".join(COLUMNS["pms"])]
    for pm in sorted(dc.pms, key=lambda p: p.id):
        lines.append(",".join(_num(x) for x in (pm.id, *pm.capacity)))
    lines += ["[vms]", ",".join(COLUMNS["vms"])]
    for vm_id in sorted(dc.vms):
        vm = dc.vms[vm_id]
        lines.append(",".join(_num(x) for x in (vm.id, *vm.demand, vm.dirty_rate, vm.host)))
    lines += ["[bandwidth]", ",".join(COLUMNS["bandwidth"])]
    table = dc.network.bandwidth
    n = table.shape[0]
    for a in range(n):
        for b in range(a + 1, n):
            lines.append(f"{a},{b},{_num(table[a, b])}")
    lines.append("[end]")
    return "\n".join(lines) + "\n"


def save(dc: DataCenter, path) -> None:
    Path(path).write_text(dumps(dc))


def _split_sections(text: str):
    sections = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1]
            if name not in SECTIONS:
                raise SnapshotParseError(f"unknown section [{name}]", line=lineno)
            if name in sections:
                raise SnapshotParseError(f"duplicate section [{name}]", line=lineno)
            expected = SECTIONS[len(sections)]
            if name != expected:
                raise SnapshotParseError(f"expected section [{expected}], found [{name}]", line=lineno)
            sections[name] = []
            current = name
            continue
        if current is None:
            raise SnapshotParseError("content before the first section", line=lineno)
        sections[current].append((lineno, line))
    for name in SECTIONS:
        if name not in sections:
            raise SnapshotParseError(f"missing section [{name}] (file truncated?)")
    return sections


def _parse_value(name, text, lineno):
    try:
        return int(text) if name in INT_FIELDS else float(text)
    except ValueError:
        raise SnapshotParseError(f"bad number {text!r}", line=lineno, field=name) from None


def _key_values(lines):
    out = {}
    for lineno, line in lines:
        key, sep, value = line.partition("=")
        if not sep:
            raise SnapshotParseError("expected 'key = value'", line=lineno)
        out[key.strip()] = (lineno, value.strip())
    return out


def _table(name, lines):
    columns = COLUMNS[name]
    if not lines:
        raise SnapshotParseError(f"section [{name}] has no header row")
    lineno, header = lines[0]
    if tuple(h.strip() for h in header.split(",")) != columns:
        raise SnapshotParseError(f"section [{name}] header must be {','.join(columns)}", line=lineno)
    rows = []
    for lineno, line in lines[1:]:
        cells = line.split(",")
        if len(cells) != len(columns):
            raise SnapshotParseError(
                f"[{name}] row has {len(cells)} fields, expected {len(columns)}", line=lineno)
        rows.append({c: _parse_value(c, v.strip(), lineno) for c, v in zip(columns, cells)})
    return rows


def loads(text: str) -> DataCenter:
    sections = _split_sections(text)
    meta = _key_values(sections["meta"])
    if "schema_version" not in meta:
        raise SnapshotParseError("missing schema_version", field="schema_version")
    lineno, version = meta["schema_version"]
    if version != str(SCHEMA_VERSION):
        raise SnapshotParseError(
            f"schema version {version} not supported (expected {SCHEMA_VERSION})",
            line=lineno, field="schema_version")

    raw_cfg = _key_values(sections["config"])
    cfg_values = {}
    for name in CONFIG_FIELDS:
        if name not in raw_cfg:
            raise SnapshotParseError("missing config key", field=name)
        lineno, text_value = raw_cfg[name]
        cfg_values[name] = _parse_value(name, text_value, lineno)
    capacity = ResourceVector(cfg_values.pop("pm_cpu"), cfg_values.pop("pm_mem"), cfg_values.pop("pm_net"))
    cfg = GenConfig(pm_capacity=capacity, **cfg_values)

    pms = [PhysicalMachine(r["id"], ResourceVector(r["cpu"], r["mem"], r["net"]), set())
           for r in _table("pms", sections["pms"])]
    if [pm.id for pm in pms] != list(range(cfg.n_pm)):
        raise SnapshotParseError(f"[pms] must list ids 0..{cfg.n_pm - 1} in order", field="id")
    vms = {}
    for r in _table("vms", sections["vms"]):
        if not 0 <= r["host"] < cfg.n_pm:
            raise SnapshotParseError(f"VM {r['id']} host {r['host']} is not a PM", field="host")
        vm = VirtualMachine(r["id"], ResourceVector(r["cpu"], r["mem"], r["net"]), r["dirty_rate"], r["host"])
        vms[vm.id] = vm
        pms[vm.host].hosted.add(vm.id)

    table = np.ones((cfg.n_pm, cfg.n_pm))
    seen = 0
    for r in _table("bandwidth", sections["bandwidth"]):
        a, b = r["a"], r["b"]
        if not 0 <= a < b < cfg.n_pm:
            raise SnapshotParseError(f"bad PM pair ({a},{b})", field="a")
        table[a, b] = table[b, a] = r["fraction"]
        seen += 1
    if seen != cfg.n_pm * (cfg.n_pm - 1) // 2:
        raise SnapshotParseError(f"[bandwidth] has {seen} pairs, expected {cfg.n_pm * (cfg.n_pm - 1) // 2}")
    topology = TreeTopology(cfg.n_pm, cfg.ports_per_switch, cfg.df)
    return DataCenter(cfg, pms, vms, NetworkModel(topology, table, cfg.link_capacity_mbps))


def load(path) -> DataCenter:
    return loads(Path(path).read_text())

"""Theory definition files: the JSON input format of the command line tool.

A file declares one state space plus named transforms, agents, dynamics and
boxes.  Bit-op shorthands keep multi-bit fixtures writable by hand:

    {
      "space": {"bits": 3},
      "transforms": {
        "not1": "xor_mask:4",
        "a":    ["xor_mask:4", "set_bit:3=0"],
        "swap": "swap_bits:1,2",
        "step": "ca_rule150",
        "raw":  {"table": [1, 0, 3, 2, 5, 4, 7, 6]}
      },
      "agents": {
        "bob": {"perspective": "bits:2", "ops": ["not2"]},
        "eve": {"perspective": [[0,1,2,3],[4,5,6,7]], "ops": []}
      },
      "dynamics": {"evo": "step"},
      "boxes": {"mybox": {"inputs": 4, "outputs": 4, "matrix": [[...], ...]}}
    }

A transform value may be a shorthand string, a pipeline list (applied left
to right), or an explicit table.  Partition literals are either an explicit
class list or "bits:i,j" (power-of-two spaces only).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import bitops
from .errors import SpecError
from .gpt import Channel, channel_from_json, named_box
from .geometry import DynamicsFamily
from .partitions import Partition
from .secrecy import Agent
from .statespace import GeneratedMonoid, StateSpace, Transform, compose, identity


@dataclass
class TheorySpec:
    space: StateSpace
    n_bits: Optional[int]
    transforms: dict[str, Transform] = field(default_factory=dict)
    agents: dict[str, Agent] = field(default_factory=dict)
    dynamics: dict[str, DynamicsFamily] = field(default_factory=dict)
    boxes: dict[str, Channel] = field(default_factory=dict)
    channels: dict[str, Channel] = field(default_factory=dict)

    def transform(self, name: str) -> Transform:
        if name == "id":
            return identity(self.space.size)
        if name not in self.transforms:
            raise SpecError(f"unknown transform {name!r}", field="transforms")
        return self.transforms[name]

    def monoid(self, names: list[str] | str, label: str = "") -> GeneratedMonoid:
        if isinstance(names, str):
            names = [n.strip() for n in names.split(",") if n.strip()]
        gens = tuple(self.transform(n) for n in names)
        return GeneratedMonoid(self.space, gens, name=label or ",".join(names))

    def agent(self, name: str) -> Agent:
        if name not in self.agents:
            raise SpecError(f"unknown agent {name!r}", field="agents")
        return self.agents[name]

    def partition(self, literal) -> Partition:
        return parse_partition(literal, self.space.size, self.n_bits)

    def box(self, name: str) -> Channel:
        if name in self.boxes:
            return self.boxes[name]
        try:
            return named_box(name)
        except KeyError:
            raise SpecError(f"unknown box {name!r}", field="boxes") from None


_SHORTHANDS = {
    "xor_mask": re.compile(r"^xor_mask:(\d+)$"),
    "set_bit": re.compile(r"^set_bit:(\d+)=([01])$"),
    "swap_bits": re.compile(r"^swap_bits:(\d+),(\d+)$"),
    "ca_rule150": re.compile(r"^ca_rule150$"),
}


def parse_transform_item(item, size: int, n_bits: Optional[int], where: str) -> Transform:
    if isinstance(item, dict):
        table = item.get("table")
        if not isinstance(table, list):
            raise SpecError("explicit transform needs a 'table' list", field=where)
        try:
            return Transform(tuple(int(v) for v in table))
        except (TypeError, ValueError) as exc:
            raise SpecError(f"bad table: {exc}", field=where) from None
    if not isinstance(item, str):
        raise SpecError(
            f"transform must be a shorthand string, pipeline list or table, got {type(item).__name__}",
            field=where,
        )

    def need_bits() -> int:
        if n_bits is None:
            raise SpecError(
                f"shorthand {item!r} needs a power-of-two space declared as bits",
                field=where,
            )
        return n_bits

    m = _SHORTHANDS["xor_mask"].match(item)
    if m:
        mask = int(m.group(1))
        if not 0 <= mask < size:
            raise SpecError(f"mask {mask} outside [0, {size})", field=where)
        return Transform(tuple(x ^ mask for x in range(size)))
    m = _SHORTHANDS["set_bit"].match(item)
    if m:
        return bitops.set_bit(need_bits(), int(m.group(1)), int(m.group(2)))
    m = _SHORTHANDS["swap_bits"].match(item)
    if m:
        return bitops.swap_bits(need_bits(), int(m.group(1)), int(m.group(2)))
    if _SHORTHANDS["ca_rule150"].match(item):
        return bitops.rule150_step(need_bits())
    raise SpecError(f"unrecognized transform shorthand {item!r}", field=where)


def parse_transform(value, size: int, n_bits: Optional[int], name: str) -> Transform:
    where = f"transforms.{name}"
    if isinstance(value, list):
        if not value:
            raise SpecError("empty transform pipeline", field=where)
        current = identity(size)
        for item in value:
            step = parse_transform_item(item, size, n_bits, where)
            current = compose(step, current)  # pipeline applies left to right
        table = current.table
    else:
        table = parse_transform_item(value, size, n_bits, where).table
    try:
        return Transform(table, name)
    except ValueError as exc:
        raise SpecError(str(exc), field=where) from None


_BITS_RE = re.compile(r"^bits:(\d+(?:,\d+)*)$")


def parse_partition(literal, size: int, n_bits: Optional[int]) -> Partition:
    if isinstance(literal, str):
        m = _BITS_RE.match(literal.replace(" ", ""))
        if not m:
            raise SpecError(f"bad partition literal {literal!r}")
        if n_bits is None:
            raise SpecError("bits: partitions need a power-of-two space")
        positions = [int(v) for v in m.group(1).split(",")]
        try:
            return bitops.bit_partition(n_bits, positions)
        except ValueError as exc:
            raise SpecError(str(exc)) from None
    if isinstance(literal, list):
        try:
            return Partition.from_classes(size, literal)
        except (ValueError, IndexError) as exc:
            raise SpecError(f"bad partition classes: {exc}") from None
    raise SpecError(
        f"partition must be a class list or 'bits:...' string, got {type(literal).__name__}"
    )


def parse_theory(data: dict) -> TheorySpec:
    if not isinstance(data, dict):
        raise SpecError("theory file must hold a JSON object")
    raw_space = data.get("space")
    if not isinstance(raw_space, dict):
        raise SpecError("missing 'space' object", field="space")
    n_bits = None
    if "bits" in raw_space:
        n_bits = int(raw_space["bits"])
        try:
            space = bitops.bit_space(n_bits)
        except ValueError as exc:
            raise SpecError(str(exc), field="space.bits") from None
    elif "size" in raw_space:
        labels = raw_space.get("labels")
        try:
            space = StateSpace(
                int(raw_space["size"]),
                tuple(labels) if labels is not None else None,
            )
        except ValueError as exc:
            raise SpecError(str(exc), field="space") from None
        if space.size > 1 and space.size & (space.size - 1) == 0:
            n_bits = space.size.bit_length() - 1
    else:
        raise SpecError("space needs 'bits' or 'size'", field="space")

    spec = TheorySpec(space, n_bits)

    for name, value in (data.get("transforms") or {}).items():
        spec.transforms[name] = parse_transform(value, space.size, n_bits, name)

    for name, value in (data.get("agents") or {}).items():
        where = f"agents.{name}"
        if not isinstance(value, dict) or "perspective" not in value:
            raise SpecError("agent needs a 'perspective'", field=where)
        try:
            perspective = parse_partition(value["perspective"], space.size, n_bits)
        except SpecError as exc:
            raise SpecError(str(exc), field=where) from None
        ops = value.get("ops", [])
        if not isinstance(ops, list):
            raise SpecError("'ops' must be a list of transform names", field=where)
        try:
            monoid = spec.monoid(ops, label=name)
        except SpecError as exc:
            raise SpecError(str(exc), field=where) from None
        spec.agents[name] = Agent(perspective, monoid, name=name)

    for name, value in (data.get("dynamics") or {}).items():
        where = f"dynamics.{name}"
        if not isinstance(value, str):
            raise SpecError("dynamics must name a transform", field=where)
        try:
            spec.dynamics[name] = DynamicsFamily(spec.transform(value), name=name)
        except SpecError as exc:
            raise SpecError(str(exc), field=where) from None

    for section, target in (("boxes", spec.boxes), ("channels", spec.channels)):
        for name, value in (data.get(section) or {}).items():
            where = f"{section}.{name}"
            if isinstance(value, str):
                try:
                    target[name] = named_box(value)
                except KeyError as exc:
                    raise SpecError(str(exc), field=where) from None
                continue
            try:
                target[name] = channel_from_json(value)
            except (KeyError, TypeError, ValueError) as exc:
                raise SpecError(f"bad channel: {exc}", field=where) from None

    return spec


def _reject_duplicate_keys(pairs):
    seen = {}
    for key, value in pairs:
        if key in seen:
            raise ValueError(f"duplicate name {key!r}")
        seen[key] = value
    return seen


def load_theory(path: str | Path) -> TheorySpec:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from None
    try:
        data = json.loads(text, object_pairs_hook=_reject_duplicate_keys)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from None
    return parse_theory(data)

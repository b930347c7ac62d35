"""Network description files.

A description is an INI-style text file::

    [network]
    frac_bits = 8
    seed = 1

    [population exc]
    size = 100
    template = lif
    param.decay = 0.9
    init.v = 0.0
    init.v[3] = 1.5

    [projection exc_inh]
    source = exc
    target = inh
    pattern = all_to_all
    weights = uniform(-0.5, 0.5)
    width = 8

Patterns are ``all_to_all``, ``one_to_one``, ``one_to_all``, ``explicit``
and ``conv2d``.  ``weights`` is a scalar, a whitespace/comma separated
list, ``uniform(lo, hi)`` (drawn from the network seed), or omitted when
``weights_file`` names a little-endian float32 blob relative to the
description.  Explicit projections list ``connections = s:t:w, ...``.
Convolutions take ``in_shape = CxHxW``, ``kernel``, ``stride`` and
``channels`` (output channels); weights are ordered
``[out_channel][in_channel][ky][kx]`` and neurons channel-major.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..models.templates import TemplateError, get_template

PATTERNS = ("all_to_all", "one_to_one", "one_to_all", "explicit", "conv2d")
WIDTHS = (1, 2, 4, 8, 16)


class NetDescError(ValueError):
    pass


@dataclass
class Population:
    name: str
    size: int
    template: str
    params: dict[str, float] = field(default_factory=dict)
    init: dict[str, object] = field(default_factory=dict)  # name -> float | {index: float}
    learning: str | None = None
    layer: str | None = None
    learning_params: dict[str, float] = field(default_factory=dict)


@dataclass
class Conv2D:
    in_channels: int
    height: int
    width: int
    kernel: int
    stride: int
    channels: int

    @property
    def out_height(self) -> int:
        return (self.height - self.kernel) // self.stride + 1

    @property
    def out_width(self) -> int:
        return (self.width - self.kernel) // self.stride + 1

    @property
    def in_size(self) -> int:
        return self.in_channels * self.height * self.width

    @property
    def out_size(self) -> int:
        return self.channels * self.out_height * self.out_width

    @property
    def weight_count(self) -> int:
        return self.channels * self.in_channels * self.kernel * self.kernel


@dataclass
class Projection:
    name: str
    source: str
    target: str
    pattern: str
    weights: object = 1.0  # float | list[float] | ("uniform", lo, hi)
    width: int = 8
    plastic: bool = False
    connections: list[tuple[int, int, float]] = field(default_factory=list)
    conv: Conv2D | None = None


@dataclass
class NetworkDescription:
    populations: dict[str, Population] = field(default_factory=dict)
    projections: list[Projection] = field(default_factory=list)
    frac_bits: int = 8
    seed: int = 0

    def add_population(self, name: str, size: int, template: str, **kw) -> Population:
        pop = Population(name, size, template, **kw)
        self.populations[name] = pop
        return pop

    def add_projection(self, name: str, source: str, target: str, pattern: str, **kw) -> Projection:
        proj = Projection(name, source, target, pattern, **kw)
        self.projections.append(proj)
        return proj

    @property
    def neurons(self) -> int:
        return sum(p.size for p in self.populations.values())

    def validate(self) -> None:
        for pop in self.populations.values():
            if pop.size < 0:
                raise NetDescError(f"population {pop.name}: negative size")
            try:
                t = get_template(pop.template)
                if t.kind != "neuron":
                    raise NetDescError(f"population {pop.name}: {pop.template!r} is not a neuron template")
                t.resolve(pop.params)
                if pop.learning:
                    lt = get_template(pop.learning)
                    if lt.kind != "learning":
                        raise NetDescError(f"population {pop.name}: {pop.learning!r} is not a learning template")
                    lt.resolve(pop.learning_params)
                    if lt.entries and pop.layer and pop.layer.lower() not in lt.entries:
                        raise NetDescError(f"population {pop.name}: layer must be one of {lt.entries}")
            except TemplateError as exc:
                raise NetDescError(f"population {pop.name}: {exc.args[0]}") from None
        names = set()
        for proj in self.projections:
            if proj.name in names:
                raise NetDescError(f"duplicate projection {proj.name}")
            names.add(proj.name)
            for ref in (proj.source, proj.target):
                if ref not in self.populations:
                    raise NetDescError(f"projection {proj.name}: unknown population {ref!r}")
            if proj.pattern not in PATTERNS:
                raise NetDescError(f"projection {proj.name}: unknown pattern {proj.pattern!r}")
            if proj.width not in WIDTHS:
                raise NetDescError(f"projection {proj.name}: weight width must be one of {WIDTHS}")
            if proj.plastic and not self.populations[proj.target].learning:
                raise NetDescError(f"projection {proj.name}: plastic, but {proj.target} has no learning rule")
            ns, nt = self.populations[proj.source].size, self.populations[proj.target].size
            if proj.pattern == "one_to_one" and ns != nt:
                raise NetDescError(f"projection {proj.name}: one_to_one needs equal sizes ({ns} vs {nt})")
            if proj.pattern == "conv2d":
                c = proj.conv
                if c is None:
                    raise NetDescError(f"projection {proj.name}: conv2d needs in_shape, kernel and channels")
                if c.out_height < 1 or c.out_width < 1:
                    raise NetDescError(f"projection {proj.name}: kernel larger than input")
                if c.in_size != ns or c.out_size != nt:
                    raise NetDescError(
                        f"projection {proj.name}: conv2d expects {c.in_size} -> {c.out_size} neurons, "
                        f"populations have {ns} -> {nt}")
            for s, t, _ in proj.connections:
                if not (0 <= s < ns and 0 <= t < nt):
                    raise NetDescError(f"projection {proj.name}: connection {s}:{t} out of range")


# -- expansion --------------------------------------------------------------
def _weight_values(proj: Projection, count: int, rng: np.random.Generator) -> np.ndarray:
    w = proj.weights
    if isinstance(w, tuple) and w and w[0] == "uniform":
        return rng.uniform(w[1], w[2], size=count)
    if isinstance(w, (int, float)):
        return np.full(count, float(w))
    arr = np.asarray(w, dtype=float)
    if arr.size != count:
        raise NetDescError(f"projection {proj.name}: expected {count} weights, got {arr.size}")
    return arr


def projection_rng(net: NetworkDescription, index: int) -> np.random.Generator:
    return np.random.default_rng([net.seed, index])


def expand(net: NetworkDescription, index: int) -> list[tuple[int, int, float]]:
    """Concrete ``(source, target, weight)`` triples of projection ``index``."""
    proj = net.projections[index]
    ns, nt = net.populations[proj.source].size, net.populations[proj.target].size
    rng = projection_rng(net, index)
    if proj.pattern == "all_to_all":
        w = _weight_values(proj, ns * nt, rng)
        return [(s, t, float(w[s * nt + t])) for s in range(ns) for t in range(nt)]
    if proj.pattern == "one_to_one":
        w = _weight_values(proj, ns, rng)
        return [(i, i, float(w[i])) for i in range(ns)]
    if proj.pattern == "one_to_all":
        w = _weight_values(proj, nt, rng)
        return [(s, t, float(w[t])) for s in range(ns) for t in range(nt)]
    if proj.pattern == "explicit":
        return [(int(s), int(t), float(w)) for s, t, w in proj.connections]
    kernel = conv_kernel(proj, rng)
    return [(s, t, float(kernel[co, ci, ky, kx])) for s, t, co, ci, ky, kx in conv_pairs(proj.conv)]


def conv_kernel(proj: Projection, rng: np.random.Generator) -> np.ndarray:
    c = proj.conv
    return _weight_values(proj, c.weight_count, rng).reshape(c.channels, c.in_channels, c.kernel, c.kernel)


def conv_pairs(c: Conv2D):
    """Yield ``(source, target, out_ch, in_ch, ky, kx)`` for every synapse, by source."""
    hw, ohw = c.height * c.width, c.out_height * c.out_width
    for ci in range(c.in_channels):
        for y in range(c.height):
            for x in range(c.width):
                s = ci * hw + y * c.width + x
                for co, ky, kx, t in conv_slots(c, y, x):
                    if t is not None:
                        yield s, co * ohw + t, co, ci, ky, kx


def conv_slots(c: Conv2D, y: int, x: int):
    """Every kernel position of an input pixel, in fixed order; ``t`` is None off the output grid."""
    for co in range(c.channels):
        for ky in range(c.kernel):
            for kx in range(c.kernel):
                oy, ry = divmod(y - ky, c.stride)
                ox, rx = divmod(x - kx, c.stride)
                ok = ry == 0 and rx == 0 and 0 <= oy < c.out_height and 0 <= ox < c.out_width
                yield co, ky, kx, (oy * c.out_width + ox) if ok else None


# -- parsing ----------------------------------------------------------------
_SECTION_RE = re.compile(r"^(population|projection)\s+(\S+)$")
_INDEXED_RE = re.compile(r"^(\w+)\[(\d+)\]$")


def _num(text: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise NetDescError(f"{where}: not a number: {text!r}") from None


def _int(text: str, where: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        raise NetDescError(f"{where}: not an integer: {text!r}") from None


def _parse_weights(text: str, where: str):
    text = text.strip()
    m = re.match(r"^uniform\(\s*([^,]+),\s*([^)]+)\)$", text)
    if m:
        return ("uniform", _num(m.group(1), where), _num(m.group(2), where))
    parts = [p for p in re.split(r"[\s,]+", text) if p]
    if len(parts) == 1:
        return _num(parts[0], where)
    return [_num(p, where) for p in parts]


def _parse_connections(text: str, where: str) -> list[tuple[int, int, float]]:
    out = []
    for item in re.split(r"[\s,]+", text.strip()):
        if not item:
            continue
        bits = item.split(":")
        if len(bits) not in (2, 3):
            raise NetDescError(f"{where}: connection {item!r} must be source:target[:weight]")
        w = _num(bits[2], where) if len(bits) == 3 else 1.0
        out.append((_int(bits[0], where), _int(bits[1], where), w))
    return out


def _bool(text: str, where: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise NetDescError(f"{where}: not a boolean: {text!r}")


def parse_netdesc(text: str, base_dir: Path | str | None = None) -> NetworkDescription:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str  # keep key case: IP0, v_th ...
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise NetDescError(f"malformed description: {exc}") from None
    net = NetworkDescription()
    base = Path(base_dir) if base_dir is not None else Path(".")
    for section in cp.sections():
        items = dict(cp.items(section))
        if section == "network":
            for key, value in items.items():
                if key == "frac_bits":
                    net.frac_bits = _int(value, "network.frac_bits")
                elif key == "seed":
                    net.seed = _int(value, "network.seed")
                else:
                    raise NetDescError(f"[network]: unknown key {key!r}")
            continue
        m = _SECTION_RE.match(section)
        if not m:
            raise NetDescError(f"unknown section [{section}]")
        kind, name = m.groups()
        where = f"[{section}]"
        if kind == "population":
            if "size" not in items or "template" not in items:
                raise NetDescError(f"{where}: size and template are required")
            pop = Population(name, _int(items.pop("size"), where), items.pop("template").strip())
            pop.learning = items.pop("learning", None)
            pop.layer = items.pop("layer", None)
            for key, value in items.items():
                if key.startswith("param."):
                    pop.params[key[6:]] = _num(value, where)
                elif key.startswith("learn."):
                    pop.learning_params[key[6:]] = _num(value, where)
                elif key.startswith("init."):
                    var = key[5:]
                    mi = _INDEXED_RE.match(var)
                    if mi:
                        slot = pop.init.setdefault(mi.group(1), {})
                        if not isinstance(slot, dict):
                            slot = pop.init[mi.group(1)] = {"*": slot}
                        slot[int(mi.group(2))] = _num(value, where)
                    else:
                        prev = pop.init.get(var)
                        if isinstance(prev, dict):
                            prev["*"] = _num(value, where)
                        else:
                            pop.init[var] = _num(value, where)
                else:
                    raise NetDescError(f"{where}: unknown key {key!r}")
            if pop.name in net.populations:
                raise NetDescError(f"duplicate population {pop.name}")
            net.populations[pop.name] = pop
        else:
            for req in ("source", "target", "pattern"):
                if req not in items:
                    raise NetDescError(f"{where}: {req} is required")
            proj = Projection(name, items.pop("source").strip(), items.pop("target").strip(),
                              items.pop("pattern").strip().lower())
            if "weights_file" in items:
                path = base / items.pop("weights_file").strip()
                try:
                    proj.weights = np.fromfile(path, dtype="<f4").astype(float).tolist()
                except OSError as exc:
                    raise NetDescError(f"{where}: cannot read weights file: {exc}") from None
            for key, value in items.items():
                if key in ("weights", "weight"):
                    proj.weights = _parse_weights(value, where)
                elif key == "width":
                    proj.width = _int(value, where)
                elif key == "plastic":
                    proj.plastic = _bool(value, where)
                elif key == "connections":
                    proj.connections = _parse_connections(value, where)
                elif key in ("in_shape", "kernel", "stride", "channels"):
                    pass
                else:
                    raise NetDescError(f"{where}: unknown key {key!r}")
            if proj.pattern == "conv2d":
                try:
                    cin, h, w = (int(v) for v in items["in_shape"].lower().split("x"))
                    proj.conv = Conv2D(cin, h, w, _int(items["kernel"], where),
                                       _int(items.get("stride", "1"), where), _int(items.get("channels", "1"), where))
                except (KeyError, ValueError):
                    raise NetDescError(f"{where}: conv2d needs in_shape=CxHxW, kernel, channels") from None
            net.projections.append(proj)
    net.validate()
    return net


def load_netdesc(path: Path | str) -> NetworkDescription:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise NetDescError(f"cannot read {path}: {exc.strerror}") from None
    return parse_netdesc(text, path.parent)


def format_netdesc(net: NetworkDescription) -> str:
    """Serialize back to text (weights inline)."""
    lines = ["[network]", f"frac_bits = {net.frac_bits}", f"seed = {net.seed}", ""]
    for pop in net.populations.values():
        lines += [f"[population {pop.name}]", f"size = {pop.size}", f"template = {pop.template}"]
        if pop.learning:
            lines.append(f"learning = {pop.learning}")
        if pop.layer:
            lines.append(f"layer = {pop.layer}")
        lines += [f"param.{k} = {v!r}" for k, v in pop.params.items()]
        lines += [f"learn.{k} = {v!r}" for k, v in pop.learning_params.items()]
        for k, v in pop.init.items():
            if isinstance(v, dict):
                lines += [f"init.{k} = {x!r}" if i == "*" else f"init.{k}[{i}] = {x!r}" for i, x in v.items()]
            else:
                lines.append(f"init.{k} = {v!r}")
        lines.append("")
    for proj in net.projections:
        lines += [f"[projection {proj.name}]", f"source = {proj.source}", f"target = {proj.target}",
                  f"pattern = {proj.pattern}", f"width = {proj.width}", f"plastic = {str(proj.plastic).lower()}"]
        w = proj.weights
        if isinstance(w, tuple):
            lines.append(f"weights = uniform({w[1]!r}, {w[2]!r})")
        elif isinstance(w, (int, float)):
            lines.append(f"weights = {w!r}")
        elif w is not None:
            lines.append("weights = " + " ".join(repr(float(x)) for x in w))
        if proj.connections:
            lines.append("connections = " + ", ".join(f"{s}:{t}:{x!r}" for s, t, x in proj.connections))
        if proj.conv:
            c = proj.conv
            lines += [f"in_shape = {c.in_channels}x{c.height}x{c.width}", f"kernel = {c.kernel}",
                      f"stride = {c.stride}", f"channels = {c.channels}"]
        lines.append("")
    return "\n".join(lines)

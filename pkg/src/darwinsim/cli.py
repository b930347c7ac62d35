"""Command-line entry points.

Exit codes: 0 success, 1 usage error, 2 input error, 3 simulation fault.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixed
from .connectivity.tables import ConnectivityError
from .core.neuron_core import CoreFault
from .isa import AssemblyError, BinaryFormatError, assemble, disassemble, pack_program, unpack_program
from .mapper import (
    FabricConfig,
    ImageError,
    MappingError,
    NetDescError,
    load_images,
    load_netdesc,
    map_network,
    report_metrics,
    save_images,
)
from .maze import MazeError, carved_maze, parse_maze, random_maze, solve
from .models.energy import EnergyCoefficients
from .models.templates import TemplateError
from .noc.mesh import NocError
from .sim import Simulator

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_FAULT = 0, 1, 2, 3
INPUT_ERRORS = (OSError, AssemblyError, BinaryFormatError, NetDescError, MappingError, ImageError, MazeError,
                ConnectivityError, TemplateError, fixed.QuantizationError)


class _Usage(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Usage(f"{self.prog}: {message}")


def _fabric(text: str) -> FabricConfig:
    try:
        return FabricConfig.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _energy(text: str) -> EnergyCoefficients:
    try:
        return EnergyCoefficients.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _write(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- commands ------------------------------------------------------------------
def cmd_asm(args) -> int:
    src = Path(args.source)
    words = assemble(src.read_text()).words
    out = Path(args.output) if args.output else src.with_suffix(".bin")
    out.write_bytes(pack_program(words))
    print(f"{out}: {len(words)} instructions")
    return EXIT_OK


def cmd_disasm(args) -> int:
    words = unpack_program(Path(args.binary).read_bytes())
    _write(args.output, disassemble(list(words)))
    return EXIT_OK


def _load_net(args):
    net = load_netdesc(args.netdesc)
    if args.seed is not None:
        net.seed = args.seed
    return net


def cmd_map(args) -> int:
    mapped = map_network(_load_net(args), args.fabric)
    save_images(args.output, mapped.images, mapped.fabric, mapped.offset_bits)
    metrics = report_metrics(mapped)
    if args.metrics:
        Path(args.metrics).write_text(json.dumps(metrics, indent=1, sort_keys=True) + "\n")
    t = metrics["total"]
    print(f"{args.output}: {t['cores']} cores, {t['neurons']} neurons, "
          f"{t['memory']['total_bits']} connectivity bits")
    return EXIT_OK


def cmd_metrics(args) -> int:
    mapped = map_network(_load_net(args), args.fabric)
    _write(args.output, json.dumps(report_metrics(mapped), indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_sim(args) -> int:
    images, fabric, _ = load_images(args.images)
    if args.fabric is not None:
        fabric = args.fabric
    with Simulator(images, fabric, workers=args.workers, strict=args.strict, noc=args.noc,
                   record_packets=bool(args.packet_trace)) as sim:
        try:
            sim.run(args.ticks)
            faulted = None
        except (CoreFault, NocError) as exc:
            faulted = exc
        result = sim.result(args.energy)
    if args.trace:
        Path(args.trace).write_text("".join(line + "\n" for line in result.trace))
    if args.packet_trace:
        Path(args.packet_trace).write_text("".join(line + "\n" for line in result.packet_trace))
    report = {"ticks": result.ticks, "counters": result.counters, "noc": result.noc,
              "energy": result.energy.as_dict(), "faults": result.faults}
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=1, sort_keys=True) + "\n")
    e = result.energy
    print(f"ticks {result.ticks}  spikes {result.counters['total'].get('spikes', 0)}  sops {e.sops}  "
          f"energy {e.total:.6g} {e.unit}  faults {len(result.faults)}")
    if faulted is not None:
        print(f"fault: {faulted}", file=sys.stderr)
        return EXIT_FAULT
    if result.faults and args.strict:
        return EXIT_FAULT
    return EXIT_OK


def cmd_maze(args) -> int:
    if args.file:
        maze = parse_maze(Path(args.file).read_text())
    elif args.carved:
        maze = carved_maze(args.size, args.seed or 0)
    else:
        maze = random_maze(args.size, args.seed or 0, args.density)
    res = solve(maze, fabric=args.fabric, max_ticks=args.ticks, workers=args.workers, seed=args.seed or 0)
    if args.show:
        print(maze.render(res.path))
    if res.reachable:
        print(f"path length {res.length}, ticks {res.ticks}, spikes {res.spikes}")
        print(" ".join(f"{r},{c}" for r, c in res.path))
    else:
        print(f"unreachable (wave stopped after {res.ticks} ticks, {res.spikes} spikes)")
    return EXIT_OK


# -- parser --------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="darwinsim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp, fabric_default=None):
        sp.add_argument("--fabric", type=_fabric, default=fabric_default, help="WxH or WxH,chips")
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--workers", type=_positive, default=1)

    a = sub.add_parser("asm", help="assemble a program")
    a.add_argument("source")
    a.add_argument("-o", "--output")
    a.set_defaults(func=cmd_asm)

    d = sub.add_parser("disasm", help="disassemble a program binary")
    d.add_argument("binary")
    d.add_argument("-o", "--output")
    d.set_defaults(func=cmd_disasm)

    m = sub.add_parser("map", help="map a network description to core images")
    m.add_argument("netdesc")
    m.add_argument("-o", "--output", required=True, help="image container to write")
    m.add_argument("--metrics", help="also write mapping metrics as JSON")
    common(m, FabricConfig())
    m.set_defaults(func=cmd_map)

    r = sub.add_parser("metrics", help="report mapping metrics of a network description")
    r.add_argument("netdesc")
    r.add_argument("-o", "--output")
    common(r, FabricConfig())
    r.set_defaults(func=cmd_metrics)

    s = sub.add_parser("sim", help="simulate an image container")
    s.add_argument("images")
    s.add_argument("--ticks", type=_nonneg, default=100)
    s.add_argument("--strict", action="store_true", help="stop at the first fault")
    s.add_argument("--trace", help="spike trace output (tick chip x y neuron)")
    s.add_argument("--packet-trace", help="packet delivery trace output")
    s.add_argument("--report", help="counters, NoC statistics and energy as JSON")
    s.add_argument("--energy", type=_energy, default=EnergyCoefficients(), help="PI,PB,PN,PS")
    s.add_argument("--noc", choices=("cycle", "analytic"), default="cycle")
    common(s)
    s.set_defaults(func=cmd_sim)

    z = sub.add_parser("maze", help="solve a maze with a spike wavefront")
    z.add_argument("file", nargs="?", help="maze text (# wall, . free, S start, G goal)")
    z.add_argument("--size", type=_positive, default=15)
    z.add_argument("--density", type=float, default=0.3)
    z.add_argument("--carved", action="store_true", help="depth-first carved maze instead of random obstacles")
    z.add_argument("--ticks", type=_positive, default=None, help="tick budget")
    z.add_argument("--show", action="store_true")
    common(z)
    z.set_defaults(func=cmd_maze)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _Usage as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    try:
        return args.func(args)
    except INPUT_ERRORS as exc:
        msg = exc.strerror + f": {exc.filename}" if isinstance(exc, OSError) and exc.strerror else str(exc)
        print(f"darwinsim {args.command}: {msg}", file=sys.stderr)
        return EXIT_INPUT
    except (CoreFault, NocError) as exc:
        print(f"darwinsim {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAULT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

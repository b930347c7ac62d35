import json
from pathlib import Path

import pytest

from darwinsim.cli import EXIT_FAULT, EXIT_INPUT, EXIT_OK, EXIT_USAGE, main
from darwinsim.models import get_template

DEMOS = Path(__file__).resolve().parents[1] / "demos"


@pytest.fixture
def ring_image(tmp_path):
    out = tmp_path / "ring.d3i"
    assert main(["map", str(DEMOS / "ring.net"), "-o", str(out), "--fabric", "4x4"]) == EXIT_OK
    return out


def test_asm_disasm_roundtrip(tmp_path, capsys):
    src = tmp_path / "lif.asm"
    src.write_text(get_template("lif").listing)
    assert main(["asm", str(src)]) == EXIT_OK
    assert "2 instructions" in capsys.readouterr().out
    listing = tmp_path / "back.asm"
    assert main(["disasm", str(src.with_suffix(".bin")), "-o", str(listing)]) == EXIT_OK
    again = tmp_path / "again.bin"
    assert main(["asm", str(listing), "-o", str(again)]) == EXIT_OK
    assert again.read_bytes() == src.with_suffix(".bin").read_bytes()


def test_asm_errors(tmp_path, capsys):
    bad = tmp_path / "bad.asm"
    bad.write_text("FROB TR0\n")
    assert main(["asm", str(bad)]) == EXIT_INPUT
    assert main(["asm", str(tmp_path / "missing.asm")]) == EXIT_INPUT
    assert "missing.asm" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(["sim", "x.d3i", "--ticks", "-3"]) == EXIT_USAGE
    assert main(["map", "x.net", "-o", "y", "--fabric", "big"]) == EXIT_USAGE
    assert main(["sim", "x.d3i", "--energy", "1,2"]) == EXIT_USAGE
    assert main(["--help"]) == EXIT_OK
    capsys.readouterr()


def test_map_and_sim(tmp_path, ring_image, capsys):
    trace, report = tmp_path / "t.txt", tmp_path / "r.json"
    rc = main(["sim", str(ring_image), "--ticks", "10", "--trace", str(trace), "--report", str(report)])
    assert rc == EXIT_OK
    assert "spikes 10" in capsys.readouterr().out
    lines = trace.read_text().splitlines()
    assert lines[:2] == ["0 0 1 0 0", "1 0 1 0 1"]
    data = json.loads(report.read_text())
    assert data["ticks"] == 10 and data["faults"] == []
    assert data["energy"]["sops"] == 9


def test_sim_zero_ticks(tmp_path, ring_image):
    trace = tmp_path / "t.txt"
    assert main(["sim", str(ring_image), "--ticks", "0", "--trace", str(trace)]) == EXIT_OK
    assert trace.read_text() == ""


def test_sim_fault_exit_code(tmp_path, capsys):
    image = tmp_path / "energy.d3i"
    main(["map", str(DEMOS / "energy.net"), "-o", str(image), "--fabric", "3x3"])
    # a fabric too narrow for the second core leaves packets with nowhere to go
    assert main(["sim", str(image), "--ticks", "3", "--fabric", "2x1", "--strict"]) == EXIT_FAULT
    assert main(["sim", str(image), "--ticks", "3", "--fabric", "2x1"]) == EXIT_OK
    capsys.readouterr()


def test_metrics_and_capacity_error(tmp_path, capsys):
    out = tmp_path / "m.json"
    assert main(["metrics", str(DEMOS / "conv.net"), "-o", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["total"]["memory"]["weight_bits"] == 288
    big = tmp_path / "big.net"
    big.write_text("[population a]\nsize = 10000\ntemplate = lif\n")
    assert main(["metrics", str(big), "--fabric", "2x1"]) == EXIT_INPUT
    assert "needs 3 cores" in capsys.readouterr().err


def test_bad_image(tmp_path):
    junk = tmp_path / "junk.d3i"
    junk.write_text("nope")
    assert main(["sim", str(junk)]) == EXIT_INPUT


def test_maze_command(tmp_path, capsys):
    maze = tmp_path / "m.txt"
    maze.write_text("S..\n##.\nG..\n")
    assert main(["maze", str(maze), "--show"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "path length 6" in out
    assert "0,0 0,1 0,2 1,2 2,2 2,1 2,0" in out
    maze.write_text("S#\n#G\n")
    assert main(["maze", str(maze)]) == EXIT_OK
    assert "unreachable" in capsys.readouterr().out
    maze.write_text("S?G\n")
    assert main(["maze", str(maze)]) == EXIT_INPUT

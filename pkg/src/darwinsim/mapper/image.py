"""Serialized core images.

A container is a zip archive with ``manifest.json`` and one ``core_NNNN.bin``
per core.  A core file starts with the magic ``D3CI``, a ``u16`` version and
a ``u16`` section count, followed by a table of ``(name: 8 bytes, offset: u32,
length: u32)`` entries.  Sections:

=========  ===========================================================
config     JSON: placement, core configuration, program lengths
instr      ``<u2`` inference words then learning words
params     ``<i2`` parameter bank
state      ``<i2`` neuron records, 14 columns per neuron
synstate   ``<i2`` learning states (LS0..LS9) per plastic synapse
explut     ``<i2`` EXP lookup table
axonout    ``<u2`` linker pairs then ``<i2`` info quadruples
axonin     JSON: linkers, blocks, plastic slot maps, weight-run layout
weights    packed weight runs, 64-bit little-endian words
=========  ===========================================================

Everything a core needs is inside its file; the network description is not
required to load or run an image.
"""

from __future__ import annotations

import dataclasses
import io
import json
import struct
import zipfile
from pathlib import Path

import numpy as np

from ..connectivity.tables import AxonInBlock, AxonInTable, AxonOutTable
from ..connectivity.weights import WeightArray
from ..core.neuron_core import NREC_COLS, CoreConfig
from .mapping import CoreImage, FabricConfig

MAGIC = b"D3CI"
VERSION = 1
FORMAT = "darwinsim-images"
_HEADER = struct.Struct("<4sHH")
_ENTRY = struct.Struct("<8sII")


class ImageError(ValueError):
    pass


def _i2(a) -> bytes:
    return np.asarray(a, dtype="<i2").tobytes()


def encode_core(img: CoreImage) -> bytes:
    cfg = img.config
    tin, tout = img.axon_in, img.axon_out
    config = {
        "core": img.core, "chip": img.chip, "x": img.x, "y": img.y, "X": img.X, "Y": img.Y,
        "population": img.population, "start": img.start, "neurons": cfg.neurons,
        "mode": cfg.mode, "frac_bits": cfg.frac_bits, "synapse_model": cfg.synapse_model,
        "budget": cfg.budget, "exp_range": list(cfg.exp_range),
        "inference_words": len(cfg.inference_program), "learning_words": len(cfg.learning_program),
    }
    runs = [{"width": r.width, "signed": r.signed, "count": r.count, "words": len(r.words)}
            for r in tin.weight_runs]
    axonin = {
        "neurons": tin.neurons,
        "linkers": [list(x) for x in tin.linkers],
        "blocks": [dataclasses.asdict(b) for b in tin.blocks],
        "plastic_post": list(tin.plastic_post), "plastic_init": list(tin.plastic_init),
        "plastic_pre": [list(x) for x in tin.plastic_pre],
        "weight_runs": runs,
    }
    out_bytes = (np.asarray(tout.linkers, dtype="<u2").reshape(-1, 2).tobytes()
                 + np.asarray(tout.info, dtype="<i2").reshape(-1, 4).tobytes())
    sections = [
        ("config", json.dumps(config, sort_keys=True).encode()),
        ("instr", np.asarray(cfg.inference_program + cfg.learning_program, dtype="<u2").tobytes()),
        ("params", _i2(cfg.params)),
        ("state", _i2(img.state)),
        ("synstate", _i2(img.syn_ls)),
        ("explut", _i2(cfg.exp_lut)),
        ("axonout", struct.pack("<II", len(tout.linkers), len(tout.info)) + out_bytes),
        ("axonin", json.dumps(axonin, sort_keys=True).encode()),
        ("weights", b"".join(r.to_bytes() for r in tin.weight_runs)),
    ]
    head = _HEADER.pack(MAGIC, VERSION, len(sections))
    offset = len(head) + _ENTRY.size * len(sections)
    table, body = b"", b""
    for name, data in sections:
        table += _ENTRY.pack(name.encode(), offset + len(body), len(data))
        body += data
    return head + table + body


def _sections(data: bytes) -> dict[str, bytes]:
    if len(data) < _HEADER.size:
        raise ImageError("truncated core image")
    magic, version, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ImageError("not a core image (bad magic)")
    if version != VERSION:
        raise ImageError(f"unsupported core image version {version}")
    out = {}
    for i in range(count):
        raw, off, length = _ENTRY.unpack_from(data, _HEADER.size + i * _ENTRY.size)
        name = raw.rstrip(b"\0").decode()
        if off + length > len(data):
            raise ImageError(f"section {name} runs past the end of the image")
        out[name] = data[off:off + length]
    return out


def decode_core(data: bytes) -> CoreImage:
    sec = _sections(data)
    try:
        cfg = json.loads(sec["config"])
        ain = json.loads(sec["axonin"])
    except (KeyError, ValueError) as exc:
        raise ImageError(f"damaged core image: {exc}") from None
    n = cfg["neurons"]
    words = tuple(int(w) for w in np.frombuffer(sec["instr"], dtype="<u2"))
    ni = cfg["inference_words"]
    config = CoreConfig(n, words[:ni], words[ni:ni + cfg["learning_words"]], cfg["mode"],
                        np.frombuffer(sec["params"], dtype="<i2").astype(np.int32), cfg["frac_bits"],
                        cfg["synapse_model"], np.frombuffer(sec["explut"], dtype="<i2").astype(np.int32),
                        tuple(cfg["exp_range"]), cfg["budget"])
    state = np.frombuffer(sec["state"], dtype="<i2").astype(np.int32).reshape(n, NREC_COLS)
    syn_ls = np.frombuffer(sec["synstate"], dtype="<i2").astype(np.int32).reshape(-1, 10)
    nl, ni_ = struct.unpack_from("<II", sec["axonout"])
    raw = sec["axonout"][8:]
    links = np.frombuffer(raw[:nl * 4], dtype="<u2").reshape(-1, 2)
    info = np.frombuffer(raw[nl * 4:nl * 4 + ni_ * 8], dtype="<i2").reshape(-1, 4)
    tout = AxonOutTable(n, [tuple(int(v) for v in r) for r in links], [tuple(int(v) for v in r) for r in info])
    blocks = []
    for b in ain["blocks"]:
        b = dict(b)
        for key in ("index", "weights"):
            b[key] = tuple(b[key])
        b["pairs"] = tuple(tuple(p) for p in b["pairs"])
        b["row_neurons"] = tuple(tuple(r) for r in b["row_neurons"])
        blocks.append(AxonInBlock(**b))
    runs, pos, wbytes = [], 0, sec["weights"]
    for r in ain["weight_runs"]:
        ws = tuple(int.from_bytes(wbytes[pos + 8 * k:pos + 8 * k + 8], "little") for k in range(r["words"]))
        pos += 8 * r["words"]
        runs.append(WeightArray(r["width"], r["signed"], r["count"], ws))
    tin = AxonInTable(ain["neurons"], [tuple(x) for x in ain["linkers"]], blocks, runs, list(ain["plastic_post"]),
                      list(ain["plastic_init"]), [tuple(x) for x in ain["plastic_pre"]])
    return CoreImage(cfg["core"], cfg["chip"], cfg["x"], cfg["y"], cfg["X"], cfg["Y"], cfg["population"],
                     cfg["start"], config, state, syn_ls, tin, tout)


def save_images(path, images: list[CoreImage], fabric: FabricConfig, offset_bits: int, extra: dict | None = None):
    manifest = {
        "format": FORMAT, "version": VERSION,
        "fabric": dataclasses.asdict(fabric), "offset_bits": offset_bits,
        "cores": [{"core": img.core, "file": f"core_{img.core:04d}.bin", "population": img.population,
                   "neurons": img.neurons, "chip": img.chip, "x": img.x, "y": img.y} for img in images],
        **(extra or {}),
    }
    buf = io.BytesIO()
    # fixed timestamps keep the container byte-identical across runs
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
        def put(name, data):
            zf.writestr(zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0)), data, zipfile.ZIP_DEFLATED)
        put("manifest.json", json.dumps(manifest, indent=1, sort_keys=True))
        for img, entry in zip(images, manifest["cores"]):
            put(entry["file"], encode_core(img))
    Path(path).write_bytes(buf.getvalue())


def load_images(path) -> tuple[list[CoreImage], FabricConfig, dict]:
    try:
        zf = zipfile.ZipFile(path)
    except (OSError, zipfile.BadZipFile) as exc:
        raise ImageError(f"cannot open image container {path}: {exc}") from None
    with zf:
        try:
            manifest = json.loads(zf.read("manifest.json"))
        except (KeyError, ValueError):
            raise ImageError(f"{path}: missing or damaged manifest") from None
        if manifest.get("format") != FORMAT:
            raise ImageError(f"{path}: not a {FORMAT} container")
        fabric = FabricConfig(**manifest["fabric"])
        try:
            images = [decode_core(zf.read(c["file"])) for c in manifest["cores"]]
        except KeyError as exc:
            raise ImageError(f"{path}: missing core file {exc}") from None
    return images, fabric, manifest

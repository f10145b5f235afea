"""Model serialization: one self-describing binary file.

Layout: a magic line with the major format version, an 8-byte
little-endian length, a JSON header (sorted keys: config, vocabulary,
tensor manifest, metadata), then the raw tensors as little-endian
float64 in C order, in manifest order.  No timestamps and no
environment-dependent fields, so saving the same model twice produces
byte-identical files.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .corpus import Vocabulary
from .model import TaggerConfig, TaggerModel

MAGIC = b"MCLNER 1\n"
FORMAT_VERSION = 1


class ArchiveError(RuntimeError):
    """Raised when an archive is missing, malformed or incompatible."""


def save_model(path, model: TaggerModel, metadata: dict | None = None) -> None:
    params = model.parameters()
    manifest = [{"name": name, "shape": list(params[name].shape)}
                for name in sorted(params)]
    header = {
        "format": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "vocabulary": {
            "words": model.vocab.words(),
            "roots": model.vocab.roots(),
            "tags": model.vocab.tag_names,
            "lowercase": model.vocab.lowercase,
        },
        "tensors": manifest,
        "metadata": metadata or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=False).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        for entry in manifest:
            handle.write(np.ascontiguousarray(params[entry["name"]], dtype="<f8").tobytes())


def load_model(path) -> tuple[TaggerModel, dict]:
    """Rebuild a model and its metadata from an archive file."""
    try:
        with open(path, "rb") as handle:
            data = handle.read()
    except OSError as exc:
        raise ArchiveError(f"cannot read archive: {exc}") from exc
    if not data.startswith(b"MCLNER "):
        raise ArchiveError("not a model archive (bad magic)")
    if not data.startswith(MAGIC):
        found = data.split(b"\n", 1)[0].decode("utf-8", "replace")
        raise ArchiveError(f"unsupported archive version {found!r}, "
                           f"expected {MAGIC.strip().decode()!r}")
    offset = len(MAGIC)
    if len(data) < offset + 8:
        raise ArchiveError("truncated archive header")
    (length,) = struct.unpack_from("<Q", data, offset)
    offset += 8
    if len(data) < offset + length:
        raise ArchiveError("truncated archive header")
    try:
        header = json.loads(data[offset:offset + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ArchiveError(f"corrupt archive header: {exc}") from exc
    offset += length
    if header.get("format") != FORMAT_VERSION:
        raise ArchiveError(f"archive format {header.get('format')!r} is not "
                           f"supported (expected {FORMAT_VERSION})")
    voc = header["vocabulary"]
    vocab = Vocabulary(
        word_index={w: i for i, w in enumerate(voc["words"])},
        root_index={r: i for i, r in enumerate(voc["roots"])},
        tag_index={t: i for i, t in enumerate(voc["tags"])},
        lowercase=bool(voc["lowercase"]),
    )
    config = TaggerConfig.from_dict(header["config"])
    model = TaggerModel(vocab, config)
    params = model.parameters()
    manifest = header["tensors"]
    if sorted(e["name"] for e in manifest) != sorted(params):
        raise ArchiveError("archive tensors do not match the model layout")
    for entry in manifest:
        name, shape = entry["name"], tuple(entry["shape"])
        if params[name].shape != shape:
            raise ArchiveError(f"tensor {name!r} has shape {shape}, "
                               f"expected {params[name].shape}")
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        nbytes = count * 8
        if len(data) < offset + nbytes:
            raise ArchiveError(f"truncated tensor data for {name!r}")
        flat = np.frombuffer(data, dtype="<f8", count=count, offset=offset)
        params[name][...] = flat.reshape(shape)
        offset += nbytes
    if offset != len(data):
        raise ArchiveError("trailing bytes after tensor data")
    return model, header.get("metadata", {})

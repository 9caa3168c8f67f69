## TITLE: liftbench result serialization
## CC: okzyrox
## LICENSE: MIT

import enum
import json
import struct
import dataclasses
from fractions import Fraction
from typing import Any, Dict

import numpy as np
from cryptography.hazmat.primitives import hashes


def fraction_str(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


class Record:
    """mixin for the result dataclasses, gives them the to_dict / to_json pair"""

    def to_dict(self) -> Dict[str, Any]:
        out = {}
        for f in dataclasses.fields(self):
            if f.metadata.get("skip"):
                continue
            out[f.name] = self._json_serializer(getattr(self, f.name))
        return out

    def to_json(self, indent=None) -> str:
        return json.dumps(self.to_dict(), default=self._json_serializer, indent=indent)

    @staticmethod
    def _json_serializer(obj):
        if obj is None or isinstance(obj, (bool, str)):
            return obj
        if isinstance(obj, enum.Enum):
            return obj.value
        if isinstance(obj, Fraction):
            return {"exact": fraction_str(obj), "value": float(obj)}
        if isinstance(obj, (np.bool_,)):
            return bool(obj)
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, (int, float)):
            return obj
        if isinstance(obj, np.ndarray):
            return [Record._json_serializer(x) for x in obj.tolist()]
        if isinstance(obj, Record):
            return obj.to_dict()
        if isinstance(obj, dict):
            return {str(Record._json_serializer(k)): Record._json_serializer(v) for k, v in obj.items()}
        if isinstance(obj, (set, frozenset)):
            return sorted(Record._json_serializer(x) for x in obj)
        if isinstance(obj, (list, tuple)):
            return [Record._json_serializer(item) for item in obj]
        if hasattr(obj, "to_dict"):
            return obj.to_dict()
        raise TypeError(f"Type {type(obj)} not serializable")

    def __str__(self):
        return self.__class__.__name__ + "(" + ", ".join(f"{key} = {value}" for key, value in self.to_dict().items()) + ")"


def canonical_text(mult) -> str:
    ## first line n, then one line per row
    mult = np.asarray(mult)
    rows = [" ".join(str(int(x)) for x in row) for row in mult]
    return f"{mult.shape[0]}\n" + "\n".join(rows) + "\n"


def sha256_hex(data: bytes) -> str:
    digest = hashes.Hash(hashes.SHA256())
    digest.update(data)
    return digest.finalize().hex()


def matrix_digest(mult) -> str:
    return sha256_hex(canonical_text(mult).encode("utf-8"))


## binary graph format
## magic, n, then n*n unsigned shorts (row major), all big endian

_MAGIC = b"LBG1"


def encode_matrix(mult) -> bytes:
    mult = np.asarray(mult, dtype=np.int64)
    n = mult.shape[0]
    if mult.size and (mult.min() < 0 or mult.max() > 0xFFFF):
        raise ValueError(f"Multiplicities must fit in 16 bits, got range [{mult.min()}, {mult.max()}]")
    return _MAGIC + struct.pack("!I", n) + struct.pack(f"!{n * n}H", *mult.ravel().tolist())


def decode_matrix(binary_data: bytes) -> np.ndarray:
    if binary_data[:4] != _MAGIC:
        raise ValueError(f"Not a liftbench graph file (magic {binary_data[:4]!r})")
    n = struct.unpack("!I", binary_data[4:8])[0]
    expected = 8 + 2 * n * n
    if len(binary_data) != expected:
        raise ValueError(f"Truncated graph file: {len(binary_data)} bytes, expected {expected}")
    values = struct.unpack(f"!{n * n}H", binary_data[8:])
    return np.array(values, dtype=np.int64).reshape(n, n)

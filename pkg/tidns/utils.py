from __future__ import annotations

import hashlib
import json
import typing as t

import numpy as np


def get_class_fqn(cls: type) -> str:
    return f"{cls.__module__}.{cls.__qualname__}"


def canonical_json(obj: t.Any) -> bytes:
    return json.dumps(
        obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def derive_seed(seed: int, *labels: t.Any) -> int:
    material = ":".join([str(seed), *(str(label) for label in labels)])
    digest = hashlib.sha256(material.encode("utf-8")).digest()

    return int.from_bytes(digest[:8], "big")


def derive_generator(seed: int, *labels: t.Any) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *labels)))

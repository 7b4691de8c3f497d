from __future__ import annotations

import dataclasses
import enum
import struct
import typing as t

from tidns import exceptions


if t.TYPE_CHECKING:
    import typing_extensions as te


RESERVED_SEPARATOR = "\x00"
MAX_ATTRIBUTE_LEN = 0xFFFF


class Namespace(enum.Enum):
    VR = "V"
    VOTE = "v"
    TOKEN_OP = "T"

    @property
    def tag(self) -> bytes:
        return self.value.encode("ascii")

    @classmethod
    def from_tag(cls, tag: int) -> te.Self:
        try:
            return cls(chr(tag))
        except ValueError:
            raise exceptions.InvalidCompositeKeyError(
                f"unknown namespace tag {tag!r}"
            ) from None


@dataclasses.dataclass(frozen=True, slots=True, order=True)
class CompositeKey:
    """Ledger key: a namespace plus an ordered list of attributes.

    Encoded as the namespace tag byte followed by every attribute as a
    2-byte big-endian length and its UTF-8 bytes. The encoding is
    injective and a prefix of attributes encodes to a byte prefix.
    """

    namespace: Namespace = dataclasses.field(compare=False)
    raw: bytes
    attributes: tuple[str, ...] = dataclasses.field(compare=False)

    def __str__(self) -> str:
        return f"{self.namespace.name}:{'/'.join(self.attributes)}"

    def starts_with(self, prefix: t.Sequence[str]) -> bool:
        return self.attributes[: len(prefix)] == tuple(prefix)

    @classmethod
    def decode(cls, raw: bytes) -> te.Self:
        if not raw:
            raise exceptions.InvalidCompositeKeyError("empty key")

        namespace = Namespace.from_tag(raw[0])
        attributes = []
        offset = 1

        while offset < len(raw):
            if offset + 2 > len(raw):
                raise exceptions.InvalidCompositeKeyError(
                    f"truncated length at {offset}"
                )
            (length,) = struct.unpack_from(">H", raw, offset)
            offset += 2

            chunk = raw[offset : offset + length]
            if len(chunk) != length:
                raise exceptions.InvalidCompositeKeyError(
                    f"truncated attribute at {offset}"
                )
            attributes.append(chunk.decode("utf-8"))
            offset += length

        return create_composite_key(namespace, attributes)


def encode_attributes(attributes: t.Iterable[str]) -> bytes:
    chunks = []

    for attr in attributes:
        if not attr:
            raise exceptions.InvalidCompositeKeyError("empty attribute")
        if RESERVED_SEPARATOR in attr:
            raise exceptions.InvalidCompositeKeyError(
                f"attribute {attr!r} contains the reserved separator"
            )

        encoded = attr.encode("utf-8")
        if len(encoded) > MAX_ATTRIBUTE_LEN:
            raise exceptions.InvalidCompositeKeyError(
                f"attribute is longer than {MAX_ATTRIBUTE_LEN} bytes"
            )

        chunks.append(struct.pack(">H", len(encoded)))
        chunks.append(encoded)

    return b"".join(chunks)


def create_composite_key(
    namespace: Namespace, attributes: t.Sequence[str]
) -> CompositeKey:
    if not attributes:
        raise exceptions.InvalidCompositeKeyError("no attributes")

    return CompositeKey(
        namespace=namespace,
        raw=namespace.tag + encode_attributes(attributes),
        attributes=tuple(attributes),
    )


def encode_prefix(namespace: Namespace, prefix: t.Sequence[str]) -> bytes:
    if not prefix:
        raise exceptions.InvalidCompositeKeyError("empty prefix")

    return namespace.tag + encode_attributes(prefix)

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

Severity = Literal["error", "warning"]


def byte_length(text: str) -> int:
    """UTF-8 length of ``text``; lone surrogates count as three bytes."""
    return len(text.encode("utf-8", "surrogatepass"))


def byte_span(text: str, start: int, end: int) -> tuple[int, int]:
    """Converts a character span of ``text`` into ``(byte_offset, byte_length)``."""
    start = max(0, min(start, len(text)))
    end = max(start, min(end, len(text)))
    offset = byte_length(text[:start])
    return offset, byte_length(text[start:end])


class Diagnostic(BaseModel):
    """An author-facing parse message located by UTF-8 byte offsets."""

    model_config = ConfigDict(frozen=True)

    severity: Severity
    byte_offset: int = Field(ge=0)
    length: int = Field(ge=0)
    expected: tuple[str, ...] = ()
    message: str

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def to_dict(self) -> dict:
        return {
            "severity": self.severity,
            "offset": self.byte_offset,
            "length": self.length,
            "expected": list(self.expected),
            "message": self.message,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def at(
        cls,
        text: str,
        start: int,
        end: int,
        message: str,
        *,
        severity: Severity = "error",
        expected: tuple[str, ...] | list[str] = (),
    ) -> "Diagnostic":
        offset, length = byte_span(text, start, end)
        return cls(
            severity=severity,
            byte_offset=offset,
            length=length,
            expected=tuple(expected),
            message=message,
        )

"""
Line-oriented ``key = value`` documents.

Chain descriptions, disturbance profiles, experiment configs and policy
checkpoints share one grammar::

    # comment
    name = value            preamble entries (before any section)
    [section]
    key = 1.0, 2.0, 3.0     vectors are comma separated

Blank lines and ``#`` comments are ignored. Section headers may repeat; the
order of blocks is preserved.
"""

import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

from steady_arm.errors import DocumentSyntaxError

_SECTION_RE = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_]*)\]$")
_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


@dataclass(frozen=True)
class Entry:
    """A single ``key = value`` line."""

    key: str
    value: str
    line: int
    column: int


@dataclass
class Block:
    """A section header and the entries that follow it."""

    name: str
    line: int
    entries: list[Entry] = field(default_factory=list)

    def as_dict(self) -> dict[str, Entry]:
        """Map keys to entries; duplicate keys raise a syntax error."""
        seen: dict[str, Entry] = {}
        for entry in self.entries:
            if entry.key in seen:
                raise DocumentSyntaxError(
                    f"duplicate key '{entry.key}' in [{self.name}]",
                    entry.line,
                    entry.column,
                )
            seen[entry.key] = entry
        return seen


def parse_blocks(text: str) -> list[Block]:
    """
    Split a document into blocks.

    Entries before the first section header are returned in a block named
    ``""``; that block is always present (possibly empty) and comes first.

    Args:
        text: The full document.

    Returns:
        The preamble block followed by one block per section header.

    Raises:
        DocumentSyntaxError: For lines that are neither comments, headers nor
            ``key = value`` pairs.

    """
    blocks = [Block(name="", line=0)]
    for number, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        indent = len(raw) - len(raw.lstrip())
        if stripped.startswith("["):
            match = _SECTION_RE.match(stripped)
            if match is None:
                raise DocumentSyntaxError(
                    f"malformed section header '{stripped}'", number, indent + 1
                )
            blocks.append(Block(name=match.group(1), line=number))
            continue
        if "=" not in stripped:
            raise DocumentSyntaxError(
                "expected 'key = value' or '[section]'", number, indent + 1
            )
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not _KEY_RE.match(key):
            raise DocumentSyntaxError(f"invalid key '{key}'", number, indent + 1)
        value_column = raw.index("=") + 2
        if not value:
            raise DocumentSyntaxError(
                f"missing value for '{key}'", number, value_column
            )
        blocks[-1].entries.append(Entry(key, value, number, indent + 1))
    return blocks


def parse_floats(entry: Entry, count: int | None = None) -> tuple[float, ...]:
    """
    Parse a comma-separated list of reals.

    Args:
        entry: The entry holding the value.
        count: Required number of values, or ``None`` for any non-empty list.

    Returns:
        The parsed values.

    Raises:
        DocumentSyntaxError: On non-numeric items or a wrong item count.

    """
    items = split_list(entry.value)
    values: list[float] = []
    for item in items:
        try:
            values.append(float(item))
        except ValueError:
            raise DocumentSyntaxError(
                f"'{entry.key}': '{item}' is not a real number",
                entry.line,
                entry.column,
            ) from None
    if count is not None and len(values) != count:
        raise DocumentSyntaxError(
            f"'{entry.key}' expects {count} values, got {len(values)}",
            entry.line,
            entry.column,
        )
    return tuple(values)


def split_list(value: str) -> list[str]:
    """Split a comma-separated value into stripped items."""
    return [item.strip() for item in value.split(",")]


def format_value(value: object) -> str:
    """
    Render a value so that parsing it back yields the identical value.

    Floats use ``repr`` (shortest round-trip form); sequences are comma
    separated.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(float(value))
    if isinstance(value, str | int):
        return str(value)
    if isinstance(value, Sequence | Iterable):
        return ", ".join(format_value(item) for item in value)
    return str(value)


def format_float(value: float) -> str:
    """Render a float (including numpy scalars) with round-trip precision."""
    return repr(float(value))


def dump_blocks(
    preamble: Sequence[tuple[str, object]],
    sections: Sequence[tuple[str, Sequence[tuple[str, object]]]],
    header: str | None = None,
) -> str:
    """
    Serialize entries into a document.

    Args:
        preamble: Entries written before any section.
        sections: ``(section name, entries)`` pairs in output order.
        header: Optional comment line written first.

    Returns:
        The document text, newline terminated.

    """
    lines: list[str] = []
    if header:
        lines.append(f"# {header}")
    lines.extend(f"{key} = {format_value(value)}" for key, value in preamble)
    for name, entries in sections:
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {format_value(value)}" for key, value in entries)
    return "\n".join(lines) + "\n"

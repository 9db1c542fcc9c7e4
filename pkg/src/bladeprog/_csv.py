"""Small helpers for the numeric CSV files exchanged between stages."""
import io
import math
from pathlib import Path

from .errors import CSVFormatError

SIG_DIGITS = 12


def fmt(x):
    """Render a float with 12 significant digits."""
    x = float(x)
    if x == 0.0:
        return "0"
    return f"{x:.{SIG_DIGITS}g}"


def _as_text(source):
    if isinstance(source, (str, Path)):
        path = Path(source)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise CSVFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    elif isinstance(source, (bytes, bytearray)):
        data = bytes(source)
    else:
        data = source.read()
    if isinstance(data, bytes):
        try:
            data = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise CSVFormatError(f"input is not valid UTF-8: {exc}") from exc
    return data


def read_table(source, header):
    """Parse a header-checked numeric CSV.

    ``source`` may be a path, bytes, or a binary/text file object. Returns a
    list of ``(line_number, values)`` with values as floats. Blank lines are
    skipped; LF and CRLF endings are both accepted.
    """
    text = _as_text(source)
    lines = io.StringIO(text, newline=None).read().split("\n")
    rows = []
    seen_header = False
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if not seen_header:
            if cells != list(header):
                raise CSVFormatError(
                    f"expected header {','.join(header)!r}, got {line!r}", line=lineno)
            seen_header = True
            continue
        if len(cells) != len(header):
            raise CSVFormatError(
                f"expected {len(header)} fields, got {len(cells)}", line=lineno)
        values = []
        for name, cell in zip(header, cells):
            try:
                value = float(cell)
            except ValueError:
                raise CSVFormatError(f"{name}: not a number: {cell!r}",
                                     line=lineno, field=name) from None
            if not math.isfinite(value):
                raise CSVFormatError(f"{name}: non-finite value {cell!r}",
                                     line=lineno, field=name)
            values.append(value)
        rows.append((lineno, values))
    if not seen_header:
        raise CSVFormatError("empty input")
    return rows


def write_table(path_or_file, header, rows):
    """Write rows of floats with a header line and LF endings."""
    text = ",".join(header) + "\n" + "".join(
        ",".join(fmt(v) for v in row) + "\n" for row in rows)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        Path(path_or_file).write_text(text, encoding="utf-8", newline="\n")
    return text

"""Value model: attribute values are text (str) or decimal (Decimal), never null."""

from __future__ import annotations

import unicodedata
from decimal import Decimal, InvalidOperation

from .errors import DataError

Value = "str | Decimal"

TEXT = "text"
DECIMAL = "decimal"

ALL_VALUE = "all"


def parse_value(raw: str, vtype: str, where: str = ""):
    """Parse one CSV/literal cell into a typed value. Empty text is rejected."""
    loc = f" in {where}" if where else ""
    if raw is None or raw == "":
        raise DataError(f"missing value{loc}")
    if vtype == TEXT:
        return raw
    if vtype == DECIMAL:
        try:
            return Decimal(raw)
        except InvalidOperation:
            raise DataError(f"not a decimal: {raw!r}{loc}") from None
    raise DataError(f"unknown value type {vtype!r}{loc}")


def format_value(v) -> str:
    """Canonical text form, used by CSV output and SQL literals."""
    if isinstance(v, Decimal):
        return format(v, "f")
    return str(v)


def sort_key(v):
    """Deterministic ordering across mixed text/decimal domains."""
    if isinstance(v, Decimal):
        return (0, v, "")
    return (1, 0, str(v))


def fold_ident(name: str) -> str:
    """Fold a model identifier to a portable SQL name (Densité -> densite)."""
    stripped = unicodedata.normalize("NFKD", name)
    stripped = "".join(ch for ch in stripped if not unicodedata.combining(ch))
    out = []
    for ch in stripped.lower():
        out.append(ch if ch.isalnum() else "_")
    folded = "".join(out)
    if not folded or folded[0].isdigit():
        folded = "_" + folded
    return folded

"""Registry ecosystems and their naming rules."""

import re
from enum import Enum

from .exceptions import ParseError

_PYPI_SEPARATORS = re.compile(r"[-_.]+")


class Ecosystem(str, Enum):
    """Registry ecosystem; selects the version and requirement grammar."""

    NPM = "npm"
    PYPI = "pypi"
    CARGO = "cargo"

    @classmethod
    def from_label(cls, label: str) -> "Ecosystem":
        """
        Map an input label (CSV column or OSV ecosystem name) to an Ecosystem.

        Raises:
            ParseError: If the label names no supported ecosystem
        """
        eco = _ALIASES.get((label or "").strip().lower())
        if eco is None:
            raise ParseError(label, reason="unsupported ecosystem")
        return eco

    def canonical_name(self, name: str) -> str:
        """Registry-canonical package name (PyPI names are case- and separator-folded)."""
        name = name.strip()
        if self is Ecosystem.PYPI:
            return _PYPI_SEPARATORS.sub("-", name).lower()
        return name


_ALIASES = {
    "npm": Ecosystem.NPM,
    "pypi": Ecosystem.PYPI,
    "cargo": Ecosystem.CARGO,
    "crates.io": Ecosystem.CARGO,
}

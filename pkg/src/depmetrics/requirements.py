"""Dependency requirement grammar (npm, cargo and PyPI flavours)."""

import re
from enum import Enum

from packaging.version import InvalidVersion, Version

from .ecosystem import Ecosystem
from .exceptions import ParseError
from .versions import SemVersion


class Operator(str, Enum):
    """Primitive constraint operators."""

    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    TILDE = "~"
    CARET = "^"
    WILDCARD = "*"
    HYPHEN = "-"
    COMPATIBLE = "~="


_SEMVER_LITERAL = re.compile(
    r"^v?(?P<major>\d+|[xX*])(?:\.(?P<minor>\d+|[xX*]))?(?:\.(?P<patch>\d+|[xX*]))?"
    r"(?:-(?P<pre>[0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*))?(?:\+[0-9A-Za-z-]+(?:\.[0-9A-Za-z-]+)*)?$"
)
_PEP440_WILDCARD = re.compile(r"^(?P<release>\d+(?:\.\d+)*)\.\*$")
_HYPHEN_RANGE = re.compile(r"^(?P<low>\S+)\s+-\s+(?P<high>\S+)$")
_OPERATORS = {
    Ecosystem.NPM: re.compile(r"<=|>=|<|>|=|~|\^"),
    Ecosystem.CARGO: re.compile(r"<=|>=|<|>|=|~|\^"),
    Ecosystem.PYPI: re.compile(r"===|~=|==|!=|<=|>=|<|>"),
}
_LITERAL = re.compile(r"[0-9A-Za-z*][0-9A-Za-z.*+_-]*")
_PYPI_OPERATORS = {
    "==": Operator.EQ,
    "!=": Operator.NE,
    "~=": Operator.COMPATIBLE,
    "<": Operator.LT,
    "<=": Operator.LE,
    ">": Operator.GT,
    ">=": Operator.GE,
}
_SEMVER_OPERATORS = {
    "=": Operator.EQ,
    "<": Operator.LT,
    "<=": Operator.LE,
    ">": Operator.GT,
    ">=": Operator.GE,
    "~": Operator.TILDE,
    "^": Operator.CARET,
}


class PartialVersion:
    """Version literal of a constraint; trailing components may be absent or wildcards."""

    __slots__ = ("major", "minor", "patch", "prerelease")

    def __init__(
        self,
        major: int | None,
        minor: int | None = None,
        patch: int | None = None,
        prerelease: tuple[int | str, ...] = (),
    ):
        # a missing component erases every component after it
        if major is None:
            minor = None
        if minor is None:
            patch = None
        if patch is None:
            prerelease = ()
        self.major = major
        self.minor = minor
        self.patch = patch
        self.prerelease = tuple(prerelease)

    @property
    def precision(self) -> int:
        """Number of numeric components given (0 for a bare wildcard)."""
        return sum(1 for c in (self.major, self.minor, self.patch) if c is not None)

    @property
    def is_full(self) -> bool:
        return self.precision == 3

    def lower(self) -> SemVersion:
        """Smallest version the literal stands for."""
        return SemVersion(
            self.major or 0, self.minor or 0, self.patch or 0, prerelease=self.prerelease
        )

    def bump(self, index: int) -> SemVersion:
        """Version with component `index` incremented and later components zeroed."""
        parts = [self.major or 0, self.minor or 0, self.patch or 0]
        parts[index] += 1
        for i in range(index + 1, 3):
            parts[i] = 0
        return SemVersion(*parts)

    def next_at_precision(self) -> SemVersion | None:
        """Exclusive upper end of the x-range the partial literal covers."""
        if self.precision in (0, 3):
            return None
        return self.bump(self.precision - 1)

    def padded(self) -> "PartialVersion":
        return PartialVersion(self.major or 0, self.minor or 0, self.patch or 0, self.prerelease)

    def render(self, eco: Ecosystem) -> str:
        parts = [str(c) for c in (self.major, self.minor, self.patch) if c is not None]
        text = ".".join(parts) if parts else "*"
        if self.prerelease:
            if eco is Ecosystem.PYPI and len(self.prerelease) == 2:
                text += f"{self.prerelease[0]}{self.prerelease[1]}"
            else:
                text += "-" + ".".join(str(p) for p in self.prerelease)
        return text

    def _key(self) -> tuple:
        return (self.major, self.minor, self.patch, self.prerelease)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartialVersion):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f'PartialVersion("{self.render(Ecosystem.NPM)}")'


class Constraint:
    """
    Primitive constraint: one operator applied to a version literal.

    Every primitive compiles to a single version interval (or, for `!=`, the
    complement of one), so matching is a pair of bound checks.
    """

    __slots__ = ("op", "literal", "upper_literal", "_lower", "_upper", "_negated")

    def __init__(
        self,
        op: Operator,
        literal: PartialVersion,
        upper_literal: PartialVersion | None = None,
    ):
        self.op = op
        self.literal = literal
        self.upper_literal = upper_literal
        self._lower: tuple[SemVersion, bool] | None = None
        self._upper: tuple[SemVersion, bool] | None = None
        self._negated = False
        self._compile()

    def _x_range(self, literal: PartialVersion) -> None:
        if literal.precision == 0:
            return
        self._lower = (literal.lower(), True)
        if literal.is_full:
            self._upper = (literal.lower(), True)
        else:
            self._upper = (literal.next_at_precision(), False)

    def _compile(self) -> None:
        lit = self.literal
        op = self.op
        if op in (Operator.LT, Operator.LE, Operator.GT, Operator.NE) and lit.precision == 0:
            raise ParseError(f"{op.value}*", reason="wildcard cannot bound a range")

        if op in (Operator.EQ, Operator.WILDCARD):
            self._x_range(lit)
        elif op is Operator.NE:
            self._x_range(lit)
            self._negated = True
        elif op is Operator.GE:
            if lit.precision:
                self._lower = (lit.lower(), True)
        elif op is Operator.GT:
            if lit.is_full:
                self._lower = (lit.lower(), False)
            else:
                self._lower = (lit.next_at_precision(), True)
        elif op is Operator.LT:
            self._upper = (lit.lower(), False)
        elif op is Operator.LE:
            if lit.is_full:
                self._upper = (lit.lower(), True)
            else:
                self._upper = (lit.next_at_precision(), False)
        elif op is Operator.TILDE:
            if lit.precision:
                self._lower = (lit.lower(), True)
                self._upper = (lit.bump(1 if lit.precision >= 2 else 0), False)
        elif op is Operator.CARET:
            if lit.precision:
                given = [lit.major, lit.minor, lit.patch][: lit.precision]
                index = next((i for i, c in enumerate(given) if c), lit.precision - 1)
                self._lower = (lit.lower(), True)
                self._upper = (lit.bump(index), False)
        elif op is Operator.COMPATIBLE:
            if lit.precision < 2:
                raise ParseError(f"~={lit.render(Ecosystem.PYPI)}", reason="needs two components")
            self._lower = (lit.lower(), True)
            self._upper = (lit.bump(lit.precision - 2), False)
        elif op is Operator.HYPHEN:
            upper = self.upper_literal
            if upper is None:
                raise ParseError(lit.render(Ecosystem.NPM), reason="hyphen range without end")
            if lit.precision:
                self._lower = (lit.lower(), True)
            if upper.is_full:
                self._upper = (upper.lower(), True)
            elif upper.precision:
                self._upper = (upper.next_at_precision(), False)

    def allows(self, version: SemVersion) -> bool:
        """True iff the version lies in the constraint's interval (ignoring prerelease rules)."""
        inside = True
        if self._lower is not None:
            bound, inclusive = self._lower
            inside = version >= bound if inclusive else version > bound
        if inside and self._upper is not None:
            bound, inclusive = self._upper
            inside = version <= bound if inclusive else version < bound
        return not inside if self._negated else inside

    def prerelease_cores(self) -> set[tuple[int, int, int]]:
        """(major, minor, patch) of literals carrying a prerelease tag."""
        cores = set()
        for lit in (self.literal, self.upper_literal):
            if lit is not None and lit.prerelease:
                cores.add((lit.major, lit.minor, lit.patch))
        return cores

    def render(self, eco: Ecosystem) -> str:
        lit = self.literal.render(eco)
        if self.op is Operator.HYPHEN:
            return f"{lit} - {self.upper_literal.render(eco)}"
        if self.op is Operator.WILDCARD:
            return "*" if self.literal.precision == 0 else f"{lit}.*"
        if eco is Ecosystem.PYPI:
            if self.op in (Operator.EQ, Operator.NE):
                suffix = "" if self.literal.is_full else ".*"
                prefix = "==" if self.op is Operator.EQ else "!="
                return f"{prefix}{lit}{suffix}"
        return f"{self.op.value}{lit}"

    def _key(self) -> tuple:
        return (self.op, self.literal, self.upper_literal)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Constraint):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f'Constraint("{self.render(Ecosystem.NPM)}")'


class RequirementExpr:
    """Parsed requirement: a disjunction (OR) of conjunctions (AND) of constraints."""

    __slots__ = ("ecosystem", "alternatives", "source_text")

    def __init__(
        self,
        ecosystem: Ecosystem,
        alternatives: tuple[tuple[Constraint, ...], ...],
        source_text: str,
    ):
        self.ecosystem = ecosystem
        self.alternatives = alternatives
        self.source_text = source_text

    def matches(self, version: SemVersion, include_prereleases: bool = False) -> bool:
        """
        True iff some conjunction allows the version.

        A prerelease only matches a conjunction in which some literal carries a
        prerelease tag on the same (major, minor, patch), unless prereleases are
        explicitly included.
        """
        for conjunction in self.alternatives:
            if not all(c.allows(version) for c in conjunction):
                continue
            if not version.prerelease or include_prereleases:
                return True
            if any(version.core in c.prerelease_cores() for c in conjunction):
                return True
        return False

    def _key(self) -> tuple:
        return (self.ecosystem, self.alternatives)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RequirementExpr):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self) -> int:
        return hash(self._key())

    def __repr__(self) -> str:
        return f'RequirementExpr({self.ecosystem.value}, "{render_requirement(self)}")'

    def __str__(self) -> str:
        return self.source_text


def _component(text: str | None) -> int | None:
    if text is None or text in ("x", "X", "*"):
        return None
    return int(text)


def _semver_literal(text: str, source: str) -> tuple[PartialVersion, bool]:
    """Returns the literal and whether any component was an x-range wildcard."""
    match = _SEMVER_LITERAL.match(text)
    if not match:
        raise ParseError(source, reason=f"bad version literal '{text}'")
    pre = match.group("pre")
    literal = PartialVersion(
        _component(match.group("major")),
        _component(match.group("minor")),
        _component(match.group("patch")),
        tuple(int(p) if p.isdigit() else p for p in pre.split(".")) if pre else (),
    )
    if pre and not literal.is_full:
        raise ParseError(source, reason="prerelease on a partial version")
    wildcard = any(
        match.group(g) in ("x", "X", "*") for g in ("major", "minor", "patch")
    )
    return literal, wildcard


def _pep440_literal(text: str, source: str) -> tuple[PartialVersion, bool]:
    """Returns the literal and whether it ended in a `.*` wildcard."""
    if text == "*":
        return PartialVersion(None), True
    wildcard = _PEP440_WILDCARD.match(text)
    if wildcard:
        parts = [int(p) for p in wildcard.group("release").split(".")]
        if len(parts) > 2:
            raise ParseError(source, reason="wildcard beyond minor component")
        return PartialVersion(*parts), True
    if "!" in text:
        raise ParseError(source, reason="epoch segments are not supported")
    try:
        version = Version(text)
    except InvalidVersion as e:
        raise ParseError(source, reason=f"bad version literal '{text}'") from e
    if version.post is not None or version.dev is not None or version.local is not None:
        raise ParseError(source, reason="post, dev and local segments are not supported")
    if len(version.release) > 3:
        raise ParseError(source, reason=f"{len(version.release)} release components")
    parts = list(version.release)
    prerelease = tuple(version.pre) if version.pre is not None else ()
    if prerelease and len(parts) < 3:
        parts += [0] * (3 - len(parts))
    return PartialVersion(*parts, prerelease=prerelease), False


def _scan(eco: Ecosystem, text: str, source: str) -> list[tuple[str, str]]:
    """Split a conjunction into (operator, literal) tokens."""
    ops = _OPERATORS[eco]
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos] in " \t,":
            pos += 1
            continue
        op_match = ops.match(text, pos)
        op = op_match.group(0) if op_match else ""
        pos = op_match.end() if op_match else pos
        while pos < len(text) and text[pos] in " \t":
            pos += 1
        lit_match = _LITERAL.match(text, pos)
        if not lit_match:
            raise ParseError(source, reason=f"expected version at offset {pos}")
        tokens.append((op, lit_match.group(0)))
        pos = lit_match.end()
    return tokens


def _semver_constraint(eco: Ecosystem, op: str, lit_text: str, source: str) -> Constraint:
    literal, wildcard = _semver_literal(lit_text, source)
    if not op:
        if wildcard or literal.precision == 0:
            return Constraint(Operator.WILDCARD, literal)
        # bare versions: exact in npm, caret in cargo
        return Constraint(Operator.CARET if eco is Ecosystem.CARGO else Operator.EQ, literal)
    return Constraint(_SEMVER_OPERATORS[op], literal)


def _pypi_constraint(op: str, lit_text: str, source: str) -> Constraint:
    if op == "===":
        raise ParseError(source, reason="arbitrary equality is not supported")
    literal, wildcard = _pep440_literal(lit_text, source)
    if not op:
        if literal.precision == 0:
            return Constraint(Operator.WILDCARD, literal)
        op = "=="
    operator = _PYPI_OPERATORS[op]
    if wildcard and operator not in (Operator.EQ, Operator.NE):
        raise ParseError(source, reason=f"wildcard not allowed with '{op}'")
    if not wildcard and operator is not Operator.COMPATIBLE:
        # PEP 440 zero-pads release segments for ordered and exact comparisons
        literal = literal.padded()
    return Constraint(operator, literal)


def _parse_conjunction(eco: Ecosystem, text: str, source: str) -> tuple[Constraint, ...]:
    text = text.strip()
    if not text:
        if eco in (Ecosystem.NPM, Ecosystem.PYPI):
            return (Constraint(Operator.WILDCARD, PartialVersion(None)),)
        raise ParseError(source, reason="empty clause")

    if eco is Ecosystem.NPM:
        hyphen = _HYPHEN_RANGE.match(text)
        if hyphen:
            low, _ = _semver_literal(hyphen.group("low"), source)
            high, _ = _semver_literal(hyphen.group("high"), source)
            return (Constraint(Operator.HYPHEN, low, high),)

    tokens = _scan(eco, text, source)
    if eco is Ecosystem.PYPI:
        return tuple(_pypi_constraint(op, lit, source) for op, lit in tokens)
    return tuple(_semver_constraint(eco, op, lit, source) for op, lit in tokens)


def parse_requirement(eco: Ecosystem, text: str) -> RequirementExpr:
    """
    Parse a dependency requirement into a RequirementExpr.

    Supported: exact, comparators, caret, tilde, x-ranges/wildcards, hyphen ranges
    (npm), `||` alternatives (npm), comma/space conjunctions, `~=` and `!=` (PyPI)
    and bare versions (exact in npm and PyPI, caret in cargo).

    An empty requirement allows any version in npm and PyPI.

    Raises:
        ParseError: If the text uses unsupported syntax or is empty for cargo
    """
    source = (text or "").strip()
    if not source and eco is Ecosystem.CARGO:
        raise ParseError(source, reason="empty requirement")
    if eco is Ecosystem.PYPI:
        if ";" in source or "@" in source:
            raise ParseError(source, reason="markers and URL requirements are not supported")
        body = source[1:-1] if source.startswith("(") and source.endswith(")") else source
    else:
        body = source

    if "||" in body:
        if eco is not Ecosystem.NPM:
            raise ParseError(source, reason="'||' is only valid for npm")
        clauses = body.split("||")
    else:
        clauses = [body]

    alternatives = tuple(_parse_conjunction(eco, clause, source) for clause in clauses)
    return RequirementExpr(eco, alternatives, source)


def render_requirement(req: RequirementExpr) -> str:
    """Canonical text of a requirement; parsing it yields an equal AST."""
    joiner = " " if req.ecosystem is Ecosystem.NPM else ", "
    return " || ".join(
        joiner.join(c.render(req.ecosystem) for c in conjunction)
        for conjunction in req.alternatives
    )

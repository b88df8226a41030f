"""DIMACS CNF reading and writing.

Besides the standard ``p cnf n m`` body, trace files carry extended comments:

    c k <k>              original clause width
    c decimated <t>      x_1..x_t are already assigned
    c sigma <bits>       assignment over x_1..x_n, bit i is x_{i+1}
"""

from __future__ import annotations

from .formula import Assignment, Formula
from ..types import AssignmentError, Clause, DimacsError, FormulaError


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF text into a Formula.

    Clause order is preserved and clauses may span lines. Without a
    ``c k`` comment the width is the longest clause length. A SATLIB ``%``
    line ends the body.

    Raises:
        DimacsError: On a malformed header, a literal out of range, an empty
            clause, an unterminated clause or a clause count mismatch

    Examples:
        >>> parse_dimacs("p cnf 2 1\\n1 2 0").clauses
        ((1, 2),)
    """
    header: tuple[int, int] | None = None
    width: int | None = None
    decimated = 0
    clauses: list[Clause] = []
    current: list[int] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line == "%":
            break
        if not line:
            continue
        if line.startswith("c"):
            fields = line.split()
            if len(fields) >= 3 and fields[1] == "k":
                width = _parse_int(fields[2], line_no)
            elif len(fields) >= 3 and fields[1] == "decimated":
                decimated = _parse_int(fields[2], line_no)
            continue
        if line.startswith("p"):
            if header is not None:
                raise DimacsError(f"line {line_no}: duplicate problem line")
            fields = line.split()
            if len(fields) != 4 or fields[1] != "cnf":
                raise DimacsError(f"line {line_no}: malformed header {line!r}")
            n, m = _parse_int(fields[2], line_no), _parse_int(fields[3], line_no)
            if n < 0 or m < 0:
                raise DimacsError(f"line {line_no}: negative counts in header")
            header = (n, m)
            continue
        if header is None:
            raise DimacsError(f"line {line_no}: clause before problem line")
        for token in line.split():
            literal = _parse_int(token, line_no)
            if literal == 0:
                if not current:
                    raise DimacsError(f"line {line_no}: zero-length clause")
                clauses.append(tuple(current))
                current = []
            elif abs(literal) > header[0]:
                raise DimacsError(f"line {line_no}: literal {literal} out of range 1..{header[0]}")
            else:
                current.append(literal)

    if header is None:
        raise DimacsError("missing problem line 'p cnf n m'")
    if current:
        raise DimacsError("last clause is not terminated by 0")
    n, m = header
    if len(clauses) != m:
        raise DimacsError(f"header declares {m} clauses, found {len(clauses)}")
    k = width if width is not None else max((len(c) for c in clauses), default=1)
    try:
        return Formula(n=n, k=max(k, 1), clauses=tuple(clauses), decimated=decimated)
    except FormulaError as exc:
        raise DimacsError(str(exc)) from exc


def emit_dimacs(formula: Formula, *, sigma: Assignment | None = None) -> str:
    """Serialize a formula (and optionally its sigma) as DIMACS text.

    A narrowed free-variable scope is not representable and is dropped.
    """
    lines = [f"c k {formula.k}"]
    if formula.decimated:
        lines.append(f"c decimated {formula.decimated}")
    if sigma is not None:
        lines.append(f"c sigma {format_sigma(sigma)}")
    lines.append(f"p cnf {formula.n} {formula.m}")
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in formula.clauses)
    return "\n".join(lines) + "\n"


def parse_sigma(text: str) -> Assignment | None:
    """Read a sigma from a ``c sigma`` line or a bare bitstring.

    Returns None when the text carries no sigma.

    Examples:
        >>> parse_sigma("c sigma 110\\np cnf 3 0").as_dict()
        {1: 1, 2: 1, 3: 0}
        >>> parse_sigma("011").as_dict()
        {1: 0, 2: 1, 3: 1}
    """
    for raw in text.splitlines():
        fields = raw.split()
        if len(fields) >= 3 and fields[0] == "c" and fields[1] == "sigma":
            return Assignment.from_bitstring(fields[2])
        if len(fields) == 1 and set(fields[0]) <= {"0", "1"}:
            return Assignment.from_bitstring(fields[0])
    return None


def format_sigma(sigma: Assignment) -> str:
    """Bitstring over x_1..x_n; sigma must cover a prefix-closed range."""
    if sigma.variables != tuple(range(1, len(sigma) + 1)):
        raise AssignmentError("sigma lines need an assignment over x_1..x_n")
    return sigma.to_bitstring()


def _parse_int(token: str, line_no: int) -> int:
    try:
        return int(token)
    except ValueError as exc:
        raise DimacsError(f"line {line_no}: not an integer: {token!r}") from exc

"""Exception hierarchy.  Every error carries a short machine-readable ``code``
used by the CLI's JSON error channel."""

from __future__ import annotations


class WhiteheadError(Exception):
    code = "error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class GradeMismatch(WhiteheadError):
    code = "grade_mismatch"


class InvalidExpression(WhiteheadError):
    code = "invalid_expression"


class ClusterViolation(WhiteheadError):
    """An infinite sum whose summands do not shrink toward the basepoint."""

    code = "cluster_violation"

    def __init__(self, node: str, schema: str):
        super().__init__(f"summands of {node} do not cluster at the basepoint: "
                         f"support schema {schema} does not grow with the summation index")
        self.node = node
        self.schema = schema

    def to_json(self) -> dict:
        return {**super().to_json(), "node": self.node, "schema": self.schema}


class OverlapViolation(WhiteheadError):
    """A bracket whose two arguments provably touch a common wedge summand."""

    code = "overlap_violation"

    def __init__(self, bracket: str, witness: dict, index: int):
        super().__init__(f"arguments of {bracket} share wedge summand {index} "
                         f"(witness {witness})")
        self.bracket = bracket
        self.witness = dict(witness)
        self.index = index

    def to_json(self) -> dict:
        return {**super().to_json(), "index": str(self.index),
                "witness": {k: str(v) for k, v in sorted(self.witness.items())}}


class ConservativeReject(WhiteheadError):
    """Disjointness could not be certified, although no overlap was found."""

    code = "conservative_reject"


class UnorderableSupports(WhiteheadError):
    code = "unorderable_supports"


class NotInW(WhiteheadError):
    """The expression is not a sum of wedge-disjoint brackets."""

    code = "not_in_W"


class WedgeMismatch(WhiteheadError):
    code = "wedge_mismatch"


class HeterogeneousSchema(WhiteheadError):
    """A schematic subscript ranges over summands with different groups."""

    code = "heterogeneous_schema"


class ParseError(WhiteheadError):
    code = "parse_error"

    def __init__(self, line: int, col: int, expected, found: str = ""):
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        self.found = found
        exp = ", ".join(self.expected)
        super().__init__(f"line {line}, column {col}: expected one of {exp}"
                         + (f", found {found!r}" if found else ""))

    def to_json(self) -> dict:
        return {**super().to_json(), "line": self.line, "col": self.col,
                "expected": list(self.expected)}

"""Exception hierarchy.

Every error raised by the library derives from :class:`LtlabError`.  The CLI
maps :class:`PostCheckFailure` (and its subclasses) to exit status 3, usage and
parse problems to exit status 2.
"""

from __future__ import annotations


class LtlabError(Exception):
    """Base class for all library errors."""

    code = "error"

    def to_json(self) -> dict:
        return {"error": self.code, "message": str(self)}


class ContextMismatch(LtlabError):
    code = "context_mismatch"


class PrecisionExceeded(LtlabError):
    code = "precision_exceeded"


class NotAUnit(LtlabError, ZeroDivisionError):
    code = "not_a_unit"


class ConstantTermNonzero(LtlabError):
    code = "constant_term_nonzero"


class LinearNotUnit(LtlabError):
    code = "linear_not_unit"


class NotSemilinear(LtlabError):
    code = "not_semilinear"


class PrimeTwoUnsupported(LtlabError):
    code = "prime_two_unsupported"


class NotPrincipalUnit(LtlabError):
    code = "not_principal_unit"


class OddInput(LtlabError):
    code = "odd_input"


class ResidueNotExpressible(LtlabError):
    code = "residue_not_expressible"


class ConfigError(LtlabError):
    code = "config_error"


class ParseError(LtlabError):
    """Syntax error with the offending position and the set of expected tokens."""

    code = "parse_error"

    def __init__(self, text: str, position: int, expected):
        self.text = text
        self.position = position
        self.expected = sorted(set(expected))
        found = repr(text[position]) if position < len(text) else "end of input"
        super().__init__(
            f"at position {position}: found {found}, expected one of {', '.join(self.expected)}"
        )

    def to_json(self) -> dict:
        d = super().to_json()
        d.update(position=self.position, expected=self.expected)
        return d


class PostCheckFailure(LtlabError):
    """An internal consistency check failed; this indicates a bug, not bad input."""

    code = "post_check_failure"


class IntegralityFailure(PostCheckFailure):
    code = "integrality_failure"


class ThetaNotPrincipal(PostCheckFailure):
    code = "theta_not_principal"


class SolverStuck(PostCheckFailure):
    code = "solver_stuck"


class SelfMapUnavailable(UserWarning):
    """The requested Moore-spectrum parameters lie outside the range s ≤ p^k."""

"""Exception hierarchy shared across the package."""

from __future__ import annotations


class QmCertError(Exception):
    """Base class for every error raised by qmcert."""


# polyring
class UnboundVariable(QmCertError):
    pass


class ZPresent(QmCertError):
    pass


class ZeroPolynomial(QmCertError):
    pass


class UniverseMismatch(QmCertError):
    """Two polynomials live over different variable universes."""


class PolyParseError(QmCertError):
    def __init__(self, message: str, text: str = "", column: int | None = None):
        self.message = message
        self.text = text
        self.column = column
        where = f" at column {column}" if column is not None else ""
        super().__init__(f"{message}{where}")


# uniposit
class OddDegree(QmCertError):
    pass


class ConstantQ(QmCertError):
    pass


class NotPositive(QmCertError):
    pass


class PrecisionExhausted(QmCertError):
    pass


# frame
class NonpositiveN(QmCertError):
    pass


class InvalidInstance(QmCertError):
    pass


# certgen
class OddDegreeInput(QmCertError):
    pass


class DegreeMismatch(QmCertError):
    pass


class KappaExhausted(QmCertError):
    def __init__(self, kappa_max: int, message: str = "", witness=None):
        self.kappa_max = kappa_max
        self.witness = witness
        super().__init__(message or f"no positive Polya expansion up to kappa={kappa_max}")


class SearchExhausted(QmCertError):
    def __init__(self, trace: list[dict]):
        self.trace = trace
        super().__init__(f"parameter search exhausted after {len(trace)} attempts")


# qmodule
class IndexOutOfRange(QmCertError):
    pass


class MismatchedN(QmCertError):
    pass


class TierBUnavailable(QmCertError):
    pass

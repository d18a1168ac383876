"""Exact certificates for polynomial non-negativity on curve-fibred semialgebraic sets."""

__version__ = "0.1.0"

from .errors import QmCertError  # noqa: E402
from .polyring import MultiPoly, format_poly, parse  # noqa: E402
from .uniposit import UniPoly, sturm_positive  # noqa: E402
from .frame import ProblemInstance, build_simplex, check_assumptions  # noqa: E402
from .certgen import SearchLimits, search_certificate  # noqa: E402
from .qmodule import QmElement, assemble  # noqa: E402
from .verify import verify_certificate, verify_fixture_identities  # noqa: E402

__all__ = [
    "QmCertError", "MultiPoly", "format_poly", "parse", "UniPoly", "sturm_positive",
    "ProblemInstance", "build_simplex", "check_assumptions", "SearchLimits",
    "search_certificate", "QmElement", "assemble", "verify_certificate",
    "verify_fixture_identities",
]

"""Law of the hitting time of a point for strictly stable Levy processes.

Closed-form Mellin transforms, exact samplers through product
factorizations, density reconstruction by two independent routes and
executable checks of the unimodality argument.
"""

__version__ = "0.1.0"

from .mellin import (  # noqa: E402
    AdmissibilityError,
    Form,
    StableParams,
    StripError,
    moments_tau,
    tau_expr,
    tau_strip,
)
from .sampler import RandomStream, sample_tau, sample_tau_chunked  # noqa: E402
from .density import density_tau_convolution, density_tau_mellin, find_mode  # noqa: E402
from .report import VerificationReport  # noqa: E402

__all__ = [
    "AdmissibilityError",
    "Form",
    "StableParams",
    "StripError",
    "moments_tau",
    "tau_expr",
    "tau_strip",
    "RandomStream",
    "sample_tau",
    "sample_tau_chunked",
    "density_tau_convolution",
    "density_tau_mellin",
    "find_mode",
    "VerificationReport",
]

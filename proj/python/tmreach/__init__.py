from ._tmreach import (
    InputError,
    Network,
    NetworkError,
    assess_reliability,
    bernstein,
    fit_op,
    kl_divergence,
    network_reach,
    run_cli,
    verify,
)

__all__ = [
    "InputError",
    "Network",
    "NetworkError",
    "assess_reliability",
    "bernstein",
    "fit_op",
    "kl_divergence",
    "network_reach",
    "run_cli",
    "verify",
]

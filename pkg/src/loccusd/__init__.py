"""Local discrimination of entangled states without errors.

Two or more separated parties each measure their share of one of a
known set of entangled states and, after exchanging classical outcome
labels, either name the state correctly or declare failure.
"""

__version__ = "0.1.0"

from .povm import FAIL, KrausOperator, PovmSet, two_state_usd  # noqa: E402
from .protocol2 import (  # noqa: E402
    ProtocolSpec,
    build_two_party_protocol,
    failure_probability,
    run_two_party_batch,
    run_two_party_trial,
)
from .multiparty import MultiQubitSpec, QutritSpec, build_qutrit_usd, run_multiparty_batch  # noqa: E402
from .optics import run_bob_interferometer  # noqa: E402
from .qss import CheatingAlice, CheatingBob, Eve, SessionConfig, run_session  # noqa: E402
from .feasibility import infeasibility_search  # noqa: E402
from .estimators import MultipartyDiscriminator, TwoPartyDiscriminator  # noqa: E402

__all__ = [
    "FAIL", "KrausOperator", "PovmSet", "two_state_usd",
    "ProtocolSpec", "build_two_party_protocol", "failure_probability",
    "run_two_party_batch", "run_two_party_trial",
    "MultiQubitSpec", "QutritSpec", "build_qutrit_usd", "run_multiparty_batch",
    "run_bob_interferometer",
    "CheatingAlice", "CheatingBob", "Eve", "SessionConfig", "run_session",
    "infeasibility_search",
    "MultipartyDiscriminator", "TwoPartyDiscriminator",
]

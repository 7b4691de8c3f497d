from tidns.config import ExperimentConfig
from tidns.contracts import IncentiveParams
from tidns.ledger import Ledger
from tidns.resolver import LiveNetwork
from tidns.resolver import ResolverNode
from tidns.simnet import SimParams
from tidns.simnet import run_campaign


__all__ = (
    "ExperimentConfig",
    "IncentiveParams",
    "Ledger",
    "LiveNetwork",
    "ResolverNode",
    "SimParams",
    "run_campaign",
)

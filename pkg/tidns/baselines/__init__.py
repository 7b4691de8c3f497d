from tidns.baselines.schemes import BaselineParams
from tidns.baselines.schemes import OddCounterScope
from tidns.baselines.schemes import Scheme
from tidns.baselines.schemes import dependns_attempt
from tidns.baselines.schemes import harddns_attempt
from tidns.baselines.schemes import odd_attempt
from tidns.baselines.schemes import run_baseline


__all__ = (
    "BaselineParams",
    "OddCounterScope",
    "Scheme",
    "dependns_attempt",
    "harddns_attempt",
    "odd_attempt",
    "run_baseline",
)

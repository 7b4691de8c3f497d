from tidns.simnet.attack import attack_round
from tidns.simnet.attack import closed_form_poison_prob
from tidns.simnet.attack import kaminsky_attempt
from tidns.simnet.attack import sample_txids
from tidns.simnet.authoritative import Zone
from tidns.simnet.authoritative import ZoneUpstream
from tidns.simnet.authoritative import authoritative_respond
from tidns.simnet.campaign import AttackOutcome
from tidns.simnet.campaign import CampaignResult
from tidns.simnet.campaign import StakeSample
from tidns.simnet.campaign import TIDNSNetwork
from tidns.simnet.campaign import run_campaign
from tidns.simnet.campaign import run_event_loop
from tidns.simnet.events import EventKind
from tidns.simnet.events import SimEvent
from tidns.simnet.events import Simulation
from tidns.simnet.params import SWEEP_ALIASES
from tidns.simnet.params import SimParams
from tidns.simnet.params import resolve_param_name
from tidns.simnet.topology import Topology
from tidns.simnet.trace import export_trace
from tidns.simnet.trace import read_trace


__all__ = (
    "SWEEP_ALIASES",
    "AttackOutcome",
    "CampaignResult",
    "EventKind",
    "SimEvent",
    "SimParams",
    "Simulation",
    "StakeSample",
    "TIDNSNetwork",
    "Topology",
    "Zone",
    "ZoneUpstream",
    "attack_round",
    "authoritative_respond",
    "closed_form_poison_prob",
    "export_trace",
    "kaminsky_attempt",
    "read_trace",
    "resolve_param_name",
    "run_campaign",
    "run_event_loop",
    "sample_txids",
)

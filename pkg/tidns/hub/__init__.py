from tidns.hub.hub import AbstractHub
from tidns.hub.hub import EventHub
from tidns.hub.hub import ReplicationHub
from tidns.hub.scheduler import Scheduler


__all__ = ("AbstractHub", "EventHub", "ReplicationHub", "Scheduler")

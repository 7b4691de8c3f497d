from __future__ import annotations

import pathlib

import numpy as np
import pytest

from tidns import exceptions
from tidns.baselines import BaselineParams
from tidns.baselines import Scheme
from tidns.baselines import run_baseline
from tidns.contracts import IncentiveParams
from tidns.simnet import EventKind
from tidns.simnet import SimParams
from tidns.simnet import Simulation
from tidns.simnet import TIDNSNetwork
from tidns.simnet import Topology
from tidns.simnet import Zone
from tidns.simnet import attack_round
from tidns.simnet import closed_form_poison_prob
from tidns.simnet import export_trace
from tidns.simnet import kaminsky_attempt
from tidns.simnet import read_trace
from tidns.simnet import resolve_param_name
from tidns.simnet import run_campaign
from tidns.simnet import run_event_loop
from tidns.simnet import sample_txids


class TestClosedForm:
    def test_no_packets(self) -> None:
        assert closed_form_poison_prob(65536, 50, 0) == 0.0

    def test_every_id_guessed(self) -> None:
        assert closed_form_poison_prob(256, 1, 256) == 1.0

    def test_single_guess(self) -> None:
        assert closed_form_poison_prob(65536, 50, 1) == pytest.approx(
            50 / 65536
        )

    def test_small_grid(self) -> None:
        expected = 1 - (7 / 10) * (6 / 9)

        assert closed_form_poison_prob(10, 3, 2) == pytest.approx(expected)

    def test_too_many_packets(self) -> None:
        with pytest.raises(exceptions.PoisonProbabilityError):
            closed_form_poison_prob(16, 1, 17)

    def test_monotonic_in_packets(self) -> None:
        values = [
            closed_form_poison_prob(65536, 50, packets)
            for packets in (1, 10, 100, 1000)
        ]

        assert values == sorted(values)


class TestKaminsky:
    def test_empirical_rate(self) -> None:
        params = SimParams(txid_space=256, outstanding=10, attempts=0)
        rng = np.random.Generator(np.random.PCG64(5))
        trials = 4000
        hits = sum(
            kaminsky_attempt(
                sample_txids(rng, 256, 10), params, rng, packets=20
            )
            for _ in range(trials)
        )
        expected = closed_form_poison_prob(256, 10, 20)

        assert abs(hits / trials - expected) < 4 * np.sqrt(
            expected * (1 - expected) / trials
        )

    def test_zero_packets_never_poison(self) -> None:
        params = SimParams(packet_rate=0.0, attempts=0)
        rng = np.random.Generator(np.random.PCG64(5))

        assert not kaminsky_attempt(sample_txids(rng, 65536, 50), params, rng)
        assert attack_round(params, rng) == frozenset()

    def test_txids_are_distinct(self) -> None:
        rng = np.random.Generator(np.random.PCG64(1))
        txids = sample_txids(rng, 65536, 50)

        assert len(set(txids.tolist())) == 50


class TestParams:
    def test_split_rate(self) -> None:
        params = SimParams(packet_rate=10_000.0, attacked=7)

        assert params.packets_per_attempt == 2000
        assert params.packets_per_target == 285

    def test_unsplit_rate(self) -> None:
        params = SimParams(packet_rate=10_000.0, split_attack_rate=False)

        assert params.packets_per_target == 2000

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"outstanding": 0},
            {"attacked": 13},
            {"voters": 12},
            {"voters": 0},
            {"packet_rate": -1.0},
            {"check_delay_ms": 10_000.0},
            {"vote_outstanding": 0},
        ],
    )
    def test_invalid(self, kwargs: dict) -> None:
        with pytest.raises(exceptions.InvalidConfigError):
            SimParams(**kwargs)

    def test_aliases(self) -> None:
        assert resolve_param_name("A") == "attacked"
        assert resolve_param_name("voters") == "voters"


class TestSimulation:
    def test_order_by_time_then_kind(self) -> None:
        sim = Simulation()
        seen = []

        for kind in (EventKind.VOTE_CAST, EventKind.BLOCK_CUT):
            sim.on(kind, lambda event: seen.append(event.kind))
        sim.schedule(5.0, EventKind.VOTE_CAST)
        sim.schedule(5.0, EventKind.BLOCK_CUT)
        sim.schedule(1.0, EventKind.VOTE_CAST)

        sim.run()

        assert seen == [
            EventKind.VOTE_CAST,
            EventKind.BLOCK_CUT,
            EventKind.VOTE_CAST,
        ]
        assert sim.now == 5.0

    def test_run_until(self) -> None:
        sim = Simulation()
        sim.on(EventKind.FINALIZE, lambda event: None)
        sim.schedule(10.0, EventKind.FINALIZE)

        assert sim.run(until=5.0) == []
        assert sim.now == 5.0
        assert len(sim.run()) == 1

    def test_callback_wins_over_handler(self) -> None:
        sim = Simulation()
        called = []
        sim.on(EventKind.FINALIZE, lambda event: called.append("handler"))
        sim.schedule(1.0, EventKind.FINALIZE, callback=called.append)

        sim.run()

        assert called == [1.0]

    def test_no_past(self) -> None:
        with pytest.raises(ValueError):
            Simulation().schedule(-1.0, EventKind.FINALIZE)


class TestTopology:
    def test_create_from_params(self) -> None:
        topology = Topology.create(
            SimParams(resolvers=5, attacked=2, voters=3)
        )

        assert topology.victims == ("r00", "r01")
        assert topology.genesis_creator == "r04"
        assert topology.target in topology.zone

    def test_from_document(self) -> None:
        topology = Topology.from_document(
            {
                "resolvers": ["a", "b", "c", "d"],
                "victims": ["a"],
                "target": "www.bar.org",
                "zone": {
                    "records": [
                        {"name": "www.bar.org", "type": "A", "data": "1.2.3.4"}
                    ]
                },
            }
        )
        params = topology.apply_to(SimParams(voters=2))

        assert params.resolvers == 4
        assert params.attacked == 1
        assert topology.clean == ("b", "c", "d")

    def test_missing_target_record(self) -> None:
        with pytest.raises(exceptions.InvalidConfigError):
            Topology.from_document(
                {"resolvers": ["a", "b"], "target": "www.bar.org"}
            )

    def test_zone_lookup_nxdomain(self) -> None:
        zone = Zone()
        topology = Topology.create(SimParams())

        assert zone.lookup(topology.target).negative


class TestCampaign:
    def test_no_attack_means_no_forgery(self) -> None:
        result = run_campaign(SimParams(packet_rate=0.0, attempts=5, seed=3))

        assert result.attempts == 5
        assert result.successes == 0
        assert result.poisonings == 0

    def test_genesis_verifies_target(self) -> None:
        params = SimParams(packet_rate=0.0, attempts=1, seed=3)
        network = TIDNSNetwork(params)
        network.schedule_genesis()
        network.sim.run()

        node = network.nodes["r00"]
        response = node.resolve_query(network.topology.target, network.sim.now)

        assert response.verified

    def test_forgery_rejected_when_minority_poisoned(self) -> None:
        result = run_campaign(
            SimParams(
                packet_rate=1e9,
                txid_space=256,
                attacked=2,
                attempts=3,
                seed=7,
            )
        )

        assert result.poisonings > 0
        assert result.successes == 0

    def test_forgery_accepted_when_everyone_poisoned(self) -> None:
        result = run_campaign(
            SimParams(
                packet_rate=1e9,
                txid_space=256,
                resolvers=6,
                voters=3,
                attacked=6,
                attempts=2,
                seed=7,
            )
        )

        assert result.successes == result.attempts

    def test_deterministic(self) -> None:
        params = SimParams(txid_space=4096, attempts=8, seed=11)

        first = run_campaign(params)
        second = run_campaign(params)

        assert first.outcomes == second.outcomes
        assert first.state_root == second.state_root

    def test_victims_lose_stake(self) -> None:
        result = run_campaign(
            SimParams(txid_space=512, attacked=3, attempts=40, seed=2),
            IncentiveParams(),
            stake_samples=4,
        )
        shares = [sample.victim_share for sample in result.stake_samples]

        assert shares[-1] < shares[0]

    def test_rate_below_harddns(self) -> None:
        params = SimParams(packet_rate=10_000.0, attempts=300, seed=13)

        result = run_campaign(params)
        harddns = run_baseline(
            Scheme.HARDDNS, BaselineParams(), params, attempts=20_000
        )

        assert result.poisonings > 0
        assert harddns > 0
        assert result.rate < harddns / 20_000

    def test_vote_lookups_are_raced(self) -> None:
        result = run_campaign(
            SimParams(
                packet_rate=10_000.0,
                voters=1,
                vote_outstanding=50,
                attempts=100,
                seed=5,
            )
        )

        assert result.successes > 0

    def test_vote_lookup_ignores_trigger_poisoning(self) -> None:
        params = SimParams(
            packet_rate=1e9,
            txid_space=256,
            resolvers=6,
            voters=3,
            attacked=6,
            attempts=1,
            seed=7,
        )
        network = TIDNSNetwork(params)
        network.schedule_genesis()
        network.sim.run(until=network.attempt_time(0))

        network.schedule_attempt(0)
        network.sim.run(until=network.attempt_time(0) + 50.0)
        # the attack window closes before any vote lookup goes out
        network.scheduled = 0
        network.sim.run()

        assert network.poisoned[0] == set(network.topology.victims)
        assert not network.accepted


    def test_served_implies_accepted(self) -> None:
        result = run_campaign(
            SimParams(
                packet_rate=1e9,
                txid_space=256,
                resolvers=6,
                voters=3,
                attacked=6,
                attempts=2,
                seed=1,
            )
        )

        for outcome in result.outcomes:
            if outcome.client_served_forgery:
                assert outcome.ledger_accepted_forgery


def test_event_loop_trace(tmp_path: pathlib.Path) -> None:
    params = SimParams(attempts=3, seed=4)
    topology = Topology.create(params)

    trace = run_event_loop(topology, params, until=25_000.0)
    again = run_event_loop(topology, params, until=25_000.0)

    assert [event.to_document() for event in trace] == [
        event.to_document() for event in again
    ]
    assert all(event.time <= 25_000.0 for event in trace)

    for name in ("trace.jsonl", "trace.jsonl.zst"):
        path = export_trace(trace, tmp_path / name)
        assert read_trace(path) == [event.to_document() for event in trace]

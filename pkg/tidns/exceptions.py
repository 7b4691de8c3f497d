from __future__ import annotations


class TidnsError(Exception):
    pass


class LedgerError(TidnsError):
    pass


class InvalidCompositeKeyError(LedgerError, ValueError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"Invalid composite key: {reason}")


class DuplicateWriteError(LedgerError, ValueError):
    def __init__(self, tx_id: str, key: str) -> None:
        super().__init__(f"Transaction {tx_id} already writes {key}")


class TransactionClosedError(LedgerError, RuntimeError):
    def __init__(self, tx_id: str) -> None:
        super().__init__(f"Transaction {tx_id} is already submitted")


class LedgerUnavailableError(LedgerError, ConnectionError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"Ledger is unavailable: {reason}")


class ArchiveError(LedgerError):
    pass


class ArchiveBadFileError(ArchiveError, IOError):
    def __init__(self, filename: str) -> None:
        super().__init__(f"Bad file: {filename}")


class ArchiveUnsupportedVersionError(ArchiveError, ValueError):
    def __init__(self, version: int) -> None:
        super().__init__(f"Unsupported version {version}")


class ArchiveClassMismatchError(ArchiveError, ValueError):
    def __init__(self, name: str) -> None:
        super().__init__(f"Unexpected class name {name}")


class DNSCoreError(TidnsError):
    pass


class QueryMismatchError(DNSCoreError, ValueError):
    def __init__(self, left: object, right: object) -> None:
        super().__init__(f"Cannot compare answers for {left} and {right}")


class UnsupportedQTypeError(DNSCoreError, ValueError):
    def __init__(self, qtype: object) -> None:
        super().__init__(f"Unsupported query type {qtype}")


class WireDecodeError(DNSCoreError, ValueError):
    offset: int

    def __init__(self, offset: int, reason: str) -> None:
        super().__init__(f"Malformed packet at offset {offset}: {reason}")

        self.offset = offset


class UpstreamTimeoutError(DNSCoreError, TimeoutError):
    def __init__(self, qname: str, attempts: int) -> None:
        super().__init__(
            f"Upstream did not answer {qname} after {attempts} attempts"
        )


class ContractError(TidnsError):
    pass


class SubmissionProhibitedError(ContractError, PermissionError):
    def __init__(self, resolver_id: str, stake: int, required: int) -> None:
        super().__init__(
            f"Resolver {resolver_id} is temporarily prohibited from "
            f"submitting: stake {stake} < {required}"
        )


class NotAValidatorError(ContractError, PermissionError):
    def __init__(self, voter_id: str, vr_txid: str) -> None:
        super().__init__(f"{voter_id} is not a validator of {vr_txid}")


class DuplicateVoteError(ContractError, ValueError):
    def __init__(self, voter_id: str, vr_txid: str) -> None:
        super().__init__(f"{voter_id} has already voted on {vr_txid}")


class RecordNotPendingError(ContractError, LookupError):
    def __init__(self, vr_txid: str) -> None:
        super().__init__(f"Record {vr_txid} is not awaiting votes")


class NotTheCreatorError(ContractError, PermissionError):
    def __init__(self, resolver_id: str, vr_txid: str) -> None:
        super().__init__(f"{resolver_id} did not create record {vr_txid}")


class VoterSelectionError(ContractError, ValueError):
    pass


class InsufficientVotersError(VoterSelectionError):
    def __init__(self, requested: int, eligible: int) -> None:
        super().__init__(
            f"Cannot select {requested} voters out of {eligible} eligible"
        )


class ZeroStakeError(VoterSelectionError):
    def __init__(self) -> None:
        super().__init__("Total stake of participants is zero")


class SimulationError(TidnsError):
    pass


class PoisonProbabilityError(SimulationError, ValueError):
    def __init__(self, space: int, packets: int) -> None:
        super().__init__(
            f"Cannot send {packets} distinct guesses into a space of {space}"
        )


class ConfigError(TidnsError):
    pass


class InvalidConfigError(ConfigError, ValueError):
    def __init__(self, section: str, reason: str) -> None:
        super().__init__(f"Invalid [{section}] configuration: {reason}")


class UnknownSweepParameterError(ConfigError, KeyError):
    def __init__(self, name: str) -> None:
        super().__init__(f"Unknown sweep parameter {name}")

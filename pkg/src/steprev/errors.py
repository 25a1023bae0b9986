"""Exception types raised by steprev."""

from __future__ import annotations


class SteprevError(Exception):
    """Base class for every error raised by the library."""


class OverlappingSupports(SteprevError):
    pass


class UnknownAction(SteprevError):
    pass


class UnknownState(SteprevError):
    pass


class InvalidName(SteprevError):
    pass


class InvalidSystem(SteprevError):
    pass


class InvalidNet(SteprevError):
    pass


class DisconnectedSystem(SteprevError):
    pass


class ForwardDeterminismViolated(SteprevError):
    pass


class NotEnabled(SteprevError):
    pass


class LimitExceeded(SteprevError):
    pass


class StepBoundExceeded(LimitExceeded):
    pass


class StateBoundExceeded(LimitExceeded):
    pass


class CapExceeded(LimitExceeded):
    pass


class IncompletePairing(SteprevError):
    pass


class NotCest(SteprevError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class NotAHomeCover(SteprevError):
    pass


class NoHomeState(SteprevError):
    pass


class NotASetSystem(SteprevError):
    pass


class NotAReverseNet(SteprevError):
    pass


class PreconditionFailed(SteprevError):
    def __init__(self, message, clause=None, witness=None):
        super().__init__(message)
        self.clause = clause
        self.witness = witness


class VerificationFailed(SteprevError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SchemaError(SteprevError):
    def __init__(self, message, field=None, line=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.field = field
        self.line = line

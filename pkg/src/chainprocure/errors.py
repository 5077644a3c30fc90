"""Domain error hierarchy.

Every error carries a stable machine code and an HTTP status so the API
layer can map engine failures 1:1 onto wire responses.
"""

from __future__ import annotations


class ChainProcureError(Exception):
    """Base class for all domain errors."""

    code = "INTERNAL"
    http_status = 500

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)
        self.message = message or self.code


class InvalidInput(ChainProcureError):
    code = "INVALID_INPUT"
    http_status = 400


# --- ledger ---

class InvalidSignature(ChainProcureError):
    code = "INVALID_SIGNATURE"
    http_status = 401


class DuplicateTransaction(ChainProcureError):
    code = "DUPLICATE_TRANSACTION"
    http_status = 409


class CorruptLog(ChainProcureError):
    code = "CORRUPT_LOG"
    http_status = 500


# --- identity ---

class BadSeed(ChainProcureError):
    code = "BAD_SEED"
    http_status = 400


class MalformedKey(ChainProcureError):
    code = "MALFORMED_KEY"
    http_status = 400


# --- multisig ---

class BadThreshold(ChainProcureError):
    code = "BAD_THRESHOLD"
    http_status = 400


class DuplicateCosignatory(ChainProcureError):
    code = "DUPLICATE_COSIGNATORY"
    http_status = 400


class CycleDetected(ChainProcureError):
    code = "CYCLE_DETECTED"
    http_status = 400


class DepthExceeded(ChainProcureError):
    code = "DEPTH_EXCEEDED"
    http_status = 400


class UnknownCosignatory(ChainProcureError):
    code = "UNKNOWN_COSIGNATORY"
    http_status = 400


class UnknownAccount(ChainProcureError):
    code = "UNKNOWN_ACCOUNT"
    http_status = 404


class UnknownPending(ChainProcureError):
    code = "UNKNOWN_PENDING"
    http_status = 404


class NotMultisig(ChainProcureError):
    code = "NOT_MULTISIG"
    http_status = 400


class NotACosignatory(ChainProcureError):
    code = "NOT_A_COSIGNATORY"
    http_status = 403


class AlreadySigned(ChainProcureError):
    code = "ALREADY_SIGNED"
    http_status = 409


class NotOpen(ChainProcureError):
    code = "NOT_OPEN"
    http_status = 409


class NotApproved(ChainProcureError):
    code = "NOT_APPROVED"
    http_status = 409


# --- notary / KYC gate ---

class KycRequired(ChainProcureError):
    code = "KYC_REQUIRED"
    http_status = 403


# --- procurement engine ---

class DuplicateAddress(ChainProcureError):
    code = "DUPLICATE_ADDRESS"
    http_status = 409


class NotAuthorized(ChainProcureError):
    code = "NOT_AUTHORIZED"
    http_status = 403


class AlreadyDecided(ChainProcureError):
    code = "ALREADY_DECIDED"
    http_status = 409


class UnknownUser(ChainProcureError):
    code = "UNKNOWN_USER"
    http_status = 404


class BadWindow(ChainProcureError):
    code = "BAD_WINDOW"
    http_status = 400


class WindowClosed(ChainProcureError):
    code = "WINDOW_CLOSED"
    http_status = 409


class WindowNotOpen(ChainProcureError):
    code = "WINDOW_NOT_OPEN"
    http_status = 409


class WindowStillOpen(ChainProcureError):
    code = "WINDOW_STILL_OPEN"
    http_status = 409


class SelfBid(ChainProcureError):
    code = "SELF_BID"
    http_status = 409


class DuplicateBid(ChainProcureError):
    code = "DUPLICATE_BID"
    http_status = 409


class UnknownRequest(ChainProcureError):
    code = "UNKNOWN_REQUEST"
    http_status = 404


class NoBids(ChainProcureError):
    code = "NO_BIDS"
    http_status = 409


class NotClosed(ChainProcureError):
    code = "NOT_CLOSED"
    http_status = 409


class NotAParty(ChainProcureError):
    code = "NOT_A_PARTY"
    http_status = 403


class UnknownContract(ChainProcureError):
    code = "UNKNOWN_CONTRACT"
    http_status = 404


# --- service ---

class WriterBusy(ChainProcureError):
    code = "BUSY"
    http_status = 503

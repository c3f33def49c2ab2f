"""Exception types shared across the daemon.

Every error that can cross the wire carries a JSON-RPC application error
code in ``rpc_code`` so the server can map exceptions to error frames
without per-handler tables.
"""


class GeniedError(Exception):
    rpc_code = -32000


# workspace
class OutOfRange(GeniedError):
    rpc_code = -32010


class UnknownDocument(GeniedError):
    rpc_code = -32011


# scheduler
class StaleEvent(GeniedError):
    rpc_code = -32012


# prompt
class UnknownType(GeniedError):
    rpc_code = -32020


class EmptyTypeSet(GeniedError):
    rpc_code = -32021


class TaskTooLong(GeniedError):
    rpc_code = -32022


# parser
class ParseFailure(GeniedError):
    rpc_code = -32030


class EmptyGroup(GeniedError):
    rpc_code = -32031


class SchemaViolation(GeniedError):
    rpc_code = -32032


# session
class UnknownSuggestion(GeniedError):
    rpc_code = -32040


class AlreadyResolved(GeniedError):
    rpc_code = -32041


class NoCurrentGroup(GeniedError):
    rpc_code = -32042


# cost
class UnknownModel(GeniedError):
    rpc_code = -32050


# provider
class ProviderError(GeniedError):
    rpc_code = -32060


class ProviderTimeout(ProviderError):
    rpc_code = -32061


class HttpError(ProviderError):
    rpc_code = -32062

    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"HTTP {status}")
        self.status = status


class RateLimited(ProviderError):
    rpc_code = -32063


class Cancelled(ProviderError):
    rpc_code = -32064


# replay / traces
class MalformedTrace(GeniedError):
    rpc_code = -32070

    def __init__(self, message: str, line_no: int = 0):
        super().__init__(message)
        self.line_no = line_no


class NonMonotonicTime(MalformedTrace):
    rpc_code = -32071


# config
class ConfigError(GeniedError):
    rpc_code = -32080


# rpc protocol errors (reserved JSON-RPC codes, carried on the same base
# so the server can map any raised error to a frame uniformly)
class UnknownMethod(GeniedError):
    rpc_code = -32601


class InvalidParams(GeniedError):
    rpc_code = -32602

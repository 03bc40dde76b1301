"""Exception hierarchy for the promptcontrast package."""


class PromptContrastError(Exception):
    """Base class for all errors raised by this package."""


class EmptyPromptError(PromptContrastError):
    """A prompt has no words left after whitespace normalization."""


class MaskTokenError(PromptContrastError):
    """Input text already contains the mask token literal."""


class IndexNotRemainingError(PromptContrastError):
    """Masking targeted a span that was already perturbed."""


class DuplicateSpanError(PromptContrastError):
    """A provenance chain touches the same span index twice."""


class EmptyBatchError(PromptContrastError):
    """Aggregation was asked to summarize zero records."""


class ConfigError(PromptContrastError):
    """Run configuration is missing, malformed, or inconsistent."""


class ClientError(PromptContrastError):
    """Base class for remote service failures."""


class NetworkError(ClientError):
    """Transport failed after exhausting retries."""


class AuthError(ClientError):
    """Credentials are missing or were rejected by the endpoint."""


class MalformedResponseError(ClientError):
    """The endpoint answered with something the client cannot use."""


class BudgetExhaustedError(PromptContrastError):
    """Internal signal: the ledger refused to reserve another generator call."""

"""Exception types shared across pipeline stages."""


class EpisurvError(Exception):
    """Base class for all episurv errors."""


class MalformedEvent(EpisurvError):
    """An extracted event cannot be coerced into a valid 5-tuple."""


class NotHtml(EpisurvError):
    """Ingested payload is not text-like HTML."""


class EmptyText(EpisurvError):
    """An operation that requires text received an empty string."""


class UnsupportedInput(EpisurvError):
    """Input violates an operation's precondition (e.g. empty article text)."""


class UnsupportedLanguage(EpisurvError):
    """The article language is outside a provider's supported set."""


class AdapterUnavailable(EpisurvError):
    """A source adapter could not be reached after bounded retries. Retryable."""


class ProviderUnavailable(EpisurvError):
    """A model provider could not be reached or answer. Retryable."""


class UnparseableResponse(EpisurvError):
    """No JSON event array could be recovered from a model response."""


class DegenerateInput(EpisurvError):
    """A metric received input below its minimum size."""


class SingleClassInput(EpisurvError):
    """AUC-ROC is undefined when the gold labels contain a single class."""


class MisalignedArticles(EpisurvError):
    """Gold and predicted evaluation sets do not cover the same articles."""


class NotFound(EpisurvError):
    """A store lookup for an unknown id."""


class IntegrityViolation(EpisurvError):
    """A store write would create a dangling reference or illegal transition."""

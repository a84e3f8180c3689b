"""Exception types shared across the package."""


class SupplierGraphError(Exception):
    """Base class for all domain errors."""


class InvalidRecordError(SupplierGraphError):
    """A company record violates its invariants (e.g. empty name)."""


class UnknownCompanyError(SupplierGraphError):
    """A company id is not present in the registry."""


class UnknownRelationError(SupplierGraphError):
    """No relation exists for the given (customer, supplier, origin) key."""


class SelfSupplyError(SupplierGraphError):
    """A relation would connect a company to itself."""


class InvalidVerdictError(SupplierGraphError):
    """A review verdict other than confirmed/rejected was supplied."""


class SnapshotFormatError(SupplierGraphError):
    """A snapshot file could not be parsed."""


class SnapshotVersionError(SnapshotFormatError):
    """A snapshot file declares an unsupported schema version."""


class SeedFormatError(SupplierGraphError):
    """The seed registry CSV is malformed; carries row/column context."""


class ClientUnavailableError(SupplierGraphError):
    """A remote client (search, fetch, recognizer, metadata) cannot be used.

    Retryable: the caller may try again later.
    """


class QuotaExceededError(SupplierGraphError):
    """The remote search provider refused further queries; terminal for the run."""


class UnsupportedContentTypeError(SupplierGraphError):
    """A fetched document has a content type the pipeline cannot process."""


class SizeCapExceededError(SupplierGraphError):
    """A fetched payload exceeds the configured size cap."""


class ExtractionFailedError(SupplierGraphError):
    """Text extraction failed; the document is recorded with empty text."""


class MalformedResponseError(SupplierGraphError):
    """A remote recognizer reply could not be parsed as a name array."""


class AmbiguousEntityError(SupplierGraphError):
    """A knowledge-base lookup returned multiple candidate entities."""


class MissingMetadataError(SupplierGraphError):
    """A company lacks the industry/continent metadata an operation needs."""


class ManifestMismatchError(SupplierGraphError):
    """A ground-truth manifest references a company absent from the registry."""

import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path

from pydantic import ValidationError

from mathkg.core.exceptions import FetchError, RecordParseError
from mathkg.importer.records import UpstreamRecord
from mathkg.importer.wikidata import (
    WIKIDATA_SOURCE,
    EntityData,
    PropertyMap,
    to_upstream_record,
)

logger = logging.getLogger(__name__)


class SourceConnector(ABC):
    """
    Abstract base class for upstream sources.
    Defines how one record is retrieved by its upstream id.
    """

    source: str

    @abstractmethod
    def fetch(self, upstream_id: str) -> UpstreamRecord:
        """
        Retrieves one record. Must be deterministic and safe to call from
        several threads at once.

        Raises:
            FetchError: If the record cannot be retrieved or decoded.
        """


class FixtureConnector(SourceConnector):
    """
    Wikidata-style connector over a directory of ``<id>.json`` files in the
    ``Special:EntityData`` format.
    """

    def __init__(
        self,
        directory: str | Path,
        source: str = WIKIDATA_SOURCE,
        property_map: PropertyMap | None = None,
    ):
        self.directory = Path(directory)
        self.source = source
        self.property_map = property_map

    def fetch(self, upstream_id: str) -> UpstreamRecord:
        path = self.directory / f"{upstream_id}.json"
        if not path.exists():
            raise FetchError(f"No fixture for {self.source}:{upstream_id} in {self.directory}")
        try:
            document = EntityData.model_validate(json.loads(path.read_text(encoding="utf-8")))
            entity = document.entities[upstream_id]
        except (json.JSONDecodeError, ValidationError, KeyError) as e:
            raise FetchError(f"Unreadable fixture {path.name}: {e}") from e
        try:
            record = to_upstream_record(entity, self.property_map)
        except (RecordParseError, ValidationError) as e:
            raise FetchError(f"Cannot translate {upstream_id}: {e}") from e
        logger.debug(f"Fetched {self.source}:{upstream_id} from {path.name}")
        return record.model_copy(update={"source": self.source})

import csv
import io
import logging
from pathlib import Path

import pandas as pd
import pandera.pandas as pa

from mathkg.core.exceptions import RegistryError

logger = logging.getLogger(__name__)


def read_tsv_table(
    path: str | Path, columns: list[str], schema: pa.DataFrameSchema
) -> pd.DataFrame:
    """
    Reads a tab separated data table and enforces its data contract.

    Lines starting with ``#`` and blank lines are skipped. Missing trailing
    columns are read as empty strings; cells are never interpreted (no NA
    detection, no quoting) so TeX and URLs survive verbatim.

    Raises:
        FileNotFoundError: If the table does not exist.
        RegistryError: If a row has too many columns or the schema rejects it.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Table not found at: {path}")

    lines = [
        line
        for line in path.read_text(encoding="utf-8").splitlines()
        if line.strip() and not line.startswith("#")
    ]
    if not lines:
        return pd.DataFrame({column: pd.Series(dtype=str) for column in columns})

    try:
        df = pd.read_csv(
            io.StringIO("\n".join(lines)),
            sep="\t",
            header=None,
            names=columns,
            dtype=str,
            keep_default_na=False,
            quoting=csv.QUOTE_NONE,
            engine="python",
        )
    except pd.errors.ParserError as e:
        raise RegistryError(f"Malformed table {path.name}: {e}") from e

    df = df.fillna("")

    try:
        df = schema.validate(df)
    except pa.errors.SchemaError as e:
        logger.error(f"Schema Validation Error in {path.name}: {e}")
        raise RegistryError(f"Table {path.name} violates its contract: {e}") from e

    logger.info(f"Loaded {len(df)} rows from {path.name}")
    return df

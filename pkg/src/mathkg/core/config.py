from pathlib import Path
from typing import Any, Dict, Literal

import yaml
from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

from mathkg.core.paths import ProjectPaths as PP


def load_config(config_path: str | Path) -> Dict[str, Any]:
    """
    Load configuration from a YAML file.

    Args:
        config_path (str | Path): Path to the YAML configuration file.

    Returns:
        Dict[str, Any]: The configuration parameters (empty for an empty file).

    Raises:
        FileNotFoundError: If the config file does not exist.
        RuntimeError: If the file is not valid YAML or not a mapping.
    """
    path = Path(config_path)

    if not path.exists():
        raise FileNotFoundError(f"Config file not found at: {config_path}")

    with open(path, "r", encoding="utf-8") as f:
        try:
            config = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise RuntimeError(f"Error parsing YAML file: {e}")

    if config is None:
        return {}
    if not isinstance(config, dict):
        raise RuntimeError(f"Config file {config_path} must contain a mapping")
    return config


class CliConfig(BaseSettings):
    """
    Command-line configuration.
    Reads from MATHKG_* environment variables, a .env file, or uses defaults.
    """

    model_config = SettingsConfigDict(
        env_prefix="MATHKG_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        populate_by_name=True,
    )

    store_path: Path = Field(
        default=PP.DEFAULT_STORE_DIR,
        validation_alias=AliasChoices("store_path", "MATHKG_STORE"),
        description="Directory holding entities.jsonl, mappings.jsonl and the index",
    )
    macro_table_path: Path | None = Field(
        default=None,
        description="Semantic macro TSV; the bundled table is used when unset",
    )
    registry_path: Path | None = Field(
        default=None,
        description="Command registry TSV; the bundled registry is used when unset",
    )
    output_format: Literal["tsv", "json"] = "tsv"
    entity_url_template: str = Field(
        default="/wiki/Item:{id}",
        description="Local item URL used for resolved semantic links",
    )
    fetch_workers: int = Field(default=4, ge=1)
    log_level: str = "WARNING"


def load_cli_config(config_file: str | Path | None = None, **overrides: Any) -> CliConfig:
    """
    Builds the CLI configuration.

    Precedence: explicit overrides (command-line flags) > config file >
    environment > defaults. Overrides whose value is None are ignored so
    unset flags never mask the lower layers.
    """
    values: Dict[str, Any] = {}
    if config_file is not None:
        values.update(load_config(config_file))
    values.update({k: v for k, v in overrides.items() if v is not None})
    return CliConfig(**values)

from mathkg.core.config import CliConfig, load_cli_config, load_config
from mathkg.core.paths import ProjectPaths

__all__ = ["CliConfig", "ProjectPaths", "load_cli_config", "load_config"]

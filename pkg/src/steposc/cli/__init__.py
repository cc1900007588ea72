"""Command-line runner: configuration, manifests, presets and subcommands."""
from .config import DEFAULTS, build_config, load_config

__all__ = ["DEFAULTS", "build_config", "load_config"]

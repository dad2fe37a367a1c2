"""
Crypto Configuration Module

Defines the cryptographic parameter set shared by the cryptosystem, the
proof suite and the simulator, plus a process-wide configuration manager.
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import yaml

SUPPORTED_MODULUS_BITS = (512, 1024, 1536, 2048)


class ConfigurationError(Exception):
    """Exception raised when a configuration value is invalid."""
    pass


@dataclass
class CryptoConfig:
    """Cryptographic parameters for keys, proofs and verification."""

    challenge_bits: int = 128  # C = 2^challenge_bits
    masking_bits: int = 40  # L = 2^masking_bits
    statistical_bits: int = 40
    miller_rabin_rounds: int = 64
    keygen_timeout_seconds: float = 600.0
    max_workers: int = 1

    @property
    def challenge_bound(self) -> int:
        return 1 << self.challenge_bits

    @property
    def masking_bound(self) -> int:
        return 1 << self.masking_bits

    def validate(self) -> list[str]:
        """
        Check the configuration for inconsistent values.

        Returns:
            List of human-readable problems, empty when the config is valid
        """
        problems = []
        if self.challenge_bits < 1:
            problems.append("challenge_bits must be positive")
        if self.masking_bits < 1 or self.statistical_bits < 1:
            problems.append("masking_bits and statistical_bits must be positive")
        if self.miller_rabin_rounds < 1:
            problems.append("miller_rabin_rounds must be positive")
        if self.keygen_timeout_seconds <= 0:
            problems.append("keygen_timeout_seconds must be positive")
        if self.max_workers < 1:
            problems.append("max_workers must be at least 1")
        return problems

    def ensure_valid(self) -> "CryptoConfig":
        problems = self.validate()
        if problems:
            raise ConfigurationError("; ".join(problems))
        return self

    def to_dict(self) -> dict[str, Any]:
        """Convert configuration to dictionary."""
        return {
            "challenge_bits": self.challenge_bits,
            "masking_bits": self.masking_bits,
            "statistical_bits": self.statistical_bits,
            "miller_rabin_rounds": self.miller_rabin_rounds,
            "keygen_timeout_seconds": self.keygen_timeout_seconds,
            "max_workers": self.max_workers,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CryptoConfig":
        """Create configuration from dictionary."""
        return cls(
            challenge_bits=int(data.get("challenge_bits", 128)),
            masking_bits=int(data.get("masking_bits", 40)),
            statistical_bits=int(data.get("statistical_bits", 40)),
            miller_rabin_rounds=int(data.get("miller_rabin_rounds", 64)),
            keygen_timeout_seconds=float(data.get("keygen_timeout_seconds", 600.0)),
            max_workers=int(data.get("max_workers", 1)),
        )

    def save_to_file(self, file_path: str) -> None:
        """Save configuration to JSON file."""
        with open(file_path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_from_file(cls, file_path: str) -> "CryptoConfig":
        """Load configuration from a JSON or YAML file."""
        return cls.from_dict(load_mapping_file(file_path))


def load_mapping_file(file_path: str) -> dict[str, Any]:
    """
    Load a JSON or YAML mapping, choosing the parser by file suffix.

    Args:
        file_path: Path to a .json, .yaml or .yml file

    Returns:
        The parsed mapping
    """
    path = Path(file_path)
    try:
        with open(path, encoding="utf-8") as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Failed to load configuration from {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigurationError(f"Configuration file {path} must contain a mapping")
    return data


class _ConfigManager:
    """Internal configuration manager."""

    def __init__(self) -> None:
        self._config: CryptoConfig | None = None

    def get_config(self) -> CryptoConfig:
        """Get the global crypto configuration."""
        if self._config is None:
            self._config = CryptoConfig()
        return self._config

    def set_config(self, config: CryptoConfig) -> None:
        """Set the global crypto configuration."""
        self._config = config.ensure_valid()


# Global configuration manager instance
_config_manager = _ConfigManager()


def get_crypto_config() -> CryptoConfig:
    """Get the global crypto configuration."""
    return _config_manager.get_config()


def set_crypto_config(config: CryptoConfig) -> None:
    """Set the global crypto configuration."""
    _config_manager.set_config(config)

"""Workbench settings kept in a small JSON document next to the working directory."""

import copy
import json
import logging
import os
from typing import Any, Dict, Optional

from constants import DEFAULT_MAX_BACKTRACKS, DEFAULT_MAX_DEPTH, FUEL_FACTOR, ORACLE_HARD_CAP

logger = logging.getLogger(__name__)

SEED_VARIABLE = "SESSIONFORGE_SEED"

DEFAULT_SETTINGS: Dict[str, Dict[str, Any]] = {
    "inference": {
        "max_depth": DEFAULT_MAX_DEPTH,
        "max_backtracks": DEFAULT_MAX_BACKTRACKS,
    },
    "run": {
        "fuel_factor": FUEL_FACTOR,
    },
    "fuzz": {
        "seed": 0,
        "cases": 100,
        "depth": 5,
        "type_depth": 2,
    },
    "oracle": {
        "size_bound": 3,
        "cap": ORACLE_HARD_CAP,
    },
}


class SettingsManager:
    """Loads, merges and saves the settings document."""

    def __init__(self, settings_file="sessionforge.json"):
        self.settings_file = settings_file
        self.data = self._load_settings()

    def _load_settings(self) -> Dict[str, Any]:
        """Load settings from file, or use defaults if the file is missing or unreadable."""
        if os.path.exists(self.settings_file):
            try:
                with open(self.settings_file, "r") as f:
                    return self._merge_defaults(json.load(f))
            except (json.JSONDecodeError, IOError) as e:
                logger.warning("Error loading settings from %s: %s, using defaults", self.settings_file, e)
        return copy.deepcopy(DEFAULT_SETTINGS)

    def _merge_defaults(self, data: Dict[str, Any]) -> Dict[str, Any]:
        """Fill sections and keys that older files lack."""
        if not isinstance(data, dict):
            logger.warning("Settings file %s is not a JSON object, using defaults", self.settings_file)
            return copy.deepcopy(DEFAULT_SETTINGS)
        merged = copy.deepcopy(DEFAULT_SETTINGS)
        for section, values in data.items():
            if isinstance(values, dict) and section in merged:
                merged[section].update(values)
            else:
                merged[section] = values
        return merged

    def save_settings(self):
        try:
            with open(self.settings_file, "w") as f:
                json.dump(self.data, f, indent=2)
        except IOError as e:
            logger.warning("Error saving settings to %s: %s", self.settings_file, e)

    def get(self, section: str, key: str) -> Any:
        return self.data.get(section, {}).get(key, DEFAULT_SETTINGS[section][key])

    def set(self, section: str, key: str, value: Any):
        self.data.setdefault(section, {})[key] = value

    def fuzz_seed(self, flag: Optional[int] = None) -> int:
        """The environment override, else the command-line seed, else the stored one."""
        raw = os.getenv(SEED_VARIABLE)
        if raw:
            try:
                return int(raw)
            except ValueError:
                logger.warning("Ignoring non-integer %s=%r", SEED_VARIABLE, raw)
        if flag is not None:
            return flag
        return int(self.get("fuzz", "seed"))

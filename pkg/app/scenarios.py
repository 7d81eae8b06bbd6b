from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from pydantic import ValidationError

from app.logger import get_logger
from app.models import Scenario
from app.settings import settings
from app.types import UnknownScenarioError

logger = get_logger("scenarios")

FINITE_LAWS = {
    "m0.9": "finite:0.45,0.3,0.15,0.1",
    "m1.0": "finite:0.4,0.3,0.2,0.1",
    "m1.2": "finite:0.35,0.25,0.25,0.15",
    "m1.5": "finite:0.25,0.25,0.25,0.25",
}

POISSON_LAWS = {
    "m0.9": "poisson:0.9",
    "m1.0": "poisson:1.0",
    "m1.2": "poisson:1.2",
    "m1.5": "poisson:1.5",
}


def _complete_estimators(k, support_size: bool) -> List[Dict[str, Any]]:
    return [
        {"kind": "mle"},
        {"kind": "heyde"},
        {"kind": "dirichlet", "k": k},
        {"kind": "dp", "a": 1.0, "support_size": support_size},
        {"kind": "dp", "a": 100.0, "support_size": support_size},
    ]


def _incomplete_estimators(k_trunc: int) -> List[Dict[str, Any]]:
    return [
        {"kind": "mle"},
        {"kind": "heyde"},
        {"kind": "gibbs-dir", "k_trunc": k_trunc},
        {"kind": "gibbs-dp", "a": 1.0, "k_trunc": k_trunc},
    ]


class ScenarioCatalog:
    def __init__(self, config_path: Optional[str] = None):
        """Load the scenario catalog, falling back to the built-in one."""
        config_path = config_path or settings.scenario_config
        logger.debug(f"Initializing ScenarioCatalog with config path: {config_path}")
        self.config = self._load_config(config_path)
        self._scenarios = self._validate(self.config)

    def _load_config(self, config_path: str) -> Dict[str, Any]:
        """Load the YAML catalog file."""
        try:
            with open(config_path, "r") as file:
                config = yaml.safe_load(file)
            if not isinstance(config, dict) or "groups" not in config:
                raise ValueError("expected a mapping with a 'groups' key")
            logger.info(f"Loaded scenario catalog from {config_path}")
            return config
        except FileNotFoundError:
            logger.debug(f"No scenario file at {config_path}, using the built-in catalog")
            return self._get_default_config()
        except Exception as e:
            logger.warning(f"Error loading scenario file {config_path}: {str(e)}")
            logger.info("Falling back to the built-in catalog")
            return self._get_default_config()

    def _get_default_config(self) -> Dict[str, Any]:
        """Built-in catalog: finite and Poisson laws under both observation schemes."""
        generations = settings.bench_generations
        replications = settings.bench_replications

        def group(name, laws, description, data_mode, known_k, estimators):
            return {
                "name": name,
                "description": description,
                "defaults": {
                    "generations": generations,
                    "replications": replications,
                    "data_mode": data_mode,
                    "known_k": known_k,
                    "estimators": estimators,
                },
                "laws": laws,
            }

        return {
            "groups": [
                group(
                    "complete-known",
                    FINITE_LAWS,
                    "Complete data, offspring support 0..3 known",
                    "complete",
                    True,
                    _complete_estimators(3, False),
                ),
                group(
                    "complete-unknown",
                    FINITE_LAWS,
                    "Complete data, support estimated from the sample",
                    "complete",
                    False,
                    _complete_estimators("auto", True),
                ),
                group(
                    "poisson-complete",
                    POISSON_LAWS,
                    "Complete data, Poisson offspring",
                    "complete",
                    False,
                    _complete_estimators("auto", False),
                ),
                group(
                    "incomplete-known",
                    FINITE_LAWS,
                    "Generation totals only, support 0..3 known",
                    "incomplete",
                    True,
                    _incomplete_estimators(3),
                ),
                group(
                    "incomplete-unknown",
                    FINITE_LAWS,
                    "Generation totals only, truncated support 0..10",
                    "incomplete",
                    False,
                    _incomplete_estimators(10),
                ),
                group(
                    "poisson-incomplete",
                    POISSON_LAWS,
                    "Generation totals only, Poisson offspring",
                    "incomplete",
                    False,
                    _incomplete_estimators(10),
                ),
            ]
        }

    def _validate(self, config: Dict[str, Any]) -> Dict[str, Scenario]:
        scenarios: Dict[str, Scenario] = {}
        for entry in config["groups"]:
            defaults = entry.get("defaults", {})
            for law_name, offspring in entry.get("laws", {}).items():
                name = f"{entry['name']}-{law_name}"
                try:
                    scenarios[name] = Scenario(
                        name=name,
                        group=entry["name"],
                        description=entry.get("description", ""),
                        offspring=offspring,
                        **defaults,
                    )
                except ValidationError as e:
                    logger.error(f"Invalid scenario {name}: {e}")
                    raise
        logger.debug(f"Catalog holds {len(scenarios)} scenarios")
        return scenarios

    def names(self) -> List[str]:
        return list(self._scenarios)

    def groups(self) -> List[str]:
        return list(dict.fromkeys(s.group for s in self._scenarios.values()))

    def scenarios(self) -> List[Scenario]:
        return list(self._scenarios.values())

    def get(self, name: str) -> Scenario:
        try:
            return self._scenarios[name]
        except KeyError:
            raise UnknownScenarioError(
                f"Unknown scenario '{name}'; known: {', '.join(self.names())}"
            ) from None

    def select(self, selector: str) -> List[Scenario]:
        """``all``, a group name, or a scenario name."""
        if selector == "all":
            return self.scenarios()
        if selector in self.groups():
            return [s for s in self._scenarios.values() if s.group == selector]
        return [self.get(selector)]


def scenario_catalog(config_path: Optional[str] = None) -> List[Scenario]:
    return ScenarioCatalog(config_path).scenarios()


def write_catalog(path: Path, catalog: ScenarioCatalog) -> None:
    with open(path, "w") as file:
        yaml.safe_dump(catalog.config, file, sort_keys=False)

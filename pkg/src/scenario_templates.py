import json
import os
from typing import Any, Dict, List

from config_store import SCENARIO_TEMPLATES_DIR, ScenarioConfig


def _as_str(value: Any) -> str:
    return str(value or "").strip()


def _as_int_list(value: Any) -> List[int]:
    if value is None:
        return []
    if isinstance(value, list):
        return [int(item) for item in value]
    txt = _as_str(value)
    if not txt:
        return []
    return [int(part) for part in txt.replace(",", " ").split() if part]


def list_templates(template_dir: str = SCENARIO_TEMPLATES_DIR) -> List[str]:
    if not os.path.isdir(template_dir):
        return []
    return sorted(
        os.path.splitext(name)[0] for name in os.listdir(template_dir) if name.lower().endswith(".json")
    )


def normalize_scenario_config(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Accepts a few loose spellings before strict validation."""
    src = dict(raw) if isinstance(raw, dict) else {}
    if "design" in src and isinstance(src["design"], str):
        src["design_kind"] = _as_str(src.pop("design")).lower()
    if "design_kind" in src:
        src["design_kind"] = _as_str(src["design_kind"]).lower()
    if "p0_grid" in src:
        src["p0_grid"] = _as_int_list(src["p0_grid"])
    if "name" not in src or not _as_str(src.get("name")):
        src["name"] = "scenario"
    return src


def read_scenario_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        raw = json.load(handle)
    if not isinstance(raw, dict):
        raise ValueError(f"{path} must contain a JSON object")
    data = normalize_scenario_config(raw)
    if data["name"] == "scenario":
        data["name"] = os.path.splitext(os.path.basename(path))[0]
    return ScenarioConfig.model_validate(data)


def resolve_scenario(name_or_path: str, template_dir: str = SCENARIO_TEMPLATES_DIR) -> ScenarioConfig:
    """A built-in template name or a path to a scenario JSON file."""
    asked = _as_str(name_or_path)
    if not asked:
        raise FileNotFoundError("Scenario name or path is required.")
    if os.path.isfile(asked):
        return read_scenario_file(asked)
    candidate = os.path.join(template_dir, f"{asked}.json")
    if os.path.isfile(candidate):
        return read_scenario_file(candidate)
    known = ", ".join(list_templates(template_dir)) or "none"
    raise FileNotFoundError(f"Scenario not found: {asked} (templates: {known})")


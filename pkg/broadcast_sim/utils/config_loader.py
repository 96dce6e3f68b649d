import yaml
import logging
from pathlib import Path
from typing import Dict, Any, List, Optional
from jsonschema import validate, ValidationError

# --- Non-empty list of numbers ---
def _number_list(minimum: Optional[float] = None, exclusive: bool = False) -> Dict[str, Any]:
    item: Dict[str, Any] = {"type": "number"}
    if minimum is not None:
        item["exclusiveMinimum" if exclusive else "minimum"] = minimum
    return {"type": "array", "items": item, "minItems": 1}


class ConfigLoader:
    """Handles loading and validation of sweep spec files (YAML or JSON)."""

    # --- Sweep Spec Schema ---
    SWEEP_SPEC_SCHEMA = {
        "type": "object",
        "properties": {
            "name": {"type": "string", "description": "Name of the sweep, used in output file names"},
            "description": {"type": "string", "description": "Optional description"},
            "dimension": {"type": "integer", "enum": [1, 2], "description": "1 for the line, 2 for the plane"},
            "alpha_values": {**_number_list(0, exclusive=True), "description": "Path loss exponents"},
            "lambda_values": {**_number_list(0), "description": "Node densities"},
            "extents": {**_number_list(0, exclusive=True), "description": "Window half-widths"},
            "trials": {"type": "integer", "minimum": 1, "description": "Trials per cell"},
            "master_seed": {"type": "integer", "minimum": 0, "description": "Seed every trial seed derives from"},
            "metric": {
                "type": "string",
                "enum": ["full_coverage", "one_sided_extent"],
                "default": "full_coverage",
                "description": "Success criterion per trial"
            },
            "p_t": {"type": "number", "exclusiveMinimum": 0, "default": 1.0, "description": "Transmit power"},
            "tau": {"type": "number", "exclusiveMinimum": 0, "default": 1.0, "description": "Decode threshold"},
            "workers": {"type": "integer", "minimum": 1, "default": 1, "description": "Worker processes"},
            "output_dir": {"type": "string", "default": "outputs", "description": "Base directory for output files"},
            "output_format": {
                "type": "string",
                "enum": ["csv", "json"],
                "default": "csv",
                "description": "Format of the sweep result file"
            },
            "ratio_threshold": {"type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": 0.5,
                                "description": "p_hat(largest) < ratio * p_hat(smallest) counts as vanishing"},
            "persistence_floor": {"type": "number", "minimum": 0, "maximum": 1, "default": 0.05,
                                  "description": "p_hat must stay above this to count as persistent"}
        },
        "required": ["dimension", "alpha_values", "lambda_values", "extents", "trials", "master_seed"],
        "additionalProperties": False
    }
    # --- End Sweep Spec Schema ---

    DEFAULTS = {
        "name": "sweep",
        "metric": "full_coverage",
        "p_t": 1.0,
        "tau": 1.0,
        "workers": 1,
        "output_dir": "outputs",
        "output_format": "csv",
        "ratio_threshold": 0.5,
        "persistence_floor": 0.05,
    }

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def load_config(self, config_path: str) -> Dict[str, Any]:
        config = {}
        try:
            config = self._load_yaml(config_path)
            if not isinstance(config, dict):
                raise ValidationError(f"Top level must be a mapping, got {type(config).__name__}")
            for key, value in self.DEFAULTS.items():
                config.setdefault(key, value)
            self.validate_config(config)
            self.logger.info(f"Sweep spec loaded and validated: {config_path}")
            return config
        except FileNotFoundError: self.logger.error(f"Spec file not found: {config_path}"); raise
        except yaml.YAMLError as e: self.logger.error(f"Error parsing spec {config_path}: {e}"); raise
        except ValidationError as e: error_path = " -> ".join(map(str, e.path)) or "root"; msg = f"Spec validation error in {config_path} at '{error_path}': {e.message}"; self.logger.error(msg); self.logger.debug(f"Schema context: {e.schema}"); raise

    def _load_yaml(self, file_path: str) -> Any:
        # JSON is a subset of YAML, so one parser covers both spec formats
        with open(file_path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def validate_config(self, config: Dict[str, Any]) -> bool:
        validate(instance=config, schema=self.SWEEP_SPEC_SCHEMA)
        if config.get('metric') == 'one_sided_extent' and config.get('dimension') != 1:
            raise ValidationError("metric 'one_sided_extent' requires dimension 1", path=['metric'])
        if len(config.get('extents', [])) < 3:
            self.logger.warning("Fewer than three extents: regime classification will not be available.")
        return True

    def generate_sample_specs(self, output_dir: Optional[str] = None, trials: int = 1000,
                              seed: int = 20240101) -> List[str]:
        """
        Write the built-in regime-table grids as sweep spec files (one per
        dimension) into 'configs/generated_samples/' or `output_dir`.

        Returns:
            A list of paths to the generated spec files.
        """
        # Deferred import: the harness pulls in the simulation stack
        from ..experiment_harness import DEFAULT_EXTENTS, REGIME_GRID

        sample_dir = Path(output_dir) if output_dir else Path("configs") / "generated_samples"
        try:
            sample_dir.mkdir(parents=True, exist_ok=True)
            self.logger.info(f"Ensured sample spec directory exists: {sample_dir.resolve()}")
        except OSError as e:
            self.logger.error(f"Error creating sample spec directory {sample_dir}: {e}")
            raise

        generated_files = []
        for dimension in (1, 2):
            grid = REGIME_GRID[dimension]
            spec = {
                "name": f"regimes_{dimension}d",
                "description": f"Regime table in {dimension}-D over the default window extents.",
                "dimension": dimension,
                "alpha_values": sorted({alpha for alpha, _ in grid}),
                "lambda_values": sorted({lam for _, lam in grid}),
                "extents": list(DEFAULT_EXTENTS[dimension]),
                "trials": trials,
                "master_seed": seed,
                "metric": "full_coverage",
                "workers": 1,
                "output_dir": "outputs",
                "output_format": "csv",
            }
            path = sample_dir / f"sample_regimes_{dimension}d.yaml"
            try:
                with open(path, 'w', encoding='utf-8') as f:
                    yaml.dump(spec, f, sort_keys=False, default_flow_style=False, allow_unicode=True)
            except OSError as e:
                self.logger.error(f"Error writing sample spec to {path}: {e}")
                raise
            self.logger.info(f"Generated sample spec: {path.resolve()}")
            generated_files.append(str(path.resolve()))
        return generated_files

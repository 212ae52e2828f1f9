#!/usr/bin/env python3
"""
Configuration Manager for Verification Runs
Loads the JSON simulation settings (sampling, quadrature, statistics, verification, reporting)
"""

import copy
import json
import os
from typing import Any, Dict, List


class ConfigManager:
    """Manages simulation settings loading"""

    def __init__(self, settings_config_path: str = "simulation_config.json"):
        self.settings_config_path = settings_config_path
        self.settings_config = self._load_settings_config()

    def _load_settings_config(self) -> Dict[str, Any]:
        """Load settings from JSON, filling any missing section from the defaults"""
        defaults = self._get_default_settings_config()
        try:
            if os.path.exists(self.settings_config_path):
                with open(self.settings_config_path, 'r', encoding='utf-8') as f:
                    config = json.load(f)
                print(f"✅ Loaded simulation settings from {self.settings_config_path}")
                return self._merge(defaults, config)
            else:
                print(f"⚠️  Simulation settings not found at {self.settings_config_path}, using defaults")
                return defaults
        except Exception as e:
            print(f"❌ Error loading simulation settings: {e}, using defaults")
            return defaults

    @staticmethod
    def _merge(defaults: Dict[str, Any], loaded: Dict[str, Any]) -> Dict[str, Any]:
        merged = copy.deepcopy(defaults)
        for key, value in loaded.items():
            if isinstance(value, dict) and isinstance(merged.get(key), dict):
                merged[key].update(value)
            else:
                merged[key] = value
        return merged

    def _get_default_settings_config(self) -> Dict[str, Any]:
        """Get default settings if the file doesn't exist"""
        return {
            "description": "Default simulation settings",
            "version": "1.0",
            "sampling": {
                "max_crossovers": None,
                "kill_epsilon_factor": 2.0
            },
            "quadrature": {
                "abs_tolerance": 1e-10,
                "subdivision_limit": 200
            },
            "kernels": {
                "tail_target": 1e-12
            },
            "statistics": {
                "z_threshold": 3.0,
                "bonferroni_alpha": 0.0027,
                "batch_size": 1000,
                "bias_constants": {
                    "hitting_lt": 0.5,
                    "resolvent": 1.0,
                    "lifetime": 2.0,
                    "chain": 0.5
                }
            },
            "verification": {
                "paths": 20000,
                "step": 1e-3,
                "horizon": 40.0,
                "lambdas": [0.25, 0.5, 2.0],
                "probe_points": 5,
                "repeat_at_quarter_step": True,
                "chain_lambda_grid": [0.25, 0.5, 1.0, 2.0],
                "chain_horizon": 40.0,
                "conservation_paths": 200,
                "walsh_horizon": 4.0,
                "kernel_property_samples": 1000,
                "crossover_check_paths": 10000,
                "tadpole_grid_points": 50,
                "identity_grid_points": 20
            },
            "report_formatting": {
                "header_color": "366092",
                "failed_row_color": "F8D7DA",
                "default_column_widths": [16, 34, 14, 14, 12, 10, 10, 10, 10, 8]
            }
        }

    def section(self, name: str) -> Dict[str, Any]:
        return self.settings_config.get(name, {})

    def bias_constant(self, quantity: str) -> float:
        return float(self.section("statistics").get("bias_constants", {}).get(quantity, 0.0))

    def z_threshold(self) -> float:
        return float(self.section("statistics").get("z_threshold", 3.0))

    def batch_size(self) -> int:
        return int(self.section("statistics").get("batch_size", 1000))

    def chain_lambda_grid(self) -> List[float]:
        return [float(x) for x in self.section("verification").get("chain_lambda_grid", [0.5])]

    def quadrature(self) -> Dict[str, Any]:
        """Keyword arguments for solve_resolvent"""
        q = self.section("quadrature")
        return {"tolerance": float(q.get("abs_tolerance", 1e-10)), "limit": int(q.get("subdivision_limit", 200))}

    def kill_epsilon_factor(self) -> float:
        return float(self.section("sampling").get("kill_epsilon_factor", 2.0))

    def max_crossovers(self):
        value = self.section("sampling").get("max_crossovers")
        return None if value is None else int(value)

    def tail_target(self) -> float:
        return float(self.section("kernels").get("tail_target", 1e-12))

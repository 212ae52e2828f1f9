import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


class SimulationConfig:
    """Run defaults read from the environment (SIM_* variables)"""

    def __init__(self):
        self.step = self._number('SIM_STEP', '1e-4')
        self.horizon = self._number('SIM_HORIZON', '40.0')
        self.paths = self._number('SIM_PATHS', '20000', int)
        self.seed = self._number('SIM_SEED', '7', int)
        self.workers = self._number('SIM_WORKERS', '1', int)
        self.output_dir = os.getenv('SIM_OUTPUT_DIR', 'output')
        self.settings_path = os.getenv('SIM_SETTINGS_PATH', 'simulation_config.json')

        self.validate()

    @staticmethod
    def _number(name: str, default: str, kind=float):
        raw = os.getenv(name, default)
        try:
            return kind(raw)
        except ValueError:
            # reported by validate()
            return None

    def validate(self):
        """Validate that every setting is present and in range"""
        checks = [
            ('SIM_STEP', self.step is not None and 0 < self.step < 1),
            ('SIM_HORIZON', self.horizon is not None and self.horizon > 0),
            ('SIM_PATHS', self.paths is not None and self.paths >= 2),
            ('SIM_SEED', self.seed is not None and self.seed >= 0),
            ('SIM_WORKERS', self.workers is not None and self.workers >= 1),
            ('SIM_OUTPUT_DIR', bool(self.output_dir)),
        ]

        bad_fields = [name for name, ok in checks if not ok]
        if bad_fields:
            raise ValueError(f"Invalid simulation configuration: {', '.join(bad_fields)}. Please update your .env file.")

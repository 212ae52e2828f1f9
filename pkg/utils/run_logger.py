#!/usr/bin/env python3
"""
Run Logger
Prints status lines and mirrors them, timestamped, into the run log of the output directory
"""

import os
from datetime import datetime
from typing import Optional


class RunLogger:
    """Console status lines plus an optional timestamped run.log"""

    def __init__(self, output_dir: Optional[str] = None, filename: str = "run.log", quiet: bool = False):
        self.log_path = os.path.join(output_dir, filename) if output_dir else None
        self.quiet = quiet
        if self.log_path:
            os.makedirs(output_dir, exist_ok=True)

    def status(self, message: str):
        if not self.quiet:
            print(message)
        if self.log_path:
            stamp = datetime.now().isoformat(timespec="seconds")
            with open(self.log_path, 'a', encoding='utf-8') as f:
                f.write(f"{stamp} {message}\n")

    __call__ = status

#!/usr/bin/env python3
"""
Report Manager for Verification Runs
Writes the comparison rows as report.csv, a structured-text summary and a styled xlsx workbook
"""

import os
from typing import Dict, List, Optional

import openpyxl
import pandas as pd
from openpyxl.styles import Alignment, Font, PatternFill

from estimation.comparison import REPORT_COLUMNS, ComparisonRow
from verification.settings.config_manager import ConfigManager


class ReportManager:
    """Manages the verification report artifacts"""

    def __init__(self, config_manager: ConfigManager, output_dir: str = "output"):
        self.config_manager = config_manager
        self.output_dir = output_dir
        self.formatting = config_manager.section("report_formatting")

    def report_frame(self, rows: List[ComparisonRow]) -> pd.DataFrame:
        return pd.DataFrame([row.as_row() for row in rows], columns=REPORT_COLUMNS)

    def write_csv(self, rows: List[ComparisonRow], filename: str = "report.csv") -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        path = os.path.join(self.output_dir, filename)
        self.report_frame(rows).to_csv(path, index=False, float_format="%.10g")
        print(f"💾 Saved report to {path}")
        return path

    def summary_lines(self, rows: List[ComparisonRow], context: Dict[str, object]) -> List[str]:
        """key: value lines; no timestamps so reruns are byte-identical"""
        failed = [row for row in rows if not row.passed]
        lines = [f"{key}: {value}" for key, value in context.items()]
        lines.append(f"rows: {len(rows)}")
        lines.append(f"passed: {len(rows) - len(failed)}")
        lines.append(f"failed: {len(failed)}")
        experiments = sorted({row.experiment_id for row in rows})
        for experiment in experiments:
            group = [row for row in rows if row.experiment_id == experiment]
            status = "pass" if all(row.passed for row in group) else "FAIL"
            lines.append(f"{experiment}: {status} ({sum(r.passed for r in group)}/{len(group)})")
        for row in failed:
            lines.append(f"  failed {row.experiment_id} {row.quantity}: reference={row.reference:.10g} "
                         f"mean={row.mean:.10g} z={row.z:.3g}")
        lines.append(f"result: {'PASS' if not failed else 'FAIL'}")
        return lines

    def write_summary(self, rows: List[ComparisonRow], context: Dict[str, object],
                      filename: str = "summary.txt") -> str:
        os.makedirs(self.output_dir, exist_ok=True)
        path = os.path.join(self.output_dir, filename)
        with open(path, 'w', encoding='utf-8') as f:
            f.write("\n".join(self.summary_lines(rows, context)) + "\n")
        print(f"💾 Saved summary to {path}")
        return path

    def write_workbook(self, rows: List[ComparisonRow], filename: str = "report.xlsx") -> Optional[str]:
        """One sheet of rows with the header styled; failed rows are shaded"""
        os.makedirs(self.output_dir, exist_ok=True)
        path = os.path.join(self.output_dir, filename)
        workbook = openpyxl.Workbook()
        ws = workbook.active
        ws.title = "Verification"

        for column, header in enumerate(REPORT_COLUMNS, 1):
            ws.cell(row=1, column=column).value = header
        self._apply_header_formatting(ws)

        failed_color = self.formatting.get("failed_row_color", "F8D7DA")
        failed_fill = PatternFill(start_color=failed_color, end_color=failed_color, fill_type="solid")
        for index, row in enumerate(rows, 2):
            values = row.as_row()
            for column, key in enumerate(REPORT_COLUMNS, 1):
                ws.cell(row=index, column=column).value = values[key]
                if not row.passed:
                    ws.cell(row=index, column=column).fill = failed_fill

        workbook.save(path)
        print(f"💾 Saved workbook to {path}")
        return path

    def _apply_header_formatting(self, ws):
        header_color = self.formatting.get("header_color", "366092")
        header_fill = PatternFill(start_color=header_color, end_color=header_color, fill_type="solid")
        header_font = Font(bold=True, color="FFFFFF")
        for column in range(1, len(REPORT_COLUMNS) + 1):
            cell = ws.cell(row=1, column=column)
            cell.fill = header_fill
            cell.font = header_font
            cell.alignment = Alignment(horizontal='center')

        widths = self.formatting.get("default_column_widths", [])
        for i, width in enumerate(widths, 1):
            ws.column_dimensions[openpyxl.utils.get_column_letter(i)].width = width

"""
Report Generation Service
Writes experiment rows as CSV, JSON or a formatted Excel workbook
"""
import json
import logging
import os
from datetime import datetime, timezone
from enum import Enum
from typing import List, Optional, Sequence

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Border, Font, PatternFill, Side
from openpyxl.utils import get_column_letter
from openpyxl.utils.dataframe import dataframe_to_rows

from src.config.settings import settings
from src.models.experiment import ReportRow
from src.utils.exceptions import ReportError

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["experiment", "params", "measured", "predicted", "ratio", "pass", "runtime_ms"]


class ReportFormat(str, Enum):
    CSV = "csv"
    JSON = "json"
    XLSX = "xlsx"

    def __str__(self):
        return self.value


class ReportService:
    """
    Service for writing report rows

    CSV columns are exactly REPORT_COLUMNS; JSON is the row list verbatim.
    """

    def __init__(self, output_dir: Optional[str] = None):
        self.output_dir = output_dir or settings.REPORT_DIR
        self._init_styles()

    def _init_styles(self):
        """Excel styles shared by the sheets"""
        self.header_color = "366092"
        self.pass_color = "70AD47"
        self.fail_color = "FF0000"

        self.title_font = Font(name='Calibri', size=16, bold=True)
        self.header_font = Font(name='Calibri', size=12, bold=True, color="FFFFFF")
        self.normal_font = Font(name='Calibri', size=11)
        self.bold_font = Font(name='Calibri', size=11, bold=True)

        self.header_fill = PatternFill(start_color=self.header_color, end_color=self.header_color, fill_type="solid")
        self.thin_border = Border(left=Side(style='thin'), right=Side(style='thin'),
                                  top=Side(style='thin'), bottom=Side(style='thin'))
        self.center_align = Alignment(horizontal='center', vertical='center')

    def default_path(self, fmt: ReportFormat) -> str:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S")
        return os.path.join(self.output_dir, f"{stamp}_report.{fmt.value}")

    @staticmethod
    def to_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
        return pd.DataFrame([row.to_record() for row in rows], columns=REPORT_COLUMNS)

    def emit_report(self, rows: Sequence[ReportRow], fmt: ReportFormat = ReportFormat.CSV,
                    path: Optional[str] = None) -> str:
        """
        Write the rows in the requested format

        Args:
            rows: Report rows, written in the given order
            fmt: csv, json or xlsx
            path: Output file; a timestamped file in the report directory when omitted

        Returns:
            Path written

        Raises:
            ReportError: if there are no rows or the path cannot be written
        """
        if not rows:
            raise ReportError("Refusing to write an empty report")
        fmt = ReportFormat(fmt)
        path = path or self.default_path(fmt)
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            if fmt == ReportFormat.CSV:
                self.to_frame(rows).to_csv(path, index=False, lineterminator="\n")
            elif fmt == ReportFormat.JSON:
                with open(path, "w") as handle:
                    json.dump([row.to_record() for row in rows], handle, indent=2)
                    handle.write("\n")
            else:
                self.generate_excel_report(rows, path)
        except OSError as e:
            raise ReportError(f"Cannot write report to {path}: {e}") from e
        logger.info(f"Report with {len(rows)} rows written to {path}")
        return path

    @staticmethod
    def load_json(path: str) -> List[ReportRow]:
        with open(path) as handle:
            return [ReportRow(**record) for record in json.load(handle)]

    # Excel

    def generate_excel_report(self, rows: Sequence[ReportRow], path: str) -> str:
        """Summary sheet with per-experiment pass counts and a Rows sheet with pass/fail colouring"""
        wb = Workbook()
        if 'Sheet' in wb.sheetnames:
            wb.remove(wb['Sheet'])
        df = self.to_frame(rows)
        self._create_summary_sheet(wb, df)
        self._create_rows_sheet(wb, df)
        wb.properties.title = "Spectral multiplier report"
        wb.save(path)
        return path

    def _header(self, ws, row: int, headers: Sequence[str]):
        for col, header in enumerate(headers, 1):
            cell = ws.cell(row=row, column=col, value=header)
            cell.font = self.header_font
            cell.fill = self.header_fill
            cell.alignment = self.center_align
            cell.border = self.thin_border

    def _create_summary_sheet(self, wb: Workbook, df: pd.DataFrame):
        ws = wb.create_sheet("Summary")
        ws['A1'] = "Experiment Summary"
        ws['A1'].font = self.title_font
        ws.merge_cells('A1:D1')

        self._header(ws, 3, ["Experiment", "Rows", "Passed", "Failed"])
        grouped = df.groupby('experiment')['pass'].agg(['count', 'sum'])
        row = 3
        for experiment, stats in grouped.iterrows():
            row += 1
            passed = int(stats['sum'])
            failed = int(stats['count']) - passed
            ws.cell(row=row, column=1, value=experiment).font = self.bold_font
            ws.cell(row=row, column=2, value=int(stats['count']))
            ws.cell(row=row, column=3, value=passed)
            failed_cell = ws.cell(row=row, column=4, value=failed)
            failed_cell.font = Font(color=self.fail_color if failed else self.pass_color, bold=True)
            for col in range(1, 5):
                ws.cell(row=row, column=col).border = self.thin_border

        status_row = row + 2
        ws[f'A{status_row}'] = "Status:"
        ws[f'A{status_row}'].font = self.bold_font
        if bool(df['pass'].all()):
            ws[f'B{status_row}'] = "All rows pass"
            ws[f'B{status_row}'].font = Font(color=self.pass_color, bold=True)
        else:
            ws[f'B{status_row}'] = f"{int((~df['pass']).sum())} rows fail"
            ws[f'B{status_row}'].font = Font(color=self.fail_color, bold=True)
        for col in ['A', 'B', 'C', 'D']:
            ws.column_dimensions[col].width = 18

    def _create_rows_sheet(self, wb: Workbook, df: pd.DataFrame):
        ws = wb.create_sheet("Rows")
        pass_column = df.columns.get_loc('pass') + 1
        for r_idx, values in enumerate(dataframe_to_rows(df, index=False, header=True), 1):
            for c_idx, value in enumerate(values, 1):
                cell = ws.cell(row=r_idx, column=c_idx, value=value)
                if r_idx == 1:
                    cell.font = self.header_font
                    cell.fill = self.header_fill
                    cell.alignment = self.center_align
                else:
                    cell.font = self.normal_font
                    if c_idx == pass_column:
                        cell.font = Font(color=self.pass_color if value else self.fail_color, bold=True)
                cell.border = self.thin_border

        for column in ws.columns:
            width = max(min(len(str(cell.value)), 60) for cell in column if cell.value is not None)
            ws.column_dimensions[get_column_letter(column[0].column)].width = width + 2
        ws.freeze_panes = 'A2'
        ws.auto_filter.ref = ws.dimensions

"""Export manager for loss histories, tabular results and JSON reports"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd
from openpyxl import load_workbook
from openpyxl.styles import Alignment, Font, PatternFill

from ..utils.error_handler import ExportError
from ..utils.logger import LoggerMixin


def _json_default(value):
    """Serialize numpy scalars/arrays and paths inside reports"""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


class ExportManager(LoggerMixin):
    """Writes run artifacts as CSV, Excel or JSON

    Every export returns a result dict with ``success``, ``file_path``,
    ``records_exported`` and ``message``.
    """

    def __init__(self, config_manager=None, export_dir: Optional[Union[str, Path]] = None):
        self.config_manager = config_manager
        self.export_config = self._get_export_config()
        if export_dir is not None:
            self.export_config['default_path'] = str(export_dir)

    def _get_export_config(self) -> Dict[str, Any]:
        """Get export configuration from config manager or defaults"""
        if self.config_manager:
            return self.config_manager.get_export_config()
        return {'format': 'CSV', 'default_path': './exports/'}

    def _resolve(self, filename: Union[str, Path]) -> Path:
        path = Path(filename)
        if not path.is_absolute() and path.parent == Path('.'):
            path = Path(self.export_config['default_path']) / path
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    def export_table(self, records: List[Dict[str, Any]], filename: Union[str, Path],
                     format_type: Optional[str] = None, sheet_name: str = 'Sheet1') -> Dict[str, Any]:
        """Export a list of row dicts; the suffix follows the format"""
        format_type = format_type or self.export_config.get('format', 'CSV')
        if format_type not in ('CSV', 'Excel'):
            raise ExportError(f"unsupported export format {format_type!r}")
        suffix = '.csv' if format_type == 'CSV' else '.xlsx'
        filepath = self._resolve(filename).with_suffix(suffix)

        frame = pd.DataFrame.from_records(records)
        try:
            if format_type == 'CSV':
                frame.to_csv(filepath, index=False, float_format='%.9g')
            else:
                self._export_to_excel(frame, filepath, sheet_name)
        except OSError as e:
            self.logger.error(f"{format_type} export to {filepath} failed: {e}")
            raise ExportError(f"cannot write {filepath}: {e}") from e

        self.logger.info(f"Exported {len(frame)} records to {filepath}")
        return {
            'success': True,
            'file_path': str(filepath),
            'records_exported': len(frame),
            'message': f'Exported {len(frame)} records to {filepath.name}'
        }

    def _export_to_excel(self, frame: pd.DataFrame, filepath: Path, sheet_name: str):
        """Write with bold shaded headers and fitted column widths"""
        frame.to_excel(filepath, index=False, sheet_name=sheet_name, engine='openpyxl')
        workbook = load_workbook(filepath)
        worksheet = workbook[sheet_name]
        for cell in worksheet[1]:
            cell.font = Font(bold=True)
            cell.fill = PatternFill(start_color="DDDDDD", end_color="DDDDDD", fill_type="solid")
            cell.alignment = Alignment(horizontal="center")
        for column in worksheet.columns:
            width = max(len(str(cell.value)) if cell.value is not None else 0 for cell in column)
            worksheet.column_dimensions[column[0].column_letter].width = min(width + 2, 50)
        workbook.save(filepath)

    def export_loss_history(self, history, filename: Union[str, Path] = 'loss_history',
                            format_type: Optional[str] = None) -> Dict[str, Any]:
        """Per-step training losses, one row per generator update"""
        return self.export_table(history.records(), filename, format_type, sheet_name='losses')

    def export_report(self, report: Dict[str, Any], filename: Union[str, Path]) -> Dict[str, Any]:
        """Machine-readable JSON report"""
        filepath = self._resolve(filename).with_suffix('.json')
        try:
            filepath.write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
        except (OSError, TypeError) as e:
            self.logger.error(f"Report export to {filepath} failed: {e}")
            raise ExportError(f"cannot write report {filepath}: {e}") from e
        return {
            'success': True,
            'file_path': str(filepath),
            'records_exported': 1,
            'message': f'Report written to {filepath.name}'
        }


def create_export_manager(config_manager=None, export_dir=None) -> ExportManager:
    """Factory function to create export manager"""
    return ExportManager(config_manager, export_dir)

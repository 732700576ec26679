"""Export module for run artifacts"""

from .export_manager import ExportManager, create_export_manager

__all__ = ['ExportManager', 'create_export_manager']

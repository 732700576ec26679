"""Configuration module for otfmri runs"""

from .config_manager import ConfigManager, create_config_manager

__all__ = ['ConfigManager', 'create_config_manager']

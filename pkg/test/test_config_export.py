"""Configuration loading/validation and result export"""

import json

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook

from src.config.config_manager import DEFAULT_CONFIG_PATH, ConfigManager, create_config_manager
from src.export.export_manager import ExportManager, create_export_manager
from src.otgan.models import LossHistory
from src.utils.error_handler import ConfigurationError, ExportError


def _write(tmp_path, document):
    path = tmp_path / 'settings.json'
    path.write_text(json.dumps(document))
    return str(path)


def test_defaults_without_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = create_config_manager()
    assert config.config_path is None
    assert config.get('train.critic_steps_per_gen') == 5
    assert config.get('synth.degradation.gain') == 1.5
    assert config.get('train.nothing', 'fallback') == 'fallback'
    assert config.validate_config()


def test_file_is_merged_over_defaults(tmp_path):
    config = ConfigManager(_write(tmp_path, {'train': {'max_steps': 10},
                                             'synth': {'degradation': {'bias': 0.0}}}))
    assert config.get('train.max_steps') == 10
    assert config.get('train.batch_size') == 16
    assert config.get('synth.degradation.bias') == 0.0
    assert config.get('synth.degradation.gain') == 1.5


def test_unknown_and_malformed_files_are_rejected(tmp_path):
    with pytest.raises(ConfigurationError) as excinfo:
        ConfigManager(_write(tmp_path, {'synth': {'degradation': {'sharpen': 1}}}))
    assert 'synth.degradation.sharpen' in str(excinfo.value)

    with pytest.raises(ConfigurationError):
        ConfigManager(_write(tmp_path, {'train': 5}))
    with pytest.raises(ConfigurationError):
        ConfigManager(str(tmp_path / 'absent.json'))
    (tmp_path / 'broken.json').write_text('{"run": ')
    with pytest.raises(ConfigurationError):
        ConfigManager(str(tmp_path / 'broken.json'))


def test_overrides_skip_none_and_reject_unknown_keys():
    config = ConfigManager()
    config.apply_overrides({'run.seed': 42, 'train.max_steps': None})
    assert config.get('run.seed') == 42
    assert config.get('train.max_steps') == 5000
    with pytest.raises(ConfigurationError):
        config.apply_overrides({'train.momentum': 0.9})


def test_validation_collects_every_problem():
    config = ConfigManager()
    config.set('train.divergence_weight', 0.0)
    config.set('regression.folds', 1)
    config.set('logging.level', 'LOUD')
    with pytest.raises(ConfigurationError) as excinfo:
        config.validate_config()
    message = str(excinfo.value)
    assert 'divergence_weight' in message
    assert 'regression.folds' in message
    assert 'logging.level' in message


def test_run_seed_feeds_synth_and_train():
    config = ConfigManager()
    config.set('run.seed', 9)
    assert config.synth_config().encoding_seed == 9
    train = config.train_config()
    assert train.seed == 9
    assert train.betas == (0.5, 0.9)


def test_save_and_reload(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = ConfigManager()
    assert config.config_path is None
    config.set('train.max_steps', 12)
    path = config.save_config(str(tmp_path / 'out' / 'resolved.json'))
    assert ConfigManager(path).get('train.max_steps') == 12

    with pytest.raises(ConfigurationError):
        config.save_config()


def test_settings_file_is_read_by_default(tmp_path, monkeypatch):
    (tmp_path / 'config').mkdir()
    (tmp_path / 'config' / 'settings.json').write_text(json.dumps({'train': {'max_steps': 7}}))
    monkeypatch.chdir(tmp_path)

    config = create_config_manager()
    assert config.config_path == DEFAULT_CONFIG_PATH
    assert config.get('train.max_steps') == 7
    assert config.get('train.batch_size') == 16

    with pytest.raises(ConfigurationError):
        ConfigManager(str(tmp_path / 'missing.json'))


def _history():
    history = LossHistory()
    history.append(1, 0.5, 0.1, -0.05, 0.05, 0.4)
    history.append(2, 0.25, 0.2, -0.15, 0.05, 0.05)
    return history


def test_loss_history_csv(tmp_path):
    result = ExportManager(export_dir=tmp_path).export_loss_history(_history(), 'losses')
    assert result['success'] and result['records_exported'] == 2
    frame = pd.read_csv(result['file_path'])
    assert list(frame.columns) == ['step', 'transport_cost', 'w1_estimate', 'critic_loss',
                                   'gradient_penalty', 'generator_loss']
    assert frame['transport_cost'].tolist() == [0.5, 0.25]


def test_loss_history_excel_is_styled(tmp_path):
    manager = create_export_manager(export_dir=tmp_path)
    result = manager.export_loss_history(_history(), 'losses', 'Excel')
    assert result['file_path'].endswith('.xlsx')

    worksheet = load_workbook(result['file_path'])['losses']
    assert worksheet['A1'].value == 'step'
    assert worksheet['A1'].font.bold
    assert len(pd.read_excel(result['file_path'], engine='openpyxl')) == 2


def test_export_format_follows_config(tmp_path):
    config = ConfigManager()
    config.set('export.default_path', str(tmp_path))
    config.set('export.format', 'Excel')
    result = ExportManager(config).export_table([{'a': 1}], 'table')
    assert result['file_path'] == str(tmp_path / 'table.xlsx')


def test_report_json_handles_numpy(tmp_path):
    manager = ExportManager(export_dir=tmp_path)
    result = manager.export_report({'value': np.float64(1.5), 'rows': np.arange(3),
                                    'path': tmp_path}, 'report')
    document = json.loads((tmp_path / 'report.json').read_text())
    assert result['records_exported'] == 1
    assert document == {'value': 1.5, 'rows': [0, 1, 2], 'path': str(tmp_path)}


def test_export_errors(tmp_path):
    manager = ExportManager(export_dir=tmp_path)
    with pytest.raises(ExportError):
        manager.export_table([{'a': 1}], 'table', 'Parquet')
    with pytest.raises(ExportError):
        manager.export_report({'value': object()}, 'bad')

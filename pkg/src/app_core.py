"""otfmri application core - orchestrates the enhancement and decoding pipeline"""

from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config.config_manager import ConfigManager, create_config_manager
from .export.export_manager import create_export_manager
from .fmri.manifest import default_split, load_manifest, make_split, save_manifest, validate_manifest
from .fmri.models import DatasetManifest, FmriSample, QualityTier, SplitSpec, SubjectEntry
from .fmri.preprocessing import average_by_image
from .fmri.sample_io import load_samples, save_sample
from .metrics.features import load_features, save_features
from .metrics.frechet import (
    FeatureSet, best_of_k, fit_moments, frechet_distance, moment_diagnostics
)
from .otgan.checkpoint import LATEST_NAME, load_checkpoint
from .otgan.trainer import ENHANCE_BATCH, enhance, mse_to_reference, objective_trend, train_from_pool
from .regression.decoder import ToyDecoder
from .regression.ridge import (
    LatentKind, design_matrix, fit_head, load_head, predict_latents, r2_score, save_head
)
from .regression.targets import load_latent_targets
from .synth.generator import generate, load_ground_truth
from .utils.error_handler import (
    ConfigurationError, DataError, ErrorContext, ErrorHandler
)
from .utils.logger import LoggerMixin, LoggerSetup

RESOLVED_CONFIG_NAME = 'config.resolved.json'
HEAD_FILES = {LatentKind.VISUAL: 'visual_head.pt', LatentKind.SEMANTIC: 'semantic_head.pt'}


class OTFmriApp(LoggerMixin):
    """Runs one pipeline command per call and returns its report

    Every command writes the resolved configuration and a JSON report into
    its output directory.
    """

    def __init__(self, config: ConfigManager):
        self.config = config
        LoggerSetup.configure(config.get_logging_config())
        config.validate_config()
        self.error_handler = ErrorHandler(self.logger)
        self.export_manager = create_export_manager(config)

    # Run directories and shared inputs

    def prepare_out_dir(self, allow_existing: bool = False) -> Path:
        """Create the output directory; refuses non-empty ones unless forced"""
        out_dir = Path(self.config.get('run.out_dir'))
        if out_dir.exists() and not out_dir.is_dir():
            raise ConfigurationError(f"output path {out_dir} is not a directory")
        if out_dir.exists() and any(out_dir.iterdir()) and not (
                allow_existing or self.config.get('run.force')):
            raise ConfigurationError(f"output directory {out_dir} is not empty; "
                                     f"pass --force to write into it")
        out_dir.mkdir(parents=True, exist_ok=True)
        self.config.save_config(str(out_dir / RESOLVED_CONFIG_NAME))
        return out_dir

    def _required_path(self, key: str) -> Path:
        value = self.config.get(key)
        if not value:
            raise ConfigurationError(f"'{key}' must be set for this command")
        return Path(value)

    def _manifest(self, key: str) -> DatasetManifest:
        manifest = load_manifest(self._required_path(key))
        report = validate_manifest(manifest)
        if not report.is_valid:
            first = report.violations[0]
            raise DataError(f"manifest '{manifest.name}' has {len(report)} violations, "
                            f"first: {first.kind}: {first.detail}")
        return manifest

    def _low_side_key(self) -> str:
        return 'data.enhanced_manifest' if self.config.get('data.enhanced_manifest') \
            else 'data.low_manifest'

    def _split_spec(self, low: DatasetManifest, high: DatasetManifest) -> SplitSpec:
        section = self.config.get_section('split')
        if all(section[role] is None for role in section):
            return default_split(low, high)
        fallback = default_split(low, high)
        return SplitSpec(
            train_subjects_low=section['train_subjects_low'] or fallback.train_subjects_low,
            train_subjects_high=section['train_subjects_high'] or fallback.train_subjects_high,
            test_subjects_low=section['test_subjects_low'] or fallback.test_subjects_low,
        )

    def _ground_truth(self):
        path = self.config.get('data.ground_truth')
        return load_ground_truth(Path(path)) if path else None

    def _write_report(self, out_dir: Path, name: str, report: dict) -> dict:
        report['report_path'] = self.export_manager.export_report(report, out_dir / name)['file_path']
        return report

    # Commands

    def run_synth(self) -> dict:
        """Generate the synthetic low/high-tier datasets and their ground truth"""
        with ErrorContext('synth', self.error_handler):
            out_dir = self.prepare_out_dir()
            synth_config = self.config.synth_config()
            low, high, _ = generate(synth_config, out_dir)

            tiers = {}
            for manifest in (low, high):
                report = validate_manifest(manifest)
                if not report.is_valid:
                    raise DataError(f"generated manifest '{manifest.name}' failed validation: "
                                    f"{report.to_dict()['violations'][:3]}")
                tiers[manifest.quality_tier.value] = {
                    'manifest': str(out_dir / manifest.quality_tier.value / 'manifest.json'),
                    'subjects': len(manifest.subjects),
                    'images': len(manifest.shared_image_ids),
                    'trials_per_image': manifest.subjects[0].trials_per_image,
                    'samples': manifest.sample_count,
                }
            return self._write_report(out_dir, 'synth_report', {
                'command': 'synth',
                'tiers': tiers,
                'ground_truth': str(out_dir / 'ground_truth' / 'ground_truth.json'),
                'latent_targets': str(out_dir / 'ground_truth' / 'latent_targets.json'),
                'seed': synth_config.encoding_seed,
            })

    def run_train(self, resume: bool = False) -> dict:
        """Train the generator/critic pair on the configured split"""
        with ErrorContext('train', self.error_handler):
            out_dir = self.prepare_out_dir(allow_existing=resume)
            low = self._manifest('data.low_manifest')
            high = self._manifest('data.high_manifest')
            pool, test_refs = make_split(low, high, self._split_spec(low, high))

            checkpoint_dir = out_dir / 'checkpoints'
            resume_from = None
            if resume:
                resume_from = checkpoint_dir / LATEST_NAME
                if not resume_from.is_file():
                    raise DataError(f"nothing to resume: {resume_from} does not exist")

            train_config = self.config.train_config()
            state = train_from_pool(train_config, pool, checkpoint_dir, resume_from)
            history = self.export_manager.export_loss_history(
                state.history, out_dir / 'loss_history', self.config.get('export.format'))

            report = {
                'command': 'train',
                'steps': state.step,
                'train_low_samples': len(pool.low),
                'train_high_samples': len(pool.high),
                'checkpoint': state.last_checkpoint,
                'loss_history': history['file_path'],
            }
            if len(state.history):
                trend = objective_trend(state)
                report['final'] = state.history.records()[-1]
                report['objective_moving_average'] = {
                    'first': float(trend[0]), 'last': float(trend[-1])}

            truth = self._ground_truth()
            if truth is not None and test_refs:
                test = load_samples(test_refs)
                report['oracle'] = self._oracle_mse(test, enhance(state, test), truth)
            return self._write_report(out_dir, 'train_report', report)

    def _oracle_mse(self, raw: List[FmriSample], enhanced: List[FmriSample], truth) -> dict:
        clean = [truth.clean_signal(s.subject_id, s.image_id) for s in raw]
        raw_mse = mse_to_reference(raw, clean)
        enhanced_mse = mse_to_reference(enhanced, clean)
        return {'raw_vs_clean_mse': raw_mse, 'enhanced_vs_clean_mse': enhanced_mse,
                'ratio': enhanced_mse / raw_mse if raw_mse > 0 else None,
                'samples': len(raw)}

    def run_enhance(self) -> dict:
        """Apply a checkpoint to every trial of a manifest"""
        with ErrorContext('enhance', self.error_handler):
            out_dir = self.prepare_out_dir()
            state = load_checkpoint(self._required_path('enhance.checkpoint'))
            source_key = 'enhance.manifest' if self.config.get('enhance.manifest') \
                else 'data.low_manifest'
            source = self._manifest(source_key)
            if source.vertex_count != state.vertex_count:
                raise DataError(f"checkpoint trained on V={state.vertex_count}, manifest "
                                f"'{source.name}' has V={source.vertex_count}")

            root = out_dir / 'enhanced'
            enhanced_manifest = DatasetManifest(
                name=self.config.get('enhance.name'),
                quality_tier=QualityTier.ENHANCED,
                vertex_count=source.vertex_count,
                subjects=[SubjectEntry(s.subject_id, s.trials_per_image) for s in source.subjects],
                shared_image_ids=list(source.shared_image_ids),
                root_dir=root,
            )
            truth = self._ground_truth()
            raw_all, enhanced_all = [], []
            refs = source.refs()
            for start in range(0, len(refs), ENHANCE_BATCH):
                raw = load_samples(refs[start:start + ENHANCE_BATCH])
                for sample in enhance(state, raw):
                    relative = (f"samples/{sample.subject_id}/"
                                f"{sample.image_id}_t{sample.trial_index:02d}.otf")
                    save_sample(sample, root / relative)
                    enhanced_manifest.sample_index[sample.key] = relative
                    if truth is not None:
                        enhanced_all.append(sample)
                if truth is not None:
                    raw_all += raw

            manifest_path = save_manifest(enhanced_manifest, root / 'manifest.json')
            validation = validate_manifest(enhanced_manifest)
            if not validation.is_valid:
                raise DataError(f"enhanced manifest failed validation: "
                                f"{validation.to_dict()['violations'][:3]}")

            report = {
                'command': 'enhance',
                'checkpoint': str(self.config.get('enhance.checkpoint')),
                'source_manifest': str(self.config.get(source_key)),
                'manifest': str(manifest_path),
                'samples': enhanced_manifest.sample_count,
            }
            if truth is not None:
                report['oracle'] = self._oracle_mse(raw_all, enhanced_all, truth)
            return self._write_report(out_dir, 'enhance_report', report)

    def _training_rows(self) -> Tuple[List[FmriSample], List[FmriSample]]:
        """(training trials, held-out test trials) for the regression heads"""
        low = self._manifest(self._low_side_key())
        high = self._manifest('data.high_manifest')
        pool, test_refs = make_split(low, high, self._split_spec(low, high))
        return load_samples(pool.low) + load_samples(pool.high), load_samples(test_refs)

    def run_fit(self) -> dict:
        """Fit visual and semantic ridge heads on per-trial training rows"""
        with ErrorContext('fit', self.error_handler):
            out_dir = self.prepare_out_dir()
            targets = load_latent_targets(self._required_path('data.latent_targets'))
            train, _ = self._training_rows()
            image_ids = [s.image_id for s in train]
            X = design_matrix(train)

            heads = {}
            for kind in LatentKind:
                Y = targets.rows_for(image_ids, kind.value)
                head = fit_head(X, Y, self.config.get('regression.alpha_grid'), kind,
                                self.config.get('regression.folds'))
                path = save_head(head, out_dir / 'heads' / HEAD_FILES[kind])
                heads[kind.value] = {
                    'path': str(path),
                    'alpha': head.alpha,
                    'cv_r2': head.cv_scores[head.alpha],
                    'train_r2': r2_score(Y, predict_latents(head, X)),
                    'cv_scores': {str(a): s for a, s in sorted(head.cv_scores.items())},
                }
            return self._write_report(out_dir, 'fit_report', {
                'command': 'fit',
                'train_rows': X.shape[0],
                'heads': heads,
            })

    def run_predict(self) -> dict:
        """Predict latents from trial-averaged held-out trials"""
        with ErrorContext('predict', self.error_handler):
            out_dir = self.prepare_out_dir()
            heads_dir = self._required_path('regression.heads_dir')
            heads = {kind: load_head(heads_dir / name) for kind, name in HEAD_FILES.items()}

            if self.config.get('regression.predict_manifest'):
                manifest = self._manifest('regression.predict_manifest')
                high = self._manifest('data.high_manifest') if self.config.get(
                    'data.high_manifest') else manifest
                subjects = self._split_spec(manifest, high).test_subjects_low
                test = load_samples(manifest.refs(subjects))
            else:
                _, test = self._training_rows()
            averaged = average_by_image(test)
            X = design_matrix(averaged)
            row_ids = [f"{s.subject_id}/{s.image_id}" for s in averaged]

            report = {'command': 'predict', 'test_rows': len(averaged), 'heads': {}}
            targets_path = self.config.get('data.latent_targets')
            targets = load_latent_targets(Path(targets_path)) if targets_path else None
            predictions = {}
            for kind, head in heads.items():
                predicted = predict_latents(head, X)
                predictions[kind] = predicted
                path = save_features(FeatureSet(predicted, label=f"predicted_{kind.value}"),
                                     out_dir / f"latents_{kind.value}.json", row_ids)
                entry = {'path': str(path), 'alpha': head.alpha}
                if targets is not None:
                    truth_rows = targets.rows_for([s.image_id for s in averaged], kind.value)
                    entry['held_out_r2'] = r2_score(truth_rows, predicted)
                report['heads'][kind.value] = entry

            truth = self._ground_truth()
            if truth is not None:
                decoder = ToyDecoder.from_ground_truth(truth)
                true_latents = truth.latents_visual[[truth.image_row(s.image_id) for s in averaged]]
                decoded = decoder.toy_decode(predictions[LatentKind.VISUAL])
                reference = decoder.toy_decode(true_latents)
                report['decoded_correlation'] = float(
                    np.corrcoef(decoded.ravel(), reference.ravel())[0, 1])
            return self._write_report(out_dir, 'predict_report', report)

    def run_eval(self) -> dict:
        """Frechet distance of candidate feature files against a reference"""
        with ErrorContext('eval', self.error_handler):
            out_dir = self.prepare_out_dir()
            reference = load_features(self._required_path('metrics.reference'))
            candidate_paths = self.config.get('metrics.candidates') or []
            if not candidate_paths:
                raise ConfigurationError("'metrics.candidates' must list at least one feature file")
            candidates = [load_features(Path(p)) for p in candidate_paths]

            reference_moments = fit_moments(reference)
            candidate_moments = [fit_moments(c) for c in candidates]
            distances = [frechet_distance(m, reference_moments) for m in candidate_moments]
            best_index, _ = best_of_k(list(range(len(distances))), lambda i: distances[i])

            return self._write_report(out_dir, 'eval_report', {
                'command': 'eval',
                'covariance': 'unbiased (n - 1)',
                'reference': {'path': str(self.config.get('metrics.reference')),
                              'rows': reference.features.shape[0],
                              'diagnostics': moment_diagnostics(reference_moments)},
                'candidates': [
                    {'path': str(p), 'rows': c.features.shape[0], 'frechet_distance': d,
                     'diagnostics': moment_diagnostics(m)}
                    for p, c, m, d in zip(candidate_paths, candidates, candidate_moments, distances)
                ],
                'best_index': best_index,
                'best_distance': distances[best_index],
            })

    def shutdown(self):
        """Cleanup application resources"""
        self.logger.debug("Shutting down")
        LoggerSetup.shutdown()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.shutdown()


def create_app(config_path: Optional[str] = None,
               overrides: Optional[Dict[str, object]] = None) -> OTFmriApp:
    """Factory function to create application instance"""
    config = create_config_manager(config_path)
    config.apply_overrides(overrides or {})
    return OTFmriApp(config)

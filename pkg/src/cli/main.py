"""Command-line entry point: synth, train, enhance, fit, predict, eval"""

import argparse
import sys
from typing import Callable, Dict, List, Optional

from ..app_core import OTFmriApp, create_app
from ..utils.error_handler import EXIT_DATA_ERROR, EXIT_OK, OTFmriError, exit_code_for

COMMANDS = ('synth', 'train', 'enhance', 'fit', 'predict', 'eval')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='otfmri',
        description='Optimal-transport GAN enhancement of surface fMRI trials, '
                    'latent decoding and Frechet evaluation')
    subparsers = parser.add_subparsers(dest='command', required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='JSON configuration file')
    common.add_argument('--out', help='output directory of this run')
    common.add_argument('--seed', type=int, help='seed for data generation and training')
    common.add_argument('--force', action='store_true', default=None,
                        help='write into a non-empty output directory')
    common.add_argument('--resume', action='store_true',
                        help='continue training from the latest checkpoint in --out')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'])

    synth = subparsers.add_parser('synth', parents=[common],
                                  help='generate a synthetic oracle dataset')
    synth.add_argument('--vertices', type=int, help='vertices per hemisphere')

    train = subparsers.add_parser('train', parents=[common], help='train the enhancement GAN')
    train.add_argument('--low', help='low-tier manifest')
    train.add_argument('--high', help='high-tier manifest')
    train.add_argument('--ground-truth', help='ground truth for an oracle MSE report')
    train.add_argument('--max-steps', type=int)

    enhance = subparsers.add_parser('enhance', parents=[common],
                                    help='apply a checkpoint to a manifest')
    enhance.add_argument('--checkpoint')
    enhance.add_argument('--manifest', help='manifest to enhance (default: data.low_manifest)')
    enhance.add_argument('--ground-truth', help='ground truth for an oracle MSE report')

    for name, help_text in (('fit', 'fit the visual and semantic ridge heads'),
                            ('predict', 'predict latents of held-out trial averages')):
        command = subparsers.add_parser(name, parents=[common], help=help_text)
        command.add_argument('--low', help='low-side manifest (enhanced or raw)')
        command.add_argument('--high', help='high-tier manifest')
        command.add_argument('--targets', help='latent target file')
        if name == 'predict':
            command.add_argument('--heads', help='directory holding the fitted heads')
            command.add_argument('--ground-truth', help='ground truth for the decoded check')

    evaluate = subparsers.add_parser('eval', parents=[common],
                                     help='Frechet distance between feature files')
    evaluate.add_argument('--reference', help='reference feature file')
    evaluate.add_argument('--candidates', nargs='+', help='one or more candidate feature files')

    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, object]:
    """Dotted config keys set by flags; flags win over the config file"""
    flag_keys = {
        'out': 'run.out_dir',
        'seed': 'run.seed',
        'force': 'run.force',
        'log_level': 'logging.level',
        'vertices': 'synth.vertex_count',
        'max_steps': 'train.max_steps',
        'checkpoint': 'enhance.checkpoint',
        'manifest': 'enhance.manifest',
        'ground_truth': 'data.ground_truth',
        'targets': 'data.latent_targets',
        'heads': 'regression.heads_dir',
        'high': 'data.high_manifest',
        'reference': 'metrics.reference',
        'candidates': 'metrics.candidates',
    }
    overrides = {key: getattr(args, flag, None) for flag, key in flag_keys.items()}
    low = getattr(args, 'low', None)
    if low is not None:
        overrides['data.low_manifest' if args.command == 'train' else 'data.enhanced_manifest'] = low
    return overrides


def _summary_lines(report: dict) -> List[str]:
    command = report['command']
    lines = []
    if command == 'synth':
        for tier, info in report['tiers'].items():
            lines.append(f"{tier} tier: {info['samples']} samples ({info['subjects']} subjects x "
                         f"{info['images']} images x {info['trials_per_image']} trials)")
    elif command == 'train':
        lines.append(f"trained to step {report['steps']}; checkpoint {report['checkpoint']}")
        if 'objective_moving_average' in report:
            trend = report['objective_moving_average']
            lines.append(f"objective moving average {trend['first']:.5f} -> {trend['last']:.5f}")
        if 'oracle' in report:
            oracle = report['oracle']
            lines.append(f"test MSE to clean: raw {oracle['raw_vs_clean_mse']:.5f}, "
                         f"enhanced {oracle['enhanced_vs_clean_mse']:.5f}")
    elif command == 'enhance':
        lines.append(f"enhanced {report['samples']} samples into {report['manifest']}")
        if 'oracle' in report:
            oracle = report['oracle']
            lines.append(f"MSE to clean: raw {oracle['raw_vs_clean_mse']:.5f}, "
                         f"enhanced {oracle['enhanced_vs_clean_mse']:.5f}")
    elif command == 'fit':
        for kind, head in report['heads'].items():
            lines.append(f"{kind} head: alpha={head['alpha']:g} cv R2={head['cv_r2']:.4f} "
                         f"train R2={head['train_r2']:.4f}")
    elif command == 'predict':
        for kind, head in report['heads'].items():
            r2 = f" held-out R2={head['held_out_r2']:.4f}" if 'held_out_r2' in head else ""
            lines.append(f"{kind} latents -> {head['path']}{r2}")
        if 'decoded_correlation' in report:
            lines.append(f"decoded correlation {report['decoded_correlation']:.4f}")
    elif command == 'eval':
        for index, candidate in enumerate(report['candidates']):
            lines.append(f"[{index}] {candidate['path']}: FID {candidate['frechet_distance']:.6f}")
        lines.append(f"best index {report['best_index']} (covariance {report['covariance']})")
    lines.append(f"report: {report['report_path']}")
    return lines


def _runner(app: OTFmriApp, args: argparse.Namespace) -> Callable[[], dict]:
    return {
        'synth': app.run_synth,
        'train': lambda: app.run_train(resume=args.resume),
        'enhance': app.run_enhance,
        'fit': app.run_fit,
        'predict': app.run_predict,
        'eval': app.run_eval,
    }[args.command]


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with create_app(args.config, overrides_from_args(args)) as app:
            report = _runner(app, args)()
    except OTFmriError as e:
        print(f"otfmri {args.command}: error: {e}", file=sys.stderr)
        if getattr(e, 'last_checkpoint', None):
            print(f"otfmri {args.command}: last good checkpoint: {e.last_checkpoint}",
                  file=sys.stderr)
        return exit_code_for(e)
    except OSError as e:
        print(f"otfmri {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA_ERROR

    for line in _summary_lines(report):
        print(line)
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())

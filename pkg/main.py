#!/usr/bin/env python3
"""
DQLS Toolkit
Command-line entry point
"""

import argparse
import logging
import os
import sys
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

# Add src directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(os.path.abspath(__file__)), 'src'))

from dqls_config import CONFIG_FILE_NAME, get_default_config, load_config, save_config, tolerance_from_config
from experiment_runner import COMMANDS, CSV_COMMANDS, ExperimentConfig, run_suite
from linalg_core import DqlsError
from report_exporter import ReportExporter


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def parse_neighborhoods(text: str) -> List[List[int]]:
    """'1,2;2,3' -> [[1, 2], [2, 3]]"""
    return [parse_int_list(part) for part in text.split(';') if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='dqls',
        description='Dissipative quasi-local stabilizability of multipartite pure states',
    )
    parser.add_argument('--config', type=Path, help=f'YAML settings file (default config/{CONFIG_FILE_NAME})')
    parser.add_argument('--experiment', type=Path, help='YAML experiment file; replaces the command line')
    parser.add_argument('--log-dir', type=Path, help='directory for session logs')
    parser.add_argument('--verbose', action='store_true', help='debug-level logging')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--tol', type=float, help='rank tolerance (overrides DQLS_TOL and the config file)')
    common.add_argument('--seed', type=int, help='base seed')
    common.add_argument('--output', '--out', dest='output',
                        help='write the report to this path (CSV rows when it ends in .csv)')
    common.add_argument('--format', choices=['json', 'csv'], default='json', help='stdout format')

    state_args = argparse.ArgumentParser(add_help=False)
    state_args.add_argument('--state', help="named state (ghz:3, dicke:4,2, ring:4), 'random', or a JSON file")
    state_args.add_argument('--dims', type=parse_int_list, help='local dimensions, e.g. 2,2,3')
    structure = state_args.add_mutually_exclusive_group()
    structure.add_argument('--ns', dest='ns_file', help='neighborhood structure JSON file')
    structure.add_argument('--neighborhoods', type=parse_neighborhoods, help="inline form, e.g. '1,2;2,3'")

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.add_parser('check', parents=[common, state_args], help='dimension of the DQLS subspace')

    tri = sub.add_parser('tri', parents=[common, state_args],
                         help='every tripartite method on one state, or on a random batch of d_a x d_b x d_c')
    tri.add_argument('--da', type=int)
    tri.add_argument('--db', type=int)
    tri.add_argument('--dc', type=int)
    tri.add_argument('--seeds', type=int, help='random states in the batch')

    sub.add_parser('decide', parents=[common, state_args], help='multipartite decision procedure')
    sub.add_parser('parent', parents=[common, state_args], help='canonical parent Hamiltonian checks')

    stabilize = sub.add_parser('stabilize', parents=[common, state_args], help='build, certify and integrate a stabilizer')
    stabilize.add_argument('--t', dest='t_final', type=float, help='final time (default 20 / spectral gap)')
    stabilize.add_argument('--dt', type=float)

    table = sub.add_parser('table', parents=[common], help='Monte Carlo dimension table')
    table.add_argument('--db', type=int, default=3)
    table.add_argument('--da-min', type=int, default=2)
    table.add_argument('--da-max', type=int, default=5)
    table.add_argument('--dbar-min', type=int, default=0)
    table.add_argument('--dbar-max', type=int, default=9)
    table.add_argument('--seeds', type=int)
    table.add_argument('--workers', type=int)
    table.add_argument('--max-product', type=int, default=2000)

    eps = sub.add_parser('ghz-eps', parents=[common], help='approximate GHZ stabilization batch')
    eps.add_argument('--epsilon', type=float, default=0.01)
    eps.add_argument('--seeds', type=int)
    eps.add_argument('--mode', choices=['exponential', 'integer-root'], default='exponential')

    rec = sub.add_parser('reconstruct', parents=[common, state_args], help='reconstruct a state from supports')
    rec.add_argument('--support', action='append', default=[], help='support JSON file (repeatable)')

    sub.add_parser('selftest', parents=[common], help='known-answer battery')
    return parser


class DqlsApp:
    def __init__(self, argv: Optional[Sequence[str]] = None):
        self.parser = build_parser()
        self.args = self.parser.parse_args(argv)
        if self.args.command is None and self.args.experiment is None:
            self.parser.error(f"a command is required: {', '.join(COMMANDS)}")

        self.setup_directories()
        self.load_config()
        self.setup_logging()
        self.exporter = ReportExporter()

    def setup_directories(self):
        """Resolve working directories"""
        self.base_dir = Path.cwd()
        self.config_dir = self.base_dir / "config"
        self.config_file = self.args.config or self.config_dir / CONFIG_FILE_NAME

    def load_config(self):
        """Load settings; write the defaults out when the default file is missing"""
        try:
            self.config = load_config(self.config_file)
        except ValueError as e:
            self.parser.error(str(e))
        if self.args.config is None and not self.config_file.exists():
            try:
                save_config(get_default_config(), self.config_file)
            except OSError:
                pass

    def setup_logging(self):
        """Setup session logging to file only"""
        logs_dir = self.args.log_dir or self.base_dir / self.config['logging'].get('dir', 'logs')
        logs_dir.mkdir(parents=True, exist_ok=True)

        session_timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        log_file = logs_dir / f"dqls_session_{session_timestamp}.log"
        level = logging.DEBUG if self.args.verbose else getattr(
            logging, str(self.config['logging'].get('level', 'INFO')).upper(), logging.INFO
        )

        logging.basicConfig(
            level=level,
            format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
            handlers=[logging.FileHandler(log_file, encoding='utf-8')],
            force=True
        )

        self.logger = logging.getLogger(__name__)
        self.log_file_path = log_file

        self.logger.info("="*60)
        self.logger.info("DQLS SESSION STARTED")
        self.logger.info(f"Session ID: {session_timestamp}")
        self.logger.info(f"Log file: {log_file}")
        self.logger.info("="*60)

    def build_experiment(self) -> ExperimentConfig:
        """Merge configuration file settings with command-line flags"""
        if self.args.experiment is not None:
            return ExperimentConfig.from_yaml_file(self.args.experiment)

        args = self.args
        numerics = self.config['numerics']
        table = self.config['table']
        tol = tolerance_from_config(self.config, args.tol)
        data: Dict[str, Any] = {
            'command': args.command,
            'tol': tol.value,
            'tol_mode': tol.mode.value,
            'determinant_threshold': numerics['determinant_threshold'],
            'geometric_max_dim': table['geometric_max_dim'],
            'max_coefficient_entries': table['max_coefficient_entries'],
            'workers': table['workers'],
            'seeds': table['seeds'],
            'base_seed': table['base_seed'] if args.seed is None else args.seed,
            'max_resamples': self.config['dynamics']['max_resamples'],
            'dt': self.config['dynamics']['dt'],
            'output': args.output,
            'format': args.format,
        }
        for name in ('state', 'dims', 'neighborhoods', 'ns_file', 't_final', 'dt', 'epsilon', 'workers', 'seeds'):
            value = getattr(args, name, None)
            if value is not None:
                data[name] = value
        if args.command == 'table':
            data.update(d_b=args.db, da_range=[args.da_min, args.da_max],
                        dbar_range=[args.dbar_min, args.dbar_max], max_product=args.max_product)
        elif args.command == 'tri':
            batch_dims = [args.da, args.db, args.dc]
            if any(d is not None for d in batch_dims):
                if None in batch_dims or args.state:
                    raise ValueError("A random tri batch needs all of --da, --db and --dc and no --state")
                data['dims'] = batch_dims
        elif args.command == 'ghz-eps':
            data['root_mode'] = args.mode
            if args.seeds is None:
                data['seeds'] = 50
        elif args.command == 'reconstruct':
            data['supports'] = args.support
        return ExperimentConfig.from_dict(data)

    def run(self) -> int:
        """Run the command and emit its report"""
        try:
            experiment = self.build_experiment()
        except ValueError as e:
            self.logger.error(f"Bad configuration: {e}")
            self.parser.error(str(e))

        try:
            exit_code, report = run_suite(experiment)
        except (DqlsError, ValueError, FileNotFoundError) as e:
            self.logger.error(f"{type(e).__name__}: {e}")
            print(self.exporter.render_json({'error': type(e).__name__, 'message': str(e)}), end='')
            return 1

        csv_rows = report['result'].get('csv_rows') if experiment.command in CSV_COMMANDS else None
        if experiment.output:
            output = Path(experiment.output)
            file_format = 'csv' if csv_rows is not None and output.suffix.lower() == '.csv' else experiment.format
            if not self.exporter.export_report(report, file_format, output, csv_rows):
                return 1
        if experiment.format == 'csv':
            print(self.exporter.render_csv(csv_rows), end='')
        else:
            print(self.exporter.render_json(report), end='')
        self.logger.info(f"Finished '{experiment.command}' with exit code {exit_code}")
        return exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Main entry point"""
    if sys.version_info < (3, 8):
        print("Python 3.8 or higher is required")
        return 1
    app = DqlsApp(argv)
    return app.run()


if __name__ == "__main__":
    sys.exit(main())

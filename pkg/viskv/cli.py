import argparse
from io import StringIO
import logging
import sys
import textwrap
import warnings
from viskv.config import Scenario, parse_config
from viskv.core import ConfigError, ViskvError
from viskv.scenarios import run


class CommandLineHandler:
    def __init__(self, argv=None):
        self.argv = argv if argv is not None else sys.argv[1:]

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(
            prog='viskv',
            formatter_class=argparse.RawDescriptionHelpFormatter,
            description='Simulates and analyses the Kelvin-Voigt rod with time-localized delay',
            epilog=textwrap.dedent("""\
                Reproduce the loaded muscle sample:
                %(prog)s simulate --set epsilons=0,0.1,0.2,0.5 --out simulate.csv

                Sample the certified stability region:
                %(prog)s stability-region --out region.csv
                """))
        parser.add_argument(
            'scenario',
            choices=[s.value for s in Scenario],
            help='The experiment to run')
        parser.add_argument(
            '--config',
            metavar='FILE',
            help='A key = value configuration file')
        parser.add_argument(
            '--set',
            metavar='KEY=VALUE',
            action='append',
            default=[],
            help='Overrides a configuration key, may be repeated')
        parser.add_argument(
            '--out',
            metavar='PATH',
            help='Where to write the CSV - defaults to <scenario>.csv, - for stdout')
        parser.add_argument(
            '--fit',
            action='store_true',
            help='Fit the energy decay rate (energy scenario)')
        parser.add_argument(
            '--debug',
            action='store_true',
            help='Verbose logging')
        return parser

    def execute(self) -> int:
        args = self.build_parser().parse_args(self.argv)
        if args.debug:
            logging.getLogger().setLevel(logging.DEBUG)
            warnings.simplefilter('always')

        try:
            return self.start(args)
        except ViskvError as e:
            logging.error(f'{type(e).__name__}: {e}')
            return e.exit_code

    def start(self, args: argparse.Namespace) -> int:
        text = ''
        if args.config:
            try:
                with open(args.config, 'r') as f:
                    text = f.read()
            except OSError as e:
                raise ConfigError(f'cannot read {args.config}: {e}')

        overrides = list(args.set)
        if args.fit:
            overrides.append('fit=true')
        config = parse_config(text, Scenario(args.scenario), overrides)
        logging.info(f'Running {config.scenario.value} with preset {config.preset.value}')

        path = args.out or f'{config.scenario.value}.csv'
        # Nothing is written unless the whole scenario succeeds
        buffer = StringIO()
        run(config, buffer, sys.stderr if path == '-' else sys.stdout)

        if path == '-':
            sys.stdout.write(buffer.getvalue())
        else:
            with open(path, 'w', newline='') as f:
                f.write(buffer.getvalue())
            logging.info(f'Wrote {path}')
        return 0


def main(argv=None):
    logging.basicConfig(
        datefmt='%Y-%m-%d %H:%M:%S',
        format='%(asctime)s %(levelname)-8s %(message)s',
        level=logging.INFO
    )

    cli = CommandLineHandler(argv)
    sys.exit(cli.execute())


if __name__ == "__main__":
    main()

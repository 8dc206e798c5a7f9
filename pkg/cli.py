import argparse
import json
import os
import sys
from typing import Any, Dict, List, Optional

from config import DEFAULT_SEED, OUTPUT_DIR, CuLabError, ConfigError, logger
from file_handler import FileHandler
from generator import InstanceGenerator
from lifting import build_cover, cauchy_lift, lift
from matrix import NormalMatrix
from metrics import d_cu, d_u_bracket, d_w, marriage_check
from morphism import RankMeasure
from region import Region
from suites import SUITES, ExperimentConfig, SuiteRunner, describe, write_report


def _interval(text: str) -> tuple:
    try:
        lo, hi = (int(part) for part in text.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got '{text}'")
    return lo, hi


class LabCli:
    def __init__(self, file_handler: Optional[FileHandler] = None):
        self.file_handler = file_handler
        self.parser = argparse.ArgumentParser(prog='culab', description="Cuntz semigroup lifting laboratory")
        self.commands = self.parser.add_subparsers(dest='command', required=True)
        self._register_handlers()

    def _register_handlers(self):
        """Register subcommands"""
        # Instance generation
        self._command('gen', self.gen_command, "write seeded random instances", grid=True, batch=True)

        # Single-shot metrics
        cmd = self._command('dcu', self.dcu_command, "Cuntz distance of two rank measures", grid=True)
        cmd.add_argument('alpha')
        cmd.add_argument('beta')
        cmd = self._command('dw', self.dw_command, "d_W of two normal matrices", grid=True)
        cmd.add_argument('x')
        cmd.add_argument('y')
        cmd = self._command('du', self.du_command, "d_U bracket of two normal matrices")
        cmd.add_argument('x')
        cmd.add_argument('y')
        cmd = self._command('marriage', self.marriage_command, "marriage inequality for two lists", grid=True)
        cmd.add_argument('--alphas', nargs='+', required=True)
        cmd.add_argument('--betas', nargs='+', required=True)

        # Lifting
        for name, handler, text in (('cover', self.cover_command, "almost delta-cover"),
                                    ('lift', self.lift_command, "finite dimensional lift")):
            cmd = self._command(name, handler, text, grid=True)
            cmd.add_argument('alpha')
            cmd.add_argument('--delta', type=float, required=True)
        cmd = self._command('exactlift', self.exactlift_command, "normal matrix realizing a rank measure",
                            grid=True)
        cmd.add_argument('alpha')

        # Suites
        for name, handler, text in (('verify', self.verify_command, "run a suite, exit nonzero on failure"),
                                    ('run', self.run_command, "run a suite and write CSV + JSON reports")):
            cmd = self._command(name, handler, text, grid=True, batch=True)
            cmd.add_argument('suite', choices=sorted(SUITES))
            cmd.add_argument('--replay', type=int, default=None, metavar='ID')

    def _command(self, name: str, handler, text: str, grid: bool = False,
                 batch: bool = False) -> argparse.ArgumentParser:
        cmd = self.commands.add_parser(name, help=text)
        cmd.set_defaults(handler=handler)
        cmd.add_argument('--out', default=None, help=f"output path (default under {OUTPUT_DIR})")
        if grid:
            cmd.add_argument('--region', default=None, help="region JSON file")
            cmd.add_argument('--shape', default='disk', choices=['disk', 'segment', 'annulus'])
            cmd.add_argument('--h', type=float, default=0.1)
        if batch:
            cmd.add_argument('--seed', type=int, default=DEFAULT_SEED)
            cmd.add_argument('--trials', type=int, default=None)
            cmd.add_argument('--delta', type=float, nargs='+', default=None,
                             help="delta values as fractions of the region diameter")
            cmd.add_argument('--n-range', type=_interval, default=None)
            cmd.add_argument('--atom-range', type=_interval, default=None)
            cmd.add_argument('--workers', type=int, default=4)
        return cmd

    # Helpers

    def _handler(self, args) -> FileHandler:
        if self.file_handler is None:
            out = getattr(args, 'out', None)
            self.file_handler = FileHandler(out if out and not out.endswith('.json') else None)
        return self.file_handler

    def _load(self, args, path: str, key: str) -> Dict[str, Any]:
        """A JSON payload, unwrapped from a `gen` instance bundle when needed."""
        ok, data, error = self._handler(args).read_json(os.path.abspath(path))
        if not ok:
            raise ConfigError(error)
        return data[key] if isinstance(data, dict) and key in data else data

    def _region(self, args) -> Region:
        if args.region:
            return Region.from_json(self._load(args, args.region, 'region'))
        return Region.from_shape(args.shape, args.h)

    def _emit(self, args, payload: Dict[str, Any]) -> None:
        print(json.dumps(payload, indent=2, sort_keys=True))
        if args.out and args.out.endswith('.json'):
            ok, _, error = self._handler(args).write_json(os.path.abspath(args.out), payload)
            if not ok:
                raise ConfigError(error)

    def _config(self, args) -> ExperimentConfig:
        return ExperimentConfig(seed=args.seed, trials=args.trials, n_range=args.n_range,
                                atom_range=args.atom_range,
                                deltas=tuple(args.delta) if args.delta else (0.05, 0.1, 0.2),
                                shape=args.shape, h=args.h, output=args.out, workers=args.workers)

    # Commands

    def gen_command(self, args) -> int:
        """Handle gen: region.json plus one instance file per trial"""
        config = self._config(args)
        region = self._region(args)
        generator = InstanceGenerator(region, config.n_range or (1, 8), config.atom_range or (1, 4), config.seed)
        handler = self._handler(args)
        ok, _, error = handler.write_json('region.json', region.to_json())
        if not ok:
            raise ConfigError(error)
        for trial in range(config.trials or 10):
            ok, _, error = handler.write_json(f"instance_{trial:04d}.json", generator.instance(trial))
            if not ok:
                raise ConfigError(error)
        logger.info(f"Generated {config.trials or 10} instances in {handler.output_dir}")
        return 0

    def dcu_command(self, args) -> int:
        """Handle dcu: bottleneck distance between two rank measures"""
        region = self._region(args)
        alpha = RankMeasure.from_json(self._load(args, args.alpha, 'morphism'), region)
        beta = RankMeasure.from_json(self._load(args, args.beta, 'morphism'), region)
        self._emit(args, d_cu(alpha, beta).to_json())
        return 0

    def dw_command(self, args) -> int:
        """Handle dw: d_W between two normal matrices"""
        region = self._region(args)
        x = NormalMatrix.from_json(self._load(args, args.x, 'matrix'))
        y = NormalMatrix.from_json(self._load(args, args.y, 'matrix'))
        self._emit(args, {"value": d_w(x, y, region)})
        return 0

    def du_command(self, args) -> int:
        """Handle du: unitary-orbit bracket with its witness unitary"""
        x = NormalMatrix.from_json(self._load(args, args.x, 'matrix'))
        y = NormalMatrix.from_json(self._load(args, args.y, 'matrix'))
        self._emit(args, d_u_bracket(x, y).to_json())
        return 0

    def marriage_command(self, args) -> int:
        """Handle marriage: check the sum inequality over all pairings"""
        region = self._region(args)
        alphas = [RankMeasure.from_json(self._load(args, p, 'morphism'), region) for p in args.alphas]
        betas = [RankMeasure.from_json(self._load(args, p, 'morphism'), region) for p in args.betas]
        result = marriage_check(alphas, betas)
        self._emit(args, {"lhs": result.lhs, "rhs": result.rhs, "permutation": list(result.permutation)})
        return 0

    def cover_command(self, args) -> int:
        """Handle cover: an almost delta-cover and its certificates"""
        region = self._region(args)
        alpha = RankMeasure.from_json(self._load(args, args.alpha, 'morphism'), region)
        self._emit(args, build_cover(alpha, args.delta).to_json())
        return 0

    def lift_command(self, args) -> int:
        """Handle lift: finite dimensional lift at one delta"""
        region = self._region(args)
        alpha = RankMeasure.from_json(self._load(args, args.alpha, 'morphism'), region)
        self._emit(args, lift(alpha, args.delta).to_json())
        return 0

    def exactlift_command(self, args) -> int:
        """Handle exactlift: normal matrix realizing a rank measure"""
        region = self._region(args)
        alpha = RankMeasure.from_json(self._load(args, args.alpha, 'morphism'), region)
        self._emit(args, cauchy_lift(alpha).to_json())
        return 0

    def verify_command(self, args) -> int:
        """Handle verify: like run, but only the exit code and the log"""
        runner = SuiteRunner(self._config(args))
        if args.replay is not None:
            row = runner.replay(args.suite, args.replay)
            print(json.dumps(row, indent=2, sort_keys=True))
            return 0 if row["passed"] else 1
        report = runner.run(args.suite)
        print(json.dumps(report.summary(), indent=2, sort_keys=True))
        return 0 if report.ok else 1

    def run_command(self, args) -> int:
        """Handle run: execute suites and write the JSON and CSV reports"""
        config = self._config(args)
        runner = SuiteRunner(config)
        if args.replay is not None:
            row = runner.replay(args.suite, args.replay)
            self._emit(args, row)
            return 0 if row["passed"] else 1
        report = runner.run(args.suite)
        csv_path, json_path = write_report(report, self._handler(args))
        summary = report.summary()
        summary.update({"config": describe(config), "csv": csv_path, "summary": json_path})
        print(json.dumps(summary, indent=2, sort_keys=True))
        return 0 if report.ok else 1

    def run(self, argv: Optional[List[str]] = None) -> int:
        args = self.parser.parse_args(argv)
        try:
            return args.handler(args)
        except CuLabError as e:
            logger.error(f"{args.command} failed: {type(e).__name__}: {str(e)}")
            return 2


def main(argv: Optional[List[str]] = None) -> int:
    return LabCli().run(argv)


if __name__ == "__main__":
    sys.exit(main())

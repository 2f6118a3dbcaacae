"""
Command-line driver: profiles, transforms, verification presets and exports
"""
import argparse
import json
import logging
import os
from dataclasses import dataclass, field
from multiprocessing import Pool, cpu_count

from dotenv import load_dotenv
from tqdm import tqdm

from .core.calabi import forward_transform, inverse_transform, resample_image_graph, verify_pair
from .core.diffgeom import Grid2D, Signature
from .core.hyperbolic import grim_reaper, hyperbolic_partner, hyperbolic_profile, hyperbolic_revolve
from .core.presets import PRESETS, run_preset
from .core.radial import (ProfileKind, RadialProfile, TransformedCurve, bowl_profile, elliptic_revolve,
                          lorentz_bowl_profile, lorentz_winglike_profile, parse_forcing, profile_to_graph,
                          transform_profile, winglike_profile)
from .core.weights import parse_weight_spec
from .utils.errors import CalabiError, ConfigError
from .utils.field_io import (load_field_csv, load_table, save_curve_csv, save_field_csv, save_field_json,
                             save_hyperbolic_csv, save_profile_csv)
from .utils.mesh import save_mesh_json, save_obj
from .utils.report_store import ReportStore

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VERIFY_FAILED = 2


@dataclass
class RunConfig:
    """One command invocation: parsed options plus CALABI_* environment settings"""
    command: str
    params: dict = field(default_factory=dict)
    out: str = None
    dry_run: bool = False
    threads: int = 1
    output_dir: str = ''

    @classmethod
    def from_args(cls, args):
        load_dotenv()
        params = {k: v for k, v in vars(args).items() if k not in ('command', 'out', 'dry_run')}
        threads = os.getenv('CALABI_THREADS')
        try:
            threads = int(threads) if threads else max(1, cpu_count() - 1)
        except ValueError:
            raise ConfigError(f"CALABI_THREADS must be an integer, got '{threads}'") from None
        config = cls(args.command, params, args.out, args.dry_run, threads, os.getenv('CALABI_OUTPUT_DIR', ''))
        config.validate()
        return config

    def output_path(self):
        return self.resolve(self.out)

    def resolve(self, path):
        """Place relative paths under CALABI_OUTPUT_DIR when it is set"""
        if path is None:
            return None
        if self.output_dir and not os.path.isabs(path):
            path = os.path.join(self.output_dir, path)
        return path

    def validate(self):
        """Reject bad numbers, grid specs and unwritable output locations"""
        p = self.params
        if self.threads < 1:
            raise ConfigError(f"CALABI_THREADS must be positive, got {self.threads}")
        for key in ('h', 's_max', 'r_max', 'x_extent', 'tolerance', 'u1', 'x1'):
            if p.get(key) is not None and not p[key] > 0:
                raise ConfigError(f"--{key.replace('_', '-')} must be positive, got {p[key]}")
        for key in ('revolve', 'n'):
            if p.get(key) is not None and p[key] < 8:
                raise ConfigError(f"--{key} needs at least 8 samples, got {p[key]}")
        if p.get('weight') is not None:
            parse_weight_spec(p['weight'])
        if p.get('forcing') is not None:
            parse_forcing(p['forcing'])
        if p.get('grid') is not None:
            try:
                Grid2D.parse(p['grid'])
            except CalabiError as e:
                raise ConfigError(str(e)) from e
        for path in (self.output_path(), self.resolve(p.get('store'))):
            if path is not None:
                _check_writable(path)


def _check_writable(path):
    parent = os.path.dirname(os.path.abspath(path))
    while not os.path.exists(parent):
        parent = os.path.dirname(parent)
    if not (os.path.isdir(parent) and os.access(parent, os.W_OK)):
        raise ConfigError(f"cannot write '{path}': '{parent}' is not a writable directory")


def _prepare(path):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    return path


def _write_mesh(path, mesh):
    save_obj(_prepare(path), mesh)
    stem, _ = os.path.splitext(path)
    save_mesh_json(stem + '.json', mesh)
    logging.info(f"Wrote mesh {mesh.name} ({len(mesh.vertices)} vertices) to {path} and {stem}.json")


def _is_mesh(path):
    return path is not None and path.lower().endswith('.obj')


def _write_rotational(config, profile):
    """CSV of the profile (or of its transformed curve), an OBJ of the revolved curve, or
    with --grid the sampled height field"""
    path = config.output_path()
    if path is None:
        return
    curve = transform_profile(profile) if config.params.get('transformed') else None
    if config.params.get('grid'):
        _write_field(path, profile_to_graph(curve or profile, Grid2D.parse(config.params['grid'])))
    elif _is_mesh(path):
        _write_mesh(path, elliptic_revolve(curve or profile, config.params.get('revolve') or 64))
    elif curve is not None:
        save_curve_csv(_prepare(path), curve)
    else:
        save_profile_csv(_prepare(path), profile)


def cmd_bowl(config):
    p = config.params
    profile = bowl_profile(parse_weight_spec(p['weight']), p['u0'], s_max=p['s_max'], h=p['h'])
    _write_rotational(config, profile)
    return EXIT_OK


def cmd_winglike(config):
    p = config.params
    profile = winglike_profile(parse_weight_spec(p['weight']), p['x1'], p['u1'], s_max=p['s_max'], h=p['h'])
    _write_rotational(config, profile)
    return EXIT_OK


def _write_lorentz(config, profile):
    path = config.output_path()
    if path is None:
        return
    if config.params.get('grid'):
        _write_field(path, profile_to_graph(profile, Grid2D.parse(config.params['grid'])))
    elif _is_mesh(path):
        _write_mesh(path, elliptic_revolve(profile, config.params.get('revolve') or 64))
    else:
        save_profile_csv(_prepare(path), profile)


def cmd_lbowl(config):
    p = config.params
    profile = lorentz_bowl_profile(parse_forcing(p['forcing']), p['a'], r_max=p['r_max'], h=p['h'])
    logging.info(f"Slope deficit at r={profile.x[-1]:g}: {profile.deficit[-1]:.3e}")
    _write_lorentz(config, profile)
    return EXIT_OK


def cmd_lwinglike(config):
    p = config.params
    profile = lorentz_winglike_profile(parse_forcing(p['forcing']), p['a'], branch=p['branch'],
                                       r_max=p['r_max'], h=p['h'], curvature=p['curvature'])
    logging.info(f"Minimum height {profile.u.min():.10g}, slope deficit at r={profile.x[-1]:g}: "
                 f"{profile.deficit[-1]:.3e}")
    _write_lorentz(config, profile)
    return EXIT_OK


def cmd_hyperbolic(config):
    p = config.params
    profile = hyperbolic_profile(p['alpha'], p['u0'], x_extent=p['x_extent'], h=p['h'])
    path = config.output_path()
    if path is None:
        return EXIT_OK
    if _is_mesh(path):
        n_t = p.get('revolve') or 33
        t_range = (-p['t_max'], p['t_max'])
        mesh = hyperbolic_partner(profile, t_range, n_t) if p['partner'] else hyperbolic_revolve(profile, t_range, n_t)
        _write_mesh(path, mesh)
    else:
        save_hyperbolic_csv(_prepare(path), profile)
    return EXIT_OK


def cmd_grim_reaper(config):
    p = config.params
    mesh = grim_reaper(p['lam'], p['u0'], (-p['y_max'], p['y_max']), (-p['t_max'], p['t_max']), p['n'])
    path = config.output_path()
    if path is not None:
        _write_mesh(path, mesh)
    return EXIT_OK


def _write_field(path, surface):
    if path.lower().endswith('.json'):
        save_field_json(_prepare(path), surface)
    else:
        save_field_csv(_prepare(path), surface)


def _write_report(path, report):
    with open(_prepare(path), 'w', encoding='utf-8') as f:
        json.dump(report.to_dict(), f, indent=2)
    logging.info(f"Wrote report to {path}")


def _run_pair(config, signature):
    p = config.params
    source = load_field_csv(p['input'], signature)
    weight = parse_weight_spec(p['weight'])
    transform = forward_transform if signature == Signature.EUCLIDEAN else inverse_transform
    pair = transform(source, weight)
    image = resample_image_graph(pair, p['method'])
    tolerances = {'discretization': p['tolerance']} if p.get('tolerance') else None
    return pair, image, verify_pair(pair, image, tolerances)


def _cmd_transform(config, signature):
    pair, image, report = _run_pair(config, signature)
    path = config.output_path()
    if path is not None:
        _write_field(path, image)
    if config.params.get('report'):
        _write_report(config.resolve(config.params['report']), report)
    return EXIT_OK


def cmd_transform(config):
    return _cmd_transform(config, Signature.EUCLIDEAN)


def cmd_inverse_transform(config):
    return _cmd_transform(config, Signature.LORENTZIAN)


def _run_presets(names, threads):
    if threads > 1 and len(names) > 1:
        logging.info(f"Running {len(names)} presets on {min(threads, len(names))} processes")
        with Pool(processes=min(threads, len(names))) as pool:
            return pool.map(run_preset, names)
    return [run_preset(name) for name in tqdm(names, desc="Running presets", unit="preset")]


def cmd_verify(config):
    p = config.params
    if p.get('input'):
        _, _, report = _run_pair(config, Signature(p['signature']))
        results = {'input': report}
    else:
        names = list(PRESETS) if p['preset'] == 'all' else [p['preset']]
        results = dict(zip(names, _run_presets(names, config.threads)))
    store = ReportStore(config.resolve(p['store'])) if p.get('store') else None
    for name, report in results.items():
        if store is not None:
            store.record(name, report)
        status = 'PASS' if report.passed else 'FAIL ' + ', '.join(report.failures())
        print(f"{name}: {status}")
    path = config.output_path()
    if path is not None:
        if len(results) == 1:
            _write_report(path, next(iter(results.values())))
        else:
            with open(_prepare(path), 'w', encoding='utf-8') as f:
                json.dump({name: r.to_dict() for name, r in results.items()}, f, indent=2)
    failed = [name for name, report in results.items() if not report.passed]
    if failed:
        logging.error(f"Verification failed: {', '.join(failed)}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


def cmd_revolve(config):
    """Revolve a profile CSV (s,x,u,z) or transformed-curve CSV (lambda,theta)"""
    table = load_table(config.params['input'])
    if 'lambda' in table.columns:
        curve = TransformedCurve(table['lambda'].to_numpy(dtype=float), table['theta'].to_numpy(dtype=float),
                                 None, None, None, ProfileKind.BOWL)
    elif {'x', 'u', 'z'} <= set(table.columns):
        x = table['x'].to_numpy(dtype=float)
        curve = RadialProfile(None, table['s'].to_numpy(dtype=float) if 's' in table else x, x,
                              table['u'].to_numpy(dtype=float), table['z'].to_numpy(dtype=float))
    else:
        raise ConfigError(f"{config.params['input']} has neither lambda,theta nor x,u,z columns")
    mesh = elliptic_revolve(curve, config.params.get('revolve') or 64)
    path = config.output_path()
    if path is not None:
        _write_mesh(path, mesh)
    return EXIT_OK


HANDLERS = {
    'bowl': cmd_bowl,
    'winglike': cmd_winglike,
    'lbowl': cmd_lbowl,
    'lwinglike': cmd_lwinglike,
    'hyperbolic': cmd_hyperbolic,
    'grim-reaper': cmd_grim_reaper,
    'transform': cmd_transform,
    'inverse-transform': cmd_inverse_transform,
    'verify': cmd_verify,
    'revolve': cmd_revolve,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', help='Output path; .csv, .json or .obj selects the format')
    common.add_argument('--dry-run', action='store_true', help='Validate the configuration and stop')

    parser = argparse.ArgumentParser(prog='calabi', description='Weighted minimal and maximal graphs '
                                     'in R^3 and L^3 and the correspondence between them.')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('bowl', parents=[common], help='Rotational profile meeting the axis')
    p.add_argument('--weight', default='minimal', help="minimal, linear:<c>, log:<alpha> or scaledlog:<a>:<b>")
    p.add_argument('--u0', type=float, default=0.0, help='Height on the axis')
    p.add_argument('--h', type=float, default=1e-3, help='Arc-length step')
    p.add_argument('--s-max', type=float, default=5.0)
    p.add_argument('--transformed', action='store_true', help='Write the transformed curve instead')
    p.add_argument('--revolve', type=int, help='Angular samples for .obj output (default 64)')
    p.add_argument('--grid', help='Sample onto xmin:xmax:ymin:ymax:h and write the height field')

    p = sub.add_parser('winglike', parents=[common], help='Rotational profile through a neck')
    p.add_argument('--weight', default='minimal')
    p.add_argument('--x1', type=float, required=True, help='Neck radius')
    p.add_argument('--u1', type=float, required=True, help='Neck height')
    p.add_argument('--h', type=float, default=1e-3)
    p.add_argument('--s-max', type=float, default=5.0)
    p.add_argument('--transformed', action='store_true')
    p.add_argument('--revolve', type=int)
    p.add_argument('--grid')

    for name, help_text in (('lbowl', 'Entire spacelike rotational bowl'),
                            ('lwinglike', 'Spacelike profile leaving the axis along the light cone')):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument('--forcing', default='one', help="'one' or 'alpha:<a>'")
        p.add_argument('--a', type=float, default=1.0, help='Height on the axis')
        p.add_argument('--r-max', type=float, default=50.0)
        p.add_argument('--h', type=float, default=1e-2)
        p.add_argument('--revolve', type=int)
        p.add_argument('--grid')
        if name == 'lwinglike':
            p.add_argument('--branch', type=int, choices=(-1, 1), default=-1)
            p.add_argument('--curvature', type=float, help='Free cubic launch coefficient (default f(a))')

    p = sub.add_parser('hyperbolic', parents=[common], help='Alpha-maximal surface of hyperbolic type')
    p.add_argument('--alpha', type=float, required=True)
    p.add_argument('--u0', type=float, default=1.0)
    p.add_argument('--x-extent', type=float, default=5.0)
    p.add_argument('--h', type=float, default=1e-3)
    p.add_argument('--t-max', type=float, default=1.0, help='Orbit parameter range [-t_max, t_max]')
    p.add_argument('--revolve', type=int, help='Orbit samples for .obj output (default 33)')
    p.add_argument('--partner', action='store_true', help='Export the Euclidean partner instead')

    p = sub.add_parser('grim-reaper', parents=[common], help='Grim Reaper or tilted Grim Reaper mesh')
    p.add_argument('--lam', type=float, default=0.0)
    p.add_argument('--u0', type=float, default=1.0)
    p.add_argument('--y-max', type=float, default=1.0)
    p.add_argument('--t-max', type=float, default=3.0)
    p.add_argument('--n', type=int, default=33)

    for name in ('transform', 'inverse-transform'):
        p = sub.add_parser(name, parents=[common], help='Map a height field CSV (x,y,value) to its partner')
        p.add_argument('--input', required=True)
        p.add_argument('--weight', default='minimal')
        p.add_argument('--method', choices=('spline', 'linear'), default='spline')
        p.add_argument('--tolerance', type=float, help='Discretization tolerance of the report')
        p.add_argument('--report', help='Also write the invariant report here')

    p = sub.add_parser('verify', parents=[common], help='Run verification presets or check a field')
    p.add_argument('--preset', default='all', choices=list(PRESETS) + ['all'])
    p.add_argument('--input', help='Verify this field CSV instead of a preset')
    p.add_argument('--signature', choices=('euclidean', 'lorentzian'), default='euclidean')
    p.add_argument('--weight', default='minimal')
    p.add_argument('--method', choices=('spline', 'linear'), default='spline')
    p.add_argument('--tolerance', type=float)
    p.add_argument('--store', help='JSON file accumulating reports across runs')

    p = sub.add_parser('revolve', parents=[common], help='Revolve a profile or curve CSV into a mesh')
    p.add_argument('--input', required=True)
    p.add_argument('--revolve', type=int, default=64)
    return parser


def run_cli(argv=None):
    """Parse argv, run one subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_ERROR
    try:
        config = RunConfig.from_args(args)
        if config.dry_run:
            logging.info(f"Configuration for '{config.command}' is valid (dry run)")
            return EXIT_OK
        return HANDLERS[config.command](config)
    except (CalabiError, OSError) as e:
        logging.error(f"{args.command} failed: {str(e)}")
        return EXIT_ERROR

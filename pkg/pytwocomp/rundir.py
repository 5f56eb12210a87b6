"""
Run directories: settings files, logging and run manifests.
"""

import os
import json
import pathlib
import hashlib
import logging
import traceback
from copy import copy

import yaml
import jinja2

from pytwocomp.configuration import Region, two_config
from pytwocomp.lpmeasure import LPIntegrator
from pytwocomp.rates import load_rates
from pytwocomp.util import SettingsError, recursively_get_filenames

INTEGRATOR_KEYS = ("z", "samples", "seed", "chunk_size", "quadrature", "padding", "space_samples", "threads")


def parse_region(spec, dim=None):
    """
    A box from ``"lo:hi"`` or ``"lo:hi,lo:hi,..."`` (one pair per axis), a pair of corner
    lists ``[[lo, ...], [hi, ...]]``, or a pair ``[lo, hi]`` repeated over ``dim`` axes.

    Raises
    ------
    SettingsError
    """
    if spec is None:
        return Region.unit(dim or 1)
    if isinstance(spec, Region):
        return spec
    try:
        if isinstance(spec, str):
            bounds = [tuple(float(v) for v in axis.split(":")) for axis in spec.split(",")]
            if any(len(b) != 2 for b in bounds):
                raise ValueError(f"expected lo:hi per axis, got '{spec}'")
            lower, upper = [b[0] for b in bounds], [b[1] for b in bounds]
        else:
            lower, upper = spec
            if not isinstance(lower, (list, tuple)):
                lower, upper = [float(lower)], [float(upper)]
        if dim is not None and len(lower) == 1 and dim > 1:
            lower, upper = list(lower) * dim, list(upper) * dim
        region = Region(lower, upper)
    except (TypeError, ValueError) as e:
        raise SettingsError(f"Invalid region {spec!r}: {e}")
    if dim is not None and region.dim != dim:
        raise SettingsError(f"Region {region!r} does not have dimension {dim}")
    return region


def parse_orders(spec):
    """Truncation orders from ``"N+,N-"`` or a pair."""
    try:
        if isinstance(spec, str):
            spec = spec.split(",")
        orders = tuple(int(n) for n in spec)
    except (TypeError, ValueError) as e:
        raise SettingsError(f"Invalid truncation orders {spec!r}: {e}")
    if len(orders) != 2 or min(orders) < 0:
        raise SettingsError(f"Truncation orders must be two nonnegative integers, got {spec!r}")
    return orders


def parse_config(spec):
    """A configuration from ``{"plus": [...], "minus": [...]}``; scalars are one-dimensional points."""
    spec = spec or {}
    try:
        return two_config(spec.get("plus") or (), spec.get("minus") or ())
    except AttributeError:
        raise SettingsError(f"A configuration needs 'plus' and 'minus' point lists, got {spec!r}")


class RunDir(object):
    """
    Run directory class.

    Parameters
    ----------
    directory : str, Optional, default: "."
        The directory name
    mkdir : bool, Optional, default: True
        Whether to create the directory if it does not exist
    yml_files : list of string, Optional, default: ["twocomp.yml", "twocomp.json"]
        Settings files (YAML or JSON) to read.
    yml_files_recursion : int, Optional, default: -1
        Recursion level for settings files in parent directories. 0 means only this directory, 1 means
        this directory and its parent directory, etc. If -1, recurse until root.
    overrides : dict, Optional, default: dict()
        Settings with precedence over those in the files (command-line flags).
    logger : logging.Logger or None, Optional, default: None
        A logger instance. If None, handlers are attached to the ``pytwocomp`` logger on first use.
    logfile : str, Optional, default: "twocomp.log"
    loglevel_console : int, Optional, default: logging.INFO
    loglevel_file : int, Optional, default: logging.DEBUG

    Attributes
    ----------
    path : pathlib.Path
        Absolute path of this run directory
    settings : dict
        The merged settings.
    sources : dict
        The settings file each top-level key was read from.

    Examples
    --------
    Settings are read from parent directories first, files further down the tree override them.
    The templates ``{{ here }}`` and ``{{ rundir }}`` are replaced by the directory that contains the
    settings file and by the run directory.

    >>> # -- twocomp.yml --
        dim: 1
        region: "0:1"
        orders: [2, 1]
        rates:
            name: pp
            params: {m_plus: 1.0}
        simulation:
            replicas: 500
            out: {{ rundir/"moments.csv" }}

    >>> with RunDir("some_path") as rd:
    >>>     I = rd.integrator()
    >>>     rd.log("integrating")
    """

    def __init__(
            self,
            directory=".",
            mkdir=True,
            yml_files=["twocomp.yml", "twocomp.json"],
            yml_files_recursion=-1,
            overrides=dict(),
            logger=None,
            logfile="twocomp.log",
            loglevel_console=logging.INFO,
            loglevel_file=logging.DEBUG
    ):
        self.path = pathlib.Path(os.path.realpath(directory))
        self.scope_path = copy(self.path)
        if mkdir:
            if self.path.is_file():
                raise SettingsError(f"Run directory could not be created. {self.path} is a file.")
            elif not self.path.is_dir():
                os.makedirs(self.path)
        self.logger = logger
        self.logfile = logfile
        self.loglevel_console = loglevel_console
        self.loglevel_file = loglevel_file
        self._handlers = []
        self.settings = dict()
        self.sources = dict()
        self.yml_files = recursively_get_filenames(self.path, yml_files, yml_files_recursion)
        for yml_file in self.yml_files:
            if (self.path/yml_file).is_file():
                self.add_settings_from_file(self.path/yml_file)
        for key, value in overrides.items():
            self.override(key, value)

    def __enter__(self):
        self.scope_path = pathlib.Path.cwd()
        os.chdir(str(self.path))
        return self

    def __exit__(self, exc_type, exc_value, tb):
        os.chdir(self.scope_path)
        if exc_type is not None:
            self.log(traceback.format_exc(), level=logging.ERROR)
        self.close()
        return exc_type is None

    def __str__(self):
        return str(self.path)

    def __truediv__(self, other):
        return self.path / other

    def __len__(self):
        return len(os.listdir(str(self.path)))

    def __getitem__(self, key):
        return self.settings[key]

    def __contains__(self, key):
        return key in self.settings

    def get(self, key, default=None):
        return self.settings.get(key, default)

    def log(self, message, level=logging.INFO):
        """
        Write logging output to the console and the log file.

        Parameters
        ----------
        message : str
        level : int, Optional, default: logging.INFO
        """
        if self.logger is None:
            self._create_logger()
        self.logger.log(level, message)

    def close(self):
        """Detach the handlers this run directory added."""
        if self._handlers:
            for handler in self._handlers:
                self.logger.removeHandler(handler)
                handler.close()
            self.logger = None
        self._handlers = []

    def add_settings_from_file(self, yml_file):
        """
        Merge the settings of a YAML or JSON file into this RunDir.

        Top-level keys replace earlier values; mappings are merged one level deep.

        Raises
        ------
        SettingsError
            If the file is not a mapping or cannot be parsed.
        """
        yml_file = pathlib.Path(yml_file)
        with open(yml_file, "r") as f:
            try:
                dictionary = yaml.load(jinja2.Template(f.read()).render(rundir=self, here=yml_file.parent),
                                       Loader=yaml.SafeLoader)
            except (yaml.YAMLError, jinja2.TemplateError) as e:
                raise SettingsError(f"Could not read settings file {yml_file}: {e}")
        if dictionary is None:
            return
        if not isinstance(dictionary, dict):
            raise SettingsError(f"Settings file {yml_file} does not contain a mapping.")
        for key, value in dictionary.items():
            if isinstance(value, dict) and isinstance(self.settings.get(key), dict):
                merged = dict(self.settings[key])
                merged.update(value)
                value = merged
            self.settings[key] = value
            self.sources[key] = str(yml_file)

    def override(self, key, value):
        """Replace a setting by a command-line value; None leaves the setting as it is."""
        if value is not None:
            self.settings[key] = value
            self.sources[key] = "command line"

    def resolve(self, section, defaults, **flags):
        """
        Parameters of a command: the ``defaults``, updated by the mapping ``section`` of the settings
        and then by the flags that are not None.

        The result is stored under ``section``, so that the manifest holds every parameter
        the command used.

        Returns
        -------
        parameters : dict

        Raises
        ------
        SettingsError
            If the setting ``section`` is not a mapping.
        """
        block = self.settings.get(section) or {}
        if not isinstance(block, dict):
            raise SettingsError(f"The setting '{section}' must be a mapping, got {block!r}")
        parameters = dict(defaults)
        parameters.update(block)
        given = {key: value for key, value in flags.items() if value is not None}
        parameters.update(given)
        self.settings[section] = parameters
        if given:
            self.sources[section] = "command line"
        return parameters

    @property
    def dim(self):
        return int(self.settings.get("dim", 1))

    @property
    def region(self):
        return parse_region(self.settings.get("region"), self.dim)

    @property
    def orders(self):
        return parse_orders(self.settings.get("orders", (2, 2)))

    def integrator(self, **changes):
        """An :class:`LPIntegrator` from the settings."""
        kwargs = {key: self.settings[key] for key in INTEGRATOR_KEYS if self.settings.get(key) is not None}
        kwargs.update(changes)
        try:
            return LPIntegrator(self.region, orders=self.orders, **kwargs)
        except (TypeError, ValueError) as e:
            raise SettingsError(f"Invalid integration settings: {e}")

    def rates(self, torus=False):
        """The rates named in the settings, with periodic displacements on the region if ``torus``."""
        if "rates" not in self.settings:
            raise SettingsError("No rates given in the settings or on the command line.")
        spec = self.settings["rates"]
        if isinstance(spec, str) and not os.path.isabs(spec) and (self.path/spec).is_file():
            spec = str(self.path/spec)
        return load_rates(spec, self.dim, self.region if torus else None)

    def write_manifest(self, command, outputs=(), filename="manifest.json"):
        """
        Write the run manifest: settings, seed, package version, command, and a SHA-256 hash of
        the canonical settings JSON.

        Returns
        -------
        manifest : dict
        """
        import pytwocomp
        canonical = json.dumps(self.settings, sort_keys=True, separators=(",", ":"), default=str)
        manifest = {
            "command": command,
            "settings": json.loads(canonical),
            "seed": self.settings.get("seed", 0),
            "version": pytwocomp.__version__,
            "outputs": [str(o) for o in outputs],
            "sha256": hashlib.sha256(canonical.encode("utf-8")).hexdigest(),
        }
        with open(self.path/filename, "w") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)
        self.log(f"Manifest written to {self.path/filename}", level=logging.DEBUG)
        return manifest

    def _create_logger(self):
        """Attach a file and a console handler to the package logger."""
        self.logger = logging.getLogger("pytwocomp")
        self.logger.setLevel(logging.DEBUG)
        # File logging
        file_handler = logging.FileHandler(self.path/self.logfile)
        file_handler.setLevel(self.loglevel_file)
        file_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s'))
        self.logger.addHandler(file_handler)
        # Console logging
        console_handler = logging.StreamHandler()
        console_handler.setLevel(self.loglevel_console)
        console_handler.setFormatter(logging.Formatter('%(message)s'))
        self.logger.addHandler(console_handler)
        self._handlers = [file_handler, console_handler]

"""
Utilities for pytwocomp
"""

import os
import sys
import zlib
import importlib
from copy import copy

import numpy as np


class TwoCompException(Exception):
    """
    General exception class for pytwocomp module.
    """
    pass


class ConfigurationError(TwoCompException):
    """A finite configuration could not be built from the given points."""
    pass


class DuplicatePoint(ConfigurationError):
    """A point appears twice within one component."""
    pass


class DisjointnessViolation(ConfigurationError):
    """A point appears in both the plus and the minus component."""
    pass


class DimensionMismatch(ConfigurationError):
    """Points of different dimensions were mixed."""
    pass


class CapExceeded(TwoCompException):
    """Exhaustive subset enumeration was requested above the hard cap."""
    pass


class InvalidRateParams(TwoCompException):
    """Rate parameters are out of range or incomplete."""
    pass


class InvalidAlpha(TwoCompException):
    """The scaling factor alpha lies outside (0, 1/nu)."""
    pass


class StepSizeRejected(TwoCompException):
    """A time step made some hierarchy component grow by more than the allowed factor."""
    pass


class SimulationError(TwoCompException):
    """General failure of the stochastic simulation."""
    pass


class PopulationCapExceeded(SimulationError):
    """A component grew beyond the population cap."""
    pass


class ThinningBoundViolated(SimulationError):
    """A sampled rate exceeded the declared thinning bound."""
    pass


class SettingsError(TwoCompException):
    """Invalid run settings (command line or settings files)."""
    pass


def recursively_get_filenames(path, filenames, recursion_depth, current_recursion_level=0):
    """
    Get all settings filenames that a run directory should be configured from.

    Parameters
    ----------
    path : pathlib.Path
        the current directory
    filenames : list of str
        The base filenames.
    recursion_depth : int
        The maximum recursion depth (0 = only current directory, 1 = current and parents).
        -1 means recurse until root.
    current_recursion_level : int, Optional, default = 0
        Current recursion level of the function.

    Returns
    -------
    filenames: list
        A list of filenames, where the ones further up front in the list are further up in the directory tree.
        The files do not need to exist.
    """
    this_dir_files = [path / filename for filename in filenames]
    if path.parent == path:  # root directory
        return this_dir_files
    elif recursion_depth != -1 and current_recursion_level >= recursion_depth:
        return this_dir_files
    else:
        parentfiles = recursively_get_filenames(
            path.parent, filenames, recursion_depth, current_recursion_level + 1)
        return parentfiles + this_dir_files


def import_from_file(filename):
    """
    Import a python module from a file by path.

    Used to load user-defined rate suites (a module exposing ``make_rates``).

    Parameters
    ----------
    filename : str or path-like
        The file to be imported

    Returns
    -------
    pymod : python module
        The imported module
    """
    # include the path in the pythonpath to resolve local imports
    old_modules = copy(sys.modules)
    sys.path.insert(0, os.path.realpath(os.path.dirname(filename)))

    loader = importlib.machinery.SourceFileLoader("rates_module", str(filename))
    spec = importlib.util.spec_from_loader(loader.name, loader)
    pymod = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(pymod)
    finally:
        # reset sys.path and sys.modules to allow importing other modules with the same name
        sys.path.pop(0)
        sys.modules = old_modules

    return pymod


def key_to_ints(key):
    """Map a stream key (ints and strings) to non-negative integers."""
    ints = []
    for element in key:
        if isinstance(element, str):
            ints.append(zlib.crc32(element.encode("utf-8")))
        else:
            ints.append(int(element))
    if any(i < 0 for i in ints):
        raise ValueError(f"Stream keys must be non-negative, got {key}")
    return tuple(ints)


def make_generator(seed, *key):
    """
    Counter-based random generator for one stream.

    Parameters
    ----------
    seed : int
        The 64-bit run seed.
    *key : int or str
        Stream identifiers, e.g. an order pair and a chunk index.

    Returns
    -------
    generator : numpy.random.Generator
        A Philox generator whose stream depends only on ``(seed, key)``, so that results do
        not depend on how work is scheduled.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=key_to_ints(key))
    return np.random.Generator(np.random.Philox(sequence))

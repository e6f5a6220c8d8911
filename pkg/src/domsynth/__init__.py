"""Remorse-free dominant strategies, assumption trees and their propagation."""
from importlib import resources

__version__ = "0.1.0"


def corpus_path(name: str) -> str:
    """Filesystem path of a bundled example spec."""
    return str(resources.files(__package__).joinpath("corpus", name))
